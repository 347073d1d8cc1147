mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use symspace::geometry::*;
use symspace::linalg;
use symspace::model_spaces::*;
use symspace::Error;

fn space(sel: &str) -> ModelSpace {
    ModelSpace::parse(sel).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn scaled(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / linalg::norm(b).max(1.0)
}

/// Random point within tangent radius `r` of the base point.
fn near_base(s: &ModelSpace, rng: &mut rand_chacha::ChaCha8Rng, r: f64) -> Vec<f64> {
    s.exp_base(&random_vec(rng, s.tangent_dim(), r))
}

// ---- midpoints ----

#[test]
fn reported_midpoints_satisfy_the_definition() {
    let mut r = rng(1);
    for s in ModelSpace::all() {
        for _ in 0..10 {
            let x = near_base(&s, &mut r, 1.0);
            let y = near_base(&s, &mut r, 1.0);
            let m = midpoint(&s, &x, &y, &opts()).unwrap();
            if let ModelSpace::Sl2(_) = s {
                // z x⁻¹ z = y needs a square root of x⁻¹y in SL(2), which
                // exists iff its trace exceeds −2.
                let xm = DMatrix::from_row_slice(2, 2, &x);
                let ym = DMatrix::from_row_slice(2, 2, &y);
                let t = (xm.try_inverse().unwrap() * ym).trace();
                if t < -2.0 - 1e-6 {
                    assert_eq!(m.status, SolveStatus::NoneFound);
                    continue;
                }
            }
            assert!(!m.solutions.is_empty(), "{} {x:?} {y:?}", s.name());
            for z in &m.solutions {
                assert!(scaled(&s.symmetry(z, &x), &y) <= 1e-9, "{}", s.name());
            }
            assert!(m.max_residual() <= 1e-9);
        }
    }
}

#[test]
fn exponential_spaces_have_unique_midpoints() {
    let mut r = rng(2);
    for sel in ["euclidean:2", "hyperbolic", "ex5"] {
        let s = space(sel);
        for _ in 0..200 {
            let x = s.sample_point(&mut r);
            let y = s.sample_point(&mut r);
            let m = midpoint(&s, &x, &y, &opts()).unwrap();
            assert_eq!(m.status, SolveStatus::Unique, "{sel}");
            let back = midpoint(&s, &y, &x, &opts()).unwrap();
            assert!(scaled(&back.solutions[0], &m.solutions[0]) <= 1e-9, "{sel}");
        }
    }
}

/// Independent closed forms: the normalized chord on the hyperboloid, and the
/// coordinate solution of `s_z x = y` on the boost plane.
#[test]
fn midpoints_match_half_geodesics() {
    let mut r = rng(3);
    let h = space("hyperbolic");
    let ex5 = space("ex5");
    for _ in 0..100 {
        let x = h.sample_point(&mut r);
        let y = h.sample_point(&mut r);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let norm = lorentz_inner(&sum, &sum).sqrt();
        let want: Vec<f64> = sum.iter().map(|v| v / norm).collect();
        let got = midpoint(&h, &x, &y, &opts()).unwrap();
        assert!(scaled(&got.solutions[0], &want) <= 1e-9);

        let x = ex5.sample_point(&mut r);
        let y = ex5.sample_point(&mut r);
        let za = (x[0] + y[0]) / 2.0;
        let want = [za, (x[1] + y[1]) / (2.0 * ((y[0] - x[0]) / 2.0).cosh())];
        let got = midpoint(&ex5, &x, &y, &opts()).unwrap();
        assert!(scaled(&got.solutions[0], &want) <= 1e-9, "{:?} vs {want:?}", got.solutions);
    }
}

#[test]
fn non_exponential_spaces_have_multiple_midpoints() {
    // cos((π − 0)/2) = 0 and b + b' = 0, so every (π/2, t) works.
    let ex6 = space("ex6");
    let m = midpoint(&ex6, &[0.0, 1.0], &[std::f64::consts::PI, -1.0], &opts()).unwrap();
    assert_eq!(m.status, SolveStatus::Multiple);
    assert!(m.solutions.len() >= 2);
    for z in &m.solutions {
        assert!((z[0] - std::f64::consts::FRAC_PI_2).abs() <= 1e-8);
    }

    // Antipodes on the sphere: the whole equator between them.
    let s2 = space("sphere:2");
    let m = midpoint(&s2, &[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0], &opts()).unwrap();
    assert_eq!(m.status, SolveStatus::Multiple);
    assert!(m.solutions.len() >= 2);
    for z in &m.solutions {
        assert!(z[0].abs() <= 1e-8);
    }
}

#[test]
fn square_roots() {
    let e = space("euclidean:2");
    assert_eq!(square_root(&e, &[4.0, -2.0], &opts()).unwrap().solutions, vec![vec![2.0, -1.0]]);
    for s in ModelSpace::all() {
        let o = s.base_point();
        let r = square_root(&s, &o, &opts()).unwrap();
        assert!(r.solutions.iter().any(|z| scaled(z, &o) <= 1e-9), "{}", s.name());
    }
    let ex5 = space("ex5");
    let mut r = rng(4);
    for _ in 0..20 {
        let x = random_vec(&mut r, 2, 2.0);
        let half = [x[0] / 2.0, x[1] / 2.0];
        let root = square_root(&ex5, &ex5.exp_base(&x), &opts()).unwrap();
        assert_eq!(root.status, SolveStatus::Unique);
        assert!(scaled(&root.solutions[0], &ex5.exp_base(&half)) <= 1e-9);
    }
}

// ---- γ₃ and δ₃ ----

#[test]
fn gamma3_examples() {
    let e = space("euclidean:2");
    let (a, b, c) = (vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 2.0]);
    let g = gamma3(&e, &a, &b, &c, &opts()).unwrap();
    assert_eq!(g, [vec![0.0, 1.0], vec![2.0, 0.0], vec![2.0, 1.0]]);
    let p = vec![1.5, -0.5];
    assert_eq!(gamma3(&e, &p, &p, &p, &opts()).unwrap(), [p.clone(), p.clone(), p.clone()]);

    let h = space("hyperbolic");
    let mut r = rng(5);
    for _ in 0..20 {
        let [a, b, c] = [0, 1, 2].map(|_| h.sample_point(&mut r));
        let [zca, zab, zbc] = gamma3(&h, &a, &b, &c, &opts()).unwrap();
        assert!(scaled(&h.symmetry(&zca, &c), &a) <= 1e-9);
        assert!(scaled(&h.symmetry(&zab, &a), &b) <= 1e-9);
        assert!(scaled(&h.symmetry(&zbc, &b), &c) <= 1e-9);
    }
}

#[test]
fn gamma3_refuses_ambiguous_pairs() {
    let s2 = space("sphere:2");
    let (a, b, c) = ([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
    match gamma3(&s2, &a, &b, &c, &opts()) {
        Err(Error::Ambiguity { pair, count }) => {
            // Every pair on the sphere has at least the two antipodal midpoints.
            assert_eq!(pair, "(c, a)");
            assert!(count >= 2);
        }
        other => panic!("expected an ambiguity error, got {other:?}"),
    }
}

#[test]
fn delta3_examples() {
    let d = delta3_flat(&[1.0], &[2.0], &[3.0]);
    assert_eq!(d, [vec![0.0], vec![4.0], vec![2.0]]);
    let e = space("euclidean:1");
    let g = gamma3(&e, &d[0], &d[1], &d[2], &opts()).unwrap();
    assert_eq!(g, [vec![1.0], vec![2.0], vec![3.0]]);

    let z = vec![0.0; 2];
    assert_eq!(delta3_flat(&z, &z, &z), [z.clone(), z.clone(), z.clone()]);
    let x = vec![0.3, -7.0];
    assert_eq!(delta3_flat(&x, &x, &x), [x.clone(), x.clone(), x.clone()]);
}

// ---- doubles ----

#[test]
fn flat_doubles_match_delta3() {
    let e = space("euclidean:2");
    let mut r = rng(6);
    for _ in 0..100 {
        let [x, y, z] = [0, 1, 2].map(|_| random_vec(&mut r, 2, 5.0));
        let sol = double_ngon_solve(&e, &[x.clone(), y.clone(), z.clone()], &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unique);
        assert_eq!(sol.solutions[0].as_slice(), delta3_flat(&x, &y, &z).as_slice());
    }
}

#[test]
fn doubles_round_trip() {
    let mut r = rng(7);
    for sel in ["euclidean:2", "ex5"] {
        let s = space(sel);
        for _ in 0..100 {
            let t: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut r, 2, 1.5)).collect();
            let g = gamma3(&s, &t[0], &t[1], &t[2], &opts()).unwrap();
            let d = double_ngon_solve(&s, &g, &opts()).unwrap();
            assert_eq!(d.status, SolveStatus::Unique, "{sel}: {g:?}");
            let poly = &d.solutions[0];
            for k in 0..3 {
                assert!(scaled(&poly[k], &t[k]) <= 1e-8, "{sel}: {poly:?} vs {t:?}");
            }
            let again = gamma3(&s, &poly[0], &poly[1], &poly[2], &opts()).unwrap();
            for k in 0..3 {
                assert!(scaled(&again[k], &g[k]) <= 1e-8);
            }
        }
    }
}

#[test]
fn ex5_doubles_are_unique_for_odd_n() {
    let ex5 = space("ex5");
    let mut r = rng(8);
    for n in [3, 5] {
        for _ in 0..10 {
            let mids: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut r, 2, 2.0)).collect();
            let d = double_ngon_solve(&ex5, &mids, &opts()).unwrap();
            assert_eq!(d.status, SolveStatus::Unique, "n = {n}: {mids:?}");
            assert_eq!(gamma_n(&ex5, &d.solutions[0], &opts()).unwrap().len(), n);
            let back = gamma_n(&ex5, &d.solutions[0], &opts()).unwrap();
            for k in 0..n {
                assert!(scaled(&back[k], &mids[k]) <= 1e-8);
            }
        }
    }
}

#[test]
fn one_gon_is_its_own_midpoint() {
    for sel in ["euclidean:2", "ex5", "hyperbolic"] {
        let s = space(sel);
        let x = s.exp_base(&[0.4, -0.3]);
        let d = double_ngon_solve(&s, std::slice::from_ref(&x), &opts()).unwrap();
        assert_eq!(d.status, SolveStatus::Unique, "{sel}");
        assert!(scaled(&d.solutions[0][0], &x) <= 1e-9);
    }
}

#[test]
fn even_polygons_are_rejected() {
    let e = space("euclidean:2");
    let mids = vec![vec![0.0, 0.0]; 4];
    assert!(matches!(double_ngon_solve(&e, &mids, &opts()), Err(Error::InvalidInput(_))));
    assert!(matches!(double_ngon_solve(&e, &[], &opts()), Err(Error::InvalidInput(_))));
    assert!(matches!(double_ngon_flat(&mids[..2]), Err(Error::InvalidInput(_))));
}

// ---- hyperbolic criterion ----

#[test]
fn hyperbolic_determinant_examples() {
    let o = [0.0, 0.0, 1.0];
    let c = hyperbolic_double_exists(&o, &o, &o).unwrap();
    assert!(c.exists && c.det == 0.0);
    let h = space("hyperbolic");
    let line: Vec<Vec<f64>> = [-1.0, 0.5, 2.0].iter().map(|&t| h.exp_base(&[t, 0.0])).collect();
    let c = hyperbolic_double_exists(&line[0], &line[1], &line[2]).unwrap();
    assert!(c.exists && c.det.abs() <= 1e-12);
    assert!(hyperbolic_double_exists(&o, &o, &[0.0, 0.0, -1.0]).is_err());
}

fn equilateral(h: &ModelSpace, r: f64) -> [Vec<f64>; 3] {
    let dir = |k: f64| {
        let a = 2.0 * std::f64::consts::PI * k / 3.0;
        h.exp_base(&[r * a.cos(), r * a.sin()])
    };
    [dir(0.0), dir(1.0), dir(2.0)]
}

#[test]
fn hyperbolic_threshold_radius_agrees_with_solver() {
    let h = space("hyperbolic");
    let det2 = |r: f64| {
        let [x, y, z] = equilateral(&h, r);
        hyperbolic_double_exists(&x, &y, &z).unwrap().det.powi(2)
    };
    assert!(det2(0.1) < 1.0 && det2(3.0) > 1.0);
    let (mut lo, mut hi) = (0.1, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if det2(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (r, expect) in [(0.8 * lo, true), (1.2 * hi, false)] {
        let [x, y, z] = equilateral(&h, r);
        let d = double_ngon_solve(&h, &[x, y, z], &opts()).unwrap();
        assert_eq!(!d.solutions.is_empty(), expect, "radius {r}, threshold {lo}");
    }
}

#[test]
fn hyperbolic_criterion_matches_solver() {
    let h = space("hyperbolic");
    let mut r = rng(9);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..200 {
        let [x, y, z] = [0, 1, 2].map(|_| near_base(&h, &mut r, 1.6));
        let crit = hyperbolic_double_exists(&x, &y, &z).unwrap();
        let d2 = crit.det * crit.det;
        let d = double_ngon_solve(&h, &[x, y, z], &opts()).unwrap();
        let found = !d.solutions.is_empty();
        if (d2 - 1.0).abs() > 1e-3 {
            assert_eq!(found, crit.exists, "det² = {d2}");
            assert_eq!(
                d.status == SolveStatus::NoneFound,
                !crit.exists,
                "det² = {d2}"
            );
        }
        if crit.exists {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 10 && no > 10, "{yes} / {no}");
}

// ---- transvection placement ----

#[test]
fn placement_examples() {
    let e = Euclidean::new(2);
    let g = e.translation(&[2.0, 0.0]);
    let p = transvection_placement(&e, &g, &[0.0, 0.0], &opts()).unwrap();
    assert_eq!(p.status, SolveStatus::Unique);
    assert_eq!(p.solutions[0], vec![-1.0, 0.0]);
    assert_eq!(flat_placement(&e, &[2.0, 0.0], &[0.0, 0.0]), vec![-1.0, 0.0]);

    for sel in ["hyperbolic", "ex5"] {
        let s = space(sel);
        let group = s.realization().unwrap();
        let id = group.exp_algebra(&vec![0.0; s.tangent_dim()]);
        let z = s.exp_base(&[0.3, 0.2]);
        let p = transvection_placement(&s, &id, &z, &opts()).unwrap();
        assert_eq!(p.status, SolveStatus::Unique, "{sel}");
        assert!(scaled(&p.solutions[0], &z) <= 1e-9);
    }
}

#[test]
fn ex5_placement_is_unique() {
    let s = space("ex5");
    let group = s.realization().unwrap();
    let mut r = rng(10);
    for _ in 0..20 {
        let g = group.exp_algebra(&random_vec(&mut r, 2, 1.5));
        let z = s.sample_point(&mut r);
        let p = transvection_placement(&s, &g, &z, &opts()).unwrap();
        assert_eq!(p.status, SolveStatus::Unique);
        let x = &p.solutions[0];
        assert!(scaled(&group.act(&g, x), &s.symmetry(&z, x)) <= 1e-9);
    }
}

#[test]
fn large_boost_cannot_be_placed() {
    let h = Hyperbolic::plane();
    let g = h.boost(0, 10.0);
    let z = h.exp_base(&[0.0, 1.0]);
    let p = transvection_placement(&h, &g, &z, &opts()).unwrap();
    assert_eq!(p.status, SolveStatus::NoneFound);
    assert!(p.solutions.is_empty());
}

#[test]
fn placement_rejects_foreign_elements() {
    let h = Hyperbolic::plane();
    let z = h.base_point();
    let bad = DMatrix::identity(3, 3) * 2.0;
    assert!(matches!(transvection_placement(&h, &bad, &z, &opts()), Err(Error::InvalidInput(_))));
}

// ---- product chart ----

fn product() -> ProductSpace<Hyperbolic, SolvablePlane> {
    ProductSpace::new(Hyperbolic::plane(), SolvablePlane::ex5())
}

#[test]
fn product_chart_examples() {
    let p = product();
    let o = p.base_point();
    assert!(scaled(&product_chart(&p, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), &o) <= 1e-15);
    let x = [0.7, -0.4];
    let got = product_chart(&p, &x, &[0.0, 0.0]).unwrap();
    assert!(scaled(&got, &p.exp_base(&[0.7, -0.4, 0.0, 0.0])) <= 1e-12);
    assert!(product_chart(&p, &[0.0], &[0.0, 0.0]).is_err());
}

/// Newton on `(X, Y) ↦ chart(product_chart(X, Y))` from a perturbed guess.
#[test]
fn product_chart_inverts_numerically() {
    let p = product();
    let mut r = rng(11);
    let map = |v: &[f64]| p.to_chart(&product_chart(&p, &v[..2], &v[2..]).unwrap());
    for _ in 0..50 {
        let truth = random_vec(&mut r, 4, 1.5);
        let target = map(&truth);
        let mut v: Vec<f64> = truth.iter().map(|t| t + r.random_range(-0.1..0.1)).collect();
        for _ in 0..30 {
            let f = DVector::from_iterator(4, map(&v).iter().zip(&target).map(|(a, b)| a - b));
            if f.norm() < 1e-14 {
                break;
            }
            let h = 1e-7;
            let jac = DMatrix::from_fn(4, 4, |i, j| {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[j] += h;
                vm[j] -= h;
                (map(&vp)[i] - map(&vm)[i]) / (2.0 * h)
            });
            let step = jac.lu().solve(&f).expect("nonsingular chart");
            for (vi, s) in v.iter_mut().zip(step.iter()) {
                *vi -= s;
            }
        }
        assert!(linalg::dist(&v, &truth) <= 1e-8, "{v:?} vs {truth:?}");
    }
}

#[test]
fn product_chart_is_injective_on_samples() {
    let rep = product_chart_injectivity(&product(), 10_000, 2.0, 12).unwrap();
    assert_eq!(rep.samples, 10_000);
    assert_eq!(rep.collisions, 0);
}
