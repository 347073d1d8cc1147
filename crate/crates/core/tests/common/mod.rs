//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symspace::linalg;
use symspace::lts::LtsStructure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    linalg::rng(seed)
}

/// `[X,Y,Z] = s·(⟨X,Z⟩Y − ⟨Y,Z⟩X)`; `s = 1` is the round sphere.
pub fn constant_curvature(dim: usize, s: f64) -> LtsStructure {
    LtsStructure::from_bracket(dim, |x, y, z| {
        let xz: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
        let yz: f64 = y.iter().zip(z).map(|(a, b)| a * b).sum();
        (0..dim).map(|l| s * (xz * y[l] - yz * x[l])).collect()
    })
}

/// The group system `[[X,Y],Z]` of a Lie algebra given by its bracket.
pub fn group_lts<F>(dim: usize, br: F) -> LtsStructure
where
    F: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    LtsStructure::from_bracket(dim, |x, y, z| br(&br(x, y), z))
}

/// Semidirect bracket on `a ⊕ U` with `a` abelian of dim `r` acting on `U`
/// through the commuting matrices `ns`.
pub fn semidirect_bracket(r: usize, ns: &[DMatrix<f64>], x: &[f64], y: &[f64]) -> Vec<f64> {
    let u = ns[0].nrows();
    let mut out = vec![0.0; r + u];
    for (i, n) in ns.iter().enumerate() {
        for p in 0..u {
            for q in 0..u {
                out[r + p] += n[(p, q)] * (x[i] * y[r + q] - y[i] * x[r + q]);
            }
        }
    }
    out
}

/// `R ⋉ R²` acting by `[[1,−1],[1,1]]`: its roots have nonzero imaginary part.
pub fn spiral_lts() -> LtsStructure {
    let n = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
    group_lts(3, |x, y| semidirect_bracket(1, std::slice::from_ref(&n), x, y))
}

/// Orthogonal times a mild diagonal times orthogonal: condition number ≤ 2.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let q1 = linalg::gaussian_matrix(rng, n, n).qr().q();
    let q2 = linalg::gaussian_matrix(rng, n, n).qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(0.8..1.6)));
    q1 * d * q2
}

/// Random solvable system of dim ≤ `max_dim` (at least 2): the group system
/// of `a ⋉ U` with `a` abelian of dim 1 or 2 and `U` built from 1- and
/// 2-dimensional blocks (hyperbolic-type, rotation-type or scalar), followed
/// by a well-conditioned change of basis.
pub fn random_solvable(rng: &mut ChaCha8Rng, max_dim: usize) -> LtsStructure {
    let max_dim = max_dim.max(2);
    let r = if max_dim >= 3 && rng.random_bool(0.5) { 2 } else { 1 };
    let mut blocks = Vec::new();
    let mut u = 0;
    while u < max_dim - r {
        let size = if max_dim - r - u >= 2 && rng.random_bool(0.6) { 2 } else { 1 };
        blocks.push((size, rng.random_range(0..3u8)));
        u += size;
        if rng.random_bool(0.3) {
            break;
        }
    }
    // Magnitudes are kept in [0.5, 1.5] and `|e/d|` away from 1 so that the
    // structure is not hidden below rank thresholds.
    let mag = |rng: &mut ChaCha8Rng| {
        let v: f64 = rng.random_range(0.5..1.5);
        if rng.random_bool(0.5) { v } else { -v }
    };
    let shapes: Vec<(usize, DMatrix<f64>)> = blocks
        .iter()
        .map(|&(size, kind)| {
            let d = mag(rng);
            let e = d * if rng.random_bool(0.5) { rng.random_range(0.2..0.7) } else { rng.random_range(1.4..2.5) };
            let m = match (size, kind) {
                (1, _) => DMatrix::from_element(1, 1, d),
                (_, 0) => DMatrix::from_row_slice(2, 2, &[d, e, -e, -d]),
                _ => DMatrix::from_row_slice(2, 2, &[d, -e, e, d]),
            };
            (size, m)
        })
        .collect();
    let ns: Vec<DMatrix<f64>> = (0..r)
        .map(|_| {
            let mut n = DMatrix::zeros(u, u);
            let mut off = 0;
            for (size, m) in &shapes {
                let c = mag(rng);
                n.view_mut((off, off), (*size, *size)).copy_from(&(m * c));
                off += size;
            }
            n
        })
        .collect();
    let dim = r + u;
    let lts = group_lts(dim, |x, y| semidirect_bracket(r, &ns, x, y));
    let p = well_conditioned(rng, dim);
    lts.change_basis(&p).expect("invertible")
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-radius..radius)).collect()
}

/// Characteristic polynomial `λⁿ + c₁λⁿ⁻¹ + … + cₙ` by Faddeev–LeVerrier;
/// returns `[1, c₁, …, cₙ]`.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[k - 1];
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Roots of a monic polynomial `[1, c₁, …, cₙ]` by Durand–Kerner, finished
/// with Newton steps on each root.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let deriv = |z: Complex64| {
        coeffs[..n]
            .iter()
            .enumerate()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| acc * z + c * (n - i) as f64)
    };
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*zi);
            if d.norm() > 1e-300 {
                *zi -= eval(*zi) / d;
            }
        }
    }
    z
}

/// Bottleneck distance between two equal-size multisets (exact for small n).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn rec(a: &[Complex64], b: &[Complex64], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(a, b, used, i + 1, cur.max((a[i] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

pub fn mat_from_fn(r: usize, c: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, f)
}
