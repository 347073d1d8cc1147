//! Midpoints, polygon doubles and transvection placement.
//!
//! Closed forms are used where they exist (exponential spaces, flat space);
//! everything else goes through a multistart Gauss–Newton solver in chart
//! coordinates with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, unsupported, Error, Result};
use crate::linalg;
use crate::model_spaces::{lorentz_inner, Euclidean, ProductSpace, Symmetric, SymmetricSpace};

#[derive(Debug, Clone, Serialize)]
pub struct SolverOptions {
    /// Bound on the scaled residual `‖F‖ / max(1, ‖target‖)`.
    pub tol: f64,
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub dedup_radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            starts: 400,
            seed: 0,
            max_iter: 100,
            dedup_radius: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Unique,
    Multiple,
    NoneFound,
    Diverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult<T> {
    pub solutions: Vec<T>,
    pub residuals: Vec<f64>,
    pub status: SolveStatus,
    pub starts: usize,
    /// Starts that reached the residual tolerance.
    pub converged: usize,
    /// Starts whose iterate left the chart domain or produced non-finite values.
    pub escaped: usize,
}

impl<T> SolveResult<T> {
    fn closed_form(solution: T, residual: f64) -> Self {
        Self {
            solutions: vec![solution],
            residuals: vec![residual],
            status: SolveStatus::Unique,
            starts: 0,
            converged: 0,
            escaped: 0,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn map<U>(self, f: impl FnMut(T) -> U) -> SolveResult<U> {
        SolveResult {
            solutions: self.solutions.into_iter().map(f).collect(),
            residuals: self.residuals,
            status: self.status,
            starts: self.starts,
            converged: self.converged,
            escaped: self.escaped,
        }
    }
}

/// A residual map on chart coordinates: `None` when `c` is outside the chart
/// or the map is not finite; otherwise the residual vector and its scale.
pub trait ChartEquation: Sync {
    fn eval(&self, c: &[f64]) -> Option<(Vec<f64>, f64)>;
}

impl<F> ChartEquation for F
where
    F: Fn(&[f64]) -> Option<(Vec<f64>, f64)> + Sync,
{
    fn eval(&self, c: &[f64]) -> Option<(Vec<f64>, f64)> {
        self(c)
    }
}

fn scaled(r: &(Vec<f64>, f64)) -> f64 {
    linalg::norm(&r.0) / r.1.max(1.0)
}

fn finite(r: Option<(Vec<f64>, f64)>) -> Option<(Vec<f64>, f64)> {
    r.filter(|(v, s)| s.is_finite() && v.iter().all(|x| x.is_finite()))
}

enum StartOutcome {
    Converged(Vec<f64>, f64),
    Stalled,
    Escaped,
}

fn jacobian<E: ChartEquation + ?Sized>(eq: &E, c: &[f64], m: usize) -> Option<DMatrix<f64>> {
    let h = 1e-6 * (1.0 + linalg::norm(c));
    let mut jac = DMatrix::zeros(m, c.len());
    let mut probe = c.to_vec();
    for j in 0..c.len() {
        probe[j] = c[j] + h;
        let fp = finite(eq.eval(&probe))?;
        probe[j] = c[j] - h;
        let fm = finite(eq.eval(&probe))?;
        probe[j] = c[j];
        for i in 0..m {
            jac[(i, j)] = (fp.0[i] - fm.0[i]) / (2.0 * h);
        }
    }
    Some(jac)
}

fn run_start<E: ChartEquation + ?Sized>(eq: &E, start: &[f64], opts: &SolverOptions) -> StartOutcome {
    let Some(mut cur) = finite(eq.eval(start)) else {
        return StartOutcome::Escaped;
    };
    let mut c = start.to_vec();
    let mut res = scaled(&cur);
    let mut polish = 0;
    for _ in 0..opts.max_iter {
        if res <= opts.tol {
            polish += 1;
            if polish > 2 || res == 0.0 {
                break;
            }
        }
        let m = cur.0.len();
        let Some(jac) = jacobian(eq, &c, m) else {
            return StartOutcome::Escaped;
        };
        let rhs = DVector::from_column_slice(&cur.0);
        let step = linalg::lstsq(&jac, &rhs, 1e-13);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(a, d)| a - t * d).collect();
            if let Some(r) = finite(eq.eval(&trial)) {
                let rn = scaled(&r);
                if rn < res * (1.0 - 1e-4 * t) || rn == 0.0 {
                    accepted = Some((trial, r, rn));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, r, rn)) => {
                c = trial;
                cur = r;
                res = rn;
            }
            None => break,
        }
    }
    if res <= opts.tol {
        StartOutcome::Converged(c, res)
    } else {
        StartOutcome::Stalled
    }
}

/// Runs Gauss–Newton from every start (in parallel, collected in start
/// order), maps converged charts through `decode` and merges solutions closer
/// than the dedup radius. Solutions are sorted lexicographically by `key`.
pub fn newton_solve<E, D, K>(
    eq: &E,
    starts: &[Vec<f64>],
    decode: D,
    key: K,
    opts: &SolverOptions,
) -> SolveResult<Vec<f64>>
where
    E: ChartEquation + ?Sized,
    D: Fn(&[f64]) -> Option<Vec<f64>>,
    K: Fn(&[f64]) -> Vec<f64>,
{
    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|s| run_start(eq, s, opts))
        .collect();
    let escaped = outcomes
        .iter()
        .filter(|o| matches!(o, StartOutcome::Escaped))
        .count();
    let mut found: Vec<(Vec<f64>, f64)> = outcomes
        .into_iter()
        .filter_map(|o| match o {
            StartOutcome::Converged(c, r) => decode(&c).map(|p| (p, r)),
            _ => None,
        })
        .collect();
    let converged = found.len();
    found.sort_by(|a, b| {
        let (ka, kb) = (key(&a.0), key(&b.0));
        ka.iter()
            .zip(&kb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut clusters: Vec<(Vec<f64>, f64)> = Vec::new();
    for (p, r) in found {
        let radius = |q: &[f64]| opts.dedup_radius * linalg::norm(q).max(1.0);
        match clusters
            .iter_mut()
            .find(|(q, _)| linalg::dist(q, &p) <= radius(q))
        {
            Some(slot) => {
                if r < slot.1 {
                    *slot = (p, r);
                }
            }
            None => clusters.push((p, r)),
        }
    }
    let status = match clusters.len() {
        _ if escaped == starts.len() => SolveStatus::Diverged,
        0 => SolveStatus::NoneFound,
        1 => SolveStatus::Unique,
        _ => SolveStatus::Multiple,
    };
    let (solutions, residuals) = clusters.into_iter().unzip();
    SolveResult {
        solutions,
        residuals,
        status,
        starts: starts.len(),
        converged,
        escaped,
    }
}

fn scaled_dist(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / linalg::norm(b).max(1.0)
}

/// Solves `F(p) = 0` for a point `p` of `space`, starting near `data`.
fn solve_on_space<S, F>(
    space: &S,
    data: &[Vec<f64>],
    residual: F,
    opts: &SolverOptions,
) -> SolveResult<Vec<f64>>
where
    S: SymmetricSpace + ?Sized,
    F: Fn(&[f64]) -> (Vec<f64>, f64) + Sync,
{
    let eq = |c: &[f64]| space.from_chart(c).map(|p| residual(&p));
    let starts = space.start_points(data, opts.starts);
    newton_solve(&eq, &starts, |c| space.from_chart(c), |p| space.to_chart(p), opts)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `z` with `s_z x = y`.
pub fn midpoint<S: SymmetricSpace + ?Sized>(
    space: &S,
    x: &[f64],
    y: &[f64],
    opts: &SolverOptions,
) -> Result<SolveResult<Vec<f64>>> {
    space.validate(x)?;
    space.validate(y)?;
    if space.has_log() {
        if let Some(group) = space.realization() {
            // Exp_x(½ Log_x y) with Exp_x = g·Exp_o·g⁻¹ for g·o = x.
            let g = group.lift(x);
            let ginv = g
                .clone()
                .try_inverse()
                .ok_or_else(|| invalid("singular lift"))?;
            let v = space.log_base(&group.act(&ginv, y))?;
            let half: Vec<f64> = v.iter().map(|t| t / 2.0).collect();
            let z = group.act(&g, &space.exp_base(&half));
            let r = scaled_dist(&space.symmetry(&z, x), y);
            return Ok(SolveResult::closed_form(z, r));
        }
    }
    let target = y.to_vec();
    let scale = linalg::norm(y).max(1.0);
    Ok(solve_on_space(
        space,
        &[x.to_vec(), y.to_vec()],
        |z| (sub(&space.symmetry(z, x), &target), scale),
        opts,
    ))
}

/// Midpoints of `x` and the base point.
pub fn square_root<S: SymmetricSpace + ?Sized>(
    space: &S,
    x: &[f64],
    opts: &SolverOptions,
) -> Result<SolveResult<Vec<f64>>> {
    midpoint(space, x, &space.base_point(), opts)
}

fn unique_midpoint<S: SymmetricSpace + ?Sized>(
    space: &S,
    x: &[f64],
    y: &[f64],
    label: String,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let r = midpoint(space, x, y, opts)?;
    match r.status {
        SolveStatus::Unique => Ok(r.solutions.into_iter().next().expect("one solution")),
        _ => Err(Error::Ambiguity {
            pair: label,
            count: r.solutions.len(),
        }),
    }
}

/// `γ_n(p) = (γ(p_n,p_1), γ(p_1,p_2), …, γ(p_{n−1},p_n))`.
pub fn gamma_n<S: SymmetricSpace + ?Sized>(
    space: &S,
    points: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    if n == 0 {
        return Err(invalid("empty polygon"));
    }
    (0..n)
        .map(|k| {
            let prev = (k + n - 1) % n;
            unique_midpoint(
                space,
                &points[prev],
                &points[k],
                format!("(p{}, p{})", prev + 1, k + 1),
                opts,
            )
        })
        .collect()
}

/// `γ₃(a,b,c) = (γ(c,a), γ(a,b), γ(b,c))`.
pub fn gamma3<S: SymmetricSpace + ?Sized>(
    space: &S,
    a: &[f64],
    b: &[f64],
    c: &[f64],
    opts: &SolverOptions,
) -> Result<[Vec<f64>; 3]> {
    let ca = unique_midpoint(space, c, a, "(c, a)".into(), opts)?;
    let ab = unique_midpoint(space, a, b, "(a, b)".into(), opts)?;
    let bc = unique_midpoint(space, b, c, "(b, c)".into(), opts)?;
    Ok([ca, ab, bc])
}

/// `δ₃(x,y,z) = (y − z + x, z − x + y, x − y + z)`, the flat inverse of `γ₃`.
pub fn delta3_flat(x: &[f64], y: &[f64], z: &[f64]) -> [Vec<f64>; 3] {
    let comb = |p: &[f64], q: &[f64], r: &[f64]| -> Vec<f64> {
        p.iter()
            .zip(q)
            .zip(r)
            .map(|((p, q), r)| p - q + r)
            .collect()
    };
    [comb(y, z, x), comb(z, x, y), comb(x, y, z)]
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HyperbolicDoubleCheck {
    pub exists: bool,
    pub det: f64,
}

/// A double triangle of midpoints `x, y, z` on the hyperboloid exists iff
/// `det(x y z)² < 1`.
pub fn hyperbolic_double_exists(
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<HyperbolicDoubleCheck> {
    for p in [x, y, z] {
        if p.len() != 3 || p[2] <= 0.0 || (lorentz_inner(p, p) - 1.0).abs() > 1e-10 * (1.0 + p[2] * p[2]) {
            return Err(invalid("points must lie on the upper sheet of the hyperboloid"));
        }
    }
    let m = DMatrix::from_columns(&[
        DVector::from_column_slice(x),
        DVector::from_column_slice(y),
        DVector::from_column_slice(z),
    ]);
    let det = m.determinant();
    Ok(HyperbolicDoubleCheck {
        exists: det * det < 1.0,
        det,
    })
}

/// Applies `s_{m_k} ∘ … ∘ s_{m_2}` then `s_{m_1}`, i.e. one full turn around
/// the polygon starting from the first vertex.
fn turn<S: SymmetricSpace + ?Sized>(space: &S, mids: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut q = p.to_vec();
    for m in mids.iter().skip(1).chain(mids.iter().take(1)) {
        q = space.symmetry(m, &q);
    }
    q
}

fn vertices<S: SymmetricSpace + ?Sized>(space: &S, mids: &[Vec<f64>], first: Vec<f64>) -> Vec<Vec<f64>> {
    let mut out = vec![first];
    for m in &mids[1..] {
        let next = space.symmetry(m, out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

fn closure_residual<S: SymmetricSpace + ?Sized>(space: &S, mids: &[Vec<f64>], poly: &[Vec<f64>]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let prev = &poly[(k + n - 1) % n];
            scaled_dist(&space.symmetry(&mids[k], prev), &poly[k])
        })
        .fold(0.0, f64::max)
}

/// Flat double of an odd polygon, evaluated like `δ₃`:
/// `p_k = (m_{k+1} − m_{k+2} + … − m_{k−1}) + m_k`, indices cyclic.
pub fn double_ngon_flat(mids: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = mids.len();
    if n.is_multiple_of(2) {
        return Err(invalid("doubles are only defined for odd n"));
    }
    let d = mids[0].len();
    Ok((0..n)
        .map(|k| {
            if n == 1 {
                return mids[0].clone();
            }
            let mut acc = mids[(k + 1) % n].clone();
            for j in 2..n {
                let m = &mids[(k + j) % n];
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                for i in 0..d {
                    acc[i] += sign * m[i];
                }
            }
            for i in 0..d {
                acc[i] += mids[k][i];
            }
            acc
        })
        .collect())
}

/// Polygons `p` with `γ_n(p) = mids` for odd `n`.
pub fn double_ngon_solve<S: SymmetricSpace + ?Sized>(
    space: &S,
    mids: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<SolveResult<Vec<Vec<f64>>>> {
    let n = mids.len();
    if n == 0 || n.is_multiple_of(2) {
        return Err(invalid(format!(
            "doubles are only defined for odd n, got n = {n}"
        )));
    }
    for m in mids {
        space.validate(m)?;
    }
    if space.is_euclidean() {
        let poly = double_ngon_flat(mids)?;
        let r = closure_residual(space, mids, &poly);
        return Ok(SolveResult::closed_form(poly, r));
    }
    let first = solve_on_space(
        space,
        mids,
        |p| {
            let q = turn(space, mids, p);
            let scale = linalg::norm(p).max(1.0);
            (sub(&q, p), scale)
        },
        opts,
    );
    let mut out = first.map(|p| vertices(space, mids, p));
    out.residuals = out
        .solutions
        .iter()
        .map(|poly| closure_residual(space, mids, poly))
        .collect();
    Ok(out)
}

/// `x` with `g·x = s_z x`.
pub fn transvection_placement<S: SymmetricSpace + ?Sized>(
    space: &S,
    g: &DMatrix<f64>,
    z: &[f64],
    opts: &SolverOptions,
) -> Result<SolveResult<Vec<f64>>> {
    let group = space
        .realization()
        .ok_or_else(|| unsupported(format!("{} has no group realization", space.name())))?;
    space.validate(z)?;
    if !group.contains(g) {
        return Err(invalid("g is not in the transvection group"));
    }
    if space.is_euclidean() {
        let n = z.len();
        let x: Vec<f64> = (0..n).map(|i| z[i] - g[(i, n)] / 2.0).collect();
        let r = scaled_dist(&group.act(g, &x), &space.symmetry(z, &x));
        return Ok(SolveResult::closed_form(x, r));
    }
    let moved = group.act(g, &space.base_point());
    Ok(solve_on_space(
        space,
        &[z.to_vec(), moved],
        |x| {
            let gx = group.act(g, x);
            let scale = linalg::norm(&gx).max(1.0);
            (sub(&gx, &space.symmetry(z, x)), scale)
        },
        opts,
    ))
}

/// `(X, Y) ↦ Exp_o(X/2) ⊥ Exp_o(Y)` with `X` tangent to the first factor and
/// `Y` to the second.
pub fn product_chart<A: SymmetricSpace, B: SymmetricSpace>(
    space: &ProductSpace<A, B>,
    x: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    let (d1, d2) = (space.first.tangent_dim(), space.second.tangent_dim());
    if x.len() != d1 || y.len() != d2 {
        return Err(invalid("tangent vectors do not match the factors"));
    }
    let mut half = x.iter().map(|v| v / 2.0).collect::<Vec<_>>();
    half.resize(d1 + d2, 0.0);
    let mut yy = vec![0.0; d1];
    yy.extend_from_slice(y);
    Ok(crate::model_spaces::perp_product(
        space,
        &space.exp_base(&half),
        &space.exp_base(&yy),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub samples: usize,
    pub collisions: usize,
    pub closest_image_gap: f64,
}

/// Looks for two inputs more than `1e-6` apart whose images are within `1e-9`
/// (chart distance).
pub fn product_chart_injectivity<A: SymmetricSpace, B: SymmetricSpace>(
    space: &ProductSpace<A, B>,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<InjectivityReport> {
    let (d1, d2) = (space.first.tangent_dim(), space.second.tangent_dim());
    let mut rng = linalg::rng(seed);
    let inputs: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..d1 + d2).map(|_| rng.random_range(-radius..=radius)).collect())
        .collect();
    let mut images = inputs
        .iter()
        .map(|v| {
            let p = product_chart(space, &v[..d1], &v[d1..])?;
            Ok((space.to_chart(&p), v.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    images.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
    let mut collisions = 0;
    let mut gap = f64::INFINITY;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[j].0[0] - images[i].0[0] > 1e-3 {
                break;
            }
            let di = linalg::dist(&images[i].0, &images[j].0);
            gap = gap.min(di);
            if di <= 1e-9 && linalg::dist(&images[i].1, &images[j].1) > 1e-6 {
                collisions += 1;
            }
        }
    }
    Ok(InjectivityReport {
        samples,
        collisions,
        closest_image_gap: gap,
    })
}

/// Flat placement used as a reference: `z − v/2` for the translation by `v`.
pub fn flat_placement(space: &Euclidean, v: &[f64], z: &[f64]) -> Vec<f64> {
    debug_assert_eq!(v.len(), space.dim());
    z.iter().zip(v).map(|(zi, vi)| zi - vi / 2.0).collect()
}
