//! Concrete symmetric spaces with closed-form symmetries and exponentials.
//!
//! Points are stored in an ambient representation (unit vectors for the
//! sphere, hyperboloid vectors, flattened matrices for the group) and mapped to
//! chart coordinates for solvers and I/O.

mod euclidean;
mod group;
mod hyperbolic;
mod product;
mod solvable;
mod sphere;

pub use euclidean::Euclidean;
pub use group::Sl2Group;
pub use hyperbolic::{lorentz_inner, Hyperbolic};
pub use product::ProductSpace;
pub use solvable::{SolvableKind, SolvablePlane};
pub use sphere::Sphere;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, unsupported, Result};
use crate::linalg;
use crate::lts::LtsStructure;

/// What the Loos axioms need: a symmetry map and a way to draw points.
pub trait Symmetric: Send + Sync {
    fn chart_dim(&self) -> usize;
    /// `s_x(y)` in ambient coordinates; inputs are assumed valid.
    fn symmetry(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn to_chart(&self, p: &[f64]) -> Vec<f64>;
    /// `None` outside the chart's domain.
    #[allow(clippy::wrong_self_convention)]
    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>>;
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

pub trait SymmetricSpace: Symmetric {
    fn name(&self) -> String;
    fn ambient_dim(&self) -> usize;
    fn tangent_dim(&self) -> usize {
        self.chart_dim()
    }
    fn base_point(&self) -> Vec<f64>;
    fn validate(&self, p: &[f64]) -> Result<()>;
    fn exp_base(&self, x: &[f64]) -> Vec<f64>;
    fn has_log(&self) -> bool {
        false
    }
    fn log_base(&self, _y: &[f64]) -> Result<Vec<f64>> {
        Err(unsupported(format!(
            "{} is not exponential; no global logarithm",
            self.name()
        )))
    }
    /// The Lie triple system at the base point.
    fn lts(&self) -> LtsStructure;
    fn realization(&self) -> Option<&dyn GroupRealization> {
        None
    }
    /// Flat `R^n` with the affine realization; enables closed forms.
    fn is_euclidean(&self) -> bool {
        false
    }

    /// Multistart seeds for solvers, in chart coordinates, near the given
    /// ambient points.
    fn start_points(&self, data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        let charts: Vec<Vec<f64>> = data.iter().map(|p| self.to_chart(p)).collect();
        let d = self.chart_dim();
        let axes = (0..d)
            .map(|i| {
                let lo = charts.iter().map(|c| c[i]).fold(0.0f64, f64::min);
                let hi = charts.iter().map(|c| c[i]).fold(0.0f64, f64::max);
                let margin = (hi - lo).max(1.0);
                (lo - margin, hi + margin)
            })
            .collect::<Vec<_>>();
        uniform_grid(&axes, count)
    }

    fn symmetry_checked(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.symmetry(x, y))
    }
}

/// A matrix group acting transitively, whose algebra contains `m`.
pub trait GroupRealization: Send + Sync {
    /// Matrices of the basis of `m`, in the order of the tangent coordinates.
    fn generators(&self) -> Vec<DMatrix<f64>>;
    fn exp_algebra(&self, x: &[f64]) -> DMatrix<f64> {
        let gens = self.generators();
        let n = gens[0].nrows();
        let mut a = DMatrix::zeros(n, n);
        for (xi, g) in x.iter().zip(&gens) {
            a += g * *xi;
        }
        a.exp()
    }
    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64>;
    /// Chart velocity of `t ↦ g·Exp_o(t v)` at `t = 0`.
    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64>;
    /// Some `g` with `g·o = p`.
    fn lift(&self, p: &[f64]) -> DMatrix<f64>;
    fn involution(&self, g: &DMatrix<f64>) -> DMatrix<f64>;
    fn contains(&self, g: &DMatrix<f64>) -> bool;
}

/// Grid with about `count` nodes spread over the given axis ranges.
pub(crate) fn uniform_grid(axes: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    let d = axes.len();
    let per = ((count.max(1) as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let coords: Vec<Vec<f64>> = axes
        .iter()
        .map(|&(lo, hi)| {
            (0..per)
                .map(|k| lo + (hi - lo) * k as f64 / (per - 1) as f64)
                .collect()
        })
        .collect();
    cartesian(&coords)
}

pub(crate) fn cartesian(coords: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in coords {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn uniform_box(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-r..=r)).collect()
}

/// Structure constants of `[[J_i, J_j], J_k]` in the basis `J`.
pub fn lts_of_generators(gens: &[DMatrix<f64>]) -> Result<LtsStructure> {
    let n = gens.len();
    if n == 0 {
        return Err(invalid("no generators"));
    }
    let size = gens[0].len();
    let basis = DMatrix::from_fn(size, n, |r, c| gens[c].as_slice()[r]);
    let mut constants = Vec::with_capacity(n.pow(4));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ij = linalg::commutator(&gens[i], &gens[j]);
            for k in 0..n {
                let t = linalg::commutator(&ij, &gens[k]);
                let rhs = DVector::from_column_slice(t.as_slice());
                let coeffs = linalg::lstsq(&basis, &rhs, 1e-12);
                worst = worst.max((&basis * &coeffs - &rhs).norm());
                constants.extend(coeffs.iter().copied());
            }
        }
    }
    if worst > 1e-9 {
        return Err(invalid(format!(
            "generators do not span a Lie triple system (residual {worst:e})"
        )));
    }
    LtsStructure::new(n, constants)
}

/// `x ⊥ y = s_x s_o y`.
pub fn perp_product<S: SymmetricSpace + ?Sized>(space: &S, x: &[f64], y: &[f64]) -> Vec<f64> {
    let o = space.base_point();
    space.symmetry(x, &space.symmetry(&o, y))
}

pub fn lts_at_base<S: SymmetricSpace + ?Sized>(space: &S) -> LtsStructure {
    space.lts()
}

/// `Q(g) = g·σ(g)⁻¹`.
pub fn quadratic_representation(
    group: &dyn GroupRealization,
    g: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let inv = group
        .involution(g)
        .try_inverse()
        .ok_or_else(|| invalid("group element is singular"))?;
    Ok(g * inv)
}

#[derive(Debug, Clone, Serialize)]
pub struct LoosReport {
    pub samples: usize,
    pub tol: f64,
    pub involution: f64,
    pub fixed_point: f64,
    pub distributivity: f64,
    pub isolation_probes: usize,
    pub isolation_failures: usize,
    pub passed: bool,
}

impl LoosReport {
    pub fn max_residual(&self) -> f64 {
        self.involution.max(self.fixed_point).max(self.distributivity)
    }
}

/// Tolerance of [`loos_axiom_check`] on residuals scaled by `max(1, ‖·‖)`.
pub const LOOS_TOL: f64 = 1e-9;
const ISOLATION_SAMPLES: usize = 4;

fn scaled_dist(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / linalg::norm(b).max(1.0)
}

/// Offsets probing a chart ball: a full grid (radius 0.1, step 0.01) in low
/// dimension, the coordinate axes otherwise.
fn probe_offsets(d: usize) -> Vec<Vec<f64>> {
    let steps: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.01).collect();
    let raw = if d <= 3 {
        cartesian(&vec![steps; d])
    } else {
        (0..d)
            .flat_map(|i| {
                steps.iter().map(move |&s| {
                    let mut v = vec![0.0; d];
                    v[i] = s;
                    v
                })
            })
            .collect()
    };
    raw.into_iter()
        .filter(|v| {
            let n = linalg::norm(v);
            n > 0.0 && n <= 0.1 + 1e-12
        })
        .collect()
}

pub fn loos_axiom_check<S: Symmetric + ?Sized>(
    space: &S,
    n_samples: usize,
    seed: u64,
) -> LoosReport {
    let mut rng = linalg::rng(seed);
    let mut involution = 0.0f64;
    let mut fixed_point = 0.0f64;
    let mut distributivity = 0.0f64;
    let mut probes = 0;
    let mut failures = 0;
    let offsets = probe_offsets(space.chart_dim());
    for k in 0..n_samples {
        let x = space.sample_point(&mut rng);
        let y = space.sample_point(&mut rng);
        let z = space.sample_point(&mut rng);
        involution = involution.max(scaled_dist(&space.symmetry(&x, &space.symmetry(&x, &y)), &y));
        fixed_point = fixed_point.max(scaled_dist(&space.symmetry(&x, &x), &x));
        let lhs = space.symmetry(&x, &space.symmetry(&y, &z));
        let rhs = space.symmetry(&space.symmetry(&x, &y), &space.symmetry(&x, &z));
        distributivity = distributivity.max(scaled_dist(&lhs, &rhs));

        if k < ISOLATION_SAMPLES {
            let cx = space.to_chart(&x);
            for off in &offsets {
                let c: Vec<f64> = cx.iter().zip(off).map(|(a, b)| a + b).collect();
                let Some(p) = space.from_chart(&c) else {
                    continue;
                };
                let moved = linalg::dist(&space.symmetry(&x, &p), &p);
                let away = linalg::dist(&p, &x);
                probes += 1;
                if away > 0.0 && moved / away < 0.1 {
                    failures += 1;
                }
            }
        }
    }
    let passed = involution <= LOOS_TOL
        && fixed_point <= LOOS_TOL
        && distributivity <= LOOS_TOL
        && failures == 0;
    LoosReport {
        samples: n_samples,
        tol: LOOS_TOL,
        involution,
        fixed_point,
        distributivity,
        isolation_probes: probes,
        isolation_failures: failures,
        passed,
    }
}

/// The model spaces selectable by name.
#[derive(Debug, Clone)]
pub enum ModelSpace {
    Euclidean(Euclidean),
    Sphere(Sphere),
    Hyperbolic(Hyperbolic),
    Solvable(SolvablePlane),
    Sl2(Sl2Group),
}

impl ModelSpace {
    /// Parses `euclidean:<n>`, `sphere:<n>`, `hyperbolic`, `ex5`, `ex6` or
    /// `group:sl2`.
    pub fn parse(selector: &str) -> Result<Self> {
        let dim = |s: &str| -> Result<usize> {
            let n: usize = s
                .parse()
                .map_err(|_| invalid(format!("bad dimension in space selector {selector:?}")))?;
            if n == 0 {
                return Err(invalid("space dimension must be positive"));
            }
            Ok(n)
        };
        match selector.split_once(':') {
            Some(("euclidean", n)) => Ok(Self::Euclidean(Euclidean::new(dim(n)?))),
            Some(("sphere", n)) => Ok(Self::Sphere(Sphere::new(dim(n)?))),
            Some(("group", "sl2")) => Ok(Self::Sl2(Sl2Group)),
            None if selector == "hyperbolic" => Ok(Self::Hyperbolic(Hyperbolic::plane())),
            None if selector == "ex5" => Ok(Self::Solvable(SolvablePlane::ex5())),
            None if selector == "ex6" => Ok(Self::Solvable(SolvablePlane::ex6())),
            _ => Err(invalid(format!("unknown space selector {selector:?}"))),
        }
    }

    /// One instance of each of the six model families.
    pub fn all() -> Vec<Self> {
        ["euclidean:2", "sphere:2", "hyperbolic", "ex5", "ex6", "group:sl2"]
            .iter()
            .map(|s| Self::parse(s).expect("built-in selector"))
            .collect()
    }

    pub fn selector(&self) -> String {
        match self {
            Self::Euclidean(e) => format!("euclidean:{}", e.dim()),
            Self::Sphere(s) => format!("sphere:{}", s.dim()),
            Self::Hyperbolic(_) => "hyperbolic".into(),
            Self::Solvable(p) => p.name(),
            Self::Sl2(_) => "group:sl2".into(),
        }
    }

    fn inner(&self) -> &dyn SymmetricSpace {
        match self {
            Self::Euclidean(s) => s,
            Self::Sphere(s) => s,
            Self::Hyperbolic(s) => s,
            Self::Solvable(s) => s,
            Self::Sl2(s) => s,
        }
    }
}

impl Symmetric for ModelSpace {
    fn chart_dim(&self) -> usize {
        self.inner().chart_dim()
    }
    fn symmetry(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.inner().symmetry(x, y)
    }
    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        self.inner().to_chart(p)
    }
    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        self.inner().from_chart(c)
    }
    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.inner().sample_point(rng)
    }
}

impl SymmetricSpace for ModelSpace {
    fn name(&self) -> String {
        self.inner().name()
    }
    fn ambient_dim(&self) -> usize {
        self.inner().ambient_dim()
    }
    fn tangent_dim(&self) -> usize {
        self.inner().tangent_dim()
    }
    fn base_point(&self) -> Vec<f64> {
        self.inner().base_point()
    }
    fn validate(&self, p: &[f64]) -> Result<()> {
        self.inner().validate(p)
    }
    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        self.inner().exp_base(x)
    }
    fn has_log(&self) -> bool {
        self.inner().has_log()
    }
    fn log_base(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner().log_base(y)
    }
    fn lts(&self) -> LtsStructure {
        self.inner().lts()
    }
    fn realization(&self) -> Option<&dyn GroupRealization> {
        self.inner().realization()
    }
    fn is_euclidean(&self) -> bool {
        self.inner().is_euclidean()
    }
    fn start_points(&self, data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        self.inner().start_points(data, count)
    }
}

pub(crate) fn check_len(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return Err(invalid(format!("{what} needs {n} coordinates, got {}", p.len())));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{what} has non-finite coordinates")));
    }
    Ok(())
}
