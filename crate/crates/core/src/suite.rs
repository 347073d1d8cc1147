//! Property suites run by the `verify` command: Loos axioms, Lie triple
//! system axioms, exponential round trips, Helgason's differential against
//! finite differences, and the squared-spectrum correspondence.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg;
use crate::lts::{standard_embedding, verify_lts_axioms, StdEmbedding};
use crate::model_spaces::{loos_axiom_check, ModelSpace, Symmetric, SymmetricSpace};
use crate::spectral::{helgason_differential, square_spectrum_check};

pub const LOOS_TOL: f64 = 1e-9;
pub const LTS_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-9;
pub const HELGASON_TOL: f64 = 1e-5;
pub const SPECTRAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Replaces every per-suite tolerance when set.
    pub tol: Option<f64>,
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: None,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_residual: f64,
    pub tol: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceReport {
    pub space: String,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub spaces: Vec<SpaceReport>,
}

fn suite(name: &'static str, residual: f64, tol: f64, samples: usize, extra_ok: bool) -> SuiteReport {
    SuiteReport {
        name,
        passed: extra_ok && residual.is_finite() && residual <= tol,
        max_residual: residual,
        tol,
        samples,
    }
}

fn scaled_dist(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / linalg::norm(b).max(1.0)
}

/// Tangent radius on which the chart stays clear of its singular set.
fn tangent_radius(space: &ModelSpace) -> f64 {
    match space {
        ModelSpace::Sphere(_) => 1.0,
        ModelSpace::Sl2(_) => 0.5,
        _ => 3.0,
    }
}

fn random_tangent(rng: &mut rand_chacha::ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    let v = linalg::gaussian_vec(rng, d);
    let n = linalg::norm(&v).max(1e-300);
    let r = radius * rng.random_range(0.0..1.0f64);
    v.into_iter().map(|x| x * r / n).collect()
}

/// Central differences of `chart ∘ Exp_o` with step `h`.
pub fn exp_chart_jacobian<S: SymmetricSpace + ?Sized>(space: &S, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = space.chart_dim();
    let p = x.len();
    let mut jac = DMatrix::zeros(d, p);
    for j in 0..p {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let cp = space.to_chart(&space.exp_base(&xp));
        let cm = space.to_chart(&space.exp_base(&xm));
        for i in 0..d {
            jac[(i, j)] = (cp[i] - cm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Relative error of the Helgason differential against central differences
/// (step `1e-4`).
pub fn helgason_fd_error(
    space: &dyn SymmetricSpace,
    emb: &StdEmbedding,
    x: &[f64],
) -> Result<f64> {
    let exact = helgason_differential(emb, space, x)?;
    let fd = exp_chart_jacobian(space, x, 1e-4);
    Ok((exact.matrix() - &fd).norm() / fd.norm().max(1e-12))
}

pub fn verify_space(space: &ModelSpace, opts: &VerifyOptions) -> Result<SpaceReport> {
    let tol = |default: f64| opts.tol.unwrap_or(default);
    let mut suites = Vec::new();
    let n = opts.samples.max(1);

    let loos = loos_axiom_check(space, n, opts.seed);
    suites.push(suite(
        "loos_axioms",
        loos.max_residual(),
        tol(LOOS_TOL),
        n,
        loos.isolation_failures == 0,
    ));

    let lts = space.lts();
    let axioms = verify_lts_axioms(&lts)?;
    let emb = standard_embedding(&lts)?;
    let lts_res = axioms
        .max_residual()
        .max(emb.jacobi_residual())
        .max(emb.sigma_residual())
        .max(emb.grading_residual())
        .max(emb.restriction_residual(&lts));
    suites.push(suite("lts_axioms", lts_res, tol(LTS_TOL), 1, true));

    let mut rng = linalg::rng(opts.seed.wrapping_add(1));
    let radius = tangent_radius(space);
    let mut rt: f64 = 0.0;
    for _ in 0..n {
        if space.has_log() {
            let x = random_tangent(&mut rng, space.tangent_dim(), radius);
            let back = space.log_base(&space.exp_base(&x))?;
            rt = rt.max(scaled_dist(&back, &x));
            let y = space.sample_point(&mut rng);
            rt = rt.max(scaled_dist(&space.exp_base(&space.log_base(&y)?), &y));
        } else {
            let y = space.sample_point(&mut rng);
            let back = space.from_chart(&space.to_chart(&y)).unwrap_or_default();
            rt = rt.max(if back.len() == y.len() {
                scaled_dist(&back, &y)
            } else {
                f64::INFINITY
            });
        }
    }
    suites.push(suite("round_trip", rt, tol(ROUND_TRIP_TOL), n, true));

    let helgason_samples = 32;
    let mut hel: f64 = 0.0;
    for _ in 0..helgason_samples {
        let x = random_tangent(&mut rng, space.tangent_dim(), radius);
        hel = hel.max(helgason_fd_error(space, &emb, &x)?);
    }
    suites.push(suite("helgason", hel, tol(HELGASON_TOL), helgason_samples, true));

    let spectral_samples = 32;
    let mut spec: f64 = 0.0;
    let mut spec_ok = true;
    for _ in 0..spectral_samples {
        let x = random_tangent(&mut rng, space.tangent_dim(), 1.0);
        match square_spectrum_check(&emb, &x, f64::INFINITY) {
            Ok(r) => {
                let scale = emb.ad_m(&x)?.norm().powi(2).max(1.0);
                spec = spec.max(r.max_error / scale);
            }
            Err(_) => spec_ok = false,
        }
    }
    suites.push(suite("spectral", spec, tol(SPECTRAL_TOL), spectral_samples, spec_ok));

    Ok(SpaceReport {
        space: space.selector(),
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

pub fn verify(spaces: &[ModelSpace], opts: &VerifyOptions) -> Result<VerifyReport> {
    let reports = spaces
        .iter()
        .map(|s| verify_space(s, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed: opts.seed,
        passed: reports.iter().all(|r| r.passed),
        spaces: reports,
    })
}
