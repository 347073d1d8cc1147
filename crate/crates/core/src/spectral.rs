//! Spectra of real operators and the matrix functions behind the
//! differential of the exponential map.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, unsupported, Error, Result};
use crate::linalg;
use crate::lts::{curvature_operator, LinearOperator, LtsStructure, StdEmbedding};
use crate::model_spaces::SymmetricSpace;

/// Eigenvalues with algebraic multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub dim: usize,
    pub entries: Vec<(Complex64, usize)>,
}

impl Spectrum {
    /// Groups `values` into entries; values closer than `cluster_tol` merge.
    pub fn from_values(mut values: Vec<Complex64>, cluster_tol: f64) -> Self {
        let dim = values.len();
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut groups: Vec<Vec<Complex64>> = Vec::new();
        for v in values {
            match groups
                .iter_mut()
                .find(|g| g.iter().all(|w| (w - v).norm() <= cluster_tol))
            {
                Some(g) => g.push(v),
                None => groups.push(vec![v]),
            }
        }
        let entries = groups
            .into_iter()
            .map(|g| {
                let n = g.len();
                let mean = g.iter().sum::<Complex64>() / n as f64;
                (mean, n)
            })
            .collect();
        Self { dim, entries }
    }

    /// Every eigenvalue repeated by multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .flat_map(|&(z, m)| std::iter::repeat_n(z, m))
            .collect()
    }

    pub fn triples(&self) -> Vec<[f64; 3]> {
        self.entries
            .iter()
            .map(|(z, m)| [z.re, z.im, *m as f64])
            .collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, (z, _)| acc.max(z.norm()))
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.triples().serialize(s)
    }
}

/// Raw eigenvalues of a real square matrix, conjugate pairs adjacent.
pub fn matrix_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(invalid(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    linalg::eigenvalues(m).ok_or_else(|| Error::NumericalAmbiguity {
        message: "eigenvalue iteration did not converge".into(),
        sample: Vec::new(),
    })
}

pub fn eigenvalues(op: &LinearOperator) -> Result<Spectrum> {
    let m = op.matrix();
    let values = matrix_eigenvalues(m)?;
    let scale = m.norm().max(1.0);
    Ok(Spectrum::from_values(values, 1e-7 * scale))
}

/// `sinh(A)/A` together with how it was evaluated.
#[derive(Debug, Clone)]
pub struct MatrixFunctionResult {
    pub matrix: DMatrix<f64>,
    /// Highest power of the scaled argument kept in the series.
    pub order: usize,
    /// The argument was divided by `2^scaling` before summing.
    pub scaling: u32,
    /// Bound on the relative truncation error of the scaled series.
    pub error_estimate: f64,
}

const SINHC_TERMS: usize = 10;
/// Beyond this 1-norm cosh overflows long before the result is useful.
const SINHC_MAX_NORM: f64 = 700.0;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Evaluates `Σ A^{2k}/(2k+1)!`, reducing the argument with
/// `sinh(2B)/(2B) = cosh(B)·sinh(B)/B` and `cosh(2B) = 2cosh(B)² − 1`.
pub fn sinhc(op: &LinearOperator) -> Result<MatrixFunctionResult> {
    let a = op.matrix();
    if !a.is_square() {
        return Err(invalid("sinhc needs a square operator"));
    }
    let n = a.nrows();
    let norm = one_norm(a);
    if norm > SINHC_MAX_NORM {
        return Err(Error::Range {
            what: "sinhc argument".into(),
            norm,
        });
    }
    let mut scaling = 0u32;
    while norm / 2f64.powi(scaling as i32) > 1.0 {
        scaling += 1;
    }
    let b = a / 2f64.powi(scaling as i32);
    let b2 = &b * &b;
    let id = DMatrix::<f64>::identity(n, n);

    // s = Σ B^{2k}/(2k+1)!, c = Σ B^{2k}/(2k)!
    let mut s = id.clone();
    let mut c = id.clone();
    let mut power = id.clone();
    let mut fact = 1.0f64;
    for k in 1..=SINHC_TERMS {
        power = &power * &b2;
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        c += &power / fact;
        s += &power / (fact * (2 * k + 1) as f64);
    }
    for _ in 0..scaling {
        s = &c * &s;
        c = &c * &c * 2.0 - &id;
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range {
            what: "sinhc result".into(),
            norm,
        });
    }
    let bn = norm / 2f64.powi(scaling as i32);
    let mut tail = 1.0f64;
    for k in 1..=2 * SINHC_TERMS + 3 {
        tail /= k as f64;
    }
    Ok(MatrixFunctionResult {
        matrix: s,
        order: 2 * SINHC_TERMS,
        scaling,
        error_estimate: bn.powi(2 * SINHC_TERMS as i32 + 2) * tail,
    })
}

/// Default lattice tolerance `1e-9·max(1, ‖A‖)` for [`local_diffeo_test`].
pub fn lattice_tol(op: &LinearOperator) -> f64 {
    1e-9 * op.matrix().norm().max(1.0)
}

/// False iff some eigenvalue lies within `tol` of `iπk` for a nonzero integer `k`.
pub fn local_diffeo_test(spec: &Spectrum, tol: f64) -> bool {
    spec.entries.iter().all(|(z, _)| {
        if z.re.abs() > tol {
            return true;
        }
        let k = (z.im / std::f64::consts::PI).round();
        k == 0.0 || (z.im - k * std::f64::consts::PI).abs() > tol
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SquarePair {
    pub squared: usize,
    pub block: usize,
    pub error: f64,
}

/// Squares of the `ad X` spectrum against the spectra of `(ad X)²` on `m`
/// (the curvature operator) and on `h`.
#[derive(Debug, Clone, Serialize)]
pub struct SquareSpectrumReport {
    pub squared_ad: Vec<[f64; 2]>,
    pub curvature_m: Vec<[f64; 2]>,
    pub square_h: Vec<[f64; 2]>,
    /// Index into `squared_ad` matched to an index into `curvature_m ++ square_h`.
    pub matching: Vec<SquarePair>,
    pub max_error: f64,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Greedy nearest-neighbour matching of two equal-size multisets.
fn match_multisets(a: &[Complex64], b: &[Complex64]) -> (Vec<SquarePair>, f64) {
    let mut used = vec![false; b.len()];
    let mut out = Vec::with_capacity(a.len());
    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let (j, e) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, z)| (j, (z - a[i]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(e);
        out.push(SquarePair {
            squared: i,
            block: j,
            error: e,
        });
    }
    out.sort_by_key(|p| p.squared);
    (out, worst)
}

/// `tol` is relative to `max(1, ‖ad X‖²)`.
pub fn square_spectrum_check(
    emb: &StdEmbedding,
    x: &[f64],
    tol: f64,
) -> Result<SquareSpectrumReport> {
    let p = emb.dim_m();
    let q = emb.dim_h();
    let ad = emb.ad_m(x)?;
    let ad2 = &ad * &ad;
    let mut full = x.to_vec();
    full.resize(p + q, 0.0);

    let curv = DMatrix::from_fn(p, p, |r, c| {
        let mut e = vec![0.0; p + q];
        e[c] = 1.0;
        emb.lie_bracket(&emb.lie_bracket(&e, &full), &full)[r]
    });
    let hblock = ad2.view((p, p), (q, q)).into_owned();

    let squared: Vec<Complex64> = matrix_eigenvalues(&ad)?
        .into_iter()
        .map(|z| z * z)
        .collect();
    let m_part = matrix_eigenvalues(&curv)?;
    let h_part = matrix_eigenvalues(&hblock)?;
    let union: Vec<Complex64> = m_part.iter().chain(h_part.iter()).copied().collect();
    let (matching, max_error) = match_multisets(&squared, &union);

    let scale = ad.norm().powi(2).max(1.0);
    if max_error > tol * scale {
        return Err(Error::PropertyViolation(format!(
            "squared ad-spectrum differs from block spectra by {max_error:e}"
        )));
    }
    Ok(SquareSpectrumReport {
        squared_ad: pairs(&squared),
        curvature_m: pairs(&m_part),
        square_h: pairs(&h_part),
        matching,
        max_error,
    })
}

/// `d(Exp_o)_X = dτ(exp X)_o ∘ sinhc(ad X)|_m` in chart coordinates.
///
/// `emb` must be the standard embedding of `space.lts()`; columns of the
/// result are chart velocities for the basis directions of `m`.
pub fn helgason_differential(
    emb: &StdEmbedding,
    space: &dyn SymmetricSpace,
    x: &[f64],
) -> Result<LinearOperator> {
    let group = space
        .realization()
        .ok_or_else(|| unsupported(format!("{} has no group realization", space.name())))?;
    let p = emb.dim_m();
    if x.len() != p || space.tangent_dim() != p {
        return Err(invalid("tangent vector does not match the embedding"));
    }
    let ad = LinearOperator::new(emb.ad_m(x)?)?;
    let s = sinhc(&ad)?.matrix;
    let g = group.exp_algebra(x);
    let d = space.chart_dim();
    let mut out = DMatrix::zeros(d, p);
    for j in 0..p {
        let v: Vec<f64> = (0..p).map(|i| s[(i, j)]).collect();
        let w = group.translate_tangent(&g, &v);
        for (i, val) in w.into_iter().enumerate() {
            out[(i, j)] = val;
        }
    }
    LinearOperator::new(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalExpWitness {
    pub x: Vec<f64>,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalExpVerdict {
    pub violated: bool,
    pub witness: Option<LocalExpWitness>,
    pub samples_checked: usize,
    /// Always true: absence of a violation is only a sampling result.
    pub sampled: bool,
}

/// Looks for a strictly negative real eigenvalue of `[·,X,X]` over the basis
/// vectors and `samples` random directions.
pub fn locally_exponential_sample_test(
    lts: &LtsStructure,
    samples: usize,
    seed: u64,
) -> Result<LocalExpVerdict> {
    let n = lts.dim();
    let mut rng = linalg::rng(seed);
    let mut directions: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..samples {
        directions.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let checked = directions.len();
    for x in directions {
        let op = curvature_operator(lts, &x)?;
        let scale = op.matrix().norm().max(1.0);
        let thr = lts.tol().max(1e-9) * scale;
        let worst = matrix_eigenvalues(op.matrix())?
            .into_iter()
            .filter(|z| z.im.abs() <= thr)
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        if worst < -thr {
            return Ok(LocalExpVerdict {
                violated: true,
                witness: Some(LocalExpWitness { x, eigenvalue: worst }),
                samples_checked: checked,
                sampled: true,
            });
        }
    }
    Ok(LocalExpVerdict {
        violated: false,
        witness: None,
        samples_checked: checked,
        sampled: true,
    })
}

/// `(Id + e^{ad X})⁻¹` for nilpotent `ad X`, as `½·Σ_k (−N/2)^k` with
/// `N = e^{ad X} − Id`.
pub fn unipotent_inverse(ad_x: &LinearOperator) -> Result<LinearOperator> {
    let a = ad_x.matrix();
    if !a.is_square() {
        return Err(invalid("ad X must be square"));
    }
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(1.0);
    let mut power = id.clone();
    for _ in 0..n {
        power = &power * a;
    }
    if power.norm() > 1e-10 * scale.powi(n as i32) {
        return Err(unsupported("ad X is not nilpotent"));
    }

    // e^{ad X} is a finite sum because (ad X)^n = 0.
    let mut exp = id.clone();
    let mut term = id.clone();
    for k in 1..n {
        term = &term * a / k as f64;
        exp += &term;
    }
    let nil = &exp - &id;
    let half = &nil * -0.5;
    let mut inv = id.clone();
    let mut term = id.clone();
    for _ in 1..n {
        term = &term * &half;
        inv += &term;
    }
    inv *= 0.5;

    let full = &id + &exp;
    let resid = (&full * &inv - &id).norm();
    if resid > 1e-12 * (full.norm() * inv.norm()).max(1.0) {
        return Err(Error::PropertyViolation(format!(
            "(Id + e^(ad X)) times computed inverse is off by {resid:e}"
        )));
    }
    LinearOperator::new(inv)
}
