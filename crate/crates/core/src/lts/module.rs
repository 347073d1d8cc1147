//! Modules over solvable Lie triple systems and their Jordan–Hölder series.
//!
//! A module `V` over `m` is encoded by the full system on `m ⊕ V`. Its
//! submodules are exactly the subspaces of `V` stable under the operators
//! `R_{X,Y} : v ↦ [v, X, Y]`. Over `C` these operators are simultaneously
//! triangularizable, so a minimal submodule is a common eigenvector: it lies in
//! the joint kernel `K` of the derived algebra `L'` of the Lie algebra `L` they
//! generate, `K` is `L`-stable, and on `K` the operators commute.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::{is_abelian_ideal, is_solvable, tangent_bundle_lts, verify_lts_axioms, LtsStructure};
use crate::error::{invalid, unsupported, Error, Result};
use crate::linalg::{self, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complexified,
}

#[derive(Debug, Clone)]
pub struct LtsModule {
    base: LtsStructure,
    mod_dim: usize,
    total: LtsStructure,
}

impl LtsModule {
    /// `total` is the system on `m ⊕ V`, base coordinates first.
    pub fn new(base: LtsStructure, total: LtsStructure, mod_dim: usize) -> Result<Self> {
        let p = base.dim();
        if mod_dim == 0 {
            return Err(invalid("module dimension must be positive"));
        }
        if total.dim() != p + mod_dim {
            return Err(invalid(format!(
                "total system has dim {}, expected {}",
                total.dim(),
                p + mod_dim
            )));
        }
        let report = verify_lts_axioms(&total)?;
        if !report.passed() {
            return Err(invalid(format!(
                "m ⊕ V violates {}",
                report.violated().join(", ")
            )));
        }
        let tol = base.tol().max(total.tol());
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    for l in 0..p + mod_dim {
                        let expect = if l < p { base.constant(i, j, k, l) } else { 0.0 };
                        if (total.constant(i, j, k, l) - expect).abs() > tol {
                            return Err(invalid("m is not a subsystem with the given bracket"));
                        }
                    }
                }
            }
        }
        let v_basis = DMatrix::from_fn(p + mod_dim, mod_dim, |r, c| (r == p + c) as u8 as f64);
        if !is_abelian_ideal(&total, &v_basis)? {
            return Err(invalid("V is not an abelian ideal of m ⊕ V"));
        }
        Ok(Self {
            base,
            mod_dim,
            total,
        })
    }

    /// `m` as a module over itself (the tangent-bundle structure on `m ⊕ m`).
    pub fn adjoint(lts: &LtsStructure) -> Self {
        Self {
            base: lts.clone(),
            mod_dim: lts.dim(),
            total: tangent_bundle_lts(lts),
        }
    }

    /// The module of dimension `n` on which `m` acts by zero.
    pub fn trivial(lts: &LtsStructure, n: usize) -> Self {
        Self {
            base: lts.clone(),
            mod_dim: n,
            total: lts.direct_sum(&LtsStructure::zero(n)),
        }
    }

    pub fn base(&self) -> &LtsStructure {
        &self.base
    }

    pub fn mod_dim(&self) -> usize {
        self.mod_dim
    }

    pub fn total(&self) -> &LtsStructure {
        &self.total
    }

    /// `R_{e_i,e_j}` on `V`, stored at index `i·p + j`.
    pub fn action_operators(&self) -> Vec<DMatrix<f64>> {
        let p = self.base.dim();
        let q = self.mod_dim;
        let mut out = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                out.push(DMatrix::from_fn(q, q, |l, v| {
                    self.total.constant(p + v, i, j, p + l)
                }));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimpleType {
    /// One-dimensional and central.
    S1,
    /// One-dimensional, `[·,X,X]` non-positive.
    S2,
    /// One-dimensional, `[·,X,X]` non-negative.
    S3,
    /// Two-dimensional, `[·,X,X]` with zero or non-real eigenvalues.
    S4,
}

/// The action induced on a simple quotient `m_k / m_{k+1}`.
#[derive(Debug, Clone)]
pub struct SimpleQuotient {
    pub dim: usize,
    pub base_dim: usize,
    /// Induced `R_{e_i,e_j}` at index `i·base_dim + j`.
    pub ops: Vec<CMatrix>,
    pub tol: f64,
}

impl SimpleQuotient {
    /// Induced matrix of `[·, X, X]`.
    pub fn curvature(&self, x: &[f64]) -> CMatrix {
        let p = self.base_dim;
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for i in 0..p {
            for j in 0..p {
                let c = x[i] * x[j];
                if c != 0.0 {
                    m += &self.ops[i * p + j] * Complex64::new(c, 0.0);
                }
            }
        }
        m
    }

    fn scale(&self) -> f64 {
        self.ops
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// No proper submodule over `field`.
    pub fn is_simple(&self, field: Field) -> bool {
        match (self.dim, field) {
            (1, _) => true,
            (2, Field::Real) => minimal_submodule(&self.ops, Field::Real, self.tol)
                .map(|s| s.ncols() == 2)
                .unwrap_or(false),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JordanHolderSeries {
    pub field: Field,
    /// `m_0 = V ⊃ m_1 ⊃ … ⊃ m_p = {0}`, each as orthonormal basis columns in `V`
    /// coordinates.
    pub subspaces: Vec<CMatrix>,
    /// `quotients[k]` is `m_k / m_{k+1}`.
    pub quotients: Vec<SimpleQuotient>,
}

impl JordanHolderSeries {
    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn quotient_dims(&self) -> Vec<usize> {
        self.quotients.iter().map(|q| q.dim).collect()
    }
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Replaces a basis of a conjugation-stable subspace by a real one; other
/// subspaces are returned unchanged.
fn realify(basis: &CMatrix, tol: f64) -> CMatrix {
    let k = basis.ncols();
    if k == 0 || is_real(basis) {
        return basis.clone();
    }
    let n = basis.nrows();
    let mut parts = DMatrix::zeros(n, 2 * k);
    for c in 0..k {
        for r in 0..n {
            parts[(r, c)] = basis[(r, c)].re;
            parts[(r, k + c)] = basis[(r, c)].im;
        }
    }
    let real = linalg::range_basis(&parts, tol);
    if real.ncols() == k {
        linalg::to_complex(&real)
    } else {
        basis.clone()
    }
}

fn span_of(mats: &[CMatrix], n: usize, tol: f64) -> CMatrix {
    if mats.is_empty() {
        return CMatrix::zeros(n * n, 0);
    }
    let mut stacked = CMatrix::zeros(n * n, mats.len());
    for (c, m) in mats.iter().enumerate() {
        stacked.set_column(c, &linalg::vectorize(m));
    }
    linalg::range_basis(&stacked, tol)
}

fn columns_as_matrices(basis: &CMatrix, n: usize) -> Vec<CMatrix> {
    (0..basis.ncols())
        .map(|c| linalg::unvectorize(&basis.column(c).into_owned(), n))
        .collect()
}

/// Basis of the Lie algebra generated by `ops`, and of its derived algebra.
fn generated_algebra(ops: &[CMatrix], n: usize, tol: f64) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let mut basis = span_of(ops, n, tol);
    loop {
        let mats = columns_as_matrices(&basis, n);
        let mut all = mats.clone();
        for a in 0..mats.len() {
            for b in a + 1..mats.len() {
                all.push(linalg::commutator(&mats[a], &mats[b]));
            }
        }
        let next = span_of(&all, n, tol);
        if next.ncols() == basis.ncols() {
            break;
        }
        basis = next;
    }
    let mats = columns_as_matrices(&basis, n);
    let mut comms = Vec::new();
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            comms.push(linalg::commutator(&mats[a], &mats[b]));
        }
    }
    let derived = columns_as_matrices(&span_of(&comms, n, tol), n);
    (mats, derived)
}

fn eigenvalues_c(m: &CMatrix) -> Vec<Complex64> {
    linalg::eigenvalues(m).unwrap_or_default()
}

/// Relative rank threshold for the algebra generated by the action operators.
const ALGEBRA_TOL: f64 = 1e-8;
/// Relative threshold for the joint kernel of the derived algebra.
const KERNEL_TOL: f64 = 1e-7;
/// Accepted residual `‖A v − (vᴴAv) v‖` of a common eigenvector, relative to
/// the largest operator entry.
const EIGVEC_TOL: f64 = 1e-7;
/// Random combinations tried before giving up.
const GENERIC_ATTEMPTS: u64 = 8;

/// Eigenvalue clusters `(mean, size)`. Defective eigenvalues split by about
/// `ε^{1/k}`, hence the loose radius.
fn clusters(values: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let mut left: Vec<Complex64> = values.to_vec();
    let mut out = Vec::new();
    while let Some(seed) = left.pop() {
        let mut members = vec![seed];
        let mut changed = true;
        while changed {
            changed = false;
            let mut k = 0;
            while k < left.len() {
                if members.iter().any(|m| (m - left[k]).norm() <= radius) {
                    members.push(left.swap_remove(k));
                    changed = true;
                } else {
                    k += 1;
                }
            }
        }
        let mean = members.iter().sum::<Complex64>() / Complex64::new(members.len() as f64, 0.0);
        out.push((mean, members.len()));
    }
    out
}

/// The `k` right singular vectors of `a` with the smallest singular values.
fn smallest_right_vectors(a: &CMatrix, k: usize) -> CMatrix {
    let n = a.ncols();
    let (_, _, v) = <Complex64 as linalg::Scalar>::svd_full(a);
    v.columns(n - k, k).into_owned()
}

fn stack(mats: &[CMatrix], n: usize) -> CMatrix {
    let mut stacked = CMatrix::zeros(n * mats.len().max(1), n);
    for (b, d) in mats.iter().enumerate() {
        stacked.view_mut((b * n, 0), (n, n)).copy_from(d);
    }
    stacked
}

fn eigvec_residual(ops: &[CMatrix], v: &CVector) -> f64 {
    ops.iter()
        .map(|op| {
            let w = op * v;
            let lambda = v.dotc(&w);
            (w - v * lambda).norm()
        })
        .fold(0.0, f64::max)
}

/// Polishes an approximate common eigenvector: with the Rayleigh quotients
/// `μ_i` fixed, the best unit vector minimizing `Σ ‖(A_i − μ_i) v‖²` is the
/// smallest right singular vector of the stacked shifted operators.
fn refine_eigvec(ops: &[CMatrix], mut v: CVector, real: bool) -> CVector {
    let n = v.len();
    for _ in 0..3 {
        let shifted: Vec<CMatrix> = ops
            .iter()
            .map(|op| {
                let mu = v.dotc(&(op * &v));
                let mu = if real { Complex64::new(mu.re, 0.0) } else { mu };
                op - CMatrix::identity(n, n) * mu
            })
            .collect();
        let mut w = smallest_right_vectors(&stack(&shifted, n), 1).column(0).into_owned();
        if real {
            // The stacked matrix is real; fix the phase and drop rounding.
            let k = (0..n).max_by(|&a, &b| w[a].norm().total_cmp(&w[b].norm())).unwrap();
            let phase = w[k].conj() / w[k].norm();
            w = (w * phase).map(|z| Complex64::new(z.re, 0.0)).normalize();
        }
        if eigvec_residual(ops, &w) >= eigvec_residual(ops, &v) {
            break;
        }
        v = w;
    }
    v
}

/// Orthonormal basis of a minimal submodule for the family `ops` acting on
/// `C^n`: one column, or two real columns when `field` is real and the
/// smallest real submodule is a plane.
///
/// The joint kernel `K` of the derived algebra is invariant and the family
/// commutes on it, so a common eigenvector lives in a generalized eigenspace
/// of a generic combination, inside the joint kernel of the nilpotent parts.
pub(crate) fn minimal_submodule(ops: &[CMatrix], field: Field, tol: f64) -> Result<CMatrix> {
    let n = ops.first().map(|m| m.nrows()).unwrap_or(0);
    if n == 0 {
        return Err(invalid("empty module"));
    }
    let all_real = ops.iter().all(is_real);
    let scale = ops
        .iter()
        .flat_map(|m| m.iter())
        .fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale <= tol.max(1e-300) {
        // Trivial action: every line is a submodule.
        let mut e = CMatrix::zeros(n, 1);
        e[(0, 0)] = Complex64::new(1.0, 0.0);
        return Ok(e);
    }
    let rank_tol = tol.max(1e-12);

    // The generated algebra does not see the overall scale; normalizing keeps
    // rounding noise in repeated commutators well below the rank threshold.
    let unit: Vec<CMatrix> = ops.iter().map(|m| m / Complex64::new(scale, 0.0)).collect();
    let (_, derived) = generated_algebra(&unit, n, ALGEBRA_TOL);
    let mut space = if derived.is_empty() {
        CMatrix::identity(n, n)
    } else {
        linalg::null_space(&stack(&derived, n), KERNEL_TOL)
    };
    if all_real {
        space = realify(&space, rank_tol);
    }
    if space.ncols() == 0 {
        return Err(Error::PropertyViolation(
            "action algebra has no common eigenvector (not triangularizable)".into(),
        ));
    }

    let k = space.ncols();
    let restricted: Vec<CMatrix> = unit.iter().map(|op| space.adjoint() * op * &space).collect();
    let prefer_real = all_real && field == Field::Real;
    let mut rng = linalg::rng(0x6a09_e667);
    let mut best: Option<(f64, CVector)> = None;
    for _ in 0..GENERIC_ATTEMPTS {
        let coeffs = linalg::gaussian_vec(&mut rng, restricted.len());
        let mut a = CMatrix::zeros(k, k);
        for (c, b) in coeffs.iter().zip(&restricted) {
            a += b * Complex64::new(*c, 0.0);
        }
        let radius = 1e-3 * a.norm().max(1e-12);
        let mut cands = clusters(&eigenvalues_c(&a), radius);
        let is_real_value = |z: &Complex64| z.im.abs() <= radius;
        cands.sort_by(|x, y| {
            let (rx, ry) = (is_real_value(&x.0), is_real_value(&y.0));
            let order = if prefer_real { ry.cmp(&rx) } else { std::cmp::Ordering::Equal };
            order
                .then(x.0.re.total_cmp(&y.0.re))
                .then(x.0.im.total_cmp(&y.0.im))
        });
        for (lambda, m) in cands {
            let real = all_real && is_real_value(&lambda);
            let lambda = if real { Complex64::new(lambda.re, 0.0) } else { lambda };
            let shifted = &a - CMatrix::identity(k, k) * lambda;
            let mut power = CMatrix::identity(k, k);
            for _ in 0..m {
                power = &shifted * power;
            }
            let mut w = smallest_right_vectors(&power, m);
            if real {
                w = realify(&w, rank_tol);
            }
            let nilpotent: Vec<CMatrix> = restricted
                .iter()
                .map(|b| {
                    let on_w = w.adjoint() * b * &w;
                    let mu = on_w.trace() / Complex64::new(w.ncols() as f64, 0.0);
                    on_w - CMatrix::identity(w.ncols(), w.ncols()) * mu
                })
                .collect();
            let z = smallest_right_vectors(&stack(&nilpotent, w.ncols()), 1);
            let mut v = &space * (&w * z.column(0));
            if real {
                v = v.map(|c| Complex64::new(c.re, 0.0));
            }
            let nv = v.norm();
            if nv == 0.0 {
                continue;
            }
            v /= Complex64::new(nv, 0.0);
            let v = refine_eigvec(&unit, v, real);
            let resid = eigvec_residual(&unit, &v);
            if resid <= EIGVEC_TOL {
                best = Some((resid, v));
                break;
            }
            if best.as_ref().is_none_or(|(r, _)| resid < *r) {
                best = Some((resid, v));
            }
        }
        if best.as_ref().is_some_and(|(r, _)| *r <= EIGVEC_TOL) {
            break;
        }
    }
    let (resid, v) = best.ok_or_else(|| {
        Error::PropertyViolation("eigenvalue search failed on the action algebra".into())
    })?;
    if resid > EIGVEC_TOL {
        return Err(Error::PropertyViolation(format!(
            "common eigenvector residual {:e} too large",
            resid * scale
        )));
    }

    let real_line = {
        // Rotate the phase so the largest entry is real, then test the rest.
        let k = (0..n)
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .unwrap();
        let phase = v[k].conj() / v[k].norm();
        let w = &v * phase;
        let im: f64 = w.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        (im <= 1e-9).then(|| w.map(|z| Complex64::new(z.re, 0.0)).normalize())
    };

    match (real_line, field) {
        (Some(w), _) => Ok(CMatrix::from_columns(&[w])),
        (None, Field::Complexified) => Ok(CMatrix::from_columns(&[v])),
        (None, Field::Real) => {
            let mut parts = DMatrix::zeros(n, 2);
            for r in 0..n {
                parts[(r, 0)] = v[r].re;
                parts[(r, 1)] = v[r].im;
            }
            let plane = linalg::range_basis(&parts, 1e-9);
            Ok(linalg::to_complex(&plane))
        }
    }
}

pub fn jordan_holder_series(module: &LtsModule, field: Field) -> Result<JordanHolderSeries> {
    if !is_solvable(module.base())? {
        return Err(unsupported(
            "Jordan-Hölder series requires a solvable base system",
        ));
    }
    let q = module.mod_dim();
    let p = module.base().dim();
    let tol = module.base().tol();
    let ops: Vec<CMatrix> = module
        .action_operators()
        .iter()
        .map(linalg::to_complex)
        .collect();

    let mut flag = CMatrix::zeros(q, 0);
    let mut ascending = vec![flag.clone()];
    let mut quotients = Vec::new();
    while flag.ncols() < q {
        let comp = realify(&linalg::complement(&flag, 1e-12), 1e-12);
        let induced: Vec<CMatrix> = ops.iter().map(|r| comp.adjoint() * r * &comp).collect();
        let sub = minimal_submodule(&induced, field, tol)?;
        let quotient_ops = induced
            .iter()
            .map(|r| sub.adjoint() * r * &sub)
            .collect();
        quotients.push(SimpleQuotient {
            dim: sub.ncols(),
            base_dim: p,
            ops: quotient_ops,
            tol,
        });
        let added = &comp * &sub;
        let mut next = CMatrix::zeros(q, flag.ncols() + added.ncols());
        next.view_mut((0, 0), (q, flag.ncols())).copy_from(&flag);
        next.view_mut((0, flag.ncols()), (q, added.ncols()))
            .copy_from(&added);
        flag = next;
        ascending.push(flag.clone());
    }
    ascending.reverse();
    quotients.reverse();
    Ok(JordanHolderSeries {
        field,
        subspaces: ascending,
        quotients,
    })
}

/// Number of random directions sampled on top of the basis vectors.
const CLASSIFY_SAMPLES: usize = 32;

pub fn classify_simple_quotient(quotient: &SimpleQuotient, seed: u64) -> Result<SimpleType> {
    let p = quotient.base_dim;
    let thr = quotient.tol.max(1e-12) * quotient.scale().max(1.0) * 10.0;
    let mut rng = linalg::rng(seed);
    let mut samples: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            e
        })
        .collect();
    for _ in 0..CLASSIFY_SAMPLES {
        samples.push((0..p).map(|_| rng.random_range(-1.0..1.0)).collect());
    }

    match quotient.dim {
        1 => {
            if quotient.scale() <= thr {
                return Ok(SimpleType::S1);
            }
            let mut neg = None;
            let mut pos = None;
            for x in &samples {
                let v = quotient.curvature(x)[(0, 0)];
                if v.im.abs() > thr {
                    return Err(Error::NumericalAmbiguity {
                        message: "non-real induced eigenvalue on a one-dimensional quotient"
                            .into(),
                        sample: x.clone(),
                    });
                }
                if v.re < -thr {
                    neg = Some(x.clone());
                } else if v.re > thr {
                    pos = Some(x.clone());
                }
            }
            match (neg, pos) {
                (Some(x), Some(_)) => Err(Error::NumericalAmbiguity {
                    message: "induced eigenvalue changes sign".into(),
                    sample: x,
                }),
                (Some(_), None) => Ok(SimpleType::S2),
                (None, Some(_)) => Ok(SimpleType::S3),
                (None, None) => Err(Error::NumericalAmbiguity {
                    message: "non-central quotient with vanishing curvature".into(),
                    sample: samples[0].clone(),
                }),
            }
        }
        2 => {
            for x in &samples {
                for z in eigenvalues_c(&quotient.curvature(x)) {
                    if z.im.abs() <= thr && z.re.abs() > thr {
                        return Err(Error::NumericalAmbiguity {
                            message: "nonzero real eigenvalue on a two-dimensional quotient"
                                .into(),
                            sample: x.clone(),
                        });
                    }
                }
            }
            Ok(SimpleType::S4)
        }
        d => Err(invalid(format!("simple quotients have dim 1 or 2, got {d}"))),
    }
}
