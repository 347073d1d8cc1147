//! Lie triple systems given by structure constants.
//!
//! A Lie triple system on `R^n` is stored as a dense tensor `T` with
//! `[e_i, e_j, e_k] = Σ_l T[i][j][k][l] e_l`. Dimensions are small (a few
//! dozen at most), so every check simply iterates over all basis indices.

mod embedding;
mod io;
mod module;
mod roots;

pub use embedding::{derived_series_dims, is_solvable, standard_embedding, StdEmbedding};
pub use io::{parse_lts_json, read_lts_file, to_json, LtsFile};
pub use module::{
    classify_simple_quotient, jordan_holder_series, Field, JordanHolderSeries, LtsModule,
    SimpleQuotient, SimpleType,
};
pub use roots::{
    root_negative_witness, roots, solvable_exponentiality, ExponentialityVerdict, Root,
    RootWitness,
};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg;

/// A real matrix viewed as a linear map `R^dim_in → R^dim_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<f64>,
}

impl LinearOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(invalid("operator has non-finite entries"));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn zero(dim_out: usize, dim_in: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim_out, dim_in))
    }

    pub fn dim_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in() == self.dim_out()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).as_slice().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtsStructure {
    dim: usize,
    constants: Vec<f64>,
    tol: f64,
}

impl LtsStructure {
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Builds a system from a flat row-major tensor of length `dim^4`.
    pub fn new(dim: usize, constants: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("Lie triple system dimension must be positive"));
        }
        if constants.len() != dim.pow(4) {
            return Err(invalid(format!(
                "expected {} structure constants for dim {dim}, got {}",
                dim.pow(4),
                constants.len()
            )));
        }
        if constants.iter().any(|x| !x.is_finite()) {
            return Err(invalid("structure constants must be finite"));
        }
        Ok(Self {
            dim,
            constants,
            tol: Self::DEFAULT_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim.pow(4)]).expect("zero tensor is valid")
    }

    /// Tabulates a trilinear bracket on the standard basis.
    pub fn from_bracket<F>(dim: usize, bracket: F) -> Self
    where
        F: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>,
    {
        let mut constants = vec![0.0; dim.pow(4)];
        let e = |i: usize| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        };
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let out = bracket(&e(i), &e(j), &e(k));
                    let base = ((i * dim + j) * dim + k) * dim;
                    constants[base..base + dim].copy_from_slice(&out);
                }
            }
        }
        Self::new(dim, constants).expect("tabulated bracket is finite")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn constant(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.constants[self.index(i, j, k) + l]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        let idx = self.index(i, j, k) + l;
        self.constants[idx] = value;
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim
    }

    /// `[e_i, e_j, e_k]` as a coordinate slice.
    pub fn basis_bracket(&self, i: usize, j: usize, k: usize) -> &[f64] {
        let base = self.index(i, j, k);
        &self.constants[base..base + self.dim]
    }

    pub fn bracket(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let c = xy * z[k];
                    if c == 0.0 {
                        continue;
                    }
                    for (o, t) in out.iter_mut().zip(self.basis_bracket(i, j, k)) {
                        *o += c * t;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_constant(&self) -> f64 {
        self.constants.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// The orthogonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &LtsStructure) -> LtsStructure {
        let (p, q) = (self.dim, other.dim);
        let n = p + q;
        let mut out = LtsStructure::zero(n).with_tol(self.tol.max(other.tol));
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    for l in 0..p {
                        out.set(i, j, k, l, self.constant(i, j, k, l));
                    }
                }
            }
        }
        for i in 0..q {
            for j in 0..q {
                for k in 0..q {
                    for l in 0..q {
                        out.set(p + i, p + j, p + k, p + l, other.constant(i, j, k, l));
                    }
                }
            }
        }
        out
    }

    /// Re-expresses the system in the basis formed by the columns of `basis`.
    pub fn change_basis(&self, basis: &DMatrix<f64>) -> Result<LtsStructure> {
        let n = self.dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(invalid("change of basis must be a square matrix of size dim"));
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| invalid("change of basis is singular"))?;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|a| basis.column(a).iter().cloned().collect())
            .collect();
        let mut out = LtsStructure::zero(n).with_tol(self.tol);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.bracket(&cols[a], &cols[b], &cols[c]);
                    let w = &inv * DVector::from_vec(v);
                    for l in 0..n {
                        out.set(a, b, c, l, w[l]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Z ↦ [e_i, e_j, Z]` for basis vectors.
    pub(crate) fn basis_left_operator(&self, i: usize, j: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |l, k| self.constant(i, j, k, l))
    }

    fn check_len(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(invalid(format!(
                "{what} has length {}, expected {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("{what} has non-finite entries")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomReport {
    /// `[X,X,Y] = 0`, checked in polarized form `[X,Y,Z] + [Y,X,Z] = 0`.
    pub lts1: AxiomCheck,
    /// Cyclic identity.
    pub lts2: AxiomCheck,
    /// Every `L_{X,Y}` is a derivation of the triple bracket.
    pub lts3: AxiomCheck,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.lts1.passed && self.lts2.passed && self.lts3.passed
    }

    pub fn max_residual(&self) -> f64 {
        self.lts1.residual.max(self.lts2.residual).max(self.lts3.residual)
    }

    pub fn violated(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.lts1.passed {
            out.push("Lts1");
        }
        if !self.lts2.passed {
            out.push("Lts2");
        }
        if !self.lts3.passed {
            out.push("Lts3");
        }
        out
    }
}

pub fn verify_lts_axioms(lts: &LtsStructure) -> Result<AxiomReport> {
    if lts.constants.iter().any(|x| !x.is_finite()) {
        return Err(invalid("structure constants must be finite"));
    }
    let n = lts.dim;
    let tol = lts.tol;

    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let t = lts.constant(i, j, k, l);
                    r1 = r1.max((t + lts.constant(j, i, k, l)).abs());
                    let cyc = t + lts.constant(j, k, i, l) + lts.constant(k, i, j, l);
                    r2 = r2.max(cyc.abs());
                }
            }
        }
    }

    let mut r3: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = lts.basis_left_operator(i, j);
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        let inner = DVector::from_column_slice(lts.basis_bracket(u, v, w));
                        let lhs = &d * inner;
                        for l in 0..n {
                            let mut rhs = 0.0;
                            for a in 0..n {
                                rhs += d[(a, u)] * lts.constant(a, v, w, l)
                                    + d[(a, v)] * lts.constant(u, a, w, l)
                                    + d[(a, w)] * lts.constant(u, v, a, l);
                            }
                            r3 = r3.max((lhs[l] - rhs).abs());
                        }
                    }
                }
            }
        }
    }

    Ok(AxiomReport {
        lts1: AxiomCheck { passed: r1 <= tol, residual: r1 },
        lts2: AxiomCheck { passed: r2 <= tol, residual: r2 },
        lts3: AxiomCheck { passed: r3 <= tol, residual: r3 },
    })
}

/// Matrix of `Y ↦ [Y, X, X]`.
pub fn curvature_operator(lts: &LtsStructure, x: &[f64]) -> Result<LinearOperator> {
    lts.check_len(x, "X")?;
    let n = lts.dim;
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = x[j] * x[k];
                if c == 0.0 {
                    continue;
                }
                for (l, t) in lts.basis_bracket(a, j, k).iter().enumerate() {
                    m[(l, a)] += c * t;
                }
            }
        }
    }
    Ok(LinearOperator::from_matrix(m))
}

/// Matrix of `L_{X,Y} = [X, Y, ·]`.
pub fn bracket_operator(lts: &LtsStructure, x: &[f64], y: &[f64]) -> Result<LinearOperator> {
    lts.check_len(x, "X")?;
    lts.check_len(y, "Y")?;
    let n = lts.dim;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let c = x[i] * y[j];
            if c == 0.0 {
                continue;
            }
            for k in 0..n {
                for (l, t) in lts.basis_bracket(i, j, k).iter().enumerate() {
                    m[(l, k)] += c * t;
                }
            }
        }
    }
    Ok(LinearOperator::from_matrix(m))
}

/// The canonical system on `m ⊕ m` whose bracket is
/// `[(x,u),(y,v),(z,w)] = ([x,y,z], [u,y,z] + [x,v,z] + [x,y,w])`.
pub fn tangent_bundle_lts(lts: &LtsStructure) -> LtsStructure {
    let n = lts.dim;
    let mut out = LtsStructure::zero(2 * n).with_tol(lts.tol);
    for a in 0..2 * n {
        for b in 0..2 * n {
            for c in 0..2 * n {
                let lifted = (a >= n) as usize + (b >= n) as usize + (c >= n) as usize;
                let (i, j, k) = (a % n, b % n, c % n);
                let offset = match lifted {
                    0 => 0,
                    1 => n,
                    _ => continue,
                };
                for l in 0..n {
                    out.set(a, b, c, offset + l, lts.constant(i, j, k, l));
                }
            }
        }
    }
    out
}

fn independent_basis(lts: &LtsStructure, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if basis.nrows() != lts.dim {
        return Err(invalid("subspace basis vectors must have length dim"));
    }
    if basis.iter().any(|x| !x.is_finite()) {
        return Err(invalid("subspace basis has non-finite entries"));
    }
    let q = linalg::range_basis(basis, lts.tol);
    if q.ncols() != basis.ncols() {
        return Err(invalid("subspace basis vectors are linearly dependent"));
    }
    Ok(q)
}

/// Whether the span of the columns of `basis` is an ideal: `[W,m,m] ⊆ W` and
/// `[m,m,W] ⊆ W`.
pub fn is_ideal(lts: &LtsStructure, basis: &DMatrix<f64>) -> Result<bool> {
    let q = independent_basis(lts, basis)?;
    Ok(ideal_residual(lts, &q) <= lts.tol * lts.max_abs_constant().max(1.0))
}

/// An ideal on which the bracket vanishes as soon as two arguments lie in it.
pub fn is_abelian_ideal(lts: &LtsStructure, basis: &DMatrix<f64>) -> Result<bool> {
    let q = independent_basis(lts, basis)?;
    let scale = lts.tol * lts.max_abs_constant().max(1.0);
    if ideal_residual(lts, &q) > scale {
        return Ok(false);
    }
    let n = lts.dim;
    let cols: Vec<Vec<f64>> = (0..q.ncols())
        .map(|c| q.column(c).iter().cloned().collect())
        .collect();
    let basis_vec = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let mut worst: f64 = 0.0;
    for w1 in &cols {
        for w2 in &cols {
            for i in 0..n {
                let e = basis_vec(i);
                for v in [
                    lts.bracket(w1, w2, &e),
                    lts.bracket(w1, &e, w2),
                    lts.bracket(&e, w1, w2),
                ] {
                    worst = worst.max(linalg::norm(&v));
                }
            }
        }
    }
    Ok(worst <= scale)
}

fn ideal_residual(lts: &LtsStructure, q: &DMatrix<f64>) -> f64 {
    let n = lts.dim;
    let mut worst: f64 = 0.0;
    for c in 0..q.ncols() {
        let w: Vec<f64> = q.column(c).iter().cloned().collect();
        for i in 0..n {
            for j in 0..n {
                let mut ei = vec![0.0; n];
                ei[i] = 1.0;
                let mut ej = vec![0.0; n];
                ej[j] = 1.0;
                for v in [lts.bracket(&w, &ei, &ej), lts.bracket(&ei, &ej, &w)] {
                    let d = linalg::distance_to_span(q, &DVector::from_vec(v));
                    worst = worst.max(d);
                }
            }
        }
    }
    worst
}
