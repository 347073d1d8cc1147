use nalgebra::{DMatrix, DVector};

use super::{verify_lts_axioms, LtsStructure};
use crate::error::{invalid, Result};
use crate::linalg;

/// The Lie algebra `g = m ⊕ h`, `h = span{L_{X,Y}}`, with its grading
/// involution. Coordinates on `g` list the `m` basis first, then `h`.
#[derive(Debug, Clone)]
pub struct StdEmbedding {
    dim_m: usize,
    dim_h: usize,
    /// `[f_a, f_b] = Σ_c bracket[(a·g + b)·g + c] f_c` with `g = dim_m + dim_h`.
    bracket: Vec<f64>,
    /// Orthonormal (Frobenius) basis of `h` as operators on `m`.
    h_basis: Vec<DMatrix<f64>>,
    tol: f64,
    /// How far `[h, h]` strayed outside `h` during construction.
    closure_residual: f64,
}

impl StdEmbedding {
    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_g(&self) -> usize {
        self.dim_m + self.dim_h
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn h_basis(&self) -> &[DMatrix<f64>] {
        &self.h_basis
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// `-1` on `m`, `+1` on `h`.
    pub fn sigma(&self) -> Vec<f64> {
        let mut s = vec![-1.0; self.dim_m];
        s.extend(std::iter::repeat_n(1.0, self.dim_h));
        s
    }

    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> f64 {
        let g = self.dim_g();
        self.bracket[(a * g + b) * g + c]
    }

    fn basis_bracket(&self, a: usize, b: usize) -> &[f64] {
        let g = self.dim_g();
        let base = (a * g + b) * g;
        &self.bracket[base..base + g]
    }

    pub fn lie_bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let g = self.dim_g();
        let mut out = vec![0.0; g];
        for a in 0..g {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..g {
                let c = x[a] * y[b];
                if c == 0.0 {
                    continue;
                }
                for (o, t) in out.iter_mut().zip(self.basis_bracket(a, b)) {
                    *o += c * t;
                }
            }
        }
        out
    }

    /// Matrix of `ad x` on `g`.
    pub fn ad(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.dim_g();
        if x.len() != g {
            return Err(invalid(format!("element of g must have length {g}")));
        }
        let mut m = DMatrix::zeros(g, g);
        for a in 0..g {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..g {
                for (c, t) in self.basis_bracket(a, b).iter().enumerate() {
                    m[(c, b)] += x[a] * t;
                }
            }
        }
        Ok(m)
    }

    /// `ad X` for `X` given in `m` coordinates.
    pub fn ad_m(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.dim_m {
            return Err(invalid(format!(
                "element of m must have length {}",
                self.dim_m
            )));
        }
        let mut full = x.to_vec();
        full.resize(self.dim_g(), 0.0);
        self.ad(&full)
    }

    pub fn jacobi_residual(&self) -> f64 {
        let g = self.dim_g();
        let e = |i: usize| {
            let mut v = vec![0.0; g];
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                let ab = self.basis_bracket(a, b).to_vec();
                for c in 0..g {
                    let bc = self.basis_bracket(b, c).to_vec();
                    let ca = self.basis_bracket(c, a).to_vec();
                    let t1 = self.lie_bracket(&e(a), &bc);
                    let t2 = self.lie_bracket(&e(b), &ca);
                    let t3 = self.lie_bracket(&e(c), &ab);
                    for l in 0..g {
                        worst = worst.max((t1[l] + t2[l] + t3[l]).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |σ[f_a,f_b] − [σf_a,σf_b]|` over basis pairs.
    pub fn sigma_residual(&self) -> f64 {
        let s = self.sigma();
        let g = self.dim_g();
        let mut worst: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    let t = self.structure_constant(a, b, c);
                    worst = worst.max((s[c] * t - s[a] * s[b] * t).abs());
                }
            }
        }
        worst
    }

    /// Largest entry of `[f_a, f_b]` outside the graded component it must lie in.
    pub fn grading_residual(&self) -> f64 {
        let g = self.dim_g();
        let in_m = |i: usize| i < self.dim_m;
        let mut worst: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                let target_m = in_m(a) != in_m(b);
                for c in 0..g {
                    if in_m(c) != target_m {
                        worst = worst.max(self.structure_constant(a, b, c).abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |[[e_i,e_j],e_k]|_m − [e_i,e_j,e_k]|` over basis triples.
    pub fn restriction_residual(&self, lts: &LtsStructure) -> f64 {
        let n = self.dim_m;
        let g = self.dim_g();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let xy = self.basis_bracket(i, j).to_vec();
                for k in 0..n {
                    let mut ek = vec![0.0; g];
                    ek[k] = 1.0;
                    let v = self.lie_bracket(&xy, &ek);
                    for l in 0..n {
                        worst = worst.max((v[l] - lts.constant(i, j, k, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn standard_embedding(lts: &LtsStructure) -> Result<StdEmbedding> {
    let report = verify_lts_axioms(lts)?;
    if !report.passed() {
        return Err(invalid(format!(
            "input violates {}",
            report.violated().join(", ")
        )));
    }
    let n = lts.dim();
    let tol = lts.tol();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut ops = DMatrix::zeros(n * n, pairs.len());
    for (c, &(i, j)) in pairs.iter().enumerate() {
        ops.set_column(c, &linalg::vectorize(&lts.basis_left_operator(i, j)));
    }
    let q = linalg::range_basis(&ops, tol);
    let dim_h = q.ncols();
    let h_basis: Vec<DMatrix<f64>> = (0..dim_h)
        .map(|p| linalg::unvectorize(&q.column(p).into_owned(), n))
        .collect();
    let h_coords = |op: &DMatrix<f64>| -> (DVector<f64>, f64) {
        let v = linalg::vectorize(op);
        let c = q.transpose() * &v;
        let resid = (&q * &c - v).norm();
        (c, resid)
    };

    let g = n + dim_h;
    let mut bracket = vec![0.0; g * g * g];
    let idx = |a: usize, b: usize, c: usize| (a * g + b) * g + c;
    let mut closure: f64 = 0.0;

    for i in 0..n {
        for j in 0..n {
            let (c, r) = h_coords(&lts.basis_left_operator(i, j));
            closure = closure.max(r);
            for p in 0..dim_h {
                bracket[idx(i, j, n + p)] = c[p];
            }
        }
    }
    for p in 0..dim_h {
        for j in 0..n {
            let col = h_basis[p].column(j);
            for l in 0..n {
                bracket[idx(n + p, j, l)] = col[l];
                bracket[idx(j, n + p, l)] = -col[l];
            }
        }
        for r in 0..dim_h {
            let comm = linalg::commutator(&h_basis[p], &h_basis[r]);
            let (c, resid) = h_coords(&comm);
            closure = closure.max(resid);
            for s in 0..dim_h {
                bracket[idx(n + p, n + r, n + s)] = c[s];
            }
        }
    }

    Ok(StdEmbedding {
        dim_m: n,
        dim_h,
        bracket,
        h_basis,
        tol,
        closure_residual: closure,
    })
}

/// Spanning set for `[V, V]` given a spanning set of `V ⊆ g`.
fn derived(emb: &StdEmbedding, span: &DMatrix<f64>) -> DMatrix<f64> {
    let g = emb.dim_g();
    let k = span.ncols();
    let mut out = DMatrix::zeros(g, k * k);
    let mut col = 0;
    for a in 0..k {
        let x: Vec<f64> = span.column(a).iter().cloned().collect();
        for b in a + 1..k {
            let y: Vec<f64> = span.column(b).iter().cloned().collect();
            out.set_column(col, &DVector::from_vec(emb.lie_bracket(&x, &y)));
            col += 1;
        }
    }
    out.columns(0, col).into_owned()
}

/// Dimensions of the derived series of `g`, starting with `dim g`.
pub fn derived_series_dims(emb: &StdEmbedding) -> Vec<usize> {
    let mut span = DMatrix::<f64>::identity(emb.dim_g(), emb.dim_g());
    let mut dims = vec![emb.dim_g()];
    loop {
        let next = linalg::range_basis(&derived(emb, &span), emb.tol());
        let d = next.ncols();
        if d == 0 || d == *dims.last().unwrap() {
            dims.push(d);
            return dims;
        }
        dims.push(d);
        span = next;
    }
}

/// Solvability of the system, decided on the derived series of its standard
/// embedding.
pub fn is_solvable(lts: &LtsStructure) -> Result<bool> {
    let emb = standard_embedding(lts)?;
    Ok(*derived_series_dims(&emb).last().unwrap() == 0)
}
