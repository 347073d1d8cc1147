//! Roots of solvable systems and the resulting exponentiality test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::module::{jordan_holder_series, Field, LtsModule};
use super::{is_solvable, LtsStructure};
use crate::error::{unsupported, Result};
use crate::linalg;

/// A root `φ(X) = XᵀAX + i·XᵀBX` with symmetric `A`, `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl Root {
    pub fn value(&self, x: &[f64]) -> Complex64 {
        let v = DVector::from_column_slice(x);
        Complex64::new(v.dot(&(&self.a * &v)), v.dot(&(&self.b * &v)))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.b.iter().all(|v| v.abs() <= tol)
    }
}

impl Serialize for Root {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|r| m.row(r).iter().copied().collect())
                .collect()
        };
        let mut st = s.serialize_struct("Root", 2)?;
        st.serialize_field("real", &rows(&self.a))?;
        st.serialize_field("imag", &rows(&self.b))?;
        st.end()
    }
}

/// The roots read off the simple quotients of the complexified adjoint
/// module, in flag order.
pub fn roots(lts: &LtsStructure) -> Result<Vec<Root>> {
    let series = jordan_holder_series(&LtsModule::adjoint(lts), Field::Complexified)?;
    let p = lts.dim();
    Ok(series
        .quotients
        .iter()
        .map(|q| {
            let r = |i: usize, j: usize| q.ops[i * p + j][(0, 0)];
            let a = DMatrix::from_fn(p, p, |i, j| 0.5 * (r(i, j).re + r(j, i).re));
            let b = DMatrix::from_fn(p, p, |i, j| 0.5 * (r(i, j).im + r(j, i).im));
            Root { a, b }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RootWitness {
    pub root_index: usize,
    pub x: Vec<f64>,
    pub value: f64,
    /// Found by sampled search rather than an eigen-decomposition.
    pub sampled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentialityVerdict {
    pub exponential: bool,
    pub witness: Option<RootWitness>,
    /// Some root needed a sampled search; a positive verdict is then heuristic.
    pub sampled: bool,
    pub assumes_simply_connected: bool,
    pub roots: Vec<Root>,
}

/// Number of starts for the constrained search on complex roots.
pub const WITNESS_STARTS: usize = 64;

/// Real and negative root values decide non-exponentiality.
pub fn solvable_exponentiality(lts: &LtsStructure, seed: u64) -> Result<ExponentialityVerdict> {
    if !is_solvable(lts)? {
        return Err(unsupported("exponentiality test requires a solvable system"));
    }
    let rs = roots(lts)?;
    let tol = lts.tol().max(1e-12) * lts.max_abs_constant().max(1.0) * 10.0;
    let mut sampled = false;
    let mut witness = None;
    for (idx, root) in rs.iter().enumerate() {
        if root.is_real(tol) {
            let (values, vectors) = linalg::symmetric_eigen(&root.a);
            let (k, &lambda) = values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty");
            if lambda < -tol {
                let mut v = vectors.column(k).into_owned();
                let big = v.iamax();
                if v[big] < 0.0 {
                    v = -v;
                }
                witness = Some(RootWitness {
                    root_index: idx,
                    x: v.iter().copied().collect(),
                    value: lambda,
                    sampled: false,
                });
                break;
            }
        } else {
            sampled = true;
            if let Some((x, value)) =
                root_negative_witness(root, WITNESS_STARTS, seed.wrapping_add(idx as u64), tol)
            {
                witness = Some(RootWitness {
                    root_index: idx,
                    x,
                    value,
                    sampled: true,
                });
                break;
            }
        }
    }
    Ok(ExponentialityVerdict {
        exponential: witness.is_none(),
        witness,
        sampled,
        assumes_simply_connected: true,
        roots: rs,
    })
}

/// Searches the unit sphere for `X` with `XᵀBX = 0` and `XᵀAX < 0`.
/// Returns the most negative value found across `starts` random starts.
pub fn root_negative_witness(
    root: &Root,
    starts: usize,
    seed: u64,
    tol: f64,
) -> Option<(Vec<f64>, f64)> {
    let p = root.a.nrows();
    let mut rng = linalg::rng(seed);
    let na = root.a.norm().max(1e-300);
    let nb = root.b.norm().max(1e-300);
    let a = &root.a / na;
    let b = &root.b / nb;
    let mut best: Option<(Vec<f64>, f64)> = None;

    for _ in 0..starts.max(1) {
        let mut x = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng)).normalize();
        for mu in [1.0, 10.0, 100.0, 1e3, 1e4] {
            let step = 0.2 / (1.0 + 4.0 * mu);
            for _ in 0..200 {
                let ax = &a * &x;
                let bx = &b * &x;
                let g = x.dot(&bx);
                let grad = ax * 2.0 + bx * (4.0 * mu * g);
                let tangent = &grad - &x * x.dot(&grad);
                if tangent.norm() < 1e-14 {
                    break;
                }
                x = (&x - tangent * step).normalize();
            }
        }
        // Restore the constraint by Newton steps along its tangential gradient.
        for _ in 0..50 {
            let bx = &b * &x;
            let g = x.dot(&bx);
            if g.abs() < 1e-15 {
                break;
            }
            let grad = bx * 2.0;
            let tangent = &grad - &x * x.dot(&grad);
            let nt = tangent.norm_squared();
            if nt < 1e-20 {
                break;
            }
            x = (&x - tangent * (g / nt)).normalize();
        }
        let g = x.dot(&(&root.b * &x));
        let f = x.dot(&(&root.a * &x));
        if g.abs() <= tol && f < -tol && best.as_ref().is_none_or(|(_, v)| f < *v) {
            best = Some((x.iter().copied().collect(), f));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn ex6_is_not_exponential_with_e1_witness() {
        let v = solvable_exponentiality(&solvable_plane(-1.0), 0).unwrap();
        assert!(!v.exponential);
        assert!(!v.sampled);
        let w = v.witness.unwrap();
        assert!((w.x[0] - 1.0).abs() < 1e-12 && w.x[1].abs() < 1e-12);
        assert!((w.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ex5_is_exponential() {
        let v = solvable_exponentiality(&solvable_plane(1.0), 0).unwrap();
        assert!(v.exponential);
        assert!(!v.sampled);
        assert!(v.assumes_simply_connected);
    }

    #[test]
    fn witness_search_respects_constraint() {
        let root = Root {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            b: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        };
        let (x, f) = root_negative_witness(&root, 16, 5, 1e-9).unwrap();
        assert!((f + 1.0).abs() < 1e-8);
        assert!(x[0].abs() < 1e-6);
        let positive = Root {
            a: DMatrix::identity(2, 2),
            b: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        };
        assert!(root_negative_witness(&positive, 16, 5, 1e-9).is_none());
    }
}
