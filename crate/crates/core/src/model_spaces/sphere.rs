use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::{check_len, GroupRealization, Symmetric, SymmetricSpace};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::lts::LtsStructure;

/// The unit sphere `S^n ⊂ R^{n+1}` with `s_z y = 2⟨y,z⟩z − y`, base point the
/// last basis vector, stereographic chart from the opposite pole.
#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Differential of the stereographic chart at `p` applied to `dp`.
    fn chart_differential(&self, p: &[f64], dp: &[f64]) -> Vec<f64> {
        let n = self.n;
        let den = 1.0 + p[n];
        (0..n)
            .map(|i| dp[i] / den - p[i] * dp[n] / (den * den))
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Symmetric for Sphere {
    fn chart_dim(&self) -> usize {
        self.n
    }

    fn symmetry(&self, z: &[f64], y: &[f64]) -> Vec<f64> {
        let c = 2.0 * dot(y, z);
        z.iter().zip(y).map(|(zi, yi)| c * zi - yi).collect()
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        let den = 1.0 + p[self.n];
        p[..self.n].iter().map(|v| v / den).collect()
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        let r2 = dot(c, c);
        if !r2.is_finite() {
            return None;
        }
        let mut p: Vec<f64> = c.iter().map(|v| 2.0 * v / (1.0 + r2)).collect();
        p.push((1.0 - r2) / (1.0 + r2));
        Some(p)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let v = linalg::gaussian_vec(rng, self.n + 1);
        let norm = linalg::norm(&v);
        v.into_iter().map(|x| x / norm).collect()
    }
}

impl SymmetricSpace for Sphere {
    fn name(&self) -> String {
        format!("sphere:{}", self.n)
    }

    fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    fn base_point(&self) -> Vec<f64> {
        let mut o = vec![0.0; self.n + 1];
        o[self.n] = 1.0;
        o
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        check_len(p, self.n + 1, "sphere point")?;
        if (dot(p, p) - 1.0).abs() > 1e-10 {
            return Err(invalid("point is not on the unit sphere"));
        }
        Ok(())
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        let r = linalg::norm(x);
        if r == 0.0 {
            return self.base_point();
        }
        let mut p: Vec<f64> = x.iter().map(|v| r.sin() * v / r).collect();
        p.push(r.cos());
        p
    }

    /// `[X,Y,Z] = ⟨X,Z⟩Y − ⟨Y,Z⟩X`.
    fn lts(&self) -> LtsStructure {
        let n = self.n;
        LtsStructure::from_bracket(n, |x, y, z| {
            let (xz, yz) = (dot(x, z), dot(y, z));
            (0..n).map(|l| xz * y[l] - yz * x[l]).collect()
        })
    }

    fn realization(&self) -> Option<&dyn GroupRealization> {
        Some(self)
    }

    fn start_points(&self, _data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        super::uniform_grid(&vec![(-3.0, 3.0); self.n], count)
    }
}

impl GroupRealization for Sphere {
    fn generators(&self) -> Vec<DMatrix<f64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut j = DMatrix::zeros(n + 1, n + 1);
                j[(i, n)] = 1.0;
                j[(n, i)] = -1.0;
                j
            })
            .collect()
    }

    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
        (g * DVector::from_column_slice(p)).iter().copied().collect()
    }

    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let p: Vec<f64> = g.column(n).iter().copied().collect();
        let dp: Vec<f64> = (0..=n)
            .map(|r| (0..n).map(|c| g[(r, c)] * v[c]).sum())
            .collect();
        self.chart_differential(&p, &dp)
    }

    /// Rotation in the plane of `o` and `p`.
    fn lift(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let o = DVector::from_column_slice(&self.base_point());
        let pv = DVector::from_column_slice(p);
        let cos = p[n].clamp(-1.0, 1.0);
        let mut u = &pv - &o * cos;
        let sin = u.norm();
        if sin < 1e-300 {
            if cos > 0.0 {
                return DMatrix::identity(n + 1, n + 1);
            }
            u = DVector::zeros(n + 1);
            u[0] = 1.0;
        } else {
            u /= sin;
        }
        let sin = if sin < 1e-300 { 0.0 } else { sin };
        let id = DMatrix::<f64>::identity(n + 1, n + 1);
        &id + (&u * o.transpose() - &o * u.transpose()) * sin
            + (&u * u.transpose() + &o * o.transpose()) * (cos - 1.0)
    }

    fn involution(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n + 1, n + 1, |r, c| {
            let s = if (r == n) == (c == n) { 1.0 } else { -1.0 };
            s * g[(r, c)]
        })
    }

    fn contains(&self, g: &DMatrix<f64>) -> bool {
        let n = self.n + 1;
        g.nrows() == n
            && g.ncols() == n
            && (g.transpose() * g - DMatrix::identity(n, n)).norm() <= 1e-10
            && g.determinant() > 0.0
    }
}
