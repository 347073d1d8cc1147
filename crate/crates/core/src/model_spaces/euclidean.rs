use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::{check_len, uniform_box, GroupRealization, Symmetric, SymmetricSpace};
use crate::error::Result;
use crate::lts::LtsStructure;

/// `R^n` with `s_x y = 2x − y`, realized by affine translations.
#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The translation by `v` as an affine matrix.
    pub fn translation(&self, v: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::identity(self.n + 1, self.n + 1);
        for (i, vi) in v.iter().enumerate() {
            g[(i, self.n)] = *vi;
        }
        g
    }
}

impl Symmetric for Euclidean {
    fn chart_dim(&self) -> usize {
        self.n
    }

    fn symmetry(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| 2.0 * a - b).collect()
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        Some(c.to_vec())
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        uniform_box(rng, self.n, 3.0)
    }
}

impl SymmetricSpace for Euclidean {
    fn name(&self) -> String {
        format!("euclidean:{}", self.n)
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        check_len(p, self.n, "point")
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn has_log(&self) -> bool {
        true
    }

    fn log_base(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(y.to_vec())
    }

    fn lts(&self) -> LtsStructure {
        LtsStructure::zero(self.n)
    }

    fn realization(&self) -> Option<&dyn GroupRealization> {
        Some(self)
    }

    fn is_euclidean(&self) -> bool {
        true
    }
}

impl GroupRealization for Euclidean {
    fn generators(&self) -> Vec<DMatrix<f64>> {
        (0..self.n)
            .map(|i| {
                let mut g = DMatrix::zeros(self.n + 1, self.n + 1);
                g[(i, self.n)] = 1.0;
                g
            })
            .collect()
    }

    fn exp_algebra(&self, x: &[f64]) -> DMatrix<f64> {
        self.translation(x)
    }

    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| g[(i, j)] * p[j]).sum::<f64>() + g[(i, self.n)])
            .collect()
    }

    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| g[(i, j)] * v[j]).sum())
            .collect()
    }

    fn lift(&self, p: &[f64]) -> DMatrix<f64> {
        self.translation(p)
    }

    fn involution(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = g.clone();
        for i in 0..self.n {
            s[(i, self.n)] = -s[(i, self.n)];
        }
        s
    }

    fn contains(&self, g: &DMatrix<f64>) -> bool {
        let n = self.n;
        if g.nrows() != n + 1 || g.ncols() != n + 1 {
            return false;
        }
        (0..=n).all(|i| {
            (0..n).all(|j| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-12)
        }) && (g[(n, n)] - 1.0).abs() <= 1e-12
    }
}
