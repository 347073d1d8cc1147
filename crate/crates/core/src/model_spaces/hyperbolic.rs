use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::{cartesian, check_len, uniform_box, GroupRealization, Symmetric, SymmetricSpace};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::lts::LtsStructure;

/// `⟨x,y⟩ = x_n y_n − Σ_{i<n} x_i y_i`.
pub fn lorentz_inner(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() - 1;
    x[n] * y[n] - (0..n).map(|i| x[i] * y[i]).sum::<f64>()
}

/// Upper sheet of the hyperboloid `⟨x,x⟩ = 1`, `x_n > 0`, with
/// `s_z y = 2⟨y,z⟩z − y`; charted by the first `n` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbolic {
    n: usize,
}

/// Chart radius of the solver start grid is `sinh(START_RADIUS)`.
const START_RADIUS: f64 = 7.0;

impl Hyperbolic {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self { n }
    }

    pub fn plane() -> Self {
        Self::new(2)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The boost along the `axis` direction with translation length `t`.
    pub fn boost(&self, axis: usize, t: f64) -> DMatrix<f64> {
        let n = self.n;
        let mut g = DMatrix::identity(n + 1, n + 1);
        g[(axis, axis)] = t.cosh();
        g[(n, n)] = t.cosh();
        g[(axis, n)] = t.sinh();
        g[(n, axis)] = t.sinh();
        g
    }
}

impl Symmetric for Hyperbolic {
    fn chart_dim(&self) -> usize {
        self.n
    }

    fn symmetry(&self, z: &[f64], y: &[f64]) -> Vec<f64> {
        let c = 2.0 * lorentz_inner(y, z);
        z.iter().zip(y).map(|(zi, yi)| c * zi - yi).collect()
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        p[..self.n].to_vec()
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        let r2: f64 = c.iter().map(|v| v * v).sum();
        if !r2.is_finite() {
            return None;
        }
        let mut p = c.to_vec();
        p.push((1.0 + r2).sqrt());
        Some(p)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.from_chart(&uniform_box(rng, self.n, 2.0)).expect("finite")
    }
}

impl SymmetricSpace for Hyperbolic {
    fn name(&self) -> String {
        if self.n == 2 {
            "hyperbolic".into()
        } else {
            format!("hyperbolic:{}", self.n)
        }
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
        check_len(p, self.n + 1, "hyperboloid point")?;
        let scale = p.iter().map(|v| v * v).sum::<f64>().max(1.0);
        if p[self.n] <= 0.0 || (lorentz_inner(p, p) - 1.0).abs() > 1e-10 * scale {
            return Err(invalid("point is not on the upper sheet of the hyperboloid"));
        }
        Ok(())
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        let r = linalg::norm(x);
        if r == 0.0 {
            return self.base_point();
        }
        let mut p: Vec<f64> = x.iter().map(|v| r.sinh() * v / r).collect();
        p.push(r.cosh());
        p
    }

    fn has_log(&self) -> bool {
        true
    }

    fn log_base(&self, y: &[f64]) -> Result<Vec<f64>> {
        let u = &y[..self.n];
        let s = linalg::norm(u);
        if s == 0.0 {
            return Ok(vec![0.0; self.n]);
        }
        let r = s.asinh();
        Ok(u.iter().map(|v| r * v / s).collect())
    }

    /// `[X,Y,Z] = ⟨Y,Z⟩X − ⟨X,Z⟩Y`.
    fn lts(&self) -> LtsStructure {
        let n = self.n;
        LtsStructure::from_bracket(n, |x, y, z| {
            let yz: f64 = y.iter().zip(z).map(|(a, b)| a * b).sum();
            let xz: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
            (0..n).map(|l| yz * x[l] - xz * y[l]).collect()
        })
    }

    fn realization(&self) -> Option<&dyn GroupRealization> {
        Some(self)
    }

    /// Radial sinh-spaced grid: hyperbolic distances are spread evenly.
    fn start_points(&self, _data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        let per = ((count.max(1) as f64).powf(1.0 / self.n as f64).floor() as usize).max(2);
        let axis: Vec<f64> = (0..per)
            .map(|k| {
                let t = -START_RADIUS + 2.0 * START_RADIUS * k as f64 / (per - 1) as f64;
                t.sinh()
            })
            .collect();
        cartesian(&vec![axis; self.n])
    }
}

impl GroupRealization for Hyperbolic {
    fn generators(&self) -> Vec<DMatrix<f64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut k = DMatrix::zeros(n + 1, n + 1);
                k[(i, n)] = 1.0;
                k[(n, i)] = 1.0;
                k
            })
            .collect()
    }

    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
        (g * DVector::from_column_slice(p)).iter().copied().collect()
    }

    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| g[(r, c)] * v[c]).sum())
            .collect()
    }

    /// The pure boost taking `o` to `p`.
    fn lift(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let x = p[n];
        DMatrix::from_fn(n + 1, n + 1, |r, c| match (r < n, c < n) {
            (true, true) => (r == c) as u8 as f64 + p[r] * p[c] / (1.0 + x),
            (true, false) => p[r],
            (false, true) => p[c],
            (false, false) => x,
        })
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
        if g.nrows() != n || g.ncols() != n {
            return false;
        }
        let j = DMatrix::from_fn(n, n, |r, c| {
            if r != c {
                0.0
            } else if r == n - 1 {
                1.0
            } else {
                -1.0
            }
        });
        let scale = g.norm().powi(2).max(1.0);
        (g.transpose() * &j * g - &j).norm() <= 1e-10 * scale
            && g[(n - 1, n - 1)] > 0.0
            && g.determinant() > 0.0
    }
}
