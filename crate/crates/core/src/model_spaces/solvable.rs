use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::{check_len, uniform_box, GroupRealization, Symmetric, SymmetricSpace};
use crate::error::{unsupported, Result};
use crate::lts::LtsStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvableKind {
    /// `s_{(a,b)}(a',b') = (2a − a', 2cosh(a − a')b − b')`.
    Cosh,
    /// `s_{(a,b)}(a',b') = (2a − a', 2cos(a − a')b − b')`.
    Cos,
}

/// The two solvable planes, realized as `G/H` with `G = R ⋉ R²` acting by a
/// boost (`Cosh`) or rotation (`Cos`) and `H` the translations along `(1,1)`.
///
/// Group elements are 5×5 matrices `diag([[R(θ), w], [0, 1]], [[1, θ], [0, 1]])`;
/// the second block keeps `θ` on the universal cover. The chart is
/// `(a, b) = (θ, ℓ_θ(w))` with `ℓ_θ` the linear form vanishing on `R(θ)(1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvablePlane {
    kind: SolvableKind,
}

impl SolvablePlane {
    pub fn ex5() -> Self {
        Self {
            kind: SolvableKind::Cosh,
        }
    }

    pub fn ex6() -> Self {
        Self {
            kind: SolvableKind::Cos,
        }
    }

    pub fn kind(&self) -> SolvableKind {
        self.kind
    }

    fn profile(&self, t: f64) -> f64 {
        match self.kind {
            SolvableKind::Cosh => t.cosh(),
            SolvableKind::Cos => t.cos(),
        }
    }

    /// `sinh(t)/t` resp. `sin(t)/t`.
    fn shc(&self, t: f64) -> f64 {
        if t.abs() < 1e-4 {
            let t2 = t * t;
            return match self.kind {
                SolvableKind::Cosh => 1.0 + t2 / 6.0 + t2 * t2 / 120.0,
                SolvableKind::Cos => 1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            };
        }
        match self.kind {
            SolvableKind::Cosh => t.sinh() / t,
            SolvableKind::Cos => t.sin() / t,
        }
    }

    fn rotation(&self, t: f64) -> [[f64; 2]; 2] {
        match self.kind {
            SolvableKind::Cosh => [[t.exp(), 0.0], [0.0, (-t).exp()]],
            SolvableKind::Cos => [[t.cos(), -t.sin()], [t.sin(), t.cos()]],
        }
    }

    /// Coefficients of `ℓ_θ` and of its `θ`-derivative.
    fn form(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        match self.kind {
            SolvableKind::Cosh => ([(-t).exp(), -t.exp()], [-(-t).exp(), -t.exp()]),
            SolvableKind::Cos => {
                let (s, c) = t.sin_cos();
                ([s + c, s - c], [c - s, c + s])
            }
        }
    }

    /// The group element with rotation parameter `theta` and translation `w`.
    pub fn element(&self, theta: f64, w: [f64; 2]) -> DMatrix<f64> {
        let r = self.rotation(theta);
        let mut g = DMatrix::identity(5, 5);
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] = r[i][j];
            }
            g[(i, 2)] = w[i];
        }
        g[(3, 4)] = theta;
        g
    }

    fn chart_of(&self, g: &DMatrix<f64>) -> Vec<f64> {
        let theta = g[(3, 4)];
        let (l, _) = self.form(theta);
        vec![theta, l[0] * g[(0, 2)] + l[1] * g[(1, 2)]]
    }
}

impl Symmetric for SolvablePlane {
    fn chart_dim(&self) -> usize {
        2
    }

    fn symmetry(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        vec![2.0 * x[0] - y[0], 2.0 * self.profile(x[0] - y[0]) * x[1] - y[1]]
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        Some(c.to_vec())
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        uniform_box(rng, 2, 3.0)
    }
}

impl SymmetricSpace for SolvablePlane {
    fn name(&self) -> String {
        match self.kind {
            SolvableKind::Cosh => "ex5".into(),
            SolvableKind::Cos => "ex6".into(),
        }
    }

    fn ambient_dim(&self) -> usize {
        2
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        check_len(p, 2, "point")
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0], 2.0 * x[1] * self.shc(x[0])]
    }

    fn has_log(&self) -> bool {
        self.kind == SolvableKind::Cosh
    }

    fn log_base(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            SolvableKind::Cosh => Ok(vec![y[0], y[1] / (2.0 * self.shc(y[0]))]),
            SolvableKind::Cos => Err(unsupported("ex6 is not exponential; no global logarithm")),
        }
    }

    /// `[e₂,e₁,e₁] = ±e₂`, `[e₁,e₂,e₁] = ∓e₂`, everything else zero.
    fn lts(&self) -> LtsStructure {
        let s = match self.kind {
            SolvableKind::Cosh => 1.0,
            SolvableKind::Cos => -1.0,
        };
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * 2 + j) * 2 + k) * 2 + l;
        let mut c = vec![0.0; 16];
        c[idx(1, 0, 0, 1)] = s;
        c[idx(0, 1, 0, 1)] = -s;
        LtsStructure::new(2, c).expect("valid constants")
    }

    fn realization(&self) -> Option<&dyn GroupRealization> {
        Some(self)
    }
}

impl GroupRealization for SolvablePlane {
    fn generators(&self) -> Vec<DMatrix<f64>> {
        let mut rot = DMatrix::zeros(5, 5);
        match self.kind {
            SolvableKind::Cosh => {
                rot[(0, 0)] = 1.0;
                rot[(1, 1)] = -1.0;
            }
            SolvableKind::Cos => {
                rot[(0, 1)] = -1.0;
                rot[(1, 0)] = 1.0;
            }
        }
        rot[(3, 4)] = 1.0;
        let mut tr = DMatrix::zeros(5, 5);
        tr[(0, 2)] = 1.0;
        tr[(1, 2)] = -1.0;
        vec![rot, tr]
    }

    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
        self.chart_of(&(g * self.lift(p)))
    }

    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let (_, dl) = self.form(g[(3, 4)]);
        let dtheta = dl[0] * g[(0, 2)] + dl[1] * g[(1, 2)];
        vec![v[0], dtheta * v[0] + 2.0 * v[1]]
    }

    fn lift(&self, p: &[f64]) -> DMatrix<f64> {
        let (l, _) = self.form(p[0]);
        let n2 = l[0] * l[0] + l[1] * l[1];
        self.element(p[0], [p[1] * l[0] / n2, p[1] * l[1] / n2])
    }

    fn involution(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(5, 5);
        p[(0, 1)] = 1.0;
        p[(1, 0)] = 1.0;
        p[(2, 2)] = 1.0;
        p[(3, 3)] = -1.0;
        p[(4, 4)] = 1.0;
        &p * g * &p
    }

    fn contains(&self, g: &DMatrix<f64>) -> bool {
        if g.nrows() != 5 || g.ncols() != 5 {
            return false;
        }
        let expect = self.element(g[(3, 4)], [g[(0, 2)], g[(1, 2)]]);
        (g - &expect).norm() <= 1e-10 * g.norm().max(1.0)
    }
}
