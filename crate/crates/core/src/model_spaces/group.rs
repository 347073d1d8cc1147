use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::{
    cartesian, check_len, lts_of_generators, uniform_box, GroupRealization, Symmetric,
    SymmetricSpace,
};
use crate::error::{invalid, Result};
use crate::lts::LtsStructure;

/// `SL(2,R)` as a symmetric space, `s_g l = g l⁻¹ g`, with Lie triple system
/// `[X,Y,Z] = [[X,Y],Z]` on `sl(2)` (basis `H`, `E`, `F`).
///
/// With this normalization `Exp_e(X) = exp(2X)`. Points are matrices
/// flattened row-major; the chart is the Iwasawa decomposition
/// `g = R(θ)·[[e^ρ, s], [0, e^{−ρ}]]` with coordinates `(θ, ρ, s)`.
/// The realizing group is `G × G` acting by `(A, B)·l = A l B⁻¹`, stored as
/// block-diagonal 4×4 matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Group;

fn mat(p: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, p)
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn inverse2(m: &DMatrix<f64>) -> DMatrix<f64> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    DMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]]) / det
}

impl Sl2Group {
    /// `H`, `E`, `F`.
    pub fn algebra_basis() -> Vec<DMatrix<f64>> {
        vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        ]
    }

    fn blocks(g: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            g.view((0, 0), (2, 2)).into_owned(),
            g.view((2, 2), (2, 2)).into_owned(),
        )
    }

    fn pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(4, 4);
        g.view_mut((0, 0), (2, 2)).copy_from(a);
        g.view_mut((2, 2), (2, 2)).copy_from(b);
        g
    }

    /// Differential of the Iwasawa chart at `p` applied to `dp`.
    fn chart_differential(p: &[f64], dp: &[f64]) -> Vec<f64> {
        let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
        let r2 = a * a + c * c;
        let theta = c.atan2(a);
        let (sn, cs) = theta.sin_cos();
        let dtheta = (a * dp[2] - c * dp[0]) / r2;
        let drho = (a * dp[0] + c * dp[2]) / r2;
        let ds = -sn * dtheta * b + cs * dp[1] + cs * dtheta * d + sn * dp[3];
        vec![dtheta, drho, ds]
    }
}

impl Symmetric for Sl2Group {
    fn chart_dim(&self) -> usize {
        3
    }

    fn symmetry(&self, g: &[f64], l: &[f64]) -> Vec<f64> {
        let g = mat(g);
        flat(&(&g * inverse2(&mat(l)) * &g))
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        let theta = p[2].atan2(p[0]);
        let rho = 0.5 * (p[0] * p[0] + p[2] * p[2]).ln();
        let s = theta.cos() * p[1] + theta.sin() * p[3];
        vec![theta, rho, s]
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        let (sn, cs) = c[0].sin_cos();
        let (e, s) = (c[1].exp(), c[2]);
        let ie = 1.0 / e;
        let p = vec![cs * e, cs * s - sn * ie, sn * e, sn * s + cs * ie];
        p.iter().all(|v| v.is_finite()).then_some(p)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut c = uniform_box(rng, 3, 1.0);
        c[0] *= std::f64::consts::PI;
        self.from_chart(&c).expect("finite")
    }
}

impl SymmetricSpace for Sl2Group {
    fn name(&self) -> String {
        "group:sl2".into()
    }

    fn ambient_dim(&self) -> usize {
        4
    }

    fn base_point(&self) -> Vec<f64> {
        vec![1.0, 0.0, 0.0, 1.0]
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        check_len(p, 4, "SL(2) element")?;
        let det = p[0] * p[3] - p[1] * p[2];
        if (det - 1.0).abs() > 1e-10 * p.iter().map(|v| v * v).sum::<f64>().max(1.0) {
            return Err(invalid(format!("determinant {det} is not 1")));
        }
        Ok(())
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        let basis = Self::algebra_basis();
        let mut a = DMatrix::zeros(2, 2);
        for (xi, b) in x.iter().zip(&basis) {
            a += b * (2.0 * xi);
        }
        flat(&a.exp())
    }

    fn lts(&self) -> LtsStructure {
        lts_of_generators(&Self::algebra_basis()).expect("sl(2) is closed")
    }

    fn realization(&self) -> Option<&dyn GroupRealization> {
        Some(self)
    }

    fn start_points(&self, data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        let charts: Vec<Vec<f64>> = data.iter().map(|p| self.to_chart(p)).collect();
        let per = ((count.max(1) as f64).cbrt().floor() as usize).max(2);
        let pi = std::f64::consts::PI;
        let thetas: Vec<f64> = (0..per).map(|k| -pi + 2.0 * pi * k as f64 / per as f64).collect();
        let range = |i: usize| {
            let lo = charts.iter().map(|c| c[i]).fold(0.0f64, f64::min);
            let hi = charts.iter().map(|c| c[i]).fold(0.0f64, f64::max);
            let m = (hi - lo).max(1.0);
            (0..per)
                .map(|k| lo - m + (hi - lo + 2.0 * m) * k as f64 / (per - 1) as f64)
                .collect::<Vec<_>>()
        };
        cartesian(&[thetas, range(1), range(2)])
    }
}

impl GroupRealization for Sl2Group {
    fn generators(&self) -> Vec<DMatrix<f64>> {
        Self::algebra_basis()
            .iter()
            .map(|x| Self::pair(x, &(-x)))
            .collect()
    }

    fn act(&self, g: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
        let (a, b) = Self::blocks(g);
        flat(&(a * mat(p) * inverse2(&b)))
    }

    fn translate_tangent(&self, g: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let (a, b) = Self::blocks(g);
        let binv = inverse2(&b);
        let mut x = DMatrix::zeros(2, 2);
        for (vi, e) in v.iter().zip(Self::algebra_basis()) {
            x += e * *vi;
        }
        let p = flat(&(&a * &binv));
        let dp = flat(&(&a * x * 2.0 * &binv));
        Self::chart_differential(&p, &dp)
    }

    fn lift(&self, p: &[f64]) -> DMatrix<f64> {
        Self::pair(&mat(p), &DMatrix::identity(2, 2))
    }

    fn involution(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let (a, b) = Self::blocks(g);
        Self::pair(&b, &a)
    }

    fn contains(&self, g: &DMatrix<f64>) -> bool {
        if g.nrows() != 4 || g.ncols() != 4 {
            return false;
        }
        let off = g.view((0, 2), (2, 2)).norm() + g.view((2, 0), (2, 2)).norm();
        let (a, b) = Self::blocks(g);
        off <= 1e-12 && (a.determinant() - 1.0).abs() <= 1e-10 && (b.determinant() - 1.0).abs() <= 1e-10
    }
}
