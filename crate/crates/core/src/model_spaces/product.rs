use rand_chacha::ChaCha8Rng;

use super::{Symmetric, SymmetricSpace};
use crate::error::Result;
use crate::lts::LtsStructure;

/// Direct product `M₁ × M₂`; all coordinates are concatenated.
#[derive(Debug, Clone)]
pub struct ProductSpace<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: SymmetricSpace, B: SymmetricSpace> ProductSpace<A, B> {
    pub fn new(first: A, second: B) -> Self {
        Self { first, second }
    }

    fn split_ambient<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        p.split_at(self.first.ambient_dim())
    }

    fn split_chart<'a>(&self, c: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        c.split_at(self.first.chart_dim())
    }

    fn split_tangent<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.first.tangent_dim())
    }
}

fn join(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.extend(b);
    a
}

impl<A: SymmetricSpace, B: SymmetricSpace> Symmetric for ProductSpace<A, B> {
    fn chart_dim(&self) -> usize {
        self.first.chart_dim() + self.second.chart_dim()
    }

    fn symmetry(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let (x1, x2) = self.split_ambient(x);
        let (y1, y2) = self.split_ambient(y);
        join(self.first.symmetry(x1, y1), self.second.symmetry(x2, y2))
    }

    fn to_chart(&self, p: &[f64]) -> Vec<f64> {
        let (p1, p2) = self.split_ambient(p);
        join(self.first.to_chart(p1), self.second.to_chart(p2))
    }

    fn from_chart(&self, c: &[f64]) -> Option<Vec<f64>> {
        let (c1, c2) = self.split_chart(c);
        Some(join(self.first.from_chart(c1)?, self.second.from_chart(c2)?))
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let a = self.first.sample_point(rng);
        join(a, self.second.sample_point(rng))
    }
}

impl<A: SymmetricSpace, B: SymmetricSpace> SymmetricSpace for ProductSpace<A, B> {
    fn name(&self) -> String {
        format!("{}×{}", self.first.name(), self.second.name())
    }

    fn ambient_dim(&self) -> usize {
        self.first.ambient_dim() + self.second.ambient_dim()
    }

    fn tangent_dim(&self) -> usize {
        self.first.tangent_dim() + self.second.tangent_dim()
    }

    fn base_point(&self) -> Vec<f64> {
        join(self.first.base_point(), self.second.base_point())
    }

    fn validate(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.ambient_dim() {
            return Err(crate::error::invalid("point has the wrong length"));
        }
        let (p1, p2) = self.split_ambient(p);
        self.first.validate(p1)?;
        self.second.validate(p2)
    }

    fn exp_base(&self, x: &[f64]) -> Vec<f64> {
        let (x1, x2) = self.split_tangent(x);
        join(self.first.exp_base(x1), self.second.exp_base(x2))
    }

    fn has_log(&self) -> bool {
        self.first.has_log() && self.second.has_log()
    }

    fn log_base(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (y1, y2) = self.split_ambient(y);
        Ok(join(self.first.log_base(y1)?, self.second.log_base(y2)?))
    }

    fn lts(&self) -> LtsStructure {
        self.first.lts().direct_sum(&self.second.lts())
    }

    fn start_points(&self, data: &[Vec<f64>], count: usize) -> Vec<Vec<f64>> {
        let (d1, d2): (Vec<_>, Vec<_>) = data
            .iter()
            .map(|p| {
                let (a, b) = self.split_ambient(p);
                (a.to_vec(), b.to_vec())
            })
            .unzip();
        let per = (count as f64).sqrt().ceil() as usize;
        let s1 = self.first.start_points(&d1, per);
        let s2 = self.second.start_points(&d2, per);
        s1.iter()
            .flat_map(|a| s2.iter().map(move |b| join(a.clone(), b.clone())))
            .take(count.max(1))
            .collect()
    }
}
