//! Small dense linear-algebra helpers shared by the structure-constant code.
//!
//! Ranks, ranges and null spaces are all decided by singular-value
//! thresholding: a singular value counts iff it exceeds `tol * max(σ_max, 1)`.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Scalars with an SVD. nalgebra's own SVD can stall short of convergence
/// (reconstruction errors around 1e-6 on well-conditioned inputs), so
/// decompositions go through faer.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    /// Full SVD `a = U Σ Vᴴ`; singular values in decreasing order.
    fn svd_full(a: &DMatrix<Self>) -> (DMatrix<Self>, Vec<f64>, DMatrix<Self>);
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn svd_full(a: &DMatrix<Self>) -> (DMatrix<Self>, Vec<f64>, DMatrix<Self>) {
                let (r, c) = a.shape();
                let m = faer::Mat::<$t>::from_fn(r, c, |i, j| a[(i, j)]);
                let svd = m.svd().expect("SVD of a finite matrix");
                let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
                (
                    DMatrix::from_fn(r, r, |i, j| u[(i, j)]),
                    (0..r.min(c)).map(|i| ComplexField::real(s[i])).collect(),
                    DMatrix::from_fn(c, c, |i, j| v[(i, j)]),
                )
            }
        }
    };
}

impl_scalar!(f64);
impl_scalar!(Complex64);

fn threshold(sv: &[f64], tol: f64) -> f64 {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    tol * smax.max(1.0)
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range_basis<T: Scalar>(a: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let n = a.nrows();
    if a.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let (u, sv, _) = T::svd_full(a);
    let thr = threshold(&sv, tol);
    let keep = sv.iter().filter(|&&s| s > thr).count();
    u.columns(0, keep).into_owned()
}

pub fn rank<T: Scalar>(a: &DMatrix<T>, tol: f64) -> usize {
    range_basis(a, tol).ncols()
}

/// Orthonormal basis of the null space of `a`.
pub fn null_space<T: Scalar>(a: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (_, sv, v) = T::svd_full(a);
    let thr = threshold(&sv, tol);
    let keep = sv.iter().filter(|&&s| s > thr).count();
    v.columns(keep, n - keep).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// inside the ambient space of dimension `basis.nrows()`.
pub fn complement<T: Scalar>(basis: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    null_space(&basis.adjoint(), tol)
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rcond * σ_max`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let (u, sv, v) = f64::svd_full(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let mut x = DVector::zeros(a.ncols());
    for (i, &s) in sv.iter().enumerate() {
        if s > rcond * smax && s > 0.0 {
            let coef = u.column(i).dot(b) / s;
            x += v.column(i) * coef;
        }
    }
    x
}

/// Residual of the best approximation of `v` by the span of the orthonormal
/// columns of `q`.
pub fn distance_to_span<T>(q: &DMatrix<T>, v: &DVector<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    if q.ncols() == 0 {
        return v.norm();
    }
    let proj = q * (q.adjoint() * v);
    (v - proj).norm()
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn commutator<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField,
{
    a * b - b * a
}

/// Column-stacked vectorization of a square matrix.
pub fn vectorize<T: ComplexField>(a: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(a.as_slice())
}

pub fn unvectorize<T: ComplexField>(v: &DVector<T>, n: usize) -> DMatrix<T> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Eigenvalues of a general square matrix, `None` if the iteration fails.
pub fn eigenvalues<T: Scalar + EigenScalar>(a: &DMatrix<T>) -> Option<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Some(Vec::new());
    }
    T::eigenvalues(a)
}

pub trait EigenScalar: Sized {
    fn eigenvalues(a: &DMatrix<Self>) -> Option<Vec<Complex64>>;
}

impl EigenScalar for f64 {
    fn eigenvalues(a: &DMatrix<f64>) -> Option<Vec<Complex64>> {
        let m = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
        m.eigenvalues().ok()
    }
}

impl EigenScalar for Complex64 {
    fn eigenvalues(a: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
        let m = faer::Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
        m.eigenvalues().ok()
    }
}

/// Eigen-decomposition of a real symmetric matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigen-decomposition of a finite matrix");
    let s = evd.S().column_vector();
    let u = evd.U();
    ((0..n).map(|i| s[i]).collect(), DMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}
