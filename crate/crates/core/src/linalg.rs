//! Dense complex Hermitian linear algebra and seeded random sampling.
//!
//! Composite indices on `H₁ ⊗ H₂` are row-major throughout the crate:
//! the pair `(a, i)` with `a < d₁`, `i < d₂` maps to `a·d₂ + i`.

use std::ops::{Add, Mul, Sub};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, Error, Result};

/// Largest composite dimension supported by the dense routines.
pub const MAX_DIM: usize = 64;

const EIGH_MAX_ITERATIONS: usize = 10_000;

/// A complex square matrix stored exactly equal to its conjugate transpose.
///
/// Construction symmetrizes the input (`(M + M*)/2` on the strict upper
/// triangle, mirrored below; real part only on the diagonal), so the stored
/// entries satisfy `a[i][j] == conj(a[j][i])` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Input(format!(
                "matrix is not square: {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Input("matrix is empty".into()));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Symmetrizes without validation. Callers guarantee a square, finite input.
    pub(crate) fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Self { inner: m }
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// Sum of the (real) diagonal.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.inner)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            inner: self.inner.map(|z| z * alpha),
        }
    }

    /// `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            inner: self
                .inner
                .zip_map(&other.inner, |a, b| a * alpha + b * beta),
        })
    }

    /// `u*·self·u`, re-symmetrized.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.nrows())?;
        Ok(Self::symmetrized(u.adjoint() * &self.inner * u))
    }

    /// Trace of the product `self·other` (real for Hermitian factors).
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.inner[(i, j)] * other.inner[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            inner: kron(&self.inner, &other.inner)?,
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(self)?.eigenvalues[0])
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    /// Panics on dimension mismatch, like the underlying matrix addition.
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scaled(rhs)
    }
}

impl AsRef<CMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.inner
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigenvalues (ascending) and a unitary eigenbasis `U` with `A = U·diag(λ)·U*`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U·diag(values)·U*` for an arbitrary real spectrum on the same basis.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        let u = &self.basis;
        let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * values[j]);
        HermitianMatrix::symmetrized(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }

    /// Expresses `h` in the eigenbasis: `U*·h·U`.
    pub fn to_eigenbasis(&self, h: &CMatrix) -> Result<CMatrix> {
        check_same_dim(self.dim(), h.nrows())?;
        Ok(self.basis.adjoint() * h * &self.basis)
    }

    /// Inverse of [`Self::to_eigenbasis`]: `U·m·U*`.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> Result<CMatrix> {
        check_same_dim(self.dim(), m.nrows())?;
        Ok(&self.basis * m * self.basis.adjoint())
    }

    /// Fails with the first eigenvalue that is not strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self
            .eigenvalues
            .iter()
            .position(|&l| l <= 0.0 || l.is_nan())
        {
            Some(index) => Err(Error::NonPositiveEigenvalue {
                index,
                value: self.eigenvalues[index],
            }),
            None => Ok(()),
        }
    }
}

pub fn eigh(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    if a.inner
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(a.inner.clone(), f64::EPSILON, EIGH_MAX_ITERATIONS)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let basis = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition { eigenvalues, basis })
}

/// Kronecker product with `(A⊗B)[(a,i),(b,j)] = A[a][b]·B[i][j]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Input("kron expects square factors".into()));
    }
    let (d1, d2) = (a.nrows(), b.nrows());
    let n = d1
        .checked_mul(d2)
        .filter(|&n| n <= MAX_DIM)
        .ok_or_else(|| {
            Error::Input(format!(
                "composite dimension {d1}x{d2} exceeds the supported maximum {MAX_DIM}"
            ))
        })?;
    Ok(CMatrix::from_fn(n, n, |r, c| {
        a[(r / d2, c / d2)] * b[(r % d2, c % d2)]
    }))
}

/// A reproducible random stream keyed by `(seed, stream id)`.
///
/// Backed by ChaCha20 with the stream id selecting the ChaCha stream, so
/// draws are identical across runs and platforms. Not meant to be shared
/// between tasks; derive one stream per task instead.
#[derive(Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u: f64 = self.rng.random();
        lo + (hi - lo) * u
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.gaussian() * s, self.gaussian() * s)
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        self.rng.random_range(0..n as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random()
    }
}

/// Matrix of independent standard complex Gaussians times `scale`.
pub fn random_gaussian_matrix(dim: usize, rng: &mut RngStream, scale: f64) -> CMatrix {
    // Column-major fill order; fixed so draws are reproducible.
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            m[(i, j)] = rng.complex_gaussian() * scale;
        }
    }
    m
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary(dim: usize, rng: &mut RngStream) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    let qr = random_gaussian_matrix(dim, rng, 1.0).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: DVector<Complex64> = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    Ok(DMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j]))
}

/// Positive definite matrix `U·diag(λ)·U*` with `λ` uniform in `[lo, hi]`
/// and `U` Haar-random.
pub fn random_pd(
    dim: usize,
    rng: &mut RngStream,
    eig_range: (f64, f64),
) -> Result<HermitianMatrix> {
    let (lo, hi) = eig_range;
    if !(lo > 0.0) || !hi.is_finite() || hi < lo {
        return Err(Error::Input(format!(
            "eigenvalue range [{lo}, {hi}] must satisfy 0 < lo <= hi < inf"
        )));
    }
    if dim == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    let u = random_unitary(dim, rng)?;
    let values: Vec<f64> = (0..dim).map(|_| rng.uniform(lo, hi)).collect();
    let spec = SpectralDecomposition {
        eigenvalues: values,
        basis: u,
    };
    Ok(spec.reconstruct())
}

/// Random Hermitian matrix whose raw entries have modulus at most `scale`
/// (diagonal real in `[-scale, scale]`) before symmetrization.
pub fn random_hermitian(dim: usize, rng: &mut RngStream, scale: f64) -> Result<HermitianMatrix> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Input(format!(
            "scale {scale} must be positive and finite"
        )));
    }
    if dim == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(rng.uniform(-scale, scale), 0.0);
        for j in (i + 1)..dim {
            let r = rng.uniform(0.0, scale);
            let theta = rng.uniform(0.0, std::f64::consts::TAU);
            m[(i, j)] = Complex64::from_polar(r, theta);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    Ok(HermitianMatrix { inner: m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_c(v: &[f64]) -> CMatrix {
        HermitianMatrix::from_real_diagonal(v)
            .unwrap()
            .into_matrix()
    }

    fn check_decomposition(a: &HermitianMatrix, spec: &SpectralDecomposition) {
        let n = a.dim();
        let u = &spec.basis;
        let gram = u.adjoint() * u - CMatrix::identity(n, n);
        assert!(frobenius_norm(&gram) <= 1e-12 * n as f64);
        let resid = spec.reconstruct().as_matrix() - a.as_matrix();
        assert!(frobenius_norm(&resid) <= 1e-10 * a.frobenius_norm().max(1.0));
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 2.0);
        m[(1, 0)] = Complex64::new(3.0, 0.0);
        m[(0, 0)] = Complex64::new(1.0, 5.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
        assert_eq!(h.get(0, 1), Complex64::new(2.0, 1.0));
        assert_eq!(h.get(0, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_finite_and_non_square() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::Input(_))));
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eigh_identity() {
        let spec = eigh(&HermitianMatrix::identity(3)).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 1.0, 1.0]);
        check_decomposition(&HermitianMatrix::identity(3), &spec);
    }

    #[test]
    fn eigh_diagonal_sorts_ascending() {
        let a = HermitianMatrix::from_real_diagonal(&[2.0, 1.0]).unwrap();
        let spec = eigh(&a).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 2.0]);
        // Eigenvector for 1 is e₂ up to phase.
        assert!((spec.basis[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((spec.basis[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_random_reconstructs() {
        for s in 0..20 {
            let mut rng = RngStream::new(7, s);
            let a = random_hermitian(4, &mut rng, 2.0).unwrap();
            let spec = eigh(&a).unwrap();
            check_decomposition(&a, &spec);
        }
    }

    #[test]
    fn kron_examples() {
        let k = kron(&CMatrix::identity(2, 2), &CMatrix::identity(3, 3)).unwrap();
        assert_eq!(k, CMatrix::identity(6, 6));
        let k = kron(&diag_c(&[1.0, 2.0]), &diag_c(&[3.0, 4.0])).unwrap();
        assert_eq!(k, diag_c(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_index_convention() {
        let mut rng = RngStream::new(3, 0);
        let a = random_gaussian_matrix(2, &mut rng, 1.0);
        let b = random_gaussian_matrix(3, &mut rng, 1.0);
        let k = kron(&a, &b).unwrap();
        for (ra, rb, i, j) in [(0, 1, 2, 0), (1, 1, 1, 2), (1, 0, 0, 0)] {
            assert_eq!(k[(ra * 3 + i, rb * 3 + j)], a[(ra, rb)] * b[(i, j)]);
        }
    }

    #[test]
    fn kron_trace_multiplicative() {
        for s in 0..20 {
            let mut rng = RngStream::new(11, s);
            let a = random_gaussian_matrix(1 + s as usize % 4, &mut rng, 1.0);
            let b = random_gaussian_matrix(2 + s as usize % 3, &mut rng, 1.0);
            let lhs = trace(&kron(&a, &b).unwrap());
            let rhs = trace(&a) * trace(&b);
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn kron_rejects_overflow() {
        let a = CMatrix::identity(9, 9);
        assert!(matches!(kron(&a, &a), Err(Error::Input(_))));
    }

    #[test]
    fn random_pd_scalar_case() {
        let mut rng = RngStream::new(1, 1);
        let a = random_pd(1, &mut rng, (1.0, 2.0)).unwrap();
        let v = a.get(0, 0);
        assert!((1.0..=2.0).contains(&v.re));
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn random_pd_spectrum_in_range() {
        for dim in 1..=6 {
            for s in 0..100 {
                let mut rng = RngStream::new(dim as u64, s);
                let a = random_pd(dim, &mut rng, (0.1, 3.0)).unwrap();
                let spec = eigh(&a).unwrap();
                assert!(spec.eigenvalues[0] >= 0.1 - 1e-12);
                assert!(spec.eigenvalues[dim - 1] <= 3.0 + 1e-12);
            }
        }
    }

    #[test]
    fn random_pd_rejects_non_positive_floor() {
        let mut rng = RngStream::new(1, 1);
        assert!(random_pd(3, &mut rng, (0.0, 1.0)).is_err());
        assert!(random_pd(3, &mut rng, (2.0, 1.0)).is_err());
    }

    #[test]
    fn draws_are_reproducible() {
        let a = random_pd(4, &mut RngStream::new(42, 9), (0.1, 3.0)).unwrap();
        let b = random_pd(4, &mut RngStream::new(42, 9), (0.1, 3.0)).unwrap();
        assert_eq!(a, b);
        let c = random_pd(4, &mut RngStream::new(42, 10), (0.1, 3.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_hermitian_properties() {
        let mut rng = RngStream::new(5, 0);
        let x = random_hermitian(1, &mut rng, 0.5).unwrap();
        assert!(x.get(0, 0).re.abs() <= 0.5 && x.get(0, 0).im == 0.0);

        let h = random_hermitian(5, &mut rng, 1.0).unwrap();
        assert_eq!(h.as_matrix().adjoint(), *h.as_matrix());
        assert!(h.as_matrix().iter().all(|z| z.norm() <= 1.0));

        let a = random_hermitian(3, &mut RngStream::new(5, 1), 1.0).unwrap();
        let b = random_hermitian(3, &mut RngStream::new(5, 2), 1.0).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = RngStream::new(8, 0);
        for n in 1..=8 {
            let u = random_unitary(n, &mut rng).unwrap();
            let gram = u.adjoint() * &u - CMatrix::identity(n, n);
            assert!(frobenius_norm(&gram) < 1e-13 * n as f64);
        }
    }

    #[test]
    fn hermitian_arithmetic_stays_exact() {
        let mut rng = RngStream::new(2, 0);
        let a = random_hermitian(4, &mut rng, 1.0).unwrap();
        let b = random_hermitian(4, &mut rng, 1.0).unwrap();
        let c = a.combine(0.3, &b, -1.7).unwrap();
        assert_eq!(c.as_matrix().adjoint(), *c.as_matrix());
        let d = &(&a + &b) - &(&a * 2.0);
        assert_eq!(d.as_matrix().adjoint(), *d.as_matrix());
        assert!(a.combine(1.0, &HermitianMatrix::identity(3), 1.0).is_err());
    }
}
