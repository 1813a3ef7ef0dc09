//! Dense Hermitian spectral engine: eigendecomposition, matrix exponentials,
//! and the norms used throughout.
//!
//! Everything is an explicit `2^n x 2^n` complex matrix. Matrix exponentials go
//! through the eigendecomposition rather than a series or Pade scheme: inputs
//! are Hermitian, dimensions stay at or below 2^10, and the Bell-probability
//! identities need the result unitary to near machine precision.
//!
//! Norm conventions: `operator_norm` is the largest singular value, `trace_norm`
//! the sum of singular values, and the Schatten norms are *normalized*,
//! `schatten_p(A) = (sum_i sigma_i^p / 2^n)^{1/p}`, so every Pauli string has
//! norm 1 and p = 2 is the normalized Frobenius norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense-backend cap; 4^n complex entries hit a memory wall quickly.
pub const MAX_QUBITS: usize = 10;

/// Relative tolerance for treating a matrix as Hermitian: the defect
/// `max |a_ij - conj(a_ji)|` may not exceed `1e-9 * max |a_ij|`.
pub const HERMITICITY_RTOL: f64 = 1e-9;

/// A `2^n x 2^n` complex matrix with all entries finite.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<Complex64>,
    qubits: usize,
}

impl DenseOperator {
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!("dimension {dim} is not a power of two")));
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits, max: MAX_QUBITS });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator contains non-finite entries".into()));
        }
        Ok(DenseOperator { mat, qubits })
    }

    pub fn zeros(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits, max: MAX_QUBITS });
        }
        let dim = 1usize << qubits;
        Ok(DenseOperator { mat: DMatrix::zeros(dim, dim), qubits })
    }

    pub fn identity(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits, max: MAX_QUBITS });
        }
        let dim = 1usize << qubits;
        Ok(DenseOperator { mat: DMatrix::identity(dim, dim), qubits })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { mat: self.mat.adjoint(), qubits: self.qubits }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        DenseOperator { mat: &self.mat * factor, qubits: self.qubits }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        (&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                defect = defect.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITICITY_RTOL * self.max_abs_entry()
    }

    /// Direct entrywise path for `sqrt(Tr[A^dag A] / 2^n)`; the spectral path
    /// is `schatten_p_normalized(A, 2)`.
    pub fn frobenius_normalized(&self) -> f64 {
        (self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64).sqrt()
    }
}

impl std::ops::Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        DenseOperator { mat: &self.mat + &rhs.mat, qubits: self.qubits }
    }
}

impl std::ops::Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        DenseOperator { mat: &self.mat - &rhs.mat, qubits: self.qubits }
    }
}

impl std::ops::Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        DenseOperator { mat: &self.mat * &rhs.mat, qubits: self.qubits }
    }
}

/// Eigenvalues (ascending) and optionally the unitary of eigenvectors of a
/// Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<Complex64>>,
    qubits: usize,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<Complex64>> {
        self.eigenvectors.as_ref()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(lambda) V^dag`.
    pub fn reconstruct(&self) -> Result<DenseOperator> {
        let v = self
            .eigenvectors
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("spectrum stored without eigenvectors".into()))?;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|l| Complex64::new(*l, 0.0)),
        ));
        DenseOperator::from_matrix(v * d * v.adjoint())
    }

    /// Applies `f` to each eigenvalue and rebuilds `V diag(f(lambda)) V^dag`.
    pub fn map_eigenvalues(&self, mut f: impl FnMut(f64) -> Complex64) -> Result<DenseOperator> {
        let v = self
            .eigenvectors
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("spectrum stored without eigenvectors".into()))?;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|l| f(*l)),
        ));
        DenseOperator::from_matrix(v * d * v.adjoint())
    }

    /// `sqrt(sum lambda^2 / 2^n)`, the normalized Frobenius norm of the source.
    pub fn frobenius_normalized(&self) -> f64 {
        (self.eigenvalues.iter().map(|l| l * l).sum::<f64>() / self.dim() as f64).sqrt()
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).sum()
    }
}

/// Hermitian eigendecomposition. Rejects inputs whose Hermiticity defect
/// exceeds [`HERMITICITY_RTOL`] times the largest entry; below that the input
/// is symmetrized and handed to the tridiagonal QL solver.
pub fn eig_hermitian(a: &DenseOperator) -> Result<Spectrum> {
    let defect = a.hermiticity_defect();
    let tol = HERMITICITY_RTOL * a.max_abs_entry();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let sym = (a.matrix() + a.matrix().adjoint()).scale(0.5);
    let se = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(a.dim(), a.dim());
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(src));
    }
    Ok(Spectrum { eigenvalues, eigenvectors: Some(vectors), qubits: a.qubits() })
}

/// `e^{-i * scale * H}` for Hermitian `H`, via the eigendecomposition.
pub fn exp_i_hermitian(h: &DenseOperator, scale: f64) -> Result<DenseOperator> {
    let spec = eig_hermitian(h)?;
    exp_i_from_spectrum(&spec, scale)
}

/// Same as [`exp_i_hermitian`] but reusing a precomputed spectrum.
pub fn exp_i_from_spectrum(spec: &Spectrum, scale: f64) -> Result<DenseOperator> {
    spec.map_eigenvalues(|l| Complex64::from_polar(1.0, -scale * l))
}

/// Singular values in descending order, via the complex SVD.
pub fn singular_values(a: &DenseOperator) -> Vec<f64> {
    let svd = a.matrix().clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Normalized Schatten p-norm `(sum_i sigma_i^p / 2^n)^{1/p}` for `p >= 1`.
pub fn schatten_p_normalized(a: &DenseOperator, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Schatten order p = {p} must be >= 1")));
    }
    let sv = singular_values(a);
    Ok((sv.iter().map(|s| s.powf(p)).sum::<f64>() / a.dim() as f64).powf(1.0 / p))
}

/// Largest singular value.
pub fn operator_norm(a: &DenseOperator) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Sum of singular values (unnormalized).
pub fn trace_norm(a: &DenseOperator) -> f64 {
    singular_values(a).iter().sum()
}
