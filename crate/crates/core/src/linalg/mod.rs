//! Dense complex operator algebra over the qubit ⊗ Fock product space.
//!
//! Conventions used throughout the crate:
//!
//! * ħ = 1, so energies are angular frequencies and `exp(-iHt)` is the
//!   propagator.
//! * Qubit basis `{|0⟩, |1⟩}` with `|0⟩` the +1 eigenstate of σ^z.
//!   σ⁺ = |1⟩⟨0| raises the Cooper-pair number.
//! * Tensor ordering is `qubit 0 ⊗ qubit 1 ⊗ … ⊗ qubit N-1 ⊗ Fock`, the first
//!   factor being the most significant digit of the flat index.

pub mod expm;
pub mod metrics;
pub mod ops;
pub mod tdse;

use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest product-space dimension accepted by [`ops::kron`] and the
/// Hamiltonian builders.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Tolerance for the hermiticity flag on builder outputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A square complex matrix with a free-text label.
#[derive(Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    label: String,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("operator dimension must be positive".into()));
        }
        Ok(Operator {
            matrix,
            label: label.into(),
        })
    }

    /// Wraps a matrix already known to be square.
    pub(crate) fn from_square(matrix: DMatrix<C64>, label: impl Into<String>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Operator {
            matrix,
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Operator::from_square(DMatrix::identity(dim, dim), "I")
    }

    pub fn zeros(dim: usize) -> Self {
        Operator::from_square(DMatrix::zeros(dim, dim), "0")
    }

    pub fn from_diagonal(diag: &[C64], label: impl Into<String>) -> Self {
        let d = DVector::from_column_slice(diag);
        Operator::from_square(DMatrix::from_diagonal(&d), label)
    }

    /// Row-major construction, mostly for small literal matrices.
    pub fn from_rows(dim: usize, entries: &[C64], label: impl Into<String>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Operator::new(DMatrix::from_row_slice(dim, dim, entries), label)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Operator {
        Operator::from_square(self.matrix.adjoint(), format!("{}†", self.label))
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator::from_square(&self.matrix * factor, self.label.clone())
    }

    pub fn scale_re(&self, factor: f64) -> Operator {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator::from_square(
            &self.matrix + &other.matrix,
            format!("{} + {}", self.label, other.label),
        ))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator::from_square(
            &self.matrix - &other.matrix,
            format!("{} - {}", self.label, other.label),
        ))
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator::from_square(
            &self.matrix * &other.matrix,
            format!("{}·{}", self.label, other.label),
        ))
    }

    /// In-place accumulation used by the builders.
    pub(crate) fn add_assign(&mut self, other: &Operator) {
        debug_assert_eq!(self.dim(), other.dim());
        self.matrix += &other.matrix;
    }

    /// `self + self†`, the usual way to write "X + H.c.".
    pub fn plus_hc(&self) -> Operator {
        Operator::from_square(&self.matrix + self.matrix.adjoint(), format!("{} + H.c.", self.label))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry magnitude, the norm used for all tolerance checks.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// `max |H - H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    /// `max |U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(n, n)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() < tol
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_error();
        if deviation < tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }

    /// Replaces the matrix with its hermitian part `(H + H†)/2`.
    pub fn hermitized(&self) -> Operator {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Operator::from_square(m, self.label.clone())
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        Ok(StateVector {
            amplitudes: &self.matrix * psi.amplitudes(),
            norm_tolerance: psi.norm_tolerance,
        })
    }

    /// `⟨row| self |col⟩` for basis kets.
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({}, dim={}){}", self.label, self.dim(), self.matrix)
    }
}

/// Panics on dimension mismatch; use [`Operator::try_mul`] for checked
/// composition.
impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operator dimensions must agree")
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Default norm tolerance for closed-system states.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;

/// A ket over the product space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    norm_tolerance: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("state dimension must be positive".into()));
        }
        Ok(StateVector {
            amplitudes: DVector::from_vec(amplitudes),
            norm_tolerance: DEFAULT_NORM_TOL,
        })
    }

    pub fn from_dvector(amplitudes: DVector<C64>) -> Self {
        StateVector {
            amplitudes,
            norm_tolerance: DEFAULT_NORM_TOL,
        }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = ONE;
        Ok(StateVector::from_dvector(amplitudes))
    }

    pub fn with_norm_tolerance(mut self, tol: f64) -> Self {
        self.norm_tolerance = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm_tolerance(&self) -> f64 {
        self.norm_tolerance
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < self.norm_tolerance
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm_sqr().sqrt();
        StateVector {
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
            norm_tolerance: self.norm_tolerance,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn scaled(&self, c: C64) -> StateVector {
        StateVector {
            amplitudes: &self.amplitudes * c,
            norm_tolerance: self.norm_tolerance,
        }
    }
}
