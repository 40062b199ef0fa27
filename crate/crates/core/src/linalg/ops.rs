//! Elementary operators and Kronecker assembly.

use nalgebra::DMatrix;

use super::{Operator, C64, DEFAULT_DIM_CAP, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Truncated cavity annihilation operator, `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(n_ph: usize) -> Result<Operator> {
    if n_ph < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock truncation must be at least 2, got {n_ph}"
        )));
    }
    let mut m = DMatrix::zeros(n_ph, n_ph);
    for n in 1..n_ph {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator::from_square(m, "a"))
}

pub fn creation(n_ph: usize) -> Result<Operator> {
    Ok(annihilation(n_ph)?.dagger().with_label("a†"))
}

/// `a†a`, built directly so the diagonal is exact.
pub fn number(n_ph: usize) -> Result<Operator> {
    if n_ph < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock truncation must be at least 2, got {n_ph}"
        )));
    }
    let diag: Vec<C64> = (0..n_ph).map(|n| C64::new(n as f64, 0.0)).collect();
    Ok(Operator::from_diagonal(&diag, "a†a"))
}

pub fn sigma_x() -> Operator {
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]), "σx")
}

pub fn sigma_y() -> Operator {
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]), "σy")
}

pub fn sigma_z() -> Operator {
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]), "σz")
}

/// σ⁺ = |1⟩⟨0|: adds one Cooper pair to the box.
pub fn sigma_plus() -> Operator {
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]), "σ+")
}

pub fn sigma_minus() -> Operator {
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]), "σ-")
}

/// Charge-number operator on one box, eigenvalues {0, 1}.
pub fn charge_number() -> Operator {
    Operator::from_diagonal(&[ZERO, ONE], "n")
}

pub fn hadamard() -> Operator {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Operator::from_square(DMatrix::from_row_slice(2, 2, &[s, s, s, -s]), "H")
}

/// Kronecker product of an ordered sequence, leftmost factor most significant.
pub fn kron(ops: &[&Operator]) -> Result<Operator> {
    kron_capped(ops, DEFAULT_DIM_CAP)
}

pub fn kron_capped(ops: &[&Operator], cap: usize) -> Result<Operator> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidParameter("kron of an empty sequence".into()))?;
    let mut dim: usize = 1;
    for op in ops {
        dim = dim
            .checked_mul(op.dim())
            .filter(|d| *d <= cap)
            .ok_or(Error::DimensionCap {
                requested: dim.saturating_mul(op.dim()),
                cap,
            })?;
    }
    let mut acc = first.matrix().clone();
    let mut label = first.label().to_string();
    for op in &ops[1..] {
        acc = acc.kronecker(op.matrix());
        label.push('⊗');
        label.push_str(op.label());
    }
    Ok(Operator::from_square(acc, label))
}

/// The `(2-level)^⊗N ⊗ Fock(n_ph)` product space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    pub n_qubits: usize,
    pub n_ph: usize,
}

impl ProductSpace {
    pub fn new(n_qubits: usize, n_ph: usize) -> Result<Self> {
        Self::with_cap(n_qubits, n_ph, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(n_qubits: usize, n_ph: usize, cap: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("at least one qubit is required".into()));
        }
        if n_ph < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation must be at least 2, got {n_ph}"
            )));
        }
        let requested = 1usize
            .checked_shl(n_qubits as u32)
            .and_then(|q| q.checked_mul(n_ph))
            .unwrap_or(usize::MAX);
        if requested > cap {
            return Err(Error::DimensionCap { requested, cap });
        }
        Ok(ProductSpace { n_qubits, n_ph })
    }

    pub fn dim(&self) -> usize {
        (1usize << self.n_qubits) * self.n_ph
    }

    /// Flat index of `|q_0 q_1 … q_{N-1}⟩ ⊗ |n⟩`.
    pub fn index(&self, qubits: &[u8], photons: usize) -> usize {
        debug_assert_eq!(qubits.len(), self.n_qubits);
        let q = qubits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
        q * self.n_ph + photons
    }

    /// Inverse of [`ProductSpace::index`].
    pub fn decompose(&self, index: usize) -> (Vec<u8>, usize) {
        let photons = index % self.n_ph;
        let q = index / self.n_ph;
        let bits = (0..self.n_qubits)
            .map(|k| ((q >> (self.n_qubits - 1 - k)) & 1) as u8)
            .collect();
        (bits, photons)
    }

    /// Bit value of qubit `k` in flat index `index`.
    pub fn qubit_bit(&self, index: usize, k: usize) -> u8 {
        let q = index / self.n_ph;
        ((q >> (self.n_qubits - 1 - k)) & 1) as u8
    }

    pub fn photons(&self, index: usize) -> usize {
        index % self.n_ph
    }

    pub fn check_qubit(&self, k: usize) -> Result<()> {
        if k >= self.n_qubits {
            return Err(Error::InvalidParameter(format!(
                "qubit index {k} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Places a 2×2 operator on qubit `k` and a Fock-space operator on the
    /// cavity, identities elsewhere.
    pub fn qubit_photon(&self, k: usize, qubit_op: &Operator, photon_op: &Operator) -> Result<Operator> {
        self.check_qubit(k)?;
        if qubit_op.dim() != 2 || photon_op.dim() != self.n_ph {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_ph,
                actual: qubit_op.dim() * photon_op.dim(),
            });
        }
        let id2 = Operator::identity(2);
        let mut factors: Vec<&Operator> = Vec::with_capacity(self.n_qubits + 1);
        for j in 0..self.n_qubits {
            factors.push(if j == k { qubit_op } else { &id2 });
        }
        factors.push(photon_op);
        kron(&factors)
    }

    pub fn qubit_op(&self, k: usize, qubit_op: &Operator) -> Result<Operator> {
        self.qubit_photon(k, qubit_op, &Operator::identity(self.n_ph))
    }

    pub fn photon_op(&self, photon_op: &Operator) -> Result<Operator> {
        if photon_op.dim() != self.n_ph {
            return Err(Error::DimensionMismatch {
                expected: self.n_ph,
                actual: photon_op.dim(),
            });
        }
        let id = Operator::identity(1 << self.n_qubits);
        kron(&[&id, photon_op])
    }

    /// Indices of the photon-vacuum computational states, in qubit-bit order.
    pub fn vacuum_indices(&self) -> Vec<usize> {
        (0..1usize << self.n_qubits).map(|q| q * self.n_ph).collect()
    }
}
