//! Gate-comparison metrics: phase-invariant fidelity, leakage, and the
//! Makhlin local invariants of two-qubit gates.
//!
//! Magic basis (columns):
//!
//! ```text
//! Q = 1/√2 · | 1  0  0  i |
//!            | 0  i  1  0 |
//!            | 0  i -1  0 |
//!            | 1  0  0 -i |
//! ```
//!
//! With `U_B = Q† U Q` and `m = U_Bᵀ U_B`,
//! `G₁ = tr²(m) / (16 det U)` and `G₂ = (tr²(m) − tr(m²)) / (4 det U)`.
//! The identity maps to `(1, 3)`, CNOT and CZ to `(0, 1)`.

use nalgebra::DMatrix;

use super::{max_abs, Operator, C64, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Unitarity tolerance for fidelity and invariant inputs.
pub const UNITARY_TOL: f64 = 1e-8;

/// `|Tr(U†V)| / dim`.
pub fn phase_invariant_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: v.dim(),
        });
    }
    u.require_unitary(UNITARY_TOL)?;
    v.require_unitary(UNITARY_TOL)?;
    Ok(overlap_fidelity(u, v))
}

/// Same quantity without the unitarity precondition, for blocks that may
/// have leaked.
pub fn overlap_fidelity(u: &Operator, v: &Operator) -> f64 {
    let tr: C64 = u
        .matrix()
        .iter()
        .zip(v.matrix().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    (tr.norm() / u.dim() as f64).min(1.0)
}

fn magic_basis() -> DMatrix<C64> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            ONE, ZERO, ZERO, I, //
            ZERO, I, ONE, ZERO, //
            ZERO, I, -ONE, ZERO, //
            ONE, ZERO, ZERO, -I,
        ],
    ) * s
}

/// Makhlin invariants `(G₁, G₂)` of a 4×4 unitary.
pub fn makhlin_invariants(u: &Operator) -> Result<(C64, f64)> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.dim(),
        });
    }
    u.require_unitary(UNITARY_TOL)?;
    Ok(makhlin_unchecked(u))
}

/// Invariant formula applied to any 4×4 matrix with nonzero determinant.
pub(crate) fn makhlin_unchecked(u: &Operator) -> (C64, f64) {
    let q = magic_basis();
    let ub = q.adjoint() * u.matrix() * &q;
    let m = ub.transpose() * &ub;
    let det = u.matrix().determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (C64::new(16.0, 0.0) * det);
    let g2 = (tr * tr - tr2) / (C64::new(4.0, 0.0) * det);
    (g1, g2.re)
}

/// Restricts `u` to the kept basis states.
///
/// Leakage is the largest out-of-subspace amplitude over kept columns,
/// `max_c √(Σ_{r ∉ keep} |u_rc|²)`.
pub fn extract_block(u: &Operator, keep: &[usize]) -> Result<(Operator, f64)> {
    let n = u.dim();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("empty index set".into()));
    }
    let mut seen = vec![false; n];
    for &k in keep {
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "index {k} out of range for dimension {n}"
            )));
        }
        if seen[k] {
            return Err(Error::InvalidParameter(format!("duplicate index {k}")));
        }
        seen[k] = true;
    }
    let m = u.matrix();
    let block = DMatrix::from_fn(keep.len(), keep.len(), |r, c| m[(keep[r], keep[c])]);
    let leakage = keep
        .iter()
        .map(|&c| {
            (0..n)
                .filter(|r| !seen[*r])
                .map(|r| m[(r, c)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Ok((Operator::from_square(block, format!("{}|block", u.label())), leakage))
}

/// `max |u1·u2 − u2·u1|`.
pub fn commutator_norm(u1: &Operator, u2: &Operator) -> Result<f64> {
    let a = u1.try_mul(u2)?;
    let b = u2.try_mul(u1)?;
    Ok(max_abs(&(a.matrix() - b.matrix())))
}
