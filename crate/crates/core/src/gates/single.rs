//! Single-qubit rotations of a qubit decoupled from the cavity.

use crate::device::{beta_mixing, charging_bias, ej_effective, QubitParams};
use crate::error::{Error, Result};
use crate::linalg::metrics::commutator_norm;
use crate::linalg::ops::{sigma_x, sigma_y, sigma_z};
use crate::linalg::{Operator, C64, I};

/// Tolerance on `‖axis‖ = 1`.
pub const AXIS_NORM_TOL: f64 = 1e-10;

fn sigma_dot(axis: [f64; 3]) -> Operator {
    let [x, y, z] = axis;
    let m = sigma_x().scale_re(x).matrix() + sigma_y().scale_re(y).matrix() + sigma_z().scale_re(z).matrix();
    Operator::from_square(m, "σ·n")
}

/// `exp(−iγ σ·n) = cos γ I − i sin γ σ·n`.
pub fn u_single(gamma: f64, axis: [f64; 3]) -> Result<Operator> {
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !gamma.is_finite() || (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(Error::InvalidParameter(format!(
            "need finite angle and unit axis (gamma = {gamma}, |axis| = {norm})"
        )));
    }
    let (s, c) = gamma.sin_cos();
    let m = Operator::identity(2).scale_re(c).matrix() - sigma_dot(axis).matrix() * (I * s);
    Ok(Operator::from_square(m, "U(γ)"))
}

/// `E_k` and the unit axis `(−E_J cos β, E_J sin β, E_n̄)/E_k`.
pub fn axis_from_params(q: &QubitParams) -> Result<(f64, [f64; 3])> {
    let ej = ej_effective(q);
    let beta = beta_mixing(q)?;
    let en = charging_bias(q);
    let ek = ej.hypot(en);
    if ek == 0.0 {
        return Err(Error::DegenerateRotation);
    }
    Ok((ek, [-ej * beta.cos() / ek, ej * beta.sin() / ek, en / ek]))
}

/// `E_n̄ σz − E_J (σx cos β − σy sin β)` for a qubit far from any cavity resonance.
pub fn decoupled_qubit_h(q: &QubitParams) -> Result<Operator> {
    let ej = ej_effective(q);
    let beta = beta_mixing(q)?;
    let m = sigma_z().scale_re(charging_bias(q)).matrix() - sigma_x().scale_re(ej * beta.cos()).matrix()
        + sigma_y().scale_re(ej * beta.sin()).matrix();
    Ok(Operator::from_square(m, "Hk"))
}

/// Rotation produced by holding `q` for time `t`.
pub fn u_from_params(q: &QubitParams, t: f64) -> Result<Operator> {
    let (ek, axis) = axis_from_params(q)?;
    u_single(ek * t, axis)
}

/// `‖u1 u2 − u2 u1‖_max`; positive for a non-commuting pair.
pub fn noncommuting_pair_check(u1: &Operator, u2: &Operator) -> Result<f64> {
    for u in [u1, u2] {
        if u.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: u.dim(),
            });
        }
    }
    commutator_norm(u1, u2)
}

/// `diag(1, e^{iζ})`.
pub fn phase_gate(zeta: f64) -> Operator {
    Operator::from_diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, zeta)], "Z(ζ)")
}
