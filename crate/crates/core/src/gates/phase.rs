//! Capacitive conditional phase gate between two symmetric qubits parked at
//! half flux.

use std::f64::consts::PI;

use crate::device::{charging_bias, DeviceModel};
use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};

/// Tolerance on the half-flux decoupling condition.
pub const HALF_FLUX_TOL: f64 = 1e-9;

/// Eigenenergies `ω_{n₁n₂}` of `E_n̄₁σz₁ + E_n̄₂σz₂ + E_c(n̄₁ − n₁)(n̄₂ − n₂)` in
/// the order 00, 01, 10, 11.
pub fn conditional_energies(device: &DeviceModel) -> Result<[f64; 4]> {
    if device.n_qubits() != 2 {
        return Err(Error::InvalidParameter(format!(
            "conditional phase needs exactly 2 qubits, got {}",
            device.n_qubits()
        )));
    }
    let ec = device
        .capacitive_ec
        .ok_or_else(|| Error::InvalidParameter("capacitive_ec is not set".into()))?;
    for (k, q) in device.qubits.iter().enumerate() {
        if !q.is_symmetric() {
            return Err(Error::InvalidParameter(format!("qubit {k} is not a symmetric SQUID")));
        }
        let offset = (q.flux_ratio - 0.5).rem_euclid(1.0);
        if offset.min(1.0 - offset) > HALF_FLUX_TOL {
            return Err(Error::InvalidParameter(format!(
                "qubit {k} must sit at half-integer flux, got {}",
                q.flux_ratio
            )));
        }
    }
    let (q1, q2) = (&device.qubits[0], &device.qubits[1]);
    let (e1, e2) = (charging_bias(q1), charging_bias(q2));
    let mut out = [0.0; 4];
    for n1 in 0..2 {
        for n2 in 0..2 {
            let s1 = if n1 == 0 { 1.0 } else { -1.0 };
            let s2 = if n2 == 0 { 1.0 } else { -1.0 };
            out[2 * n1 + n2] = e1 * s1 + e2 * s2 + ec * (q1.n_bar - n1 as f64) * (q2.n_bar - n2 as f64);
        }
    }
    Ok(out)
}

/// `diag(e^{iγ₀₀}, e^{iγ₀₁}, e^{iγ₁₀}, e^{iγ₁₁})` with `γ = −ω t`.
pub fn conditional_phase(t: f64, device: &DeviceModel) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time {t}")));
    }
    let w = conditional_energies(device)?;
    let d: Vec<C64> = w.iter().map(|&w| C64::from_polar(1.0, -w * t)).collect();
    Ok(Operator::from_diagonal(&d, "CPHASE"))
}

/// `γ₀₀ + γ₁₁ − γ₀₁ − γ₁₀` wrapped to `(−π, π]`.
pub fn phase_nontriviality(u: &Operator) -> Result<f64> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.dim(),
        });
    }
    let z = u.get(0, 0) * u.get(3, 3) * (u.get(1, 1) * u.get(2, 2)).conj();
    Ok(wrap_angle(z.arg()))
}

/// Wraps to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}
