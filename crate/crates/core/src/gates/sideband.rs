//! Ideal sideband and cavity-swap unitaries on the full product space.

use std::f64::consts::PI;

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::hamiltonian::Sideband;
use crate::linalg::expm::expm;
use crate::linalg::ops::{annihilation, creation, sigma_plus, ProductSpace};
use crate::linalg::{Operator, C64, I};

/// `i e^{−iβ} σ⁺_k ⊗ P + h.c.`, `P = a` (blue) or `a†` (red).
pub fn sideband_generator(space: &ProductSpace, k: usize, beta: f64, branch: Sideband) -> Result<Operator> {
    let photon = match branch {
        Sideband::Blue => annihilation(space.n_ph)?,
        Sideband::Red => creation(space.n_ph)?,
    };
    let sp = sigma_plus().scale(I * C64::from_polar(1.0, -beta));
    Ok(space.qubit_photon(k, &sp, &photon)?.plus_hc())
}

/// `R_k^±(θ, β) = exp[−i(θ/2)(i e^{−iβ} σ⁺_k a + h.c.)]`, with `a → a†` for red.
pub fn r_sideband(theta: f64, beta: f64, branch: Sideband, k: usize, device: &DeviceModel) -> Result<Operator> {
    if !theta.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite angle (θ = {theta}, β = {beta})"
        )));
    }
    let g = sideband_generator(&device.space()?, k, beta, branch)?;
    let label = match branch {
        Sideband::Blue => "R+",
        Sideband::Red => "R-",
    };
    Ok(expm(&g, theta / 2.0)?.with_label(format!("{label}_{k}")))
}

/// `U_kp(φ) = exp[−iφ(iσ⁺_k a + h.c.)]` at rotation angle `φ = Γ_k t`.
pub fn u_kp(k: usize, angle: f64, device: &DeviceModel) -> Result<Operator> {
    let g = sideband_generator(&device.space()?, k, 0.0, Sideband::Blue)?;
    Ok(expm(&g, angle)?.with_label(format!("U_{k}p")))
}

/// `Γ_k = g E_J⁰(φ_k)/2`, signed.
pub fn swap_rate(k: usize, device: &DeviceModel) -> Result<f64> {
    Ok(device.cavity.g * device.qubit(k)?.ej_symmetric()? / 2.0)
}

/// Angle `(2n − 1/2)π` that maps a qubit excitation onto the cavity.
pub fn emission_angle(n_winding: i64) -> f64 {
    (2.0 * n_winding as f64 - 0.5) * PI
}

/// Angle `(2n + 1/2)π` that maps a cavity photon back onto a qubit in |0⟩.
pub fn absorption_angle(n_winding: i64) -> f64 {
    (2.0 * n_winding as f64 + 0.5) * PI
}

pub(crate) fn require_coupled(k: usize, device: &DeviceModel) -> Result<f64> {
    let gamma = swap_rate(k, device)?;
    if gamma == 0.0 {
        return Err(Error::Decoupled { qubit: k });
    }
    if gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "qubit {k} has negative coupling rate {gamma}; choose flux below one half"
        )));
    }
    Ok(gamma)
}

/// `U'_kp = U_kp[(2n − 1/2)π]`: `(α|0⟩ + β|1⟩)|0⟩_ph → |0⟩(α|0⟩ + β|1⟩)_ph`.
pub fn swap_qubit_photon(k: usize, n_winding: i64, device: &DeviceModel) -> Result<Operator> {
    require_coupled(k, device)?;
    Ok(u_kp(k, emission_angle(n_winding), device)?.with_label(format!("U'_{k}p")))
}

/// Moves the state of qubit `k` onto qubit `j` (initially |0⟩) through the
/// cavity: `U_jp(π/2) · U'_kp`.
///
/// The second step uses `(2n + 1/2)π` rather than `(2n − 1/2)π`; the latter
/// (see [`swap_qubit_qubit_literal`]) leaves a relative sign `α|0⟩ − β|1⟩`.
pub fn swap_qubit_qubit(j: usize, k: usize, device: &DeviceModel) -> Result<Operator> {
    check_pair(j, k)?;
    require_coupled(j, device)?;
    let emit = swap_qubit_photon(k, 1, device)?;
    let absorb = u_kp(j, absorption_angle(0), device)?;
    Ok(absorb.try_mul(&emit)?.with_label(format!("SWAP_{k}->{j}")))
}

/// `U'_jp U'_kp` with both steps at `(2n − 1/2)π`, n = 1.
pub fn swap_qubit_qubit_literal(j: usize, k: usize, device: &DeviceModel) -> Result<Operator> {
    check_pair(j, k)?;
    let emit = swap_qubit_photon(k, 1, device)?;
    let absorb = swap_qubit_photon(j, 1, device)?;
    Ok(absorb.try_mul(&emit)?.with_label(format!("U'_{j}p U'_{k}p")))
}

pub(crate) fn check_pair(j: usize, k: usize) -> Result<()> {
    if j == k {
        return Err(Error::InvalidParameter(format!("qubits must differ (both {j})")));
    }
    Ok(())
}
