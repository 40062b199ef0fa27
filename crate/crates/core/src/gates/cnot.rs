//! CNOT built from red-sideband pulses on the control and a composite
//! blue-sideband pulse on the target.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::report::{cnot_matrix, GateReport};
use super::sideband::{check_pair, r_sideband};
use super::single::phase_gate;
use crate::device::{beta_mixing, DeviceModel};
use crate::error::{Error, Result};
use crate::hamiltonian::Sideband;
use crate::linalg::ops::{hadamard, ProductSpace};
use crate::linalg::Operator;

/// Phase-gate angle printed with the composition.
pub const LITERAL_Z_ANGLE: f64 = -PI / (2.0 * SQRT_2);

/// Phase-gate angle for which the vacuum block equals CNOT up to a global phase.
pub const VERIFIED_Z_ANGLE: f64 = PI * (1.0 - 1.0 / SQRT_2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnotVariant {
    Literal,
    Verified,
}

impl CnotVariant {
    pub fn z_angle(self) -> f64 {
        match self {
            CnotVariant::Literal => LITERAL_Z_ANGLE,
            CnotVariant::Verified => VERIFIED_Z_ANGLE,
        }
    }
}

/// `P_k = R_k^+(−π/2, 0) R_k^+(−π√2, −π/2) R_k^+(π/2, 0)`.
pub fn composite_p(k: usize, device: &DeviceModel) -> Result<Operator> {
    let a = r_sideband(-PI / 2.0, 0.0, Sideband::Blue, k, device)?;
    let b = r_sideband(-PI * SQRT_2, -PI / 2.0, Sideband::Blue, k, device)?;
    let c = r_sideband(PI / 2.0, 0.0, Sideband::Blue, k, device)?;
    Ok(a.try_mul(&b)?.try_mul(&c)?.with_label(format!("P_{k}")))
}

/// Photon-vacuum states with qubits `j`, `k` free and all others in |0⟩,
/// ordered `|0_j 0_k⟩, |0_j 1_k⟩, |1_j 0_k⟩, |1_j 1_k⟩`.
pub fn pair_vacuum_indices(space: &ProductSpace, j: usize, k: usize) -> Result<Vec<usize>> {
    space.check_qubit(j)?;
    space.check_qubit(k)?;
    let mut out = Vec::with_capacity(4);
    for bj in 0..2u8 {
        for bk in 0..2u8 {
            let mut bits = vec![0u8; space.n_qubits];
            bits[j] = bj;
            bits[k] = bk;
            out.push(space.index(&bits, 0));
        }
    }
    Ok(out)
}

/// `Z_j(ζ) R_j^−(π, β) H_k P_k Z_k(ζ) H_k R_j^−(π, β)` with `β` taken from the device.
pub fn cnot_composition(
    j: usize,
    k: usize,
    device: &DeviceModel,
    variant: CnotVariant,
) -> Result<(Operator, GateReport)> {
    let beta = beta_mixing(device.qubit(j)?)?;
    cnot_with_beta(j, k, device, variant, beta)
}

/// [`cnot_composition`] with an explicit control mixing angle.
pub fn cnot_with_beta(
    j: usize,
    k: usize,
    device: &DeviceModel,
    variant: CnotVariant,
    beta: f64,
) -> Result<(Operator, GateReport)> {
    check_pair(j, k)?;
    if device.cavity.n_ph < 3 {
        return Err(Error::InvalidParameter(format!(
            "the composite target pulse reaches two photons; n_ph = {} < 3",
            device.cavity.n_ph
        )));
    }
    let space = device.space()?;
    let zeta = variant.z_angle();
    let z_j = space.qubit_op(j, &phase_gate(zeta))?;
    let z_k = space.qubit_op(k, &phase_gate(zeta))?;
    let h_k = space.qubit_op(k, &hadamard())?;
    let r_j = r_sideband(PI, beta, Sideband::Red, j, device)?;
    let p_k = composite_p(k, device)?;
    let mut u = z_j;
    for op in [&r_j, &h_k, &p_k, &z_k, &h_k, &r_j] {
        u = u.try_mul(op)?;
    }
    let label = match variant {
        CnotVariant::Literal => "CNOT[literal]",
        CnotVariant::Verified => "CNOT[verified]",
    };
    let u = u.with_label(label);
    let keep = pair_vacuum_indices(&space, j, k)?;
    let (_, report) = GateReport::audit(&u, &keep, "CNOT", &cnot_matrix())?;
    Ok((u, report))
}

/// Reports for each control mixing angle in `betas`.
pub fn cnot_beta_sweep(
    j: usize,
    k: usize,
    device: &DeviceModel,
    variant: CnotVariant,
    betas: &[f64],
) -> Result<Vec<(f64, GateReport)>> {
    betas
        .iter()
        .map(|&b| Ok((b, cnot_with_beta(j, k, device, variant, b)?.1)))
        .collect()
}
