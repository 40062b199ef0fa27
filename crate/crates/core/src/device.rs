//! Physical parameters of SQUID charge qubits and the cavity mode, and the
//! control quantities derived from them.
//!
//! Flux is always stored as the dimensionless ratio φ/φ₀.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ops::ProductSpace;

/// A qubit is in the charging regime when `e_ch ≥ CHARGING_RATIO · max(e_j1, e_j2)`.
pub const CHARGING_RATIO: f64 = 10.0;

/// Default Lamb-Dicke warning threshold on `g·√n_ph`.
pub const LAMB_DICKE_THRESHOLD: f64 = 0.3;

/// One SQUID charge qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    /// Charging energy.
    pub e_ch: f64,
    pub e_j1: f64,
    pub e_j2: f64,
    /// Induced gate charge.
    pub n_bar: f64,
    /// Threading flux in units of the flux quantum.
    pub flux_ratio: f64,
}

impl QubitParams {
    pub fn new(e_ch: f64, e_j1: f64, e_j2: f64, n_bar: f64, flux_ratio: f64) -> Result<Self> {
        let q = QubitParams {
            e_ch,
            e_j1,
            e_j2,
            n_bar,
            flux_ratio,
        };
        q.validate()?;
        Ok(q)
    }

    /// Symmetric SQUID with both junctions at `e_j0`.
    pub fn symmetric(e_ch: f64, e_j0: f64, n_bar: f64, flux_ratio: f64) -> Result<Self> {
        Self::new(e_ch, e_j0, e_j0, n_bar, flux_ratio)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.e_ch, self.e_j1, self.e_j2, self.n_bar, self.flux_ratio]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("qubit parameters must be finite".into()));
        }
        if !(self.e_ch > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "e_ch must be positive, got {}",
                self.e_ch
            )));
        }
        if self.e_j1 < 0.0 || self.e_j2 < 0.0 {
            return Err(Error::InvalidParameter(
                "Josephson energies must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn in_charging_regime(&self) -> bool {
        self.e_ch >= CHARGING_RATIO * self.e_j1.max(self.e_j2)
    }

    pub fn is_symmetric(&self) -> bool {
        self.e_j1 == self.e_j2
    }

    /// Same junctions, new gate charge and flux.
    pub fn with_controls(&self, n_bar: f64, flux_ratio: f64) -> Self {
        QubitParams {
            n_bar,
            flux_ratio,
            ..*self
        }
    }

    pub fn ej_effective(&self) -> f64 {
        ej_effective(self)
    }

    pub fn beta_mixing(&self) -> Result<f64> {
        beta_mixing(self)
    }

    pub fn charging_bias(&self) -> f64 {
        charging_bias(self)
    }

    /// Signed symmetric-SQUID coupling `E_J⁰ = 2 E_J0 cos(π φ/φ₀)`.
    pub fn ej_symmetric(&self) -> Result<f64> {
        if !self.is_symmetric() {
            return Err(Error::InvalidParameter(format!(
                "symmetric SQUID required (e_j1 = {}, e_j2 = {})",
                self.e_j1, self.e_j2
            )));
        }
        Ok(ej_symmetric(self.e_j1, self.flux_ratio))
    }
}

/// `cos(πx)`, exactly zero at half-integer `x`.
fn cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.5 || r == 1.5 {
        0.0
    } else {
        (PI * r).cos()
    }
}

/// `sin(πx)`, exactly zero at integer `x`.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

/// `E_J(φ) = √((E_J1 − E_J2)² + 4 E_J1 E_J2 cos²(πφ/φ₀))`.
///
/// Evaluated as `|((E_J1 + E_J2) cos πφ, (E_J1 − E_J2) sin πφ)|`, which gives
/// `E_J1 + E_J2` exactly at integer flux.
pub fn ej_effective(q: &QubitParams) -> f64 {
    let x = q.flux_ratio;
    ((q.e_j1 + q.e_j2) * cos_pi(x)).hypot((q.e_j1 - q.e_j2) * sin_pi(x))
}

/// Mixing angle β with `tan β = (E_J1 − E_J2)/(E_J1 + E_J2) · tan(πφ/φ₀)`.
///
/// Evaluated as `atan2((E_J1 − E_J2) sin πφ, (E_J1 + E_J2) cos πφ)`, which is
/// continuous through φ/φ₀ = 1/2. A vanishing numerator (equal junctions, or
/// sin πφ = 0) returns exactly 0; the sign of a symmetric SQUID's coupling is
/// carried by [`ej_symmetric`] instead.
pub fn beta_mixing(q: &QubitParams) -> Result<f64> {
    let sum = q.e_j1 + q.e_j2;
    if !(sum > 0.0) {
        return Err(Error::InvalidParameter(
            "beta is undefined when both Josephson energies vanish".into(),
        ));
    }
    let (s, c) = (sin_pi(q.flux_ratio), cos_pi(q.flux_ratio));
    let num = (q.e_j1 - q.e_j2) * s;
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num.atan2(sum * c))
}

/// `E_n̄ = E_ch (n̄ − 1/2)`, zero at the degeneracy point.
pub fn charging_bias(q: &QubitParams) -> f64 {
    q.e_ch * (q.n_bar - 0.5)
}

/// Gate charge giving charging bias `bias`.
pub fn n_bar_for_bias(e_ch: f64, bias: f64) -> f64 {
    0.5 + bias / e_ch
}

/// `E_J⁰(φ) = 2 E_J0 cos(π φ/φ₀)`, signed.
pub fn ej_symmetric(e_j0: f64, flux_ratio: f64) -> f64 {
    2.0 * e_j0 * cos_pi(flux_ratio)
}

/// Flux ratio in `[0, 1]` at which a symmetric SQUID reaches `target`.
pub fn solve_flux_for_ej(target: f64, e_j0: f64) -> Result<f64> {
    if !(e_j0 > 0.0) || !target.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need e_j0 > 0 and finite target (e_j0 = {e_j0}, target = {target})"
        )));
    }
    let x = target / (2.0 * e_j0);
    if x.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "target {target} outside [-{m}, {m}]",
            m = 2.0 * e_j0
        )));
    }
    Ok(x.clamp(-1.0, 1.0).acos() / PI)
}

/// The single cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Mode frequency.
    pub nu: f64,
    /// Dimensionless qubit–cavity coupling.
    pub g: f64,
    /// Fock-space truncation.
    pub n_ph: usize,
    /// Loss rate, consumed only by the transfer protocol.
    #[serde(default)]
    pub kappa: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.g >= 0.0 && self.g < 1.0) {
            return Err(Error::InvalidParameter(format!("g must lie in [0, 1), got {}", self.g)));
        }
        if self.n_ph < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_ph must be at least 2, got {}",
                self.n_ph
            )));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be non-negative, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn lamb_dicke_parameter(&self) -> f64 {
        self.g * (self.n_ph as f64).sqrt()
    }

    pub fn in_lamb_dicke_regime(&self, threshold: f64) -> bool {
        self.lamb_dicke_parameter() < threshold
    }
}

/// Non-fatal approximation warnings.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    ChargingRegime { qubit: usize, e_ch: f64, e_j_max: f64 },
    LambDicke { value: f64, threshold: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ChargingRegime { qubit, e_ch, e_j_max } => write!(
                f,
                "qubit {qubit} outside charging regime: e_ch = {e_ch} < {CHARGING_RATIO}·{e_j_max}"
            ),
            Warning::LambDicke { value, threshold } => {
                write!(f, "g·√n_ph = {value} exceeds Lamb-Dicke threshold {threshold}")
            }
        }
    }
}

/// Qubits sharing one cavity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceModel {
    pub qubits: Vec<QubitParams>,
    pub cavity: CavityParams,
    /// Nearest-neighbour capacitive coupling energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitive_ec: Option<f64>,
}

impl DeviceModel {
    pub fn new(qubits: Vec<QubitParams>, cavity: CavityParams, capacitive_ec: Option<f64>) -> Result<Self> {
        let d = DeviceModel {
            qubits,
            cavity,
            capacitive_ec,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::InvalidParameter("device needs at least one qubit".into()));
        }
        for q in &self.qubits {
            q.validate()?;
        }
        self.cavity.validate()?;
        if let Some(ec) = self.capacitive_ec {
            if !(ec >= 0.0 && ec.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "capacitive_ec must be non-negative, got {ec}"
                )));
            }
        }
        ProductSpace::new(self.qubits.len(), self.cavity.n_ph)?;
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: DeviceModel = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device serializes")
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn space(&self) -> Result<ProductSpace> {
        ProductSpace::new(self.qubits.len(), self.cavity.n_ph)
    }

    pub fn qubit(&self, k: usize) -> Result<&QubitParams> {
        self.qubits.get(k).ok_or_else(|| {
            Error::InvalidParameter(format!("qubit index {k} out of range for {} qubits", self.qubits.len()))
        })
    }

    pub fn all_symmetric(&self) -> bool {
        self.qubits.iter().all(QubitParams::is_symmetric)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        self.warnings_with(LAMB_DICKE_THRESHOLD)
    }

    pub fn warnings_with(&self, lamb_dicke_threshold: f64) -> Vec<Warning> {
        let mut out: Vec<Warning> = self
            .qubits
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.in_charging_regime())
            .map(|(qubit, q)| Warning::ChargingRegime {
                qubit,
                e_ch: q.e_ch,
                e_j_max: q.e_j1.max(q.e_j2),
            })
            .collect();
        if !self.cavity.in_lamb_dicke_regime(lamb_dicke_threshold) {
            out.push(Warning::LambDicke {
                value: self.cavity.lamb_dicke_parameter(),
                threshold: lamb_dicke_threshold,
            });
        }
        out
    }

    /// Copy with the controls of qubit `k` replaced.
    pub fn with_qubit_controls(&self, k: usize, n_bar: f64, flux_ratio: f64) -> Result<Self> {
        let mut d = self.clone();
        let q = d.qubit(k)?.with_controls(n_bar, flux_ratio);
        d.qubits[k] = q;
        Ok(d)
    }
}
