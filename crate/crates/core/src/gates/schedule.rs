//! Piecewise-constant control schedules and their simulation.
//!
//! Rotating frames are segment-local: each segment is propagated in the
//! interaction picture of its own `H0`, starting from segment time zero.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sideband::emission_angle;
use crate::device::{charging_bias, ej_effective, n_bar_for_bias, DeviceModel};
use crate::error::{Error, Result};
use crate::hamiltonian::{ActiveTerms, ApproximationLevel, Frame, HamiltonianSpec, Sideband};
use crate::linalg::expm::expm;
use crate::linalg::tdse::{integrate_tdse, TimeDependentHamiltonian};
use crate::linalg::{Operator, StateVector, C64};

/// Gate charge and flux of one qubit during a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitControl {
    pub n_bar: f64,
    pub flux_ratio: f64,
}

impl QubitControl {
    /// Degeneracy point and half flux: no charging term, no Josephson coupling
    /// for a symmetric SQUID.
    pub const IDLE: QubitControl = QubitControl {
        n_bar: 0.5,
        flux_ratio: 0.5,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSegment {
    pub duration: f64,
    /// Qubits not listed are held at [`QubitControl::IDLE`].
    #[serde(default)]
    pub settings: BTreeMap<usize, QubitControl>,
    pub frame: Frame,
    pub level: ApproximationLevel,
    /// Defaults to `H0 + H1 (+ H2)` for all-symmetric devices, `H0 + H_int` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<ActiveTerms>,
}

impl PulseSegment {
    pub fn new(duration: f64, frame: Frame, level: ApproximationLevel) -> Self {
        PulseSegment {
            duration,
            settings: BTreeMap::new(),
            frame,
            level,
            terms: None,
        }
    }

    pub fn with_control(mut self, k: usize, n_bar: f64, flux_ratio: f64) -> Self {
        self.settings.insert(k, QubitControl { n_bar, flux_ratio });
        self
    }

    pub fn with_terms(mut self, terms: ActiveTerms) -> Self {
        self.terms = Some(terms);
        self
    }

    /// The device with this segment's controls applied.
    pub fn device(&self, device: &DeviceModel) -> Result<DeviceModel> {
        let mut d = device.clone();
        for (k, q) in d.qubits.iter_mut().enumerate() {
            let c = self.settings.get(&k).copied().unwrap_or(QubitControl::IDLE);
            *q = q.with_controls(c.n_bar, c.flux_ratio);
        }
        d.validate()?;
        Ok(d)
    }

    pub fn spec(&self, device: &DeviceModel) -> Result<HamiltonianSpec> {
        let d = self.device(device)?;
        let terms = self.terms.unwrap_or_else(|| default_terms(&d));
        HamiltonianSpec::new(d, self.level, self.frame, terms)
    }

    fn validate(&self, device: &DeviceModel) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if let Some((&k, _)) = self.settings.iter().find(|(&k, _)| k >= device.n_qubits()) {
            return Err(Error::InvalidParameter(format!(
                "setting for qubit {k} but device has {} qubits",
                device.n_qubits()
            )));
        }
        self.spec(device).map(|_| ())
    }
}

pub fn default_terms(device: &DeviceModel) -> ActiveTerms {
    if device.all_symmetric() {
        let t = ActiveTerms::SYMMETRIC;
        if device.capacitive_ec.is_some() && device.n_qubits() >= 2 {
            t.with_capacitive()
        } else {
            t
        }
    } else {
        ActiveTerms::ASYMMETRIC
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Basis {
        qubits: Vec<u8>,
        photons: usize,
    },
    /// `[re, im]` pairs in product-basis order.
    Amplitudes(Vec<[f64; 2]>),
}

impl InitialState {
    pub fn resolve(&self, device: &DeviceModel) -> Result<StateVector> {
        let space = device.space()?;
        match self {
            InitialState::Basis { qubits, photons } => {
                if qubits.len() != space.n_qubits || qubits.iter().any(|&b| b > 1) || *photons >= space.n_ph {
                    return Err(Error::InvalidParameter(format!(
                        "basis label {qubits:?}, n = {photons} does not fit {} qubits, n_ph = {}",
                        space.n_qubits, space.n_ph
                    )));
                }
                StateVector::basis(space.dim(), space.index(qubits, *photons))
            }
            InitialState::Amplitudes(a) => {
                if a.len() != space.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: space.dim(),
                        actual: a.len(),
                    });
                }
                StateVector::new(a.iter().map(|[re, im]| C64::new(*re, *im)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Exact exponential of each piecewise-constant segment.
    #[default]
    Expm,
    /// Adaptive Runge-Kutta on the Schrödinger equation.
    Tdse { tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub segments: Vec<PulseSegment>,
    /// Without an initial state the full propagator is returned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub method: Method,
}

impl Schedule {
    pub fn new(segments: Vec<PulseSegment>) -> Self {
        Schedule {
            segments,
            initial_state: None,
            method: Method::Expm,
        }
    }

    pub fn with_initial_state(mut self, s: InitialState) -> Self {
        self.initial_state = Some(s);
        self
    }

    pub fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn validate(&self, device: &DeviceModel) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("schedule has no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            s.validate(device).map_err(|e| Error::Segment {
                segment: i,
                source: Box::new(e),
            })?;
        }
        if let Method::Tdse { tol } = self.method {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tdse tolerance must be positive, got {tol}"
                )));
            }
        }
        if let Some(s) = &self.initial_state {
            s.resolve(device)?;
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonance {
    Carrier,
    Blue,
    Red,
}

impl Resonance {
    pub fn bias(self, nu: f64) -> f64 {
        match self {
            Resonance::Carrier => 0.0,
            Resonance::Blue => Sideband::Blue.resonant_bias(nu),
            Resonance::Red => Sideband::Red.resonant_bias(nu),
        }
    }
}

/// Signed distance `E_n̄ − E_res` of a qubit's bias to its nearest resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResidual {
    pub qubit: usize,
    pub nearest: Resonance,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentDiagnostics {
    pub index: usize,
    pub duration: f64,
    pub resonances: Vec<ResonanceResidual>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `|‖ψ‖² − 1|` for states, `max|U†U − I|` for propagators.
    pub norm_drift: f64,
    pub segments: Vec<SegmentDiagnostics>,
}

#[derive(Clone, Debug)]
pub enum ScheduleOutput {
    State(StateVector),
    Propagator(Operator),
}

impl ScheduleOutput {
    pub fn state(&self) -> Option<&StateVector> {
        match self {
            ScheduleOutput::State(s) => Some(s),
            ScheduleOutput::Propagator(_) => None,
        }
    }

    pub fn propagator(&self) -> Option<&Operator> {
        match self {
            ScheduleOutput::Propagator(u) => Some(u),
            ScheduleOutput::State(_) => None,
        }
    }
}

pub fn resonance_residuals(device: &DeviceModel) -> Vec<ResonanceResidual> {
    let nu = device.cavity.nu;
    device
        .qubits
        .iter()
        .enumerate()
        .map(|(qubit, q)| {
            let bias = charging_bias(q);
            let nearest = [Resonance::Carrier, Resonance::Blue, Resonance::Red]
                .into_iter()
                .min_by(|a, b| (bias - a.bias(nu)).abs().total_cmp(&(bias - b.bias(nu)).abs()))
                .expect("non-empty");
            ResonanceResidual {
                qubit,
                nearest,
                residual: bias - nearest.bias(nu),
            }
        })
        .collect()
}

/// Segment propagator by exponentiation.
pub fn segment_propagator(seg: &PulseSegment, device: &DeviceModel) -> Result<Operator> {
    let spec = seg.spec(device)?;
    match (seg.frame, seg.level) {
        (Frame::Lab, _) | (Frame::Rotating, ApproximationLevel::SidebandRwa) => expm(&spec.build()?, seg.duration),
        (Frame::Rotating, _) => {
            let lab = HamiltonianSpec {
                frame: Frame::Lab,
                ..spec.clone()
            };
            let u_lab = expm(&lab.build()?, seg.duration)?;
            spec.interaction_picture()?.to_rotating(&u_lab, seg.duration)
        }
    }
}

fn segment_tdse(seg: &PulseSegment, device: &DeviceModel, psi: &StateVector, tol: f64) -> Result<StateVector> {
    let spec = seg.spec(device)?;
    let h: Box<dyn TimeDependentHamiltonian> = match (seg.frame, seg.level) {
        (Frame::Lab, _) | (Frame::Rotating, ApproximationLevel::SidebandRwa) => Box::new(spec.build()?),
        (Frame::Rotating, _) => Box::new(spec.interaction_picture()?),
    };
    integrate_tdse(h.as_ref(), psi, 0.0, seg.duration, tol)
}

fn unitarity_drift(u: &Operator) -> f64 {
    u.unitarity_error()
}

/// Evolves through every segment in order.
pub fn run_schedule(s: &Schedule, device: &DeviceModel) -> Result<(ScheduleOutput, Diagnostics)> {
    s.validate(device)?;
    let dim = device.space()?.dim();
    let initial = s.initial_state.as_ref().map(|i| i.resolve(device)).transpose()?;
    let mut segments = Vec::with_capacity(s.segments.len());
    let mut state = initial.clone();
    let mut prop = Operator::identity(dim);
    for (index, seg) in s.segments.iter().enumerate() {
        let wrap = |e: Error| Error::Segment {
            segment: index,
            source: Box::new(e),
        };
        segments.push(SegmentDiagnostics {
            index,
            duration: seg.duration,
            resonances: resonance_residuals(&seg.device(device).map_err(wrap)?),
        });
        match (&mut state, s.method) {
            (Some(psi), Method::Expm) => {
                let u = segment_propagator(seg, device).map_err(wrap)?;
                *psi = u.apply(psi).map_err(wrap)?;
            }
            (Some(psi), Method::Tdse { tol }) => {
                *psi = segment_tdse(seg, device, psi, tol).map_err(wrap)?;
            }
            (None, Method::Expm) => {
                let u = segment_propagator(seg, device).map_err(wrap)?;
                prop = u.try_mul(&prop)?;
            }
            (None, Method::Tdse { tol }) => {
                let mut cols = Vec::with_capacity(dim * dim);
                for c in 0..dim {
                    let col = StateVector::from_dvector(prop.matrix().column(c).into_owned());
                    let out = segment_tdse(seg, device, &col, tol).map_err(wrap)?;
                    cols.extend_from_slice(out.as_slice());
                }
                prop = Operator::new(nalgebra::DMatrix::from_column_slice(dim, dim, &cols), "U")?;
            }
        }
    }
    let (output, norm_drift) = match state {
        Some(psi) => {
            let drift = (psi.norm_sqr() - 1.0).abs();
            (ScheduleOutput::State(psi), drift)
        }
        None => {
            let drift = unitarity_drift(&prop);
            (ScheduleOutput::Propagator(prop.with_label("U_schedule")), drift)
        }
    };
    Ok((output, Diagnostics { norm_drift, segments }))
}

/// Segment that drives qubit `k` through `U_kp[(2n − 1/2)π]` on the blue sideband.
pub fn swap_pulse(
    device: &DeviceModel,
    k: usize,
    n_winding: i64,
    frame: Frame,
    level: ApproximationLevel,
) -> Result<PulseSegment> {
    let q = device.qubit(k)?;
    let gamma = super::sideband::require_coupled(k, device)?;
    let n_bar = n_bar_for_bias(q.e_ch, Sideband::Blue.resonant_bias(device.cavity.nu));
    Ok(PulseSegment::new(emission_angle(n_winding) / gamma, frame, level).with_control(k, n_bar, q.flux_ratio))
}

/// Segment realising `R_k^±(θ, β_k)` with `θ = E_J g t ≥ 0`.
pub fn sideband_pulse(
    device: &DeviceModel,
    k: usize,
    branch: Sideband,
    theta: f64,
    frame: Frame,
    level: ApproximationLevel,
) -> Result<PulseSegment> {
    let q = device.qubit(k)?;
    let rate = ej_effective(q) * device.cavity.g;
    if rate == 0.0 {
        return Err(Error::Decoupled { qubit: k });
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pulse area must be positive, got {theta}"
        )));
    }
    let n_bar = n_bar_for_bias(q.e_ch, branch.resonant_bias(device.cavity.nu));
    Ok(PulseSegment::new(theta / rate, frame, level).with_control(k, n_bar, q.flux_ratio))
}
