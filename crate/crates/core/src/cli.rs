//! Batch front end behind the `sim` binary.
//!
//! A scenario file names a command kind, an optional device file, an output
//! path and kind-specific parameters. Every command writes its primary output
//! plus a `<output>.meta.json` sibling holding the resolved configuration.
//! Exit codes: 0 when all checks pass, 1 on a numerical or threshold failure,
//! 2 on invalid input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::gates::cnot::{cnot_composition, CnotVariant};
use crate::gates::mapping::{simulated_swap, worst_mapping_fidelity, Mapping};
use crate::gates::phase::conditional_phase;
use crate::gates::report::{cz_matrix, GateReport};
use crate::gates::schedule::{default_terms, run_schedule, InitialState, Schedule, ScheduleOutput};
use crate::gates::sideband::{swap_qubit_photon, swap_qubit_qubit};
use crate::hamiltonian::{build_rotating_ha_hb, ActiveTerms, ApproximationLevel, Frame, HamiltonianSpec, RotatingTerm};
use crate::linalg::expm::eigenvalues;
use crate::linalg::Operator;
use crate::sampling::BLOCH_GRID_SEED;
use crate::transfer::TransferConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GateAudit,
    Schedule,
    Transfer,
    Sweep,
    Spectrum,
}

impl ScenarioKind {
    pub fn command(self) -> &'static str {
        match self {
            ScenarioKind::GateAudit => "gate-audit",
            ScenarioKind::Schedule => "schedule",
            ScenarioKind::Transfer => "transfer",
            ScenarioKind::Sweep => "sweep",
            ScenarioKind::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Relative paths resolve against the scenario file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_path: Option<PathBuf>,
    pub output_path: PathBuf,
    #[serde(default)]
    pub params: Value,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

/// Result of a command that ran to completion.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    /// Files written, primary output first.
    pub outputs: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Exit code for an error: 2 for invalid input, 1 otherwise.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_FAIL
    }
}

fn params_of<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Config(format!("params: {e}")))
}

fn check_tol(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")))
    }
}

// ---------------------------------------------------------------- gate audit

fn default_variant() -> CnotVariant {
    CnotVariant::Verified
}

fn default_winding() -> i64 {
    1
}

fn default_points() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSpec {
    /// Ideal-generator CNOT composition, audited on the photon vacuum.
    Cnot {
        control: usize,
        target: usize,
        #[serde(default = "default_variant")]
        variant: CnotVariant,
    },
    /// Capacitive conditional phase, audited against CZ.
    ConditionalPhase { duration: f64 },
    /// Identity on the photon-vacuum block.
    Identity {},
    /// Qubit-to-photon swap; `simulate` runs the pulse at that level instead
    /// of the ideal generator.
    SwapQubitPhoton {
        qubit: usize,
        #[serde(default = "default_winding")]
        winding: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        simulate: Option<ApproximationLevel>,
        #[serde(default = "default_points")]
        points: usize,
    },
    SwapQubitQubit {
        from: usize,
        to: usize,
        #[serde(default = "default_points")]
        points: usize,
    },
}

fn default_makhlin_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_leakage: Option<f64>,
    /// Expected `[Re G1, Im G1, G2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub makhlin: Option<[f64; 3]>,
    #[serde(default = "default_makhlin_tol")]
    pub makhlin_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_fidelity: None,
            max_leakage: None,
            makhlin: None,
            makhlin_tol: default_makhlin_tol(),
        }
    }
}

impl Thresholds {
    fn validate(&self) -> Result<()> {
        if let Some(f) = self.min_fidelity {
            check_unit("min_fidelity", f)?;
        }
        if let Some(l) = self.max_leakage {
            if !(l >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "max_leakage must be non-negative, got {l}"
                )));
            }
        }
        check_tol("makhlin_tol", self.makhlin_tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateAuditParams {
    pub gate: GateSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Scalar results of one gate evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateMetrics {
    pub gate: String,
    pub fidelity: f64,
    pub infidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<GateReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateAuditOutput {
    #[serde(flatten)]
    pub metrics: GateMetrics,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn from_report(name: &str, mut r: GateReport) -> GateMetrics {
    // Adding +0 turns a negative zero from `1 − norm` into +0.
    r.leakage += 0.0;
    GateMetrics {
        gate: name.to_string(),
        fidelity: r.fidelity,
        infidelity: 1.0 - r.fidelity,
        leakage: Some(r.leakage),
        report: Some(r),
    }
}

fn from_mapping(name: &str, fidelity: f64) -> GateMetrics {
    GateMetrics {
        gate: name.to_string(),
        fidelity,
        infidelity: 1.0 - fidelity,
        leakage: None,
        report: None,
    }
}

/// Evaluates one gate on `device`.
pub fn evaluate_gate(gate: &GateSpec, device: &DeviceModel) -> Result<GateMetrics> {
    let space = device.space()?;
    match gate {
        GateSpec::Cnot {
            control,
            target,
            variant,
        } => {
            let (_, r) = cnot_composition(*control, *target, device, *variant)?;
            Ok(from_report("cnot", r))
        }
        GateSpec::ConditionalPhase { duration } => {
            let u = conditional_phase(*duration, device)?;
            let keep: Vec<usize> = (0..4).collect();
            let (_, r) = GateReport::audit(&u, &keep, "CZ", &cz_matrix())?;
            Ok(from_report("conditional_phase", r))
        }
        GateSpec::Identity {} => {
            let keep = space.vacuum_indices();
            let u = Operator::identity(space.dim());
            let (_, r) = GateReport::audit(&u, &keep, "I", &Operator::identity(keep.len()))?;
            Ok(from_report("identity", r))
        }
        GateSpec::SwapQubitPhoton {
            qubit,
            winding,
            simulate,
            points,
        } => {
            let u = match simulate {
                None => swap_qubit_photon(*qubit, *winding, device)?,
                Some(level) => simulated_swap(device, *qubit, *winding, *level)?,
            };
            let f = worst_mapping_fidelity(
                &u,
                &space,
                Mapping::QubitToPhoton { qubit: *qubit },
                *points,
                BLOCH_GRID_SEED,
            )?;
            Ok(from_mapping("swap_qubit_photon", f))
        }
        GateSpec::SwapQubitQubit { from, to, points } => {
            let u = swap_qubit_qubit(*to, *from, device)?;
            let f = worst_mapping_fidelity(
                &u,
                &space,
                Mapping::QubitToQubit { from: *from, to: *to },
                *points,
                BLOCH_GRID_SEED,
            )?;
            Ok(from_mapping("swap_qubit_qubit", f))
        }
    }
}

fn apply_thresholds(m: &GateMetrics, t: &Thresholds) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if let Some(limit) = t.min_fidelity {
        checks.push(Check {
            name: "min_fidelity".into(),
            value: m.fidelity,
            limit,
            passed: m.fidelity >= limit,
        });
    }
    if let Some(limit) = t.max_leakage {
        let value = m
            .leakage
            .ok_or_else(|| Error::InvalidParameter(format!("gate {} reports no leakage", m.gate)))?;
        checks.push(Check {
            name: "max_leakage".into(),
            value,
            limit,
            passed: value <= limit,
        });
    }
    if let Some([re, im, g2]) = t.makhlin {
        let r = m
            .report
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter(format!("gate {} has no two-qubit invariants", m.gate)))?;
        let value = r.invariant_distance(crate::linalg::C64::new(re, im), g2);
        checks.push(Check {
            name: "makhlin_distance".into(),
            value,
            limit: t.makhlin_tol,
            passed: value <= t.makhlin_tol,
        });
    }
    Ok(checks)
}

// ------------------------------------------------------------------ schedule

fn default_drift() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    /// Inline schedule; exclusive with `schedule_path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_path: Option<PathBuf>,
    #[serde(default = "default_drift")]
    pub max_norm_drift: f64,
    /// Expected final state, compared when the schedule has an initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<InitialState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
}

// ------------------------------------------------------------------ spectrum

fn default_frame() -> Frame {
    Frame::Lab
}

fn default_spectrum_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumOperator {
    /// Any Hamiltonian the builder accepts; terms default to the device's.
    Spec {
        level: ApproximationLevel,
        #[serde(default = "default_frame")]
        frame: Frame,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<ActiveTerms>,
    },
    /// Rotating-frame `H_a` or `H_b` of one qubit.
    Rotating { qubit: usize, which: RotatingTerm },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub operator: SpectrumOperator,
    /// Sorted eigenvalues to compare against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<f64>>,
    #[serde(default = "default_spectrum_tol")]
    pub tol: f64,
}

pub fn spectrum(op: &SpectrumOperator, device: &DeviceModel) -> Result<Vec<f64>> {
    let h = match op {
        SpectrumOperator::Spec { level, frame, terms } => {
            let terms = terms.unwrap_or_else(|| default_terms(device));
            HamiltonianSpec::new(device.clone(), *level, *frame, terms)?.build()?
        }
        SpectrumOperator::Rotating { qubit, which } => build_rotating_ha_hb(device, *qubit, *which)?,
    };
    let mut e = eigenvalues(&h)?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

// --------------------------------------------------------------------- sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    G,
    Kappa,
    EC,
    Duration,
    NPh,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::G => "g",
            SweepAxis::Kappa => "kappa",
            SweepAxis::EC => "e_c",
            SweepAxis::Duration => "duration",
            SweepAxis::NPh => "n_ph",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepBase {
    GateAudit { gate: GateSpec },
    Transfer { config: TransferConfig },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCheck {
    pub column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<Monotone>,
    /// Largest allowed change between successive rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    /// Only rows with axis value ≥ `from` enter `max_step`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: SweepBase,
    #[serde(default)]
    pub checks: Vec<SweepCheck>,
}

const GATE_COLUMNS: [&str; 6] = [
    "fidelity",
    "infidelity",
    "leakage",
    "makhlin_g1_re",
    "makhlin_g1_im",
    "makhlin_g2",
];
const TRANSFER_COLUMNS: [&str; 4] = ["fidelity", "loss", "photon1", "photon2"];

impl SweepParams {
    pub fn columns(&self) -> &'static [&'static str] {
        match self.base {
            SweepBase::GateAudit { .. } => &GATE_COLUMNS,
            SweepBase::Transfer { .. } => &TRANSFER_COLUMNS,
        }
    }

    fn validate(&self, device: Option<&DeviceModel>) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sweep values must be finite".into()));
        }
        let bad_axis = || Error::InvalidParameter(format!("axis {} does not apply to this base", self.axis.name()));
        match &self.base {
            SweepBase::GateAudit { gate } => {
                if device.is_none() {
                    return Err(Error::Config("gate sweeps need device_path".into()));
                }
                match self.axis {
                    SweepAxis::Kappa => return Err(bad_axis()),
                    SweepAxis::Duration if !matches!(gate, GateSpec::ConditionalPhase { .. }) => return Err(bad_axis()),
                    _ => {}
                }
            }
            SweepBase::Transfer { config } => {
                config.validate()?;
                if matches!(self.axis, SweepAxis::EC | SweepAxis::NPh) {
                    return Err(bad_axis());
                }
            }
        }
        if self.axis == SweepAxis::NPh && self.values.iter().any(|v| v.fract() != 0.0 || *v < 2.0) {
            return Err(Error::InvalidParameter("n_ph values must be integers ≥ 2".into()));
        }
        for c in &self.checks {
            if !self.columns().contains(&c.column.as_str()) {
                return Err(Error::InvalidParameter(format!("unknown sweep column {}", c.column)));
            }
            if let Some(s) = c.max_step {
                if !(s >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "max_step must be non-negative, got {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Scalar outputs at one axis value, in [`Self::columns`] order.
    pub fn point(&self, v: f64, device: Option<&DeviceModel>, tol: Option<f64>) -> Result<Vec<f64>> {
        match &self.base {
            SweepBase::GateAudit { gate } => {
                let mut d = device
                    .cloned()
                    .ok_or_else(|| Error::Config("gate sweeps need device_path".into()))?;
                let mut gate = gate.clone();
                match self.axis {
                    SweepAxis::G => d.cavity.g = v,
                    SweepAxis::EC => d.capacitive_ec = Some(v),
                    SweepAxis::NPh => d.cavity.n_ph = v as usize,
                    SweepAxis::Duration => {
                        if let GateSpec::ConditionalPhase { duration } = &mut gate {
                            *duration = v;
                        }
                    }
                    SweepAxis::Kappa => unreachable!("rejected by validate"),
                }
                d.validate()?;
                let m = evaluate_gate(&gate, &d)?;
                let (g1r, g1i, g2) = m
                    .report
                    .as_ref()
                    .map(|r| (r.makhlin_g1_re, r.makhlin_g1_im, r.makhlin_g2))
                    .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                Ok(vec![
                    m.fidelity,
                    m.infidelity,
                    m.leakage.unwrap_or(f64::NAN),
                    g1r,
                    g1i,
                    g2,
                ])
            }
            SweepBase::Transfer { config } => {
                let mut c = config.clone();
                match self.axis {
                    SweepAxis::G => c.g = v,
                    SweepAxis::Kappa => c.kappa = v,
                    SweepAxis::Duration => c.window = Some([-v / 2.0, v / 2.0]),
                    SweepAxis::EC | SweepAxis::NPh => unreachable!("rejected by validate"),
                }
                if let Some(t) = tol {
                    c.tol = t;
                }
                let r = c.run()?.report;
                Ok(vec![r.fidelity, r.loss, r.photon1, r.photon2])
            }
        }
    }
}

fn run_checks(checks: &[SweepCheck], columns: &[&str], axis: &[f64], rows: &[Vec<f64>]) -> Vec<Check> {
    let mut out = Vec::new();
    for c in checks {
        let i = columns.iter().position(|n| *n == c.column).expect("validated");
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        if let Some(m) = c.monotone {
            let worst = col
                .windows(2)
                .map(|w| match m {
                    Monotone::Increasing => w[1] - w[0],
                    Monotone::Decreasing => w[0] - w[1],
                })
                .fold(f64::INFINITY, f64::min);
            out.push(Check {
                name: format!("{}_{:?}", c.column, m).to_lowercase(),
                value: if col.len() < 2 { 0.0 } else { worst },
                limit: 0.0,
                passed: col.len() < 2 || worst > 0.0,
            });
        }
        if let Some(limit) = c.max_step {
            let from = c.from.unwrap_or(f64::NEG_INFINITY);
            let sel: Vec<f64> = axis
                .iter()
                .zip(&col)
                .filter(|(a, _)| **a >= from)
                .map(|(_, v)| *v)
                .collect();
            let step = sel.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
            out.push(Check {
                name: format!("{}_max_step", c.column),
                value: step,
                limit,
                passed: step <= limit,
            });
        }
    }
    out
}

// ------------------------------------------------------------------- runner

/// A scenario with its device loaded and paths resolved.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
    pub device: Option<DeviceModel>,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str_in(&text, base_dir)
    }

    pub fn from_str_in(text: &str, base_dir: PathBuf) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        let device = match &scenario.device_path {
            Some(p) => Some(DeviceModel::from_path(base_dir.join(p))?),
            None => None,
        };
        Ok(Loaded {
            scenario,
            base_dir,
            device,
        })
    }

    fn device(&self) -> Result<&DeviceModel> {
        self.device
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} scenarios need device_path", self.scenario.kind.command())))
    }

    fn output(&self, o: &Overrides) -> PathBuf {
        match &o.out {
            Some(p) => p.clone(),
            None => self.base_dir.join(&self.scenario.output_path),
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write_meta(out: &Path, loaded: &Loaded, resolved: Value, tol: Option<f64>) -> Result<PathBuf> {
    let meta = json!({
        "command": loaded.scenario.kind.command(),
        "crate_version": env!("CARGO_PKG_VERSION"),
        "device": loaded.device,
        "params": resolved,
        "tol_override": tol,
    });
    let path = sibling(out, ".meta.json");
    write_file(&path, &pretty(&meta))?;
    Ok(path)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `loaded` as `kind`, writing its outputs.
pub fn run(kind: ScenarioKind, loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    if loaded.scenario.kind != kind {
        return Err(Error::Config(format!(
            "scenario kind {} does not match command {}",
            loaded.scenario.kind.command(),
            kind.command()
        )));
    }
    if let Some(t) = o.tol {
        check_tol("--tol", t)?;
    }
    match kind {
        ScenarioKind::GateAudit => cmd_gate_audit(loaded, o),
        ScenarioKind::Schedule => cmd_schedule(loaded, o),
        ScenarioKind::Transfer => cmd_transfer(loaded, o),
        ScenarioKind::Sweep => cmd_sweep(loaded, o),
        ScenarioKind::Spectrum => cmd_spectrum(loaded, o),
    }
}

/// Loads the scenario at `config` and runs it, mapping every outcome to an
/// exit code.
pub fn run_path(kind: ScenarioKind, config: &Path, o: &Overrides) -> (i32, String) {
    match Loaded::from_path(config).and_then(|l| run(kind, &l, o)) {
        Ok(out) => (out.exit_code(), out.summary),
        Err(e) => (exit_code_for(&e), format!("error: {e}")),
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn cmd_gate_audit(loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    let mut p: GateAuditParams = params_of(&loaded.scenario.params)?;
    if let Some(t) = o.tol {
        p.thresholds.makhlin_tol = t;
    }
    p.thresholds.validate()?;
    let device = loaded.device()?;
    let metrics = evaluate_gate(&p.gate, device)?;
    let checks = apply_thresholds(&metrics, &p.thresholds)?;
    let passed = checks.iter().all(|c| c.passed) && metrics.fidelity.is_finite();
    let out = loaded.output(o);
    let summary = format!(
        "gate-audit {}: fidelity {:.12} {}",
        metrics.gate,
        metrics.fidelity,
        verdict(passed)
    );
    write_file(
        &out,
        &pretty(&GateAuditOutput {
            metrics,
            checks,
            passed,
        }),
    )?;
    let meta = write_meta(&out, loaded, serde_json::to_value(&p)?, o.tol)?;
    Ok(Outcome {
        passed,
        outputs: vec![out, meta],
        summary,
    })
}

pub fn cmd_schedule(loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    let mut p: ScheduleParams = params_of(&loaded.scenario.params)?;
    if let Some(t) = o.tol {
        p.max_norm_drift = t;
    }
    check_tol("max_norm_drift", p.max_norm_drift)?;
    if let Some(f) = p.min_fidelity {
        check_unit("min_fidelity", f)?;
    }
    let schedule = match (&p.schedule, &p.schedule_path) {
        (Some(s), None) => s.clone(),
        (None, Some(path)) => Schedule::from_path(loaded.base_dir.join(path))?,
        _ => return Err(Error::Config("give exactly one of schedule, schedule_path".into())),
    };
    // Inline the schedule so the meta file is self-contained.
    p.schedule = Some(schedule.clone());
    p.schedule_path = None;
    let device = loaded.device()?;
    let (output, diag) = run_schedule(&schedule, device)?;
    let space = device.space()?;

    let mut csv = String::new();
    let mut checks = vec![Check {
        name: "max_norm_drift".into(),
        value: diag.norm_drift,
        limit: p.max_norm_drift,
        passed: diag.norm_drift <= p.max_norm_drift,
    }];
    match &output {
        ScheduleOutput::State(psi) => {
            csv.push_str("index,qubits,photons,re,im,population\n");
            for i in 0..psi.dim() {
                let (bits, n) = space.decompose(i);
                let bits: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
                let z = psi.amplitude(i);
                let _ = writeln!(csv, "{i},{bits},{n},{},{},{}", num(z.re), num(z.im), num(z.norm_sqr()));
            }
            if let Some(target) = &p.target {
                let t = target.resolve(device)?;
                let f = psi.fidelity(&t)?;
                checks.push(Check {
                    name: "min_fidelity".into(),
                    value: f,
                    limit: p.min_fidelity.unwrap_or(0.0),
                    passed: f >= p.min_fidelity.unwrap_or(0.0),
                });
            }
        }
        ScheduleOutput::Propagator(u) => {
            if p.target.is_some() {
                return Err(Error::Config("target needs an initial_state in the schedule".into()));
            }
            csv.push_str("row,col,re,im\n");
            let m = u.matrix();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let z = m[(r, c)];
                    let _ = writeln!(csv, "{r},{c},{},{}", num(z.re), num(z.im));
                }
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    let out = loaded.output(o);
    write_file(&out, &csv)?;
    let summary_path = sibling(&out, ".summary.json");
    write_file(
        &summary_path,
        &pretty(&json!({
            "diagnostics": diag,
            "checks": checks,
            "passed": passed,
        })),
    )?;
    let meta = write_meta(&out, loaded, serde_json::to_value(&p)?, o.tol)?;
    Ok(Outcome {
        passed,
        outputs: vec![out, summary_path, meta],
        summary: format!("schedule: norm drift {:.3e} {}", diag.norm_drift, verdict(passed)),
    })
}

pub fn cmd_transfer(loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    let mut cfg: TransferConfig = params_of(&loaded.scenario.params)?;
    if let Some(t) = o.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    let res = cfg.run()?;
    let r = &res.report;
    let passed = cfg.min_fidelity.is_none_or(|f| r.fidelity >= f) && r.fidelity.is_finite();
    let out = loaded.output(o);
    write_file(&out, &res.trajectory.to_csv())?;
    let summary_path = sibling(&out, ".summary.json");
    write_file(
        &summary_path,
        &pretty(&json!({
            "final_fidelity": r.fidelity,
            "loss": r.loss,
            "photon1": r.photon1,
            "photon2": r.photon2,
            "max_norm_increase": r.max_norm_increase,
            "variant": cfg.coupling_variant,
            "provenance": res.pulses.provenance,
            "symmetry": res.symmetry,
            "receiver_offset": res.receiver.map(|x| x.0),
            "capped_points": res.receiver.map(|x| x.1),
            "min_fidelity": cfg.min_fidelity,
            "passed": passed,
        })),
    )?;
    let meta = write_meta(&out, loaded, serde_json::to_value(&cfg)?, o.tol)?;
    Ok(Outcome {
        passed,
        outputs: vec![out, summary_path, meta],
        summary: format!("transfer: final |alpha2|^2 {:.12} {}", r.fidelity, verdict(passed)),
    })
}

pub fn cmd_sweep(loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    let p: SweepParams = params_of(&loaded.scenario.params)?;
    let device = loaded.device.as_ref();
    p.validate(device)?;
    let rows: Vec<Vec<f64>> = p
        .values
        .par_iter()
        .map(|&v| p.point(v, device, o.tol))
        .collect::<Result<_>>()?;
    let columns = p.columns();
    let mut csv = String::from(p.axis.name());
    for c in columns {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for (v, row) in p.values.iter().zip(&rows) {
        csv.push_str(&num(*v));
        for x in row {
            csv.push(',');
            csv.push_str(&num(*x));
        }
        csv.push('\n');
    }
    let checks = run_checks(&p.checks, columns, &p.values, &rows);
    let passed = checks.iter().all(|c| c.passed);
    let out = loaded.output(o);
    write_file(&out, &csv)?;
    let summary_path = sibling(&out, ".summary.json");
    write_file(&summary_path, &pretty(&json!({ "checks": checks, "passed": passed })))?;
    let meta = write_meta(&out, loaded, serde_json::to_value(&p)?, o.tol)?;
    Ok(Outcome {
        passed,
        outputs: vec![out, summary_path, meta],
        summary: format!(
            "sweep over {}: {} points {}",
            p.axis.name(),
            rows.len(),
            verdict(passed)
        ),
    })
}

pub fn cmd_spectrum(loaded: &Loaded, o: &Overrides) -> Result<Outcome> {
    let mut p: SpectrumParams = params_of(&loaded.scenario.params)?;
    if let Some(t) = o.tol {
        p.tol = t;
    }
    check_tol("tol", p.tol)?;
    let e = spectrum(&p.operator, loaded.device()?)?;
    let mut csv = String::from("index,eigenvalue\n");
    for (i, x) in e.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", num(*x));
    }
    let mut checks = Vec::new();
    if let Some(expected) = &p.expected {
        if expected.len() != e.len() {
            return Err(Error::DimensionMismatch {
                expected: expected.len(),
                actual: e.len(),
            });
        }
        let mut want = expected.clone();
        want.sort_by(f64::total_cmp);
        let dev = want.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check {
            name: "max_eigenvalue_deviation".into(),
            value: dev,
            limit: p.tol,
            passed: dev <= p.tol,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let out = loaded.output(o);
    write_file(&out, &csv)?;
    let meta = write_meta(&out, loaded, serde_json::to_value(&p)?, o.tol)?;
    Ok(Outcome {
        passed,
        outputs: vec![out, meta],
        summary: format!("spectrum: {} eigenvalues {}", e.len(), verdict(passed)),
    })
}
