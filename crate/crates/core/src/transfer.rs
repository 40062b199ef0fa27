//! Single-excitation state transfer between two lossy cavities.
//!
//! Each node is a charge qubit sideband-coupled to its own cavity, with the
//! qubit biased so that `E_n̄ = ν/2`. In the one-excitation sector the state is
//! `α₁|1,0;0,0⟩ + β₁|0,1;0,0⟩ + α₂|0,0;1,0⟩ + β₂|0,0;0,1⟩` and the controls
//! are the rates `Γᵢ(t) = g·E_J^i(t)/2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::solve_flux_for_ej;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::ode::{Dopri5, StepStats};

/// Qubit bias used at both nodes, as a fraction of the cavity frequency.
pub const RESONANT_BIAS_FRACTION: f64 = 0.5;
/// Largest receiver rate the solver will emit, in units of κ.
pub const GAMMA_CAP_FACTOR: f64 = 1e3;
/// Receiver amplitude below which the no-reflection law is not applied.
pub const ALPHA_FLOOR: f64 = 1e-6;
/// Tolerance of the reference run inside [`solve_receiver_pulse`].
const REFERENCE_TOL: f64 = 1e-12;

fn default_cascade() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingVariant {
    /// Unidirectional cascade: cavity 1 drives cavity 2, each decays at κ.
    #[default]
    Cascaded,
    /// Both β rows damped by `−κβ₁`, no cross drive.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParams {
    pub kappa: f64,
    pub g: f64,
    pub e_j0: f64,
    #[serde(default = "default_cascade")]
    pub cascade_factor: f64,
    #[serde(default)]
    pub coupling_variant: CouplingVariant,
}

impl TransferParams {
    pub fn new(kappa: f64, g: f64, e_j0: f64) -> Self {
        TransferParams {
            kappa,
            g,
            e_j0,
            cascade_factor: default_cascade(),
            coupling_variant: CouplingVariant::Cascaded,
        }
    }

    pub fn with_variant(mut self, variant: CouplingVariant) -> Self {
        self.coupling_variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        pos("kappa", self.kappa)?;
        pos("g", self.g)?;
        pos("e_j0", self.e_j0)?;
        if !(self.cascade_factor >= 0.0 && self.cascade_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cascade_factor must be non-negative, got {}",
                self.cascade_factor
            )));
        }
        Ok(())
    }

    /// Rate reached at zero flux, `g·E_J0`.
    pub fn max_rate(&self) -> f64 {
        self.g * self.e_j0
    }

    /// Flux ratio `φ/φ₀ ∈ [0, 1]` realising rate `gamma`. `t` only labels the
    /// error.
    pub fn rate_to_flux(&self, gamma: f64, t: f64) -> Result<f64> {
        let argument = gamma / self.max_rate();
        if !(argument.abs() <= 1.0 + 1e-12) {
            return Err(Error::PulseOutOfRange { t, argument });
        }
        solve_flux_for_ej(2.0 * gamma / self.g, self.e_j0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferState {
    pub alpha1: C64,
    pub beta1: C64,
    pub alpha2: C64,
    pub beta2: C64,
    pub t: f64,
}

impl TransferState {
    /// Excitation stored in the sending qubit.
    pub fn sender_excited(t: f64) -> Self {
        TransferState {
            alpha1: C64::new(1.0, 0.0),
            t,
            ..Default::default()
        }
    }

    pub fn from_array(y: [C64; 4], t: f64) -> Self {
        TransferState {
            alpha1: y[0],
            beta1: y[1],
            alpha2: y[2],
            beta2: y[3],
            t,
        }
    }

    pub fn to_array(&self) -> [C64; 4] {
        [self.alpha1, self.beta1, self.alpha2, self.beta2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.to_array().iter().map(|z| z.norm_sqr()).sum()
    }
}

/// A real control rate as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pulse {
    Zero,
    Constant {
        rate: f64,
    },
    /// Receiver rate `κe^{−κt/2}cos(√3κt/2 − π/3)/α₂(t)`, zero for `t < 0`.
    ClosedFormReceiver {
        kappa: f64,
    },
    /// `inner(−t)`.
    Mirror {
        inner: Box<Pulse>,
    },
    /// `before(t)` for `t < split`, `after(t)` otherwise.
    Piecewise {
        split: f64,
        before: Box<Pulse>,
        after: Box<Pulse>,
    },
    /// Linear interpolation on a uniform grid, held at the end values outside.
    Sampled {
        t0: f64,
        dt: f64,
        values: Vec<f64>,
    },
}

impl Pulse {
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_anchored(t, t)
    }

    /// Evaluates at `t`, choosing piecewise branches by `anchor` so the
    /// function is smooth across an interval containing no breakpoint.
    fn eval_anchored(&self, t: f64, anchor: f64) -> f64 {
        match self {
            Pulse::Zero => 0.0,
            Pulse::Constant { rate } => *rate,
            Pulse::ClosedFormReceiver { kappa } => {
                if anchor < 0.0 {
                    0.0
                } else {
                    closed_form_gamma2(*kappa, t.max(0.0))
                }
            }
            Pulse::Mirror { inner } => inner.eval_anchored(-t, -anchor),
            Pulse::Piecewise { split, before, after } => {
                if anchor < *split {
                    before.eval_anchored(t, anchor)
                } else {
                    after.eval_anchored(t, anchor)
                }
            }
            Pulse::Sampled { t0, dt, values } => sample_linear(*t0, *dt, values, t),
        }
    }

    /// Times where the pulse may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Pulse::ClosedFormReceiver { .. } => vec![0.0],
            Pulse::Mirror { inner } => inner.breakpoints().into_iter().map(|t| -t).collect(),
            Pulse::Piecewise { split, before, after } => {
                let mut v = vec![*split];
                v.extend(before.breakpoints());
                v.extend(after.breakpoints());
                v
            }
            _ => Vec::new(),
        }
    }

    /// Samples `self` on `n` uniform points spanning `window`.
    pub fn sampled(&self, window: (f64, f64), n: usize) -> Pulse {
        let grid = uniform_grid(window, n);
        let dt = if n > 1 { grid[1] - grid[0] } else { 0.0 };
        Pulse::Sampled {
            t0: window.0,
            dt,
            values: grid.iter().map(|&t| self.eval(t)).collect(),
        }
    }
}

fn sample_linear(t0: f64, dt: f64, values: &[f64], t: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            if !(dt > 0.0) || t <= t0 {
                return values[0];
            }
            let x = (t - t0) / dt;
            let i = x.floor() as usize;
            if i >= n - 1 {
                return values[n - 1];
            }
            let f = x - i as f64;
            values[i] + f * (values[i + 1] - values[i])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    SolvedNoReflection,
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    pub gamma1: Pulse,
    pub gamma2: Pulse,
    pub provenance: Provenance,
}

impl PulsePair {
    pub fn user(gamma1: Pulse, gamma2: Pulse) -> Self {
        PulsePair {
            gamma1,
            gamma2,
            provenance: Provenance::UserSupplied,
        }
    }

    pub fn zero() -> Self {
        PulsePair::user(Pulse::Zero, Pulse::Zero)
    }

    pub fn rates(&self, t: f64) -> (f64, f64) {
        (self.gamma1.eval(t), self.gamma2.eval(t))
    }

    fn rates_anchored(&self, t: f64, anchor: f64) -> (f64, f64) {
        (
            self.gamma1.eval_anchored(t, anchor),
            self.gamma2.eval_anchored(t, anchor),
        )
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.gamma1.breakpoints();
        v.extend(self.gamma2.breakpoints());
        v
    }

    /// Flux ratios of both qubits at `t`.
    pub fn flux_at(&self, t: f64, params: &TransferParams) -> Result<(f64, f64)> {
        let (g1, g2) = self.rates(t);
        Ok((params.rate_to_flux(g1, t)?, params.rate_to_flux(g2, t)?))
    }
}

/// How the closed-form pulses, stated for `t ≥ 0`, are continued to `t < 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionPolicy {
    /// Sender at `Γ₁ = κ` throughout, receiver off before `t = 0`.
    HoldReceiver,
    /// Sender mirrored from the receiver formula, receiver at κ before `t = 0`.
    #[default]
    Mirrored,
}

/// Receiver amplitude envelope
/// `α₂(t) = √(1 − e^{−κt}[1 + cos(√3κt − π/6)/√3]/2)`.
pub fn receiver_envelope(kappa: f64, t: f64) -> f64 {
    let s3 = 3f64.sqrt();
    let x = kappa * t;
    let bracket = 1.0 + (s3 * x - PI / 6.0).cos() / s3;
    (1.0 - (-x).exp() * bracket / 2.0).max(0.0).sqrt()
}

/// Closed-form receiver rate for `t ≥ 0`.
pub fn closed_form_gamma2(kappa: f64, t: f64) -> f64 {
    let x = kappa * t;
    kappa * (-x / 2.0).exp() * (3f64.sqrt() * x / 2.0 - PI / 3.0).cos() / receiver_envelope(kappa, t)
}

/// Closed-form sender/receiver pair. The sender flux `arccos(κ/(g·E_J0))/π`
/// gives `Γ₁ = κ`.
pub fn closed_form_pulses(params: &TransferParams, policy: ExtensionPolicy) -> Result<PulsePair> {
    params.validate()?;
    let k = params.kappa;
    let argument = k / params.max_rate();
    if argument > 1.0 {
        return Err(Error::PulseOutOfRange { t: 0.0, argument });
    }
    let receiver = Pulse::ClosedFormReceiver { kappa: k };
    for t in uniform_grid((0.0, 12.0 / k), 1201) {
        let argument = closed_form_gamma2(k, t) / params.max_rate();
        if !(argument.abs() <= 1.0 + 1e-12) {
            return Err(Error::PulseOutOfRange { t, argument });
        }
    }
    let (gamma1, gamma2) = match policy {
        ExtensionPolicy::HoldReceiver => (
            Pulse::Constant { rate: k },
            Pulse::Piecewise {
                split: 0.0,
                before: Box::new(Pulse::Zero),
                after: Box::new(receiver),
            },
        ),
        ExtensionPolicy::Mirrored => (
            Pulse::Piecewise {
                split: 0.0,
                before: Box::new(Pulse::Mirror {
                    inner: Box::new(receiver.clone()),
                }),
                after: Box::new(Pulse::Constant { rate: k }),
            },
            Pulse::Piecewise {
                split: 0.0,
                before: Box::new(Pulse::Constant { rate: k }),
                after: Box::new(receiver),
            },
        ),
    };
    Ok(PulsePair {
        gamma1,
        gamma2,
        provenance: Provenance::ClosedForm,
    })
}

fn rhs(y: &[C64], g1: f64, g2: f64, p: &TransferParams, dy: &mut [C64]) {
    let k = p.kappa;
    let (a1, b1, a2, b2) = (y[0], y[1], y[2], y[3]);
    dy[0] = g1 * b1;
    dy[2] = g2 * b2;
    match p.coupling_variant {
        CouplingVariant::Cascaded => {
            dy[1] = -g1 * a1 - k * b1;
            dy[3] = -g2 * a2 - k * b2 - p.cascade_factor * k * b1;
        }
        CouplingVariant::Literal => {
            dy[1] = -g1 * a1 - k * b1;
            dy[3] = -g2 * a2 - k * b1;
        }
    }
}

/// Time derivative of the amplitudes; the returned state carries `state.t`.
pub fn ode_rhs(state: &TransferState, pulses: &PulsePair, params: &TransferParams) -> TransferState {
    let (g1, g2) = pulses.rates(state.t);
    let mut dy = [C64::default(); 4];
    rhs(&state.to_array(), g1, g2, params, &mut dy);
    TransferState::from_array(dy, state.t)
}

pub fn uniform_grid(window: (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![window.0],
        _ => {
            let dt = (window.1 - window.0) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { window.1 } else { window.0 + i as f64 * dt })
                .collect()
        }
    }
}

/// Integrates `f(t, anchor, y, dy)` over `[a, b]`, restarting at every
/// breakpoint inside the interval. `anchor` is the midpoint of the current
/// smooth piece.
#[allow(clippy::too_many_arguments)]
fn integrate_pieces<F>(
    solver: &Dopri5,
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    y: &mut [C64],
    h: &mut Option<f64>,
    total: &mut StepStats,
) -> Result<()>
where
    F: FnMut(f64, f64, &[C64], &mut [C64]),
{
    let mut start = a;
    let inner = breaks.iter().copied().filter(|&s| s > a && s < b);
    for end in inner.chain(std::iter::once(b)) {
        let anchor = 0.5 * (start + end);
        let stats = solver.integrate(|t, y, dy| f(t, anchor, y, dy), start, end, y, *h)?;
        total.accepted += stats.accepted;
        total.rejected += stats.rejected;
        if stats.last_step > 0.0 {
            total.last_step = stats.last_step;
            *h = Some(stats.last_step);
        }
        start = end;
    }
    Ok(())
}

fn sorted_breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|t| t.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn check_window(window: (f64, f64), samples: usize) -> Result<()> {
    if !(window.1 > window.0) || !window.0.is_finite() || !window.1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window must satisfy t_end > t_start, got [{}, {}]",
            window.0, window.1
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    Ok(())
}

/// Receiver pulse constructed from a sender pulse, with diagnostics.
#[derive(Clone, Debug)]
pub struct ReceiverSolution {
    pub pulses: PulsePair,
    /// Offset added to `α₂²` of the reference so it stays positive.
    pub offset: f64,
    /// Grid points where `Γ₂` hit the cap.
    pub capped_points: usize,
    /// True when any grid point was capped.
    pub floor_hit: bool,
    /// Reference receiver amplitude on the pulse grid.
    pub reference_alpha2: Vec<f64>,
}

/// Builds `Γ₂(t)` so the receiver cavity field cancels the incoming one,
/// `β₂ = −β₁`, which forces `Γ₂α₂ = −(Γ₁α₁ + c·κ·β₁)`.
///
/// The sender is run from `α₁ = 1` with `α₂² = w` co-integrated from
/// `ẇ = 2(Γ₁α₁ + c·κ·β₁)β₁`. Where the sender emits before the receiver can
/// absorb, `w` dips below zero; the reference uses `√(w + offset)` with the
/// smallest offset keeping it positive. Rates above `10³·κ` are capped, and a
/// capped span longer than `max_capped_span` is an error.
pub fn solve_receiver_pulse(
    gamma1: &Pulse,
    params: &TransferParams,
    window: (f64, f64),
    samples: usize,
    max_capped_span: f64,
) -> Result<ReceiverSolution> {
    params.validate()?;
    check_window(window, samples)?;
    if params.coupling_variant != CouplingVariant::Cascaded {
        return Err(Error::InvalidParameter(
            "the no-reflection receiver is defined for the cascaded variant only".into(),
        ));
    }
    let k = params.kappa;
    let c = params.cascade_factor;
    let grid = uniform_grid(window, samples);
    let solver = Dopri5::new(REFERENCE_TOL)?;

    // y = (α₁, β₁, w)
    let mut y = [C64::new(1.0, 0.0), C64::default(), C64::default()];
    let mut a1 = Vec::with_capacity(samples);
    let mut b1 = Vec::with_capacity(samples);
    let mut w = Vec::with_capacity(samples);
    let breaks = sorted_breaks(gamma1.breakpoints());
    let mut h = None;
    let mut stats = StepStats::default();
    for (i, &t) in grid.iter().enumerate() {
        if i > 0 {
            integrate_pieces(
                &solver,
                |t, anchor, y, dy| {
                    let g1 = gamma1.eval_anchored(t, anchor);
                    dy[0] = g1 * y[1];
                    dy[1] = -g1 * y[0] - k * y[1];
                    dy[2] = 2.0 * (g1 * y[0] + c * k * y[1]) * y[1];
                },
                grid[i - 1],
                t,
                &breaks,
                &mut y,
                &mut h,
                &mut stats,
            )?;
        }
        a1.push(y[0].re);
        b1.push(y[1].re);
        w.push(y[2].re);
    }

    let w_min = w.iter().copied().fold(0.0, f64::min);
    let offset = 1.01 * (-w_min) + ALPHA_FLOOR * ALPHA_FLOOR;
    let cap = GAMMA_CAP_FACTOR * k;
    let mut capped_points = 0;
    let mut reference_alpha2 = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for (i, &t) in grid.iter().enumerate() {
        let drive = -(gamma1.eval(t) * a1[i] + c * k * b1[i]);
        let a2 = (w[i] + offset).max(0.0).sqrt();
        reference_alpha2.push(a2);
        let g2 = if drive == 0.0 {
            0.0
        } else if a2 < ALPHA_FLOOR || (drive / a2).abs() > cap {
            capped_points += 1;
            cap.copysign(drive)
        } else {
            drive / a2
        };
        values.push(g2);
    }
    let dt = grid[1] - grid[0];
    let span = capped_points as f64 * dt;
    if span > max_capped_span {
        return Err(Error::ConstraintUnsolvable { span });
    }
    Ok(ReceiverSolution {
        pulses: PulsePair {
            gamma1: gamma1.clone(),
            gamma2: Pulse::Sampled {
                t0: window.0,
                dt,
                values,
            },
            provenance: Provenance::SolvedNoReflection,
        },
        offset,
        capped_points,
        floor_hit: capped_points > 0,
        reference_alpha2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// `|α₂(t_end)|²`.
    pub fidelity: f64,
    pub photon1: f64,
    pub photon2: f64,
    /// Initial minus final norm.
    pub loss: f64,
    /// Largest norm increase between consecutive samples.
    pub max_norm_increase: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Clone, Debug)]
pub struct TransferTrajectory {
    pub states: Vec<TransferState>,
    pub stats: StepStats,
}

impl TransferTrajectory {
    pub fn final_state(&self) -> &TransferState {
        self.states.last().expect("trajectory has at least two samples")
    }

    pub fn report(&self) -> TransferReport {
        let first = self.states[0].norm_sqr();
        let last = self.final_state();
        let max_norm_increase = self
            .states
            .windows(2)
            .map(|p| p[1].norm_sqr() - p[0].norm_sqr())
            .fold(0.0, f64::max);
        TransferReport {
            fidelity: last.alpha2.norm_sqr(),
            photon1: last.beta1.norm_sqr(),
            photon2: last.beta2.norm_sqr(),
            loss: first - last.norm_sqr(),
            max_norm_increase,
            accepted_steps: self.stats.accepted,
            rejected_steps: self.stats.rejected,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("t,alpha1_re,alpha1_im,beta1_re,beta1_im,alpha2_re,alpha2_im,beta2_re,beta2_im,norm\n");
        for st in &self.states {
            let _ = write!(s, "{:.16e}", st.t);
            for z in st.to_array() {
                let _ = write!(s, ",{:.16e},{:.16e}", z.re, z.im);
            }
            let _ = writeln!(s, ",{:.16e}", st.norm_sqr());
        }
        s
    }
}

/// Integrates the two-node equations from `initial` over `window`, recording
/// `samples` uniformly spaced states.
pub fn integrate_transfer(
    pulses: &PulsePair,
    params: &TransferParams,
    initial: [C64; 4],
    window: (f64, f64),
    tol: f64,
    samples: usize,
) -> Result<TransferTrajectory> {
    params.validate()?;
    check_window(window, samples)?;
    let solver = Dopri5::new(tol)?;
    let grid = uniform_grid(window, samples);
    let mut y = initial;
    let mut states = Vec::with_capacity(samples);
    states.push(TransferState::from_array(y, grid[0]));
    let breaks = sorted_breaks(pulses.breakpoints());
    let mut total = StepStats::default();
    let mut h = None;
    for pair in grid.windows(2) {
        integrate_pieces(
            &solver,
            |t, anchor, y, dy| {
                let (g1, g2) = pulses.rates_anchored(t, anchor);
                rhs(y, g1, g2, params, dy);
            },
            pair[0],
            pair[1],
            &breaks,
            &mut y,
            &mut h,
            &mut total,
        )?;
        let st = TransferState::from_array(y, pair[1]);
        if !st.norm_sqr().is_finite() {
            return Err(Error::Integration {
                t: pair[1],
                reason: "non-finite amplitudes".into(),
            });
        }
        states.push(st);
    }
    Ok(TransferTrajectory { states, stats: total })
}

/// `max |Γ₂(t) − Γ₁(−t)|` over `samples` points of `[−half_width, half_width]`.
pub fn symmetry_check(pulses: &PulsePair, half_width: f64, samples: usize) -> f64 {
    uniform_grid((-half_width, half_width), samples)
        .into_iter()
        .map(|t| (pulses.gamma2.eval(t) - pulses.gamma1.eval(-t)).abs())
        .fold(0.0, f64::max)
}

/// `max |a(t) − b(t)|` on a uniform grid.
pub fn pulse_difference(a: &Pulse, b: &Pulse, window: (f64, f64), samples: usize) -> f64 {
    uniform_grid(window, samples)
        .into_iter()
        .map(|t| (a.eval(t) - b.eval(t)).abs())
        .fold(0.0, f64::max)
}

fn default_tol() -> f64 {
    1e-10
}

fn default_samples() -> usize {
    2401
}

fn default_capped_span() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseSource {
    ClosedForm {
        #[serde(default)]
        extension: ExtensionPolicy,
    },
    /// Closed-form sender with the no-reflection receiver.
    Solved {
        #[serde(default)]
        extension: ExtensionPolicy,
        /// Longest capped span tolerated, in units of `1/κ`.
        #[serde(default = "default_capped_span")]
        max_capped_span: f64,
    },
    User {
        gamma1: Pulse,
        gamma2: Pulse,
    },
}

/// A transfer scenario as loaded from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub kappa: f64,
    pub g: f64,
    pub e_j0: f64,
    #[serde(default = "default_cascade")]
    pub cascade_factor: f64,
    #[serde(default)]
    pub coupling_variant: CouplingVariant,
    /// Defaults to `[−12/κ, 12/κ]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub pulse_source: PulseSource,
    /// Required final `|α₂|²`, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    pub pulses: PulsePair,
    pub trajectory: TransferTrajectory,
    pub report: TransferReport,
    /// `symmetry_check` over the window.
    pub symmetry: f64,
    /// Offset and capped points when the receiver was solved.
    pub receiver: Option<(f64, usize)>,
}

impl TransferConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: TransferConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        check_window(self.window(), self.samples)?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let Some(f) = self.min_fidelity {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!(
                    "min_fidelity must lie in [0, 1], got {f}"
                )));
            }
        }
        if let PulseSource::Solved { max_capped_span, .. } = self.pulse_source {
            if !(max_capped_span >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "max_capped_span must be non-negative, got {max_capped_span}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> TransferParams {
        TransferParams {
            kappa: self.kappa,
            g: self.g,
            e_j0: self.e_j0,
            cascade_factor: self.cascade_factor,
            coupling_variant: self.coupling_variant,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        match self.window {
            Some([a, b]) => (a, b),
            None => (-12.0 / self.kappa, 12.0 / self.kappa),
        }
    }

    pub fn pulses(&self) -> Result<(PulsePair, Option<(f64, usize)>)> {
        let params = self.params();
        params.validate()?;
        match &self.pulse_source {
            PulseSource::ClosedForm { extension } => Ok((closed_form_pulses(&params, *extension)?, None)),
            PulseSource::Solved {
                extension,
                max_capped_span,
            } => {
                let sender = closed_form_pulses(&params, *extension)?.gamma1;
                let sol = solve_receiver_pulse(
                    &sender,
                    &params,
                    self.window(),
                    self.samples,
                    max_capped_span / self.kappa,
                )?;
                Ok((sol.pulses, Some((sol.offset, sol.capped_points))))
            }
            PulseSource::User { gamma1, gamma2 } => Ok((PulsePair::user(gamma1.clone(), gamma2.clone()), None)),
        }
    }

    /// Runs the scenario from `α₁ = 1` at the window start.
    pub fn run(&self) -> Result<TransferOutcome> {
        self.validate()?;
        let params = self.params();
        let window = self.window();
        let (pulses, receiver) = self.pulses()?;
        let initial = TransferState::sender_excited(window.0).to_array();
        let trajectory = integrate_transfer(&pulses, &params, initial, window, self.tol, self.samples)?;
        let report = trajectory.report();
        let half = window.0.abs().max(window.1.abs());
        let symmetry = symmetry_check(&pulses, half, self.samples);
        Ok(TransferOutcome {
            pulses,
            trajectory,
            report,
            symmetry,
            receiver,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TransferParams {
        TransferParams::new(1.0, 0.1, 20.0)
    }

    #[test]
    fn validation_rejects_bad_params() {
        assert!(TransferParams::new(0.0, 0.1, 1.0).validate().is_err());
        assert!(TransferParams::new(1.0, -0.1, 1.0).validate().is_err());
        let mut p = params();
        p.cascade_factor = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn sampled_pulse_interpolates_and_holds() {
        let p = Pulse::Sampled {
            t0: 0.0,
            dt: 1.0,
            values: vec![0.0, 2.0, 4.0],
        };
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(-3.0), 0.0);
        assert_eq!(p.eval(9.0), 4.0);
    }

    #[test]
    fn sender_out_of_range_reports_time() {
        let p = TransferParams::new(1.0, 0.1, 5.0);
        match closed_form_pulses(&p, ExtensionPolicy::HoldReceiver) {
            Err(Error::PulseOutOfRange { t, argument }) => {
                assert_eq!(t, 0.0);
                assert!((argument - 2.0).abs() < 1e-12);
            }
            other => panic!("expected out-of-range, got {other:?}"),
        }
    }

    #[test]
    fn flux_roundtrip() {
        let p = params();
        let phi = p.rate_to_flux(p.kappa, 0.0).unwrap();
        let back = p.g * 2.0 * p.e_j0 * (PI * phi).cos() / 2.0;
        assert!((back - p.kappa).abs() < 1e-12);
        assert!(p.rate_to_flux(3.0 * p.max_rate(), 1.5).is_err());
    }

    #[test]
    fn literal_receiver_needs_cascade() {
        let p = params().with_variant(CouplingVariant::Literal);
        assert!(solve_receiver_pulse(&Pulse::Constant { rate: 1.0 }, &p, (0.0, 1.0), 11, 1.0).is_err());
    }

    #[test]
    fn config_parses_defaults() {
        let cfg = TransferConfig::from_json_str(
            r#"{"kappa": 1.0, "g": 0.1, "e_j0": 20.0, "pulse_source": {"kind": "closed_form"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.cascade_factor, 2.0);
        assert_eq!(cfg.window(), (-12.0, 12.0));
        assert_eq!(
            cfg.pulse_source,
            PulseSource::ClosedForm {
                extension: ExtensionPolicy::Mirrored
            }
        );
        assert!(TransferConfig::from_json_str(
            r#"{"kappa": 1.0, "g": 0.1, "e_j0": 20.0, "pulse_source": {"kind": "closed_form"}, "x": 1}"#
        )
        .is_err());
    }
}
