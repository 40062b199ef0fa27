//! Hamiltonians on the product space qubit₀ ⊗ … ⊗ qubitₙ₋₁ ⊗ Fock(n_ph).
//!
//! Conventions: |0⟩ is the +1 eigenstate of σz, σ⁺ = |1⟩⟨0| adds a Cooper
//! pair, and the first qubit is the most significant tensor factor. The
//! charging term of qubit k is `E_n̄k σz`, so a transition that flips the
//! qubit from |0⟩ to |1⟩ costs `−2E_n̄k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::device::{beta_mixing, charging_bias, ej_effective, DeviceModel};
use crate::error::{Error, Result};
use crate::linalg::expm::expm;
use crate::linalg::ops::{annihilation, charge_number, creation, sigma_plus, sigma_x, ProductSpace};
use crate::linalg::tdse::TimeDependentHamiltonian;
use crate::linalg::{Operator, C64, I, ZERO};

/// Absolute tolerance on charging-bias resonance checks, scaled by `max(1, ν)`.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproximationLevel {
    Exact,
    LambDickeFirstOrder,
    SidebandRwa,
}

impl ApproximationLevel {
    pub fn tag(self) -> &'static str {
        match self {
            ApproximationLevel::Exact => "exact",
            ApproximationLevel::LambDickeFirstOrder => "lamb_dicke_first_order",
            ApproximationLevel::SidebandRwa => "sideband_rwa",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// Interaction picture with respect to the full `H0`.
    Rotating,
}

/// First sidebands. The labels follow the source convention: blue couples
/// through `σ⁺a`, red through `σ⁺a†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Blue,
    Red,
}

impl Sideband {
    /// Charging bias that makes this sideband resonant with `H0`:
    /// `−2E_n̄ ∓ ν = 0`.
    pub fn resonant_bias(self, nu: f64) -> f64 {
        match self {
            Sideband::Blue => -0.5 * nu,
            Sideband::Red => 0.5 * nu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotatingTerm {
    A,
    B,
}

/// Which pieces of `H` a [`HamiltonianSpec`] assembles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveTerms {
    pub h0: bool,
    pub hint: bool,
    pub h1_symmetric: bool,
    pub h2_capacitive: bool,
}

impl ActiveTerms {
    /// `H0 + H_int`.
    pub const ASYMMETRIC: ActiveTerms = ActiveTerms {
        h0: true,
        hint: true,
        h1_symmetric: false,
        h2_capacitive: false,
    };
    /// `H0 + H1`.
    pub const SYMMETRIC: ActiveTerms = ActiveTerms {
        h0: true,
        hint: false,
        h1_symmetric: true,
        h2_capacitive: false,
    };

    pub fn with_capacitive(mut self) -> Self {
        self.h2_capacitive = true;
        self
    }
}

fn resonance_tol(nu: f64) -> f64 {
    RESONANCE_TOL * nu.abs().max(1.0)
}

/// Fails with [`Error::Resonance`] unless qubit `k` sits at `required`.
pub fn check_resonance(device: &DeviceModel, k: usize, required: f64) -> Result<()> {
    let bias = charging_bias(device.qubit(k)?);
    if (bias - required).abs() > resonance_tol(device.cavity.nu) {
        return Err(Error::Resonance {
            qubit: k,
            bias,
            required,
        });
    }
    Ok(())
}

fn is_resonant(bias: f64, required: f64, nu: f64) -> bool {
    (bias - required).abs() <= resonance_tol(nu)
}

/// `e^{−ig(a+a†)}` on the truncated Fock space.
pub fn displacement(n_ph: usize, g: f64) -> Result<Operator> {
    let x = annihilation(n_ph)?.try_add(&creation(n_ph)?)?;
    Ok(expm(&x, g)?.with_label("D"))
}

/// `ν(a†a + 1/2) + Σ E_n̄k σz_k`, diagonal.
pub fn build_h0(device: &DeviceModel) -> Result<Operator> {
    let diag = h0_diagonal(device)?;
    let d: Vec<C64> = diag.iter().map(|&e| C64::new(e, 0.0)).collect();
    Ok(Operator::from_diagonal(&d, "H0[exact]"))
}

/// Diagonal of [`build_h0`] in the product basis.
pub fn h0_diagonal(device: &DeviceModel) -> Result<Vec<f64>> {
    let space = device.space()?;
    let biases: Vec<f64> = device.qubits.iter().map(charging_bias).collect();
    let nu = device.cavity.nu;
    Ok((0..space.dim())
        .map(|i| {
            let (bits, n) = space.decompose(i);
            let qubits: f64 = bits
                .iter()
                .zip(&biases)
                .map(|(&b, &e)| if b == 0 { e } else { -e })
                .sum();
            nu * (n as f64 + 0.5) + qubits
        })
        .collect())
}

/// `−(E/2)(e^{−iβ} σ⁺_k ⊗ P + h.c.)`.
fn josephson_term(space: &ProductSpace, k: usize, e: f64, beta: f64, photon: &Operator) -> Result<Operator> {
    let sp = sigma_plus().scale(C64::from_polar(1.0, -beta));
    Ok(space.qubit_photon(k, &sp, photon)?.plus_hc().scale_re(-0.5 * e))
}

/// `(gE/2)(i e^{−iβ} σ⁺_k ⊗ P + h.c.)` with `P` = `a` or `a†`.
fn sideband_term(space: &ProductSpace, k: usize, e: f64, beta: f64, g: f64, photon: &Operator) -> Result<Operator> {
    let sp = sigma_plus().scale(I * C64::from_polar(1.0, -beta));
    Ok(space.qubit_photon(k, &sp, photon)?.plus_hc().scale_re(0.5 * g * e))
}

#[derive(Clone, Copy)]
struct Coupling {
    e: f64,
    beta: f64,
}

fn asymmetric_couplings(device: &DeviceModel) -> Result<Vec<Coupling>> {
    device
        .qubits
        .iter()
        .map(|q| {
            Ok(Coupling {
                e: ej_effective(q),
                beta: beta_mixing(q)?,
            })
        })
        .collect()
}

fn symmetric_couplings(device: &DeviceModel) -> Result<Vec<Coupling>> {
    device
        .qubits
        .iter()
        .map(|q| {
            Ok(Coupling {
                e: q.ej_symmetric()?,
                beta: 0.0,
            })
        })
        .collect()
}

/// Lab-frame coupling at `Exact` or `LambDickeFirstOrder`.
fn coupling_full(device: &DeviceModel, couplings: &[Coupling], level: ApproximationLevel) -> Result<Operator> {
    let space = device.space()?;
    let n_ph = device.cavity.n_ph;
    let g = device.cavity.g;
    let photon = match level {
        ApproximationLevel::Exact => displacement(n_ph, g)?,
        ApproximationLevel::LambDickeFirstOrder => {
            let x = annihilation(n_ph)?.try_add(&creation(n_ph)?)?;
            Operator::identity(n_ph).try_sub(&x.scale(I * g))?
        }
        ApproximationLevel::SidebandRwa => unreachable!("handled by coupling_rwa"),
    };
    let mut h = Operator::zeros(space.dim());
    for (k, c) in couplings.iter().enumerate() {
        if c.e != 0.0 {
            h.add_assign(&josephson_term(&space, k, c.e, c.beta, &photon)?);
        }
    }
    Ok(h)
}

/// First-order terms that are resonant at each qubit's current bias.
fn coupling_rwa(device: &DeviceModel, couplings: &[Coupling]) -> Result<Operator> {
    let space = device.space()?;
    let n_ph = device.cavity.n_ph;
    let nu = device.cavity.nu;
    let g = device.cavity.g;
    let a = annihilation(n_ph)?;
    let ad = creation(n_ph)?;
    let id = Operator::identity(n_ph);
    let mut h = Operator::zeros(space.dim());
    for (k, c) in couplings.iter().enumerate() {
        if c.e == 0.0 {
            continue;
        }
        let bias = charging_bias(&device.qubits[k]);
        if is_resonant(bias, 0.0, nu) {
            h.add_assign(&josephson_term(&space, k, c.e, c.beta, &id)?);
        }
        if is_resonant(bias, Sideband::Blue.resonant_bias(nu), nu) {
            h.add_assign(&sideband_term(&space, k, c.e, c.beta, g, &a)?);
        }
        if is_resonant(bias, Sideband::Red.resonant_bias(nu), nu) {
            h.add_assign(&sideband_term(&space, k, c.e, c.beta, g, &ad)?);
        }
    }
    Ok(h)
}

/// `−(1/2) Σ E_J(φ_j)(e^{−i[g(a+a†)+β_j]} σ⁺_j + h.c.)`, displacement taken
/// as a matrix exponential on the truncated Fock space.
pub fn build_hint_exact(device: &DeviceModel) -> Result<Operator> {
    Ok(coupling_full(device, &asymmetric_couplings(device)?, ApproximationLevel::Exact)?.with_label("Hint[exact]"))
}

/// [`build_hint_exact`] with `e^{−ig(a+a†)} → 1 − ig(a+a†)`.
pub fn build_hint_lamb_dicke(device: &DeviceModel) -> Result<Operator> {
    Ok(coupling_full(
        device,
        &asymmetric_couplings(device)?,
        ApproximationLevel::LambDickeFirstOrder,
    )?
    .with_label("Hint[lamb_dicke_first_order]"))
}

/// Rotating-frame generator of `R_k^±(θ, β)` with `θ = E_J g t`:
/// `(g E_J/2)(i e^{−iβ} σ⁺_k a + h.c.)` for blue, `a → a†` for red.
pub fn build_sideband_h(device: &DeviceModel, k: usize, branch: Sideband) -> Result<Operator> {
    let q = device.qubit(k)?;
    check_resonance(device, k, branch.resonant_bias(device.cavity.nu))?;
    let space = device.space()?;
    let n_ph = device.cavity.n_ph;
    let photon = match branch {
        Sideband::Blue => annihilation(n_ph)?,
        Sideband::Red => creation(n_ph)?,
    };
    let h = sideband_term(&space, k, ej_effective(q), beta_mixing(q)?, device.cavity.g, &photon)?;
    let label = match branch {
        Sideband::Blue => "R+[sideband_rwa]",
        Sideband::Red => "R-[sideband_rwa]",
    };
    Ok(h.with_label(label))
}

/// `−(1/2) Σ E_J⁰(φ_j)(e^{−ig(a+a†)} σ⁺_j + h.c.)` for symmetric SQUIDs.
pub fn build_symmetric_h1(device: &DeviceModel) -> Result<Operator> {
    Ok(coupling_full(device, &symmetric_couplings(device)?, ApproximationLevel::Exact)?.with_label("H1[exact]"))
}

/// `E_c Σ_{i} (n̄_i − n_i)(n̄_{i+1} − n_{i+1})` along the qubit chain.
pub fn build_capacitive_h2(device: &DeviceModel) -> Result<Operator> {
    let ec = device
        .capacitive_ec
        .ok_or_else(|| Error::InvalidParameter("capacitive_ec is not set".into()))?;
    if device.n_qubits() < 2 {
        return Err(Error::InvalidParameter(
            "capacitive coupling needs at least 2 qubits".into(),
        ));
    }
    let space = device.space()?;
    let offsets: Vec<Operator> = device
        .qubits
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let local = Operator::identity(2).scale_re(q.n_bar).try_sub(&charge_number())?;
            space.qubit_op(k, &local)
        })
        .collect::<Result<_>>()?;
    let mut h = Operator::zeros(space.dim());
    for pair in offsets.windows(2) {
        h.add_assign(&pair[0].try_mul(&pair[1])?);
    }
    Ok(h.scale_re(ec).with_label("H2[exact]"))
}

/// Rotating-frame single-qubit pieces for symmetric SQUIDs:
/// `H_a = −E_J⁰ σx_k` at zero bias and `H_b = (1/2)E_J⁰(ig a σ⁺_k + h.c.)` at the
/// blue-sideband bias.
pub fn build_rotating_ha_hb(device: &DeviceModel, k: usize, which: RotatingTerm) -> Result<Operator> {
    let q = device.qubit(k)?;
    let e0 = q.ej_symmetric()?;
    let space = device.space()?;
    match which {
        RotatingTerm::A => {
            check_resonance(device, k, 0.0)?;
            Ok(space
                .qubit_op(k, &sigma_x())?
                .scale_re(-e0)
                .with_label("Ha[sideband_rwa]"))
        }
        RotatingTerm::B => {
            check_resonance(device, k, Sideband::Blue.resonant_bias(device.cavity.nu))?;
            let a = annihilation(device.cavity.n_ph)?;
            Ok(sideband_term(&space, k, e0, 0.0, device.cavity.g, &a)?.with_label("Hb[sideband_rwa]"))
        }
    }
}

/// A full Hamiltonian request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub device: DeviceModel,
    pub level: ApproximationLevel,
    pub frame: Frame,
    pub active_terms: ActiveTerms,
}

impl HamiltonianSpec {
    pub fn new(
        device: DeviceModel,
        level: ApproximationLevel,
        frame: Frame,
        active_terms: ActiveTerms,
    ) -> Result<Self> {
        let s = HamiltonianSpec {
            device,
            level,
            frame,
            active_terms,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        let t = self.active_terms;
        if t.hint && t.h1_symmetric {
            return Err(Error::InvalidParameter(
                "hint and h1_symmetric are alternative couplings; enable one".into(),
            ));
        }
        if t.h1_symmetric && !self.device.all_symmetric() {
            return Err(Error::InvalidParameter(
                "h1_symmetric requires e_j1 = e_j2 for every qubit".into(),
            ));
        }
        if t.h2_capacitive && (self.device.capacitive_ec.is_none() || self.device.n_qubits() < 2) {
            return Err(Error::InvalidParameter(
                "h2_capacitive requires capacitive_ec and at least 2 qubits".into(),
            ));
        }
        if self.frame == Frame::Rotating && !t.h0 {
            return Err(Error::InvalidParameter(
                "the rotating frame is defined by h0, which is disabled".into(),
            ));
        }
        Ok(())
    }

    fn couplings(&self) -> Result<Option<Vec<Coupling>>> {
        if self.active_terms.hint {
            Ok(Some(asymmetric_couplings(&self.device)?))
        } else if self.active_terms.h1_symmetric {
            Ok(Some(symmetric_couplings(&self.device)?))
        } else {
            Ok(None)
        }
    }

    /// Everything except `H0`, in the lab frame. Time independent at every level.
    pub fn coupling(&self) -> Result<Operator> {
        let dim = self.device.space()?.dim();
        let mut h = match self.couplings()? {
            Some(c) => match self.level {
                ApproximationLevel::SidebandRwa => coupling_rwa(&self.device, &c)?,
                level => coupling_full(&self.device, &c, level)?,
            },
            None => Operator::zeros(dim),
        };
        if self.active_terms.h2_capacitive {
            h.add_assign(&build_capacitive_h2(&self.device)?);
        }
        Ok(h)
    }

    /// Time-independent matrix form. In the rotating frame this exists only at
    /// `SidebandRwa`; use [`HamiltonianSpec::interaction_picture`] otherwise.
    pub fn build(&self) -> Result<Operator> {
        self.validate()?;
        let mut h = self.coupling()?;
        match self.frame {
            Frame::Lab => {
                if self.active_terms.h0 {
                    h.add_assign(&build_h0(&self.device)?);
                }
            }
            Frame::Rotating => {
                if self.level != ApproximationLevel::SidebandRwa {
                    return Err(Error::InvalidParameter(format!(
                        "rotating frame at level {} is time dependent",
                        self.level.tag()
                    )));
                }
            }
        }
        let frame = match self.frame {
            Frame::Lab => "lab",
            Frame::Rotating => "rotating",
        };
        Ok(h.with_label(format!("H[{},{}]", self.level.tag(), frame)))
    }

    /// `U0† (H − H0) U0` with `U0 = e^{−i H0 t}`.
    pub fn interaction_picture(&self) -> Result<InteractionPicture> {
        self.validate()?;
        InteractionPicture::new(h0_diagonal(&self.device)?, self.coupling()?)
    }
}

/// `V_I(t) = e^{iEt} V e^{−iEt}` for a diagonal `H0 = diag(E)`.
#[derive(Clone, Debug)]
pub struct InteractionPicture {
    energies: Vec<f64>,
    v: DMatrix<C64>,
}

impl InteractionPicture {
    pub fn new(energies: Vec<f64>, v: Operator) -> Result<Self> {
        if energies.len() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: energies.len(),
                actual: v.dim(),
            });
        }
        Ok(InteractionPicture {
            energies,
            v: v.into_matrix(),
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^{iH0 t}`, which maps a lab-frame propagator from 0 to `t` into this frame.
    pub fn frame_rotation(&self, t: f64) -> Operator {
        let d: Vec<C64> = self.energies.iter().map(|&e| C64::from_polar(1.0, e * t)).collect();
        Operator::from_diagonal(&d, "U0†")
    }

    /// Converts a lab-frame propagator over `[0, t]`.
    pub fn to_rotating(&self, u_lab: &Operator, t: f64) -> Result<Operator> {
        self.frame_rotation(t).try_mul(u_lab)
    }
}

impl TimeDependentHamiltonian for InteractionPicture {
    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn at(&self, t: f64) -> Operator {
        let n = self.energies.len();
        let m = DMatrix::from_fn(n, n, |r, c| {
            self.v[(r, c)] * C64::from_polar(1.0, (self.energies[r] - self.energies[c]) * t)
        });
        Operator::from_square(m, "V_I")
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let phases: Vec<C64> = self.energies.iter().map(|&e| C64::from_polar(1.0, e * t)).collect();
        let rotated: Vec<C64> = psi.iter().zip(&phases).map(|(p, ph)| p * ph.conj()).collect();
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (c, x) in rotated.iter().enumerate() {
                acc += self.v[(r, c)] * x;
            }
            *o = acc * phases[r];
        }
    }
}

/// Sub-block of `op` (built at truncation `big`) on the first `small` Fock levels.
pub fn restrict_fock(op: &Operator, n_qubits: usize, big: usize, small: usize) -> Result<Operator> {
    let big_space = ProductSpace::new(n_qubits, big)?;
    let small_space = ProductSpace::new(n_qubits, small)?;
    if op.dim() != big_space.dim() || small > big {
        return Err(Error::DimensionMismatch {
            expected: big_space.dim(),
            actual: op.dim(),
        });
    }
    let map: Vec<usize> = (0..small_space.dim())
        .map(|i| {
            let (bits, n) = small_space.decompose(i);
            big_space.index(&bits, n)
        })
        .collect();
    let m = DMatrix::from_fn(map.len(), map.len(), |r, c| op.get(map[r], map[c]));
    Ok(Operator::from_square(m, op.label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ej_symmetric, CavityParams, QubitParams};
    use crate::linalg::expm::eigenvalues;
    use crate::linalg::metrics::phase_invariant_fidelity;
    use crate::linalg::ops::{kron, number, sigma_minus, sigma_y, sigma_z};
    use crate::sampling::Halton;

    fn cavity(g: f64, n_ph: usize) -> CavityParams {
        CavityParams {
            nu: 1.0,
            g,
            n_ph,
            kappa: 0.0,
        }
    }

    fn device(qubits: Vec<QubitParams>, g: f64, n_ph: usize, ec: Option<f64>) -> DeviceModel {
        DeviceModel::new(qubits, cavity(g, n_ph), ec).unwrap()
    }

    fn qp(e_ch: f64, e_j1: f64, e_j2: f64, n_bar: f64, flux: f64) -> QubitParams {
        QubitParams::new(e_ch, e_j1, e_j2, n_bar, flux).unwrap()
    }

    fn diff(a: &Operator, b: &Operator) -> f64 {
        a.try_sub(b).unwrap().max_abs()
    }

    fn random_device(h: &mut Halton, n_qubits: usize, g: f64, n_ph: usize, symmetric: bool) -> DeviceModel {
        let qubits = (0..n_qubits)
            .map(|_| {
                let p = h.next_in(&[(5.0, 20.0), (0.1, 0.5), (0.1, 0.5), (-0.5, 1.5), (0.0, 1.0)]);
                let e_j2 = if symmetric { p[1] } else { p[2] };
                qp(p[0], p[1], e_j2, p[3], p[4])
            })
            .collect();
        device(qubits, g, n_ph, Some(0.3))
    }

    #[test]
    fn h0_degenerate_at_half_charge() {
        let d = device(vec![qp(4.0, 0.1, 0.1, 0.5, 0.0)], 0.0, 2, None);
        let ev = eigenvalues(&build_h0(&d).unwrap()).unwrap();
        let want = [0.5, 0.5, 1.5, 1.5];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn h0_ground_charge_energy() {
        let d = device(vec![qp(4.0, 0.1, 0.1, 1.0, 0.0)], 0.0, 2, None);
        let h = build_h0(&d).unwrap();
        let idx = d.space().unwrap().index(&[0], 0);
        assert!((h.get(idx, idx).re - 2.5).abs() < 1e-15);
    }

    #[test]
    fn h0_matches_kron_assembly() {
        let mut seq = Halton::new(5, 3);
        for _ in 0..5 {
            let d = random_device(&mut seq, 2, 0.05, 4, false);
            let id2 = Operator::identity(2);
            let idp = Operator::identity(4);
            let photon = number(4).unwrap().try_add(&idp.scale_re(0.5)).unwrap();
            let e0 = charging_bias(&d.qubits[0]);
            let e1 = charging_bias(&d.qubits[1]);
            let oracle = kron(&[&id2, &id2, &photon])
                .unwrap()
                .try_add(&kron(&[&sigma_z(), &id2, &idp]).unwrap().scale_re(e0))
                .unwrap()
                .try_add(&kron(&[&id2, &sigma_z(), &idp]).unwrap().scale_re(e1))
                .unwrap();
            assert!(diff(&build_h0(&d).unwrap(), &oracle) < 1e-14);
        }
    }

    #[test]
    fn hint_at_zero_coupling_is_sigma_x() {
        let d = device(vec![qp(10.0, 0.4, 0.4, 0.5, 0.2)], 0.0, 3, None);
        let e = ej_effective(&d.qubits[0]);
        let oracle = kron(&[&sigma_x(), &Operator::identity(3)]).unwrap().scale_re(-0.5 * e);
        assert!(diff(&build_hint_exact(&d).unwrap(), &oracle) < 1e-15);
    }

    #[test]
    fn hint_at_quarter_turn_beta_is_sigma_y() {
        // e_j2 = 0 and flux 1/2 gives β = π/2 exactly in the atan2 form.
        let d = device(vec![qp(10.0, 0.4, 0.0, 0.5, 0.5)], 0.0, 2, None);
        let q = d.qubits[0];
        assert!((beta_mixing(&q).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let e = ej_effective(&q);
        let oracle = kron(&[&sigma_y(), &Operator::identity(2)]).unwrap().scale_re(0.5 * e);
        assert!(diff(&build_hint_exact(&d).unwrap(), &oracle) < 1e-15);
    }

    fn taylor_hint(d: &DeviceModel) -> Operator {
        let q = d.qubits[0];
        let n = d.cavity.n_ph;
        let g = d.cavity.g;
        let x = annihilation(n).unwrap().try_add(&creation(n).unwrap()).unwrap();
        let x2 = x.try_mul(&x).unwrap();
        let photon = Operator::identity(n)
            .try_sub(&x.scale(I * g))
            .unwrap()
            .try_sub(&x2.scale_re(0.5 * g * g))
            .unwrap();
        let sp = sigma_plus().scale(C64::from_polar(1.0, -beta_mixing(&q).unwrap()));
        let t = kron(&[&sp, &photon]).unwrap();
        let s = kron(&[
            &sigma_minus().scale(C64::from_polar(1.0, beta_mixing(&q).unwrap())),
            &photon.dagger(),
        ])
        .unwrap();
        t.try_add(&s).unwrap().scale_re(-0.5 * ej_effective(&q))
    }

    #[test]
    fn hint_matches_second_order_taylor() {
        let q = qp(10.0, 0.5, 0.3, 0.5, 0.2);
        let err = |g: f64| {
            let d = device(vec![q], g, 8, None);
            let h = build_hint_exact(&d).unwrap();
            assert!(h.is_hermitian(1e-12));
            diff(&h, &taylor_hint(&d))
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 < 0.5 * ej_effective(&q) * 0.1f64.powi(3) * 30.0);
        let ratio = e1 / e2;
        assert!((6.0..10.0).contains(&ratio), "ratio {ratio}");
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
        (0..=n)
            .map(|i| {
                let binom = (0..n - i)
                    .map(|j| (n as f64 + alpha - j as f64) / (n - i - j) as f64)
                    .product::<f64>();
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * binom * x.powi(i as i32) / factorial(i)
            })
            .sum()
    }

    /// `⟨m| e^{−ig(a+a†)} |n⟩` for the untruncated oscillator.
    fn displacement_element(m: usize, n: usize, g: f64) -> C64 {
        let alpha = C64::new(0.0, -g);
        let x = g * g;
        let envelope = (-x / 2.0).exp();
        if m >= n {
            let k = m - n;
            (factorial(n) / factorial(m)).sqrt() * alpha.powu(k as u32) * envelope * laguerre(n, k as f64, x)
        } else {
            let k = n - m;
            (factorial(m) / factorial(n)).sqrt() * (-alpha.conj()).powu(k as u32) * envelope * laguerre(m, k as f64, x)
        }
    }

    #[test]
    fn displacement_low_block_matches_laguerre() {
        let g = 0.3;
        let d = displacement(24, g).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let err = (d.get(m, n) - displacement_element(m, n, g)).norm();
                assert!(err < 1e-13, "({m},{n}) err {err}");
            }
        }
    }

    #[test]
    fn sideband_matrix_elements() {
        let q = qp(2.0, 0.3, 0.2, 0.25, 0.3);
        let d = device(vec![q], 0.05, 5, None);
        let h = build_sideband_h(&d, 0, Sideband::Blue).unwrap();
        let s = d.space().unwrap();
        let pref = I * C64::from_polar(0.5 * 0.05 * ej_effective(&q), -beta_mixing(&q).unwrap());
        for n in 1..5 {
            let el = h.get(s.index(&[1], n - 1), s.index(&[0], n));
            assert!((el - pref * (n as f64).sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn red_sideband_sparsity() {
        let d = device(vec![qp(2.0, 0.3, 0.2, 0.75, 0.3)], 0.05, 5, None);
        let h = build_sideband_h(&d, 0, Sideband::Red).unwrap();
        let s = d.space().unwrap();
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                if h.get(r, c).norm() > 0.0 {
                    let (br, nr) = s.decompose(r);
                    let (bc, nc) = s.decompose(c);
                    let pair = (br[0], nr, bc[0], nc);
                    assert!(
                        (pair.0 == 1 && pair.2 == 0 && nr == nc + 1) || (pair.0 == 0 && pair.2 == 1 && nc == nr + 1),
                        "unexpected element {pair:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn blue_pi_pulse_transfers_population() {
        let q = qp(2.0, 0.3, 0.2, 0.25, 0.3);
        let d = device(vec![q], 0.05, 4, None);
        let h = build_sideband_h(&d, 0, Sideband::Blue).unwrap();
        let t = std::f64::consts::PI / (ej_effective(&q) * 0.05);
        let u = expm(&h, t).unwrap();
        let s = d.space().unwrap();
        let amp = u.get(s.index(&[1], 0), s.index(&[0], 1));
        assert!((amp.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sideband_requires_resonance() {
        let d = device(vec![qp(2.0, 0.3, 0.2, 0.5, 0.3)], 0.05, 4, None);
        assert!(matches!(
            build_sideband_h(&d, 0, Sideband::Blue),
            Err(Error::Resonance { qubit: 0, .. })
        ));
        assert!(build_rotating_ha_hb(&d, 0, RotatingTerm::B).is_err());
    }

    #[test]
    fn h1_decouples_at_half_flux() {
        let d = device(
            vec![qp(10.0, 0.4, 0.4, 0.5, 0.5), qp(10.0, 0.4, 0.4, 0.5, 0.1)],
            0.1,
            3,
            None,
        );
        let h = build_symmetric_h1(&d).unwrap();
        let only_second = build_symmetric_h1(&DeviceModel {
            qubits: vec![d.qubits[1], d.qubits[1]],
            ..d.clone()
        })
        .unwrap();
        let s = d.space().unwrap();
        // Qubit 0 never flips.
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                if s.qubit_bit(r, 0) != s.qubit_bit(c, 0) {
                    assert!(h.get(r, c).norm() < 1e-16);
                }
            }
        }
        assert!(only_second.max_abs() > 0.0);
    }

    #[test]
    fn h1_zero_coupling_form() {
        let d = device(vec![qp(10.0, 0.4, 0.4, 0.5, 0.7)], 0.0, 3, None);
        let e0 = ej_symmetric(0.4, 0.7);
        let oracle = kron(&[&sigma_x(), &Operator::identity(3)]).unwrap().scale_re(-0.5 * e0);
        assert!(diff(&build_symmetric_h1(&d).unwrap(), &oracle) < 1e-15);
    }

    #[test]
    fn h1_equals_hint_for_symmetric_devices() {
        let mut seq = Halton::new(5, 17);
        for _ in 0..10 {
            let d = random_device(&mut seq, 2, 0.07, 4, true);
            let h1 = build_symmetric_h1(&d).unwrap();
            // Signed E_J⁰ versus |E_J⁰|: flip each qubit past half flux.
            let mut hint = Operator::zeros(h1.dim());
            for k in 0..2 {
                let mut single = d.clone();
                for j in 0..2 {
                    if j != k {
                        single.qubits[j].flux_ratio = 0.5;
                    }
                }
                let sign = ej_symmetric(d.qubits[k].e_j1, d.qubits[k].flux_ratio).signum();
                hint.add_assign(&build_hint_exact(&single).unwrap().scale_re(sign));
            }
            assert!(diff(&h1, &hint) < 1e-13);
        }
    }

    #[test]
    fn h1_rejects_asymmetric() {
        let d = device(vec![qp(10.0, 0.4, 0.3, 0.5, 0.2)], 0.1, 3, None);
        assert!(build_symmetric_h1(&d).is_err());
    }

    #[test]
    fn h2_half_charge_entries() {
        let d = device(vec![qp(10.0, 0.1, 0.1, 0.5, 0.5); 2], 0.1, 2, Some(0.8));
        let h = build_capacitive_h2(&d).unwrap();
        let s = d.space().unwrap();
        for i in 0..h.dim() {
            let bits = s.decompose(i).0;
            let sign = if bits[0] == bits[1] { 1.0 } else { -1.0 };
            assert!((h.get(i, i).re - sign * 0.2).abs() < 1e-15);
        }
        assert!(
            h.try_sub(&Operator::from_diagonal(
                &(0..h.dim()).map(|i| h.get(i, i)).collect::<Vec<_>>(),
                ""
            ))
            .unwrap()
            .max_abs()
                == 0.0
        );
    }

    #[test]
    fn h2_zero_and_chain() {
        let d = device(vec![qp(10.0, 0.1, 0.1, 0.5, 0.5); 2], 0.1, 2, Some(0.0));
        assert_eq!(build_capacitive_h2(&d).unwrap().max_abs(), 0.0);
        let one = device(vec![qp(10.0, 0.1, 0.1, 0.5, 0.5)], 0.1, 2, Some(1.0));
        assert!(build_capacitive_h2(&one).is_err());

        // Chain of three with n̄ = 0: entry is n₁n₂ + n₂n₃.
        let d3 = device(vec![qp(10.0, 0.1, 0.1, 0.0, 0.5); 3], 0.1, 2, Some(1.0));
        let h = build_capacitive_h2(&d3).unwrap();
        let s = d3.space().unwrap();
        for i in 0..h.dim() {
            let b: Vec<f64> = s.decompose(i).0.iter().map(|&x| x as f64).collect();
            assert!((h.get(i, i).re - (b[0] * b[1] + b[1] * b[2])).abs() < 1e-15);
        }
    }

    #[test]
    fn ha_spectrum_and_hb_decoupling() {
        let e_ch = 4.0;
        let at_zero = device(vec![qp(e_ch, 0.3, 0.3, 0.5, 0.2)], 0.05, 3, None);
        let ha = build_rotating_ha_hb(&at_zero, 0, RotatingTerm::A).unwrap();
        let e0 = ej_symmetric(0.3, 0.2);
        let ev = eigenvalues(&ha).unwrap();
        assert_eq!(ev.len(), 6);
        for (i, v) in ev.iter().enumerate() {
            let want = if i < 3 { -e0.abs() } else { e0.abs() };
            assert!((v - want).abs() < 1e-14);
        }
        let blue = crate::device::n_bar_for_bias(e_ch, Sideband::Blue.resonant_bias(1.0));
        let decoupled = device(vec![qp(e_ch, 0.3, 0.3, blue, 0.5)], 0.05, 3, None);
        assert!(build_rotating_ha_hb(&decoupled, 0, RotatingTerm::B).unwrap().max_abs() < 1e-17);
    }

    #[test]
    fn hb_rabi_frequency() {
        let e_ch = 4.0;
        let blue = crate::device::n_bar_for_bias(e_ch, Sideband::Blue.resonant_bias(1.0));
        let g = 0.05;
        let d = device(vec![qp(e_ch, 0.3, 0.3, blue, 0.2)], g, 3, None);
        let hb = build_rotating_ha_hb(&d, 0, RotatingTerm::B).unwrap();
        let s = d.space().unwrap();
        let (i01, i10) = (s.index(&[0], 1), s.index(&[1], 0));
        let block = Operator::from_rows(
            2,
            &[hb.get(i01, i01), hb.get(i01, i10), hb.get(i10, i01), hb.get(i10, i10)],
            "",
        )
        .unwrap();
        let ev = eigenvalues(&block).unwrap();
        let gamma = g * ej_symmetric(0.3, 0.2) / 2.0;
        assert!((ev[0] + gamma).abs() < 1e-15 && (ev[1] - gamma).abs() < 1e-15);
    }

    #[test]
    fn every_builder_is_hermitian() {
        let mut seq = Halton::new(5, 23);
        for _ in 0..6 {
            let d = random_device(&mut seq, 2, 0.08, 4, true);
            for h in [
                build_h0(&d),
                build_hint_exact(&d),
                build_hint_lamb_dicke(&d),
                build_symmetric_h1(&d),
                build_capacitive_h2(&d),
            ] {
                assert!(h.unwrap().is_hermitian(1e-12));
            }
        }
        let blue = crate::device::n_bar_for_bias(4.0, -0.5);
        let d = device(vec![qp(4.0, 0.3, 0.3, blue, 0.2)], 0.05, 3, None);
        assert!(build_sideband_h(&d, 0, Sideband::Blue).unwrap().is_hermitian(1e-12));
        assert!(build_rotating_ha_hb(&d, 0, RotatingTerm::B)
            .unwrap()
            .is_hermitian(1e-12));
    }

    #[test]
    fn truncation_consistency() {
        let blue = crate::device::n_bar_for_bias(4.0, -0.5);
        let q = vec![qp(4.0, 0.3, 0.3, blue, 0.2), qp(4.0, 0.3, 0.3, 0.5, 0.35)];
        let small = device(q.clone(), 0.05, 6, Some(0.4));
        let big = device(q, 0.05, 8, Some(0.4));
        type Builder = fn(&DeviceModel) -> Result<Operator>;
        let exact_builders: [Builder; 5] = [
            build_h0,
            build_hint_lamb_dicke,
            build_capacitive_h2,
            |d| build_sideband_h(d, 0, Sideband::Blue),
            |d| build_rotating_ha_hb(d, 0, RotatingTerm::B),
        ];
        for b in exact_builders {
            let r = restrict_fock(&b(&big).unwrap(), 2, 8, 6).unwrap();
            assert_eq!(diff(&r, &b(&small).unwrap()), 0.0);
        }
        let ha_small = build_rotating_ha_hb(&small.with_qubit_controls(1, 0.5, 0.35).unwrap(), 1, RotatingTerm::A);
        let ha_big = build_rotating_ha_hb(&big, 1, RotatingTerm::A).unwrap();
        assert_eq!(diff(&restrict_fock(&ha_big, 2, 8, 6).unwrap(), &ha_small.unwrap()), 0.0);

        // The truncated displacement differs near the cut; low Fock levels agree closely.
        for b in [build_hint_exact as Builder, build_symmetric_h1] {
            let r = restrict_fock(&b(&big).unwrap(), 2, 8, 6).unwrap();
            let s = b(&small).unwrap();
            let low = restrict_fock(&r, 2, 6, 2).unwrap();
            let low_small = restrict_fock(&s, 2, 6, 2).unwrap();
            assert!(diff(&low, &low_small) < 1e-10, "{}", diff(&low, &low_small));
            assert!(diff(&r, &s) < 0.01);
        }
    }

    /// Worst phase-invariant infidelity between the exact rotating-frame
    /// propagator and the sideband propagator over one Rabi period.
    fn hierarchy_infidelity(g: f64) -> f64 {
        let e_ch = 1.0;
        let n_bar = crate::device::n_bar_for_bias(e_ch, Sideband::Blue.resonant_bias(1.0));
        let q = qp(e_ch, 1.2e-6, 0.8e-6, n_bar, 0.25);
        let d = device(vec![q], g, 6, None);
        let spec = HamiltonianSpec::new(
            d.clone(),
            ApproximationLevel::Exact,
            Frame::Lab,
            ActiveTerms::ASYMMETRIC,
        )
        .unwrap();
        let period = 2.0 * std::f64::consts::PI / (ej_effective(&q) * g);
        let u_lab = expm(&spec.build().unwrap(), period).unwrap();
        let u_rot = spec.interaction_picture().unwrap().to_rotating(&u_lab, period).unwrap();
        let u_sb = expm(&build_sideband_h(&d, 0, Sideband::Blue).unwrap(), period).unwrap();
        1.0 - phase_invariant_fidelity(&u_rot, &u_sb).unwrap()
    }

    #[test]
    fn eigensolver_handles_near_degenerate_sideband_pairs() {
        // Splittings of ~1e-7 on an O(1) spectrum once defeated the complex solver.
        for g in [0.04, 0.05] {
            let d = device(vec![qp(1.0, 1e-6, 1e-6, 0.0, 0.0)], g, 6, None);
            let spec = HamiltonianSpec::new(d, ApproximationLevel::Exact, Frame::Lab, ActiveTerms::SYMMETRIC).unwrap();
            let h = spec.build().unwrap();
            let sp = crate::linalg::expm::Spectral::new(&h).unwrap();
            let v = sp.eigenvectors();
            let lam = DMatrix::from_diagonal(&sp.eigenvalues().map(|x| C64::new(x, 0.0)));
            let res = (h.matrix() * v - v * lam).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(res < 1e-13, "g = {g}: residual {res:e}");
            assert!(sp.propagator(1e8).is_unitary(1e-12));
        }
    }

    /// Fitted once as `max_g (1 − F)/g²` over the grid below.
    const HIERARCHY_C: f64 = 0.0743;

    #[test]
    fn approximation_hierarchy() {
        let grid = [0.01, 0.02, 0.03, 0.05];
        let ratios: Vec<f64> = grid.iter().map(|&g| hierarchy_infidelity(g) / (g * g)).collect();
        let fitted = ratios.iter().cloned().fold(0.0, f64::max);
        assert!((fitted - HIERARCHY_C).abs() < 0.02 * HIERARCHY_C, "fitted c = {fitted}");
        for (g, r) in grid.iter().zip(&ratios) {
            assert!(*r <= HIERARCHY_C * 1.02, "g = {g}: {r}");
        }
        // The leading error is second order in the Rabi-rate correction.
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    }
}
