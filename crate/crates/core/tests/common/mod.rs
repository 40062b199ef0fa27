#![allow(dead_code)]

use chargecav::device::{n_bar_for_bias, CavityParams, DeviceModel, QubitParams};
use chargecav::hamiltonian::Sideband;
use chargecav::linalg::ops::ProductSpace;
use chargecav::{Operator, StateVector, C64};

pub fn cavity(g: f64, n_ph: usize) -> CavityParams {
    CavityParams {
        nu: 1.0,
        g,
        n_ph,
        kappa: 0.0,
    }
}

pub fn qubit(e_ch: f64, e_j1: f64, e_j2: f64, n_bar: f64, flux: f64) -> QubitParams {
    QubitParams::new(e_ch, e_j1, e_j2, n_bar, flux).unwrap()
}

pub fn device(qubits: Vec<QubitParams>, g: f64, n_ph: usize, ec: Option<f64>) -> DeviceModel {
    DeviceModel::new(qubits, cavity(g, n_ph), ec).unwrap()
}

/// Weakly coupled symmetric qubit parked at the blue-sideband bias.
pub fn swap_device(n_qubits: usize, g: f64, n_ph: usize) -> DeviceModel {
    let e_ch = 1.0;
    let n_bar = n_bar_for_bias(e_ch, Sideband::Blue.resonant_bias(1.0));
    device(vec![qubit(e_ch, 1e-6, 1e-6, n_bar, 0.0); n_qubits], g, n_ph, None)
}

/// `Σ amps[i] |basis[i]⟩`.
pub fn superpose(space: &ProductSpace, terms: &[(C64, &[u8], usize)]) -> StateVector {
    let mut v = vec![C64::new(0.0, 0.0); space.dim()];
    for (a, bits, n) in terms {
        v[space.index(bits, *n)] += *a;
    }
    StateVector::new(v).unwrap()
}

pub fn max_diff(a: &Operator, b: &Operator) -> f64 {
    a.try_sub(b).unwrap().max_abs()
}
