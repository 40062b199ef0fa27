//! State-mapping fidelities of swap operations over a Bloch-sphere grid.

use nalgebra::DVector;

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::hamiltonian::{ApproximationLevel, Frame};
use crate::linalg::ops::ProductSpace;
use crate::linalg::{Operator, StateVector, C64};
use crate::sampling::bloch_grid;

use super::schedule::{run_schedule, swap_pulse, Schedule};

/// Where a qubit state starts and where it should end up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mapping {
    /// `(α|0_k⟩ + β|1_k⟩)|0⟩_ph → |0_k⟩(α|0⟩ + β|1⟩)_ph`.
    QubitToPhoton { qubit: usize },
    /// `(α|0_from⟩ + β|1_from⟩)|0_to⟩ → |0_from⟩(α|0_to⟩ + β|1_to⟩)`, cavity in vacuum.
    QubitToQubit { from: usize, to: usize },
}

impl Mapping {
    fn check(&self, space: &ProductSpace) -> Result<()> {
        match *self {
            Mapping::QubitToPhoton { qubit } => space.check_qubit(qubit),
            Mapping::QubitToQubit { from, to } => {
                space.check_qubit(from)?;
                space.check_qubit(to)?;
                if from == to {
                    return Err(Error::InvalidParameter(format!("qubits must differ (both {from})")));
                }
                Ok(())
            }
        }
    }

    fn pair(&self, space: &ProductSpace, alpha: C64, beta: C64) -> (StateVector, StateVector) {
        let n = space.n_qubits;
        let ket = |set: &[usize], photons: usize| {
            let mut bits = vec![0u8; n];
            for &k in set {
                bits[k] = 1;
            }
            space.index(&bits, photons)
        };
        let mut input = vec![C64::default(); space.dim()];
        let mut target = input.clone();
        match *self {
            Mapping::QubitToPhoton { qubit } => {
                input[ket(&[], 0)] += alpha;
                input[ket(&[qubit], 0)] += beta;
                target[ket(&[], 0)] += alpha;
                target[ket(&[], 1)] += beta;
            }
            Mapping::QubitToQubit { from, to } => {
                input[ket(&[], 0)] += alpha;
                input[ket(&[from], 0)] += beta;
                target[ket(&[], 0)] += alpha;
                target[ket(&[to], 0)] += beta;
            }
        }
        (
            StateVector::from_dvector(DVector::from_vec(input)),
            StateVector::from_dvector(DVector::from_vec(target)),
        )
    }
}

/// Worst-case fidelity of `u` against `mapping` over `points` Bloch-grid
/// states drawn with `seed`.
pub fn worst_mapping_fidelity(
    u: &Operator,
    space: &ProductSpace,
    mapping: Mapping,
    points: usize,
    seed: u64,
) -> Result<f64> {
    mapping.check(space)?;
    if u.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            actual: u.dim(),
        });
    }
    let mut worst: f64 = 1.0;
    for (a, b) in bloch_grid(points, seed) {
        let (input, target) = mapping.pair(space, a, b);
        worst = worst.min(u.apply(&input)?.fidelity(&target)?);
    }
    Ok(worst)
}

/// Rotating-frame propagator of a single qubit-to-photon swap pulse on qubit
/// `k`, simulated at `level`.
pub fn simulated_swap(device: &DeviceModel, k: usize, n_winding: i64, level: ApproximationLevel) -> Result<Operator> {
    let seg = swap_pulse(device, k, n_winding, Frame::Rotating, level)?;
    let (out, _) = run_schedule(&Schedule::new(vec![seg]), device)?;
    out.propagator()
        .cloned()
        .ok_or_else(|| Error::InvalidParameter("schedule without initial state returns a propagator".into()))
}
