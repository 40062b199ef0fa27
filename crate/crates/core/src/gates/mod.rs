//! Ideal gates, their audits, and pulse-level schedules.

pub mod cnot;
pub mod mapping;
pub mod phase;
pub mod report;
pub mod schedule;
pub mod sideband;
pub mod single;

pub use cnot::{cnot_beta_sweep, cnot_composition, cnot_with_beta, CnotVariant};
pub use phase::{conditional_phase, phase_nontriviality};
pub use report::GateReport;
pub use schedule::{run_schedule, Diagnostics, Method, PulseSegment, Schedule, ScheduleOutput};
pub use sideband::{r_sideband, swap_qubit_photon, swap_qubit_qubit, u_kp};
pub use single::{axis_from_params, decoupled_qubit_h, noncommuting_pair_check, u_single};
