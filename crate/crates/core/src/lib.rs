//! Simulation of Josephson charge qubits coupled through a single-mode
//! microwave cavity, with sideband gate construction, gate auditing, and a
//! two-cavity state-transfer engine.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod device;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod ode;
pub mod sampling;
pub mod transfer;

pub use error::{Error, Result};
pub use linalg::{Operator, StateVector, C64};
