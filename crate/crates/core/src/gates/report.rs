use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::metrics::{extract_block, makhlin_invariants, overlap_fidelity, UNITARY_TOL};
use crate::linalg::{Operator, C64, ONE, ZERO};

/// Audit of a two-qubit gate restricted to a 4-dimensional computational block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub target_name: String,
    /// Phase-invariant fidelity of the block against the named target.
    pub fidelity: f64,
    pub leakage: f64,
    pub makhlin_g1_re: f64,
    pub makhlin_g1_im: f64,
    pub makhlin_g2: f64,
}

impl GateReport {
    /// Audits `u` on the basis states `keep` against `target`.
    pub fn audit(u: &Operator, keep: &[usize], target_name: &str, target: &Operator) -> Result<(Operator, GateReport)> {
        let (block, leakage) = extract_block(u, keep)?;
        if block.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                actual: block.dim(),
            });
        }
        let fidelity = overlap_fidelity(&block, target);
        let (g1, g2) = if block.dim() == 4 {
            makhlin_invariants(&polar_factor(&block))?
        } else {
            (C64::new(f64::NAN, f64::NAN), f64::NAN)
        };
        let report = GateReport {
            target_name: target_name.to_string(),
            fidelity,
            leakage,
            makhlin_g1_re: g1.re,
            makhlin_g1_im: g1.im,
            makhlin_g2: g2,
        };
        Ok((block, report))
    }

    pub fn g1(&self) -> C64 {
        C64::new(self.makhlin_g1_re, self.makhlin_g1_im)
    }

    /// Distance of the invariants from another class, `max(|ΔG1|, |ΔG2|)`.
    pub fn invariant_distance(&self, g1: C64, g2: f64) -> f64 {
        (self.g1() - g1).norm().max((self.makhlin_g2 - g2).abs())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Nearest unitary to a (possibly leaky) block.
fn polar_factor(block: &Operator) -> Operator {
    if block.is_unitary(UNITARY_TOL) {
        return block.clone();
    }
    let svd = block.matrix().clone().svd(true, true);
    let u = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    Operator::from_square(u, block.label())
}

/// Standard CNOT, control on the more significant qubit.
pub fn cnot_matrix() -> Operator {
    let mut e = vec![ZERO; 16];
    e[0] = ONE;
    e[5] = ONE;
    e[11] = ONE;
    e[14] = ONE;
    Operator::from_rows(4, &e, "CNOT").expect("4x4")
}

/// `diag(1, 1, 1, −1)`.
pub fn cz_matrix() -> Operator {
    Operator::from_diagonal(&[ONE, ONE, ONE, -ONE], "CZ")
}
