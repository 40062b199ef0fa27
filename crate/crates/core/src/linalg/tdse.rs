//! Time-dependent Schrödinger integration, `i dψ/dt = H(t) ψ`.

use nalgebra::DVector;

use super::expm::EXPM_HERMITIAN_TOL;
use super::{Operator, StateVector, C64};
use crate::error::{Error, Result};
use crate::ode::Dopri5;

/// A time-indexed hermitian generator.
pub trait TimeDependentHamiltonian {
    fn dim(&self) -> usize;

    /// Dense matrix at time `t`.
    fn at(&self, t: f64) -> Operator;

    /// `out = H(t) ψ`. Implementors with structure may override.
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let h = self.at(t);
        let v = h.matrix() * DVector::from_column_slice(psi);
        out.copy_from_slice(v.as_slice());
    }
}

/// Wraps a closure `t ↦ H(t)`.
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> Operator> FnHamiltonian<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnHamiltonian { dim, f }
    }
}

impl<F: Fn(f64) -> Operator> TimeDependentHamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> Operator {
        (self.f)(t)
    }
}

impl TimeDependentHamiltonian for Operator {
    fn dim(&self) -> usize {
        Operator::dim(self)
    }

    fn at(&self, _t: f64) -> Operator {
        self.clone()
    }

    fn apply(&self, _t: f64, psi: &[C64], out: &mut [C64]) {
        let m = self.matrix();
        for (r, o) in out.iter_mut().enumerate() {
            *o = m.row(r).iter().zip(psi).map(|(a, b)| a * b).sum();
        }
    }
}

/// Evolves `psi0` from `t0` to `t1`. No renormalization is applied; the
/// norm drift of the result is a diagnostic of the integration error.
pub fn integrate_tdse<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<StateVector> {
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("t1 must exceed t0: [{t0}, {t1}]")));
    }
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            actual: psi0.dim(),
        });
    }
    for t in [t0, 0.5 * (t0 + t1), t1] {
        let ht = h.at(t);
        let deviation = ht.hermiticity_error();
        if deviation > EXPM_HERMITIAN_TOL * ht.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
    }
    let ode = Dopri5::new(tol)?;
    let mut y: Vec<C64> = psi0.as_slice().to_vec();
    let minus_i = C64::new(0.0, -1.0);
    ode.integrate(
        |t, psi, dpsi| {
            h.apply(t, psi, dpsi);
            for d in dpsi.iter_mut() {
                *d *= minus_i;
            }
        },
        t0,
        t1,
        &mut y,
        None,
    )?;
    Ok(StateVector::from_dvector(DVector::from_vec(y)).with_norm_tolerance(psi0.norm_tolerance()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm::expm;
    use crate::linalg::ops::{sigma_x, sigma_z};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn rabi_half_period() {
        let psi0 = StateVector::basis(2, 0).unwrap();
        let tol = 1e-10;
        let psi = integrate_tdse(&sigma_x(), &psi0, 0.0, FRAC_PI_2, tol).unwrap();
        assert!(psi.amplitude(0).norm() < 10.0 * tol);
        assert!((psi.amplitude(1) - C64::new(0.0, -1.0)).norm() < 10.0 * tol);
    }

    #[test]
    fn zero_hamiltonian_leaves_state() {
        let psi0 = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let psi = integrate_tdse(&Operator::zeros(2), &psi0, 0.0, 5.0, 1e-10).unwrap();
        assert_eq!(psi.as_slice(), psi0.as_slice());
    }

    /// Fine-step midpoint product of exact exponentials, second order in the
    /// slice width.
    fn piecewise_oracle(h: &dyn Fn(f64) -> Operator, psi0: &StateVector, t1: f64, slices: usize) -> StateVector {
        let dt = t1 / slices as f64;
        let mut psi = psi0.clone();
        for s in 0..slices {
            let tm = (s as f64 + 0.5) * dt;
            psi = expm(&h(tm), dt).unwrap().apply(&psi).unwrap();
        }
        psi
    }

    #[test]
    fn linear_ramp_matches_piecewise_product() {
        let ramp = |t: f64| {
            sigma_x()
                .scale_re(1.0 + 0.3 * t)
                .try_add(&sigma_z().scale_re(0.5 - 0.2 * t))
                .unwrap()
        };
        let h = FnHamiltonian::new(2, ramp);
        let psi0 = StateVector::basis(2, 0).unwrap();
        let tol = 1e-9;
        let psi = integrate_tdse(&h, &psi0, 0.0, 2.0, tol).unwrap();
        // midpoint rule error ~ dt², so 40k slices sit well below 10·tol
        let oracle = piecewise_oracle(&ramp, &psi0, 2.0, 40_000);
        let diff = (psi.amplitudes() - oracle.amplitudes()).camax();
        assert!(diff < 10.0 * tol, "diff {diff}");
        assert!((psi.norm_sqr() - 1.0).abs() < 10.0 * tol);
    }

    #[test]
    fn constant_generator_matches_expm() {
        let h = sigma_x().scale_re(0.7).try_add(&sigma_z().scale_re(-1.3)).unwrap();
        let psi0 = StateVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let tol = 1e-10;
        let psi = integrate_tdse(&h, &psi0, 0.0, 7.5, tol).unwrap();
        let exact = expm(&h, 7.5).unwrap().apply(&psi0).unwrap();
        assert!((psi.amplitudes() - exact.amplitudes()).camax() < 10.0 * tol);
    }

    #[test]
    fn rejects_reversed_interval() {
        let psi0 = StateVector::basis(2, 0).unwrap();
        assert!(integrate_tdse(&sigma_x(), &psi0, 1.0, 0.0, 1e-8).is_err());
    }
}
