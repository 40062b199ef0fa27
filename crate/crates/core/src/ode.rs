//! Adaptive Dormand–Prince 5(4) integration for complex-valued systems.
//!
//! Step acceptance uses error per unit step: a step of length `h` over a span
//! `T` may contribute at most `tol · h / T` of local error, so the accumulated
//! error over the whole span stays of order `tol` for norm-preserving flows.

use crate::error::{Error, Result};
use crate::linalg::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub tol: f64,
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Last accepted step, a good starting guess for a continuation.
    pub last_step: f64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Dopri5 {
            tol,
            max_steps: 50_000_000,
        })
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place. `h_hint` seeds
    /// the first trial step.
    pub fn integrate<F>(&self, mut f: F, t0: f64, t1: f64, y: &mut [C64], h_hint: Option<f64>) -> Result<StepStats>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut stats = StepStats::default();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(stats);
        }
        if !(span > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integration span must be positive: [{t0}, {t1}]"
            )));
        }
        let n = y.len();
        let mut k1 = vec![C64::default(); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut k5 = k1.clone();
        let mut k6 = k1.clone();
        let mut k7 = k1.clone();
        let mut tmp = k1.clone();
        let mut y_new = k1.clone();

        let mut t = t0;
        let mut h = h_hint.filter(|h| *h > 0.0).unwrap_or(span * 1e-3).min(span);
        let h_min = 1e-14 * t0.abs().max(t1.abs()).max(span);
        f(t, y, &mut k1);

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            let last = t + h >= t1 || t1 - (t + h) < h_min;
            if last {
                h = t1 - t;
            }
            let hc = C64::new(h, 0.0);

            for i in 0..n {
                tmp[i] = y[i] + hc * (A21 * k1[i]);
            }
            f(t + C2 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + hc * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + hc * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * h, &tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + hc * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * h, &tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i] + hc * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + h, &tmp, &mut k6);
            for i in 0..n {
                y_new[i] = y[i] + hc * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(t + h, &y_new, &mut k7);

            let mut err_ratio: f64 = 0.0;
            for i in 0..n {
                let e = (hc * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])).norm();
                let sc = self.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                err_ratio = err_ratio.max(e / sc);
            }
            // error per unit step
            err_ratio *= span / h;
            if !err_ratio.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite derivative".into(),
                });
            }

            if err_ratio <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&y_new);
                std::mem::swap(&mut k1, &mut k7);
                stats.accepted += 1;
                stats.last_step = h;
                if last {
                    return Ok(stats);
                }
                let factor = if err_ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * err_ratio.powf(-0.25)).clamp(0.2, 5.0)
                };
                h *= factor;
            } else {
                stats.rejected += 1;
                h *= (0.9 * err_ratio.powf(-0.25)).clamp(0.1, 0.9);
            }
            if h < h_min {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ode = Dopri5::new(1e-10).unwrap();
        let mut y = [C64::new(1.0, 0.0)];
        ode.integrate(|_, y, dy| dy[0] = -y[0], 0.0, 3.0, &mut y, None).unwrap();
        assert!((y[0].re - (-3f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn complex_rotation_keeps_modulus() {
        let ode = Dopri5::new(1e-9).unwrap();
        let mut y = [C64::new(1.0, 0.0)];
        ode.integrate(|_, y, dy| dy[0] = C64::new(0.0, -5.0) * y[0], 0.0, 20.0, &mut y, None)
            .unwrap();
        assert!((y[0].norm() - 1.0).abs() < 1e-8);
        assert!((y[0] - C64::from_polar(1.0, -100.0)).norm() < 1e-8);
    }

    #[test]
    fn blow_up_reports_failure() {
        let ode = Dopri5::new(1e-8).unwrap();
        let mut y = [C64::new(1.0, 0.0)];
        let err = ode
            .integrate(|_, y, dy| dy[0] = y[0] * y[0], 0.0, 2.0, &mut y, None)
            .unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(Dopri5::new(0.0).is_err());
        assert!(Dopri5::new(f64::NAN).is_err());
    }
}
