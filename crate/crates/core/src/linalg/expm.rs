//! Propagators of hermitian generators via eigendecomposition.

use nalgebra::{DMatrix, DVector};

use super::{Operator, C64};
use crate::error::{Error, Result};

/// Relative hermiticity tolerance accepted by [`expm`].
pub const EXPM_HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition `H = V diag(λ) V†` of a hermitian operator, reusable
/// for propagators at many times.
#[derive(Clone, Debug)]
pub struct Spectral {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

/// Sweep limit for [`jacobi_eigen`]; convergence is quadratic, so hitting it
/// signals non-finite input.
const MAX_SWEEPS: usize = 60;

/// Cyclic Jacobi diagonalisation of a hermitian matrix.
///
/// nalgebra's `symmetric_eigen` loses accuracy on spectra with clustered or
/// repeated eigenvalues (residuals up to 1e-9 on 12×12 inputs, and wrong
/// eigenvectors for complex input), which long propagation times amplify.
/// Jacobi rotations are backward stable to machine precision.
fn jacobi_eigen(mut a: DMatrix<C64>) -> Result<(DVector<f64>, DMatrix<C64>)> {
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !scale.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entries".into()));
    }
    let threshold = f64::EPSILON * f64::EPSILON * scale * scale;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum();
        if off <= threshold {
            let eigenvalues = DVector::from_fn(n, |k, _| a[(k, k)].re);
            return Ok((eigenvalues, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [−s e^{−iφ}, c e^{−iφ}]] on the (p, q) plane.
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for r in 0..n {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = x * c + y * gqp;
                    a[(r, q)] = x * s + y * gqq;
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = x * c + y * gqp;
                    v[(r, q)] = x * s + y * gqq;
                }
                for col in 0..n {
                    let (x, y) = (a[(p, col)], a[(q, col)]);
                    a[(p, col)] = x * c + y * gqp.conj();
                    a[(q, col)] = x * s + y * gqq.conj();
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    Err(Error::InvalidParameter(format!(
        "eigensolver did not converge in {MAX_SWEEPS} sweeps"
    )))
}

impl Spectral {
    pub fn new(h: &Operator) -> Result<Self> {
        let scale = h.max_abs().max(1.0);
        let deviation = h.hermiticity_error();
        if deviation > EXPM_HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let (eigenvalues, eigenvectors) = jacobi_eigen(h.hermitized().into_matrix())?;
        Ok(Spectral {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    /// Ascending eigenvalues.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `exp(-iHt)`.
    pub fn propagator(&self, t: f64) -> Operator {
        let phases = self.eigenvalues.map(|l| C64::from_polar(1.0, -l * t));
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Operator::from_square(scaled * v.adjoint(), "U")
    }
}

/// `exp(-iHt)` for hermitian `H` (ħ = 1).
pub fn expm(h: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time {t}")));
    }
    let label = format!("exp(-i{}t)", h.label());
    Ok(Spectral::new(h)?.propagator(t).with_label(label))
}

/// Ascending real spectrum of a hermitian operator.
pub fn eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    Ok(Spectral::new(h)?.sorted_eigenvalues())
}
