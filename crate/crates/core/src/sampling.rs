//! Deterministic low-discrepancy inputs for property checks and audits.
//!
//! Nothing in the crate draws random numbers. Every "random" parameter tuple
//! comes from a Halton sequence whose starting offset acts as the seed.

use std::f64::consts::PI;

use crate::linalg::C64;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Seed used for the Bloch-sphere grid of state-mapping tests.
pub const BLOCH_GRID_SEED: u64 = 7;

#[derive(Clone, Debug)]
pub struct Halton {
    dims: usize,
    index: u64,
}

impl Halton {
    /// `dims` ≤ 16 coordinates per point; `seed` is the number of leading
    /// points skipped (plus one, so the all-zero point never appears).
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims >= 1 && dims <= PRIMES.len(), "Halton dimension out of range");
        Halton { dims, index: seed + 1 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        PRIMES[..self.dims].iter().map(|&b| radical_inverse(i, b)).collect()
    }

    /// Next point mapped affinely onto `[lo, hi]` per coordinate.
    pub fn next_in(&mut self, bounds: &[(f64, f64)]) -> Vec<f64> {
        assert_eq!(bounds.len(), self.dims);
        self.next_point()
            .into_iter()
            .zip(bounds)
            .map(|(u, (lo, hi))| lo + (hi - lo) * u)
            .collect()
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// `count` normalized qubit amplitudes `(α, β)` spread over the Bloch sphere.
pub fn bloch_grid(count: usize, seed: u64) -> Vec<(C64, C64)> {
    let mut h = Halton::new(2, seed);
    (0..count)
        .map(|_| {
            let p = h.next_point();
            let theta = (1.0 - 2.0 * p[0]).acos();
            let phi = 2.0 * PI * p[1];
            (
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            )
        })
        .collect()
}
