//! Deterministic synthesis of random trigonometric test fields.
//!
//! Uses a counter-based SplitMix64 stream so a `(seed, counter)` pair fully
//! determines every generated field, independent of call order or platform.

use num_complex::Complex64;

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

/// Counter-based SplitMix64 generator.
#[derive(Clone, Debug)]
pub struct Counter {
    seed: u64,
    counter: u64,
}

impl Counter {
    pub fn new(seed: u64) -> Self {
        Counter { seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        let mut z = self
            .seed
            .wrapping_add(self.counter.wrapping_mul(0x9e3779b97f4a7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Random real trig polynomial with modes `max_i |k_i| <= kmax`, coefficients
/// uniform in a disc of radius `amp`, zero mean.
pub fn random_scalar(grid: Grid, rng: &mut Counter, kmax: i64, amp: f64) -> ScalarField {
    let kmax = kmax.min(grid.n() as i64 / 2 - 1);
    let mut modes = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            for k3 in -kmax..=kmax {
                if (k1, k2, k3) == (0, 0, 0) {
                    continue;
                }
                // take one representative per conjugate pair
                if (k1, k2, k3) < (-k1, -k2, -k3) {
                    continue;
                }
                let c = Complex64::new(rng.next_f64(), rng.next_f64()) * (0.5 * amp);
                modes.push(([k1, k2, k3], c));
            }
        }
    }
    ScalarField::from_modes(grid, &modes)
}

/// Random mean-zero vector field, componentwise via [`random_scalar`].
pub fn random_vector(grid: Grid, rng: &mut Counter, kmax: i64, amp: f64) -> VectorField {
    VectorField::new(
        random_scalar(grid, rng, kmax, amp),
        random_scalar(grid, rng, kmax, amp),
        random_scalar(grid, rng, kmax, amp),
    )
}
