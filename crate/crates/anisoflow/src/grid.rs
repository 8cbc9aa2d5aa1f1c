//! Uniform periodic grid on the unit 3-torus T^3 = [0,1)^3.
//!
//! The grid is cubic with `n` points per dimension (a power of two, at least 4)
//! and unit period, so the spectral derivative symbol is `2*pi*i*k` with integer
//! wavenumbers `k` in `{-n/2, ..., n/2-1}` per dimension.

use crate::error::{Error, Result};

/// Cubic periodic grid descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// Create a grid with `n` points per dimension; `n` must be a power of two >= 4.
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Grid { n })
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, n^3.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer wavenumber for an array index along any axis:
    /// indices `0..n/2` map to `0..n/2`, indices `n/2..n` map to `-n/2..0`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        debug_assert!(idx < self.n);
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Array index holding wavenumber `k` (taken modulo n).
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.n as i64;
        (k.rem_euclid(n)) as usize
    }

    /// Largest wavenumber magnitude kept by the 2/3 dealiasing rule:
    /// coefficients with `max_i |k_i| > n/3` are zeroed. Since `n` is a power
    /// of two, `n` is never divisible by 3 and `floor(n/3)` is alias-safe for
    /// quadratic products of kept modes.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// The Nyquist wavenumber `-n/2` (only the negative one is representable).
    pub fn nyquist(&self) -> i64 {
        -((self.n / 2) as i64)
    }

    /// Wavenumber triple as seen by the derivative operators: identical to
    /// [`Grid::wavevector`] except that the unpaired Nyquist wavenumber is
    /// treated as 0, matching `ScalarField::derivative`. Operator symbols are
    /// built from this so that symbol-side and derivative-side assemblies of
    /// the same identity agree exactly.
    pub fn wavevector_eff(&self, idx: (usize, usize, usize)) -> [i64; 3] {
        let nyq = self.nyquist();
        let mut k = self.wavevector(idx);
        for c in k.iter_mut() {
            if *c == nyq {
                *c = 0;
            }
        }
        k
    }

    /// Wavenumber triple for a flat `(i1, i2, i3)` array index.
    pub fn wavevector(&self, idx: (usize, usize, usize)) -> [i64; 3] {
        [
            self.wavenumber(idx.0),
            self.wavenumber(idx.1),
            self.wavenumber(idx.2),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_powers_of_two() {
        for n in [4, 8, 16, 32, 64] {
            assert!(Grid::new(n).is_ok());
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        for n in [0, 1, 2, 3, 5, 6, 12, 24, 100] {
            assert!(Grid::new(n).is_err(), "n={n} should be rejected");
        }
    }

    #[test]
    fn wavenumber_layout() {
        let g = Grid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for i in 0..8 {
            assert_eq!(g.index_of(g.wavenumber(i)), i);
        }
        assert_eq!(g.nyquist(), -4);
    }

    #[test]
    fn dealias_cutoff_values() {
        assert_eq!(Grid::new(4).unwrap().dealias_cutoff(), 1);
        assert_eq!(Grid::new(8).unwrap().dealias_cutoff(), 2);
        assert_eq!(Grid::new(16).unwrap().dealias_cutoff(), 5);
        assert_eq!(Grid::new(32).unwrap().dealias_cutoff(), 10);
    }
}
