//! Physical parameters, nonlocal kernels, and the mollifier family.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField, TWO_PI};
use crate::grid::Grid;

/// Physical constants of the stationary system: shear viscosity mu, bulk
/// constant lambda, anisotropy amplitude theta, pressure constant a, adiabatic
/// exponent gamma, and total mass M.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhysParams {
    pub mu: f64,
    pub lambda: f64,
    pub theta: f64,
    pub a: f64,
    pub gamma: f64,
    pub mass: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            mu: 1.0,
            lambda: 1.0,
            theta: 0.0,
            a: 1.0,
            gamma: 4.0,
            mass: 1.0,
        }
    }
}

impl PhysParams {
    /// Hard validity checks (the structural subset of hypothesis (H) that the
    /// operators need to be well defined). The full (H) report lives in
    /// [`crate::multiplier::check_hypothesis_h`].
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParams(format!("mu = {} must be > 0", self.mu)));
        }
        if !(self.mu + self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mu + lambda = {} must be > 0",
                self.mu + self.lambda
            )));
        }
        if !(self.theta > -1.0) {
            return Err(Error::InvalidParams(format!(
                "theta = {} must be > -1",
                self.theta
            )));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!("a = {} must be > 0", self.a)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParams(format!(
                "M = {} must be > 0",
                self.mass
            )));
        }
        if !self.gamma.is_finite() || self.gamma <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "gamma = {} must be finite and > 1",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Definition of one nonlocal kernel through its Fourier coefficients.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum KernelDef {
    /// Identically zero kernel.
    Zero,
    /// `khat(k) = amplitude * exp(-sigma^2 |2 pi k|^2)` — nonnegative hat when
    /// the amplitude is nonnegative (alternative (ii) of (H)).
    Gaussian { sigma: f64, amplitude: f64 },
    /// Explicit `(k, value)` entries; the value is assigned to both `k` and
    /// `-k` so the kernel is automatically real and even.
    Modes(Vec<([i64; 3], f64)>),
}

impl KernelDef {
    fn hat_on(&self, grid: Grid) -> Array3<f64> {
        let n = grid.n();
        let mut hat = Array3::zeros((n, n, n));
        match self {
            KernelDef::Zero => {}
            KernelDef::Gaussian { sigma, amplitude } => {
                for ((i1, i2, i3), v) in hat.indexed_iter_mut() {
                    let k = grid.wavevector((i1, i2, i3));
                    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                    *v = amplitude * (-sigma * sigma * TWO_PI * TWO_PI * k2).exp();
                }
            }
            KernelDef::Modes(entries) => {
                for &(k, v) in entries {
                    hat[(
                        grid.index_of(k[0]),
                        grid.index_of(k[1]),
                        grid.index_of(k[2]),
                    )] = v;
                    hat[(
                        grid.index_of(-k[0]),
                        grid.index_of(-k[1]),
                        grid.index_of(-k[2]),
                    )] = v;
                }
            }
        }
        hat
    }
}

/// The pair of nonlocal kernels (eta, xi) of the viscous operator.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KernelSpec {
    pub eta: KernelDef,
    pub xi: KernelDef,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            eta: KernelDef::Zero,
            xi: KernelDef::Zero,
        }
    }
}

impl KernelSpec {
    /// Realize the kernels on a grid's wavenumber lattice.
    pub fn realize(&self, grid: Grid) -> GridKernels {
        GridKernels {
            grid,
            eta_hat: self.eta.hat_on(grid),
            xi_hat: self.xi.hat_on(grid),
        }
    }
}

/// Kernels realized on a specific grid: real, even arrays of Fourier
/// coefficients, one per wavenumber.
#[derive(Clone, Debug)]
pub struct GridKernels {
    pub grid: Grid,
    pub eta_hat: Array3<f64>,
    pub xi_hat: Array3<f64>,
}

impl GridKernels {
    pub fn zero(grid: Grid) -> Self {
        KernelSpec::default().realize(grid)
    }

    fn kernel_field(&self, hat: &Array3<f64>) -> ScalarField {
        let data = hat.mapv(|v| num_complex::Complex64::new(v, 0.0));
        ScalarField::from_spectral(self.grid, data)
    }

    /// Discrete L1 norms of (eta, xi) by quadrature of the inverse transform.
    pub fn l1_norms(&self) -> (f64, f64) {
        (
            self.kernel_field(&self.eta_hat).l1_norm(),
            self.kernel_field(&self.xi_hat).l1_norm(),
        )
    }

    /// Whether both hats are nonnegative everywhere (alternative (ii) of (H)).
    pub fn hats_nonnegative(&self) -> (bool, bool) {
        (
            self.eta_hat.iter().all(|&v| v >= 0.0),
            self.xi_hat.iter().all(|&v| v >= 0.0),
        )
    }

    /// Discrete surrogates for `|grad eta|_{L^2}`, `|grad xi|_{L^2}`:
    /// `sqrt(sum_k |2 pi k|^2 hat(k)^2)`.
    pub fn grad_l2_norms(&self) -> (f64, f64) {
        let norm = |hat: &Array3<f64>| {
            let mut acc = 0.0;
            for ((i1, i2, i3), &v) in hat.indexed_iter() {
                let k = self.grid.wavevector((i1, i2, i3));
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                acc += TWO_PI * TWO_PI * k2 * v * v;
            }
            acc.sqrt()
        };
        (norm(&self.eta_hat), norm(&self.xi_hat))
    }

    pub fn is_zero(&self) -> bool {
        self.eta_hat.iter().all(|&v| v == 0.0) && self.xi_hat.iter().all(|&v| v == 0.0)
    }
}

/// Mollifier family: Gaussian hats `omega_hat_delta(k) = exp(-delta^2 |2 pi k|^2)`.
/// Even, positive hat, unit integral (`omega_hat(0) = 1`), and `-> 1` pointwise
/// as delta -> 0.
pub fn mollifier_hat(delta: f64, k: [i64; 3]) -> f64 {
    let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    (-delta * delta * TWO_PI * TWO_PI * k2).exp()
}

/// Mollify a scalar field: diagonal multiplication by the Gaussian hat.
pub fn mollify(f: &ScalarField, delta: f64) -> ScalarField {
    f.map_spectral(|k, z| z * mollifier_hat(delta, k))
}

/// Mollify a vector field componentwise.
pub fn mollify_vector(u: &VectorField, delta: f64) -> VectorField {
    u.map(|c| mollify(c, delta))
}
