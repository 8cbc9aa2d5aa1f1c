//! Pseudo-spectral solver and verification suite for the stationary
//! barotropic compressible Navier-Stokes system on the unit 3-torus with an
//! anisotropic and nonlocal viscous operator.
//!
//! The library implements the two-layer regularized construction (an
//! elliptic `eps`-layer on the continuity equation and a `delta`-layer of
//! damping plus mollification on the momentum coupling), solves the
//! regularized system by damped Picard iteration with homotopy and
//! (eps, delta) continuation, and provides numerical realizations of the
//! identities and estimates the existence analysis relies on: energy
//! balance, viscous coercivity, Fourier-multiplier bounds for the pressure
//! correction, effective viscous fluxes, renormalized-transport residuals,
//! mollifier commutators, and the pressure-bootstrap term ledger.
//!
//! Layout:
//! - [`grid`], [`field`], [`fieldio`], [`synth`]: spectral kernel — grids,
//!   lazy nodal/Fourier fields, binary field dumps, deterministic synthesis.
//! - [`params`]: physical parameters, kernels, mollifier.
//! - [`operators`]: differential/viscous operators and energy forms.
//! - [`multiplier`]: pressure-correction multiplier and hypothesis checks.
//! - [`transport`], [`momentum`], [`solver`]: the regularized system.
//! - [`diagnostics`]: flux identities, renormalization, commutators, bootstrap.
//! - [`config`], [`report`], [`cli`]: run orchestration.

// `!(x > 0)`-style checks are used throughout parameter validation because,
// unlike `x <= 0`, they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fieldio;
pub mod grid;
pub mod momentum;
pub mod multiplier;
pub mod operators;
pub mod params;
pub mod report;
pub mod solver;
pub mod synth;
pub mod transport;
