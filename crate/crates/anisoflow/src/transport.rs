//! Regularized stationary continuity equation
//!
//! ```text
//! -eps Delta rho + delta (rho - M) + div(rho omega_delta * v) = 0,   integral rho = M
//! ```
//!
//! solved for a given velocity v by preconditioned Richardson iteration: each
//! step inverts `(-eps Delta + delta)` spectrally with the advection term
//! lagged, mirroring the inner fixed-point map of the damped outer iteration.
//! The k=0 component of
//! the update forces the mass identity exactly at every iterate. There is no
//! positivity clipping; `min rho` is monitored instead.

use crate::field::{ScalarField, VectorField, TWO_PI};
use crate::params::{mollify_vector, PhysParams};
use crate::solver::SolverConfig;

/// Outcome of a transport solve; `converged = false` carries the best iterate.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub rho: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub min_rho: f64,
    pub converged: bool,
}

/// Invert `(-eps Delta + delta)` spectrally (strictly positive symbol).
fn invert_helmholtz(f: &ScalarField, eps: f64, delta: f64) -> ScalarField {
    let nyq = f.grid().nyquist();
    f.map_spectral(|k, z| {
        let mut k2 = 0.0;
        for c in k {
            if c != nyq {
                k2 += (c * c) as f64;
            }
        }
        z / (eps * TWO_PI * TWO_PI * k2 + delta)
    })
}

/// Advection term `div(rho (omega_delta * v))` with the product dealiased.
fn advection(rho: &ScalarField, w: &VectorField) -> ScalarField {
    let mut acc = ScalarField::zeros(rho.grid());
    for j in 0..3 {
        acc = acc.add(&rho.mul_dealiased(w.component(j)).derivative(j));
    }
    acc
}

/// Defect field of the continuity equation for a candidate rho.
fn residual_field(
    rho: &ScalarField,
    w: &VectorField,
    mass: f64,
    eps: f64,
    delta: f64,
) -> ScalarField {
    crate::operators::laplacian(rho)
        .scale(-eps)
        .add(&rho.add_constant(-mass).scale(delta))
        .add(&advection(rho, w))
}

/// L2 residual of the continuity equation (fresh dealiased assembly);
/// `v` is the raw velocity, mollified internally.
pub fn transport_residual(
    rho: &ScalarField,
    v: &VectorField,
    p: &PhysParams,
    eps: f64,
    delta: f64,
) -> f64 {
    let w = mollify_vector(v, delta);
    residual_field(rho, &w, p.mass, eps, delta).l2_norm()
}

/// Solve the regularized continuity equation starting from `rho0 = M`.
pub fn solve_transport(
    v: &VectorField,
    p: &PhysParams,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
) -> TransportSolution {
    solve_transport_from(&ScalarField::constant(v.grid(), p.mass), v, p, eps, delta, cfg)
}

/// Same solve from an explicit initial iterate (used by the uniqueness probe).
pub fn solve_transport_from(
    rho0: &ScalarField,
    v: &VectorField,
    p: &PhysParams,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
) -> TransportSolution {
    assert!(eps > 0.0 && eps <= 1.0 && delta > 0.0 && delta <= 1.0);
    let tol = (cfg.tol / 10.0).max(1e-14);
    let w = mollify_vector(v, delta);
    let mut rho = rho0.clone();
    let mut relax = 1.0;
    let mut best: Option<(f64, ScalarField)> = None;
    let mut prev_res = f64::INFINITY;
    for it in 0..=cfg.max_iter {
        let r = residual_field(&rho, &w, p.mass, eps, delta);
        let res = r.l2_norm();
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((res, rho.clone()));
        }
        if res <= tol {
            return TransportSolution {
                min_rho: rho.min_nodal(),
                rho,
                residual: res,
                iterations: it,
                converged: true,
            };
        }
        if res > prev_res {
            relax *= 0.5;
            if relax < 1e-3 {
                break;
            }
        }
        prev_res = res;
        // precondition the negative defect with (-eps Delta + delta)^{-1}
        rho = rho.add(&invert_helmholtz(&r, eps, delta).scale(-relax));
    }
    let (residual, rho) = best.expect("at least one iterate evaluated");
    TransportSolution {
        min_rho: rho.min_nodal(),
        rho,
        residual,
        iterations: cfg.max_iter,
        converged: false,
    }
}
