//! Momentum right-hand side of the regularized system and the velocity
//! operator S.
//!
//! For a candidate velocity v, the density rho = T(v) solves the regularized
//! continuity equation, and S(v) is the mean-zero solution of `-A S = F` with
//!
//! ```text
//! F = -(delta/2)(rho v - mean) - div(rho (omega_delta*v) (x) v)
//!     - grad(omega_delta * (a rho^gamma)) - eps (grad v grad rho - mean)
//!     + omega_delta * g
//! ```
//!
//! The convective tensor divergence is `sum_j d_j(rho (omega_delta*v)_j v_i)`
//! per component i, and `(grad v grad rho)_i = sum_j d_j v^i d_j rho`; both
//! conventions are pinned by the energy identity.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::params::{mollify, mollify_vector, GridKernels, PhysParams};
use crate::solver::SolverConfig;
use crate::transport::{solve_transport, TransportSolution};

/// Nodal power `rho^p` with the floor/negativity policy: any nodal value below
/// `-pos_tol` is an error (the continuous density is nonnegative; a deep
/// discrete undershoot signals under-resolution), values above it are clamped
/// at `rho_floor` before the fractional power.
pub fn density_power(rho: &ScalarField, p: f64, cfg: &SolverConfig) -> Result<ScalarField> {
    let min = rho.min_nodal();
    if min < -cfg.pos_tol {
        return Err(Error::NegativeDensity {
            min,
            pos_tol: cfg.pos_tol,
        });
    }
    Ok(rho.powf_floored(p, cfg.rho_floor))
}

/// The matrix-vector contraction `(grad v grad rho)_i = sum_j d_j v^i d_j rho`
/// (nodal products, dealiased).
pub fn grad_v_grad_rho(v: &VectorField, rho: &ScalarField) -> VectorField {
    let grid = v.grid();
    let grho = crate::operators::gradient(rho);
    let build = |i: usize| {
        let mut acc = ScalarField::zeros(grid);
        for j in 0..3 {
            acc = acc.add(&v.component(i).derivative(j).mul_nodal(grho.component(j)));
        }
        acc.dealias()
    };
    VectorField::new(build(0), build(1), build(2))
}

/// Assemble the full momentum right-hand side F of `-A S = F`.
pub fn momentum_rhs(
    rho: &ScalarField,
    v: &VectorField,
    p: &PhysParams,
    eps: f64,
    delta: f64,
    g: &VectorField,
    cfg: &SolverConfig,
) -> Result<VectorField> {
    let grid = rho.grid();
    let w = mollify_vector(v, delta);

    // -(delta/2)(rho v - mean)
    let damp = VectorField::new(
        rho.mul_dealiased(v.component(0)),
        rho.mul_dealiased(v.component(1)),
        rho.mul_dealiased(v.component(2)),
    )
    .project_mean_zero()
    .scale(-delta / 2.0);

    // -div(rho (omega_delta*v) (x) v): component i = -sum_j d_j(rho w_j v_i)
    let conv = {
        let build = |i: usize| {
            let mut acc = ScalarField::zeros(grid);
            for j in 0..3 {
                let t = rho
                    .mul_nodal(w.component(j))
                    .mul_nodal(v.component(i))
                    .dealias();
                acc = acc.add(&t.derivative(j));
            }
            acc.scale(-1.0)
        };
        VectorField::new(build(0), build(1), build(2))
    };

    // -grad(omega_delta * (a rho^gamma))
    let press = crate::operators::gradient(&mollify(
        &density_power(rho, p.gamma, cfg)?.dealias().scale(p.a),
        delta,
    ))
    .scale(-1.0);

    // -eps (grad v grad rho - mean)
    let epsterm = grad_v_grad_rho(v, rho).project_mean_zero().scale(-eps);

    let forcing = mollify_vector(g, delta);

    Ok(damp
        .add(&conv)
        .add(&press)
        .add(&epsterm)
        .add(&forcing)
        .project_mean_zero())
}

/// One application of the velocity operator S.
#[derive(Clone, Debug)]
pub struct SStep {
    pub u: VectorField,
    pub transport: TransportSolution,
}

/// S(v): solve transport for rho, assemble F, and invert `-A`.
pub fn apply_s(
    v: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
    eps: f64,
    delta: f64,
    g: &VectorField,
    cfg: &SolverConfig,
) -> Result<SStep> {
    let transport = solve_transport(v, p, eps, delta, cfg);
    let f = momentum_rhs(&transport.rho, v, p, eps, delta, g, cfg)?;
    let u = crate::operators::invert_viscous(&f, p, ker)?;
    Ok(SStep { u, transport })
}
