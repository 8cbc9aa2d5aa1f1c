//! Outer nonlinear solve and (eps, delta) continuation driver.
//!
//! The fixed point u = S(u) of the regularized system is reached by damped
//! Picard iteration `u <- (1-relax) u + relax * lambda * S(u)`, with the
//! homotopy parameter lambda walked along a user schedule ending at 1. Only
//! residual-verified states are accepted: the returned state always carries a
//! freshly assembled residual of both equations, independent of the iteration
//! path. The continuation driver re-solves along a nonincreasing (eps, delta)
//! schedule, warm-starting each point from the previous solution, and records
//! the uniform-bound monitors used by the a-priori estimates.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::momentum::{density_power, grad_v_grad_rho, momentum_rhs};
use crate::params::{mollify_vector, GridKernels, PhysParams};
use crate::transport::{solve_transport, transport_residual};

/// Tunables for the fixed-point iteration and the continuation schedules.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Residual tolerance on both equations.
    pub tol: f64,
    /// Iteration cap per homotopy stage.
    pub max_iter: usize,
    /// Initial Picard damping factor in (0, 1].
    pub relax: f64,
    /// Density undershoot below `-pos_tol` is a hard error.
    pub pos_tol: f64,
    /// Clamp for fractional powers of the density.
    pub rho_floor: f64,
    /// Iterations without residual improvement before declaring stagnation.
    pub stall_window: usize,
    /// Homotopy values lambda walked in order; must end at 1.
    pub homotopy_schedule: Vec<f64>,
    /// Nonincreasing (eps, delta) pairs for the continuation driver.
    pub continuation_schedule: Vec<(f64, f64)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 500,
            relax: 0.5,
            pos_tol: 1e-8,
            rho_floor: 1e-14,
            stall_window: 30,
            homotopy_schedule: vec![1.0],
            continuation_schedule: vec![(0.1, 0.1)],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| {
            Err(crate::error::Error::Config {
                key: key.to_string(),
                msg: msg.to_string(),
            })
        };
        if !(self.tol > 0.0) {
            return bad("solver.tol", "must be positive");
        }
        if !(self.relax > 0.0 && self.relax <= 1.0) {
            return bad("solver.relax", "must lie in (0, 1]");
        }
        if self.homotopy_schedule.is_empty()
            || self.homotopy_schedule.last() != Some(&1.0)
            || self
                .homotopy_schedule
                .iter()
                .any(|&l| !(l > 0.0 && l <= 1.0))
        {
            return bad(
                "schedule.homotopy",
                "must be a nonempty list in (0, 1] ending at 1",
            );
        }
        if self.continuation_schedule.is_empty()
            || self
                .continuation_schedule
                .iter()
                .any(|&(e, d)| !(e > 0.0 && e <= 1.0 && d > 0.0 && d <= 1.0))
        {
            return bad(
                "schedule.continuation",
                "must be a nonempty list of (eps, delta) pairs in (0, 1]^2",
            );
        }
        Ok(())
    }
}

/// One row of the per-iteration log (mirrors the CSV columns).
#[derive(Clone, Copy, Debug)]
pub struct IterRecord {
    pub iteration: usize,
    pub r_mass: f64,
    pub r_mom: f64,
    pub energy_defect: f64,
    pub min_rho: f64,
    pub relax: f64,
    pub homotopy: f64,
}

/// Output of a fixed-point solve: the accepted (rho, u) pair with its
/// fresh residuals and the full iteration history.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub u: VectorField,
    pub rho: ScalarField,
    pub eps: f64,
    pub delta: f64,
    pub homotopy: f64,
    pub iteration: usize,
    pub residual_history: Vec<f64>,
    pub iter_log: Vec<IterRecord>,
    pub r_mass: f64,
    pub r_mom: f64,
    pub converged: bool,
}

/// Discrete L2 defects of the continuity and momentum equations, assembled
/// fresh (dealiased) and independent of the iteration path.
pub fn system_residual(
    state: &SolverState,
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    let r_mass = transport_residual(&state.rho, &state.u, p, state.eps, state.delta);
    let f = momentum_rhs(&state.rho, &state.u, p, state.eps, state.delta, g, cfg)?;
    let r_mom = crate::operators::apply_viscous(&state.u, p, ker)
        .add(&f)
        .l2_norm();
    Ok((r_mass, r_mom))
}

/// Term-by-term energy balance of the regularized system.
///
/// Pairing the momentum equation with u and the continuity equation with
/// `a*gamma/(gamma-1) * rho^{gamma-1}` cancels the convection and the
/// eps-gradient coupling exactly and leaves
///
/// ```text
/// -int <Au,u> + (delta M / 2) int |u|^2 + (4 eps a / gamma) int |grad rho^{gamma/2}|^2
///   + (a gamma delta / (gamma-1)) int rho^gamma
///   - int (omega_delta * g) . u - (a gamma delta / (gamma-1)) M int rho^{gamma-1} = 0.
/// ```
#[derive(Clone, Copy, Debug)]
pub struct EnergyBalance {
    /// -int <Au, u>
    pub viscous: f64,
    /// (delta M / 2) int |u|^2
    pub damping: f64,
    /// (4 eps a / gamma) int |grad rho^{gamma/2}|^2
    pub eps_gradient: f64,
    /// (a gamma delta / (gamma-1)) int rho^gamma
    pub pressure: f64,
    /// int (omega_delta * g) . u
    pub forcing: f64,
    /// (a gamma delta / (gamma-1)) M int rho^{gamma-1}
    pub mass_coupling: f64,
    /// |lhs - forcing - mass_coupling| / max term magnitude
    pub defect: f64,
}

impl EnergyBalance {
    /// The nonnegative side of the balance (used as a uniform-bound monitor).
    pub fn lhs(&self) -> f64 {
        self.viscous + self.damping + self.eps_gradient + self.pressure
    }
}

#[allow(clippy::too_many_arguments)]
pub fn energy_balance(
    rho: &ScalarField,
    u: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<EnergyBalance> {
    let viscous = -crate::operators::apply_viscous(u, p, ker).inner(u);
    let damping = delta * p.mass / 2.0 * u.inner(u);
    let rho_half = density_power(rho, p.gamma / 2.0, cfg)?;
    let grad_half = crate::operators::gradient(&rho_half);
    let eps_gradient = 4.0 * eps * p.a / p.gamma * grad_half.inner(&grad_half);
    let cp = p.a * p.gamma * delta / (p.gamma - 1.0);
    let pressure = cp * density_power(rho, p.gamma, cfg)?.mean();
    let mass_coupling = cp * p.mass * density_power(rho, p.gamma - 1.0, cfg)?.mean();
    let forcing = mollify_vector(g, delta).inner(u);
    let sum = viscous + damping + eps_gradient + pressure - forcing - mass_coupling;
    let scale = [viscous, damping, eps_gradient, pressure, forcing, mass_coupling]
        .iter()
        .fold(f64::MIN_POSITIVE, |m, t| m.max(t.abs()));
    Ok(EnergyBalance {
        viscous,
        damping,
        eps_gradient,
        pressure,
        forcing,
        mass_coupling,
        defect: sum.abs() / scale,
    })
}

/// Damped Picard iteration with a homotopy walk.
///
/// For each lambda in the schedule, iterate `u <- (1-relax) u + relax*lambda*S(u)`
/// until both residuals of the lambda-scaled system drop below `cfg.tol`.
/// The damping halves after two consecutive residual increases and the stage
/// aborts (flagged non-converged) when relax falls below 1e-3 or the residual
/// stops improving for `cfg.stall_window` iterations. The accepted state is
/// always the best iterate seen at the final lambda, with rho re-solved for
/// the final u and both residuals re-assembled fresh.
pub fn fixed_point_solve(
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
    warm_start: Option<&VectorField>,
) -> Result<SolverState> {
    p.validate()?;
    cfg.validate()?;
    let grid = g.grid();
    let mut u = warm_start
        .map(|w| w.project_mean_zero())
        .unwrap_or_else(|| VectorField::zeros(grid));
    let mut residual_history = Vec::new();
    let mut iter_log = Vec::new();
    let mut iteration = 0usize;
    let mut converged = true;
    let mut best: Option<(f64, VectorField)> = None;

    let stages = cfg.homotopy_schedule.len();
    'schedule: for (si, &lambda) in cfg.homotopy_schedule.iter().enumerate() {
        let last_stage = si + 1 == stages;
        let mut relax = cfg.relax;
        let mut prev_total = f64::INFINITY;
        let mut increases = 0usize;
        let mut best_total = f64::INFINITY;
        let mut since_best = 0usize;
        if last_stage {
            best = None;
        }
        for _ in 0..=cfg.max_iter {
            let transport = solve_transport(&u, p, eps, delta, cfg);
            let f = match momentum_rhs(&transport.rho, &u, p, eps, delta, g, cfg) {
                Ok(f) => f,
                Err(Error::NegativeDensity { .. }) => {
                    // the iterate overshot into an unphysical density; back off
                    // to the best known velocity (or shrink the current one)
                    // and retry with half the relaxation
                    relax *= 0.5;
                    if relax < 1e-3 {
                        converged = false;
                        break 'schedule;
                    }
                    u = match &best {
                        Some((_, bu)) => bu.clone(),
                        None => u.scale(0.5),
                    };
                    iteration += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let r_mom = crate::operators::apply_viscous(&u, p, ker)
                .add(&f.scale(lambda))
                .l2_norm();
            let r_mass = transport.residual;
            let total = r_mass.max(r_mom);
            let energy =
                energy_balance(&transport.rho, &u, p, ker, g, eps, delta, cfg)?;
            residual_history.push(total);
            iter_log.push(IterRecord {
                iteration,
                r_mass,
                r_mom,
                energy_defect: energy.defect,
                min_rho: transport.min_rho,
                relax,
                homotopy: lambda,
            });
            iteration += 1;
            if last_stage && best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, u.clone()));
            }
            if r_mass <= cfg.tol && r_mom <= cfg.tol {
                continue 'schedule;
            }
            if total < best_total {
                best_total = total;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.stall_window {
                    converged = false;
                    break 'schedule;
                }
            }
            if total > prev_total {
                increases += 1;
                if increases >= 2 {
                    relax *= 0.5;
                    increases = 0;
                    if relax < 1e-3 {
                        converged = false;
                        break 'schedule;
                    }
                }
            } else {
                increases = 0;
            }
            prev_total = total;
            let s_u = crate::operators::invert_viscous(&f, p, ker)?;
            u = u.scale(1.0 - relax).add(&s_u.scale(relax * lambda));
        }
        // iteration cap reached without meeting tol at this lambda
        converged = false;
        break;
    }

    let u = best.map(|(_, b)| b).unwrap_or(u);
    let transport = solve_transport(&u, p, eps, delta, cfg);
    let mut state = SolverState {
        u,
        rho: transport.rho,
        eps,
        delta,
        homotopy: *cfg.homotopy_schedule.last().expect("validated nonempty"),
        iteration,
        residual_history,
        iter_log,
        r_mass: 0.0,
        r_mom: 0.0,
        converged,
    };
    let (r_mass, r_mom) = system_residual(&state, p, ker, g, cfg)?;
    state.r_mass = r_mass;
    state.r_mom = r_mom;
    state.converged = converged && r_mass <= cfg.tol && r_mom <= cfg.tol;
    Ok(state)
}

/// Uniform-bound monitors recorded per continuation state.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct StateMonitors {
    /// delta int rho^gamma
    pub delta_rho_gamma: f64,
    /// eps ||grad rho^{gamma/2}||^2
    pub eps_grad_rho_gamma_half: f64,
    /// -int <Au, u>
    pub viscous_energy: f64,
    /// Nonnegative side of the energy balance.
    pub energy_lhs: f64,
    /// Relative energy-balance defect.
    pub energy_defect: f64,
    /// ||rho||_{L^{3(gamma-1)}}
    pub rho_high_norm: f64,
    /// ||grad u||_{L^{3(gamma-1)/gamma}}
    pub grad_u_norm: f64,
    /// eps ||grad u grad rho||_{L^{3(gamma-1)/(2 gamma - 1)}}
    pub eps_grad_u_grad_rho: f64,
}

/// Pointwise Frobenius magnitude of a list of scalar fields.
fn magnitude(grid: Grid, parts: &[&ScalarField]) -> ScalarField {
    let mut acc = ndarray::Array3::<f64>::zeros((grid.n(), grid.n(), grid.n()));
    for part in parts {
        ndarray::Zip::from(&mut acc)
            .and(part.nodal())
            .for_each(|a, &b| *a += b * b);
    }
    ScalarField::from_nodal(grid, acc.mapv(f64::sqrt))
}

pub fn state_monitors(
    state: &SolverState,
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    cfg: &SolverConfig,
) -> Result<StateMonitors> {
    let grid = state.u.grid();
    let energy = energy_balance(
        &state.rho, &state.u, p, ker, g, state.eps, state.delta, cfg,
    )?;
    let delta_rho_gamma = state.delta * density_power(&state.rho, p.gamma, cfg)?.mean();
    let grad_half = crate::operators::gradient(&density_power(&state.rho, p.gamma / 2.0, cfg)?);
    let eps_grad_rho_gamma_half = state.eps * grad_half.inner(&grad_half);
    let grads = crate::operators::grad_matrix(&state.u);
    let grad_parts: Vec<&ScalarField> = grads.iter().flatten().collect();
    let grad_u_mag = magnitude(grid, &grad_parts);
    let mixed = grad_v_grad_rho(&state.u, &state.rho);
    let mixed_parts: Vec<&ScalarField> = mixed.components().iter().collect();
    let mixed_mag = magnitude(grid, &mixed_parts);
    Ok(StateMonitors {
        delta_rho_gamma,
        eps_grad_rho_gamma_half,
        viscous_energy: energy.viscous,
        energy_lhs: energy.lhs(),
        energy_defect: energy.defect,
        rho_high_norm: state.rho.lp_norm(3.0 * (p.gamma - 1.0)),
        grad_u_norm: grad_u_mag.lp_norm(3.0 * (p.gamma - 1.0) / p.gamma),
        eps_grad_u_grad_rho: state.eps
            * mixed_mag.lp_norm(3.0 * (p.gamma - 1.0) / (2.0 * p.gamma - 1.0)),
    })
}

/// One continuation point: the accepted state plus its monitors.
#[derive(Clone, Debug)]
pub struct ContinuationPoint {
    pub state: SolverState,
    pub monitors: StateMonitors,
}

/// Walk the (eps, delta) continuation schedule, warm-starting each solve from
/// the previous accepted velocity. Aborts on the first non-converged state,
/// returning the partial list (the flagged state included).
pub fn continuation_run(
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    cfg: &SolverConfig,
) -> Result<Vec<ContinuationPoint>> {
    cfg.validate()?;
    let mut points: Vec<ContinuationPoint> = Vec::new();
    let mut warm: Option<VectorField> = None;
    for &(eps, delta) in &cfg.continuation_schedule {
        let state = fixed_point_solve(p, ker, g, eps, delta, cfg, warm.as_ref())?;
        let monitors = state_monitors(&state, p, ker, g, cfg)?;
        let converged = state.converged;
        warm = Some(state.u.clone());
        points.push(ContinuationPoint { state, monitors });
        if !converged {
            break;
        }
    }
    Ok(points)
}
