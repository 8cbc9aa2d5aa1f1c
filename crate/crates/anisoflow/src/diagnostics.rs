//! Analysis diagnostics: effective viscous fluxes, the compactness identity
//! defect, renormalized-transport residuals, mollifier commutators, and the
//! pressure-bootstrap term ledger T1..T7.
//!
//! Weak-form residuals are paired against the fixed test basis of all
//! normalized trigonometric modes `e^{2 pi i k.x}` with `max_i |k_i| <= 2`,
//! so the numbers are comparable across runs and resolutions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::momentum::{density_power, grad_v_grad_rho};
use crate::multiplier::{apply_pressure_correction, smallness_value, MultiplierReport};
use crate::operators::{div_theta, divergence, quadratic_form_c};
use crate::params::{mollify, mollify_vector, GridKernels, PhysParams};
use crate::solver::{energy_balance, system_residual, SolverConfig, SolverState};

/// Inverse of the scalar operator `L = mu Delta_theta + (mu+lambda) Delta`
/// on the mean-zero part; the k=0 coefficient is dropped.
fn invert_l(f: &ScalarField, p: &PhysParams) -> ScalarField {
    use crate::field::TWO_PI;
    let grid = f.grid();
    let nyq = grid.nyquist();
    let ch = 2.0 * p.mu + p.lambda;
    let cv = (2.0 + p.theta) * p.mu + p.lambda;
    f.map_spectral(|k, z| {
        let mut ke = k;
        for c in ke.iter_mut() {
            if *c == nyq {
                *c = 0;
            }
        }
        let kh = (ke[0] * ke[0] + ke[1] * ke[1]) as f64;
        let kv = (ke[2] * ke[2]) as f64;
        let d = ch * kh + cv * kv;
        if d == 0.0 {
            num_complex::Complex64::new(0.0, 0.0)
        } else {
            -z / (TWO_PI * TWO_PI * d)
        }
    })
}

/// The complement `(2mu+lambda) L^{-1} Delta` of the pressure-correction
/// multiplier: `f - mean(f) = pressure_share(f) + m-op(f)`.
fn pressure_share(f: &ScalarField, p: &PhysParams) -> ScalarField {
    f.project_mean_zero().sub(&apply_pressure_correction(f, p))
}

/// Pairings `fhat(k)` over the low-mode test basis `max_i |k_i| <= 2`.
fn basis_pairings(f: &ScalarField) -> Vec<f64> {
    let mut out = Vec::with_capacity(125);
    for k1 in -2..=2_i64 {
        for k2 in -2..=2_i64 {
            for k3 in -2..=2_i64 {
                out.push(f.coeff([k1, k2, k3]).norm());
            }
        }
    }
    out
}

fn basis_max(f: &ScalarField) -> f64 {
    basis_pairings(f).into_iter().fold(0.0, f64::max)
}

fn basis_l2(f: &ScalarField) -> f64 {
    basis_pairings(f)
        .into_iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// The three effective viscous fluxes (plus the kernel-general variant).
#[derive(Clone, Debug)]
pub struct Fluxes {
    /// F = (2mu+lambda) div u - a rho^gamma.
    pub f: ScalarField,
    /// Anisotropic flux: (2mu+lambda) div u - a [mean + (2mu+lambda) L^{-1} Delta] rho^gamma,
    /// so F_an - F = a * m-op(rho^gamma); at theta = 0 it coincides with F.
    pub f_an: ScalarField,
    /// tilde F_an = mu div_theta u - a rho^gamma.
    pub tilde_f_an: ScalarField,
    /// Kernel-general variant mu div_theta u + (mu+lambda) div u + xi * div u - a rho^gamma.
    pub tilde_f_gen: ScalarField,
}

pub fn effective_fluxes(
    rho: &ScalarField,
    u: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
) -> Fluxes {
    let rho_g = rho.powf_floored(p.gamma, 0.0).dealias();
    let press = rho_g.scale(p.a);
    let divu = divergence(u);
    let f = divu.scale(2.0 * p.mu + p.lambda).sub(&press);
    let f_an = f.add(&apply_pressure_correction(&press, p));
    let dth = div_theta(u, p.theta);
    let tilde_f_an = dth.scale(p.mu).sub(&press);
    let tilde_f_gen = dth
        .scale(p.mu)
        .add(&divu.scale(p.mu + p.lambda))
        .add(&crate::operators::convolve(&ker.xi_hat, &divu))
        .sub(&press);
    Fluxes {
        f,
        f_an,
        tilde_f_an,
        tilde_f_gen,
    }
}

/// Weak-form defect of the compactness identity
///
/// ```text
/// (1/(gamma-1)) div(u (rho_bar^gamma - rho^gamma))
///   + (rho_bar^gamma - rho^gamma) div u + C_bar - C(u, u)
/// ```
///
/// where `rho_gamma_bar` and `c_bar` stand in for the weak limits (estimated
/// from a refinement sequence by the caller). Returns the largest pairing
/// magnitude over the low-mode test basis.
pub fn identity_defect(
    rho: &ScalarField,
    u: &VectorField,
    rho_gamma_bar: &ScalarField,
    c_bar: &ScalarField,
    p: &PhysParams,
) -> f64 {
    let rho_g = rho.powf_floored(p.gamma, 0.0).dealias();
    let diff = rho_gamma_bar.sub(&rho_g);
    let mut transport = ScalarField::zeros(rho.grid());
    for j in 0..3 {
        transport = transport.add(&u.component(j).mul_dealiased(&diff).derivative(j));
    }
    let defect = transport
        .scale(1.0 / (p.gamma - 1.0))
        .add(&diff.mul_dealiased(&divergence(u)))
        .add(c_bar)
        .sub(&quadratic_form_c(u, p));
    basis_max(&defect)
}

/// Weak-form residual of the renormalized transport identity
/// `div(rho^b u) + (b-1) rho^b div u` (pointwise equal to
/// `b rho^{b-1} div(rho u)`, hence expected O(eps) at converged regularized
/// states where the elliptic eps-layer pollutes the exact identity).
pub fn renorm_residual(rho: &ScalarField, u: &VectorField, b: f64) -> f64 {
    let rho_b = rho.powf_floored(b, 0.0);
    let mut div_flux = ScalarField::zeros(rho.grid());
    for j in 0..3 {
        div_flux = div_flux.add(&rho_b.mul_dealiased(u.component(j)).derivative(j));
    }
    let defect = div_flux.add(&rho_b.mul_dealiased(&divergence(u)).scale(b - 1.0));
    basis_l2(&defect)
}

/// Mollifier commutator `r_delta(a, b) = d_i((omega_delta*a) b) - d_i(omega_delta*(a b))`
/// along `axis`; returns the L2 norm per requested delta.
pub fn commutator_residual(
    a: &ScalarField,
    b: &ScalarField,
    deltas: &[f64],
    axis: usize,
) -> Vec<(f64, f64)> {
    deltas
        .iter()
        .map(|&d| {
            let lhs = mollify(a, d).mul_dealiased(b).derivative(axis);
            let rhs = mollify(&a.mul_dealiased(b), d).derivative(axis);
            (d, lhs.sub(&rhs).l2_norm())
        })
        .collect()
}

/// The pressure-bootstrap ledger: `a omega_delta * rho^gamma = sum_i T_i` with
///
/// ```text
/// T1 = a mean(rho^gamma)
/// T2 = (2mu+lambda) div u
/// T3 = a m-op(omega_delta * rho^gamma)            (pressure correction)
/// T4 = (2mu+lambda) L^{-1} Delta ((eta+xi) * div u)
/// T5 = (2mu+lambda) L^{-1} div (omega_delta * g)
/// T6 = -(2mu+lambda) L^{-1} [div div(rho (omega_delta*u) (x) u) + (delta/2) div(rho u)]
/// T7 = -eps (2mu+lambda) L^{-1} div(grad u grad rho)
/// ```
///
/// obtained by taking the divergence of the regularized momentum equation and
/// inverting L on mean-zero parts. The decomposition is exact (to the momentum
/// residual) at any state of the discrete system; `sum_defect` reports the
/// L2 gap. `weighted[i]` holds the integral of `rho^alpha T_{i+1}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BootstrapTerms {
    pub alpha: f64,
    pub weighted: [f64; 7],
    pub sum_defect: f64,
    pub t2_nonpositive: bool,
    /// |int rho^alpha T3| / (a int rho^{alpha+gamma}).
    pub t3_ratio: f64,
    pub smallness: f64,
    pub t3_within_smallness: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn bootstrap_terms(
    rho: &ScalarField,
    u: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    eps: f64,
    delta: f64,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<BootstrapTerms> {
    if alpha <= 0.0 {
        return Err(Error::InvalidAlpha {
            alpha,
            msg: "alpha must be positive".to_string(),
        });
    }
    if 2.0 * alpha <= p.gamma {
        return Err(Error::InvalidAlpha {
            alpha,
            msg: format!("integrability requires 2 alpha > gamma = {}", p.gamma),
        });
    }
    if alpha > 2.0 * p.gamma - 3.0 {
        return Err(Error::InvalidAlpha {
            alpha,
            msg: format!("alpha must not exceed 2 gamma - 3 = {}", 2.0 * p.gamma - 3.0),
        });
    }

    let grid = rho.grid();
    let cvisc = 2.0 * p.mu + p.lambda;
    let rho_g = density_power(rho, p.gamma, cfg)?.dealias().scale(p.a);
    let p_delta = mollify(&rho_g, delta);
    let divu = divergence(u);

    let t1 = ScalarField::constant(grid, rho_g.mean());
    let t2 = divu.scale(cvisc);
    let t3 = apply_pressure_correction(&p_delta, p);
    let kernel_sum = crate::operators::convolve(&ker.eta_hat, &divu)
        .add(&crate::operators::convolve(&ker.xi_hat, &divu));
    let t4 = pressure_share(&kernel_sum, p);
    let t5 = invert_l(&divergence(&mollify_vector(&g.project_mean_zero(), delta)), p)
        .scale(cvisc);

    // convection + delta-damping share, assembled exactly as in the momentum rhs
    let wvel = mollify_vector(u, delta);
    let mut divdiv = ScalarField::zeros(grid);
    for i in 0..3 {
        for j in 0..3 {
            let t = rho
                .mul_nodal(wvel.component(j))
                .mul_nodal(u.component(i))
                .dealias();
            divdiv = divdiv.add(&t.derivative(j).derivative(i));
        }
    }
    let mut div_rho_u = ScalarField::zeros(grid);
    for j in 0..3 {
        div_rho_u = div_rho_u.add(&rho.mul_dealiased(u.component(j)).derivative(j));
    }
    let t6 = invert_l(&divdiv.add(&div_rho_u.scale(delta / 2.0)), p).scale(-cvisc);

    let t7 = invert_l(&divergence(&grad_v_grad_rho(u, rho)), p).scale(-eps * cvisc);

    let terms = [&t1, &t2, &t3, &t4, &t5, &t6, &t7];
    let mut total = ScalarField::zeros(grid);
    for t in terms {
        total = total.add(t);
    }
    let sum_defect = total.sub(&p_delta).l2_norm();

    let weight = density_power(rho, alpha, cfg)?;
    let mut weighted = [0.0; 7];
    for (wi, t) in weighted.iter_mut().zip(terms) {
        *wi = weight.inner(t);
    }
    let pressure_weight = p.a * density_power(rho, alpha + p.gamma, cfg)?.mean();
    let t3_ratio = weighted[2].abs() / pressure_weight;
    let smallness = smallness_value(p);
    Ok(BootstrapTerms {
        alpha,
        weighted,
        sum_defect,
        t2_nonpositive: weighted[1] <= 0.0,
        t3_ratio,
        smallness,
        t3_within_smallness: t3_ratio <= smallness,
    })
}

/// Everything the analysis monitors about one accepted state.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub mass_error: f64,
    pub mean_u_error: f64,
    pub min_rho: f64,
    pub r_mass: f64,
    pub r_mom: f64,
    pub energy_defect: f64,
    pub coercivity_lhs: f64,
    pub coercivity_rhs_alt1: f64,
    pub coercivity_rhs_alt2: f64,
    pub flux_f_norm: f64,
    pub flux_f_an_norm: f64,
    pub flux_tilde_f_an_norm: f64,
    pub flux_tilde_f_gen_norm: f64,
    pub renorm_residuals: BTreeMap<String, f64>,
    pub commutator_residuals: BTreeMap<String, f64>,
    pub bootstrap: Option<BootstrapTerms>,
    pub multiplier: MultiplierReport,
}

impl DiagnosticsReport {
    pub fn compute(
        state: &SolverState,
        p: &PhysParams,
        ker: &GridKernels,
        g: &VectorField,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let (r_mass, r_mom) = system_residual(state, p, ker, g, cfg)?;
        let energy = energy_balance(
            &state.rho, &state.u, p, ker, g, state.eps, state.delta, cfg,
        )?;
        let coer = crate::operators::coercivity_bounds(&state.u, p, ker);
        let fluxes = effective_fluxes(&state.rho, &state.u, p, ker);
        let mut renorm = BTreeMap::new();
        for b in [1.0, p.gamma] {
            renorm.insert(
                format!("{b}"),
                renorm_residual(&state.rho, &state.u, b),
            );
        }
        let mut comm = BTreeMap::new();
        for (d, r) in commutator_residual(
            &state.rho,
            &divergence(&state.u),
            &[state.delta, state.delta / 2.0],
            0,
        ) {
            comm.insert(format!("{d}"), r);
        }
        let alpha = 2.0 * p.gamma - 3.0;
        let bootstrap = bootstrap_terms(
            &state.rho,
            &state.u,
            p,
            ker,
            g,
            state.eps,
            state.delta,
            alpha,
            cfg,
        )
        .ok();
        let mean_u = state.u.mean_vector();
        Ok(DiagnosticsReport {
            mass_error: (state.rho.mean() - p.mass).abs(),
            mean_u_error: mean_u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            min_rho: state.rho.min_nodal(),
            r_mass,
            r_mom,
            energy_defect: energy.defect,
            coercivity_lhs: coer.lhs,
            coercivity_rhs_alt1: coer.rhs_alt1,
            coercivity_rhs_alt2: coer.rhs_alt2,
            flux_f_norm: fluxes.f.l2_norm(),
            flux_f_an_norm: fluxes.f_an.l2_norm(),
            flux_tilde_f_an_norm: fluxes.tilde_f_an.l2_norm(),
            flux_tilde_f_gen_norm: fluxes.tilde_f_gen.l2_norm(),
            renorm_residuals: renorm,
            commutator_residuals: comm,
            bootstrap,
            multiplier: MultiplierReport::compute(state.u.grid(), p, 1.0, 0.05)?,
        })
    }
}
