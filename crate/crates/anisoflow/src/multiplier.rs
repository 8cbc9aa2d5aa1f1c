//! Fourier-multiplier toolkit: the anisotropic multiplier m, Mihlin constants,
//! the pressure-correction operator, its norm bound, the smallness condition,
//! and the hypothesis-(H) validator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::params::{GridKernels, PhysParams};

/// The anisotropic multiplier
///
/// ```text
/// m(k) = theta mu k3^2 / [ (2mu+lambda)(k1^2+k2^2) + ((2+theta)mu+lambda) k3^2 ]
/// ```
///
/// which is exactly the symbol of the pressure-correction operator
/// `Id - (2mu+lambda)(mu Delta_theta + (mu+lambda) Delta)^{-1} Delta`
/// on mean-zero fields.
pub fn eval_m(k: [i64; 3], p: &PhysParams) -> Result<f64> {
    if k == [0, 0, 0] {
        return Err(Error::ZeroMode);
    }
    let kh = (k[0] * k[0] + k[1] * k[1]) as f64;
    let kv = (k[2] * k[2]) as f64;
    let denom = (2.0 * p.mu + p.lambda) * kh + ((2.0 + p.theta) * p.mu + p.lambda) * kv;
    Ok(p.theta * p.mu * kv / denom)
}

/// Mihlin constants for the model symbol with coefficients (a1, a2, a3):
/// `A0 = 1/a3`,
/// `A1 = max(sqrt(a1)/a3, sqrt(a2)/a3, 1/sqrt(a3)) / sqrt(min(a1,a2,a3))`,
/// `A2 = max(a1/a3, a2/a3, 1) / min(a1,a2,a3)`.
pub fn mihlin_constants(a1: f64, a2: f64, a3: f64) -> Result<(f64, f64, f64)> {
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) {
        return Err(Error::NonpositiveCoefficient(a1, a2, a3));
    }
    let amin = a1.min(a2).min(a3);
    let a0 = 1.0 / a3;
    let a1c = (a1.sqrt() / a3).max(a2.sqrt() / a3).max(1.0 / a3.sqrt()) / amin.sqrt();
    let a2c = (a1 / a3).max(a2 / a3).max(1.0) / amin;
    Ok((a0, a1c, a2c))
}

/// Apply the pressure-correction operator: spectral multiplication by `m(k)`
/// on the mean-zero part (the k=0 coefficient is zeroed).
pub fn apply_pressure_correction(f: &ScalarField, p: &PhysParams) -> ScalarField {
    let nyq = f.grid().nyquist();
    f.map_spectral(|k, z| {
        let mut ke = k;
        for c in ke.iter_mut() {
            if *c == nyq {
                *c = 0;
            }
        }
        match eval_m(ke, p) {
            Ok(m) => z * m,
            Err(_) => num_complex::Complex64::new(0.0, 0.0),
        }
    })
}

/// Largest `|m(k)|` over the grid's (effective) wavenumber lattice.
pub fn sup_abs_m(grid: crate::grid::Grid, p: &PhysParams) -> f64 {
    let n = grid.n();
    let mut sup = 0.0_f64;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let k = grid.wavevector_eff((i1, i2, i3));
                if k == [0, 0, 0] {
                    continue;
                }
                sup = sup.max(eval_m(k, p).unwrap().abs());
            }
        }
    }
    sup
}

/// The raw value of the smallness combination
/// `(1+|theta|) |theta| mu (2 lambda + mu) / (lambda + mu)^2`.
pub fn smallness_value(p: &PhysParams) -> f64 {
    (1.0 + p.theta.abs()) * p.theta.abs() * p.mu * (2.0 * p.lambda + p.mu)
        / ((p.lambda + p.mu) * (p.lambda + p.mu))
}

/// Multiplier norm bound `C (1+|theta|) |theta| mu (2 lambda + mu) / (lambda+mu)^2`.
pub fn norm_bound(p: &PhysParams, c: f64) -> f64 {
    c * smallness_value(p)
}

/// Smallness condition: raw value at most `c0`.
pub fn check_smallness(p: &PhysParams, c0: f64) -> bool {
    smallness_value(p) <= c0
}

/// Summary of the multiplier analysis for a grid and parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplierReport {
    pub sup_abs_m: f64,
    pub mihlin_a0: f64,
    pub mihlin_a1: f64,
    pub mihlin_a2: f64,
    pub norm_bound_value: f64,
    pub smallness_value: f64,
    pub c0: f64,
    pub passes_smallness: bool,
}

impl MultiplierReport {
    /// Evaluate everything; `c` is the non-explicit numerical constant of the
    /// norm bound, `c0` the smallness threshold (defaults 1 and 0.05 upstream).
    pub fn compute(grid: crate::grid::Grid, p: &PhysParams, c: f64, c0: f64) -> Result<Self> {
        // the denominator of m is the model symbol with these coefficients
        let a1 = 2.0 * p.mu + p.lambda;
        let a2 = a1;
        let a3 = (2.0 + p.theta) * p.mu + p.lambda;
        let (m0, m1, m2) = mihlin_constants(a1, a2, a3)?;
        let sv = smallness_value(p);
        Ok(MultiplierReport {
            sup_abs_m: sup_abs_m(grid, p),
            mihlin_a0: m0,
            mihlin_a1: m1,
            mihlin_a2: m2,
            norm_bound_value: c * sv,
            smallness_value: sv,
            c0,
            passes_smallness: sv <= c0,
        })
    }
}

/// One checked bullet of hypothesis (H).
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisBullet {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Structured hypothesis-(H) report.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub bullets: Vec<HypothesisBullet>,
    /// Which kernel alternative holds (1, 2, or none).
    pub kernel_alternative: Option<u8>,
    pub passed: bool,
}

impl HypothesisReport {
    pub fn first_failure(&self) -> Option<&HypothesisBullet> {
        self.bullets.iter().find(|b| !b.passed)
    }
}

/// Evaluate every bullet of hypothesis (H) on concrete data.
pub fn check_hypothesis_h(
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
) -> HypothesisReport {
    let mut bullets = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        bullets.push(HypothesisBullet {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    push("mass", p.mass > 0.0, format!("M = {}", p.mass));
    push("gamma", p.gamma > 3.0, format!("gamma = {}", p.gamma));
    push("pressure_constant", p.a > 0.0, format!("a = {}", p.a));

    let gmean = g.mean_vector();
    let gmax = gmean.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let q = 3.0 * (p.gamma - 1.0) / (2.0 * p.gamma - 1.0);
    let gnorm: f64 = g
        .components()
        .iter()
        .map(|c| c.lp_norm(q.max(1e-12)).powf(q))
        .sum::<f64>()
        .powf(1.0 / q.max(1e-12));
    push(
        "forcing",
        gmax <= 1e-12 && gnorm.is_finite(),
        format!("|mean g| = {gmax:e}, |g|_L{q:.4} = {gnorm:e}"),
    );

    push("mu", p.mu > 0.0, format!("mu = {}", p.mu));
    push(
        "mu_plus_lambda",
        p.mu + p.lambda > 0.0,
        format!("mu + lambda = {}", p.mu + p.lambda),
    );
    push("theta", p.theta > -1.0, format!("theta = {}", p.theta));

    let (eta_l1, xi_l1) = ker.l1_norms();
    let iso = p.mu * (1.0_f64).min(1.0 + p.theta);
    let alt1_margin = iso - eta_l1 - xi_l1 / 3.0;
    let alt1 = alt1_margin > 0.0;
    let (eta_pos, xi_pos) = ker.hats_nonnegative();
    let alt2 = eta_pos && xi_pos;
    let alternative = if alt1 {
        Some(1)
    } else if alt2 {
        Some(2)
    } else {
        None
    };
    push(
        "kernel_alternative",
        alternative.is_some(),
        format!(
            "(i) min(1,1+theta)mu - |eta|_1 - |xi|_1/3 = {alt1_margin:e}; \
             (ii) eta_hat >= 0: {eta_pos}, xi_hat >= 0: {xi_pos}"
        ),
    );

    let (eta_grad, xi_grad) = ker.grad_l2_norms();
    push(
        "kernel_gradients",
        eta_grad.is_finite() && xi_grad.is_finite(),
        format!("|grad eta|_2 = {eta_grad:e}, |grad xi|_2 = {xi_grad:e}"),
    );

    let passed = bullets.iter().all(|b| b.passed);
    HypothesisReport {
        bullets,
        kernel_alternative: alternative,
        passed,
    }
}
