//! The anisotropic/nonlocal viscous operator and its building blocks.
//!
//! Everything here acts diagonally (or 3x3-blockwise) in Fourier space:
//! the anisotropic Laplacian `Delta_theta = Delta + theta d33`, the weighted
//! gradient/divergence `grad_theta`, `div_theta`, kernel convolutions, the
//! viscous operator
//!
//! ```text
//! A u = mu Delta_theta u + (mu+lambda) grad div u + eta * Delta u + xi * grad div u
//! ```
//!
//! its per-mode 3x3 inversion on mean-zero fields, and the energy quadratic
//! forms B and C with `<Au, u> = B - C`.
//!
//! All symbols are built from the same effective wavenumbers as the spectral
//! derivative (unpaired Nyquist treated as zero), so operator identities hold
//! to round-off between symbol-side and derivative-side assemblies.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField, TWO_PI};
use crate::params::{GridKernels, PhysParams};

/// Componentwise spectral gradient.
pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::new(f.derivative(0), f.derivative(1), f.derivative(2))
}

/// Spectral divergence.
pub fn divergence(u: &VectorField) -> ScalarField {
    u.component(0)
        .derivative(0)
        .add(&u.component(1).derivative(1))
        .add(&u.component(2).derivative(2))
}

/// Plain Laplacian (symbol -4 pi^2 |k|^2).
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let nyq = grid.nyquist();
    f.map_spectral(|k, z| {
        let mut k2 = 0.0;
        for c in k {
            if c != nyq {
                k2 += (c * c) as f64;
            }
        }
        z * (-TWO_PI * TWO_PI * k2)
    })
}

/// Anisotropic Laplacian `Delta_theta f = Delta f + theta d33 f`
/// (symbol -4 pi^2 (k1^2 + k2^2 + (1+theta) k3^2)).
pub fn apply_delta_theta(f: &ScalarField, theta: f64) -> ScalarField {
    let nyq = f.grid().nyquist();
    f.map_spectral(|k, z| {
        let kk: Vec<f64> = k
            .iter()
            .map(|&c| if c == nyq { 0.0 } else { c as f64 })
            .collect();
        let sym = kk[0] * kk[0] + kk[1] * kk[1] + (1.0 + theta) * kk[2] * kk[2];
        z * (-TWO_PI * TWO_PI * sym)
    })
}

/// Componentwise `Delta_theta` on a vector field.
pub fn apply_delta_theta_vector(u: &VectorField, theta: f64) -> VectorField {
    u.map(|c| apply_delta_theta(c, theta))
}

/// Inverse of `Delta_theta` on the mean-zero part (the mean is dropped).
pub fn invert_delta_theta(f: &ScalarField, theta: f64) -> ScalarField {
    let nyq = f.grid().nyquist();
    f.map_spectral(|k, z| {
        if k == [0, 0, 0] {
            return Complex64::new(0.0, 0.0);
        }
        let kk: Vec<f64> = k
            .iter()
            .map(|&c| if c == nyq { 0.0 } else { c as f64 })
            .collect();
        let sym = kk[0] * kk[0] + kk[1] * kk[1] + (1.0 + theta) * kk[2] * kk[2];
        if sym == 0.0 {
            // pure Nyquist content has no invertible symbol; it is outside the
            // dealiased band and carries no information
            Complex64::new(0.0, 0.0)
        } else {
            z / (-TWO_PI * TWO_PI * sym)
        }
    })
}

/// Weighted gradient `grad_theta f = (d1 f, d2 f, (1+theta)^{1/2} d3 f)`.
pub fn grad_theta(f: &ScalarField, theta: f64) -> VectorField {
    assert!(theta > -1.0);
    VectorField::new(
        f.derivative(0),
        f.derivative(1),
        f.derivative(2).scale((1.0 + theta).sqrt()),
    )
}

/// Weighted divergence `div_theta u = d1 u1 + d2 u2 + (1+theta) d3 u3`.
pub fn div_theta(u: &VectorField, theta: f64) -> ScalarField {
    u.component(0)
        .derivative(0)
        .add(&u.component(1).derivative(1))
        .add(&u.component(2).derivative(2).scale(1.0 + theta))
}

/// Gradient matrix: `out[i][j] = d_j u^i` (row i of the matrix is `grad u^i`).
pub fn grad_matrix(u: &VectorField) -> [[ScalarField; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| u.component(i).derivative(j)))
}

/// Convolution with a kernel given by its Fourier coefficients: diagonal
/// multiplication `fhat(k) -> khat(k) fhat(k)`.
pub fn convolve(hat: &Array3<f64>, f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let src = f.spectral();
    let mut data = src.clone();
    for ((i1, i2, i3), v) in data.indexed_iter_mut() {
        *v *= hat[(i1, i2, i3)];
    }
    ScalarField::from_spectral(grid, data)
}

/// Componentwise convolution of a vector field.
pub fn convolve_vector(hat: &Array3<f64>, u: &VectorField) -> VectorField {
    u.map(|c| convolve(hat, c))
}

/// Per-mode scalar parts of the viscous symbol: `-A` acts at mode k as
/// `4 pi^2 (a0 I + b0 k (x) k)` with the returned `(a0, b0)`.
fn symbol_parts(p: &PhysParams, k: [f64; 3], eta: f64, xi: f64) -> (f64, f64) {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let a0 = p.mu * (k2 + p.theta * k[2] * k[2]) + eta * k2;
    let b0 = (p.mu + p.lambda) + xi;
    (a0, b0)
}

fn eff_k(grid: crate::grid::Grid, idx: (usize, usize, usize)) -> [f64; 3] {
    let k = grid.wavevector_eff(idx);
    [k[0] as f64, k[1] as f64, k[2] as f64]
}

/// Apply the viscous diffusion operator `A` spectrally.
pub fn apply_viscous(u: &VectorField, p: &PhysParams, ker: &GridKernels) -> VectorField {
    let grid = u.grid();
    let n = grid.n();
    let s: [&Array3<Complex64>; 3] = [
        u.component(0).spectral(),
        u.component(1).spectral(),
        u.component(2).spectral(),
    ];
    let mut out: [Array3<Complex64>; 3] =
        std::array::from_fn(|_| Array3::zeros((n, n, n)));
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let idx = (i1, i2, i3);
                let k = eff_k(grid, idx);
                let (a0, b0) = symbol_parts(p, k, ker.eta_hat[idx], ker.xi_hat[idx]);
                let uh = [s[0][idx], s[1][idx], s[2][idx]];
                let kdotu = uh[0] * k[0] + uh[1] * k[1] + uh[2] * k[2];
                let c = TWO_PI * TWO_PI;
                for i in 0..3 {
                    out[i][idx] = -c * (a0 * uh[i] + b0 * kdotu * k[i]);
                }
            }
        }
    }
    let [o1, o2, o3] = out;
    VectorField::new(
        ScalarField::from_spectral(grid, o1),
        ScalarField::from_spectral(grid, o2),
        ScalarField::from_spectral(grid, o3),
    )
}

/// Solve `-A w = f` for mean-zero `f`, per-mode 3x3 (Sherman-Morrison) inversion.
/// Returns the mean-zero solution; a singular symbol at a mode carrying data
/// is reported with the offending wavenumber.
pub fn invert_viscous(f: &VectorField, p: &PhysParams, ker: &GridKernels) -> Result<VectorField> {
    let grid = f.grid();
    let n = grid.n();
    let s: [&Array3<Complex64>; 3] = [
        f.component(0).spectral(),
        f.component(1).spectral(),
        f.component(2).spectral(),
    ];
    let scale = f
        .components()
        .iter()
        .map(|c| c.spectral().iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut out: [Array3<Complex64>; 3] =
        std::array::from_fn(|_| Array3::zeros((n, n, n)));
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let idx = (i1, i2, i3);
                let k = eff_k(grid, idx);
                let kw = grid.wavevector(idx);
                let fh = [s[0][idx], s[1][idx], s[2][idx]];
                let fmag = fh[0].norm() + fh[1].norm() + fh[2].norm();
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let (a0, b0) = symbol_parts(p, k, ker.eta_hat[idx], ker.xi_hat[idx]);
                let c = TWO_PI * TWO_PI;
                let a = c * a0;
                let denom = a + c * b0 * k2;
                if a.abs() <= 1e-14 * (1.0 + k2) || denom.abs() <= 1e-14 * (1.0 + k2) {
                    if fmag <= 1e-13 * scale {
                        // no data at a degenerate mode (the mean, or pure Nyquist)
                        continue;
                    }
                    return Err(Error::SingularSymbol(kw[0], kw[1], kw[2]));
                }
                let kdotf = fh[0] * k[0] + fh[1] * k[1] + fh[2] * k[2];
                let corr = kdotf * (c * b0) / (a * denom);
                for i in 0..3 {
                    out[i][idx] = fh[i] / a - corr * k[i];
                }
            }
        }
    }
    let [o1, o2, o3] = out;
    Ok(VectorField::new(
        ScalarField::from_spectral(grid, o1),
        ScalarField::from_spectral(grid, o2),
        ScalarField::from_spectral(grid, o3),
    ))
}

/// Energy dissipation density `C(u,u) = mu |grad_theta u|^2 + (mu+lambda)(div u)^2`.
pub fn quadratic_form_c(u: &VectorField, p: &PhysParams) -> ScalarField {
    let mut acc = ScalarField::zeros(u.grid());
    for i in 0..3 {
        let g = grad_theta(u.component(i), p.theta);
        acc = acc.add(&g.dot_nodal(&g));
    }
    let d = divergence(u);
    acc.scale(p.mu).add(&d.mul_nodal(&d).scale(p.mu + p.lambda))
}

/// The divergence-structure density `B(u,u)` with `<Au, u> = B - C`:
///
/// ```text
/// B = (mu/2) Delta_theta |u|^2 + (mu+lambda) div(u div u)
///   + div((eta*grad u) u) - (eta*grad u):grad u
///   + div((xi*div u) u)   - (xi*div u) div u
/// ```
pub fn quadratic_form_b(u: &VectorField, p: &PhysParams, ker: &GridKernels) -> ScalarField {
    let grid = u.grid();
    let usq = u.dot_nodal(u);
    let mut b = apply_delta_theta(&usq, p.theta).scale(0.5 * p.mu);

    let d = divergence(u);
    let mut div_ud = ScalarField::zeros(grid);
    for j in 0..3 {
        div_ud = div_ud.add(&u.component(j).mul_nodal(&d).derivative(j));
    }
    b = b.add(&div_ud.scale(p.mu + p.lambda));

    let g = grad_matrix(u);
    // eta terms: w_j = sum_i u^i (eta * d_j u^i)
    let mut div_w = ScalarField::zeros(grid);
    let mut contraction = ScalarField::zeros(grid);
    for j in 0..3 {
        let mut w_j = ScalarField::zeros(grid);
        for (i, row) in g.iter().enumerate() {
            let geta = convolve(&ker.eta_hat, &row[j]);
            w_j = w_j.add(&u.component(i).mul_nodal(&geta));
            contraction = contraction.add(&geta.mul_nodal(&row[j]));
        }
        div_w = div_w.add(&w_j.derivative(j));
    }
    b = b.add(&div_w).sub(&contraction);

    // xi terms
    let xid = convolve(&ker.xi_hat, &d);
    let mut div_xu = ScalarField::zeros(grid);
    for j in 0..3 {
        div_xu = div_xu.add(&xid.mul_nodal(u.component(j)).derivative(j));
    }
    b.add(&div_xu).sub(&xid.mul_nodal(&d))
}

/// Both sides of the ellipticity estimates.
#[derive(Clone, Copy, Debug)]
pub struct CoercivityBounds {
    /// `-<Au, u>` (integrated).
    pub lhs: f64,
    /// Alternative (i) lower bound:
    /// `(min(1,1+theta) mu - |eta|_1 - |xi|_1/3) |grad u|^2 + (mu+lambda) |div u|^2`.
    pub rhs_alt1: f64,
    /// Alternative (ii) Fourier-side lower bound:
    /// `min(1,1+theta) mu |grad u|^2 + sum eta_hat |grad u_hat|^2 + sum xi_hat |div u_hat|^2`.
    pub rhs_alt2: f64,
}

/// Evaluate `-<Au,u>` and the two hypothesis-(H) lower bounds on a mean-zero u.
pub fn coercivity_bounds(u: &VectorField, p: &PhysParams, ker: &GridKernels) -> CoercivityBounds {
    let lhs = -u.inner(&apply_viscous(u, p, ker));

    let grid = u.grid();
    let n = grid.n();
    let s: [&Array3<Complex64>; 3] = [
        u.component(0).spectral(),
        u.component(1).spectral(),
        u.component(2).spectral(),
    ];
    let mut grad_sq = 0.0; // |grad u|_{L2}^2
    let mut div_sq = 0.0; // |div u|_{L2}^2
    let mut eta_sum = 0.0; // sum_k eta_hat(k) sum_ij |d_j u^i hat|^2
    let mut xi_sum = 0.0; // sum_k xi_hat(k) |div u hat|^2
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let idx = (i1, i2, i3);
                let k = eff_k(grid, idx);
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let uh = [s[0][idx], s[1][idx], s[2][idx]];
                let u2 = uh[0].norm_sqr() + uh[1].norm_sqr() + uh[2].norm_sqr();
                let kdotu = uh[0] * k[0] + uh[1] * k[1] + uh[2] * k[2];
                let c = TWO_PI * TWO_PI;
                grad_sq += c * k2 * u2;
                div_sq += c * kdotu.norm_sqr();
                eta_sum += ker.eta_hat[idx] * c * k2 * u2;
                xi_sum += ker.xi_hat[idx] * c * kdotu.norm_sqr();
            }
        }
    }
    let (eta_l1, xi_l1) = ker.l1_norms();
    let iso = p.theta.min(0.0).mul_add(p.mu, p.mu); // min(1, 1+theta) * mu
    let rhs_alt1 = (iso - eta_l1 - xi_l1 / 3.0) * grad_sq + (p.mu + p.lambda) * div_sq;
    let rhs_alt2 = iso * grad_sq + eta_sum + xi_sum;
    CoercivityBounds {
        lhs,
        rhs_alt1,
        rhs_alt2,
    }
}

/// Relative residuals of the two flux operator identities
/// `div(Au) = (mu Delta_theta + (mu+lambda) Delta) div u + Delta((eta+xi)*div u)`
/// and
/// `div_theta(Au) = Delta_theta(mu div_theta u + (mu+lambda) div u + xi*div u)
///                  + Delta(eta*div_theta u)`.
pub fn flux_operator_identities(
    u: &VectorField,
    p: &PhysParams,
    ker: &GridKernels,
) -> (f64, f64) {
    let au = apply_viscous(u, p, ker);
    let d = divergence(u);
    let dt = div_theta(u, p.theta);

    let lhs1 = divergence(&au);
    let eta_plus_xi = &ker.eta_hat + &ker.xi_hat;
    let rhs1 = apply_delta_theta(&d, p.theta)
        .scale(p.mu)
        .add(&laplacian(&d).scale(p.mu + p.lambda))
        .add(&laplacian(&convolve(&eta_plus_xi, &d)));
    let scale1 = lhs1.l2_norm().max(1e-300);
    let r1 = lhs1.sub(&rhs1).l2_norm() / scale1;

    let lhs2 = div_theta(&au, p.theta);
    let inner = dt
        .scale(p.mu)
        .add(&d.scale(p.mu + p.lambda))
        .add(&convolve(&ker.xi_hat, &d));
    let rhs2 = apply_delta_theta(&inner, p.theta).add(&laplacian(&convolve(&ker.eta_hat, &dt)));
    let scale2 = lhs2.l2_norm().max(1e-300);
    let r2 = lhs2.sub(&rhs2).l2_norm() / scale2;

    (r1, r2)
}
