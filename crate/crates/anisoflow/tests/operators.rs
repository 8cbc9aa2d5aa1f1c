//! Viscous-operator properties on random trigonometric fields: flux operator
//! identities, coercivity lower bounds under both kernel alternatives, and
//! agreement of the spectral inverse with a dense LU oracle.

mod common;

use anisoflow::field::VectorField;
use anisoflow::grid::Grid;
use anisoflow::operators::{apply_viscous, coercivity_bounds, flux_operator_identities, invert_viscous};
use anisoflow::params::{GridKernels, KernelDef, KernelSpec, PhysParams};
use anisoflow::synth::{random_vector, Counter};

fn params_theta(theta: f64) -> PhysParams {
    PhysParams {
        mu: 1.0,
        lambda: 0.5,
        theta,
        ..Default::default()
    }
}

/// Kernels for alternative (i): small L1 norms, mixed-sign eta, xi = 0.
fn kernels_alt1(grid: Grid) -> GridKernels {
    KernelSpec {
        eta: KernelDef::Modes(vec![([1, 0, 0], -0.05), ([0, 1, 1], 0.04)]),
        xi: KernelDef::Zero,
    }
    .realize(grid)
}

/// Kernels for alternative (ii): nonnegative Gaussian hats.
fn kernels_alt2(grid: Grid) -> GridKernels {
    KernelSpec {
        eta: KernelDef::Gaussian {
            sigma: 0.15,
            amplitude: 0.4,
        },
        xi: KernelDef::Gaussian {
            sigma: 0.25,
            amplitude: 0.3,
        },
    }
    .realize(grid)
}

#[test]
fn flux_identities_on_random_fields() {
    let grid = Grid::new(16).unwrap();
    let p = params_theta(0.3);
    for seed in 0..50 {
        let mut rng = Counter::new(seed);
        let u = random_vector(grid, &mut rng, 4, 1.0);
        for ker in [GridKernels::zero(grid), kernels_alt2(grid)] {
            let (r_div, r_div_theta) = flux_operator_identities(&u, &p, &ker);
            assert!(r_div <= 1e-10, "seed {seed}: div identity residual {r_div}");
            assert!(
                r_div_theta <= 1e-10,
                "seed {seed}: div_theta identity residual {r_div_theta}"
            );
        }
    }
}

#[test]
fn coercivity_lower_bounds_hold() {
    let grid = Grid::new(16).unwrap();
    for seed in 0..100 {
        let mut rng = Counter::new(seed);
        let u = random_vector(grid, &mut rng, 4, 1.0).project_mean_zero();
        for theta in [0.0, 0.2, -0.3] {
            let p = params_theta(theta);
            let b1 = coercivity_bounds(&u, &p, &kernels_alt1(grid));
            assert!(
                b1.lhs >= b1.rhs_alt1 - 1e-10,
                "seed {seed} theta {theta}: {} < {}",
                b1.lhs,
                b1.rhs_alt1
            );
            let b2 = coercivity_bounds(&u, &p, &kernels_alt2(grid));
            assert!(
                b2.lhs >= b2.rhs_alt2 - 1e-10,
                "seed {seed} theta {theta}: {} < {}",
                b2.lhs,
                b2.rhs_alt2
            );
        }
    }
}

#[test]
fn invert_viscous_matches_dense_lu() {
    let grid = Grid::new(4).unwrap();
    let p = params_theta(0.2);
    for (label, ker) in [("zero", GridKernels::zero(grid)), ("gauss", kernels_alt2(grid))] {
        let mut rng = Counter::new(11);
        let f = random_vector(grid, &mut rng, 1, 1.0).project_mean_zero();
        let fast = invert_viscous(&f, &p, &ker).unwrap();
        let dense = common::dense_invert_viscous(&f, &p, &ker);
        let rel = fast.sub(&dense).l2_norm() / dense.l2_norm();
        assert!(rel <= 1e-10, "{label}: relative gap {rel}");
        // and the inverse actually inverts
        let back = apply_viscous(&fast, &p, &ker).scale(-1.0);
        assert!(back.sub(&f).l2_norm() <= 1e-10 * f.l2_norm());
    }
}

#[test]
fn invert_viscous_rejects_nonzero_mean_when_ill_posed() {
    // -A annihilates constants: a right-hand side with a mean component has no
    // solution and must be reported as a singular symbol at k = 0
    let grid = Grid::new(8).unwrap();
    let p = params_theta(0.0);
    let ker = GridKernels::zero(grid);
    let f = VectorField::new(
        anisoflow::field::ScalarField::constant(grid, 1.0),
        anisoflow::field::ScalarField::zeros(grid),
        anisoflow::field::ScalarField::zeros(grid),
    );
    assert!(invert_viscous(&f, &p, &ker).is_err());
}
