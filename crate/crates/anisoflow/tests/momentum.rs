//! The fixed-point map S(v) against a dense composition: LU continuity solve,
//! shared right-hand-side assembly, LU viscous inversion.

mod common;

use anisoflow::field::VectorField;
use anisoflow::momentum::{apply_s, momentum_rhs};
use anisoflow::params::{GridKernels, KernelDef, KernelSpec, PhysParams};
use anisoflow::solver::SolverConfig;
use anisoflow::synth::{random_vector, Counter};

#[test]
fn apply_s_matches_dense_composition() {
    let grid = anisoflow::grid::Grid::new(4).unwrap();
    let p = PhysParams {
        mu: 1.0,
        lambda: 0.5,
        theta: 0.2,
        gamma: 4.0,
        mass: 1.0,
        ..Default::default()
    };
    let ker = KernelSpec {
        eta: KernelDef::Gaussian {
            sigma: 0.2,
            amplitude: 0.3,
        },
        xi: KernelDef::Zero,
    }
    .realize(grid);
    let cfg = SolverConfig::default();
    let (eps, delta) = (0.1, 0.1);

    let mut rng = Counter::new(21);
    let g = random_vector(grid, &mut rng, 1, 0.2).project_mean_zero();
    let v = random_vector(grid, &mut rng, 1, 0.3).project_mean_zero();

    let step = apply_s(&v, &p, &ker, eps, delta, &g, &cfg).unwrap();

    let rho_dense = common::dense_solve_transport(&v, &p, eps, delta);
    let f = momentum_rhs(&rho_dense, &v, &p, eps, delta, &g, &cfg).unwrap();
    let u_dense = common::dense_invert_viscous(&f, &p, &ker);

    let rho_gap = step.transport.rho.sub(&rho_dense).l2_norm() / rho_dense.l2_norm();
    assert!(rho_gap <= 1e-8, "density gap {rho_gap}");
    let u_gap = step.u.sub(&u_dense).l2_norm() / u_dense.l2_norm().max(1e-30);
    assert!(u_gap <= 1e-8, "velocity gap {u_gap}");
}

#[test]
fn unforced_map_fixes_zero() {
    let grid = anisoflow::grid::Grid::new(8).unwrap();
    let p = PhysParams::default();
    let ker = GridKernels::zero(grid);
    let cfg = SolverConfig::default();
    let g = VectorField::zeros(grid);
    let v = VectorField::zeros(grid);
    let step = apply_s(&v, &p, &ker, 0.1, 0.1, &g, &cfg).unwrap();
    assert!(step.u.l2_norm() <= 1e-12);
    assert!(
        step.transport.rho.add_constant(-p.mass).max_abs_nodal() <= 1e-12
    );
}
