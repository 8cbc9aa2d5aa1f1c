//! Acceptance gate: one test per verification criterion, each printing a
//! single `ACCEPTANCE <n> <name>: PASS|FAIL` line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines directly.

mod common;

use anisoflow::diagnostics::{bootstrap_terms, renorm_residual};
use anisoflow::field::{ScalarField, VectorField};
use anisoflow::grid::Grid;
use anisoflow::multiplier::{apply_pressure_correction, eval_m, mihlin_constants, sup_abs_m};
use anisoflow::operators::{coercivity_bounds, flux_operator_identities, invert_viscous};
use anisoflow::params::{GridKernels, KernelDef, KernelSpec, PhysParams};
use anisoflow::solver::{
    continuation_run, fixed_point_solve, SolverConfig, SolverState,
};
use anisoflow::synth::{random_scalar, random_vector, Counter};
use anisoflow::transport::solve_transport;
use num_complex::Complex64;

/// Run a criterion body, print its verdict line, and propagate any failure.
fn criterion<F: FnOnce() + std::panic::UnwindSafe>(n: usize, name: &str, body: F) {
    let result = std::panic::catch_unwind(body);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} {name}: {verdict}");
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

/// g = amp cos(2 pi x1) e1 (compressive single-mode forcing).
fn forcing(grid: Grid, amp: f64) -> VectorField {
    let half = Complex64::new(amp / 2.0, 0.0);
    VectorField::new(
        ScalarField::from_modes(grid, &[([1, 0, 0], half), ([-1, 0, 0], half)]),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    )
}

fn solve(
    p: &PhysParams,
    ker: &GridKernels,
    g: &VectorField,
    eps: f64,
    delta: f64,
) -> SolverState {
    let cfg = SolverConfig::default();
    let state = fixed_point_solve(p, ker, g, eps, delta, &cfg, None).unwrap();
    assert!(
        state.converged,
        "solve did not converge: r_mass {} r_mom {}",
        state.r_mass, state.r_mom
    );
    state
}

#[test]
fn acceptance_01_trivial_fixed_point() {
    criterion(1, "trivial fixed point", || {
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            theta: 0.2,
            mass: 1.5,
            ..Default::default()
        };
        let ker = GridKernels::zero(grid);
        let g = VectorField::zeros(grid);
        let state = solve(&p, &ker, &g, 0.1, 0.1);
        assert!(state.u.l2_norm() <= 1e-12);
        assert!(state.rho.add_constant(-p.mass).max_abs_nodal() <= 1e-12);
        assert!(state.r_mass <= 1e-12 && state.r_mom <= 1e-12);
    });
}

#[test]
fn acceptance_02_dense_oracle_equivalence() {
    criterion(2, "dense-oracle equivalence", || {
        let grid = Grid::new(4).unwrap();
        let p = PhysParams {
            lambda: 0.5,
            theta: 0.2,
            ..Default::default()
        };
        let cfg = SolverConfig::default();
        let mut rng = Counter::new(7);
        let v = random_vector(grid, &mut rng, 1, 0.2).project_mean_zero();

        let fast = solve_transport(&v, &p, 0.1, 0.1, &cfg);
        assert!(fast.converged);
        let dense = common::dense_solve_transport(&v, &p, 0.1, 0.1);
        let rel = fast.rho.sub(&dense).l2_norm() / dense.l2_norm();
        assert!(rel <= 1e-10, "transport gap {rel}");

        let ker = KernelSpec {
            eta: KernelDef::Gaussian {
                sigma: 0.2,
                amplitude: 0.3,
            },
            xi: KernelDef::Zero,
        }
        .realize(grid);
        let f = random_vector(grid, &mut rng, 1, 1.0).project_mean_zero();
        let w = invert_viscous(&f, &p, &ker).unwrap();
        let wd = common::dense_invert_viscous(&f, &p, &ker);
        let rel = w.sub(&wd).l2_norm() / wd.l2_norm();
        assert!(rel <= 1e-10, "viscous-inverse gap {rel}");
    });
}

#[test]
fn acceptance_03_energy_identity() {
    criterion(3, "energy identity at converged solves", || {
        let grid = Grid::new(16).unwrap();
        let ker = GridKernels::zero(grid);
        let g = forcing(grid, 0.2);
        let cfg = SolverConfig::default();
        for theta in [0.0, 0.2] {
            let p = PhysParams {
                mu: 1.0,
                lambda: 1.0,
                theta,
                gamma: 4.0,
                ..Default::default()
            };
            let state = solve(&p, &ker, &g, 0.1, 0.1);
            let energy = anisoflow::solver::energy_balance(
                &state.rho, &state.u, &p, &ker, &g, 0.1, 0.1, &cfg,
            )
            .unwrap();
            assert!(
                energy.defect <= 1e-6,
                "theta {theta}: energy defect {}",
                energy.defect
            );
        }
    });
}

#[test]
fn acceptance_04_coercivity() {
    criterion(4, "coercivity lower bounds (100 seeds)", || {
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            theta: 0.2,
            ..Default::default()
        };
        // alternative (i): small-L1 mixed-sign kernels; (ii): nonnegative hats
        let ker1 = KernelSpec {
            eta: KernelDef::Modes(vec![([1, 0, 0], -0.05), ([0, 1, 1], 0.04)]),
            xi: KernelDef::Zero,
        }
        .realize(grid);
        let ker2 = KernelSpec {
            eta: KernelDef::Gaussian {
                sigma: 0.15,
                amplitude: 0.4,
            },
            xi: KernelDef::Gaussian {
                sigma: 0.25,
                amplitude: 0.3,
            },
        }
        .realize(grid);
        for seed in 0..100 {
            let mut rng = Counter::new(seed);
            let u = random_vector(grid, &mut rng, 4, 1.0).project_mean_zero();
            let b1 = coercivity_bounds(&u, &p, &ker1);
            assert!(b1.lhs >= b1.rhs_alt1 - 1e-10, "seed {seed} alt (i)");
            let b2 = coercivity_bounds(&u, &p, &ker2);
            assert!(b2.lhs >= b2.rhs_alt2 - 1e-10, "seed {seed} alt (ii)");
        }
    });
}

#[test]
fn acceptance_05_operator_identities() {
    criterion(5, "flux operator identities (50 fields)", || {
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            lambda: 0.5,
            theta: 0.3,
            ..Default::default()
        };
        let ker = KernelSpec {
            eta: KernelDef::Gaussian {
                sigma: 0.2,
                amplitude: 0.3,
            },
            xi: KernelDef::Gaussian {
                sigma: 0.3,
                amplitude: 0.2,
            },
        }
        .realize(grid);
        for seed in 0..50 {
            let mut rng = Counter::new(seed);
            let u = random_vector(grid, &mut rng, 4, 1.0);
            let (r_div, r_div_theta) = flux_operator_identities(&u, &p, &ker);
            assert!(r_div <= 1e-10, "seed {seed}: div residual {r_div}");
            assert!(r_div_theta <= 1e-10, "seed {seed}: div_theta residual {r_div_theta}");
        }
    });
}

#[test]
fn acceptance_06_multiplier_suite() {
    criterion(6, "multiplier suite", || {
        // hand values
        let p0 = PhysParams {
            theta: 0.0,
            ..Default::default()
        };
        for k in [[1, 0, 0], [0, 2, 1], [3, -1, 2]] {
            assert_eq!(eval_m(k, &p0).unwrap(), 0.0);
        }
        let p1 = PhysParams {
            mu: 1.0,
            lambda: 0.0,
            theta: 1.0,
            ..Default::default()
        };
        assert!((eval_m([0, 0, 1], &p1).unwrap() - 1.0 / 3.0).abs() <= 1e-15);

        // Mihlin constants against the closed formulas on 20 random triples
        let mut rng = Counter::new(3);
        for _ in 0..20 {
            let a1 = 0.1 + 1.5 * (rng.next_f64() + 1.0);
            let a2 = 0.1 + 1.5 * (rng.next_f64() + 1.0);
            let a3 = 0.1 + 1.5 * (rng.next_f64() + 1.0);
            let (c0, c1, c2) = mihlin_constants(a1, a2, a3).unwrap();
            let amin = a1.min(a2).min(a3);
            assert!((c0 - 1.0 / a3).abs() <= 1e-12 / a3);
            let e1 = (a1.sqrt() / a3).max(a2.sqrt() / a3).max(1.0 / a3.sqrt()) / amin.sqrt();
            assert!((c1 - e1).abs() <= 1e-12 * e1);
            let e2 = (a1 / a3).max(a2 / a3).max(1.0) / amin;
            assert!((c2 - e2).abs() <= 1e-12 * e2);
        }

        // empirical operator norm: attained at the maximizing wavevector
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            lambda: 0.5,
            theta: 0.8,
            ..Default::default()
        };
        let sup = sup_abs_m(grid, &p);
        let n = grid.n();
        let mut kstar = [0i64, 0, 1];
        let mut best = 0.0;
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let k = grid.wavevector_eff((i1, i2, i3));
                    if k == [0, 0, 0] {
                        continue;
                    }
                    let m = eval_m(k, &p).unwrap().abs();
                    if m > best {
                        best = m;
                        kstar = k;
                    }
                }
            }
        }
        let f = ScalarField::from_modes(
            grid,
            &[
                (kstar, Complex64::new(0.5, 0.0)),
                ([-kstar[0], -kstar[1], -kstar[2]], Complex64::new(0.5, 0.0)),
            ],
        );
        let ratio = apply_pressure_correction(&f, &p).l2_norm() / f.l2_norm();
        assert!((ratio - sup).abs() <= 1e-12 * sup);
        for seed in 0..20 {
            let mut rng = Counter::new(seed);
            let h = random_scalar(grid, &mut rng, 6, 1.0);
            let r = apply_pressure_correction(&h, &p).l2_norm() / h.l2_norm();
            assert!(r <= sup * (1.0 + 1e-12));
        }
    });
}

#[test]
fn acceptance_07_continuation_invariants() {
    criterion(7, "continuation mass/mean invariants and uniform bounds", || {
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            mu: 1.0,
            lambda: 1.0,
            theta: 0.2,
            gamma: 4.0,
            ..Default::default()
        };
        let ker = GridKernels::zero(grid);
        let g = forcing(grid, 0.2);
        let cfg = SolverConfig {
            continuation_schedule: vec![
                (0.1, 0.1),
                (0.1, 0.01),
                (0.1, 0.001),
                (0.01, 0.001),
            ],
            ..Default::default()
        };
        let points = continuation_run(&p, &ker, &g, &cfg).unwrap();
        assert_eq!(points.len(), cfg.continuation_schedule.len());
        // the energy balance bounds the sum of the monitored terms by the
        // forcing duality term uniformly in (eps, delta); calibrate that
        // budget once from the first state and require every later monitor
        // (each a share of the budget) to stay within 10% of it
        let budget = 1.1 * points[0].monitors.energy_lhs;
        for pt in &points {
            assert!(pt.state.converged, "eps {} delta {}", pt.state.eps, pt.state.delta);
            assert!((pt.state.rho.mean() - p.mass).abs() <= 1e-10);
            let mean_u = pt.state.u.mean_vector();
            assert_eq!(mean_u, [0.0, 0.0, 0.0], "mean velocity must vanish exactly");
            let m = &pt.monitors;
            assert!(m.delta_rho_gamma <= budget);
            assert!(m.eps_grad_rho_gamma_half <= budget);
            assert!(m.energy_lhs <= budget);
        }
    });
}

#[test]
fn acceptance_08_renormalization_scaling() {
    criterion(8, "renormalization residual scaling in eps", || {
        let grid = Grid::new(16).unwrap();
        let p = PhysParams {
            mu: 1.0,
            lambda: 1.0,
            gamma: 4.0,
            mass: 2.0,
            ..Default::default()
        };
        let ker = GridKernels::zero(grid);
        let g = forcing(grid, 0.2);
        // walk eps down by continuation (the stiff M = 2 pressure makes a
        // cold start at small eps diverge) and compare the two target states
        let cfg = SolverConfig {
            continuation_schedule: vec![
                (0.1, 0.1),
                (0.1, 0.01),
                (0.1, 1e-3),
                (0.05, 1e-3),
                (0.02, 1e-3),
                (0.01, 1e-3),
            ],
            ..Default::default()
        };
        let points = continuation_run(&p, &ker, &g, &cfg).unwrap();
        assert_eq!(points.len(), cfg.continuation_schedule.len());
        let res_at = |idx: usize| {
            let s = &points[idx].state;
            assert!(s.converged, "eps {} did not converge", s.eps);
            renorm_residual(&s.rho, &s.u, p.gamma)
        };
        let (r1, r2) = (res_at(2), res_at(5));
        let ratio = r1 / r2;
        assert!(
            (3.0..=30.0).contains(&ratio),
            "eps-scaling ratio {ratio} outside [3, 30] (r(0.1) = {r1}, r(0.01) = {r2})"
        );
    });
}

#[test]
fn acceptance_09_bootstrap_ledger_signs() {
    criterion(9, "bootstrap ledger signs and T3 smallness", || {
        let grid = Grid::new(16).unwrap();
        let ker = GridKernels::zero(grid);
        let g = forcing(grid, 0.2);
        let cfg = SolverConfig::default();
        for theta in [0.0, 0.2] {
            let p = PhysParams {
                theta,
                ..Default::default()
            };
            let state = solve(&p, &ker, &g, 0.1, 0.1);
            let alpha = 2.0 * p.gamma - 3.0;
            let bt = bootstrap_terms(
                &state.rho, &state.u, &p, &ker, &g, 0.1, 0.1, alpha, &cfg,
            )
            .unwrap();
            assert!(
                bt.weighted[1] <= 0.0,
                "theta {theta}: int rho^alpha T2 = {}",
                bt.weighted[1]
            );
            assert!(
                bt.t3_ratio <= bt.smallness * 1.1,
                "theta {theta}: T3 ratio {} vs smallness {}",
                bt.t3_ratio,
                bt.smallness
            );
        }
    });
}

#[test]
fn acceptance_10_determinism() {
    criterion(10, "byte-identical reports for identical runs", || {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("run.conf");
        std::fs::write(
            &config,
            "grid.n = 16\nphys.theta = 0.2\nreg.eps = 0.1\nreg.delta = 0.1\n\
             forcing.modes = (1,0,0): 0.2 0.0 0.0\nsolver.tol = 1e-10\n",
        )
        .unwrap();
        let run = |out: &std::path::Path| {
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_anisoflow"))
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(out)
                .args(["--mode", "diagnose", "--seed", "11", "--dump-fields"])
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0));
        };
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run(&a);
        run(&b);
        for name in ["diagnose.json", "iterations.csv", "state_rho.field", "state_u.field"] {
            assert_eq!(
                std::fs::read(a.join(name)).unwrap(),
                std::fs::read(b.join(name)).unwrap(),
                "{name} differs between identical runs"
            );
        }
    });
}
