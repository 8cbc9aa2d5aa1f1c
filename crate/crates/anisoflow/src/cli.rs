//! Run orchestration: hypothesis checks, single solves, continuation studies,
//! and state diagnostics, with deterministic JSON/CSV reporting.
//!
//! Exit codes: 0 on success (converged / hypotheses pass), 1 on configuration
//! errors, 2 on non-convergence, 3 on hypothesis failure under `--strict`
//! (or in `check-hypotheses` mode).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::DiagnosticsReport;
use crate::error::Result;
use crate::multiplier::{check_hypothesis_h, HypothesisReport, MultiplierReport};
use crate::params::GridKernels;
use crate::report::{to_json_string, write_iteration_csv, write_json};
use crate::solver::{
    continuation_run, fixed_point_solve, state_monitors, SolverState, StateMonitors,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    #[value(name = "check-hypotheses")]
    CheckHypotheses,
    #[value(name = "solve")]
    Solve,
    #[value(name = "continuation")]
    Continuation,
    #[value(name = "diagnose")]
    Diagnose,
}

/// Pseudo-spectral solver for the stationary compressible system with
/// anisotropic nonlocal viscosity.
#[derive(Debug, Parser)]
#[command(name = "anisoflow", version, disable_version_flag = true)]
pub struct Cli {
    /// Path to the flat key = value configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for reports, logs, and field dumps.
    #[arg(long)]
    pub out: PathBuf,
    /// What to run.
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Fail (exit 3) when hypothesis (H) does not hold.
    #[arg(long)]
    pub strict: bool,
    /// Also write binary field dumps of rho and u.
    #[arg(long)]
    pub dump_fields: bool,
    /// Seed recorded in the report (reserved for randomized studies).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct StateSummary {
    eps: f64,
    delta: f64,
    homotopy: f64,
    iterations: usize,
    converged: bool,
    r_mass: f64,
    r_mom: f64,
    mass_error: f64,
    mean_u_error: f64,
    min_rho: f64,
    u_l2: f64,
    rho_l2: f64,
}

impl StateSummary {
    fn from_state(state: &SolverState, mass: f64) -> Self {
        let mean_u = state.u.mean_vector();
        StateSummary {
            eps: state.eps,
            delta: state.delta,
            homotopy: state.homotopy,
            iterations: state.iteration,
            converged: state.converged,
            r_mass: state.r_mass,
            r_mom: state.r_mom,
            mass_error: (state.rho.mean() - mass).abs(),
            mean_u_error: mean_u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            min_rho: state.rho.min_nodal(),
            u_l2: state.u.l2_norm(),
            rho_l2: state.rho.l2_norm(),
        }
    }
}

#[derive(Serialize)]
struct HypothesesReportFile {
    mode: String,
    seed: u64,
    config: BTreeMap<String, String>,
    hypothesis: HypothesisReport,
    multiplier: MultiplierReport,
}

#[derive(Serialize)]
struct SolveReportFile {
    mode: String,
    seed: u64,
    config: BTreeMap<String, String>,
    hypothesis_passed: bool,
    state: StateSummary,
    monitors: StateMonitors,
}

#[derive(Serialize)]
struct DiagnoseReportFile {
    mode: String,
    seed: u64,
    config: BTreeMap<String, String>,
    hypothesis_passed: bool,
    state: StateSummary,
    monitors: StateMonitors,
    diagnostics: DiagnosticsReport,
}

#[derive(Serialize)]
struct ContinuationReportFile {
    mode: String,
    seed: u64,
    config: BTreeMap<String, String>,
    hypothesis_passed: bool,
    states: Vec<StateSummary>,
    monitors: Vec<StateMonitors>,
    all_converged: bool,
}

fn dump_state_fields(dir: &Path, tag: &str, state: &SolverState) -> Result<()> {
    crate::fieldio::write_scalar(&dir.join(format!("{tag}_rho.field")), &state.rho)?;
    crate::fieldio::write_vector(&dir.join(format!("{tag}_u.field")), &state.u)?;
    Ok(())
}

/// Execute a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run_inner(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::from_file(&cli.config)?;
    std::fs::create_dir_all(&cli.out)?;
    let grid = cfg.grid();
    let ker: GridKernels = cfg.kernels.realize(grid);
    let g = cfg.build_forcing(grid);
    let hypothesis = check_hypothesis_h(&cfg.phys, &ker, &g);
    let resolved = cfg.resolved();

    if cli.mode == Mode::CheckHypotheses {
        let multiplier =
            MultiplierReport::compute(grid, &cfg.phys, cfg.multiplier_c, cfg.multiplier_c0)?;
        let passed = hypothesis.passed;
        let file = HypothesesReportFile {
            mode: "check-hypotheses".into(),
            seed: cli.seed,
            config: resolved,
            hypothesis,
            multiplier,
        };
        write_json(&cli.out.join("hypotheses.json"), &file)?;
        println!("{}", to_json_string(&file.hypothesis)?);
        return Ok(if passed { 0 } else { 3 });
    }

    if cli.strict && !hypothesis.passed {
        let name = hypothesis
            .first_failure()
            .map(|b| b.name.clone())
            .unwrap_or_default();
        eprintln!("(H) failed: {name}");
        return Ok(3);
    }

    match cli.mode {
        Mode::Solve | Mode::Diagnose => {
            let state =
                fixed_point_solve(&cfg.phys, &ker, &g, cfg.eps, cfg.delta, &cfg.solver, None)?;
            write_iteration_csv(&cli.out.join("iterations.csv"), &state.iter_log)?;
            if cli.dump_fields {
                dump_state_fields(&cli.out, "state", &state)?;
            }
            let monitors = state_monitors(&state, &cfg.phys, &ker, &g, &cfg.solver)?;
            let summary = StateSummary::from_state(&state, cfg.phys.mass);
            let converged = state.converged;
            if cli.mode == Mode::Diagnose {
                let diagnostics =
                    DiagnosticsReport::compute(&state, &cfg.phys, &ker, &g, &cfg.solver)?;
                let file = DiagnoseReportFile {
                    mode: "diagnose".into(),
                    seed: cli.seed,
                    config: resolved,
                    hypothesis_passed: hypothesis.passed,
                    state: summary,
                    monitors,
                    diagnostics,
                };
                write_json(&cli.out.join("diagnose.json"), &file)?;
            } else {
                let file = SolveReportFile {
                    mode: "solve".into(),
                    seed: cli.seed,
                    config: resolved,
                    hypothesis_passed: hypothesis.passed,
                    state: summary,
                    monitors,
                };
                write_json(&cli.out.join("solve.json"), &file)?;
            }
            Ok(if converged { 0 } else { 2 })
        }
        Mode::Continuation => {
            let points = continuation_run(&cfg.phys, &ker, &g, &cfg.solver)?;
            let mut states = Vec::new();
            let mut monitors = Vec::new();
            for (i, pt) in points.iter().enumerate() {
                write_iteration_csv(
                    &cli.out.join(format!("state_{i:03}.csv")),
                    &pt.state.iter_log,
                )?;
                if cli.dump_fields {
                    dump_state_fields(&cli.out, &format!("state_{i:03}"), &pt.state)?;
                }
                let diagnostics =
                    DiagnosticsReport::compute(&pt.state, &cfg.phys, &ker, &g, &cfg.solver)?;
                write_json(&cli.out.join(format!("state_{i:03}.json")), &diagnostics)?;
                states.push(StateSummary::from_state(&pt.state, cfg.phys.mass));
                monitors.push(pt.monitors);
            }
            let all_converged = points.len() == cfg.solver.continuation_schedule.len()
                && points.iter().all(|pt| pt.state.converged);
            let file = ContinuationReportFile {
                mode: "continuation".into(),
                seed: cli.seed,
                config: resolved,
                hypothesis_passed: hypothesis.passed,
                states,
                monitors,
                all_converged,
            };
            write_json(&cli.out.join("continuation.json"), &file)?;
            Ok(if all_converged { 0 } else { 2 })
        }
        Mode::CheckHypotheses => unreachable!("handled above"),
    }
}
