//! Flat key-value run configuration.
//!
//! The format is one `key = value` pair per line with dotted section names and
//! `#` comments. Example:
//!
//! ```text
//! grid.n = 16
//! phys.mu = 1.0
//! phys.lambda = 1.0
//! phys.theta = 0.2
//! phys.a = 1.0
//! phys.gamma = 4.0
//! phys.M = 1.0
//! reg.eps = 0.1
//! reg.delta = 0.1
//! kernels.eta = none
//! kernels.xi = gaussian(0.2, 0.1)
//! forcing.modes = (1,0,0): 0.0 0.2 0.0; (0,1,1): 0.1 0.0 0.0
//! solver.tol = 1e-10
//! schedule.homotopy = 1.0
//! schedule.continuation = (0.1, 0.1); (0.1, 0.01)
//! multiplier.C = 1.0
//! multiplier.c0 = 0.05
//! ```
//!
//! Kernels are `none`, `gaussian(sigma, amplitude)`, or an explicit mode list
//! `(k1,k2,k3): value; ...`. Forcing is a list of `(k1,k2,k3): a1 a2 a3`
//! entries, each contributing `a_i cos(2 pi k.x)` to component i; the k = 0
//! entry is forbidden so the forcing has zero mean. Parse errors always name
//! the offending key.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::{KernelDef, KernelSpec, PhysParams};
use crate::solver::SolverConfig;

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub phys: PhysParams,
    pub eps: f64,
    pub delta: f64,
    pub kernels: KernelSpec,
    pub forcing_modes: Vec<([i64; 3], [f64; 3])>,
    pub solver: SolverConfig,
    pub multiplier_c: f64,
    pub multiplier_c0: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 16,
            phys: PhysParams::default(),
            eps: 0.1,
            delta: 0.1,
            kernels: KernelSpec::default(),
            forcing_modes: Vec::new(),
            solver: SolverConfig::default(),
            multiplier_c: 1.0,
            multiplier_c0: 0.05,
        }
    }
}

fn err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| err(key, format!("`{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| err(key, format!("`{v}` is not a nonnegative integer")))
}

/// Parse `(k1,k2,k3)` into a wavenumber triple.
fn parse_triple(key: &str, v: &str) -> Result<[i64; 3]> {
    let inner = v
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| err(key, format!("`{v}` is not a (k1,k2,k3) triple")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(err(key, format!("`{v}` must have exactly three components")));
    }
    let mut k = [0_i64; 3];
    for (ki, part) in k.iter_mut().zip(&parts) {
        *ki = part
            .trim()
            .parse::<i64>()
            .map_err(|_| err(key, format!("`{part}` is not an integer wavenumber")))?;
    }
    Ok(k)
}

fn parse_kernel(key: &str, v: &str) -> Result<KernelDef> {
    let v = v.trim();
    if v.eq_ignore_ascii_case("none") {
        return Ok(KernelDef::Zero);
    }
    if let Some(rest) = v.strip_prefix("gaussian") {
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err(key, "gaussian kernel needs `(sigma, amplitude)`"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(err(key, "gaussian kernel needs exactly two arguments"));
        }
        return Ok(KernelDef::Gaussian {
            sigma: parse_f64(key, parts[0])?,
            amplitude: parse_f64(key, parts[1])?,
        });
    }
    // explicit mode list: (k): value; ...
    let mut modes = Vec::new();
    for entry in v.split(';') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (k, val) = entry
            .rsplit_once(':')
            .ok_or_else(|| err(key, format!("`{entry}` must be `(k1,k2,k3): value`")))?;
        modes.push((parse_triple(key, k)?, parse_f64(key, val)?));
    }
    if modes.is_empty() {
        return Err(err(key, "empty kernel definition"));
    }
    Ok(KernelDef::Modes(modes))
}

fn parse_forcing(key: &str, v: &str) -> Result<Vec<([i64; 3], [f64; 3])>> {
    let mut out = Vec::new();
    for entry in v.split(';') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (k, amps) = entry
            .rsplit_once(':')
            .ok_or_else(|| err(key, format!("`{entry}` must be `(k1,k2,k3): a1 a2 a3`")))?;
        let k = parse_triple(key, k)?;
        if k == [0, 0, 0] {
            return Err(err(key, "the k = 0 mode is forbidden (forcing must have zero mean)"));
        }
        let parts: Vec<&str> = amps.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(key, format!("`{entry}` needs three amplitudes")));
        }
        let mut a = [0.0_f64; 3];
        for (ai, part) in a.iter_mut().zip(&parts) {
            *ai = parse_f64(key, part)?;
        }
        out.push((k, a));
    }
    Ok(out)
}

fn parse_homotopy(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<Vec<f64>>>()
}

fn parse_continuation(key: &str, v: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for entry in v.split(';') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let inner = entry
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err(key, format!("`{entry}` must be `(eps, delta)`")))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(err(key, format!("`{entry}` must have two components")));
        }
        out.push((parse_f64(key, parts[0])?, parse_f64(key, parts[1])?));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                err(
                    "<line>",
                    format!("line {}: `{line}` is not `key = value`", lineno + 1),
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "grid.n" => cfg.n = parse_usize(key, value)?,
                "phys.mu" => cfg.phys.mu = parse_f64(key, value)?,
                "phys.lambda" => cfg.phys.lambda = parse_f64(key, value)?,
                "phys.theta" => cfg.phys.theta = parse_f64(key, value)?,
                "phys.a" => cfg.phys.a = parse_f64(key, value)?,
                "phys.gamma" => cfg.phys.gamma = parse_f64(key, value)?,
                "phys.M" => cfg.phys.mass = parse_f64(key, value)?,
                "reg.eps" => cfg.eps = parse_f64(key, value)?,
                "reg.delta" => cfg.delta = parse_f64(key, value)?,
                "kernels.eta" => cfg.kernels.eta = parse_kernel(key, value)?,
                "kernels.xi" => cfg.kernels.xi = parse_kernel(key, value)?,
                "forcing.modes" => cfg.forcing_modes = parse_forcing(key, value)?,
                "solver.tol" => cfg.solver.tol = parse_f64(key, value)?,
                "solver.max_iter" => cfg.solver.max_iter = parse_usize(key, value)?,
                "solver.relax" => cfg.solver.relax = parse_f64(key, value)?,
                "solver.pos_tol" => cfg.solver.pos_tol = parse_f64(key, value)?,
                "solver.rho_floor" => cfg.solver.rho_floor = parse_f64(key, value)?,
                "solver.stall_window" => cfg.solver.stall_window = parse_usize(key, value)?,
                "schedule.homotopy" => cfg.solver.homotopy_schedule = parse_homotopy(key, value)?,
                "schedule.continuation" => {
                    cfg.solver.continuation_schedule = parse_continuation(key, value)?
                }
                "multiplier.C" => cfg.multiplier_c = parse_f64(key, value)?,
                "multiplier.c0" => cfg.multiplier_c0 = parse_f64(key, value)?,
                other => return Err(err(other, "unknown configuration key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Structural validation beyond per-key parsing.
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n).map_err(|_| err("grid.n", "must be a power of two >= 4"))?;
        self.phys.validate()?;
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(err("reg.eps", "must lie in (0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(err("reg.delta", "must lie in (0, 1]"));
        }
        self.solver.validate()?;
        if !(self.multiplier_c > 0.0) {
            return Err(err("multiplier.C", "must be positive"));
        }
        if !(self.multiplier_c0 > 0.0) {
            return Err(err("multiplier.c0", "must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n).expect("validated")
    }

    /// Build the forcing field: each entry `(k, a)` contributes
    /// `a_i cos(2 pi k.x)` to component i. Mean-zero by construction.
    pub fn build_forcing(&self, grid: Grid) -> VectorField {
        let comp = |i: usize| {
            let modes: Vec<([i64; 3], Complex64)> = self
                .forcing_modes
                .iter()
                .map(|&(k, a)| (k, Complex64::new(0.5 * a[i], 0.0)))
                .collect();
            ScalarField::from_modes(grid, &modes)
        };
        VectorField::new(comp(0), comp(1), comp(2))
    }

    /// The resolved configuration as a flat key -> value map (embedded in every
    /// report for auditability; values round-trip through the parser).
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let kernel_str = |k: &KernelDef| match k {
            KernelDef::Zero => "none".to_string(),
            KernelDef::Gaussian { sigma, amplitude } => {
                format!("gaussian({sigma:e}, {amplitude:e})")
            }
            KernelDef::Modes(modes) => modes
                .iter()
                .map(|(k, v)| format!("({},{},{}): {v:e}", k[0], k[1], k[2]))
                .collect::<Vec<_>>()
                .join("; "),
        };
        m.insert("grid.n".into(), self.n.to_string());
        m.insert("phys.mu".into(), format!("{:e}", self.phys.mu));
        m.insert("phys.lambda".into(), format!("{:e}", self.phys.lambda));
        m.insert("phys.theta".into(), format!("{:e}", self.phys.theta));
        m.insert("phys.a".into(), format!("{:e}", self.phys.a));
        m.insert("phys.gamma".into(), format!("{:e}", self.phys.gamma));
        m.insert("phys.M".into(), format!("{:e}", self.phys.mass));
        m.insert("reg.eps".into(), format!("{:e}", self.eps));
        m.insert("reg.delta".into(), format!("{:e}", self.delta));
        m.insert("kernels.eta".into(), kernel_str(&self.kernels.eta));
        m.insert("kernels.xi".into(), kernel_str(&self.kernels.xi));
        m.insert(
            "forcing.modes".into(),
            self.forcing_modes
                .iter()
                .map(|(k, a)| {
                    format!(
                        "({},{},{}): {:e} {:e} {:e}",
                        k[0], k[1], k[2], a[0], a[1], a[2]
                    )
                })
                .collect::<Vec<_>>()
                .join("; "),
        );
        m.insert("solver.tol".into(), format!("{:e}", self.solver.tol));
        m.insert("solver.max_iter".into(), self.solver.max_iter.to_string());
        m.insert("solver.relax".into(), format!("{:e}", self.solver.relax));
        m.insert("solver.pos_tol".into(), format!("{:e}", self.solver.pos_tol));
        m.insert(
            "solver.rho_floor".into(),
            format!("{:e}", self.solver.rho_floor),
        );
        m.insert(
            "solver.stall_window".into(),
            self.solver.stall_window.to_string(),
        );
        m.insert(
            "schedule.homotopy".into(),
            self.solver
                .homotopy_schedule
                .iter()
                .map(|l| format!("{l:e}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        m.insert(
            "schedule.continuation".into(),
            self.solver
                .continuation_schedule
                .iter()
                .map(|(e, d)| format!("({e:e}, {d:e})"))
                .collect::<Vec<_>>()
                .join("; "),
        );
        m.insert("multiplier.C".into(), format!("{:e}", self.multiplier_c));
        m.insert("multiplier.c0".into(), format!("{:e}", self.multiplier_c0));
        m
    }
}
