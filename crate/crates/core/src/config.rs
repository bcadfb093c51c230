//! Run configuration: a flat `section.key = value` file with `#` comments.
//!
//! Every key is optional; unset keys keep the defaults of [`RunConfig::default`].
//! Values are range-checked against the admissible parameter sets on load.

use std::fs;
use std::path::{Path, PathBuf};

use crate::choquard::p_upper;
use crate::error::{Error, Result};
use crate::nehari::ProjectionOptions;
use crate::nonlinearity::critical_exponent;
use crate::potential::PotentialKind;
use crate::solver::{ModelKind, SeedKind, SeedSpec, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub dimension: usize,
    pub r_max: f64,
    pub node_count: usize,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub alpha: f64,
    pub p: f64,
    pub potential: PotentialKind,
    pub solver: SolveOptions,
    pub ground_seed: SeedKind,
    pub nodal_seeds: Vec<SeedKind>,
    pub seed_spec: SeedSpec,
    pub out_dir: PathBuf,
    pub csv: bool,
    pub kernel_cache: Option<PathBuf>,
    /// RNG seed and sample count of the randomized property suites.
    pub suite_seed: u64,
    pub suite_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Kirchhoff,
            dimension: 3,
            r_max: 12.0,
            node_count: 1201,
            a: 1.0,
            b: 1.0,
            q: 4.0,
            alpha: 2.0,
            p: 2.0,
            potential: PotentialKind::Constant(1.0),
            solver: SolveOptions::default(),
            ground_seed: SeedKind::Gaussian,
            nodal_seeds: vec![SeedKind::OneNode, SeedKind::TwoBump],
            seed_spec: SeedSpec::default(),
            out_dir: PathBuf::from("out"),
            csv: true,
            kernel_cache: None,
            suite_seed: 20_240_601,
            suite_samples: 100,
        }
    }
}

/// Every recognised key, in the order of the shipped defaults file.
pub const KEYS: &[&str] = &[
    "model",
    "grid.dimension",
    "grid.r_max",
    "grid.node_count",
    "kirchhoff.a",
    "kirchhoff.b",
    "kirchhoff.q",
    "choquard.alpha",
    "choquard.p",
    "potential.kind",
    "potential.value",
    "solver.step_init",
    "solver.step_shrink",
    "solver.step_grow",
    "solver.step_max",
    "solver.step_min",
    "solver.grad_tol",
    "solver.energy_tol",
    "solver.max_iters",
    "solver.amplitude_tol",
    "solver.nodal_count_tol",
    "solver.conjugate",
    "projection.tol",
    "projection.max_bisections",
    "seeds.ground",
    "seeds.nodal",
    "seeds.r0",
    "seeds.r1",
    "seeds.r2",
    "output.directory",
    "output.csv",
    "kernel.cache",
    "suite.seed",
    "suite.samples",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("`{key}` expects true or false, got `{value}`")),
    }
}

impl RunConfig {
    /// Assign one key from its textual value; errors carry a message without line context.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "model" => self.model = value.parse().map_err(|e: Error| e.to_string())?,
            "grid.dimension" => self.dimension = parse_num(key, value)?,
            "grid.r_max" => self.r_max = parse_num(key, value)?,
            "grid.node_count" => self.node_count = parse_num(key, value)?,
            "kirchhoff.a" => self.a = parse_num(key, value)?,
            "kirchhoff.b" => self.b = parse_num(key, value)?,
            "kirchhoff.q" => self.q = parse_num(key, value)?,
            "choquard.alpha" => self.alpha = parse_num(key, value)?,
            "choquard.p" => self.p = parse_num(key, value)?,
            "potential.kind" => {
                self.potential = PotentialKind::from_parts(value, self.potential.value()).map_err(|e| e.to_string())?
            }
            "potential.value" => {
                let v: f64 = parse_num(key, value)?;
                self.potential = PotentialKind::from_parts(self.potential.kind_name(), v).map_err(|e| e.to_string())?;
            }
            "solver.step_init" => self.solver.step_init = parse_num(key, value)?,
            "solver.step_shrink" => self.solver.step_shrink = parse_num(key, value)?,
            "solver.step_grow" => self.solver.step_grow = parse_num(key, value)?,
            "solver.step_max" => self.solver.step_max = parse_num(key, value)?,
            "solver.step_min" => self.solver.step_min = parse_num(key, value)?,
            "solver.grad_tol" => self.solver.grad_tol = parse_num(key, value)?,
            "solver.energy_tol" => self.solver.energy_tol = parse_num(key, value)?,
            "solver.max_iters" => self.solver.max_iters = parse_num(key, value)?,
            "solver.amplitude_tol" => self.solver.amplitude_tol = parse_num(key, value)?,
            "solver.nodal_count_tol" => self.solver.nodal_count_tol = parse_num(key, value)?,
            "solver.conjugate" => self.solver.conjugate = parse_bool(key, value)?,
            "projection.tol" => self.solver.projection.tol = parse_num(key, value)?,
            "projection.max_bisections" => self.solver.projection.max_bisections = parse_num(key, value)?,
            "seeds.ground" => self.ground_seed = value.parse().map_err(|e: Error| e.to_string())?,
            "seeds.nodal" => {
                let seeds: std::result::Result<Vec<SeedKind>, Error> =
                    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect();
                self.nodal_seeds = seeds.map_err(|e| e.to_string())?;
            }
            "seeds.r0" => self.seed_spec.r0 = parse_num(key, value)?,
            "seeds.r1" => self.seed_spec.r1 = parse_num(key, value)?,
            "seeds.r2" => self.seed_spec.r2 = parse_num(key, value)?,
            "output.directory" => self.out_dir = PathBuf::from(value),
            "output.csv" => self.csv = parse_bool(key, value)?,
            "kernel.cache" => self.kernel_cache = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "suite.seed" => self.suite_seed = parse_num(key, value)?,
            "suite.samples" => self.suite_samples = parse_num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Range checks that do not need a grid.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| Err(Error::InvalidParameter { name: name.into(), reason });
        if !(self.dimension == 2 || self.dimension == 3) {
            return Err(Error::InvalidDimension(self.dimension));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidRadius(self.r_max));
        }
        if self.node_count < 5 {
            return Err(Error::TooFewNodes { got: self.node_count, min: 5 });
        }
        match self.model {
            ModelKind::Kirchhoff => {
                if !(self.a > 0.0) {
                    return bad("kirchhoff.a", format!("the Kirchhoff operator needs a > 0, got {}", self.a));
                }
                if !(self.b > 0.0) {
                    return bad("kirchhoff.b", format!("the Kirchhoff term needs b > 0, got {}", self.b));
                }
                let upper = critical_exponent(self.dimension);
                if !(self.q > 3.0 && self.q < upper) {
                    return bad(
                        "kirchhoff.q",
                        format!(
                            "superquartic subcritical growth requires 3 < q < 2*-1 = {upper} for N = {}, got q = {}",
                            self.dimension, self.q
                        ),
                    );
                }
            }
            ModelKind::Choquard => {
                if self.dimension != 3 {
                    return Err(Error::UnsupportedDimension(self.dimension));
                }
                let n = self.dimension as f64;
                let lo = (n - 4.0).max(0.0);
                if !(self.alpha > lo && self.alpha < n) {
                    return bad(
                        "choquard.alpha",
                        format!("need alpha in ((N-4)+, N) = ({lo}, {n}), got {}", self.alpha),
                    );
                }
                let hi = p_upper(self.dimension, self.alpha);
                if !(self.p >= 2.0 && self.p < hi) {
                    return bad("choquard.p", format!("need 2 <= p < (N+alpha)/(N-2) = {hi}, got {}", self.p));
                }
            }
        }
        if self.nodal_seeds.is_empty() {
            return bad("seeds.nodal", "at least one nodal seed is required".into());
        }
        if let Some(k) = self.nodal_seeds.iter().find(|k| !k.changes_sign()) {
            return bad("seeds.nodal", format!("nodal seeds must change sign, `{k}` does not"));
        }
        if self.suite_samples == 0 {
            return bad("suite.samples", "must be positive".into());
        }
        self.solver.validate()
    }

    pub fn projection(&self) -> ProjectionOptions {
        self.solver.projection
    }
}

/// Parse configuration text; unknown keys and malformed lines are errors with their line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        cfg.set(key, value).map_err(|message| Error::Config { line, message })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
