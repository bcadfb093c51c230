//! Orchestration behind the CLI: build a problem from a [`RunConfig`], solve,
//! verify, sweep.

use std::sync::Arc;

use rayon::prelude::*;

use crate::choquard::{self, ChoquardParams, RieszKernel};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{make_grid, RadialGrid};
use crate::kirchhoff::KirchhoffParams;
use crate::nonlinearity::Nonlinearity;
use crate::solver::{self, make_seed, LevelKind, Model, ModelKind, NodalSearch, SolveReport, TheoremCheck};
use crate::suites::{self, CheckLine};

/// Model parameters sampled on a grid, plus the Riesz kernel for Choquard.
#[derive(Debug)]
pub enum Problem {
    Kirchhoff(KirchhoffParams),
    Choquard(ChoquardParams, RieszKernel),
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = make_grid(cfg.dimension, cfg.r_max, cfg.node_count)?;
        let potential = cfg.potential.sample(&grid)?;
        match cfg.model {
            ModelKind::Kirchhoff => {
                let nl = Nonlinearity::power(cfg.q, cfg.dimension)?;
                Ok(Problem::Kirchhoff(KirchhoffParams::new(cfg.a, cfg.b, potential, nl)?))
            }
            ModelKind::Choquard => {
                let params = ChoquardParams::new(cfg.alpha, cfg.p, potential)?;
                let kernel = match &cfg.kernel_cache {
                    Some(path) => RieszKernel::load_or_build(path, &params)?,
                    None => choquard::build_kernel(&params, &grid)?,
                };
                Ok(Problem::Choquard(params, kernel))
            }
        }
    }

    pub fn model(&self) -> Model<'_> {
        match self {
            Problem::Kirchhoff(p) => Model::Kirchhoff(p),
            Problem::Choquard(p, k) => Model::Choquard(p, k),
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.model().grid()
    }
}

pub fn solve_ground(cfg: &RunConfig, problem: &Problem) -> Result<SolveReport> {
    let seed = make_seed(cfg.ground_seed, problem.grid(), &cfg.seed_spec)?;
    solver::minimize_ground(&problem.model(), &seed, cfg.ground_seed, &cfg.solver)
}

pub fn solve_nodal(cfg: &RunConfig, problem: &Problem) -> Result<NodalSearch> {
    let seeds = cfg
        .nodal_seeds
        .iter()
        .map(|&k| Ok((k, make_seed(k, problem.grid(), &cfg.seed_spec)?)))
        .collect::<Result<Vec<_>>>()?;
    solver::minimize_nodal_multi(&problem.model(), &seeds, &cfg.solver)
}

/// Everything one `verify` run produced, in table order.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub model: ModelKind,
    /// Property suites; when one fails the solves are skipped.
    pub suites: Vec<CheckLine>,
    pub ground: Option<SolveReport>,
    pub nodal: Option<NodalSearch>,
    pub theorem: Option<TheoremCheck>,
    /// Theorem-level and state-level checks derived from the solves.
    pub checks: Vec<CheckLine>,
}

impl VerifyOutcome {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().chain(&self.checks).all(|c| c.pass) && self.theorem.as_ref().is_some_and(|t| t.pass())
    }

    pub fn lines(&self) -> impl Iterator<Item = &CheckLine> {
        self.suites.iter().chain(&self.checks)
    }

    pub fn reports(&self) -> Vec<&SolveReport> {
        let mut out: Vec<&SolveReport> = self.ground.iter().collect();
        if let Some(n) = &self.nodal {
            out.extend(n.runs.iter().filter_map(|(_, r)| r.as_ref().ok()));
        }
        out
    }
}

/// Theorem-level lines for a pair of converged reports.
pub fn theorem_lines(ground: &SolveReport, nodal: &NodalSearch, theorem: &TheoremCheck) -> Vec<CheckLine> {
    let mut out = Vec::new();
    match theorem {
        TheoremCheck::Kirchhoff { c, m, margin, step2, .. } => {
            out.push(CheckLine::new("m > 2c", *margin > 0.0, format!("c = {c:.11e}, m = {m:.11e}, m - 2c = {margin:.11e}")));
            out.push(CheckLine::new(
                "parts on N: k, l in (0,1) and I(k u+) + I(l u-) >= 2c",
                step2.pass,
                format!("k = {:.9}, l = {:.9}, I(k u+) + I(l u-) - 2c = {:.6e}", step2.k, step2.l, step2.split_energy - 2.0 * c),
            ));
            let (op, om) = step2.own_pairings;
            out.push(CheckLine::new(
                "<I'(u+-), u+-> < 0 at the nodal state",
                op < 0.0 && om < 0.0,
                format!("({op:.6e}, {om:.6e})"),
            ));
        }
        TheoremCheck::Choquard { c_bar, m_bar, lower_margin, upper_margin, cross, .. } => {
            out.push(CheckLine::new("m_bar > c_bar", *lower_margin > 0.0, format!("c_bar = {c_bar:.11e}, m_bar = {m_bar:.11e}, m_bar - c_bar = {lower_margin:.11e}")));
            out.push(CheckLine::new("m_bar < 2 c_bar", *upper_margin > 0.0, format!("2 c_bar - m_bar = {upper_margin:.11e}")));
            out.push(CheckLine::new("B^2 < B1 B2 at the nodal state", cross.0 < cross.1, format!("B^2 = {:.6e}, B1 B2 = {:.6e}", cross.0, cross.1)));
        }
    }
    out.push(CheckLine::new(
        "ground state has one sign",
        ground.nodal_domains == 1 && ground.state.values().iter().all(|&v| v >= 0.0),
        format!("{} nodal domain(s)", ground.nodal_domains),
    ));
    for (kind, run) in &nodal.runs {
        let (pass, detail) = match run {
            Ok(r) if r.converged => (r.nodal_domains == 2, format!("{} nodal domains, level {:.11e}", r.nodal_domains, r.energy)),
            Ok(r) => (false, format!("unconverged: gradient {:.3e} after {} iterations", r.grad_norm_final, r.iterations)),
            Err(e) => (false, e.to_string()),
        };
        out.push(CheckLine::new(format!("{kind} seed: two nodal domains"), pass, detail));
    }
    out
}

/// Property suites, then ground and nodal solves, then the theorem checks.
pub fn verify(cfg: &RunConfig) -> Result<VerifyOutcome> {
    let problem = Problem::build(cfg)?;
    let model = problem.model();
    let suites = suites::property_suites(&model, cfg.suite_seed, cfg.suite_samples, &cfg.projection())?;
    let mut out = VerifyOutcome { model: cfg.model, suites, ground: None, nodal: None, theorem: None, checks: Vec::new() };
    if !out.suites.iter().all(|c| c.pass) {
        return Ok(out);
    }
    let ground = solve_ground(cfg, &problem)?;
    let nodal = solve_nodal(cfg, &problem);
    let nodal = match nodal {
        Ok(n) => n,
        Err(e) => {
            out.ground = Some(ground);
            return Err(e);
        }
    };
    if ground.converged {
        let theorem = solver::verify_theorems(&model, &ground, &nodal.best, &cfg.projection())?;
        out.checks = theorem_lines(&ground, &nodal, &theorem);
        out.theorem = Some(theorem);
    }
    out.ground = Some(ground);
    out.nodal = Some(nodal);
    Ok(out)
}

/// One sweep point: the parameter value and its theorem check, or why it failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: String,
    pub outcome: std::result::Result<TheoremCheck, String>,
}

/// Repeat ground + nodal + theorem check with `param` set to each value, concurrently.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param, v).map_err(|message| Error::InvalidParameter { name: param.into(), reason: message })?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(configs
        .par_iter()
        .zip(values)
        .map(|(c, v)| {
            let outcome = (|| {
                let problem = Problem::build(c)?;
                let ground = solve_ground(c, &problem)?;
                let nodal = solve_nodal(c, &problem)?;
                solver::verify_theorems(&problem.model(), &ground, &nodal.best, &c.projection())
            })();
            SweepRow { value: v.clone(), outcome: outcome.map_err(|e| e.to_string()) }
        })
        .collect())
}

/// Static oracles plus the property suites of both models on the default grid.
pub fn selftest(seed: u64) -> Result<Vec<CheckLine>> {
    let mut out = suites::static_oracles()?;
    let base = |model| RunConfig { model, ..RunConfig::default() };
    for model in [ModelKind::Kirchhoff, ModelKind::Choquard] {
        let cfg = base(model);
        let problem = Problem::build(&cfg)?;
        out.extend(suites::property_suites(&problem.model(), seed, 30, &cfg.projection())?);
    }
    Ok(out)
}

/// Level kind tag used in file names and the report.
pub fn level_tag(r: &SolveReport) -> String {
    match r.level {
        LevelKind::Ground => "ground".into(),
        LevelKind::Nodal => format!("nodal_{}", r.seed_kind),
    }
}
