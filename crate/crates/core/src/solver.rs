//! Ground and nodal levels by preconditioned descent with reprojection.
//!
//! Each iterate lives on the Nehari manifold (ground) or the sign-changing
//! Nehari set (nodal). A step moves along `−P⁻¹∇I` with `P` the discrete
//! `diffusion·(−Δ) + V` operator, then projects back. The loop stops on the
//! free gradient: at a constrained minimizer the multipliers vanish.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::choquard::{self, ChoquardParams, RieszKernel};
use crate::error::{Error, Result};
use crate::grid::{self, count_nodal_domains, split_dirichlet_integral, tail_energy_fraction, GridFunction, RadialGrid};
use crate::kirchhoff::{self, sign_parts, KirchhoffParams};
use crate::nehari::{self, ProjectionOptions, ProjectionPair};
use crate::refine;

/// Relative slack under which two energies are indistinguishable in rounding.
pub const ENERGY_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Kirchhoff,
    Choquard,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Kirchhoff => "kirchhoff",
            ModelKind::Choquard => "choquard",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kirchhoff" => Ok(ModelKind::Kirchhoff),
            "choquard" => Ok(ModelKind::Choquard),
            other => Err(Error::InvalidParameter {
                name: "model".into(),
                reason: format!("expected kirchhoff or choquard, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelKind {
    Ground,
    Nodal,
}

impl fmt::Display for LevelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelKind::Ground => "ground",
            LevelKind::Nodal => "nodal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedKind {
    Gaussian,
    OneNode,
    TwoBump,
}

impl SeedKind {
    pub const ALL: [SeedKind; 3] = [SeedKind::Gaussian, SeedKind::OneNode, SeedKind::TwoBump];

    pub fn changes_sign(self) -> bool {
        !matches!(self, SeedKind::Gaussian)
    }
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedKind::Gaussian => "gaussian",
            SeedKind::OneNode => "one-node",
            SeedKind::TwoBump => "two-bump",
        })
    }
}

impl FromStr for SeedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SeedKind::Gaussian),
            "one-node" => Ok(SeedKind::OneNode),
            "two-bump" => Ok(SeedKind::TwoBump),
            other => Err(Error::UnknownSeed(other.to_string())),
        }
    }
}

/// Shape parameters of the seeds: node radius `r0` and bump centres `r1 < r2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSpec {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self { r0: 2.0, r1: 1.0, r2: 4.0 }
    }
}

/// `exp(−r²/2)`, `(1 − (r/r₀)²)exp(−r²/2)` or `exp(−(r−r₁)²) − exp(−(r−r₂)²)`, zeroed at `r_max`.
pub fn make_seed(kind: SeedKind, grid: &Arc<RadialGrid>, spec: &SeedSpec) -> Result<GridFunction> {
    let u = match kind {
        SeedKind::Gaussian => GridFunction::from_fn(grid, |r| (-r * r / 2.0).exp()),
        SeedKind::OneNode => {
            if !(spec.r0 > 0.0 && spec.r0 < grid.r_max()) {
                return Err(Error::InvalidParameter {
                    name: "seed.r0".into(),
                    reason: format!("node radius must lie in (0, r_max), got {}", spec.r0),
                });
            }
            let r0 = spec.r0;
            GridFunction::from_fn(grid, |r| (1.0 - (r / r0).powi(2)) * (-r * r / 2.0).exp())
        }
        SeedKind::TwoBump => {
            if !(spec.r1 >= 0.0 && spec.r1 < spec.r2 && spec.r2 < grid.r_max()) {
                return Err(Error::InvalidParameter {
                    name: "seed.r1, seed.r2".into(),
                    reason: format!("need 0 <= r1 < r2 < r_max, got r1 = {}, r2 = {}", spec.r1, spec.r2),
                });
            }
            let (r1, r2) = (spec.r1, spec.r2);
            GridFunction::from_fn(grid, |r| (-(r - r1).powi(2)).exp() - (-(r - r2).powi(2)).exp())
        }
    };
    Ok(u.with_dirichlet())
}

/// A model together with everything needed to evaluate it.
#[derive(Debug, Clone, Copy)]
pub enum Model<'a> {
    Kirchhoff(&'a KirchhoffParams),
    Choquard(&'a ChoquardParams, &'a RieszKernel),
}

impl<'a> Model<'a> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Kirchhoff(_) => ModelKind::Kirchhoff,
            Model::Choquard(..) => ModelKind::Choquard,
        }
    }

    pub fn grid(&self) -> &'a Arc<RadialGrid> {
        match self {
            Model::Kirchhoff(p) => p.grid(),
            Model::Choquard(p, _) => p.grid(),
        }
    }

    pub fn potential(&self) -> &'a GridFunction {
        match self {
            Model::Kirchhoff(p) => &p.potential,
            Model::Choquard(p, _) => &p.potential,
        }
    }

    /// Coefficient `a` of the local Dirichlet term.
    pub fn stiffness(&self) -> f64 {
        match self {
            Model::Kirchhoff(p) => p.a,
            Model::Choquard(..) => 1.0,
        }
    }

    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        match self {
            Model::Kirchhoff(p) => kirchhoff::energy_i(p, u),
            Model::Choquard(p, k) => choquard::energy_psi(p, k, u),
        }
    }

    pub fn norm_sq(&self, u: &GridFunction) -> f64 {
        match self {
            Model::Kirchhoff(p) => p.norm_sq(u),
            Model::Choquard(p, _) => p.norm_sq(u),
        }
    }

    pub fn nodal_gradient(&self, u: &GridFunction) -> Result<Vec<f64>> {
        match self {
            Model::Kirchhoff(p) => kirchhoff::energy_gradient_nodal(p, u),
            Model::Choquard(p, k) => choquard::energy_gradient_nodal(p, k, u),
        }
    }

    /// `L²` representative of the free gradient.
    pub fn gradient(&self, u: &GridFunction) -> Result<GridFunction> {
        match self {
            Model::Kirchhoff(p) => kirchhoff::gradient_i(p, u),
            Model::Choquard(p, k) => choquard::gradient_psi(p, k, u),
        }
    }

    pub fn pairing(&self, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
        match self {
            Model::Kirchhoff(p) => kirchhoff::pairing_i(p, u, phi),
            Model::Choquard(p, k) => choquard::pairing_psi(p, k, u, phi),
        }
    }

    /// Factor in front of `−Δ` at `u`: `a + b∫|∇u|²` or 1.
    pub fn diffusion(&self, u: &GridFunction) -> f64 {
        match self {
            Model::Kirchhoff(p) => p.a + p.b * split_dirichlet_integral(u),
            Model::Choquard(..) => 1.0,
        }
    }

    pub fn project_scalar(&self, u: &GridFunction, opts: &ProjectionOptions) -> Result<f64> {
        match self {
            Model::Kirchhoff(p) => nehari::project_scalar_kirchhoff(p, u, opts),
            Model::Choquard(p, k) => nehari::project_scalar_choquard(p, k, u),
        }
    }

    pub fn project_pair(&self, u: &GridFunction, opts: &ProjectionOptions) -> Result<ProjectionPair> {
        match self {
            Model::Kirchhoff(p) => nehari::project_pair_kirchhoff(p, u, opts),
            Model::Choquard(p, k) => nehari::project_pair_choquard(p, k, u, opts),
        }
    }

    pub fn relative_residuals(&self, u: &GridFunction) -> Result<(f64, f64)> {
        match self {
            Model::Kirchhoff(p) => nehari::relative_residuals_k(p, u),
            Model::Choquard(p, k) => nehari::relative_residuals_c(p, k, u),
        }
    }

    /// The energy rewritten with `⟨E′(u),u⟩ = 0`:
    /// `¼‖u‖² + ∫(¼f(u)u − F(u))` or `(½ − 1/(2p))‖u‖²`.
    pub fn on_manifold_energy(&self, u: &GridFunction) -> f64 {
        match self {
            Model::Kirchhoff(p) => {
                0.25 * p.norm_sq(u) + 0.25 * p.forcing_pairing(u, u) - p.primitive_integral(u)
            }
            Model::Choquard(p, _) => (0.5 - 0.5 / p.p) * p.norm_sq(u),
        }
    }

    /// Solve `(diffusion·K + W V) d = g` with `d = 0` at `r_max`, `K` the split stiffness at `u`.
    fn precondition(&self, u: &GridFunction, g: &[f64]) -> Vec<f64> {
        let grid = self.grid();
        let scale = self.diffusion(u);
        let (lower, diag, upper) = grid::split_stiffness_tridiagonal(u);
        let w = grid.weights();
        let v = self.potential().values();
        let n = g.len();
        let mut a: Vec<f64> = lower.iter().map(|x| scale * x).collect();
        let mut b: Vec<f64> = diag.iter().zip(w.iter().zip(v)).map(|(d, (w, v))| scale * d + w * v).collect();
        let mut c: Vec<f64> = upper.iter().map(|x| scale * x).collect();
        let mut rhs = g.to_vec();
        a[n - 1] = 0.0;
        b[n - 1] = 1.0;
        c[n - 1] = 0.0;
        rhs[n - 1] = 0.0;
        thomas(&mut a, &mut b, &mut c, &mut rhs);
        rhs
    }
}

/// In-place tridiagonal solve; the solution overwrites `d`.
fn thomas(a: &mut [f64], b: &mut [f64], c: &mut [f64], d: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        let m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    }
    let _ = a;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub step_init: f64,
    pub step_shrink: f64,
    /// Factor applied to the step after an accepted iteration.
    pub step_grow: f64,
    pub step_max: f64,
    pub step_min: f64,
    /// Stop once `‖∇E(u)‖_{L²} ≤ grad_tol`.
    pub grad_tol: f64,
    /// Relative tolerance when comparing levels from different seeds.
    pub energy_tol: f64,
    pub max_iters: usize,
    /// Reject nodal steps where `‖u^±‖ / ‖u‖` falls below this.
    pub amplitude_tol: f64,
    /// Threshold for counting nodal domains of the final state.
    pub nodal_count_tol: f64,
    /// Polak–Ribière conjugation of successive preconditioned directions.
    pub conjugate: bool,
    pub projection: ProjectionOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            step_init: 0.5,
            step_shrink: 0.5,
            step_grow: 2.0,
            step_max: 4.0,
            step_min: 1e-12,
            grad_tol: 1e-6,
            energy_tol: 1e-6,
            max_iters: 5000,
            amplitude_tol: 1e-6,
            nodal_count_tol: 1e-8,
            conjugate: true,
            projection: ProjectionOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: &str| {
            Err(Error::InvalidParameter {
                name: name.into(),
                reason: reason.into(),
            })
        };
        if !(self.step_init > 0.0) {
            return bad("solver.step_init", "must be positive");
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return bad("solver.step_shrink", "must lie in (0, 1)");
        }
        if !(self.step_grow >= 1.0) {
            return bad("solver.step_grow", "must be at least 1");
        }
        if !(self.grad_tol > 0.0 && self.energy_tol > 0.0 && self.amplitude_tol > 0.0) {
            return bad("solver.grad_tol, solver.energy_tol, solver.amplitude_tol", "must be positive");
        }
        if self.max_iters == 0 {
            return bad("solver.max_iters", "must be positive");
        }
        if !(self.projection.tol > 0.0) || self.projection.max_bisections == 0 {
            return bad("projection.tol, projection.max_bisections", "must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub model: ModelKind,
    pub level: LevelKind,
    pub energy: f64,
    pub state: GridFunction,
    pub grad_norm_final: f64,
    pub nodal_domains: usize,
    pub iterations: usize,
    pub seed_kind: SeedKind,
    pub tail_energy_fraction: f64,
    pub converged: bool,
    /// Energy after the initial projection and after each accepted step.
    pub energy_trace: Vec<f64>,
    /// Free-gradient norm alongside `energy_trace`.
    pub grad_trace: Vec<f64>,
    /// Step length of each accepted step.
    pub step_trace: Vec<f64>,
    /// Relative membership residuals of the final state.
    pub residuals: (f64, f64),
    /// Low-order parts when Newton polishing carried the state past `f64`:
    /// the critical point is `state + correction`.
    pub correction: Option<Vec<f64>>,
    pub newton_steps: usize,
}

impl SolveReport {
    fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::Unconverged(format!(
                "{} {} level from {} seed: gradient {:.3e} after {} iterations",
                self.model, self.level, self.seed_kind, self.grad_norm_final, self.iterations
            )))
        }
    }
}

struct Iterate {
    u: GridFunction,
    energy: f64,
    nodal: Vec<f64>,
    grad_norm: f64,
}

fn evaluate(model: &Model<'_>, u: GridFunction) -> Result<Iterate> {
    let energy = model.energy(&u)?;
    let nodal = model.nodal_gradient(&u)?;
    let grad_norm = grid::l2_norm(&model.gradient(&u)?);
    Ok(Iterate { u, energy, nodal, grad_norm })
}

/// Project `v` onto the constraint set; also returns the factors `(t, s)` applied to `v⁺, v⁻`.
fn project(model: &Model<'_>, level: LevelKind, v: &GridFunction, opts: &SolveOptions) -> Result<(GridFunction, f64, f64)> {
    match level {
        LevelKind::Ground => {
            let t = model.project_scalar(v, &opts.projection)?;
            Ok((v.scaled(t), t, t))
        }
        LevelKind::Nodal => {
            let (plus, minus) = sign_parts(v)?;
            let norm = model.norm_sq(v).sqrt();
            let (np, nm) = (model.norm_sq(&plus).sqrt(), model.norm_sq(&minus).sqrt());
            if np.min(nm) < opts.amplitude_tol * norm {
                return Err(Error::DegenerateSign { plus: np, minus: nm });
            }
            let pair = model.project_pair(v, &opts.projection)?;
            Ok((pair.apply(v), pair.t, pair.s))
        }
    }
}

/// `dφ/dη` for `φ(η) = E(Π(u − ηd))`. The projection moves along `v^±`, which
/// `E′(v)` annihilates on the constraint set, so only `−t d⁺ − s d⁻` survives.
fn path_slope(trial: &GridFunction, t: f64, s: f64, nodal: &[f64], dir: &[f64]) -> f64 {
    let terms = trial
        .values()
        .iter()
        .zip(nodal.iter().zip(dir))
        .map(|(&w, (g, d))| -g * d * if w >= 0.0 { t } else { s });
    grid::neumaier_sum(terms)
}

/// Armijo and curvature constants of the line search.
const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.5;
const MAX_LINE_STEPS: usize = 40;
/// Descent hands over to polishing after this many steps without a 10% gradient drop.
const STALL_WINDOW: usize = 200;
const MAX_NEWTON_STEPS: usize = 30;

fn descend(model: &Model<'_>, level: LevelKind, seed: &GridFunction, seed_kind: SeedKind, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    seed.ensure_on(model.grid())?;
    if seed.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let (start, _, _) = project(model, level, &seed.clone().with_dirichlet(), opts)?;
    let mut cur = evaluate(model, start)?;
    let mut trace = vec![cur.energy];
    let mut grad_trace = vec![cur.grad_norm];
    let mut step_trace = Vec::new();
    let mut eta = opts.step_init;
    let mut prev: Option<(Vec<f64>, Vec<f64>, f64)> = None; // (gradient, direction, ⟨g, P⁻¹g⟩)
    let mut iterations = 0;
    let mut converged = cur.grad_norm <= opts.grad_tol;
    let (mut best_grad, mut best_at) = (cur.grad_norm, 0);

    while !converged && iterations < opts.max_iters {
        iterations += 1;
        let pg = model.precondition(&cur.u, &cur.nodal);
        let gpg: f64 = grid::neumaier_sum(cur.nodal.iter().zip(&pg).map(|(a, b)| a * b));
        let mut dir = pg.clone();
        if let (true, Some((g_old, d_old, gpg_old))) = (opts.conjugate, prev.as_ref()) {
            let num = grid::neumaier_sum(cur.nodal.iter().zip(g_old).zip(&pg).map(|((g, go), p)| (g - go) * p));
            let beta = (num / gpg_old).max(0.0);
            if beta.is_finite() {
                for (d, o) in dir.iter_mut().zip(d_old) {
                    *d += beta * o;
                }
            }
        }
        let mut slope0 = -grid::neumaier_sum(cur.nodal.iter().zip(&dir).map(|(g, d)| g * d));
        if !(slope0 < 0.0) {
            dir = pg;
            slope0 = -gpg;
        }

        let scale = cur.energy.abs() + model.norm_sq(&cur.u);
        let slack = ENERGY_ROUNDOFF * scale;
        let mut accepted = None;
        for _ in 0..MAX_LINE_STEPS {
            if eta < opts.step_min {
                break;
            }
            let trial_values: Vec<f64> = cur.u.values().iter().zip(&dir).map(|(u, d)| u - eta * d).collect();
            let trial = GridFunction::new(Arc::clone(cur.u.grid()), trial_values)?.with_dirichlet();
            let candidate = project(model, level, &trial, opts).and_then(|(v, t, s)| Ok((evaluate(model, v)?, t, s)));
            let Ok((next, t, s)) = candidate else {
                eta *= opts.step_shrink;
                continue;
            };
            let slope = path_slope(&trial, t, s, &next.nodal, &dir);
            let armijo = next.energy <= cur.energy + WOLFE_C1 * eta * slope0 + slack;
            if !armijo || slope > WOLFE_C2 * slope0.abs() {
                // overshoot: secant on the slope, kept inside (0.1η, 0.9η)
                let secant = eta * slope0 / (slope0 - slope);
                eta = if secant.is_finite() && secant > 0.0 && secant < eta {
                    secant.clamp(0.1 * eta, 0.9 * eta)
                } else {
                    eta * opts.step_shrink
                };
                continue;
            }
            accepted = Some(next);
            break;
        }
        let Some(next) = accepted else {
            break;
        };
        if next.energy > cur.energy + slack {
            break;
        }
        prev = Some((std::mem::take(&mut cur.nodal), dir, gpg));
        cur = next;
        trace.push(cur.energy);
        grad_trace.push(cur.grad_norm);
        step_trace.push(eta);
        converged = cur.grad_norm <= opts.grad_tol;
        eta = (eta * opts.step_grow).min(opts.step_max);
        if cur.grad_norm < 0.9 * best_grad {
            (best_grad, best_at) = (cur.grad_norm, iterations);
        } else if iterations - best_at >= STALL_WINDOW && matches!(model, Model::Kirchhoff(_)) {
            break;
        }
    }

    if level == LevelKind::Ground && cur.u.values().iter().any(|&v| v < 0.0) {
        // ground states have one sign; with the split Dirichlet form |u| has the same energy
        let abs = cur.u.map(f64::abs);
        cur = evaluate(model, abs)?;
        converged = cur.grad_norm <= opts.grad_tol;
    }

    let mut correction = None;
    let mut newton_steps = 0;
    if let (false, Model::Kirchhoff(p)) = (converged, model) {
        // the f64 descent stalls at the rounding floor of the gradient; polish past it
        if let Ok(r) = refine::refine_kirchhoff(p, &cur.u, opts.grad_tol, MAX_NEWTON_STEPS) {
            if r.grad_norm < cur.grad_norm {
                newton_steps = r.newton_steps;
                cur = evaluate(model, r.state)?;
                cur.grad_norm = r.grad_norm;
                converged = r.grad_norm <= opts.grad_tol;
                correction = Some(r.correction);
            }
        }
    }

    let residuals = match level {
        LevelKind::Ground => {
            let r = model.pairing(&cur.u, &cur.u)?;
            (r / model.norm_sq(&cur.u), 0.0)
        }
        LevelKind::Nodal => model.relative_residuals(&cur.u)?,
    };
    Ok(SolveReport {
        model: model.kind(),
        level,
        energy: cur.energy,
        nodal_domains: count_nodal_domains(&cur.u, opts.nodal_count_tol),
        tail_energy_fraction: tail_energy_fraction(model.stiffness(), model.potential(), &cur.u, 0.1),
        state: cur.u,
        grad_norm_final: cur.grad_norm,
        iterations,
        seed_kind,
        converged,
        energy_trace: trace,
        grad_trace,
        step_trace,
        residuals,
        correction,
        newton_steps,
    })
}

/// Minimize over the Nehari manifold; the returned state is nonnegative.
pub fn minimize_ground(model: &Model<'_>, seed: &GridFunction, seed_kind: SeedKind, opts: &SolveOptions) -> Result<SolveReport> {
    descend(model, LevelKind::Ground, seed, seed_kind, opts)
}

/// Minimize over the sign-changing Nehari set from one seed.
pub fn minimize_nodal(model: &Model<'_>, seed: &GridFunction, seed_kind: SeedKind, opts: &SolveOptions) -> Result<SolveReport> {
    sign_parts(seed)?;
    descend(model, LevelKind::Nodal, seed, seed_kind, opts)
}

/// Every seed's outcome and the lowest converged level among them.
#[derive(Debug, Clone)]
pub struct NodalSearch {
    pub best: SolveReport,
    pub runs: Vec<(SeedKind, Result<SolveReport>)>,
}

impl NodalSearch {
    /// Converged levels agree within `energy_tol` relative.
    pub fn seeds_agree(&self, energy_tol: f64) -> bool {
        let levels: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().filter(|r| r.converged).map(|r| r.energy))
            .collect();
        levels.iter().all(|e| (e - self.best.energy).abs() <= energy_tol * self.best.energy.abs())
    }
}

/// Run the nodal descent from every seed concurrently; keep the lowest converged level.
pub fn minimize_nodal_multi(model: &Model<'_>, seeds: &[(SeedKind, GridFunction)], opts: &SolveOptions) -> Result<NodalSearch> {
    let runs: Vec<(SeedKind, Result<SolveReport>)> = seeds
        .par_iter()
        .map(|(kind, seed)| (*kind, minimize_nodal(model, seed, *kind, opts)))
        .collect();
    let best = runs
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().filter(|r| r.converged))
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .cloned();
    match best {
        Some(best) => Ok(NodalSearch { best, runs }),
        None => {
            let detail: Vec<String> = runs
                .iter()
                .map(|(k, r)| match r {
                    Ok(r) => format!("{k}: gradient {:.3e} after {} iterations", r.grad_norm_final, r.iterations),
                    Err(e) => format!("{k}: {e}"),
                })
                .collect();
            Err(Error::Unconverged(format!("no nodal seed converged ({})", detail.join("; "))))
        }
    }
}

/// The parts of the nodal state projected onto `N`, the intermediate step behind `m > 2c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step2Check {
    pub k: f64,
    pub l: f64,
    /// `I(k u⁺) + I(l u⁻)`.
    pub split_energy: f64,
    /// `⟨I′(u^±), u^±⟩` of the nodal state's parts; both negative on `M`.
    pub own_pairings: (f64, f64),
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TheoremCheck {
    Kirchhoff {
        c: f64,
        m: f64,
        /// `m − 2c`.
        margin: f64,
        step2: Step2Check,
        pass: bool,
    },
    Choquard {
        c_bar: f64,
        m_bar: f64,
        /// `m̄ − c̄`.
        lower_margin: f64,
        /// `2c̄ − m̄`.
        upper_margin: f64,
        /// `(B², B₁B₂)` of the nodal state.
        cross: (f64, f64),
        pass: bool,
    },
}

impl TheoremCheck {
    pub fn pass(&self) -> bool {
        match self {
            TheoremCheck::Kirchhoff { pass, .. } | TheoremCheck::Choquard { pass, .. } => *pass,
        }
    }
}

/// Absolute slack in `I(k u⁺) + I(l u⁻) ≥ 2c`.
pub const STEP2_SLACK: f64 = 1e-8;

pub fn verify_theorems(model: &Model<'_>, ground: &SolveReport, nodal: &SolveReport, proj: &ProjectionOptions) -> Result<TheoremCheck> {
    if ground.model != model.kind() || nodal.model != model.kind() || ground.level != LevelKind::Ground || nodal.level != LevelKind::Nodal {
        return Err(Error::ModelMismatch);
    }
    ground.require_converged()?;
    nodal.require_converged()?;
    let (c, m) = (ground.energy, nodal.energy);
    match model {
        Model::Kirchhoff(p) => {
            let (plus, minus) = sign_parts(&nodal.state)?;
            let k = model.project_scalar(&plus, proj)?;
            let l = model.project_scalar(&minus, proj)?;
            let split_energy = kirchhoff::energy_i(p, &plus.scaled(k))? + kirchhoff::energy_i(p, &minus.scaled(l))?;
            let own = (kirchhoff::pairing_i(p, &plus, &plus)?, kirchhoff::pairing_i(p, &minus, &minus)?);
            let step2_pass = k > 0.0 && k < 1.0 && l > 0.0 && l < 1.0 && split_energy >= 2.0 * c - STEP2_SLACK;
            let margin = m - 2.0 * c;
            Ok(TheoremCheck::Kirchhoff {
                c,
                m,
                margin,
                step2: Step2Check {
                    k,
                    l,
                    split_energy,
                    own_pairings: own,
                    pass: step2_pass,
                },
                pass: margin > 0.0 && step2_pass,
            })
        }
        Model::Choquard(p, kern) => {
            let d = nehari::choquard_coefficients(p, kern, &nodal.state)?;
            let cross = (d.b * d.b, d.b1 * d.b2);
            let lower_margin = m - c;
            let upper_margin = 2.0 * c - m;
            Ok(TheoremCheck::Choquard {
                c_bar: c,
                m_bar: m,
                lower_margin,
                upper_margin,
                cross,
                pass: lower_margin > 0.0 && upper_margin > 0.0 && cross.0 < cross.1,
            })
        }
    }
}
