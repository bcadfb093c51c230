//! Randomized property suites shared by `verify` and `selftest`.
//!
//! Each suite draws its states from a seeded ChaCha stream, so a suite run is
//! reproducible from `(seed, samples)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choquard::{self, ChoquardParams, RieszKernel};
use crate::error::Result;
use crate::grid::{self, GridFunction, RadialGrid};
use crate::kirchhoff;
use crate::nehari::{self, classify_projection_region, ProjectionOptions, Region};
use crate::solver::Model;

/// One named pass/fail line of a suite or verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bump(rng: &mut ChaCha8Rng, centre: (f64, f64)) -> (f64, f64, f64) {
    (rng.gen_range(0.5..3.0), rng.gen_range(centre.0..centre.1), rng.gen_range(0.6..1.8))
}

/// A positive Gaussian bump near the origin minus one further out, plus a small third term.
pub fn random_sign_changing(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> GridFunction {
    loop {
        let (a1, c1, w1) = bump(rng, (0.0, 1.5));
        let (a2, c2, w2) = bump(rng, (2.5, 5.0));
        let (a3, c3, w3) = bump(rng, (0.0, 5.0));
        let a3 = 0.2 * a3 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let g = |a: f64, c: f64, w: f64, r: f64| a * (-((r - c) / w).powi(2)).exp();
        let u = GridFunction::from_fn(grid, |r| sign * (g(a1, c1, w1, r) - g(a2, c2, w2, r) + g(a3, c3, w3, r))).with_dirichlet();
        if grid::count_nodal_domains(&u, 1e-8) >= 2 {
            return u;
        }
    }
}

/// A nonnegative radial profile `a·exp(−((r − c)/w)²)` with random shape.
pub fn random_nonnegative(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> GridFunction {
    let (a, c, w) = bump(rng, (0.0, 5.0));
    GridFunction::from_fn(grid, |r| a * (-((r - c) / w).powi(2)).exp()).with_dirichlet()
}

/// `cos²` bumps on `[0, r1]` and `[r2, r3]` with opposite signs: disjoint supports.
pub fn disjoint_pair(rng: &mut ChaCha8Rng, grid: &Arc<RadialGrid>) -> GridFunction {
    let r1 = rng.gen_range(1.0..2.5);
    let r2 = r1 + rng.gen_range(0.3..1.5);
    let r3 = r2 + rng.gen_range(1.0..3.0);
    let (ap, am) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
    GridFunction::from_fn(grid, |r| {
        if r < r1 {
            ap * (0.5 * PI * r / r1).cos().powi(2)
        } else if r > r2 && r < r3 {
            -am * (PI * (r - 0.5 * (r2 + r3)) / (r3 - r2)).cos().powi(2)
        } else {
            0.0
        }
    })
    .with_dirichlet()
}

/// Decomposition identities on disjointly supported parts, residuals ≤ `tol`.
pub fn decomposition_suite(model: &Model<'_>, seed: u64, samples: usize, tol: f64) -> Result<CheckLine> {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = disjoint_pair(&mut rng, model.grid());
        let r = match model {
            Model::Kirchhoff(p) => kirchhoff::check_identities_k(p, &u)?,
            Model::Choquard(p, k) => choquard::decomposition_c(p, k, &u)?.identities,
        };
        worst = worst.max(r.max());
    }
    Ok(CheckLine::new(
        format!("{} decomposition identities", model.kind()),
        worst <= tol,
        format!("max relative residual {worst:.3e} over {samples} disjoint pairs (tol {tol:.0e})"),
    ))
}

/// HLS pair inequality on nonnegative pairs, and equality for `f = 2g`.
pub fn hls_suite(kernel: &RieszKernel, seed: u64, samples: usize) -> Result<CheckLine> {
    let mut rng = rng(seed);
    let mut worst_slack = f64::NEG_INFINITY;
    let mut worst_equality = 0.0f64;
    for _ in 0..samples {
        let f = random_nonnegative(&mut rng, kernel.grid());
        let g = random_nonnegative(&mut rng, kernel.grid());
        let (lhs, rhs) = choquard::hls_pair_check(kernel, &f, &g)?;
        worst_slack = worst_slack.max((lhs - rhs) / rhs);
        let (l2, r2) = choquard::hls_pair_check(kernel, &g.scaled(2.0), &g)?;
        worst_equality = worst_equality.max((l2 - r2).abs() / r2);
    }
    let pass = worst_slack <= 1e-12 && worst_equality <= 1e-12;
    Ok(CheckLine::new(
        "HLS pair inequality",
        pass,
        format!("max (lhs-rhs)/rhs {worst_slack:.3e}, equality defect at f=2g {worst_equality:.3e}"),
    ))
}

/// The `p = 2` pair system has a positive solution exactly when both Cramer numerators are positive.
pub fn choquard_pair_exists(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<bool> {
    if params.p > 2.0 {
        return Ok(true);
    }
    let c = nehari::choquard_coefficients(params, kernel, u)?;
    Ok(c.a1 * c.b2 - c.a2 * c.b > 0.0 && c.a2 * c.b1 - c.a1 * c.b > 0.0)
}

/// Draw a random sign-changing state whose pair projection exists.
///
/// Returns the state and the number of rejected draws.
pub fn random_projectable(model: &Model<'_>, rng: &mut ChaCha8Rng) -> Result<(GridFunction, usize)> {
    let mut rejected = 0;
    loop {
        let u = random_sign_changing(rng, model.grid());
        let ok = match model {
            Model::Kirchhoff(_) => true,
            Model::Choquard(p, k) => choquard_pair_exists(p, k, &u)?,
        };
        if ok {
            return Ok((u, rejected));
        }
        rejected += 1;
    }
}

/// Multi-start pair projections agree within `1e-8` relative; memberships ≤ `1e-8`.
pub fn projection_suite(model: &Model<'_>, seed: u64, samples: usize, opts: &ProjectionOptions) -> Result<CheckLine> {
    let mut rng = rng(seed);
    let (mut worst_spread, mut worst_res) = (0.0f64, 0.0f64);
    let mut rejected = 0;
    for _ in 0..samples {
        let (u, rej) = random_projectable(model, &mut rng)?;
        rejected += rej;
        let base = model.project_pair(&u, opts)?;
        for start in [1e-3, 0.1, 10.0, 1e3] {
            let other = model.project_pair(&u, &opts.with_start(start))?;
            worst_spread = worst_spread
                .max((other.t - base.t).abs() / base.t)
                .max((other.s - base.s).abs() / base.s);
        }
        let (rp, rm) = model.relative_residuals(&base.apply(&u))?;
        worst_res = worst_res.max(rp.abs()).max(rm.abs());
    }
    let note = if rejected > 0 { format!(", {rejected} draws without a positive p=2 solution skipped") } else { String::new() };
    Ok(CheckLine::new(
        format!("{} pair-projection uniqueness", model.kind()),
        worst_spread <= 1e-8 && worst_res <= 1e-8,
        format!("max start spread {worst_spread:.3e}, max membership residual {worst_res:.3e} over {samples} states{note}"),
    ))
}

/// Projection of `λu`, `u` on the constraint set, lands in `(1,∞)²` for `λ < 1` and `(0,1)²` for `λ > 1`.
pub fn trichotomy_suite(model: &Model<'_>, seed: u64, samples: usize, opts: &ProjectionOptions) -> Result<CheckLine> {
    let mut rng = rng(seed);
    let mut violations = 0;
    let mut precondition_failures = 0;
    let mut checked = 0;
    for _ in 0..samples {
        let (u, _) = random_projectable(model, &mut rng)?;
        let member = model.project_pair(&u, opts)?.apply(&u);
        for (lam, want) in [(0.5, Region::BothPositive), (0.7, Region::BothPositive), (1.5, Region::BothNegative), (2.0, Region::BothNegative)] {
            let v = member.scaled(lam);
            let res = model.relative_residuals(&v)?;
            let pair = model.project_pair(&v, opts)?;
            let check = classify_projection_region(res, &pair, 1e-9);
            if check.region != want {
                precondition_failures += 1;
                continue;
            }
            checked += 1;
            if check.violation {
                violations += 1;
            }
        }
    }
    Ok(CheckLine::new(
        format!("{} projection trichotomy", model.kind()),
        violations == 0 && precondition_failures == 0,
        format!("{violations} violations over {checked} scaled members, {precondition_failures} sign preconditions unmet"),
    ))
}

/// Finite-difference directional derivatives against both gradient representatives.
pub fn gradient_suite(model: &Model<'_>, seed: u64, samples: usize) -> Result<CheckLine> {
    let mut rng = rng(seed);
    let grid = model.grid();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        // even states with crossings between nodes keep the split form smooth along the path
        let (a, w, r0) = (rng.gen_range(0.5..1.5), rng.gen_range(2.0..4.0), rng.gen_range(0.8..1.6));
        let u = GridFunction::from_fn(grid, |r| a * (r0 * r0 + 0.0123 - r * r) * (-r * r / w).exp()).with_dirichlet();
        let (k, c) = (rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0));
        let phi = GridFunction::from_fn(grid, |r| (c + (k * r).cos()) * (-r * r / 4.0).exp()).with_dirichlet();
        let eps = 1e-5;
        let ep = model.energy(&u.combine(1.0, &phi, eps)?)?;
        let em = model.energy(&u.combine(1.0, &phi, -eps)?)?;
        let fd = (ep - em) / (2.0 * eps);
        let formula = model.pairing(&u, &phi)?;
        let rep = grid::inner_l2(&model.gradient(&u)?, &phi)?;
        let scale = fd.abs().max(1e-300);
        let err = ((formula - fd).abs() / scale).max((rep - fd).abs() / scale);
        if err > worst {
            worst = err;
        }
    }
    Ok(CheckLine::new(
        format!("{} gradient vs finite differences", model.kind()),
        worst <= 1e-5,
        format!("max relative mismatch {worst:.3e} over {samples} (u, phi) pairs"),
    ))
}

/// Grid, kernel and projection oracles that need no solve.
pub fn static_oracles() -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    let g = grid::make_grid(3, 12.0, 1201)?;
    let quad = grid::integrate(&g, &GridFunction::from_fn(&g, |r| (-r * r).exp()))?;
    let exact = PI.powf(1.5);
    out.push(CheckLine::new(
        "Gaussian quadrature in R^3",
        (quad - exact).abs() <= 1e-10 * exact,
        format!("integral {quad:.12e} vs pi^1.5 {exact:.12e}"),
    ));

    let mut kernel_err = 0.0f64;
    for &(r, s) in &[(0.3, 2.0), (5.0, 1.0), (1.0, 1.0), (0.0, 3.0), (11.0, 0.25)] {
        kernel_err = kernel_err.max((choquard::angular_kernel(2.0, r, s) - 1.0 / (4.0 * PI * f64::max(r, s))).abs());
    }
    out.push(CheckLine::new("alpha=2 kernel is 1/(4 pi max(r,s))", kernel_err <= 1e-12, format!("max error {kernel_err:.3e}")));

    let params = ChoquardParams::new(2.0, 2.0, GridFunction::constant(&g, 1.0))?;
    let kernel = choquard::build_kernel(&params, &g)?;
    let ball = GridFunction::from_fn(&g, |r| if r < 1.0 { 1.0 } else if r == 1.0 { 0.5 } else { 0.0 });
    let pot = choquard::riesz_apply(&kernel, &ball)?;
    let mut ball_err = (pot.values()[0] - 0.5).abs();
    for (r, v) in g.nodes().iter().zip(pot.values()) {
        if *r > 1.0 {
            ball_err = ball_err.max((v - 1.0 / (3.0 * r)).abs());
        }
    }
    out.push(CheckLine::new(
        "potential of the unit ball",
        ball_err <= 1e-4,
        format!("max error {ball_err:.3e} against 1/2 at 0 and 1/(3r) outside"),
    ));

    let c = nehari::ChoquardCoefficients { a1: 3.0, a2: 3.0, b1: 2.0, b2: 2.0, b: 1.0 };
    let pair = nehari::solve_choquard_pair(&c, 2.0, &ProjectionOptions::default())?;
    out.push(CheckLine::new(
        "p=2 pair system closed form",
        (pair.t - 1.0).abs() < 1e-14 && (pair.s - 1.0).abs() < 1e-14,
        format!("(t, s) = ({:.15}, {:.15})", pair.t, pair.s),
    ));
    Ok(out)
}

/// The structural property suites for one model, in the order `verify` runs them.
pub fn property_suites(model: &Model<'_>, seed: u64, samples: usize, opts: &ProjectionOptions) -> Result<Vec<CheckLine>> {
    let mut out = vec![decomposition_suite(model, seed, samples, 1e-10)?];
    if let Model::Choquard(_, k) = model {
        out.push(hls_suite(k, seed.wrapping_add(1), samples)?);
    }
    out.push(projection_suite(model, seed.wrapping_add(2), samples, opts)?);
    out.push(trichotomy_suite(model, seed.wrapping_add(3), samples, opts)?);
    out.push(gradient_suite(model, seed.wrapping_add(4), samples.min(50))?);
    Ok(out)
}
