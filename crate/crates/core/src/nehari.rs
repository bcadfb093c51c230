//! Nehari projections.
//!
//! Scalar projections put `t·u` on the Nehari manifold; pair projections put
//! `t·u⁺ + s·u⁻` on the sign-changing Nehari set. Every root is found by
//! bracketing plus bisection with secant acceleration on a function that is
//! monotone (or has a single sign change) on its bracket.

use crate::choquard::{ChoquardParams, RieszKernel};
use crate::error::{Error, Result};
use crate::grid::{split_dirichlet_integral, GridFunction};
use crate::kirchhoff::{decomposition_of_parts, sign_parts, KirchhoffParams};
use crate::roots::{expand_bracket, solve_bracketed, RootOptions};

/// Largest geometric expansion factor tried while bracketing.
pub const BRACKET_LIMIT: f64 = 1_152_921_504_606_846_976.0; // 2^60

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Relative membership tolerance.
    pub tol: f64,
    pub max_bisections: usize,
    /// First trial value of the scaling parameter.
    pub start: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_bisections: 200,
            start: 1.0,
        }
    }
}

impl ProjectionOptions {
    fn root_options(&self) -> RootOptions {
        RootOptions {
            f_tol: 0.0,
            x_rel_tol: 4.0 * f64::EPSILON,
            max_iter: self.max_bisections,
        }
    }

    pub fn with_start(mut self, start: f64) -> Self {
        self.start = start;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionPair {
    pub t: f64,
    pub s: f64,
    /// Membership residuals of `t u⁺ + s u⁻`, each relative to the positive part of its pairing.
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub iterations: usize,
    pub bracket_width_final: f64,
}

impl ProjectionPair {
    pub fn max_residual(&self) -> f64 {
        self.residual_plus.abs().max(self.residual_minus.abs())
    }

    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        let (t, s) = (self.t, self.s);
        u.map(|v| if v > 0.0 { t * v } else { s * v })
    }
}

/// `∫ f(t u) t u` for a Kirchhoff nonlinearity.
fn scaled_forcing(params: &KirchhoffParams, u: &GridFunction, t: f64) -> f64 {
    let w = u.grid().weights();
    crate::grid::neumaier_sum(
        w.iter()
            .zip(u.values())
            .map(|(w, &v)| w * params.nl.f(t * v) * t * v),
    )
}

/// Unique `t > 0` with `t²‖u‖² + t⁴ b(∫|∇u|²)² = ∫f(tu)tu`.
pub fn project_scalar_kirchhoff(params: &KirchhoffParams, u: &GridFunction, opts: &ProjectionOptions) -> Result<f64> {
    u.ensure_on(params.grid())?;
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let norm = params.norm_sq(u);
    let k = split_dirichlet_integral(u);
    let quartic = params.b * k * k;
    // residual / t²: positive near 0, strictly decreasing since f(s)/|s|³ is nondecreasing, → −∞ since F(s)/s⁴ → ∞
    let rho = |t: f64| norm + t * t * quartic - scaled_forcing(params, u, t) / (t * t);
    let (lo, hi, flo, fhi) = expand_bracket(&rho, opts.start, 1.0, BRACKET_LIMIT, "scalar Kirchhoff projection")?;
    let mut ro = opts.root_options();
    ro.f_tol = opts.tol * norm;
    Ok(solve_bracketed(rho, lo, hi, flo, fhi, &ro, "scalar Kirchhoff projection")?.x)
}

/// Membership residuals `⟨I′(u),u^±⟩` relative to `α_i + β_i + A`, the positive
/// part of each pairing.
pub fn relative_residuals_k(params: &KirchhoffParams, u: &GridFunction) -> Result<(f64, f64)> {
    let (plus, minus) = sign_parts(u)?;
    let d = decomposition_of_parts(params, &plus, &minus);
    let (rp, rm) = crate::kirchhoff::residuals_k(params, u)?;
    Ok((rp / (d.alpha1 + d.beta1 + d.coupling), rm / (d.alpha2 + d.beta2 + d.coupling)))
}

/// The unique `(t, s)` with `t u⁺ + s u⁻` on the sign-changing Nehari set.
///
/// With `s² = g(t)` solving the first membership equation, the second reduces to
/// a single sign change of `h(t)` on `(t*, ∞)`, `t*` the zero of `g`.
pub fn project_pair_kirchhoff(params: &KirchhoffParams, u: &GridFunction, opts: &ProjectionOptions) -> Result<ProjectionPair> {
    u.ensure_on(params.grid())?;
    let (plus, minus) = sign_parts(u)?;
    let d = decomposition_of_parts(params, &plus, &minus);
    let (a1, a2, b1, b2, cpl) = (d.alpha1, d.alpha2, d.beta1, d.beta2, d.coupling);

    let g = |t: f64| (scaled_forcing(params, &plus, t) / (t * t) - t * t * b1 - a1) / cpl;
    let (lo, hi, flo, fhi) = expand_bracket(&g, opts.start, -1.0, BRACKET_LIMIT, "g(t) zero")?;
    let ro = opts.root_options();
    let t_star = solve_bracketed(g, lo, hi, flo, fhi, &ro, "g(t) zero")?;
    // smallest bracketed point with g > 0
    let t_lo = t_star.hi;
    let g_lo = g(t_lo).max(0.0);

    let h = |t: f64| {
        let gt = g(t);
        if gt <= 0.0 {
            return a2 + t * t * cpl;
        }
        a2 + gt * b2 + t * t * cpl - scaled_forcing(params, &minus, gt.sqrt()) / gt
    };
    let h_lo = a2 + g_lo * b2 + t_lo * t_lo * cpl
        - if g_lo > 0.0 { scaled_forcing(params, &minus, g_lo.sqrt()) / g_lo } else { 0.0 };

    let trial = if opts.start > t_lo { opts.start } else { 2.0 * t_lo };
    let (mut blo, mut bhi, mut fblo, mut fbhi) = (t_lo, trial, h_lo, h(trial));
    let mut doublings = 0;
    while fbhi > 0.0 {
        blo = bhi;
        fblo = fbhi;
        bhi *= 2.0;
        fbhi = h(bhi);
        doublings += 1;
        if doublings > 60 {
            return Err(Error::BracketNotFound { what: "h(t) zero", limit: bhi });
        }
    }
    if fblo < 0.0 {
        return Err(Error::BracketNotFound { what: "h(t) zero", limit: t_lo });
    }
    let root = solve_bracketed(h, blo, bhi, fblo, fbhi, &ro, "h(t) zero")?;
    let t = root.x;
    let gt = g(t);
    if gt <= 0.0 {
        return Err(Error::NonPositiveSquare { t_sq: t * t, s_sq: gt });
    }
    let s = gt.sqrt();

    let rp = t * t * a1 + t.powi(4) * b1 + t * t * s * s * cpl - scaled_forcing(params, &plus, t);
    let rm = s * s * a2 + s.powi(4) * b2 + t * t * s * s * cpl - scaled_forcing(params, &minus, s);
    let pair = ProjectionPair {
        t,
        s,
        residual_plus: rp / (t * t * a1 + t.powi(4) * b1 + t * t * s * s * cpl),
        residual_minus: rm / (s * s * a2 + s.powi(4) * b2 + t * t * s * s * cpl),
        iterations: t_star.iterations + root.iterations,
        bracket_width_final: root.width(),
    };
    if pair.max_residual() > opts.tol.max(1e-8) {
        return Err(Error::NoConvergence { what: "Kirchhoff pair projection", iterations: pair.iterations });
    }
    Ok(pair)
}

/// `t = (‖u‖² / ∫(I_α*|u|^p)|u|^p)^{1/(2p−2)}`.
pub fn project_scalar_choquard(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<f64> {
    u.ensure_on(params.grid())?;
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let a = params.norm_sq(u);
    let b = crate::choquard::self_interaction(params, kernel, u)?;
    if !(b > 0.0) {
        return Err(Error::ZeroInteraction);
    }
    Ok(scalar_choquard_from(a, b, params.p))
}

pub fn scalar_choquard_from(norm_sq: f64, interaction: f64, p: f64) -> f64 {
    (norm_sq / interaction).powf(1.0 / (2.0 * p - 2.0))
}

/// `(A₁, A₂, B₁, B₂, B)` of a sign-changing state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoquardCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
}

pub fn choquard_coefficients(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<ChoquardCoefficients> {
    u.ensure_on(params.grid())?;
    let (plus, minus) = sign_parts(u)?;
    let rp = params.density(&plus);
    let rm = params.density(&minus);
    let pot_p = kernel.apply_values(rp.values());
    let pot_m = kernel.apply_values(rm.values());
    let grid = u.grid();
    let dot = |pot: &[f64], rho: &GridFunction| {
        grid.integrate_values(&pot.iter().zip(rho.values()).map(|(a, b)| a * b).collect::<Vec<_>>())
    };
    Ok(ChoquardCoefficients {
        a1: params.norm_sq(&plus),
        a2: params.norm_sq(&minus),
        b1: dot(&pot_p, &rp),
        b2: dot(&pot_m, &rm),
        b: dot(&pot_m, &rp),
    })
}

/// Solve `A₁t² = B₁t^{2p} + B t^p s^p`, `A₂s² = B₂s^{2p} + B t^p s^p` for `t, s > 0`.
pub fn solve_choquard_pair(c: &ChoquardCoefficients, p: f64, opts: &ProjectionOptions) -> Result<ProjectionPair> {
    let ChoquardCoefficients { a1, a2, b1, b2, b } = *c;
    let residuals = |t: f64, s: f64| {
        let (tp, sp) = (t.powf(p), s.powf(p));
        (
            (a1 * t * t - b1 * tp * tp - b * tp * sp) / (a1 * t * t),
            (a2 * s * s - b2 * sp * sp - b * tp * sp) / (a2 * s * s),
        )
    };
    if (p - 2.0).abs() < 1e-14 {
        // linear in (t², s²)
        let det = b1 * b2 - b * b;
        let t_sq = (a1 * b2 - b * a2) / det;
        let s_sq = (b1 * a2 - b * a1) / det;
        if !(det > 0.0 && t_sq > 0.0 && s_sq > 0.0) {
            return Err(Error::NonPositiveSquare { t_sq, s_sq });
        }
        let (t, s) = (t_sq.sqrt(), s_sq.sqrt());
        let (rp, rm) = residuals(t, s);
        return Ok(ProjectionPair {
            t,
            s,
            residual_plus: rp,
            residual_minus: rm,
            iterations: 0,
            bracket_width_final: 0.0,
        });
    }
    let e = 2.0 * p - 2.0;
    let t_max = (a1 / b1).powf(1.0 / e);
    let h = |t: f64| {
        let inner = a1 / (b * t.powf(e)) - b1 / b;
        if inner <= 0.0 {
            return f64::INFINITY;
        }
        a2 * inner.powf((2.0 - p) / p) - (b * b - b1 * b2) / b * t.powf(e) - b2 * a1 / b
    };
    let (mut lo, mut hi) = (0.0, t_max);
    let (mut flo, mut fhi) = (-b2 * a1 / b, f64::INFINITY);
    if opts.start > 0.0 && opts.start < t_max {
        let fs = h(opts.start);
        if fs < 0.0 {
            lo = opts.start;
            flo = fs;
        } else {
            hi = opts.start;
            fhi = fs;
        }
    }
    let root = solve_bracketed(h, lo, hi, flo, fhi, &opts.root_options(), "Choquard h(t) zero")?;
    let t = root.x;
    let s_p = (a1 * t.powf(2.0 - p) - b1 * t.powf(p)) / b;
    if !(s_p > 0.0) {
        return Err(Error::NonPositiveSquare { t_sq: t * t, s_sq: s_p });
    }
    let s = s_p.powf(1.0 / p);
    let (rp, rm) = residuals(t, s);
    let pair = ProjectionPair {
        t,
        s,
        residual_plus: rp,
        residual_minus: rm,
        iterations: root.iterations,
        bracket_width_final: root.width(),
    };
    if pair.max_residual() > opts.tol.max(1e-8) {
        return Err(Error::NoConvergence { what: "Choquard pair projection", iterations: pair.iterations });
    }
    Ok(pair)
}

pub fn project_pair_choquard(
    params: &ChoquardParams,
    kernel: &RieszKernel,
    u: &GridFunction,
    opts: &ProjectionOptions,
) -> Result<ProjectionPair> {
    let c = choquard_coefficients(params, kernel, u)?;
    solve_choquard_pair(&c, params.p, opts)
}

/// Relative membership residuals `⟨Ψ′(u),u^±⟩ / ‖u^±‖²`.
pub fn relative_residuals_c(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<(f64, f64)> {
    let c = choquard_coefficients(params, kernel, u)?;
    Ok(((c.a1 - c.b1 - c.b) / c.a1, (c.a2 - c.b2 - c.b) / c.a2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    OnManifold,
    /// Both pre-projection residuals negative: `(t, s) ∈ (0,1)²`.
    BothNegative,
    /// Both positive: `(t, s) ∈ (1,∞)²`.
    BothPositive,
    /// One residual zero and the other negative: `(t, s) ∈ (0,1]²`.
    ZeroAndNegative,
    /// One zero and the other positive: `(t, s) ∈ [1,∞)²`.
    ZeroAndPositive,
    /// Opposite signs; no containment is claimed.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCheck {
    pub region: Region,
    pub violation: bool,
}

/// Classify relative pre-projection residuals and check the containment of `(t, s)`.
pub fn classify_projection_region(residuals: (f64, f64), pair: &ProjectionPair, zero_tol: f64) -> RegionCheck {
    let sign = |r: f64| if r.abs() <= zero_tol { 0 } else if r > 0.0 { 1 } else { -1 };
    let (sp, sm) = (sign(residuals.0), sign(residuals.1));
    let (t, s) = (pair.t, pair.s);
    let slack = 1e-8;
    let region = match (sp, sm) {
        (0, 0) => Region::OnManifold,
        (-1, -1) => Region::BothNegative,
        (1, 1) => Region::BothPositive,
        (0, -1) | (-1, 0) => Region::ZeroAndNegative,
        (0, 1) | (1, 0) => Region::ZeroAndPositive,
        _ => Region::Mixed,
    };
    let ok = match region {
        Region::OnManifold => (t - 1.0).abs() <= 1e-6 && (s - 1.0).abs() <= 1e-6,
        Region::BothNegative => t > 0.0 && t < 1.0 && s > 0.0 && s < 1.0,
        Region::BothPositive => t > 1.0 && s > 1.0,
        Region::ZeroAndNegative => t > 0.0 && t <= 1.0 + slack && s > 0.0 && s <= 1.0 + slack,
        Region::ZeroAndPositive => t >= 1.0 - slack && s >= 1.0 - slack,
        Region::Mixed => true,
    };
    RegionCheck { region, violation: !ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::nonlinearity::Nonlinearity;
    use crate::roots::RootOptions;

    fn kirchhoff(n: usize) -> KirchhoffParams {
        let g = make_grid(3, 10.0, n).unwrap();
        KirchhoffParams::new(1.0, 1.0, GridFunction::constant(&g, 1.0), Nonlinearity::power(4.0, 3).unwrap()).unwrap()
    }

    #[test]
    fn scalar_model_cubics() {
        // Oracle: bisection on 1 + t² − 3t³ (‖u‖² = 1, b(∫|∇u|²)² = 1, ∫|u|⁵ = 3).
        let f = |t: f64| 1.0 + t * t - 3.0 * t.powi(3);
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) > 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        let frozen = 0.5 * (lo + hi);
        assert!((frozen - 0.824_122_62).abs() < 1e-8);
        let r = solve_bracketed(f, 0.0, 2.0, 1.0, f(2.0), &RootOptions::default(), "cubic").unwrap();
        assert!((r.x - frozen).abs() < 1e-14);
        let g = |t: f64| 1.0 + t * t - 2.0 * t.powi(3);
        let r = solve_bracketed(g, 0.0, 2.0, 1.0, g(2.0), &RootOptions::default(), "cubic").unwrap();
        assert!((r.x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_kirchhoff_fixed_point() {
        let p = kirchhoff(401);
        let u = GridFunction::from_fn(p.grid(), |r| 3.0 * (-r * r / 2.0).exp()).with_dirichlet();
        let opts = ProjectionOptions::default();
        let t = project_scalar_kirchhoff(&p, &u, &opts).unwrap();
        let v = u.scaled(t);
        let t2 = project_scalar_kirchhoff(&p, &v, &opts).unwrap();
        assert!((t2 - 1.0).abs() < 1e-8);
        let res = crate::kirchhoff::pairing_i(&p, &v, &v).unwrap();
        assert!(res.abs() <= 1e-9 * p.norm_sq(&v));
        assert_eq!(project_scalar_kirchhoff(&p, &GridFunction::zeros(p.grid()), &opts).unwrap_err(), Error::ZeroFunction);
    }

    #[test]
    fn pair_kirchhoff_idempotent_and_unique() {
        let p = kirchhoff(401);
        let u = GridFunction::from_fn(p.grid(), |r| 2.0 * (1.0 - r / 1.5) * (-r * r / 4.0).exp()).with_dirichlet();
        let opts = ProjectionOptions::default();
        let pair = project_pair_kirchhoff(&p, &u, &opts).unwrap();
        assert!(pair.max_residual() < 1e-8);
        let v = pair.apply(&u);
        let again = project_pair_kirchhoff(&p, &v, &opts).unwrap();
        assert!((again.t - 1.0).abs() < 1e-8 && (again.s - 1.0).abs() < 1e-8);
        for start in [0.01, 0.3, 3.0, 40.0, 1e3] {
            let other = project_pair_kirchhoff(&p, &u, &opts.with_start(start)).unwrap();
            assert!((other.t - pair.t).abs() < 1e-8 * pair.t);
            assert!((other.s - pair.s).abs() < 1e-8 * pair.s);
        }
        let pos = GridFunction::from_fn(p.grid(), |r| (-r).exp());
        assert!(matches!(project_pair_kirchhoff(&p, &pos, &opts), Err(Error::DegenerateSign { .. })));
    }

    #[test]
    fn choquard_scalar_closed_form() {
        assert!((scalar_choquard_from(4.0, 1.0, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(scalar_choquard_from(3.0, 3.0, 2.7), 1.0);
    }

    #[test]
    fn choquard_pair_linear_case() {
        let c = ChoquardCoefficients { a1: 3.0, a2: 3.0, b1: 2.0, b2: 2.0, b: 1.0 };
        let pair = solve_choquard_pair(&c, 2.0, &ProjectionOptions::default()).unwrap();
        assert!((pair.t - 1.0).abs() < 1e-14 && (pair.s - 1.0).abs() < 1e-14);
        // B² < B₁B₂ but a numerator is negative
        let bad = ChoquardCoefficients { a1: 1.0, a2: 10.0, b1: 2.0, b2: 2.0, b: 1.0 };
        assert!(matches!(solve_choquard_pair(&bad, 2.0, &ProjectionOptions::default()), Err(Error::NonPositiveSquare { .. })));
    }

    #[test]
    fn choquard_pair_superquadratic_back_substitution() {
        let c = ChoquardCoefficients { a1: 2.0, a2: 1.5, b1: 1.2, b2: 0.9, b: 0.4 };
        let p = 2.5;
        let pair = solve_choquard_pair(&c, p, &ProjectionOptions::default()).unwrap();
        let (t, s) = (pair.t, pair.s);
        let e1 = c.a1 * t * t - c.b1 * t.powf(2.0 * p) - c.b * t.powf(p) * s.powf(p);
        let e2 = c.a2 * s * s - c.b2 * s.powf(2.0 * p) - c.b * t.powf(p) * s.powf(p);
        assert!(e1.abs() < 1e-8 && e2.abs() < 1e-8);
        for start in [1e-3, 0.2, 0.9] {
            let q = solve_choquard_pair(&c, p, &ProjectionOptions::default().with_start(start)).unwrap();
            assert!((q.t - t).abs() < 1e-10 && (q.s - s).abs() < 1e-10);
        }
    }

    #[test]
    fn trichotomy_on_scaled_member() {
        let p = kirchhoff(401);
        let u = GridFunction::from_fn(p.grid(), |r| (1.2 - r) * (-r * r / 5.0).exp()).with_dirichlet();
        let opts = ProjectionOptions::default();
        let member = project_pair_kirchhoff(&p, &u, &opts).unwrap().apply(&u);
        for (lam, want) in [(0.5, Region::BothPositive), (0.7, Region::BothPositive), (1.5, Region::BothNegative), (2.0, Region::BothNegative)] {
            let v = member.scaled(lam);
            let res = relative_residuals_k(&p, &v).unwrap();
            let pair = project_pair_kirchhoff(&p, &v, &opts).unwrap();
            let check = classify_projection_region(res, &pair, 1e-9);
            assert_eq!(check.region, want);
            assert!(!check.violation);
            assert!((pair.t - 1.0 / lam).abs() < 1e-7);
        }
        let res = relative_residuals_k(&p, &member).unwrap();
        let pair = project_pair_kirchhoff(&p, &member, &opts).unwrap();
        assert_eq!(classify_projection_region(res, &pair, 1e-9).region, Region::OnManifold);
    }
}
