//! Bracketing root finders for the monotone scalar functions behind the projections.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Stop once `|f(x)| ≤ f_tol`.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than `x_rel_tol · |x|`.
    pub x_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 0.0,
            x_rel_tol: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket `[lo, hi]`, with `f(lo)` and `f(hi)` of opposite sign.
    pub lo: f64,
    pub hi: f64,
}

impl Root {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection with secant acceleration on a sign-changing bracket.
///
/// `f_lo` and `f_hi` are the (possibly limiting) values at the ends; either may be infinite.
pub fn solve_bracketed(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
    opts: &RootOptions,
    what: &'static str,
) -> Result<Root> {
    if f_lo == 0.0 {
        return Ok(Root { x: lo, value: 0.0, iterations: 0, lo, hi: lo });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, value: 0.0, iterations: 0, lo: hi, hi });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketNotFound { what, limit: hi });
    }
    let mut last_width = hi - lo;
    let mut use_bisection = false;
    for it in 1..=opts.max_iter {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        let secant = if f_lo.is_finite() && f_hi.is_finite() {
            hi - f_hi * (hi - lo) / (f_hi - f_lo)
        } else {
            f64::NAN
        };
        let margin = 0.05 * width;
        let x = if !use_bisection && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NoConvergence { what, iterations: it });
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        let new_width = hi - lo;
        // secant steps that fail to halve the bracket trigger a bisection
        use_bisection = new_width > 0.5 * last_width && !use_bisection;
        last_width = new_width;
        if fx.abs() <= opts.f_tol || fx == 0.0 || new_width <= opts.x_rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(Root { x, value: fx, iterations: it, lo, hi });
        }
    }
    Err(Error::NoConvergence { what, iterations: opts.max_iter })
}

/// Expand `[start/2^k, start·2^k]` geometrically until `f` differs in sign from `sign_near_zero`,
/// the known sign of `f` as `x → 0⁺`.
///
/// Returns a bracket `(lo, hi, f(lo), f(hi))` with `lo < hi`.
pub fn expand_bracket(
    f: &impl Fn(f64) -> f64,
    start: f64,
    sign_near_zero: f64,
    limit: f64,
    what: &'static str,
) -> Result<(f64, f64, f64, f64)> {
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(Error::BracketNotFound { what, limit: start });
    }
    if f0.signum() == sign_near_zero {
        // root above start
        let (mut lo, mut flo) = (start, f0);
        let mut hi = start * 2.0;
        while hi <= start * limit {
            let fh = f(hi);
            if fh.signum() != sign_near_zero || fh == 0.0 {
                return Ok((lo, hi, flo, fh));
            }
            lo = hi;
            flo = fh;
            hi *= 2.0;
        }
        Err(Error::BracketNotFound { what, limit: start * limit })
    } else {
        let (mut hi, mut fhi) = (start, f0);
        let mut lo = start / 2.0;
        while lo >= start / limit {
            let fl = f(lo);
            if fl.signum() == sign_near_zero && fl != 0.0 {
                return Ok((lo, hi, fl, fhi));
            }
            hi = lo;
            fhi = fl;
            lo /= 2.0;
        }
        Err(Error::BracketNotFound { what, limit: start / limit })
    }
}
