//! Newton polishing of Kirchhoff critical points with a double-double residual.
//!
//! The free gradient of a stiff state cannot be resolved in `f64`: rounding the
//! nodal values alone perturbs it by about `‖H‖·ε·max|u|`, with `‖H‖` growing
//! like `(a + b∫|∇u|²)/h²`. The residual here is accumulated in double-double on
//! a state stored as `hi + lo`; the Newton correction only needs `f64`.

use std::sync::Arc;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kirchhoff::KirchhoffParams;

/// A state carried beyond `f64`: node `i` holds `hi[i] + lo[i]`.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub state: GridFunction,
    pub correction: Vec<f64>,
    /// `L²` norm of the free gradient at `state + correction`, evaluated in double-double.
    pub grad_norm: f64,
    pub newton_steps: usize,
}

fn to_dd(hi: &[f64], lo: &[f64]) -> Vec<Dd> {
    hi.iter().zip(lo).map(|(&h, &l)| Dd::new(h, l)).collect()
}

/// `f(x)` in double-double when the exponent is an integer, else `f(hi) + f′(hi)·lo`.
fn forcing_dd(params: &KirchhoffParams, x: Dd) -> Dd {
    match params.nl.power_exponent() {
        Some(q) if q.fract() == 0.0 && q < 64.0 => {
            let m = x.abs().powi(q as u32 - 1);
            m * x
        }
        _ => Dd::from(params.nl.f(x.hi)) + Dd::from(params.nl.derivative(x.hi) * x.lo),
    }
}

/// Split stiffness action `K_s u`, and `D = uᵀ K_s u`, in double-double.
fn stiffness_dd(params: &KirchhoffParams, u: &[Dd]) -> (Vec<Dd>, Dd) {
    let grid = params.grid();
    let h2 = grid.step() * grid.step();
    let mut y = vec![Dd::ZERO; u.len()];
    for (i, c) in grid.cell_volumes().iter().enumerate() {
        let k = c / h2;
        if u[i].hi * u[i + 1].hi < 0.0 {
            // sign-change cell: each side sees the other part as zero
            y[i] = y[i] + u[i].mul_f64(k);
            y[i + 1] = y[i + 1] + u[i + 1].mul_f64(k);
        } else {
            let flux = (u[i + 1] - u[i]).mul_f64(k);
            y[i] = y[i] - flux;
            y[i + 1] = y[i + 1] + flux;
        }
    }
    let d = u.iter().zip(&y).map(|(a, b)| *a * *b).sum();
    (y, d)
}

/// Nodal residual `∂I/∂u_i` at `hi + lo`, zero at the Dirichlet node; also `y = K_s u` and `D`.
fn residual_dd(params: &KirchhoffParams, u: &[Dd]) -> (Vec<Dd>, Vec<Dd>, Dd) {
    let (y, d) = stiffness_dd(params, u);
    let coef = Dd::from(params.a) + d.mul_f64(params.b);
    let w = params.grid().weights();
    let v = params.potential.values();
    let n = u.len();
    let mut r: Vec<Dd> = (0..n)
        .map(|i| coef * y[i] + (u[i].mul_f64(v[i]) - forcing_dd(params, u[i])).mul_f64(w[i]))
        .collect();
    r[n - 1] = Dd::ZERO;
    (r, y, d)
}

fn l2_from_nodal(params: &KirchhoffParams, r: &[Dd]) -> f64 {
    let w = params.grid().weights();
    let s: f64 = r
        .iter()
        .zip(w)
        .filter(|(_, &w)| w > 0.0)
        .map(|(r, &w)| {
            let g = r.to_f64();
            g * g / w
        })
        .sum();
    s.sqrt()
}

/// `L²` norm of the free gradient at `hi + lo`, over nodes of positive weight.
pub fn gradient_norm_dd(params: &KirchhoffParams, hi: &GridFunction, lo: &[f64]) -> Result<f64> {
    hi.ensure_on(params.grid())?;
    if lo.len() != hi.len() {
        return Err(Error::GridMismatch);
    }
    let u = to_dd(hi.values(), lo);
    Ok(l2_from_nodal(params, &residual_dd(params, &u).0))
}

/// Tridiagonal solve with partial pivoting. Row `i` reads `a[i] x[i−1] + b[i] x[i] + c[i] x[i+1]`.
pub(crate) fn tridiagonal_pivoted(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let (mut b, mut c, mut d) = (b.to_vec(), c.to_vec(), d.to_vec());
    let mut a = a.to_vec();
    let mut c2 = vec![0.0; n];
    for i in 0..n - 1 {
        if b[i].abs() >= a[i + 1].abs() {
            if b[i] == 0.0 {
                return Err(Error::SingularSystem("singular Newton matrix".into()));
            }
            let m = a[i + 1] / b[i];
            b[i + 1] -= m * c[i];
            d[i + 1] -= m * d[i];
        } else {
            // swap rows i and i+1 before eliminating
            let m = b[i] / a[i + 1];
            b[i] = a[i + 1];
            let old_b = b[i + 1];
            b[i + 1] = c[i] - m * old_b;
            if i + 2 < n {
                c2[i] = c[i + 1];
                c[i + 1] = -m * c[i + 1];
            }
            c[i] = old_b;
            let old_d = d[i];
            d[i] = d[i + 1];
            d[i + 1] = old_d - m * d[i + 1];
        }
        a[i + 1] = 0.0;
    }
    if b[n - 1] == 0.0 {
        return Err(Error::SingularSystem("singular Newton matrix".into()));
    }
    d[n - 1] /= b[n - 1];
    if n >= 2 {
        d[n - 2] = (d[n - 2] - c[n - 2] * d[n - 1]) / b[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        d[i] = (d[i] - c[i] * d[i + 1] - c2[i] * d[i + 2]) / b[i];
    }
    Ok(d)
}

/// Newton step `J δ = −R` with `J = (a + bD) K_s + 2b y yᵀ + W diag(V − f′(u))`.
fn newton_step(params: &KirchhoffParams, u: &[Dd], r: &[Dd], y: &[Dd], d: Dd) -> Result<Vec<f64>> {
    let grid = params.grid();
    let n = u.len();
    let h2 = grid.step() * grid.step();
    let coef = params.a + params.b * d.to_f64();
    let w = grid.weights();
    let v = params.potential.values();
    let mut lower = vec![0.0; n];
    let mut diag: Vec<f64> = (0..n).map(|i| w[i] * (v[i] - params.nl.derivative(u[i].hi))).collect();
    let mut upper = vec![0.0; n];
    for (i, c) in grid.cell_volumes().iter().enumerate() {
        let k = coef * c / h2;
        diag[i] += k;
        diag[i + 1] += k;
        if u[i].hi * u[i + 1].hi >= 0.0 {
            upper[i] -= k;
            lower[i + 1] -= k;
        }
    }
    lower[n - 1] = 0.0;
    diag[n - 1] = 1.0;
    let rhs: Vec<f64> = r.iter().map(|x| -x.to_f64()).collect();
    let mut yv: Vec<f64> = y.iter().map(|x| x.to_f64()).collect();
    yv[n - 1] = 0.0;
    let z = tridiagonal_pivoted(&lower, &diag, &upper, &rhs)?;
    let q = tridiagonal_pivoted(&lower, &diag, &upper, &yv)?;
    // Sherman–Morrison for the rank-one 2b y yᵀ
    let yz: f64 = yv.iter().zip(&z).map(|(a, b)| a * b).sum();
    let yq: f64 = yv.iter().zip(&q).map(|(a, b)| a * b).sum();
    let denom = 1.0 + 2.0 * params.b * yq;
    if !(denom.abs() > f64::EPSILON) {
        return Err(Error::SingularSystem("singular rank-one update in Newton step".into()));
    }
    let gamma = 2.0 * params.b * yz / denom;
    Ok(z.iter().zip(&q).map(|(z, q)| z - gamma * q).collect())
}

/// Polish a near-critical state to `grad_tol` by Newton on the double-double residual.
///
/// The sign pattern is re-read each step from `hi`; a correction that changes the
/// number of sign changes is rejected. Returns the best iterate found.
pub fn refine_kirchhoff(params: &KirchhoffParams, start: &GridFunction, grad_tol: f64, max_steps: usize) -> Result<Refinement> {
    start.ensure_on(params.grid())?;
    let n = start.len();
    let sign_changes = |u: &[Dd]| u.windows(2).filter(|p| p[0].hi * p[1].hi < 0.0).count();
    let mut u = to_dd(start.values(), &vec![0.0; n]);
    let crossings = sign_changes(&u);
    let (mut r, mut y, mut d) = residual_dd(params, &u);
    let mut norm = l2_from_nodal(params, &r);
    let mut steps = 0;
    while steps < max_steps && norm > 0.01 * grad_tol {
        let delta = newton_step(params, &u, &r, &y, d)?;
        let next: Vec<Dd> = u.iter().zip(&delta).map(|(x, dx)| *x + Dd::from(*dx)).collect();
        if sign_changes(&next) != crossings {
            break;
        }
        let (nr, ny, nd) = residual_dd(params, &next);
        let next_norm = l2_from_nodal(params, &nr);
        if !(next_norm < norm) {
            break;
        }
        steps += 1;
        (u, r, y, d, norm) = (next, nr, ny, nd, next_norm);
    }
    let hi: Vec<f64> = u.iter().map(|x| x.hi).collect();
    let lo: Vec<f64> = u.iter().map(|x| x.lo).collect();
    Ok(Refinement {
        state: GridFunction::new(Arc::clone(start.grid()), hi)?,
        correction: lo,
        grad_norm: norm,
        newton_steps: steps,
    })
}
