//! Kirchhoff energy
//! `I(u) = ½∫(a|∇u|² + V u²) + (b/4)(∫|∇u|²)² − ∫F(u)`,
//! its derivative, and the sign-split quantities used by the pair projection.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{
    self, dirichlet_form, dirichlet_integral, neumaier_sum, split_dirichlet_integral,
    split_dirichlet_pairing, split_signs, split_stiffness_apply, GridFunction, RadialGrid,
};
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Clone)]
pub struct KirchhoffParams {
    pub a: f64,
    pub b: f64,
    pub potential: GridFunction,
    pub nl: Nonlinearity,
}

impl KirchhoffParams {
    pub fn new(a: f64, b: f64, potential: GridFunction, nl: Nonlinearity) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kirchhoff.a".into(),
                reason: format!("a must be positive, got {a}"),
            });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kirchhoff.b".into(),
                reason: format!("b must be positive, got {b}"),
            });
        }
        grid::check_potential(&potential)?;
        Ok(Self { a, b, potential, nl })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.potential.grid()
    }

    pub fn dimension(&self) -> usize {
        self.grid().dimension()
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        u.ensure_on(self.grid())
    }

    /// `‖u‖² = ∫(a|∇u|² + V u²)`.
    pub fn norm_sq(&self, u: &GridFunction) -> f64 {
        self.a * split_dirichlet_integral(u) + grid::potential_term(&self.potential, u)
    }

    /// `∫ F(u)`.
    pub fn primitive_integral(&self, u: &GridFunction) -> f64 {
        let w = u.grid().weights();
        neumaier_sum(w.iter().zip(u.values()).map(|(w, &v)| w * self.nl.F(v)))
    }

    /// `∫ f(u) φ`.
    pub fn forcing_pairing(&self, u: &GridFunction, phi: &GridFunction) -> f64 {
        let w = u.grid().weights();
        neumaier_sum(
            w.iter()
                .zip(u.values().iter().zip(phi.values()))
                .map(|(w, (&v, &p))| w * self.nl.f(v) * p),
        )
    }
}

/// `α₁ = ‖u⁺‖²`, `α₂ = ‖u⁻‖²`, `β_i = b(∫|∇u^±|²)²`, `A = b ∫|∇u⁺|² ∫|∇u⁻|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionKirchhoff {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub coupling: f64,
    /// `∫|∇u⁺|²`, `∫|∇u⁻|²`.
    pub grad_plus: f64,
    pub grad_minus: f64,
}

/// Relative residuals of the three split identities `(energy, ⟨·,u⁺⟩, ⟨·,u⁻⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub energy: f64,
    pub plus: f64,
    pub minus: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.energy.max(self.plus).max(self.minus)
    }
}

/// Both sign parts, or a degenerate-sign error.
pub fn sign_parts(u: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let (plus, minus) = split_signs(u);
    let (p, m) = (plus.max_abs(), minus.max_abs());
    if p == 0.0 || m == 0.0 {
        return Err(Error::DegenerateSign { plus: p, minus: m });
    }
    Ok((plus, minus))
}

pub fn energy_i(params: &KirchhoffParams, u: &GridFunction) -> Result<f64> {
    params.check(u)?;
    let d = split_dirichlet_integral(u);
    let quad = params.a * d + grid::potential_term(&params.potential, u);
    Ok(0.5 * quad + 0.25 * params.b * d * d - params.primitive_integral(u))
}

/// Same functional with the monolithic `∫|∇u|²`; differs from [`energy_i`]
/// only through cells where `u` changes sign between neighbouring nodes.
pub fn energy_i_monolithic(params: &KirchhoffParams, u: &GridFunction) -> Result<f64> {
    params.check(u)?;
    let d = dirichlet_integral(u);
    let quad = params.a * d + grid::potential_term(&params.potential, u);
    Ok(0.5 * quad + 0.25 * params.b * d * d - params.primitive_integral(u))
}

/// Nodal partial derivatives `∂I/∂u_i` of the discrete energy.
pub fn energy_gradient_nodal(params: &KirchhoffParams, u: &GridFunction) -> Result<Vec<f64>> {
    params.check(u)?;
    let d = split_dirichlet_integral(u);
    let coef = params.a + params.b * d;
    let y = split_stiffness_apply(u);
    let w = u.grid().weights();
    let v = params.potential.values();
    Ok(u.values()
        .iter()
        .enumerate()
        .map(|(i, &x)| coef * y[i] + w[i] * (v[i] * x - params.nl.f(x)))
        .collect())
}

/// `L²` representative `g = −(a + b∫|∇u|²)Δ_r u + V u − f(u)`.
///
/// Each node carries the exact dual of the discrete energy, so
/// `∫ g φ = ⟨I′(u), φ⟩` for every `φ` vanishing at `r = r_max`, where the
/// Dirichlet node is zero.
pub fn gradient_i(params: &KirchhoffParams, u: &GridFunction) -> Result<GridFunction> {
    let nodal = energy_gradient_nodal(params, u)?;
    let rep = representative_from_nodal(u, &nodal);
    GridFunction::new(Arc::clone(u.grid()), rep)
}

/// Divide the nodal gradient by the quadrature weights; zero the Dirichlet node.
pub(crate) fn representative_from_nodal(u: &GridFunction, nodal: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = nodal.iter().zip(u.grid().weights()).map(|(g, w)| g / w).collect();
    if let Some(last) = out.last_mut() {
        *last = 0.0;
    }
    out
}

/// `⟨I′(u), φ⟩` from the integral formula
/// `∫(a∇u∇φ + Vuφ) + b∫|∇u|²∫∇u∇φ − ∫f(u)φ`.
pub fn pairing_i(params: &KirchhoffParams, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    params.check(u)?;
    params.check(phi)?;
    let d = split_dirichlet_integral(u);
    let grad_pair = split_dirichlet_pairing(u, phi)?;
    let w = u.grid().weights();
    let local = neumaier_sum(
        w.iter()
            .zip(params.potential.values())
            .zip(u.values().iter().zip(phi.values()))
            .map(|((w, v), (&x, &p))| w * (v * x - params.nl.f(x)) * p),
    );
    Ok((params.a + params.b * d) * grad_pair + local)
}

pub fn decomposition_k(params: &KirchhoffParams, u: &GridFunction) -> Result<DecompositionKirchhoff> {
    params.check(u)?;
    let (plus, minus) = sign_parts(u)?;
    Ok(decomposition_of_parts(params, &plus, &minus))
}

pub(crate) fn decomposition_of_parts(
    params: &KirchhoffParams,
    plus: &GridFunction,
    minus: &GridFunction,
) -> DecompositionKirchhoff {
    let gp = dirichlet_integral(plus);
    let gm = dirichlet_integral(minus);
    DecompositionKirchhoff {
        alpha1: params.a * gp + grid::potential_term(&params.potential, plus),
        alpha2: params.a * gm + grid::potential_term(&params.potential, minus),
        beta1: params.b * gp * gp,
        beta2: params.b * gm * gm,
        coupling: params.b * gp * gm,
        grad_plus: gp,
        grad_minus: gm,
    }
}

/// `(⟨I′(u),u⁺⟩, ⟨I′(u),u⁻⟩)` via `α₁ + β₁ + A − ∫f(u⁺)u⁺` and its mirror.
pub fn residuals_k(params: &KirchhoffParams, u: &GridFunction) -> Result<(f64, f64)> {
    params.check(u)?;
    let (plus, minus) = sign_parts(u)?;
    let d = decomposition_of_parts(params, &plus, &minus);
    let fp = params.forcing_pairing(&plus, &plus);
    let fm = params.forcing_pairing(&minus, &minus);
    Ok((
        d.alpha1 + d.beta1 + d.coupling - fp,
        d.alpha2 + d.beta2 + d.coupling - fm,
    ))
}

/// Monolithic `⟨I′(u), φ⟩` with the unsplit `∫∇u∇φ`.
fn pairing_monolithic(params: &KirchhoffParams, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    let d = dirichlet_integral(u);
    let grad_pair = dirichlet_form(u, phi)?;
    let w = u.grid().weights();
    let local = neumaier_sum(
        w.iter()
            .zip(params.potential.values())
            .zip(u.values().iter().zip(phi.values()))
            .map(|((w, v), (&x, &p))| w * (v * x - params.nl.f(x)) * p),
    );
    Ok((params.a + params.b * d) * grad_pair + local)
}

/// Residuals of
/// `I(u) = I(u⁺) + I(u⁻) + (b/2)∫|∇u⁺|²∫|∇u⁻|²` and
/// `⟨I′(u),u^±⟩ = ⟨I′(u^±),u^±⟩ + b∫|∇u⁺|²∫|∇u⁻|²`.
///
/// Left sides treat `u` as a whole (monolithic Dirichlet form); right sides are
/// assembled from the split parts and the coupling term.
pub fn check_identities_k(params: &KirchhoffParams, u: &GridFunction) -> Result<IdentityResiduals> {
    params.check(u)?;
    let (plus, minus) = sign_parts(u)?;
    let gp = dirichlet_integral(&plus);
    let gm = dirichlet_integral(&minus);
    let coupling = params.b * gp * gm;

    let lhs_energy = energy_i_monolithic(params, u)?;
    let rhs_energy = energy_i(params, &plus)? + energy_i(params, &minus)? + 0.5 * coupling;

    let lhs_plus = pairing_monolithic(params, u, &plus)?;
    let rhs_plus = pairing_monolithic(params, &plus, &plus)? + coupling;
    let lhs_minus = pairing_monolithic(params, u, &minus)?;
    let rhs_minus = pairing_monolithic(params, &minus, &minus)? + coupling;

    let scale = params.norm_sq(u);
    let rel = |l: f64, r: f64| (l - r).abs() / l.abs().max(r.abs()).max(scale);
    Ok(IdentityResiduals {
        energy: rel(lhs_energy, rhs_energy),
        plus: rel(lhs_plus, rhs_plus),
        minus: rel(lhs_minus, rhs_minus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn defaults(n: usize, r_max: f64) -> KirchhoffParams {
        let g = make_grid(3, r_max, n).unwrap();
        KirchhoffParams::new(
            1.0,
            1.0,
            GridFunction::constant(&g, 1.0),
            Nonlinearity::power(4.0, 3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_state() {
        let p = defaults(201, 8.0);
        let z = GridFunction::zeros(p.grid());
        assert_eq!(energy_i(&p, &z).unwrap(), 0.0);
        assert!(gradient_i(&p, &z).unwrap().is_zero());
    }

    #[test]
    fn local_energy_cross_check_at_small_b() {
        // Independent local functional: ½∫(a u'² + V u²) − ∫F(u) via the centered
        // derivative and plain trapezoid on a fine grid, plus the quartic term.
        let g = make_grid(3, 8.0, 4001).unwrap();
        let p = KirchhoffParams::new(
            1.3,
            1e-9,
            GridFunction::constant(&g, 2.0),
            Nonlinearity::power(4.0, 3).unwrap(),
        )
        .unwrap();
        let u = GridFunction::from_fn(&g, |r| 0.8 * (-r * r / 2.0).exp()).with_dirichlet();
        let h = g.step();
        let trap = |f: &dyn Fn(f64) -> f64| {
            let n = g.len();
            let mut s = 0.0;
            for i in 0..n {
                let r = g.nodes()[i];
                let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                s += wt * f(r) * 4.0 * std::f64::consts::PI * r * r * h;
            }
            s
        };
        let du = |r: f64| -0.8 * r * (-r * r / 2.0).exp();
        let uu = |r: f64| 0.8 * (-r * r / 2.0).exp();
        let local = 0.5 * trap(&|r| 1.3 * du(r).powi(2) + 2.0 * uu(r).powi(2)) - trap(&|r| uu(r).powi(5) / 5.0);
        let e = energy_i(&p, &u).unwrap();
        assert!((e - local).abs() < 1e-4 * local.abs(), "{e} vs {local}");
    }

    #[test]
    fn gradient_is_dual_of_energy() {
        let p = defaults(401, 8.0);
        let g = p.grid().clone();
        // the sign change sits between nodes; the split form has a kink where a node is exactly 0
        let u = GridFunction::from_fn(&g, |r| (1.0 - r * r / 2.03) * (-r * r / 3.0).exp()).with_dirichlet();
        let phi = GridFunction::from_fn(&g, |r| (r * 1.3).cos() * (-r * r / 5.0).exp()).with_dirichlet();
        let eps = 1e-5;
        let ep = energy_i(&p, &u.combine(1.0, &phi, eps).unwrap()).unwrap();
        let em = energy_i(&p, &u.combine(1.0, &phi, -eps).unwrap()).unwrap();
        let fd = (ep - em) / (2.0 * eps);
        let formula = pairing_i(&p, &u, &phi).unwrap();
        let rep = grid::inner_l2(&gradient_i(&p, &u).unwrap(), &phi).unwrap();
        assert!((fd - formula).abs() < 1e-6 * fd.abs().max(1.0), "{fd} {formula}");
        assert!((fd - rep).abs() < 1e-5 * fd.abs().max(1.0), "{fd} {rep}");
    }

    #[test]
    fn decomposition_positive_and_consistent() {
        let p = defaults(401, 10.0);
        let u = GridFunction::from_fn(p.grid(), |r| (1.0 - r) * (-r).exp()).with_dirichlet();
        let d = decomposition_k(&p, &u).unwrap();
        for v in [d.alpha1, d.alpha2, d.beta1, d.beta2, d.coupling] {
            assert!(v > 0.0);
        }
        let prod = d.beta1 * d.beta2;
        assert!((d.coupling * d.coupling - prod).abs() / prod < 1e-12);
        let pos = GridFunction::from_fn(p.grid(), |r| (-r).exp());
        assert!(matches!(decomposition_k(&p, &pos), Err(Error::DegenerateSign { .. })));
        assert!(matches!(check_identities_k(&p, &pos), Err(Error::DegenerateSign { .. })));
    }

    #[test]
    fn residuals_match_full_pairing() {
        let p = defaults(401, 10.0);
        let u = GridFunction::from_fn(p.grid(), |r| 2.0 * (1.0 - r / 2.0) * (-r * r / 4.0).exp()).with_dirichlet();
        let (plus, minus) = split_signs(&u);
        let (rp, rm) = residuals_k(&p, &u).unwrap();
        assert!((rp - pairing_i(&p, &u, &plus).unwrap()).abs() < 1e-10 * rp.abs().max(1.0));
        assert!((rm - pairing_i(&p, &u, &minus).unwrap()).abs() < 1e-10 * rm.abs().max(1.0));
    }

    #[test]
    fn identities_exact_for_disjoint_support() {
        let p = defaults(401, 10.0);
        let u = GridFunction::from_fn(p.grid(), |r| {
            if r < 1.5 {
                (1.5 - r).powi(2)
            } else if r > 2.0 && r < 5.0 {
                -((r - 2.0) * (5.0 - r))
            } else {
                0.0
            }
        });
        let res = check_identities_k(&p, &u).unwrap();
        assert!(res.max() <= 1e-10, "{res:?}");
    }

    #[test]
    fn decomposition_inequality_plus_a() {
        let p = defaults(401, 10.0);
        let u = GridFunction::from_fn(p.grid(), |r| (1.0 - r * 0.4) * (-r * r / 6.0).exp()).with_dirichlet();
        let (plus, minus) = split_signs(&u);
        let d = decomposition_k(&p, &u).unwrap();
        let (rp, rm) = residuals_k(&p, &u).unwrap();
        let own_plus = pairing_i(&p, &plus, &plus).unwrap();
        let own_minus = pairing_i(&p, &minus, &minus).unwrap();
        assert!(rp > own_plus && rm > own_minus);
        assert!((rp - own_plus - d.coupling).abs() < 1e-10 * d.coupling.max(1.0));
    }
}
