//! Radial discretization of R^N for N = 2, 3.
//!
//! A [`RadialGrid`] is a uniform mesh `0 = r_0 < r_1 < ... < r_M = r_max` of the
//! truncation ball together with two sets of integration data:
//!
//! * node weights `w_i` for volume integrals `∫ v(|x|) dx ≈ Σ w_i v_i`. These are
//!   trapezoid weights on the `r^{N-1}`-weighted integrand with Gregory end
//!   corrections, so polynomials of degree ≤ 3 in `r` (including `p(r) r^{N-1}`
//!   with `deg p ≤ 1`) integrate exactly. The origin gets the weight
//!   `δ = ω h^N / (2N²)`, balanced by `−2δ, +δ` at `r_1, r_2` so that exactness
//!   is kept. Every node then has positive weight, so the `L²` representative
//!   `G_i / w_i` pairs exactly with every test function, and at the origin it
//!   equals the regularized Laplacian `N u″(0)`.
//! * exact cell volumes `ω_{N-1} ∫_{r_i}^{r_{i+1}} r^{N-1} dr`, used by the
//!   Dirichlet form `∫|∇u|²` of the piecewise-linear interpolant.
//!
//! The Dirichlet integral used by the energies is the *split* form
//! `D(u) = D(u⁺) + D(u⁻)` with nodewise sign parts. It coincides with the
//! monolithic form for one-signed states and for states whose parts are
//! separated by a zero node; in a cell straddling a sign change the two differ
//! by an `O(h)` interface term.

use std::sync::Arc;

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// Gregory end-correction coefficients (applied symmetrically at both ends).
const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Surface measure of the unit sphere `S^{N-1}`.
pub fn sphere_measure(dimension: usize) -> f64 {
    match dimension {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    dimension: usize,
    r_max: f64,
    step: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cell_volumes: Vec<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.nodes.len() == other.nodes.len()
            && self.r_max.to_bits() == other.r_max.to_bits()
    }
}

impl RadialGrid {
    /// Uniform grid with `node_count` nodes on `[0, r_max]`.
    pub fn uniform(dimension: usize, r_max: f64, node_count: usize) -> Result<Arc<Self>> {
        if dimension != 2 && dimension != 3 {
            return Err(Error::InvalidDimension(dimension));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidRadius(r_max));
        }
        if node_count < MIN_NODES {
            return Err(Error::TooFewNodes {
                got: node_count,
                min: MIN_NODES,
            });
        }
        let m = node_count - 1;
        let step = r_max / m as f64;
        let mut nodes: Vec<f64> = (0..node_count).map(|i| i as f64 * step).collect();
        nodes[m] = r_max;

        let omega = sphere_measure(dimension);
        let power = (dimension - 1) as i32;
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let from_end = m - i;
                let tau = if i < GREGORY.len() {
                    GREGORY[i]
                } else if from_end < GREGORY.len() {
                    GREGORY[from_end]
                } else {
                    1.0
                };
                omega * tau * step * r.powi(power)
            })
            .collect::<Vec<f64>>();
        // Second-difference stencil: annihilates 1 and r, so exactness is untouched.
        let mut weights = weights;
        let delta = omega * step.powi(dimension as i32) / (2.0 * (dimension * dimension) as f64);
        weights[0] += delta;
        weights[1] -= 2.0 * delta;
        weights[2] += delta;

        let n = dimension as i32;
        let cell_volumes = nodes
            .windows(2)
            .map(|w| omega * (w[1].powi(n) - w[0].powi(n)) / dimension as f64)
            .collect();

        Ok(Arc::new(Self {
            dimension,
            r_max,
            step,
            nodes,
            weights,
            cell_volumes,
        }))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact volume of the shell between consecutive nodes.
    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    /// Volume of the truncation ball.
    pub fn ball_volume(&self) -> f64 {
        sphere_measure(self.dimension) * self.r_max.powi(self.dimension as i32)
            / self.dimension as f64
    }

    /// Stable 64-bit fingerprint of the grid geometry (FNV-1a over the defining data).
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                hash ^= u64::from(*b);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(&(self.dimension as u64).to_le_bytes());
        feed(&(self.nodes.len() as u64).to_le_bytes());
        feed(&self.r_max.to_bits().to_le_bytes());
        hash
    }

    /// `Σ w_i v_i` over raw node values.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        neumaier_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    /// Monolithic Dirichlet bilinear form `∫∇u·∇v` of the piecewise-linear interpolants.
    pub fn dirichlet_form_values(&self, u: &[f64], v: &[f64]) -> f64 {
        let h2 = self.step * self.step;
        neumaier_sum(
            self.cell_volumes
                .iter()
                .enumerate()
                .map(|(i, c)| c * (u[i + 1] - u[i]) * (v[i + 1] - v[i]) / h2),
        )
    }

    /// Nodal action of the monolithic Dirichlet form: `y_i = ∂/∂u_i (½ ∫|∇u|²)`.
    pub fn stiffness_apply_values(&self, u: &[f64]) -> Vec<f64> {
        let h2 = self.step * self.step;
        let mut y = vec![0.0; u.len()];
        for (i, c) in self.cell_volumes.iter().enumerate() {
            let flux = c * (u[i + 1] - u[i]) / h2;
            y[i] -= flux;
            y[i + 1] += flux;
        }
        y
    }

    /// Tridiagonal coefficients `(lower, diag, upper)` of the monolithic stiffness matrix.
    pub fn stiffness_tridiagonal(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.len();
        let h2 = self.step * self.step;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for (i, c) in self.cell_volumes.iter().enumerate() {
            let k = c / h2;
            diag[i] += k;
            diag[i + 1] += k;
            upper[i] -= k;
            lower[i + 1] -= k;
        }
        (lower, diag, upper)
    }
}

/// A radial function sampled on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: grid.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn constant(grid: &Arc<RadialGrid>, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_on(&self, grid: &RadialGrid) -> Result<()> {
        if *self.grid == *grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    /// Copy with the outer boundary value forced to zero.
    pub fn with_dirichlet(mut self) -> Self {
        if let Some(last) = self.values.last_mut() {
            *last = 0.0;
        }
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn split_signs(&self) -> (GridFunction, GridFunction) {
        split_signs(self)
    }
}

pub fn make_grid(dimension: usize, r_max: f64, node_count: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::uniform(dimension, r_max, node_count)
}

pub fn integrate(grid: &RadialGrid, v: &GridFunction) -> Result<f64> {
    v.ensure_on(grid)?;
    Ok(grid.integrate_values(v.values()))
}

/// `∫ u v` (both on the same grid).
pub fn inner_l2(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    let w = u.grid().weights();
    Ok(neumaier_sum(
        w.iter()
            .zip(u.values().iter().zip(v.values()))
            .map(|(w, (a, b))| w * a * b),
    ))
}

pub fn l2_norm(u: &GridFunction) -> f64 {
    inner_l2(u, u).unwrap_or(f64::NAN).max(0.0).sqrt()
}

/// Second-order finite-difference `du/dr`: centered in the interior, one-sided at the ends.
pub fn radial_derivative(grid: &RadialGrid, u: &GridFunction) -> Result<GridFunction> {
    u.ensure_on(grid)?;
    let v = u.values();
    let n = v.len();
    let h = grid.step();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    GridFunction::new(Arc::clone(u.grid()), d)
}

/// Monolithic `∫|∇u|²` of the piecewise-linear interpolant of `u`.
pub fn dirichlet_integral(u: &GridFunction) -> f64 {
    u.grid().dirichlet_form_values(u.values(), u.values())
}

/// Monolithic `∫∇u·∇v`.
pub fn dirichlet_form(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch);
    }
    Ok(u.grid().dirichlet_form_values(u.values(), v.values()))
}

/// Split `∫|∇u|² := ∫|∇u⁺|² + ∫|∇u⁻|²`, the form every energy in this crate uses.
pub fn split_dirichlet_integral(u: &GridFunction) -> f64 {
    let (plus, minus) = split_signs(u);
    dirichlet_integral(&plus) + dirichlet_integral(&minus)
}

/// Nodal gradient of `½ · split_dirichlet_integral`.
///
/// At a node where `u_i > 0` only the positive part contributes and vice versa;
/// exactly-zero nodes take the monolithic stencil.
pub fn split_stiffness_apply(u: &GridFunction) -> Vec<f64> {
    let grid = u.grid();
    let (plus, minus) = split_signs(u);
    let yp = grid.stiffness_apply_values(plus.values());
    let ym = grid.stiffness_apply_values(minus.values());
    u.values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                yp[i]
            } else if v < 0.0 {
                ym[i]
            } else {
                yp[i] + ym[i]
            }
        })
        .collect()
}

/// Tridiagonal Hessian of `½ · split_dirichlet_integral` at the sign pattern of `u`:
/// the monolithic stencil with the coupling removed across each sign-change cell.
pub fn split_stiffness_tridiagonal(u: &GridFunction) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut lower, diag, mut upper) = u.grid().stiffness_tridiagonal();
    let v = u.values();
    for i in 0..v.len() - 1 {
        if v[i] * v[i + 1] < 0.0 {
            upper[i] = 0.0;
            lower[i + 1] = 0.0;
        }
    }
    (lower, diag, upper)
}

/// Split form of `∫∇u·∇φ`, evaluated cell by cell.
pub fn split_dirichlet_pairing(u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    if !u.same_grid(phi) {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let h2 = grid.step() * grid.step();
    let uv = u.values();
    let pv = phi.values();
    // φ restricted to the support of each sign part (zero nodes feed both).
    let restrict = |positive: bool, i: usize| -> f64 {
        let v = uv[i];
        if v == 0.0 || (v > 0.0) == positive {
            pv[i]
        } else {
            0.0
        }
    };
    let terms = grid.cell_volumes().iter().enumerate().map(|(i, c)| {
        let (p0, p1) = (uv[i].max(0.0), uv[i + 1].max(0.0));
        let (m0, m1) = (uv[i].min(0.0), uv[i + 1].min(0.0));
        let dphi_p = restrict(true, i + 1) - restrict(true, i);
        let dphi_m = restrict(false, i + 1) - restrict(false, i);
        c * ((p1 - p0) * dphi_p + (m1 - m0) * dphi_m) / h2
    });
    Ok(neumaier_sum(terms))
}

/// `‖u‖² = ∫(a|∇u|² + V u²)` with the split Dirichlet integral.
pub fn h_norm_sq(grid: &RadialGrid, a: f64, potential: &GridFunction, u: &GridFunction) -> Result<f64> {
    u.ensure_on(grid)?;
    potential.ensure_on(grid)?;
    check_potential(potential)?;
    Ok(a * split_dirichlet_integral(u) + potential_term(potential, u))
}

/// `∫ V u²`.
pub fn potential_term(potential: &GridFunction, u: &GridFunction) -> f64 {
    let w = u.grid().weights();
    neumaier_sum(
        w.iter()
            .zip(potential.values().iter().zip(u.values()))
            .map(|(w, (v, x))| w * v * x * x),
    )
}

pub fn check_potential(potential: &GridFunction) -> Result<()> {
    for (&r, &v) in potential.grid().nodes().iter().zip(potential.values()) {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositivePotential { r, value: v });
        }
    }
    Ok(())
}

/// Nodewise `(max(u,0), min(u,0))`.
pub fn split_signs(u: &GridFunction) -> (GridFunction, GridFunction) {
    (u.map(|v| v.max(0.0)), u.map(|v| v.min(0.0)))
}

/// Number of maximal runs of same-signed nodes with `|u| > amplitude_tol`.
///
/// Nodes at or below the tolerance separate runs, as does a strict sign flip.
pub fn count_nodal_domains(u: &GridFunction, amplitude_tol: f64) -> usize {
    let mut count = 0;
    let mut current = 0i8;
    for &v in u.values() {
        let sign = if v.abs() <= amplitude_tol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        };
        if sign != 0 && sign != current {
            count += 1;
        }
        current = sign;
    }
    count
}

/// Fraction of `‖u‖²` carried by the outer `outer_fraction` of the radial range.
pub fn tail_energy_fraction(a: f64, potential: &GridFunction, u: &GridFunction, outer_fraction: f64) -> f64 {
    let grid = u.grid();
    let cutoff = grid.r_max() * (1.0 - outer_fraction);
    let h2 = grid.step() * grid.step();
    let (plus, minus) = split_signs(u);
    let cells = |v: &[f64], from_cutoff: bool| -> f64 {
        neumaier_sum(grid.cell_volumes().iter().enumerate().filter_map(|(i, c)| {
            let include = !from_cutoff || grid.nodes()[i] >= cutoff;
            include.then(|| c * (v[i + 1] - v[i]).powi(2) / h2)
        }))
    };
    let pot = |from_cutoff: bool| -> f64 {
        neumaier_sum(
            grid.nodes()
                .iter()
                .zip(grid.weights())
                .zip(potential.values().iter().zip(u.values()))
                .filter_map(|((&r, w), (vv, x))| (!from_cutoff || r >= cutoff).then(|| w * vv * x * x)),
        )
    };
    let total = a * (cells(plus.values(), false) + cells(minus.values(), false)) + pot(false);
    if total <= 0.0 {
        return 0.0;
    }
    let tail = a * (cells(plus.values(), true) + cells(minus.values(), true)) + pot(true);
    tail / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_ball_volume() {
        let g3 = make_grid(3, 1.0, 2001).unwrap();
        let s3: f64 = g3.weights().iter().sum();
        assert!((s3 - 4.0 * PI / 3.0).abs() < 1e-6);
        let g2 = make_grid(2, 1.0, 2001).unwrap();
        let s2: f64 = g2.weights().iter().sum();
        assert!((s2 - PI).abs() < 1e-6);
        for g in [&g2, &g3] {
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(make_grid(3, 0.0, 100).unwrap_err(), Error::InvalidRadius(0.0));
        assert_eq!(make_grid(4, 1.0, 100).unwrap_err(), Error::InvalidDimension(4));
        assert!(matches!(make_grid(3, 1.0, 8), Err(Error::TooFewNodes { .. })));
    }

    #[test]
    fn nodes_are_uniform_and_end_at_r_max() {
        let g = make_grid(3, 12.0, 1201).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(*g.nodes().last().unwrap(), 12.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!((g.step() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn integrates_closed_forms() {
        let g = make_grid(3, 12.0, 1201).unwrap();
        let zero = GridFunction::zeros(&g);
        assert_eq!(integrate(&g, &zero).unwrap(), 0.0);
        let gauss = GridFunction::from_fn(&g, |r| (-r * r).exp());
        assert!((integrate(&g, &gauss).unwrap() - PI.powf(1.5)).abs() < 1e-6);
        let g1 = make_grid(3, 1.0, 2001).unwrap();
        let one = GridFunction::constant(&g1, 1.0);
        assert!((integrate(&g1, &one).unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn linear_times_weight_is_exact() {
        for dim in [2usize, 3] {
            let g = make_grid(dim, 1.0, 2001).unwrap();
            let v = GridFunction::from_fn(&g, |r| 2.0 - 3.0 * r);
            let omega = sphere_measure(dim);
            let n = dim as f64;
            let exact = omega * (2.0 / n - 3.0 / (n + 1.0));
            assert!((integrate(&g, &v).unwrap() - exact).abs() < 1e-10, "N = {dim}");
        }
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let g = make_grid(3, 1.0, 101).unwrap();
        let other = make_grid(3, 2.0, 101).unwrap();
        let v = GridFunction::constant(&other, 1.0);
        assert_eq!(integrate(&g, &v).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn derivative_exact_on_low_degree() {
        let g = make_grid(3, 1.0, 101).unwrap();
        let c = GridFunction::constant(&g, 3.5);
        assert!(radial_derivative(&g, &c).unwrap().values().iter().all(|d| d.abs() < 1e-12));
        let lin = GridFunction::from_fn(&g, |r| r);
        let d = radial_derivative(&g, &lin).unwrap();
        assert!(d.values().iter().all(|d| (d - 1.0).abs() < 1e-10));
        let quad = GridFunction::from_fn(&g, |r| r * r);
        let d = radial_derivative(&g, &quad).unwrap();
        for (r, d) in g.nodes().iter().zip(d.values()).skip(1).take(99) {
            assert!((d - 2.0 * r).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_integral_converges_at_first_order_or_better() {
        // ∫|∇e^{-r²/2}|² over R³ = (3/2) π^{3/2}
        let exact = 1.5 * PI.powf(1.5);
        let err = |n: usize| {
            let g = make_grid(3, 10.0, n).unwrap();
            let u = GridFunction::from_fn(&g, |r| (-r * r / 2.0).exp());
            (dirichlet_integral(&u) - exact).abs()
        };
        let (e1, e2) = (err(201), err(401));
        assert!(e2 < e1 && e1 < 0.05);
        // the centered-derivative route agrees with the form
        let g = make_grid(3, 10.0, 801).unwrap();
        let u = GridFunction::from_fn(&g, |r| (-r * r / 2.0).exp());
        let du = radial_derivative(&g, &u).unwrap();
        let via_derivative = integrate(&g, &du.map(|d| d * d)).unwrap();
        assert!((via_derivative - exact).abs() < 1e-3);
    }

    #[test]
    fn h_norm_of_gaussian_matches_quadrature_oracle() {
        // Oracle: composite Simpson on [0, 14] with 200000 intervals of
        // 4π r² (r² e^{-r²} + e^{-r²}), evaluated independently below.
        let oracle = {
            let n = 200_000;
            let b = 14.0;
            let h = b / n as f64;
            let f = |r: f64| 4.0 * PI * r * r * (r * r + 1.0) * (-r * r).exp();
            let mut s = f(0.0) + f(b);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        // closed form: (3/2 + 1) π^{3/2}
        assert!((oracle - 2.5 * PI.powf(1.5)).abs() < 1e-9);
        let g = make_grid(3, 12.0, 2401).unwrap();
        let v = GridFunction::constant(&g, 1.0);
        let u = GridFunction::from_fn(&g, |r| (-r * r / 2.0).exp());
        let norm = h_norm_sq(&g, 1.0, &v, &u).unwrap();
        assert!((norm - oracle).abs() / oracle < 1e-4);
        assert_eq!(h_norm_sq(&g, 1.0, &v, &GridFunction::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn h_norm_is_quadratic() {
        let g = make_grid(3, 5.0, 201).unwrap();
        let v = GridFunction::constant(&g, 1.0);
        let u = GridFunction::from_fn(&g, |r| (1.0 - r) * (-r).exp());
        let n1 = h_norm_sq(&g, 1.0, &v, &u).unwrap();
        let n2 = h_norm_sq(&g, 1.0, &v, &u.scaled(2.0)).unwrap();
        assert!((n2 - 4.0 * n1).abs() < 1e-12 * n2);
    }

    #[test]
    fn h_norm_rejects_nonpositive_potential() {
        let g = make_grid(3, 5.0, 101).unwrap();
        let v = GridFunction::from_fn(&g, |r| 1.0 - r);
        let u = GridFunction::constant(&g, 1.0);
        assert!(matches!(h_norm_sq(&g, 1.0, &v, &u), Err(Error::NonPositivePotential { .. })));
    }

    #[test]
    fn split_signs_examples() {
        let g = make_grid(3, 2.0, 201).unwrap();
        let neg = GridFunction::constant(&g, -1.0);
        let (p, m) = split_signs(&neg);
        assert!(p.is_zero());
        assert_eq!(m.values(), neg.values());

        let u = GridFunction::from_fn(&g, |r| 1.0 - r);
        let (p, m) = split_signs(&u);
        for ((&r, &a), &b) in g.nodes().iter().zip(p.values()).zip(m.values()) {
            if r < 1.0 - 1e-12 {
                assert!(a > 0.0 && b == 0.0);
            } else if r > 1.0 + 1e-12 {
                assert!(a == 0.0 && b < 0.0);
            }
        }
        let back = p.combine(1.0, &m, 1.0).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn nodal_domain_examples() {
        let g = make_grid(3, 4.0, 401).unwrap();
        assert_eq!(count_nodal_domains(&GridFunction::from_fn(&g, |r| (-r * r).exp()), 1e-8), 1);
        assert_eq!(
            count_nodal_domains(&GridFunction::from_fn(&g, |r| (1.0 - r) * (-r * r).exp()), 1e-8),
            2
        );
        let g3 = make_grid(3, 3.0, 301).unwrap();
        let sine = GridFunction::from_fn(&g3, |r| (PI * r).sin());
        // oracle: count sign changes of the sampled sine directly
        let mut runs = 0;
        let mut last = 0.0f64;
        for &v in sine.values() {
            if v.abs() > 1e-8 {
                if last == 0.0 || v.signum() != last.signum() {
                    runs += 1;
                }
                last = v;
            } else {
                last = 0.0;
            }
        }
        assert_eq!(runs, 3);
        assert_eq!(count_nodal_domains(&sine, 1e-8), 3);
    }

    #[test]
    fn tail_fraction_of_compact_bump_is_zero() {
        let g = make_grid(3, 10.0, 501).unwrap();
        let v = GridFunction::constant(&g, 1.0);
        let u = GridFunction::from_fn(&g, |r| if r < 3.0 { (3.0 - r).powi(2) } else { 0.0 });
        assert_eq!(tail_energy_fraction(1.0, &v, &u, 0.1), 0.0);
        let flat = GridFunction::from_fn(&g, |r| 10.0 - r);
        assert!(tail_energy_fraction(1.0, &v, &flat, 0.1) > 0.0);
    }
}
