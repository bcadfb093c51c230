//! Choquard energy
//! `Ψ(u) = ½∫(|∇u|² + V u²) − (1/2p)∫(I_α * |u|^p)|u|^p`
//! with the Riesz potential `I_α(x) = c_{N,α} |x|^{α−N}` reduced to radial form for N = 3.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{self, dirichlet_form, dirichlet_integral, neumaier_sum, split_dirichlet_integral, split_dirichlet_pairing, split_stiffness_apply, GridFunction, RadialGrid};
use crate::kirchhoff::{sign_parts, IdentityResiduals};

#[derive(Debug, Clone)]
pub struct ChoquardParams {
    pub alpha: f64,
    pub p: f64,
    pub potential: GridFunction,
}

/// Upper end `(N+α)/(N−2)` of the admissible `p` range (infinite for N ≤ 2).
pub fn p_upper(dimension: usize, alpha: f64) -> f64 {
    if dimension <= 2 {
        f64::INFINITY
    } else {
        let n = dimension as f64;
        (n + alpha) / (n - 2.0)
    }
}

impl ChoquardParams {
    pub fn new(alpha: f64, p: f64, potential: GridFunction) -> Result<Self> {
        let n = potential.grid().dimension();
        let lo = (n as f64 - 4.0).max(0.0);
        if !(alpha > lo && alpha < n as f64) {
            return Err(Error::InvalidParameter {
                name: "choquard.alpha".into(),
                reason: format!("need alpha in ((N-4)+, N) = ({lo}, {n}), got {alpha}"),
            });
        }
        let hi = p_upper(n, alpha);
        if !(p >= 2.0 && p < hi) {
            return Err(Error::InvalidParameter {
                name: "choquard.p".into(),
                reason: format!("need 2 <= p < (N+alpha)/(N-2) = {hi}, got {p}"),
            });
        }
        grid::check_potential(&potential)?;
        Ok(Self { alpha, p, potential })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.potential.grid()
    }

    /// `‖u‖² = ∫(|∇u|² + V u²)`.
    pub fn norm_sq(&self, u: &GridFunction) -> f64 {
        split_dirichlet_integral(u) + grid::potential_term(&self.potential, u)
    }

    pub fn density(&self, u: &GridFunction) -> GridFunction {
        let p = self.p;
        u.map(|v| v.abs().powf(p))
    }
}

/// `c_{N,α} = Γ((N−α)/2) / (Γ(α/2) π^{N/2} 2^α)`.
pub fn riesz_constant(dimension: usize, alpha: f64) -> f64 {
    let n = dimension as f64;
    gamma((n - alpha) / 2.0) / (gamma(alpha / 2.0) * std::f64::consts::PI.powf(n / 2.0) * 2f64.powf(alpha))
}

/// Spherical average of `I_α(|x − y|)` over `|y| = s` at `|x| = r`, for N = 3:
/// `c [(r+s)^{α−1} − |r−s|^{α−1}] / (2rs(α−1))`, logarithmic at α = 1.
pub fn angular_kernel(alpha: f64, r: f64, s: f64) -> f64 {
    let c = riesz_constant(3, alpha);
    let big = r.max(s);
    let small = r.min(s);
    if big == 0.0 {
        return f64::INFINITY;
    }
    if small == 0.0 {
        return c * big.powf(alpha - 3.0);
    }
    let x = small / big;
    if x >= 1.0 && alpha <= 1.0 {
        return f64::INFINITY;
    }
    // (1+x)^β − (1−x)^β = (1−x)^β · expm1(2β atanh x), β = α − 1.
    let beta = alpha - 1.0;
    let z = 2.0 * x.atanh();
    let bracket_over_beta = if x >= 1.0 {
        2f64.powf(beta) / beta
    } else if beta.abs() < 1e-12 {
        z
    } else {
        (1.0 - x).powf(beta) * (beta * z).exp_m1() / beta
    };
    c * big.powf(alpha - 3.0) * bracket_over_beta / (2.0 * x)
}

/// Exact `∫_{lo}^{hi} K(r,s) 4π s² ds` for a cell containing the (singular) diagonal `s = r`.
fn diagonal_cell_integral(alpha: f64, r: f64, lo: f64, hi: f64) -> f64 {
    let c = riesz_constant(3, alpha);
    let four_pi = 4.0 * std::f64::consts::PI;
    let (d1, d2) = (lo - r, hi - r);
    if (alpha - 1.0).abs() < 1e-12 {
        // ∫ s ln(r+s) ds and ∫ s ln|s−r| ds
        let plus = |x: f64| x * x / 2.0 * x.ln() - x * x / 4.0 - r * (x * x.ln() - x);
        let with_zero = |d: f64| {
            if d == 0.0 {
                0.0
            } else {
                r * (d * d.abs().ln() - d) + (d * d / 2.0 * d.abs().ln() - d * d / 4.0)
            }
        };
        let a = plus(r + hi) - plus(r + lo);
        let b = with_zero(d2) - with_zero(d1);
        return c * four_pi * (a - b) / (2.0 * r);
    }
    let beta = alpha - 1.0;
    let plus = |x: f64| x.powf(beta + 2.0) / (beta + 2.0) - r * x.powf(beta + 1.0) / (beta + 1.0);
    let a = plus(r + hi) - plus(r + lo);
    // ∫_{d1}^{d2} (r + d)|d|^β dd with d1 ≤ 0 ≤ d2
    let abs_pow = (d1.abs().powf(beta + 1.0) + d2.powf(beta + 1.0)) / (beta + 1.0);
    let odd = (d2.powf(beta + 2.0) - d1.abs().powf(beta + 2.0)) / (beta + 2.0);
    let b = r * abs_pow + odd;
    c * four_pi * (a - b) / (2.0 * r * beta)
}

/// Dense radial Riesz operator: `(I_α * g)(r_i) = Σ_j W_ij g_j`.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    grid: Arc<RadialGrid>,
    alpha: f64,
    weighted: Vec<f64>,
}

impl RieszKernel {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    /// Fully weighted entry `W_ij`.
    pub fn weighted_entry(&self, i: usize, j: usize) -> f64 {
        self.weighted[i * self.size() + j]
    }

    /// The symmetric unweighted kernel `K(r, s)`.
    pub fn kernel(&self, r: f64, s: f64) -> f64 {
        angular_kernel(self.alpha, r, s)
    }

    pub fn apply_values(&self, g: &[f64]) -> Vec<f64> {
        let n = self.size();
        self.weighted
            .par_chunks(n)
            .map(|row| neumaier_sum(row.iter().zip(g).map(|(k, v)| k * v)))
            .collect()
    }

    /// `∫(I_α * f) g`.
    pub fn interaction(&self, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        f.ensure_on(&self.grid)?;
        g.ensure_on(&self.grid)?;
        let pot = self.apply_values(f.values());
        Ok(self.grid.integrate_values(&pot.iter().zip(g.values()).map(|(a, b)| a * b).collect::<Vec<_>>()))
    }

    const MAGIC: &'static [u8; 8] = b"RIESZK\0\0";
    const VERSION: u32 = 1;

    /// Binary dump: magic, version, N, α, node count, r_max, grid fingerprint, then `W` row-major (LE f64).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(Self::MAGIC)?;
        w.write_all(&Self::VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.dimension() as u32).to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&self.grid.r_max().to_le_bytes())?;
        w.write_all(&self.grid.fingerprint().to_le_bytes())?;
        for v in &self.weighted {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Load a dump written for exactly this grid and α.
    pub fn load(path: &Path, grid: &Arc<RadialGrid>, alpha: f64) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::KernelCache("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != Self::VERSION {
            return Err(Error::KernelCache(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let a = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let r_max = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let hash = u64::from_le_bytes(b8);
        if dim != grid.dimension()
            || a.to_bits() != alpha.to_bits()
            || n != grid.len()
            || r_max.to_bits() != grid.r_max().to_bits()
            || hash != grid.fingerprint()
        {
            return Err(Error::KernelCache("header does not match grid/alpha".into()));
        }
        let mut bytes = vec![0u8; n * n * 8];
        r.read_exact(&mut bytes)?;
        let weighted = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            grid: Arc::clone(grid),
            alpha,
            weighted,
        })
    }

    /// Load from `path` when it matches, otherwise build and write it.
    pub fn load_or_build(path: &Path, params: &ChoquardParams) -> Result<Self> {
        match Self::load(path, params.grid(), params.alpha) {
            Ok(k) => Ok(k),
            Err(_) => {
                let k = build_kernel(params, params.grid())?;
                k.save(path)?;
                Ok(k)
            }
        }
    }
}

pub fn build_kernel(params: &ChoquardParams, grid: &Arc<RadialGrid>) -> Result<RieszKernel> {
    if grid.dimension() != 3 {
        return Err(Error::UnsupportedDimension(grid.dimension()));
    }
    let alpha = params.alpha;
    let n = grid.len();
    let nodes = grid.nodes();
    let w = grid.weights();
    let h = grid.step();
    let singular = alpha <= 1.0;
    let mut weighted = vec![0.0; n * n];
    weighted.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let r = nodes[i];
        for j in 0..n {
            row[j] = if i == 0 && j == 0 {
                // K(0, s) = c s^{α−3}: integrate over the half cell [0, h/2].
                4.0 * std::f64::consts::PI * riesz_constant(3, alpha) * (0.5 * h).powf(alpha) / alpha
            } else if i == j && singular {
                let lo = (r - 0.5 * h).max(0.0);
                let hi = (r + 0.5 * h).min(grid.r_max());
                diagonal_cell_integral(alpha, r, lo, hi)
            } else {
                angular_kernel(alpha, r, nodes[j]) * w[j]
            };
        }
    });
    Ok(RieszKernel {
        grid: Arc::clone(grid),
        alpha,
        weighted,
    })
}

pub fn riesz_apply(kernel: &RieszKernel, g: &GridFunction) -> Result<GridFunction> {
    g.ensure_on(&kernel.grid)?;
    GridFunction::new(Arc::clone(g.grid()), kernel.apply_values(g.values()))
}

fn check(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<()> {
    u.ensure_on(params.grid())?;
    if **kernel.grid() != **params.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `∫(I_α * |u|^p)|u|^p`.
pub fn self_interaction(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<f64> {
    let rho = params.density(u);
    kernel.interaction(&rho, &rho)
}

pub fn energy_psi(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<f64> {
    check(params, kernel, u)?;
    let d = self_interaction(params, kernel, u)?;
    Ok(0.5 * params.norm_sq(u) - d / (2.0 * params.p))
}

fn energy_psi_monolithic(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<f64> {
    let quad = dirichlet_integral(u) + grid::potential_term(&params.potential, u);
    Ok(0.5 * quad - self_interaction(params, kernel, u)? / (2.0 * params.p))
}

/// `(I_α * |u|^p)|u|^{p−2}u` at each node.
fn nonlocal_forcing(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Vec<f64> {
    let rho = params.density(u);
    let pot = kernel.apply_values(rho.values());
    let p = params.p;
    u.values()
        .iter()
        .zip(&pot)
        .map(|(&x, &phi)| if x == 0.0 { 0.0 } else { phi * x.abs().powf(p - 2.0) * x })
        .collect()
}

pub fn energy_gradient_nodal(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<Vec<f64>> {
    check(params, kernel, u)?;
    let y = split_stiffness_apply(u);
    let force = nonlocal_forcing(params, kernel, u);
    let w = u.grid().weights();
    let v = params.potential.values();
    Ok(u.values()
        .iter()
        .enumerate()
        .map(|(i, &x)| y[i] + w[i] * (v[i] * x - force[i]))
        .collect())
}

/// `L²` representative `g = −Δ_r u + V u − (I_α * |u|^p)|u|^{p−2}u`.
pub fn gradient_psi(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<GridFunction> {
    let nodal = energy_gradient_nodal(params, kernel, u)?;
    let rep = crate::kirchhoff::representative_from_nodal(u, &nodal);
    GridFunction::new(Arc::clone(u.grid()), rep)
}

/// `⟨Ψ′(u), φ⟩ = ∫(∇u∇φ + Vuφ) − ∫(I_α*|u|^p)|u|^{p−2}uφ`.
pub fn pairing_psi(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    check(params, kernel, u)?;
    phi.ensure_on(params.grid())?;
    let grad_pair = split_dirichlet_pairing(u, phi)?;
    let force = nonlocal_forcing(params, kernel, u);
    let w = u.grid().weights();
    let local = neumaier_sum(
        w.iter()
            .zip(params.potential.values())
            .zip(u.values().iter().zip(phi.values()))
            .zip(&force)
            .map(|(((w, v), (&x, &p)), f)| w * (v * x - f) * p),
    );
    Ok(grad_pair + local)
}

fn pairing_psi_monolithic(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
    let grad_pair = dirichlet_form(u, phi)?;
    let force = nonlocal_forcing(params, kernel, u);
    let w = u.grid().weights();
    let local = neumaier_sum(
        w.iter()
            .zip(params.potential.values())
            .zip(u.values().iter().zip(phi.values()))
            .zip(&force)
            .map(|(((w, v), (&x, &p)), f)| w * (v * x - f) * p),
    );
    Ok(grad_pair + local)
}

/// `A_i = ‖u^±‖²`, `B_1`, `B_2` self-interactions of the parts, `B` their cross interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionChoquard {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
    /// `∫(I_α*|u⁺|^p)|u⁻|^p`, equal to `b` up to rounding by kernel symmetry.
    pub b_mirror: f64,
    pub identities: IdentityResiduals,
}

pub fn decomposition_c(params: &ChoquardParams, kernel: &RieszKernel, u: &GridFunction) -> Result<DecompositionChoquard> {
    check(params, kernel, u)?;
    let (plus, minus) = sign_parts(u)?;
    let rp = params.density(&plus);
    let rm = params.density(&minus);
    let b1 = kernel.interaction(&rp, &rp)?;
    let b2 = kernel.interaction(&rm, &rm)?;
    let b = kernel.interaction(&rm, &rp)?;
    let b_mirror = kernel.interaction(&rp, &rm)?;
    let a1 = params.norm_sq(&plus);
    let a2 = params.norm_sq(&minus);

    let lhs_energy = energy_psi_monolithic(params, kernel, u)?;
    let rhs_energy = energy_psi(params, kernel, &plus)? + energy_psi(params, kernel, &minus)? - b_mirror / params.p;
    let lhs_plus = pairing_psi_monolithic(params, kernel, u, &plus)?;
    let rhs_plus = pairing_psi_monolithic(params, kernel, &plus, &plus)? - b;
    let lhs_minus = pairing_psi_monolithic(params, kernel, u, &minus)?;
    let rhs_minus = pairing_psi_monolithic(params, kernel, &minus, &minus)? - b_mirror;

    let scale = params.norm_sq(u);
    let rel = |l: f64, r: f64| (l - r).abs() / l.abs().max(r.abs()).max(scale);
    Ok(DecompositionChoquard {
        a1,
        a2,
        b1,
        b2,
        b,
        b_mirror,
        identities: IdentityResiduals {
            energy: rel(lhs_energy, rhs_energy),
            plus: rel(lhs_plus, rhs_plus),
            minus: rel(lhs_minus, rhs_minus),
        },
    })
}

/// Both sides of `(∫(I_α*f)g)² ≤ ∫(I_α*f)f · ∫(I_α*g)g`.
pub fn hls_pair_check(kernel: &RieszKernel, f: &GridFunction, g: &GridFunction) -> Result<(f64, f64)> {
    let fg = kernel.interaction(f, g)?;
    let ff = kernel.interaction(f, f)?;
    let gg = kernel.interaction(g, g)?;
    Ok((fg * fg, ff * gg))
}
