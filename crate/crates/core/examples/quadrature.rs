//! Radial quadrature and the Dirichlet form on the default grid.
//!
//! `cargo run --example quadrature`

use std::f64::consts::PI;

use nehari_radial::grid::{dirichlet_integral, h_norm_sq, integrate, make_grid, GridFunction};

fn main() -> nehari_radial::Result<()> {
    let grid = make_grid(3, 12.0, 1201)?;

    let gauss = GridFunction::from_fn(&grid, |r| (-r * r).exp());
    let quad = integrate(&grid, &gauss)?;
    println!("∫ exp(-|x|²) dx = {quad:.12}  (π^1.5 = {:.12})", PI.powf(1.5));

    let unit = make_grid(3, 1.0, 2001)?;
    println!("|B_1| = {:.12}  (4π/3 = {:.12})", unit.ball_volume(), 4.0 * PI / 3.0);

    // u = exp(-r²/2): ∫|∇u|² = (3/2)π^1.5 and ∫u² = π^1.5
    let u = GridFunction::from_fn(&grid, |r| (-r * r / 2.0).exp());
    let one = GridFunction::constant(&grid, 1.0);
    println!("∫|∇u|²  = {:.8}  (exact {:.8})", dirichlet_integral(&u), 1.5 * PI.powf(1.5));
    println!("‖u‖²_H  = {:.8}  (exact {:.8})", h_norm_sq(&grid, 1.0, &one, &u)?, 2.5 * PI.powf(1.5));
    Ok(())
}
