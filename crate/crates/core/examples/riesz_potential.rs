//! Newtonian potential (α = 2) of the unit-ball indicator against `1/2` at the
//! origin and `1/(3r)` outside, plus a kernel cache round trip.
//!
//! `cargo run --release --example riesz_potential`

use nehari_radial::choquard::{angular_kernel, build_kernel, riesz_apply, ChoquardParams, RieszKernel};
use nehari_radial::grid::{make_grid, GridFunction};

fn main() -> nehari_radial::Result<()> {
    let grid = make_grid(3, 12.0, 1201)?;
    let params = ChoquardParams::new(2.0, 2.0, GridFunction::constant(&grid, 1.0))?;
    let kernel = build_kernel(&params, &grid)?;

    let ball = GridFunction::from_fn(&grid, |r| if r < 1.0 { 1.0 } else if r == 1.0 { 0.5 } else { 0.0 });
    let pot = riesz_apply(&kernel, &ball)?;
    println!("{:>6} {:>14} {:>14}", "r", "I_2 * 1_B", "exact");
    for i in [0, 50, 100, 150, 300, 600, 1200] {
        let r = grid.nodes()[i];
        let exact = if r < 1.0 { 0.5 - r * r / 6.0 } else { 1.0 / (3.0 * r) };
        println!("{r:>6.2} {:>14.8} {exact:>14.8}", pot.values()[i]);
    }

    println!("K(0.3, 2) = {:.12}  vs 1/(8π) = {:.12}", angular_kernel(2.0, 0.3, 2.0), 1.0 / (8.0 * std::f64::consts::PI));

    let dir = std::env::temp_dir().join("nehari_kernel_example.bin");
    kernel.save(&dir)?;
    let again = RieszKernel::load(&dir, &grid, 2.0)?;
    println!("cached kernel reloads identically: {}", again.weighted_entry(7, 400) == kernel.weighted_entry(7, 400));
    std::fs::remove_file(&dir)?;
    Ok(())
}
