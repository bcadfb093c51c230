//! Ground level `c`, least nodal level `m` and the margin `m - 2c` for the
//! default Kirchhoff problem (N = 3, a = b = 1, V = 1, q = 4).
//!
//! `cargo run --release --example kirchhoff_levels`

use nehari_radial::app::{self, Problem};
use nehari_radial::config::RunConfig;
use nehari_radial::solver::{verify_theorems, TheoremCheck};

fn main() -> nehari_radial::Result<()> {
    let cfg = RunConfig::default();
    let problem = Problem::build(&cfg)?;

    let ground = app::solve_ground(&cfg, &problem)?;
    println!("ground: c = {:.10e} after {} iterations, gradient {:.2e}", ground.energy, ground.iterations, ground.grad_norm_final);

    let nodal = app::solve_nodal(&cfg, &problem)?;
    for (seed, run) in &nodal.runs {
        match run {
            Ok(r) => println!(
                "{seed}: level {:.10e}, {} nodal domains, {} Newton steps, gradient {:.2e}",
                r.energy, r.nodal_domains, r.newton_steps, r.grad_norm_final
            ),
            Err(e) => println!("{seed}: {e}"),
        }
    }

    if let TheoremCheck::Kirchhoff { c, m, margin, step2, .. } = verify_theorems(&problem.model(), &ground, &nodal.best, &cfg.projection())? {
        println!("m / c = {:.1}, m - 2c = {margin:.6e}", m / c);
        println!("parts projected onto N: k = {:.6}, l = {:.6}", step2.k, step2.l);
        println!("I(k u+) + I(l u-) - 2c = {:.6e}", step2.split_energy - 2.0 * c);
    }
    Ok(())
}
