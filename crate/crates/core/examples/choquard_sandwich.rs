//! Choquard levels `c̄` and `m̄` at α = 2, p = 2, and both sides of `c̄ < m̄ < 2c̄`.
//!
//! Radial nodal states sit above `2c̄`: pushing `m̄` below `2c̄` needs two
//! bumps drifting apart, which a radial profile cannot do.
//!
//! `cargo run --release --example choquard_sandwich`

use nehari_radial::app::{self, Problem};
use nehari_radial::config::RunConfig;
use nehari_radial::solver::{verify_theorems, ModelKind, TheoremCheck};

fn main() -> nehari_radial::Result<()> {
    let cfg = RunConfig { model: ModelKind::Choquard, ..RunConfig::default() };
    let problem = Problem::build(&cfg)?;
    let ground = app::solve_ground(&cfg, &problem)?;
    let nodal = app::solve_nodal(&cfg, &problem)?;
    for (seed, run) in &nodal.runs {
        match run {
            Ok(r) => println!("{seed}: level {:.8}, converged {}", r.energy, r.converged),
            Err(e) => println!("{seed}: {e}"),
        }
    }
    if let TheoremCheck::Choquard { c_bar, m_bar, lower_margin, upper_margin, cross, .. } =
        verify_theorems(&problem.model(), &ground, &nodal.best, &cfg.projection())?
    {
        println!("c_bar = {c_bar:.8}, m_bar = {m_bar:.8}");
        println!("m_bar - c_bar  = {lower_margin:+.6}");
        println!("2c_bar - m_bar = {upper_margin:+.6}");
        println!("B² = {:.4e} < B1·B2 = {:.4e}", cross.0, cross.1);
    }
    Ok(())
}
