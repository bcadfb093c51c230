//! Double-double Newton polishing of a Kirchhoff nodal state.
//!
//! The descent stalls where `f64` rounding of the nodal values already moves the
//! free gradient by more than the tolerance; the polish carries the state as
//! `hi + lo` and drives the gradient far below it.
//!
//! `cargo run --release --example newton_polish`

use nehari_radial::app::Problem;
use nehari_radial::config::RunConfig;
use nehari_radial::dd::Dd;
use nehari_radial::refine::{gradient_norm_dd, refine_kirchhoff};
use nehari_radial::solver::{make_seed, minimize_nodal, Model, SeedKind, SolveOptions};

fn main() -> nehari_radial::Result<()> {
    let x = Dd::from(0.1).mul_f64(3.0) - Dd::from(0.3);
    println!("3·fl(0.1) - fl(0.3) in double-double = {:e} (2^-55 = {:e})", x.to_f64(), 2f64.powi(-55));

    let cfg = RunConfig::default();
    let problem = Problem::build(&cfg)?;
    let Model::Kirchhoff(params) = problem.model() else { unreachable!() };
    let seed = make_seed(SeedKind::OneNode, problem.grid(), &cfg.seed_spec)?;

    // a loose tolerance stops the descent early, before any polishing
    let opts = SolveOptions { grad_tol: 1e-3, ..cfg.solver };
    let rough = minimize_nodal(&problem.model(), &seed, SeedKind::OneNode, &opts)?;
    let zeros = vec![0.0; rough.state.len()];
    println!("descent: gradient {:.3e} (double-double {:.3e}) after {} iterations", rough.grad_norm_final, gradient_norm_dd(params, &rough.state, &zeros)?, rough.iterations);

    let polished = refine_kirchhoff(params, &rough.state, 1e-12, 30)?;
    println!("polished: gradient {:.3e} after {} Newton steps", polished.grad_norm, polished.newton_steps);
    let max_lo = polished.correction.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("largest low-order part {max_lo:.3e} against max |u| = {:.3e}", polished.state.max_abs());
    Ok(())
}
