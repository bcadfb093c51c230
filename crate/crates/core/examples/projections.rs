//! Scalar and pair projections onto the Kirchhoff constraint sets.
//!
//! `cargo run --example projections`

use nehari_radial::app::Problem;
use nehari_radial::config::RunConfig;
use nehari_radial::grid::GridFunction;
use nehari_radial::nehari::{classify_projection_region, ProjectionOptions};

fn main() -> nehari_radial::Result<()> {
    let cfg = RunConfig::default();
    let problem = Problem::build(&cfg)?;
    let model = problem.model();
    let opts = ProjectionOptions::default();

    let bump = GridFunction::from_fn(model.grid(), |r| (-r * r).exp()).with_dirichlet();
    let t = model.project_scalar(&bump, &opts)?;
    println!("scalar projection of exp(-r²): t = {t:.10}, energy on N = {:.6e}", model.energy(&bump.scaled(t))?);

    let u = GridFunction::from_fn(model.grid(), |r| (-r * r).exp() - 0.5 * (-(r - 3.0).powi(2)).exp()).with_dirichlet();
    let pair = model.project_pair(&u, &opts)?;
    println!("pair projection: (t, s) = ({:.10}, {:.10}), residual {:.2e}", pair.t, pair.s, pair.max_residual());
    for start in [1e-3, 1e3] {
        let other = model.project_pair(&u, &opts.with_start(start))?;
        println!("    from start {start:e}: ({:.10}, {:.10})", other.t, other.s);
    }

    let member = pair.apply(&u);
    for lambda in [0.5, 2.0] {
        let v = member.scaled(lambda);
        let p = model.project_pair(&v, &opts)?;
        let region = classify_projection_region(model.relative_residuals(&v)?, &p, 1e-9);
        println!("λ = {lambda}: (t, s) = ({:.6}, {:.6}), {:?}, violation {}", p.t, p.s, region.region, region.violation);
    }
    Ok(())
}
