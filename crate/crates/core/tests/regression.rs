//! Self-baselined levels at the defaults, frozen from a reference run.
//! A change beyond the tolerance means the discretization or the solver moved.

use nehari_radial::app::{self, Problem};
use nehari_radial::config::RunConfig;
use nehari_radial::solver::ModelKind;

const REL: f64 = 1e-8;

fn close(got: f64, want: f64) -> bool {
    (got / want - 1.0).abs() <= REL
}

#[test]
fn kirchhoff_levels_at_defaults() {
    let cfg = RunConfig::default();
    let problem = Problem::build(&cfg).unwrap();
    let c = app::solve_ground(&cfg, &problem).unwrap().energy;
    let m = app::solve_nodal(&cfg, &problem).unwrap().best.energy;
    assert!(close(c, 4.94719538520e5), "c = {c:.11e}");
    assert!(close(m, 4.25284416334e9), "m = {m:.11e}");
}

#[test]
fn choquard_levels_at_defaults() {
    let cfg = RunConfig { model: ModelKind::Choquard, ..RunConfig::default() };
    let problem = Problem::build(&cfg).unwrap();
    let c_bar = app::solve_ground(&cfg, &problem).unwrap().energy;
    let m_bar = app::solve_nodal(&cfg, &problem).unwrap().best.energy;
    assert!(close(c_bar, 1.46830948713e1), "c_bar = {c_bar:.11e}");
    assert!(close(m_bar, 3.71399236104e1), "m_bar = {m_bar:.11e}");
}
