//! Margin `m - 2c` as the Kirchhoff coefficient `b` shrinks, from a config text.
//!
//! `cargo run --release --example sweep_b`

use nehari_radial::app;
use nehari_radial::config::parse_config;
use nehari_radial::report::sweep_csv;

const CONFIG: &str = "
model = kirchhoff
grid.node_count = 1201
kirchhoff.a = 1
kirchhoff.q = 4
seeds.nodal = one-node, two-bump
";

fn main() -> nehari_radial::Result<()> {
    let cfg = parse_config(CONFIG)?;
    let values: Vec<String> = ["1", "0.1", "0.01"].iter().map(|s| s.to_string()).collect();
    let rows = app::sweep(&cfg, "kirchhoff.b", &values)?;
    print!("{}", sweep_csv(cfg.model, &rows));
    Ok(())
}
