//! Growth conditions of the power nonlinearity `f(s) = |s|^{q-2}s`.
//!
//! `cargo run --example nonlinearity`

use nehari_radial::nonlinearity::{log_samples, validate_conditions, Nonlinearity};

fn main() {
    let samples = log_samples(-10, 10);
    for q in [4.0, 5.5, 3.0] {
        let nl = Nonlinearity::power_unchecked(q);
        let report = validate_conditions(&nl, &samples);
        println!("q = {q}: all conditions hold = {}", report.all_ok());
        for c in &report.checks {
            println!("    {:<40} {:?}  worst margin {:.3e}", c.name, c.status, c.worst_margin);
        }
    }

    // the checked constructor refuses exponents outside (3, 2* - 1)
    for q in [4.0, 2.0, 6.0] {
        match Nonlinearity::power(q, 3) {
            Ok(_) => println!("power({q}, N=3): accepted"),
            Err(e) => println!("power({q}, N=3): {e}"),
        }
    }
}
