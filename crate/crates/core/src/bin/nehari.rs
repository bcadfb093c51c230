//! `nehari`: solve, verify and sweep from a flat key = value config.
//!
//! Exit codes: 0 all requested checks pass, 1 bad config or usage,
//! 2 a solve did not converge, 3 a check failed, 4 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nehari_radial::app::{self, Problem};
use nehari_radial::config::{load_config, RunConfig};
use nehari_radial::report;
use nehari_radial::solver::{ModelKind, SolveReport};
use nehari_radial::suites::CheckLine;
use nehari_radial::Error;

#[derive(Parser)]
#[command(name = "nehari", version, about = "Ground and nodal levels of radial Kirchhoff and Choquard problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file of `section.key = value` lines; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `model` from the config.
    #[arg(long)]
    model: Option<ModelKind>,
    /// Override `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override `suite.seed` for the randomized property suites.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize over the Nehari manifold.
    SolveGround(Common),
    /// Minimize over the sign-changing Nehari set from every configured seed.
    SolveNodal(Common),
    /// Property suites, ground and nodal solves, and the theorem checks.
    Verify(Common),
    /// Repeat `verify`'s solves across values of one config key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config key to vary, e.g. `kirchhoff.b`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Grid, kernel and projection oracles plus small-grid property suites.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn config(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = c.model {
        cfg.model = m;
    }
    if let Some(out) = &c.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.suite_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidDimension(_) | Error::InvalidRadius(_) | Error::TooFewNodes { .. } | Error::UnsupportedDimension(_) | Error::UnknownSeed(_) => 1,
        Error::Unconverged(_) => 2,
        Error::Io(_) | Error::KernelCache(_) => 4,
        _ => 3,
    }
}

fn print_table(lines: &[&CheckLine]) {
    print!("{}", report::render_checks(lines));
}

fn unconverged(reports: &[&SolveReport]) -> bool {
    reports.iter().any(|r| !r.converged)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::SolveGround(c) => {
            let cfg = config(&c)?;
            let problem = Problem::build(&cfg)?;
            let r = app::solve_ground(&cfg, &problem)?;
            let files = report::emit_reports(&cfg.out_dir, &[&r], None, &[], cfg.csv)?;
            println!("{} ground level {:.11e} (converged {}, gradient {:.3e})", cfg.model, r.energy, r.converged, r.grad_norm_final);
            files.iter().for_each(|f| println!("wrote {}", f.display()));
            Ok(if r.converged { 0 } else { 2 })
        }
        Command::SolveNodal(c) => {
            let cfg = config(&c)?;
            let problem = Problem::build(&cfg)?;
            let search = app::solve_nodal(&cfg, &problem)?;
            let reports: Vec<&SolveReport> = search.runs.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
            let files = report::emit_reports(&cfg.out_dir, &reports, None, &[], cfg.csv)?;
            for (k, r) in &search.runs {
                match r {
                    Ok(r) => println!("{k}: level {:.11e} (converged {}, {} nodal domains)", r.energy, r.converged, r.nodal_domains),
                    Err(e) => println!("{k}: {e}"),
                }
            }
            println!("lowest converged nodal level {:.11e} from {} seed", search.best.energy, search.best.seed_kind);
            files.iter().for_each(|f| println!("wrote {}", f.display()));
            Ok(0)
        }
        Command::Verify(c) => {
            let cfg = config(&c)?;
            let outcome = app::verify(&cfg)?;
            let lines: Vec<&CheckLine> = outcome.lines().collect();
            let reports = outcome.reports();
            print_table(&lines);
            let files = report::emit_reports(&cfg.out_dir, &reports, outcome.theorem.as_ref(), &lines, cfg.csv)?;
            files.iter().for_each(|f| println!("wrote {}", f.display()));
            if outcome.ground.as_ref().is_some_and(|g| !g.converged) || (outcome.theorem.is_none() && unconverged(&reports)) {
                return Ok(2);
            }
            Ok(if outcome.all_pass() { 0 } else { 3 })
        }
        Command::Sweep { common, param, values } => {
            let cfg = config(&common)?;
            let rows = app::sweep(&cfg, &param, &values)?;
            let path = report::write_sweep(&cfg.out_dir, cfg.model, &rows)?;
            print!("{}", report::sweep_csv(cfg.model, &rows));
            println!("wrote {}", path.display());
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            let passing = rows.iter().all(|r| r.outcome.as_ref().is_ok_and(|t| t.pass()));
            Ok(if failed > 0 { 2 } else if passing { 0 } else { 3 })
        }
        Command::Selftest { seed } => {
            let lines = app::selftest(seed)?;
            print_table(&lines.iter().collect::<Vec<_>>());
            Ok(if lines.iter().all(|l| l.pass) { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
