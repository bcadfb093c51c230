//! Text report and CSV emission. Numbers use 12 significant digits (`{:.11e}`)
//! so that regression baselines can be compared textually.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::app::{level_tag, SweepRow};
use crate::error::Result;
use crate::grid::split_signs;
use crate::solver::{SolveReport, TheoremCheck};
use crate::suites::CheckLine;

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// `r,u,u_plus,u_minus` for every node.
pub fn profile_csv(report: &SolveReport) -> String {
    let (plus, minus) = split_signs(&report.state);
    let mut s = String::from("r,u,u_plus,u_minus\n");
    for (i, r) in report.state.grid().nodes().iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            num(*r),
            num(report.state.values()[i]),
            num(plus.values()[i]),
            num(minus.values()[i])
        );
    }
    s
}

pub fn profile_file_name(report: &SolveReport) -> String {
    format!("profile_{}_{}.csv", report.model, level_tag(report))
}

fn render_solve(s: &mut String, r: &SolveReport) {
    let _ = writeln!(s, "[{} {} from {} seed]", r.model, r.level, r.seed_kind);
    let _ = writeln!(s, "  energy                = {}", num(r.energy));
    let _ = writeln!(s, "  converged             = {}", r.converged);
    let _ = writeln!(s, "  grad_norm_final       = {:.3e}", r.grad_norm_final);
    let _ = writeln!(s, "  iterations            = {}", r.iterations);
    let _ = writeln!(s, "  newton_steps          = {}", r.newton_steps);
    let _ = writeln!(s, "  nodal_domains         = {}", r.nodal_domains);
    let _ = writeln!(s, "  max_abs               = {}", num(r.state.max_abs()));
    let _ = writeln!(s, "  tail_energy_fraction  = {:.3e}", r.tail_energy_fraction);
    let _ = writeln!(s, "  membership_residuals  = ({:.3e}, {:.3e})", r.residuals.0, r.residuals.1);
}

fn render_theorem(s: &mut String, t: &TheoremCheck) {
    match t {
        TheoremCheck::Kirchhoff { c, m, margin, step2, pass } => {
            let _ = writeln!(s, "[theorem kirchhoff]");
            let _ = writeln!(s, "  c       = {}", num(*c));
            let _ = writeln!(s, "  m       = {}", num(*m));
            let _ = writeln!(s, "  m - 2c  = {}", num(*margin));
            let _ = writeln!(s, "  k, l    = {}, {}", num(step2.k), num(step2.l));
            let _ = writeln!(s, "  I(ku+) + I(lu-) = {}", num(step2.split_energy));
            let _ = writeln!(s, "  pass    = {pass}");
        }
        TheoremCheck::Choquard { c_bar, m_bar, lower_margin, upper_margin, cross, pass } => {
            let _ = writeln!(s, "[theorem choquard]");
            let _ = writeln!(s, "  c_bar          = {}", num(*c_bar));
            let _ = writeln!(s, "  m_bar          = {}", num(*m_bar));
            let _ = writeln!(s, "  m_bar - c_bar  = {}", num(*lower_margin));
            let _ = writeln!(s, "  2c_bar - m_bar = {}", num(*upper_margin));
            let _ = writeln!(s, "  B^2, B1 B2     = {}, {}", num(cross.0), num(cross.1));
            let _ = writeln!(s, "  pass           = {pass}");
        }
    }
}

pub fn render_checks(lines: &[&CheckLine]) -> String {
    let width = lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for l in lines {
        let _ = writeln!(s, "{}  {:width$}  {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    s
}

pub fn render_report(reports: &[&SolveReport], theorem: Option<&TheoremCheck>, checks: &[&CheckLine]) -> String {
    let mut s = String::new();
    if reports.is_empty() {
        s.push_str("no solves requested\n");
    }
    for r in reports {
        render_solve(&mut s, r);
        s.push('\n');
    }
    if let Some(t) = theorem {
        render_theorem(&mut s, t);
        s.push('\n');
    }
    if !checks.is_empty() {
        s.push_str("[checks]\n");
        s.push_str(&render_checks(checks));
    }
    s
}

/// Write `report.txt` and, when `csv` is set, one profile per report. Returns the written paths.
pub fn emit_reports(
    out_dir: &Path,
    reports: &[&SolveReport],
    theorem: Option<&TheoremCheck>,
    checks: &[&CheckLine],
    csv: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let path = out_dir.join("report.txt");
    fs::write(&path, render_report(reports, theorem, checks))?;
    written.push(path);
    if csv {
        for r in reports {
            let path = out_dir.join(profile_file_name(r));
            fs::write(&path, profile_csv(r))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Fixed header per model; failed points keep their row with `nan` entries.
pub fn sweep_csv(model: crate::solver::ModelKind, rows: &[SweepRow]) -> String {
    let mut s = String::from(match model {
        crate::solver::ModelKind::Kirchhoff => "param,c,m,margin_kirchhoff\n",
        crate::solver::ModelKind::Choquard => "param,c_bar,m_bar,lower_margin,upper_margin\n",
    });
    for row in rows {
        let cells: Vec<String> = match (&row.outcome, model) {
            (Ok(TheoremCheck::Kirchhoff { c, m, margin, .. }), _) => vec![num(*c), num(*m), num(*margin)],
            (Ok(TheoremCheck::Choquard { c_bar, m_bar, lower_margin, upper_margin, .. }), _) => {
                vec![num(*c_bar), num(*m_bar), num(*lower_margin), num(*upper_margin)]
            }
            (Err(_), crate::solver::ModelKind::Kirchhoff) => vec!["nan".into(); 3],
            (Err(_), crate::solver::ModelKind::Choquard) => vec!["nan".into(); 4],
        };
        let _ = writeln!(s, "{},{}", row.value, cells.join(","));
    }
    s
}

pub fn write_sweep(out_dir: &Path, model: crate::solver::ModelKind, rows: &[SweepRow]) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("sweep.csv");
    fs::write(&path, sweep_csv(model, rows))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ModelKind;

    #[test]
    fn empty_report() {
        assert_eq!(render_report(&[], None, &[]), "no solves requested\n");
    }

    #[test]
    fn sweep_header_and_rows() {
        let rows: Vec<SweepRow> = ["0.01", "0.1", "1"]
            .iter()
            .map(|v| SweepRow { value: v.to_string(), outcome: Err("skipped".into()) })
            .collect();
        let csv = sweep_csv(ModelKind::Kirchhoff, &rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "param,c,m,margin_kirchhoff");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0.01,nan,nan,nan");
        assert!(sweep_csv(ModelKind::Choquard, &[]).starts_with("param,c_bar,m_bar,lower_margin,upper_margin\n"));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(num(-4.2516e9), "-4.25160000000e9");
    }
}
