//! Convergence tables as CSV.
//!
//! Errors are printed with three significant digits (`5.90e-02`). Rates are
//! computed from the printed errors, so a reader recomputing them from the
//! file gets the same numbers.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::eoc;
use crate::error::{Error, Result};
use crate::problems::ConvergenceReport;

pub const CSV_HEADER: &str = "mesh,newton_it,h1_error,rate_h1,l2_error,rate_l2";

/// `x` with a two-digit mantissa fraction and a signed two-digit exponent.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn mesh_label(n: usize, dim: usize) -> String {
    vec![n.to_string(); dim].join("x")
}

pub fn convergence_csv(report: &ConvergenceReport) -> Result<String> {
    if report.levels.is_empty() {
        return Err(Error::Contract("cannot write an empty convergence report".into()));
    }
    let printed = |e: f64| -> (String, f64) {
        let s = format_sci(e);
        let v = s.parse().unwrap_or(e);
        (s, v)
    };
    let hs: Vec<f64> = report.levels.iter().map(|l| l.h).collect();
    let (h1s, h1v): (Vec<String>, Vec<f64>) = report.levels.iter().map(|l| printed(l.h1_error)).unzip();
    let (l2s, l2v): (Vec<String>, Vec<f64>) = report.levels.iter().map(|l| printed(l.l2_error)).unzip();
    let rate_h1 = eoc(&h1v, &hs);
    let rate_l2 = eoc(&l2v, &hs);
    let rate = |r: &[f64], i: usize| {
        if i == 0 {
            "-".to_string()
        } else {
            format!("{}", r[i - 1])
        }
    };

    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for (i, level) in report.levels.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            mesh_label(level.n, report.dim),
            level.newton_iters,
            h1s[i],
            rate(&rate_h1, i),
            l2s[i],
            rate(&rate_l2, i)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn write_convergence_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let text = convergence_csv(report)?;
    std::fs::write(path, text).map_err(|e| Error::Io(e).context(format!("writing {}", path.display())))
}
