use std::io::Write;

use crate::commands::{CommandResult, Report};
use crate::config::Format;
use crate::error::{CliError, Result};

pub const SWEEP_COLUMNS: [&str; 9] = ["T", "eta", "n0", "alpha", "beta", "p", "Q", "S_star", "diff"];
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Plain positional decimal with `digits` significant digits.
pub fn format_decimal(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), v);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .expect("exponent in scientific formatting");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_owned(),
        _ => s,
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io {
        path: "csv output".into(),
        source: std::io::Error::other(e),
    }
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)
                .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => render_csv(&report.result),
    }
}

fn render_csv(result: &CommandResult) -> Result<Vec<u8>> {
    let f = |v: f64| format_decimal(v, SIGNIFICANT_DIGITS);
    let mut w = csv::Writer::from_writer(Vec::new());
    match result {
        CommandResult::Sweep { rows } => {
            w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
            for r in rows {
                w.write_record([r.t, r.eta, r.n0, r.alpha, r.beta, r.p, r.q, r.s_star, r.diff].map(f))
                    .map_err(csv_error)?;
            }
        }
        CommandResult::Simulate { values, seed, .. } => {
            w.write_record(["replication", "seed", "estimate"]).map_err(csv_error)?;
            for (i, v) in values.iter().enumerate() {
                w.write_record([i.to_string(), seed.to_string(), f(*v)])
                    .map_err(csv_error)?;
            }
        }
        _ => {
            return Err(CliError::Config(
                "csv output is available for sweep and simulate only".into(),
            ))
        }
    }
    w.into_inner()
        .map_err(|e| CliError::Io {
            path: "csv output".into(),
            source: std::io::Error::other(e.to_string()),
        })
}

pub fn write(bytes: &[u8], path: Option<&str>) -> Result<()> {
    fn io(path: &str) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_owned(),
            source,
        }
    }
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(io(p)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(io("stdout"))
        }
    }
}
