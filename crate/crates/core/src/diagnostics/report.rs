use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::samplers::{SampleTable, Trace};

use super::ess::{ess, MIN_SERIES_LEN};

/// Below this minimum ESS a report is flagged unreliable.
pub const RELIABLE_MIN_ESS: f64 = 100.0;

/// Per-function ESS is clamped at this multiple of the kept length.
pub const ESS_HEADROOM: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionEss {
    /// `θ[name]` or `θ[name]^2`.
    pub function: String,
    /// `None` when the column is degenerate or too short.
    pub ess: Option<f64>,
    pub clamped: bool,
}

/// ESS summary over the test functions `θ_i` and `θ_i²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssReport {
    pub t_kept: usize,
    pub per_function: Vec<FunctionEss>,
    pub min_ess: Option<f64>,
    pub median_ess: Option<f64>,
    pub sweeps_per_min_ess: Option<f64>,
    pub sweeps_per_median_ess: Option<f64>,
    pub seconds_per_min_ess: Option<f64>,
    pub seconds_per_median_ess: Option<f64>,
    pub wall_seconds: f64,
    pub unreliable: bool,
    pub warnings: Vec<String>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Report for a sampler trace.
pub fn ess_report(trace: &Trace, wall_seconds: f64) -> Result<EssReport> {
    ess_report_for(&trace.names, &trace.samples, wall_seconds)
}

/// Report for draws read from disk.
pub fn ess_report_table(table: &SampleTable, wall_seconds: f64) -> Result<EssReport> {
    ess_report_for(&table.names, &table.rows, wall_seconds)
}

/// ESS of every `θ_i` and `θ_i²` column of `rows` (one row per kept sweep).
pub fn ess_report_for(names: &[String], rows: &[Vec<f64>], wall_seconds: f64) -> Result<EssReport> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
        return Err(Error::Parse {
            line: i + 1,
            message: format!("row has {} values, expected {}", r.len(), names.len()),
        });
    }
    let t = rows.len();
    let mut warnings = Vec::new();
    let mut per_function = Vec::with_capacity(2 * names.len());
    for squared in [false, true] {
        for (j, name) in names.iter().enumerate() {
            let function = if squared {
                format!("{name}^2")
            } else {
                name.clone()
            };
            let column: Vec<f64> = rows
                .iter()
                .map(|r| if squared { r[j] * r[j] } else { r[j] })
                .collect();
            let (value, clamped) = if t < MIN_SERIES_LEN {
                (None, false)
            } else {
                match ess(&column) {
                    Ok(v) => {
                        let cap = ESS_HEADROOM * t as f64;
                        (Some(v.min(cap)), v > cap)
                    }
                    Err(Error::ZeroVariance) => {
                        warnings.push(format!("{function}: zero variance, excluded"));
                        (None, false)
                    }
                    Err(e) => return Err(e),
                }
            };
            if clamped {
                warnings.push(format!("{function}: ESS clamped at {ESS_HEADROOM}·T"));
            }
            per_function.push(FunctionEss {
                function,
                ess: value,
                clamped,
            });
        }
    }
    if t < MIN_SERIES_LEN {
        warnings.push(format!("only {t} kept sweeps; ESS needs at least {MIN_SERIES_LEN}"));
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut values: Vec<f64> = per_function.iter().filter_map(|f| f.ess).collect();
    values.sort_by(f64::total_cmp);
    let min_ess = values.first().copied();
    let median_ess = (!values.is_empty()).then(|| median(&values));
    let per = |v: Option<f64>, total: f64| v.map(|e| total / e);
    Ok(EssReport {
        t_kept: t,
        min_ess,
        median_ess,
        sweeps_per_min_ess: per(min_ess, t as f64),
        sweeps_per_median_ess: per(median_ess, t as f64),
        seconds_per_min_ess: per(min_ess, wall_seconds),
        seconds_per_median_ess: per(median_ess, wall_seconds),
        wall_seconds,
        unreliable: min_ess.is_none_or(|m| m < RELIABLE_MIN_ESS),
        per_function,
        warnings,
    })
}

impl EssReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    /// One row per test function: `function,ess,clamped` (`NA` for excluded columns).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["function", "ess", "clamped"])?;
        for f in &self.per_function {
            let ess = f.ess.map_or_else(|| "NA".to_string(), |v| v.to_string());
            w.write_record([f.function.as_str(), ess.as_str(), &f.clamped.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
