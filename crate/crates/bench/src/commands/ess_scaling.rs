use std::path::PathBuf;

use cggibbs::data::{subsample_features, Scenario};
use cggibbs::diagnostics::{ess_report, ess_report_table, EssReport};
use cggibbs::glm::Dataset;
use cggibbs::rng::derive_seed;
use cggibbs::samplers::{config_hash, read_samples_csv, run_chain, TraceStatus};
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{
    ensure_dir, log_log_slope, median, na, require, thread_pool, write_json, DataOptions,
    SamplerOptions, SyntheticDefaults, Table,
};
use crate::config::Params;
use crate::error::BenchResult;

/// ESS figures of one chain.
#[derive(Debug, Clone, Serialize)]
pub struct EssCell {
    pub t_kept: usize,
    pub min_ess: Option<f64>,
    pub median_ess: Option<f64>,
    pub sweeps_per_min_ess: Option<f64>,
    pub sweeps_per_median_ess: Option<f64>,
    pub seconds_per_min_ess: Option<f64>,
    pub seconds_per_median_ess: Option<f64>,
    pub unreliable: bool,
    pub status: String,
}

impl EssCell {
    pub fn from_report(r: &EssReport, timing: bool, status: String) -> Self {
        let secs = |v: Option<f64>| v.filter(|_| timing);
        EssCell {
            t_kept: r.t_kept,
            min_ess: r.min_ess,
            median_ess: r.median_ess,
            sweeps_per_min_ess: r.sweeps_per_min_ess,
            sweeps_per_median_ess: r.sweeps_per_median_ess,
            seconds_per_min_ess: secs(r.seconds_per_min_ess),
            seconds_per_median_ess: secs(r.seconds_per_median_ess),
            unreliable: r.unreliable,
            status,
        }
    }

    pub fn failed(message: String) -> Self {
        EssCell {
            t_kept: 0,
            min_ess: None,
            median_ess: None,
            sweeps_per_min_ess: None,
            sweeps_per_median_ess: None,
            seconds_per_min_ess: None,
            seconds_per_median_ess: None,
            unreliable: true,
            status: message,
        }
    }

    pub const HEADER: [&'static str; 9] = [
        "t_kept",
        "min_ess",
        "median_ess",
        "sweeps_per_min_ess",
        "sweeps_per_median_ess",
        "seconds_per_min_ess",
        "seconds_per_median_ess",
        "unreliable",
        "status",
    ];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.t_kept.to_string(),
            na(self.min_ess),
            na(self.median_ess),
            na(self.sweeps_per_min_ess),
            na(self.sweeps_per_median_ess),
            na(self.seconds_per_min_ess),
            na(self.seconds_per_median_ess),
            self.unreliable.to_string(),
            self.status.clone(),
        ]
    }
}

/// Runs one chain on `dataset` and summarises its ESS.
pub fn ess_cell(sampler: &SamplerOptions, dataset: &Dataset, seed: u64, timing: bool) -> EssCell {
    let run = sampler.run_config(seed, 0);
    match run_chain(&sampler.model, dataset, &run) {
        Ok(trace) => {
            let status = match &trace.status {
                TraceStatus::Complete => "complete".to_string(),
                TraceStatus::Aborted(msg) => format!("aborted: {msg}"),
            };
            match ess_report(&trace, trace.kept_seconds) {
                Ok(r) => EssCell::from_report(&r, timing, status),
                Err(e) => EssCell::failed(format!("ess failed: {e}")),
            }
        }
        Err(e) => EssCell::failed(format!("error: {e}")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EssScalingConfig {
    pub data: DataOptions,
    pub d_grid: Vec<usize>,
    pub replicates: usize,
    pub sampler: SamplerOptions,
    pub seed: u64,
    pub timing: bool,
    pub external_traces: Vec<PathBuf>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl EssScalingConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let d_grid: Vec<usize> = p.list("d_grid", vec![4, 8, 16, 32, 64, 128, 256, 512])?;
        let d_max = d_grid.iter().copied().max().unwrap_or(1);
        let data = DataOptions::from_params(
            p,
            SyntheticDefaults {
                n: 32,
                d: d_max,
                scenario: Scenario::PrefixSignificant1,
                add_intercept: true,
            },
        )?;
        let cfg = EssScalingConfig {
            data,
            d_grid,
            replicates: p.get("replicates", 3)?,
            sampler: SamplerOptions::from_params(p, 6000, 1000)?,
            seed: p.get("seed", 1)?,
            timing: p.flag("timing", true)?,
            external_traces: p.list("external_traces", vec![])?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        require(cfg.replicates > 0, || "replicates must be >= 1".into())?;
        require(cfg.d_grid.iter().all(|&d| d > 0), || "d_grid entries must be >= 1".into())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub replicate: usize,
    pub d: usize,
    #[serde(flatten)]
    pub ess: EssCell,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub d: usize,
    /// Medians over replicates.
    pub sweeps_per_median_ess: Option<f64>,
    pub sweeps_per_min_ess: Option<f64>,
    pub seconds_per_median_ess: Option<f64>,
    pub unreliable_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExternalTrace {
    pub path: PathBuf,
    pub t_kept: usize,
    pub min_ess: Option<f64>,
    pub median_ess: Option<f64>,
    pub median_relative_ess: Option<f64>,
    pub unreliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EssScalingResult {
    pub config_hash: String,
    pub n: usize,
    pub cells: Vec<GridCell>,
    pub curve: Vec<GridPoint>,
    /// Log-log slope of sweeps per median ESS over the last three grid points.
    pub tail_slope: Option<f64>,
    pub external: Vec<ExternalTrace>,
}

/// Median over replicates per grid value.
pub fn summarize(d_grid: &[usize], cells: &[GridCell]) -> Vec<GridPoint> {
    d_grid
        .iter()
        .map(|&d| {
            let at: Vec<&GridCell> = cells.iter().filter(|c| c.d == d).collect();
            let med = |f: &dyn Fn(&EssCell) -> Option<f64>| {
                median(&at.iter().filter_map(|c| f(&c.ess)).collect::<Vec<_>>())
            };
            GridPoint {
                d,
                sweeps_per_median_ess: med(&|e| e.sweeps_per_median_ess),
                sweeps_per_min_ess: med(&|e| e.sweeps_per_min_ess),
                seconds_per_median_ess: med(&|e| e.seconds_per_median_ess),
                unreliable_cells: at.iter().filter(|c| c.ess.unreliable).count(),
            }
        })
        .collect()
}

/// Log-log slope of sweeps per median ESS over the last three grid points.
pub fn tail_slope(curve: &[GridPoint]) -> Option<f64> {
    let tail = &curve[curve.len().saturating_sub(3)..];
    let pts: Option<Vec<(f64, f64)>> = tail
        .iter()
        .map(|p| p.sweeps_per_median_ess.map(|v| (p.d as f64, v)))
        .collect();
    log_log_slope(&pts?)
}

/// Sweeps per ESS as a function of the number of covariates kept from a shuffled
/// prefix, one shuffle per replicate.
pub fn ess_scaling(cfg: &EssScalingConfig) -> BenchResult<EssScalingResult> {
    let hash = config_hash(cfg);
    let features = cfg.data.load_features()?;
    require(cfg.d_grid.iter().all(|&d| d <= features.d()), || {
        format!("d_grid exceeds the {} available features", features.d())
    })?;
    let cells: Vec<(usize, usize)> = (0..cfg.replicates)
        .flat_map(|r| cfg.d_grid.iter().map(move |&d| (r, d)))
        .collect();
    let run = |&(rep, d): &(usize, usize)| -> GridCell {
        let perm_seed = derive_seed(cfg.seed, &[rep as u64]);
        let ess = match subsample_features(&features, d, perm_seed)
            .map_err(crate::error::BenchError::from)
            .and_then(|sub| cfg.data.finish(&sub))
        {
            Ok(ds) => ess_cell(&cfg.sampler, &ds, derive_seed(perm_seed, &[d as u64]), cfg.timing),
            Err(e) => EssCell::failed(format!("error: {e}")),
        };
        if ess.unreliable {
            log::warn!("replicate {rep} d={d}: unreliable ESS ({})", ess.status);
        }
        GridCell { replicate: rep, d, ess }
    };
    let results: Vec<GridCell> = thread_pool()?.install(|| cells.par_iter().map(run).collect());
    let curve = summarize(&cfg.d_grid, &results);
    let mut external = Vec::new();
    for path in &cfg.external_traces {
        let table = read_samples_csv(path)?;
        let r = ess_report_table(&table, 0.0)?;
        external.push(ExternalTrace {
            path: path.clone(),
            t_kept: r.t_kept,
            min_ess: r.min_ess,
            median_ess: r.median_ess,
            median_relative_ess: r.median_ess.map(|m| m / r.t_kept as f64),
            unreliable: r.unreliable,
        });
    }
    Ok(EssScalingResult {
        config_hash: hash,
        n: features.n(),
        tail_slope: tail_slope(&curve),
        cells: results,
        curve,
        external,
    })
}

pub fn write_outputs(cfg: &EssScalingConfig, result: &EssScalingResult) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    let mut header = vec!["replicate", "d"];
    header.extend(EssCell::HEADER);
    let mut table = Table::new(&header);
    for c in &result.cells {
        let mut row = vec![c.replicate.to_string(), c.d.to_string()];
        row.extend(c.ess.fields());
        table.push(row);
    }
    table.write(&cfg.out_dir.join("ess_scaling.csv"), &result.config_hash)?;
    if !result.external.is_empty() {
        let mut ext = Table::new(&["path", "t_kept", "min_ess", "median_ess", "median_relative_ess", "unreliable"]);
        for e in &result.external {
            ext.push(vec![
                e.path.display().to_string(),
                e.t_kept.to_string(),
                na(e.min_ess),
                na(e.median_ess),
                na(e.median_relative_ess),
                e.unreliable.to_string(),
            ]);
        }
        ext.write(&cfg.out_dir.join("ess_external.csv"), &result.config_hash)?;
    }
    write_json(&cfg.out_dir.join("ess_scaling_summary.json"), &serde_json::json!({
        "config_hash": result.config_hash,
        "config": cfg,
        "n": result.n,
        "curve": result.curve,
        "tail_slope": result.tail_slope,
        "external": result.external,
    }))
}
