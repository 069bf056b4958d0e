use std::collections::BTreeMap;
use std::path::PathBuf;

use cggibbs::data::{generate_synthetic, Scenario, SyntheticSpec};
use cggibbs::rng::derive_seed;
use cggibbs::samplers::{config_hash, run_chain, ExecutionMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{ensure_dir, log_log_slope, na, require, thread_pool, write_json, SamplerOptions, Table};
use crate::config::Params;
use crate::error::BenchResult;

#[derive(Debug, Clone, Serialize)]
pub struct SweepScalingConfig {
    pub n: usize,
    pub d_grid: Vec<usize>,
    pub replicates: usize,
    pub modes: Vec<ExecutionMode>,
    pub sampler: SamplerOptions,
    pub seed: u64,
    pub timing: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl SweepScalingConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let modes: Vec<String> = p.list("modes", vec!["cached".into(), "naive".into()])?;
        let cfg = SweepScalingConfig {
            n: p.get("n", 100)?,
            d_grid: p.list("d_grid", vec![16, 32, 64, 128, 256, 512])?,
            replicates: p.get("replicates", 3)?,
            modes: modes
                .iter()
                .map(|m| m.parse().map_err(crate::error::BenchError::Validation))
                .collect::<BenchResult<_>>()?,
            sampler: SamplerOptions::from_params(p, 200, 0)?,
            seed: p.get("seed", 1)?,
            timing: p.flag("timing", true)?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        require(cfg.n > 0 && cfg.replicates > 0, || "n and replicates must be >= 1".into())?;
        require(cfg.d_grid.iter().all(|&d| d > 0), || "d_grid entries must be >= 1".into())?;
        require(cfg.sampler.sweeps > 0, || "sweeps must be >= 1".into())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub mode: ExecutionMode,
    pub d: usize,
    pub replicate: usize,
    pub seconds_per_1000_sweeps: Option<f64>,
    pub multiply_add_count: u64,
    pub madds_per_sweep: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeFit {
    /// Log-log slope of mean multiply-adds per sweep against `d`.
    pub madds_slope: Option<f64>,
    pub seconds_slope: Option<f64>,
    /// Set when the grid has fewer than two usable points.
    pub slope_undefined: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepScalingResult {
    pub config_hash: String,
    pub cells: Vec<SweepCell>,
    pub fits: BTreeMap<String, ModeFit>,
}

fn mode_name(m: ExecutionMode) -> &'static str {
    match m {
        ExecutionMode::Cached => "cached",
        ExecutionMode::Naive => "naive",
    }
}

/// Per-sweep cost of cached and naive evaluation on synthetic logistic data over a
/// grid of dimensions.
pub fn sweep_scaling(cfg: &SweepScalingConfig) -> BenchResult<SweepScalingResult> {
    let hash = config_hash(cfg);
    let cells: Vec<(ExecutionMode, usize, usize)> = cfg
        .modes
        .iter()
        .flat_map(|&m| cfg.d_grid.iter().flat_map(move |&d| (0..cfg.replicates).map(move |r| (m, d, r))))
        .collect();
    let run_cell = |&(mode, d, rep): &(ExecutionMode, usize, usize)| -> SweepCell {
        let data_seed = derive_seed(cfg.seed, &[d as u64, rep as u64]);
        let outcome = generate_synthetic(&SyntheticSpec::new(cfg.n, d, Scenario::IidNormal, data_seed))
            .and_then(|(ds, _)| {
                let mut run = cfg.sampler.run_config(derive_seed(data_seed, &[1]), 0);
                run.mode = mode;
                run_chain(&cfg.sampler.model, &ds, &run)
            });
        match outcome {
            Ok(trace) => {
                let total: u64 = trace.sweep_madds.iter().sum();
                let sweeps = trace.sweep_madds.len().max(1) as f64;
                let seconds: f64 = trace.sweep_seconds.iter().sum();
                SweepCell {
                    mode,
                    d,
                    replicate: rep,
                    seconds_per_1000_sweeps: cfg.timing.then(|| 1000.0 * seconds / sweeps),
                    multiply_add_count: total,
                    madds_per_sweep: total as f64 / sweeps,
                    error: match trace.status {
                        cggibbs::samplers::TraceStatus::Complete => None,
                        cggibbs::samplers::TraceStatus::Aborted(msg) => Some(msg),
                    },
                }
            }
            Err(e) => {
                log::error!("cell mode={} d={d} replicate={rep}: {e}", mode_name(mode));
                SweepCell {
                    mode,
                    d,
                    replicate: rep,
                    seconds_per_1000_sweeps: None,
                    multiply_add_count: 0,
                    madds_per_sweep: f64::NAN,
                    error: Some(e.to_string()),
                }
            }
        }
    };
    let results: Vec<SweepCell> = thread_pool()?.install(|| cells.par_iter().map(run_cell).collect());

    let mut fits = BTreeMap::new();
    for &mode in &cfg.modes {
        let mean_over_reps = |value: &dyn Fn(&SweepCell) -> Option<f64>| -> Vec<(f64, f64)> {
            cfg.d_grid
                .iter()
                .filter_map(|&d| {
                    let v: Vec<f64> = results
                        .iter()
                        .filter(|c| c.mode == mode && c.d == d && c.error.is_none())
                        .filter_map(value)
                        .collect();
                    (!v.is_empty()).then(|| (d as f64, v.iter().sum::<f64>() / v.len() as f64))
                })
                .collect()
        };
        let madds_slope = log_log_slope(&mean_over_reps(&|c| Some(c.madds_per_sweep)));
        let seconds_slope = log_log_slope(&mean_over_reps(&|c| c.seconds_per_1000_sweeps));
        if madds_slope.is_none() {
            log::warn!("{}: slope undefined (fewer than two grid points)", mode_name(mode));
        }
        fits.insert(
            mode_name(mode).to_string(),
            ModeFit {
                madds_slope,
                seconds_slope,
                slope_undefined: madds_slope.is_none(),
            },
        );
    }
    Ok(SweepScalingResult {
        config_hash: hash,
        cells: results,
        fits,
    })
}

pub fn write_outputs(cfg: &SweepScalingConfig, result: &SweepScalingResult) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    let mut table = Table::new(&[
        "mode",
        "d",
        "replicate",
        "seconds_per_1000_sweeps",
        "multiply_add_count",
        "madds_per_sweep",
        "error",
    ]);
    for c in &result.cells {
        table.push(vec![
            mode_name(c.mode).into(),
            c.d.to_string(),
            c.replicate.to_string(),
            na(c.seconds_per_1000_sweeps),
            c.multiply_add_count.to_string(),
            c.madds_per_sweep.to_string(),
            c.error.clone().unwrap_or_default(),
        ]);
    }
    table.write(&cfg.out_dir.join("sweep_scaling.csv"), &result.config_hash)?;
    write_json(&cfg.out_dir.join("sweep_scaling_fit.json"), &serde_json::json!({
        "config_hash": result.config_hash,
        "config": cfg,
        "fits": result.fits,
    }))
}
