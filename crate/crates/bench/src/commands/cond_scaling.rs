use std::path::PathBuf;

use cggibbs::data::{subsample_features, Scenario};
use cggibbs::glm::Dataset;
use cggibbs::rng::derive_seed;
use cggibbs::samplers::config_hash;
use cggibbs::theory::{kappa, kappa_cor, kappa_r, GaussianTarget};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{
    ensure_dir, log_log_slope, median, na, require, thread_pool, write_json, DataOptions,
    SyntheticDefaults, Table,
};
use crate::config::Params;
use crate::error::{BenchError, BenchResult};

/// Slack allowed in the orderings `κ_r ≤ κ` and `κ_r ≤ κ_cor`.
pub const ORDERING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CondScalingConfig {
    pub data: DataOptions,
    pub d_grid: Vec<usize>,
    pub replicates: usize,
    pub prior_sd: f64,
    pub kappa_r_budget: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl CondScalingConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let d_grid: Vec<usize> = p.list("d_grid", vec![1, 2, 4, 8, 16, 32, 64, 128, 256])?;
        let d_max = d_grid.iter().copied().max().unwrap_or(1);
        let data = DataOptions::from_params(
            p,
            SyntheticDefaults {
                n: 32,
                d: d_max,
                scenario: Scenario::IidNormal,
                add_intercept: false,
            },
        )?;
        let cfg = CondScalingConfig {
            data,
            d_grid,
            replicates: p.get("replicates", 3)?,
            prior_sd: p.get("prior_sd", 10.0)?,
            kappa_r_budget: p.get("kappa_r_budget", 4000)?,
            seed: p.get("seed", 1)?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        require(cfg.replicates > 0, || "replicates must be >= 1".into())?;
        require(cfg.prior_sd > 0.0 && cfg.prior_sd.is_finite(), || "prior_sd must be positive".into())?;
        require(cfg.d_grid.iter().all(|&d| d > 0), || "d_grid entries must be >= 1".into())?;
        Ok(cfg)
    }
}

/// Covariance of the Gaussian surrogate at `θ = 0`: the inverse of
/// `XᵀX/4 + I/sd²`, the logistic curvature bound plus the prior precision.
pub fn surrogate_covariance(dataset: &Dataset, prior_sd: f64) -> cggibbs::Result<DMatrix<f64>> {
    let (n, d) = (dataset.n(), dataset.d());
    let x = DMatrix::from_column_slice(n, d, &dataset.x().to_col_major());
    let precision = x.transpose() * &x / 4.0 + DMatrix::identity(d, d) / (prior_sd * prior_sd);
    Ok(GaussianTarget::from_precision(DVector::zeros(d), precision)?.sigma().clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct CondCell {
    pub replicate: usize,
    pub d: usize,
    pub kappa: Option<f64>,
    pub kappa_cor: Option<f64>,
    pub kappa_r_upper: Option<f64>,
    pub ordering_holds: Option<bool>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CondPoint {
    pub d: usize,
    pub kappa: Option<f64>,
    pub kappa_cor: Option<f64>,
    pub kappa_r_upper: Option<f64>,
}

/// Log-log slopes of the median `κ` curve on the grid points with `d ≤ n` and
/// with `d ≥ n`.
#[derive(Debug, Clone, Serialize)]
pub struct TrendCheck {
    pub n: usize,
    pub slope_up_to_n: Option<f64>,
    pub slope_beyond_n: Option<f64>,
    /// Growth past `n` is at most half the growth before it, and sublinear.
    pub stabilizes: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CondScalingResult {
    pub config_hash: String,
    pub cells: Vec<CondCell>,
    pub curve: Vec<CondPoint>,
    pub trend: TrendCheck,
    pub all_orderings_hold: bool,
}

fn measure(sigma: &DMatrix<f64>, budget: usize) -> cggibbs::Result<(f64, f64, f64)> {
    Ok((kappa(sigma)?, kappa_cor(sigma)?, kappa_r(sigma, budget)?.value))
}

pub fn trend_check(n: usize, curve: &[CondPoint]) -> TrendCheck {
    let pts = |keep: &dyn Fn(usize) -> bool| -> Vec<(f64, f64)> {
        curve
            .iter()
            .filter(|p| keep(p.d))
            .filter_map(|p| p.kappa.map(|k| (p.d as f64, k)))
            .collect()
    };
    let below = log_log_slope(&pts(&|d| d <= n));
    let above = log_log_slope(&pts(&|d| d >= n));
    TrendCheck {
        n,
        slope_up_to_n: below,
        slope_beyond_n: above,
        stabilizes: below.zip(above).map(|(b, a)| a < 0.5 * b && a < 1.0),
    }
}

/// Condition numbers of the surrogate covariance along shuffled feature prefixes.
pub fn cond_scaling(cfg: &CondScalingConfig) -> BenchResult<CondScalingResult> {
    let hash = config_hash(cfg);
    let features = cfg.data.load_features()?;
    require(cfg.d_grid.iter().all(|&d| d <= features.d()), || {
        format!("d_grid exceeds the {} available features", features.d())
    })?;
    let cells: Vec<(usize, usize)> = (0..cfg.replicates)
        .flat_map(|r| cfg.d_grid.iter().map(move |&d| (r, d)))
        .collect();
    let run = |&(rep, d): &(usize, usize)| -> CondCell {
        let outcome = subsample_features(&features, d, derive_seed(cfg.seed, &[rep as u64]))
            .map_err(BenchError::from)
            .and_then(|sub| cfg.data.finish(&sub))
            .and_then(|ds| Ok(surrogate_covariance(&ds, cfg.prior_sd)?))
            .and_then(|sigma| Ok(measure(&sigma, cfg.kappa_r_budget)?));
        match outcome {
            Ok((k, kc, kr)) => {
                let holds = kr <= k + ORDERING_TOL && kr <= kc + ORDERING_TOL;
                if !holds {
                    log::error!("replicate {rep} d={d}: ordering violated: κ={k} κ_cor={kc} κ_r={kr}");
                }
                CondCell {
                    replicate: rep,
                    d,
                    kappa: Some(k),
                    kappa_cor: Some(kc),
                    kappa_r_upper: Some(kr),
                    ordering_holds: Some(holds),
                    flag: None,
                }
            }
            Err(e) => {
                log::warn!("replicate {rep} d={d}: {e}");
                CondCell {
                    replicate: rep,
                    d,
                    kappa: None,
                    kappa_cor: None,
                    kappa_r_upper: None,
                    ordering_holds: None,
                    flag: Some(e.to_string()),
                }
            }
        }
    };
    let results: Vec<CondCell> = thread_pool()?.install(|| cells.par_iter().map(run).collect());
    let curve: Vec<CondPoint> = cfg
        .d_grid
        .iter()
        .map(|&d| {
            let med = |f: &dyn Fn(&CondCell) -> Option<f64>| {
                median(&results.iter().filter(|c| c.d == d).filter_map(f).collect::<Vec<_>>())
            };
            CondPoint {
                d,
                kappa: med(&|c| c.kappa),
                kappa_cor: med(&|c| c.kappa_cor),
                kappa_r_upper: med(&|c| c.kappa_r_upper),
            }
        })
        .collect();
    Ok(CondScalingResult {
        config_hash: hash,
        all_orderings_hold: results.iter().all(|c| c.ordering_holds != Some(false)),
        trend: trend_check(features.n(), &curve),
        cells: results,
        curve,
    })
}

pub fn write_outputs(cfg: &CondScalingConfig, result: &CondScalingResult) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    let mut table = Table::new(&["replicate", "d", "kappa", "kappa_cor", "kappa_r_upper", "ordering_holds", "flag"]);
    for c in &result.cells {
        table.push(vec![
            c.replicate.to_string(),
            c.d.to_string(),
            na(c.kappa),
            na(c.kappa_cor),
            na(c.kappa_r_upper),
            c.ordering_holds.map_or_else(|| "NA".into(), |b| b.to_string()),
            c.flag.clone().unwrap_or_default(),
        ]);
    }
    table.write(&cfg.out_dir.join("cond_scaling.csv"), &result.config_hash)?;
    write_json(&cfg.out_dir.join("cond_scaling_summary.json"), &serde_json::json!({
        "config_hash": result.config_hash,
        "config": cfg,
        "curve": result.curve,
        "trend": result.trend,
        "all_orderings_hold": result.all_orderings_hold,
    }))
}
