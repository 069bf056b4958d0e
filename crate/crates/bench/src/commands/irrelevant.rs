use std::path::PathBuf;

use cggibbs::data::{generate_synthetic, with_intercept, Scenario, SyntheticSpec};
use cggibbs::rng::derive_seed;
use cggibbs::samplers::config_hash;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::ess_scaling::{ess_cell, summarize, EssCell, GridCell, GridPoint};
use crate::common::{ensure_dir, require, thread_pool, write_json, SamplerOptions, Table};
use crate::config::Params;
use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, Serialize)]
pub struct IrrelevantConfig {
    pub scenarios: Vec<Scenario>,
    pub n: usize,
    pub n_significant: usize,
    pub intercept: f64,
    pub d_grid: Vec<usize>,
    pub replicates: usize,
    pub sampler: SamplerOptions,
    pub seed: u64,
    pub timing: bool,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl IrrelevantConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let cfg = IrrelevantConfig {
            scenarios: p.list(
                "scenarios",
                vec![
                    Scenario::PrefixSignificant1,
                    Scenario::PrefixSignificant2,
                    Scenario::PrefixSignificant3,
                ],
            )?,
            n: p.get("n", 20)?,
            n_significant: p.get("n_significant", 30)?,
            intercept: p.get("intercept", 0.0)?,
            d_grid: p.list("d_grid", vec![32, 64, 128, 256, 512, 1024])?,
            replicates: p.get("replicates", 3)?,
            sampler: SamplerOptions::from_params(p, 6000, 1000)?,
            seed: p.get("seed", 1)?,
            timing: p.flag("timing", true)?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        require(cfg.replicates > 0 && cfg.n > 0, || "n and replicates must be >= 1".into())?;
        require(!cfg.scenarios.contains(&Scenario::IidNormal), || {
            "scenarios must be prefix scenarios 1, 2 or 3".into()
        })?;
        if let Some(&d) = cfg.d_grid.iter().find(|&&d| d < cfg.n_significant) {
            return Err(BenchError::Validation(format!(
                "d_grid value {d} is below n_significant = {}",
                cfg.n_significant
            )));
        }
        Ok(cfg)
    }
}

/// ESS-per-sweep ratios within this band of 1 count as no change.
pub const GAIN_BAND: f64 = 1.5;

/// Ratios of ESS per sweep between the largest and smallest grid value.
#[derive(Debug, Clone, Serialize)]
pub struct Contrast {
    pub scenario: Scenario,
    pub d_from: usize,
    pub d_to: usize,
    pub median_ess_gain: Option<f64>,
    pub min_ess_gain: Option<f64>,
    /// Median ESS per sweep improved by at least `GAIN_BAND` while the minimum did not.
    pub median_only_gain: Option<bool>,
}

impl Contrast {
    fn between(scenario: Scenario, curve: &[GridPoint]) -> Option<Self> {
        let (first, last) = (curve.first()?, curve.last()?);
        let gain = |a: Option<f64>, b: Option<f64>| Some(a? / b?);
        // sweeps per ESS falls when ESS per sweep rises
        let median_ess_gain = gain(first.sweeps_per_median_ess, last.sweeps_per_median_ess);
        let min_ess_gain = gain(first.sweeps_per_min_ess, last.sweeps_per_min_ess);
        Some(Contrast {
            scenario,
            d_from: first.d,
            d_to: last.d,
            median_ess_gain,
            min_ess_gain,
            median_only_gain: median_ess_gain.zip(min_ess_gain).map(|(m, n)| m >= GAIN_BAND && n <= GAIN_BAND),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioCell {
    pub scenario: Scenario,
    #[serde(flatten)]
    pub cell: GridCell,
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrelevantResult {
    pub config_hash: String,
    pub cells: Vec<ScenarioCell>,
    pub curves: Vec<(Scenario, Vec<GridPoint>)>,
    pub contrasts: Vec<Contrast>,
}

/// Sweeps per ESS as trailing irrelevant features are added. Replicate `r` uses
/// the same data seed in every scenario and at every `d`, so the significant block
/// and the responses are shared along each curve.
pub fn irrelevant_features(cfg: &IrrelevantConfig) -> BenchResult<IrrelevantResult> {
    let hash = config_hash(cfg);
    let cells: Vec<(Scenario, usize, usize)> = cfg
        .scenarios
        .iter()
        .flat_map(|&s| {
            (0..cfg.replicates).flat_map(move |r| cfg.d_grid.iter().map(move |&d| (s, r, d)))
        })
        .collect();
    let run = |&(scenario, rep, d): &(Scenario, usize, usize)| -> ScenarioCell {
        let data_seed = derive_seed(cfg.seed, &[rep as u64]);
        let spec = SyntheticSpec {
            n_significant: cfg.n_significant,
            intercept: cfg.intercept,
            ..SyntheticSpec::new(cfg.n, d, scenario, data_seed)
        };
        let ess = match generate_synthetic(&spec).and_then(|(ds, _)| with_intercept(&ds)) {
            Ok(ds) => ess_cell(&cfg.sampler, &ds, derive_seed(data_seed, &[d as u64]), cfg.timing),
            Err(e) => EssCell::failed(format!("error: {e}")),
        };
        if ess.unreliable {
            log::warn!("scenario {scenario} replicate {rep} d={d}: unreliable ESS ({})", ess.status);
        }
        ScenarioCell {
            scenario,
            cell: GridCell { replicate: rep, d, ess },
        }
    };
    let results: Vec<ScenarioCell> = thread_pool()?.install(|| cells.par_iter().map(run).collect());
    let mut curves = Vec::new();
    let mut contrasts = Vec::new();
    for &s in &cfg.scenarios {
        let mine: Vec<GridCell> = results.iter().filter(|c| c.scenario == s).map(|c| c.cell.clone()).collect();
        let curve = summarize(&cfg.d_grid, &mine);
        contrasts.extend(Contrast::between(s, &curve));
        curves.push((s, curve));
    }
    Ok(IrrelevantResult {
        config_hash: hash,
        cells: results,
        curves,
        contrasts,
    })
}

pub fn write_outputs(cfg: &IrrelevantConfig, result: &IrrelevantResult) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    let mut header = vec!["scenario", "replicate", "d"];
    header.extend(EssCell::HEADER);
    let mut table = Table::new(&header);
    for c in &result.cells {
        let mut row = vec![c.scenario.to_string(), c.cell.replicate.to_string(), c.cell.d.to_string()];
        row.extend(c.cell.ess.fields());
        table.push(row);
    }
    table.write(&cfg.out_dir.join("irrelevant_features.csv"), &result.config_hash)?;
    let curves: Vec<serde_json::Value> = result
        .curves
        .iter()
        .map(|(s, c)| serde_json::json!({ "scenario": s.to_string(), "curve": c }))
        .collect();
    write_json(&cfg.out_dir.join("irrelevant_features_summary.json"), &serde_json::json!({
        "config_hash": result.config_hash,
        "config": cfg,
        "curves": curves,
        "contrasts": result.contrasts,
    }))
}
