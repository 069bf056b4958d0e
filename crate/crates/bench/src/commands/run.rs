use std::path::PathBuf;

use cggibbs::data::Scenario;
use cggibbs::diagnostics::{ess_report, EssReport};
use cggibbs::samplers::{config_hash, run_chain, Trace, TraceStatus};
use serde::Serialize;

use crate::common::{ensure_dir, na, write_json, DataOptions, SamplerOptions, SyntheticDefaults, Table};
use crate::config::Params;
use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, Serialize)]
pub struct RunCommandConfig {
    pub data: DataOptions,
    pub sampler: SamplerOptions,
    pub seed: u64,
    pub chain: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunCommandConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let cfg = RunCommandConfig {
            data: DataOptions::from_params(
                p,
                SyntheticDefaults {
                    n: 100,
                    d: 10,
                    scenario: Scenario::IidNormal,
                    add_intercept: true,
                },
            )?,
            sampler: SamplerOptions::from_params(p, 2000, 1000)?,
            seed: p.get("seed", 1)?,
            chain: p.get("chain", 0)?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        Ok(cfg)
    }
}

pub struct RunOutput {
    pub config_hash: String,
    pub trace: Trace,
    pub report: Option<EssReport>,
}

/// One chain on one dataset.
pub fn run(cfg: &RunCommandConfig) -> BenchResult<RunOutput> {
    let dataset = cfg.data.finish(&cfg.data.load_features()?)?;
    let trace = run_chain(&cfg.sampler.model, &dataset, &cfg.sampler.run_config(cfg.seed, cfg.chain))?;
    let report = match ess_report(&trace, trace.kept_seconds) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("no ESS report: {e}");
            None
        }
    };
    Ok(RunOutput {
        config_hash: config_hash(cfg),
        trace,
        report,
    })
}

/// Writes trace CSV, sidecar and ESS files; an aborted chain is reported as an
/// error after its partial trace is saved.
pub fn write_outputs(cfg: &RunCommandConfig, out: &RunOutput) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    out.trace.write_csv(&cfg.out_dir.join("trace.csv"))?;
    let mut sidecar = out.trace.sidecar();
    sidecar["command_config"] = serde_json::to_value(cfg)?;
    sidecar["command_config_hash"] = serde_json::Value::String(out.config_hash.clone());
    write_json(&cfg.out_dir.join("trace.json"), &sidecar)?;
    if let Some(report) = &out.report {
        write_json(&cfg.out_dir.join("ess.json"), report)?;
        let mut table = Table::new(&["function", "ess", "clamped"]);
        for f in &report.per_function {
            table.push(vec![f.function.clone(), na(f.ess), f.clamped.to_string()]);
        }
        table.write(&cfg.out_dir.join("ess.csv"), &out.config_hash)?;
    }
    if let TraceStatus::Aborted(msg) = &out.trace.status {
        return Err(BenchError::Runtime(format!(
            "chain aborted after {} sweeps: {msg}",
            out.trace.sweep_madds.len()
        )));
    }
    Ok(())
}
