use std::path::{Path, PathBuf};

use cggibbs::data::{
    generate_synthetic, known_dataset, load_csv, load_libsvm, preprocess, with_intercept,
    PreprocessMode, PreprocessSpec, Scenario, SyntheticSpec,
};
use cggibbs::glm::{Dataset, GlmModel, Likelihood, PriorSpec};
use cggibbs::samplers::{ExecutionMode, Kernel, RunConfig, ScheduleKind, SliceConfig};
use cggibbs::theory::ols_slope;
use serde::Serialize;

use crate::config::Params;
use crate::error::{BenchError, BenchResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CGGIBBS_THREADS";

/// Pool sized by `CGGIBBS_THREADS` (all cores when unset).
pub fn thread_pool() -> BenchResult<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| BenchError::Validation(format!("{THREADS_ENV}={v:?} is not a positive integer")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Validation(e.to_string()))
}

/// Model, kernel and chain-length settings shared by sampling commands.
#[derive(Debug, Clone, Serialize)]
pub struct SamplerOptions {
    pub model: GlmModel,
    pub kernel: Kernel,
    pub schedule: ScheduleKind,
    pub mode: ExecutionMode,
    pub sweeps: usize,
    pub warmup: usize,
    pub refresh_interval: usize,
    pub record_latents: bool,
}

fn parse_with<T, E: std::fmt::Display>(key: &str, raw: &str, f: impl Fn(&str) -> Result<T, E>) -> BenchResult<T> {
    f(raw).map_err(|e| BenchError::Validation(format!("{key}: {e}")))
}

impl SamplerOptions {
    pub fn from_params(p: &Params, sweeps: usize, warmup: usize) -> BenchResult<Self> {
        let prior = match p.get("prior", "gaussian".to_string())?.as_str() {
            "gaussian" | "normal" => PriorSpec::IsotropicGaussian {
                sd: p.get("prior_sd", 10.0)?,
            },
            "horseshoe" => PriorSpec::Horseshoe,
            other => return Err(BenchError::Validation(format!("unknown prior {other:?}"))),
        };
        let likelihood = match p.get("likelihood", "logistic".to_string())?.as_str() {
            "logistic" => Likelihood::LogisticBernoulli,
            "prior_only" | "none" => Likelihood::PriorOnly,
            other => return Err(BenchError::Validation(format!("unknown likelihood {other:?}"))),
        };
        let slice_default = SliceConfig::default();
        let kernel = match p.get("kernel", "slice".to_string())?.as_str() {
            "slice" => Kernel::Slice(SliceConfig {
                initial_width: p.get("slice_width", slice_default.initial_width)?,
                max_doublings: p.get("slice_max_doublings", slice_default.max_doublings)?,
            }),
            "mh" => Kernel::Mh {
                step_sd: p.get("mh_step_sd", 1.0)?,
            },
            other => return Err(BenchError::Validation(format!("unknown kernel {other:?}"))),
        };
        let schedule = parse_with("schedule", &p.get("schedule", "dugs".to_string())?, str::parse)?;
        let mode = parse_with("mode", &p.get("mode", "cached".to_string())?, str::parse)?;
        let opts = SamplerOptions {
            model: GlmModel::new(likelihood, prior)?,
            kernel,
            schedule,
            mode,
            sweeps: p.get("sweeps", sweeps)?,
            warmup: p.get("warmup", warmup)?,
            refresh_interval: p.get("refresh_interval", 100)?,
            record_latents: p.flag("record_latents", false)?,
        };
        opts.run_config(0, 0).validate()?;
        Ok(opts)
    }

    pub fn run_config(&self, seed: u64, chain: u64) -> RunConfig {
        RunConfig {
            sweeps: self.sweeps,
            warmup: self.warmup,
            schedule: self.schedule,
            kernel: self.kernel,
            mode: self.mode,
            seed,
            chain,
            refresh_interval: self.refresh_interval,
            record_latents: self.record_latents,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Csv { path: PathBuf, y_column: String },
    Libsvm { path: PathBuf, d: Option<usize> },
}

/// Where the design matrix comes from and how it is scaled.
#[derive(Debug, Clone, Serialize)]
pub struct DataOptions {
    pub source: DataSource,
    pub preprocess: PreprocessSpec,
    /// Registered dataset whose shape the loaded file must match.
    pub dataset_name: Option<String>,
}

/// Defaults a command supplies for synthetic data.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticDefaults {
    pub n: usize,
    pub d: usize,
    pub scenario: Scenario,
    pub add_intercept: bool,
}

impl DataOptions {
    pub fn from_params(p: &Params, defaults: SyntheticDefaults) -> BenchResult<Self> {
        let kind = p.get("data", "synthetic".to_string())?;
        let source = match kind.as_str() {
            "synthetic" => {
                let scenario: Scenario = p.get("scenario", defaults.scenario)?;
                let base = SyntheticSpec::new(p.get("n", defaults.n)?, p.get("d", defaults.d)?, scenario, 0);
                DataSource::Synthetic(SyntheticSpec {
                    n_significant: p.get("n_significant", base.n_significant)?,
                    intercept: p.get("intercept", base.intercept)?,
                    signal_scale: p.get("signal_scale", base.signal_scale)?,
                    seed: p.get("data_seed", 1)?,
                    ..base
                })
            }
            "csv" => DataSource::Csv {
                path: p.require("data_path")?,
                y_column: p.get("y_column", "y".to_string())?,
            },
            "libsvm" => DataSource::Libsvm {
                path: p.require("data_path")?,
                d: p.get_opt("libsvm_d")?,
            },
            other => return Err(BenchError::Validation(format!("unknown data source {other:?}"))),
        };
        let default_mode = match source {
            DataSource::Synthetic(_) => "none",
            _ => "auto",
        };
        let mode: PreprocessMode = p.get("preprocess", default_mode.to_string())?.parse()?;
        let preprocess = PreprocessSpec {
            mode,
            sparsity_threshold: p.get("sparsity_threshold", 0.85)?,
            add_intercept: p.flag("add_intercept", defaults.add_intercept)?,
        };
        Ok(DataOptions {
            source,
            preprocess,
            dataset_name: p.get_opt("dataset_name")?,
        })
    }

    /// Loads and scales the features; the intercept is not added here.
    pub fn load_features(&self) -> BenchResult<Dataset> {
        let raw = match &self.source {
            DataSource::Synthetic(spec) => generate_synthetic(spec)?.0,
            DataSource::Csv { path, y_column } => load_csv(path, y_column)?,
            DataSource::Libsvm { path, d } => load_libsvm(path, *d)?,
        };
        if let Some(name) = &self.dataset_name {
            let known = known_dataset(name)
                .ok_or_else(|| BenchError::Validation(format!("unknown dataset name {name:?}")))?;
            known.check_shape(&raw)?;
        }
        let spec = PreprocessSpec {
            add_intercept: false,
            ..self.preprocess
        };
        Ok(preprocess(&raw, &spec)?)
    }

    /// Prepends the intercept column when configured.
    pub fn finish(&self, features: &Dataset) -> BenchResult<Dataset> {
        Ok(if self.preprocess.add_intercept {
            with_intercept(features)?
        } else {
            features.clone()
        })
    }
}

/// Slope of `log y` on `log x`; `None` with fewer than two distinct `x` or a
/// non-positive value.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && y.is_finite())) {
        return None;
    }
    let first = points.first()?.0;
    if points.iter().all(|p| p.0 == first) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    Some(ols_slope(&logs))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// CSV with a trailing `config_hash` column on every row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, config_hash: &str) -> BenchResult<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.header.iter().map(String::as_str).chain(["config_hash"]))?;
        for r in &self.rows {
            w.write_record(r.iter().map(String::as_str).chain([config_hash]))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> BenchResult<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> BenchResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn require(cond: bool, message: impl FnOnce() -> String) -> BenchResult<()> {
    if cond {
        Ok(())
    } else {
        Err(BenchError::Validation(message()))
    }
}
