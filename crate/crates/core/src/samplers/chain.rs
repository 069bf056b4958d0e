use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{
    CachedConditional, Coordinate, Dataset, GlmModel, LinearPredictorCache, NaiveConditional,
    OpCounts,
};
use crate::rng::{chain_streams, ChainRng};

use super::mh::mh_update;
use super::schedule::{ScheduleKind, SweepSchedule};
use super::slice::{slice_update, SliceConfig};
use super::trace::{Trace, TraceStatus};

/// Within-Gibbs kernel applied to each scheduled coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Slice(SliceConfig),
    Mh { step_sd: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Slice(SliceConfig::default())
    }
}

/// How conditional log densities are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExecutionMode {
    /// Through the linear-predictor cache: O(n) per evaluation.
    Cached,
    /// Recomputing `X θ` for every evaluation: O(dn).
    Naive,
}

impl std::str::FromStr for ExecutionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cached" => Ok(ExecutionMode::Cached),
            "naive" => Ok(ExecutionMode::Naive),
            other => Err(format!("unknown mode {other:?} (cached|naive)")),
        }
    }
}

/// Mutable state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: Vec<f64>,
    /// Present in cached mode only.
    pub cache: Option<LinearPredictorCache>,
    pub sweep_index: usize,
    pub rng: ChainRng,
    pub ops: OpCounts,
    /// Sweeps between full cache rebuilds; 0 disables rebuilding.
    pub refresh_interval: usize,
}

impl ChainState {
    pub fn new(
        model: &GlmModel,
        dataset: &Dataset,
        theta: Vec<f64>,
        mode: ExecutionMode,
        rng: ChainRng,
    ) -> Result<Self> {
        model.layout(dataset.d()).check(&theta)?;
        for (k, v) in theta.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: *v,
                    context: format!("initial parameter {k}"),
                });
            }
        }
        let cache = match mode {
            ExecutionMode::Cached => Some(LinearPredictorCache::init(dataset, &theta)?),
            ExecutionMode::Naive => None,
        };
        Ok(ChainState {
            theta,
            cache,
            sweep_index: 0,
            rng,
            ops: OpCounts::default(),
            refresh_interval: 100,
        })
    }
}

/// Per-sweep tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub updates: usize,
    pub moved: usize,
    pub doubling_cap_hits: usize,
}

fn kernel_step<F: FnMut(f64) -> f64>(
    kernel: &Kernel,
    x0: f64,
    log_f: F,
    rng: &mut ChainRng,
    stats: &mut SweepStats,
) -> Result<f64> {
    match kernel {
        Kernel::Slice(cfg) => {
            let (x, out) = slice_update(x0, log_f, cfg, rng)?;
            if out.hit_doubling_cap {
                stats.doubling_cap_hits += 1;
            }
            Ok(x)
        }
        Kernel::Mh { step_sd } => Ok(mh_update(x0, log_f, *step_sd, rng)?.0),
    }
}

/// One pass of the schedule: every scheduled coordinate gets one kernel update.
///
/// Cached and naive modes draw exactly the same random numbers; they differ only
/// in how the conditional log density is computed.
pub fn gibbs_sweep(
    model: &GlmModel,
    dataset: &Dataset,
    state: &mut ChainState,
    schedule: &mut SweepSchedule,
    kernel: &Kernel,
) -> Result<SweepStats> {
    let layout = model.layout(dataset.d());
    let mut stats = SweepStats::default();
    let order = schedule.next_sweep();
    for &k in order {
        let current = state.theta[k];
        let ops = &mut state.ops;
        let new = match &state.cache {
            Some(cache) => {
                let target = CachedConditional::new(model, dataset, cache, &state.theta, k);
                kernel_step(kernel, current, |v| target.eval(v, ops), &mut state.rng, &mut stats)?
            }
            None => {
                let target = NaiveConditional::new(model, dataset, &state.theta, k);
                kernel_step(kernel, current, |v| target.eval(v, ops), &mut state.rng, &mut stats)?
            }
        };
        stats.updates += 1;
        if new != current {
            stats.moved += 1;
            if let (Some(cache), Coordinate::Regression(j)) =
                (state.cache.as_mut(), layout.coordinate(k))
            {
                state.ops.commit_madds += cache.commit(dataset, j, current, new)?;
            }
            state.theta[k] = new;
        }
    }
    state.sweep_index += 1;
    if let Some(cache) = state.cache.as_mut() {
        cache.note_sweep();
        if state.refresh_interval > 0 && cache.refresh_counter() >= state.refresh_interval {
            state.ops.refresh_madds += cache.refresh(dataset, &state.theta)?;
        }
    }
    Ok(stats)
}

/// Everything that determines a chain besides model and data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Total sweeps including warmup.
    pub sweeps: usize,
    pub warmup: usize,
    pub schedule: ScheduleKind,
    pub kernel: Kernel,
    pub mode: ExecutionMode,
    pub seed: u64,
    /// Chain index within the seed; selects the random streams.
    pub chain: u64,
    pub refresh_interval: usize,
    /// Keep horseshoe latents in the trace as well as the coefficients.
    pub record_latents: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sweeps: 2000,
            warmup: 1000,
            schedule: ScheduleKind::Dugs,
            kernel: Kernel::default(),
            mode: ExecutionMode::Cached,
            seed: 1,
            chain: 0,
            refresh_interval: 100,
            record_latents: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup > self.sweeps {
            return Err(Error::InvalidArgument(format!(
                "warmup {} exceeds total sweeps {}",
                self.warmup, self.sweeps
            )));
        }
        match self.kernel {
            Kernel::Slice(cfg) => cfg.validate(),
            Kernel::Mh { step_sd } if !(step_sd > 0.0 && step_sd.is_finite()) => Err(
                Error::InvalidArgument(format!("MH step sd must be positive, got {step_sd}")),
            ),
            Kernel::Mh { .. } => Ok(()),
        }
    }
}

/// Runs `sweeps` sweeps from the default initial point and keeps the post-warmup draws.
///
/// A kernel failure stops the chain; the returned trace holds the draws so far and
/// is marked [`TraceStatus::Aborted`].
pub fn run_chain(model: &GlmModel, dataset: &Dataset, cfg: &RunConfig) -> Result<Trace> {
    cfg.validate()?;
    let layout = model.layout(dataset.d());
    let (kernel_rng, schedule_rng) = chain_streams(cfg.seed, cfg.chain);
    let mut state = ChainState::new(
        model,
        dataset,
        model.initial_parameters(dataset.d()),
        cfg.mode,
        kernel_rng,
    )?;
    state.refresh_interval = cfg.refresh_interval;
    let mut schedule = SweepSchedule::new(cfg.schedule, layout.dim(), schedule_rng);

    let kept_dim = if cfg.record_latents {
        layout.dim()
    } else {
        layout.d
    };
    let names = layout.names(|j| dataset.feature_name(j))[..kept_dim].to_vec();
    let mut trace = Trace::new(names, cfg.clone());
    trace.samples.reserve(cfg.sweeps - cfg.warmup);

    let start = Instant::now();
    for t in 0..cfg.sweeps {
        let before = state.ops.total_madds();
        let sweep_start = Instant::now();
        if let Err(e) = gibbs_sweep(model, dataset, &mut state, &mut schedule, &cfg.kernel) {
            log::warn!("chain aborted at sweep {t}: {e}");
            trace.status = TraceStatus::Aborted(e.to_string());
            break;
        }
        trace.sweep_seconds.push(sweep_start.elapsed().as_secs_f64());
        trace.sweep_madds.push(state.ops.total_madds() - before);
        if t >= cfg.warmup {
            trace.samples.push(state.theta[..kept_dim].to_vec());
            trace.kept_seconds += *trace.sweep_seconds.last().unwrap_or(&0.0);
        }
    }
    trace.total_seconds = start.elapsed().as_secs_f64();
    trace.op_counts = state.ops;
    Ok(trace)
}
