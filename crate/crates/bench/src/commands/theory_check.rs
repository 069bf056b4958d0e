use std::path::PathBuf;

use cggibbs::rng::{derive_seed, stream_rng};
use cggibbs::samplers::config_hash;
use cggibbs::theory::{
    divergence_decay_curve, fit_log_slope, rate_bound_check, rate_bound_check_target, rescaling_invariance_check,
    random_m_matrix_target, random_spd, Divergence, Gaussian, GaussianTarget,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{ensure_dir, na, require, thread_pool, write_json, Table};
use crate::config::Params;
use crate::error::BenchResult;

/// Slack on `ρ(B) ≤ exp(−1/κ)`.
pub const RATE_BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct TheoryCheckConfig {
    pub instances: usize,
    pub d_max: usize,
    pub rescaling_instances: usize,
    pub rescaling_d_max: usize,
    pub rescaling_tol: f64,
    /// Decay slopes are checked only where `ρ(B)` exceeds this.
    pub slope_min_rho: f64,
    pub slope_rel_tol: f64,
    /// Slope fits ignore divergences below this fraction of the initial one.
    pub slope_floor: f64,
    /// Initial mean offset in marginal standard deviations.
    pub start_offset: f64,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl TheoryCheckConfig {
    pub fn from_params(p: &Params) -> BenchResult<Self> {
        let cfg = TheoryCheckConfig {
            instances: p.get("instances", 200)?,
            d_max: p.get("d_max", 10)?,
            rescaling_instances: p.get("rescaling_instances", 100)?,
            rescaling_d_max: p.get("rescaling_d_max", 8)?,
            rescaling_tol: p.get("rescaling_tol", 1e-8)?,
            slope_min_rho: p.get("slope_min_rho", 0.1)?,
            slope_rel_tol: p.get("slope_rel_tol", 0.02)?,
            slope_floor: p.get("slope_floor", 1e-10)?,
            start_offset: p.get("start_offset", 10.0)?,
            seed: p.get("seed", 1)?,
            out_dir: p.get("out_dir", PathBuf::from("results"))?,
        };
        p.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> BenchResult<()> {
        require(self.instances > 0, || "empty suite: instances must be >= 1".into())?;
        require(self.d_max >= 2 && self.rescaling_d_max >= 2, || "dimension caps must be >= 2".into())?;
        require(self.slope_floor > 0.0 && self.slope_floor < 1.0, || "slope_floor must lie in (0, 1)".into())
    }
}

impl Default for TheoryCheckConfig {
    fn default() -> Self {
        TheoryCheckConfig {
            instances: 200,
            d_max: 10,
            rescaling_instances: 100,
            rescaling_d_max: 8,
            rescaling_tol: 1e-8,
            slope_min_rho: 0.1,
            slope_rel_tol: 0.02,
            slope_floor: 1e-10,
            start_offset: 10.0,
            seed: 1,
            out_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateInstance {
    pub instance: usize,
    pub seed: u64,
    pub d: usize,
    pub rho: f64,
    pub kappa: f64,
    pub bound: f64,
    pub bound_holds: bool,
    /// Fitted log-slope of the W2 decay; absent when `ρ(B)` is below the cutoff.
    pub slope: Option<f64>,
    pub slope_rel_error: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RescalingInstance {
    pub instance: usize,
    pub seed: u64,
    pub d: usize,
    pub rho: f64,
    pub rho_rescaled: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryCheckResult {
    pub config_hash: String,
    pub fixture_rho: f64,
    pub fixture_bound: f64,
    pub rate: Vec<RateInstance>,
    pub rescaling: Vec<RescalingInstance>,
    pub failures: Vec<String>,
}

/// Point mass `start_offset` marginal sds away from the mean in a random direction.
pub fn offset_start<R: Rng + ?Sized>(target: &GaussianTarget, start_offset: f64, rng: &mut R) -> Gaussian {
    let d = target.dim();
    let sigma = target.sigma();
    let shift = DVector::from_fn(d, |j, _| {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sign * rng.random_range(0.5..1.5) * start_offset * sigma[(j, j)].sqrt()
    });
    Gaussian {
        mean: target.mu() + shift,
        cov: DMatrix::zeros(d, d),
    }
}

/// Sweeps needed for a geometric decay at rate `rho` to fall by `floor` squared.
fn horizon(rho: f64, floor: f64) -> usize {
    let t = 2.0 * floor.ln() / rho.ln();
    (t.ceil() as usize).clamp(40, 50_000)
}

fn rate_instance(cfg: &TheoryCheckConfig, i: usize) -> RateInstance {
    let seed = derive_seed(cfg.seed, &[1, i as u64]);
    let mut rng = stream_rng(seed, 0);
    let d = rng.random_range(2..=cfg.d_max);
    let mut run = || -> cggibbs::Result<RateInstance> {
        let target = random_m_matrix_target(d, &mut rng)?;
        let check = rate_bound_check_target(&target)?;
        let (slope, rel) = if check.rho > cfg.slope_min_rho {
            let start = offset_start(&target, cfg.start_offset, &mut rng);
            let curve = divergence_decay_curve(&target, &start, horizon(check.rho, cfg.slope_floor), Divergence::W2)?;
            match fit_log_slope(&curve, cfg.slope_floor) {
                Some(fit) => (Some(fit.slope), Some((fit.slope / check.rho.ln() - 1.0).abs())),
                None => (None, None),
            }
        } else {
            (None, None)
        };
        let slope_ok = check.rho <= cfg.slope_min_rho || rel.is_some_and(|r| r <= cfg.slope_rel_tol);
        Ok(RateInstance {
            instance: i,
            seed,
            d,
            rho: check.rho,
            kappa: check.kappa,
            bound: check.bound,
            bound_holds: check.rho <= check.bound + RATE_BOUND_TOL,
            slope,
            slope_rel_error: rel,
            passed: check.rho <= check.bound + RATE_BOUND_TOL && slope_ok,
            error: None,
        })
    };
    run().unwrap_or_else(|e| RateInstance {
        instance: i,
        seed,
        d,
        rho: f64::NAN,
        kappa: f64::NAN,
        bound: f64::NAN,
        bound_holds: false,
        slope: None,
        slope_rel_error: None,
        passed: false,
        error: Some(e.to_string()),
    })
}

fn rescaling_instance(cfg: &TheoryCheckConfig, i: usize) -> RescalingInstance {
    let seed = derive_seed(cfg.seed, &[2, i as u64]);
    let mut rng = stream_rng(seed, 0);
    let d = rng.random_range(2..=cfg.rescaling_d_max);
    let sigma = random_spd(d, 1.0, &mut rng);
    let diag: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect();
    match rescaling_invariance_check(&sigma, &diag) {
        Ok((rho, rho_rescaled)) => RescalingInstance {
            instance: i,
            seed,
            d,
            rho,
            rho_rescaled,
            passed: (rho - rho_rescaled).abs() <= cfg.rescaling_tol,
            error: None,
        },
        Err(e) => RescalingInstance {
            instance: i,
            seed,
            d,
            rho: f64::NAN,
            rho_rescaled: f64::NAN,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

/// Randomized rate-bound, decay-slope and rescaling-invariance suites.
pub fn theory_check(cfg: &TheoryCheckConfig) -> BenchResult<TheoryCheckResult> {
    cfg.validate()?;
    let hash = config_hash(cfg);
    let fixture = rate_bound_check(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]))?;
    let pool = thread_pool()?;
    let rate: Vec<RateInstance> =
        pool.install(|| (0..cfg.instances).into_par_iter().map(|i| rate_instance(cfg, i)).collect());
    let rescaling: Vec<RescalingInstance> = pool.install(|| {
        (0..cfg.rescaling_instances)
            .into_par_iter()
            .map(|i| rescaling_instance(cfg, i))
            .collect()
    });
    let mut failures = Vec::new();
    for r in rate.iter().filter(|r| !r.passed) {
        failures.push(format!(
            "rate instance {} (seed {}, d={}): rho={} bound={} slope_rel_error={} {}",
            r.instance,
            r.seed,
            r.d,
            r.rho,
            r.bound,
            na(r.slope_rel_error),
            r.error.clone().unwrap_or_default()
        ));
    }
    for r in rescaling.iter().filter(|r| !r.passed) {
        failures.push(format!(
            "rescaling instance {} (seed {}, d={}): rho={} rescaled={} {}",
            r.instance,
            r.seed,
            r.d,
            r.rho,
            r.rho_rescaled,
            r.error.clone().unwrap_or_default()
        ));
    }
    Ok(TheoryCheckResult {
        config_hash: hash,
        fixture_rho: fixture.rho,
        fixture_bound: fixture.bound,
        rate,
        rescaling,
        failures,
    })
}

pub fn write_outputs(cfg: &TheoryCheckConfig, result: &TheoryCheckResult) -> BenchResult<()> {
    ensure_dir(&cfg.out_dir)?;
    let mut table = Table::new(&[
        "suite",
        "instance",
        "seed",
        "d",
        "rho",
        "kappa",
        "bound",
        "rho_rescaled",
        "slope",
        "slope_rel_error",
        "passed",
    ]);
    for r in &result.rate {
        table.push(vec![
            "rate_bound".into(),
            r.instance.to_string(),
            r.seed.to_string(),
            r.d.to_string(),
            r.rho.to_string(),
            r.kappa.to_string(),
            r.bound.to_string(),
            "NA".into(),
            na(r.slope),
            na(r.slope_rel_error),
            r.passed.to_string(),
        ]);
    }
    for r in &result.rescaling {
        table.push(vec![
            "rescaling".into(),
            r.instance.to_string(),
            r.seed.to_string(),
            r.d.to_string(),
            r.rho.to_string(),
            "NA".into(),
            "NA".into(),
            r.rho_rescaled.to_string(),
            "NA".into(),
            "NA".into(),
            r.passed.to_string(),
        ]);
    }
    table.write(&cfg.out_dir.join("theory_check.csv"), &result.config_hash)?;
    write_json(&cfg.out_dir.join("theory_check_summary.json"), &serde_json::json!({
        "config_hash": result.config_hash,
        "config": cfg,
        "fixture": { "rho": result.fixture_rho, "bound": result.fixture_bound },
        "rate_instances": result.rate.len(),
        "rescaling_instances": result.rescaling.len(),
        "failures": result.failures,
    }))
}
