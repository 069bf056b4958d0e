//! One module per subcommand. Each exposes a config parsed from [`Params`], a
//! pure driver returning results, and a writer for the CSV and JSON files.
//!
//! [`Params`]: crate::config::Params

pub mod cond_scaling;
pub mod ess_scaling;
pub mod irrelevant;
pub mod run;
pub mod sweep_scaling;
pub mod theory_check;

use crate::common::na;
use crate::config::Params;
use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    SweepScaling,
    EssScaling,
    IrrelevantFeatures,
    CondScaling,
    TheoryCheck,
    Run,
}

impl Command {
    /// Config section read by this command.
    pub fn section(self) -> &'static str {
        match self {
            Command::SweepScaling => "sweep_scaling",
            Command::EssScaling => "ess_scaling",
            Command::IrrelevantFeatures => "irrelevant_features",
            Command::CondScaling => "cond_scaling",
            Command::TheoryCheck => "theory_check",
            Command::Run => "run",
        }
    }
}

/// Runs `command`, writes its outputs and returns a one-paragraph summary.
pub fn execute(command: Command, p: &Params) -> BenchResult<String> {
    match command {
        Command::SweepScaling => {
            let cfg = sweep_scaling::SweepScalingConfig::from_params(p)?;
            let r = sweep_scaling::sweep_scaling(&cfg)?;
            sweep_scaling::write_outputs(&cfg, &r)?;
            let fits: Vec<String> = r
                .fits
                .iter()
                .map(|(m, f)| format!("{m}: madds slope {}", na(f.madds_slope)))
                .collect();
            let failed = r.cells.iter().filter(|c| c.error.is_some()).count();
            if failed > 0 {
                return Err(BenchError::Runtime(format!("{failed} cells failed; see sweep_scaling.csv")));
            }
            Ok(fits.join("\n"))
        }
        Command::EssScaling => {
            let cfg = ess_scaling::EssScalingConfig::from_params(p)?;
            let r = ess_scaling::ess_scaling(&cfg)?;
            ess_scaling::write_outputs(&cfg, &r)?;
            let unreliable = r.cells.iter().filter(|c| c.ess.unreliable).count();
            Ok(format!(
                "{} cells ({} unreliable); tail slope of sweeps per median ESS: {}",
                r.cells.len(),
                unreliable,
                na(r.tail_slope)
            ))
        }
        Command::IrrelevantFeatures => {
            let cfg = irrelevant::IrrelevantConfig::from_params(p)?;
            let r = irrelevant::irrelevant_features(&cfg)?;
            irrelevant::write_outputs(&cfg, &r)?;
            Ok(r.contrasts
                .iter()
                .map(|c| {
                    format!(
                        "scenario {}: d {} -> {}: median ESS/sweep x{}, min ESS/sweep x{}, median-only gain: {}",
                        c.scenario,
                        c.d_from,
                        c.d_to,
                        na(c.median_ess_gain),
                        na(c.min_ess_gain),
                        c.median_only_gain.map_or_else(|| "NA".into(), |b| b.to_string())
                    )
                })
                .collect::<Vec<_>>()
                .join("\n"))
        }
        Command::CondScaling => {
            let cfg = cond_scaling::CondScalingConfig::from_params(p)?;
            let r = cond_scaling::cond_scaling(&cfg)?;
            cond_scaling::write_outputs(&cfg, &r)?;
            if !r.all_orderings_hold {
                return Err(BenchError::CheckFailed(
                    "condition-number ordering violated; see cond_scaling.csv".into(),
                ));
            }
            Ok(format!(
                "kappa slope up to n: {}, beyond n: {}",
                na(r.trend.slope_up_to_n),
                na(r.trend.slope_beyond_n)
            ))
        }
        Command::TheoryCheck => {
            let cfg = theory_check::TheoryCheckConfig::from_params(p)?;
            let r = theory_check::theory_check(&cfg)?;
            theory_check::write_outputs(&cfg, &r)?;
            if !r.failures.is_empty() {
                return Err(BenchError::CheckFailed(r.failures.join("\n")));
            }
            Ok(format!(
                "{} rate-bound and {} rescaling instances passed",
                r.rate.len(),
                r.rescaling.len()
            ))
        }
        Command::Run => {
            let cfg = run::RunCommandConfig::from_params(p)?;
            let out = run::run(&cfg)?;
            run::write_outputs(&cfg, &out)?;
            Ok(match &out.report {
                Some(r) => format!(
                    "{} kept sweeps; min ESS {}, median ESS {}",
                    r.t_kept,
                    na(r.min_ess),
                    na(r.median_ess)
                ),
                None => format!("{} kept sweeps; no ESS report", out.trace.n_kept()),
            })
        }
    }
}
