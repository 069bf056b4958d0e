use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::{divergence_to_target, recursion_divergence, Divergence, Gaussian, GaussianTarget, MomentRecursion};

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rate must lie in [0, 1), got {rho}")));
    }
    Ok(())
}

/// Lower bound on relative ESS from a total-variation contraction rate `ρ` with
/// constant `C`: `1 / (1 + (4C / π(f²)) · ρ / (1 − ρ))`.
pub fn relative_ess_lower_bound_tv(rho: f64, c: f64, pi_f2: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("constant C must be >= 0, got {c}")));
    }
    if !(pi_f2 > 0.0 && pi_f2.is_finite()) {
        return Err(Error::InvalidArgument(format!("π(f²) must be > 0, got {pi_f2}")));
    }
    Ok(1.0 / (1.0 + (4.0 * c / pi_f2) * rho / (1.0 - rho)))
}

/// Lower bound on relative ESS from an L² (χ²) contraction rate `ρ`:
/// `1 / (1 + 2√ρ / (1 − √ρ))`.
pub fn relative_ess_lower_bound_chi2(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let s = rho.sqrt();
    Ok(1.0 / (1.0 + 2.0 * s / (1.0 - s)))
}

/// Both bounds at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEssBound {
    pub rho: f64,
    pub bound_tv: f64,
    pub bound_chi2: f64,
}

impl RateEssBound {
    pub fn new(rho: f64, c: f64, pi_f2: f64) -> Result<Self> {
        Ok(RateEssBound {
            rho,
            bound_tv: relative_ess_lower_bound_tv(rho, c, pi_f2)?,
            bound_chi2: relative_ess_lower_bound_chi2(rho)?,
        })
    }
}

/// Smallest number of deterministic-scan sweeps after which the chosen divergence
/// from the target is at most `epsilon`.
///
/// An upper bracket is found by doubling `t` (moments by matrix powers), then the
/// sweeps up to it are scanned with the one-step recursion.
pub fn gaussian_mixing_time(
    target: &GaussianTarget,
    start: &Gaussian,
    epsilon: f64,
    which: Divergence,
    max_sweeps: u64,
) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let at = |t: u64| -> Result<f64> {
        let law = crate::theory::dugs_moments(target, start, t)?;
        divergence_to_target(&law, target, which)
    };
    if at(0)? <= epsilon {
        return Ok(0);
    }
    let mut hi = 1u64;
    while at(hi)? > epsilon {
        if hi >= max_sweeps {
            return Err(Error::NoConvergence {
                iterations: max_sweeps as usize,
                context: format!("divergence still above {epsilon}"),
            });
        }
        hi = (hi * 2).min(max_sweeps);
    }
    let mut rec = MomentRecursion::new(target, start)?;
    for t in 1..=hi {
        rec.step();
        if recursion_divergence(&rec, target, which)? <= epsilon {
            return Ok(t);
        }
    }
    Ok(hi)
}
