use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{Error, Result};

/// Random-walk Metropolis update of a scalar: Gaussian proposal with standard
/// deviation `step_sd`, accepted with probability `min(1, exp(Δ log f))`.
///
/// Returns the new value and whether the proposal was accepted.
pub fn mh_update<R, F>(x0: f64, mut log_f: F, step_sd: f64, rng: &mut R) -> Result<(f64, bool)>
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    if !(step_sd > 0.0 && step_sd.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "MH step sd must be positive, got {step_sd}"
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    let proposal = x0 + step_sd * z;
    let u: f64 = Open01.sample(rng);
    let f0 = log_f(x0);
    if !f0.is_finite() {
        return Err(Error::NonFinite {
            value: f0,
            context: format!("MH target at current point {x0}"),
        });
    }
    let f1 = log_f(proposal);
    if f1.is_nan() {
        return Ok((x0, false));
    }
    let accept = u <= (f1 - f0).exp();
    Ok(if accept { (proposal, true) } else { (x0, false) })
}
