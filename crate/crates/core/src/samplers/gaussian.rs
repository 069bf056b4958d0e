use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::theory::GaussianTarget;

use super::schedule::SweepSchedule;

/// Exact draw of `θ_j` from its Gaussian full conditional:
/// mean `μ_j − Q_jj⁻¹ Σ_{k≠j} Q_jk (θ_k − μ_k)`, variance `Q_jj⁻¹`.
pub fn exact_gaussian_gibbs_update<R: Rng + ?Sized>(
    target: &GaussianTarget,
    theta: &[f64],
    j: usize,
    rng: &mut R,
) -> Result<f64> {
    let d = target.dim();
    if theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: theta.len(),
            context: "Gaussian Gibbs state",
        });
    }
    if j >= d {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: d,
            context: "Gaussian Gibbs coordinate",
        });
    }
    let (mean, var) = gaussian_conditional(target, theta, j)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + var.sqrt() * z)
}

/// Mean and variance of `θ_j | θ_{−j}`.
pub fn gaussian_conditional(target: &GaussianTarget, theta: &[f64], j: usize) -> Result<(f64, f64)> {
    let q = target.precision();
    let mu = target.mu();
    let qjj = q[(j, j)];
    if !(qjj > 0.0) {
        return Err(Error::NotSpd(format!("precision diagonal {j} is {qjj}")));
    }
    let s: f64 = (0..theta.len())
        .filter(|&k| k != j)
        .map(|k| q[(j, k)] * (theta[k] - mu[k]))
        .sum();
    Ok((mu[j] - s / qjj, 1.0 / qjj))
}

/// Runs `sweeps` exact Gibbs sweeps from `start`, returning every post-sweep state.
pub fn run_exact_gaussian_chain<R: Rng + ?Sized>(
    target: &GaussianTarget,
    start: &DVector<f64>,
    schedule: &mut SweepSchedule,
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mut theta: Vec<f64> = start.iter().copied().collect();
    let mut out = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        for &j in schedule.next_sweep() {
            theta[j] = exact_gaussian_gibbs_update(target, &theta, j, rng)?;
        }
        out.push(theta.clone());
    }
    Ok(out)
}
