use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dugs::MomentRecursion;
use super::target::{spd_inverse, Gaussian, GaussianTarget};

const SQRT_CLAMP: f64 = 1e-14;

/// Principal square root of a symmetric PSD matrix.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|v| if v < SQRT_CLAMP { 0.0 } else { v.sqrt() });
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.transpose()
}

fn same_dims(p: &Gaussian, q: &Gaussian) -> Result<()> {
    let d = q.mean.len();
    if p.mean.len() != d || p.cov.shape() != (d, d) || q.cov.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: p.mean.len(),
            context: "Gaussian dimensions",
        });
    }
    Ok(())
}

/// `KL(p ‖ q)` for non-degenerate Gaussians.
pub fn gaussian_kl(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    same_dims(p, q)?;
    let d = q.mean.len() as f64;
    let chol_q = q
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd("second covariance".into()))?;
    let chol_p = p
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd("first covariance".into()))?;
    let diff = &q.mean - &p.mean;
    let trace_term = chol_q.solve(&p.cov).trace();
    let maha = diff.dot(&chol_q.solve(&diff));
    let logdet = |l: &DMatrix<f64>| 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let kl = 0.5 * (trace_term + maha - d + logdet(&chol_q.l()) - logdet(&chol_p.l()));
    Ok(kl.max(0.0))
}

/// 2-Wasserstein distance: `‖μ_p − μ_q‖² + tr(Σ_p + Σ_q − 2(Σ_q^{½} Σ_p Σ_q^{½})^{½})`,
/// square-rooted. `p` may be degenerate.
pub fn gaussian_w2(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    same_dims(p, q)?;
    let root_q = sym_sqrt(&q.cov);
    let cross = sym_sqrt(&(&root_q * &p.cov * &root_q));
    let bures = p.cov.trace() + q.cov.trace() - 2.0 * cross.trace();
    let mean = (&p.mean - &q.mean).norm_squared();
    Ok((mean + bures.max(0.0)).sqrt())
}

/// W2 between `N(μ + δ, Σ + E)` and the target `N(μ, Σ)`, computed from the
/// offsets `δ` and `E`.
///
/// In the eigenbasis of `Σ = diag(λ)`, with `X = ((Λ^{½}(Λ + E)Λ^{½})^{½} − Λ)`,
/// the Bures term equals `Σ_i (X²)_ii / λ_i`, a sum of non-negative terms that
/// stays accurate as `E → 0`. `X` solves `ΛX + XΛ + X² = Λ^{½}EΛ^{½}`, which is
/// iterated to a fixed point while `X` is small and taken from the direct square
/// root otherwise.
pub fn w2_from_offsets(target: &GaussianTarget, mean_offset: &DVector<f64>, cov_offset: &DMatrix<f64>) -> Result<f64> {
    let d = target.dim();
    if mean_offset.len() != d || cov_offset.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: mean_offset.len(),
            context: "moment offsets",
        });
    }
    let eig = target.sigma().clone().symmetric_eigen();
    let lambda = &eig.eigenvalues;
    if lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotSpd("target covariance".into()));
    }
    let v = &eig.eigenvectors;
    let e = v.transpose() * cov_offset * v;
    let e = (&e + e.transpose()) * 0.5;
    let rhs = DMatrix::from_fn(d, d, |i, j| (lambda[i] * lambda[j]).sqrt() * e[(i, j)]);
    let inv_sum = DMatrix::from_fn(d, d, |i, j| 1.0 / (lambda[i] + lambda[j]));
    let lambda_min = lambda.min();
    let mut x = rhs.component_mul(&inv_sum);
    let mut converged = false;
    if x.norm() < 0.25 * lambda_min {
        for _ in 0..200 {
            let next = (&rhs - &x * &x).component_mul(&inv_sum);
            let change = (&next - &x).norm();
            x = next;
            if change <= 1e-15 * x.norm() || x.norm() == 0.0 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        let root = DVector::from_fn(d, |i, _| lambda[i].sqrt());
        let shifted = DMatrix::from_fn(d, d, |i, j| {
            let base = if i == j { lambda[i] } else { 0.0 };
            root[i] * root[j] * (base + e[(i, j)])
        });
        x = sym_sqrt(&shifted) - DMatrix::from_diagonal(lambda);
    }
    let x2 = &x * &x;
    let bures: f64 = (0..d).map(|i| x2[(i, i)] / lambda[i]).sum();
    Ok((mean_offset.norm_squared() + bures.max(0.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Divergence {
    /// `sqrt(KL(π_t ‖ π) / 2)`, the Pinsker bound on total variation.
    KlBoundTv,
    W2,
}

impl std::str::FromStr for Divergence {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "w2" => Ok(Divergence::W2),
            "kl_bound_tv" | "tv" | "kl" => Ok(Divergence::KlBoundTv),
            other => Err(format!("unknown divergence {other:?} (w2|kl_bound_tv)")),
        }
    }
}

/// Divergence of `π_t` from the target. A degenerate `π_t` has infinite KL.
pub fn divergence_to_target(
    law: &Gaussian,
    target: &GaussianTarget,
    which: Divergence,
) -> Result<f64> {
    let pi = target.as_gaussian();
    match which {
        Divergence::W2 => gaussian_w2(law, &pi),
        Divergence::KlBoundTv => match gaussian_kl(law, &pi) {
            Ok(kl) => Ok((kl / 2.0).sqrt()),
            Err(Error::NotSpd(_)) if law.cov.clone().cholesky().is_none() => Ok(f64::INFINITY),
            Err(e) => Err(e),
        },
    }
}

/// Divergence from the target after `t = 0..=t_max` sweeps from `start`.
pub fn divergence_decay_curve(
    target: &GaussianTarget,
    start: &Gaussian,
    t_max: usize,
    which: Divergence,
) -> Result<Vec<f64>> {
    if t_max < 1 {
        return Err(Error::InvalidArgument("t_max must be at least 1".into()));
    }
    let _ = spd_inverse(target.sigma(), "target covariance")?;
    let mut rec = MomentRecursion::new(target, start)?;
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            rec.step();
        }
        out.push(recursion_divergence(&rec, target, which)?);
    }
    Ok(out)
}

/// Divergence of the recursion's current law, using the offset form for W2.
pub(crate) fn recursion_divergence(rec: &MomentRecursion, target: &GaussianTarget, which: Divergence) -> Result<f64> {
    match which {
        Divergence::W2 => w2_from_offsets(target, rec.mean_offset(), rec.cov_offset()),
        Divergence::KlBoundTv => divergence_to_target(&rec.current(), target, which),
    }
}

/// Least-squares slope of `log D_t` against `t` over the tail of a decay curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSlopeFit {
    pub slope: f64,
    pub t_start: usize,
    pub t_end: usize,
}

/// Fits on the second half of the stretch where the curve is finite and still above
/// `floor` times its largest finite value; below that round-off dominates.
pub fn fit_log_slope(curve: &[f64], floor: f64) -> Option<LogSlopeFit> {
    let peak = curve
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, |m, v| m.max(*v));
    if peak <= 0.0 {
        return None;
    }
    let first = curve.iter().position(|v| v.is_finite() && *v > 0.0)?;
    let mut last = first;
    while last + 1 < curve.len() && curve[last + 1] > floor * peak && curve[last + 1].is_finite() {
        last += 1;
    }
    let t_start = first + (last - first) / 2;
    if last < t_start + 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (t_start..=last).map(|t| (t as f64, curve[t].ln())).collect();
    Some(LogSlopeFit {
        slope: ols_slope(&pts),
        t_start,
        t_end: last,
    })
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
