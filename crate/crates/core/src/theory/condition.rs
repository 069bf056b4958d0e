use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::ChainRng;

use super::target::symmetrized;

fn eigen_range(sigma: &DMatrix<f64>) -> Result<(f64, f64)> {
    let s = symmetrized(sigma, "covariance")?;
    let ev = s.symmetric_eigen().eigenvalues;
    let lo = ev.min();
    let hi = ev.max();
    if !(lo > 0.0) {
        return Err(Error::NotSpd(format!("smallest eigenvalue is {lo:e}")));
    }
    Ok((lo, hi))
}

/// `λ_max / λ_min`.
pub fn kappa(sigma: &DMatrix<f64>) -> Result<f64> {
    let (lo, hi) = eigen_range(sigma)?;
    Ok(hi / lo)
}

fn scaled(sigma: &DMatrix<f64>, diag: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(sigma.nrows(), sigma.ncols(), |i, j| {
        sigma[(i, j)] * diag[i] * diag[j]
    })
}

/// Condition number of the correlation matrix.
pub fn kappa_cor(sigma: &DMatrix<f64>) -> Result<f64> {
    let d = sigma.nrows();
    if let Some(i) = (0..d).find(|&i| !(sigma[(i, i)] > 0.0)) {
        return Err(Error::NotSpd(format!("variance {i} is {}", sigma[(i, i)])));
    }
    let inv_sd: Vec<f64> = (0..d).map(|i| sigma[(i, i)].sqrt().recip()).collect();
    kappa(&scaled(sigma, &inv_sd))
}

/// Best diagonal rescaling found for the residual condition number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCondition {
    /// `κ(DΣD)` at the best `D` found: an upper bound on the infimum over diagonals.
    pub value: f64,
    /// `log D_ii` at the optimum.
    pub log_scaling: Vec<f64>,
    pub evaluations: usize,
}

/// Upper bound on `inf_D κ(DΣD)` over positive diagonal `D`.
///
/// Nelder–Mead on `s ↦ log κ(e^s Σ e^s)` from five starts: no scaling, inverse and
/// direct marginal sds, two random points. The first two starts make the result at
/// most `min(κ, κ_cor)`. `budget` caps iterations per start.
pub fn kappa_r(sigma: &DMatrix<f64>, budget: usize) -> Result<ResidualCondition> {
    let k = kappa(sigma)?;
    let d = sigma.nrows();
    let log_sd: Vec<f64> = (0..d).map(|i| 0.5 * sigma[(i, i)].ln()).collect();
    if d == 1 {
        return Ok(ResidualCondition {
            value: 1.0,
            log_scaling: vec![-log_sd[0]],
            evaluations: 1,
        });
    }
    let objective = |s: &[f64]| -> f64 {
        let diag: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        match eigen_range(&scaled(sigma, &diag)) {
            Ok((lo, hi)) => (hi / lo).ln(),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChainRng::seed_from_u64(0x6b61_7070_615f_72 ^ d as u64);
    let mut starts = vec![
        vec![0.0; d],
        log_sd.iter().map(|v| -v).collect::<Vec<_>>(),
        log_sd.clone(),
    ];
    for _ in 0..2 {
        starts.push((0..d).map(|_| StandardNormal.sample(&mut rng)).collect());
    }

    let mut best = (k.ln(), vec![0.0; d]);
    let mut evaluations = 0;
    for start in starts {
        let res = nelder_mead(&objective, &start, 0.5, budget, 1e-13);
        evaluations += res.evaluations;
        if res.value < best.0 {
            best = (res.value, res.point);
        }
    }
    Ok(ResidualCondition {
        value: best.0.exp().max(1.0),
        log_scaling: best.1,
        evaluations,
    })
}

pub(crate) struct Minimum {
    pub value: f64,
    pub point: Vec<f64>,
    pub evaluations: usize,
}

/// Derivative-free simplex minimization. The returned value never exceeds `f(x0)`.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &DVector<f64>| {
        evaluations += 1;
        let v = f(x.as_slice());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    let origin = DVector::from_column_slice(x0);
    let f0 = eval(&origin);
    simplex.push((origin.clone(), f0));
    for i in 0..n {
        let mut p = origin.clone();
        p[i] += step;
        let fp = eval(&p);
        simplex.push((p, fp));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= ftol * (1.0 + best.abs()) {
            break;
        }
        let centroid = simplex[..n]
            .iter()
            .fold(DVector::zeros(n), |acc, (p, _)| acc + p)
            / n as f64;
        let reflect = &centroid + (&centroid - &simplex[n].0);
        let fr = eval(&reflect);
        if fr < simplex[0].1 {
            let expand = &centroid + (&reflect - &centroid) * 2.0;
            let fe = eval(&expand);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let (towards, ft) = if fr < simplex[n].1 {
                (reflect, fr)
            } else {
                (simplex[n].0.clone(), simplex[n].1)
            };
            let contract = &centroid + (&towards - &centroid) * 0.5;
            let fc = eval(&contract);
            if fc < ft {
                simplex[n] = (contract, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p = &anchor + (&item.0 - &anchor) * 0.5;
                    let fp = eval(&p);
                    *item = (p, fp);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Minimum {
        value,
        point: point.as_slice().to_vec(),
        evaluations,
    }
}
