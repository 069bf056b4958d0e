use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dataset::{Dataset, DesignMatrix};
use super::model::{Coordinate, GlmModel, Likelihood, PriorConditional};

/// Instrumented operation counts, the machine-independent cost measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    /// Multiply-adds spent forming linear predictors for target evaluations.
    pub predictor_madds: u64,
    /// Multiply-adds spent folding accepted moves into the cache.
    pub commit_madds: u64,
    /// Multiply-adds spent on full cache rebuilds.
    pub refresh_madds: u64,
    /// Number of conditional log-density evaluations.
    pub target_evals: u64,
}

impl OpCounts {
    pub fn total_madds(&self) -> u64 {
        self.predictor_madds + self.commit_madds + self.refresh_madds
    }

    pub fn add(&mut self, other: &OpCounts) {
        self.predictor_madds += other.predictor_madds;
        self.commit_madds += other.commit_madds;
        self.refresh_madds += other.refresh_madds;
        self.target_evals += other.target_evals;
    }
}

/// Cached linear predictors `x_i · θ`, one per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictorCache {
    values: Vec<f64>,
    refresh_counter: usize,
}

fn check_regression_len(dataset: &Dataset, theta: &[f64]) -> Result<()> {
    if theta.len() < dataset.d() {
        return Err(Error::DimensionMismatch {
            expected: dataset.d(),
            actual: theta.len(),
            context: "regression block of parameter vector",
        });
    }
    Ok(())
}

impl LinearPredictorCache {
    /// One-time O(dn) build. Only the first `d` entries of `theta` are read, so a
    /// horseshoe vector with trailing latents can be passed directly.
    pub fn init(dataset: &Dataset, theta: &[f64]) -> Result<Self> {
        check_regression_len(dataset, theta)?;
        let mut values = vec![0.0; dataset.n()];
        dataset.x().mul_vec_into(&theta[..dataset.d()], &mut values);
        Ok(LinearPredictorCache {
            values,
            refresh_counter: 0,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn refresh_counter(&self) -> usize {
        self.refresh_counter
    }

    pub(crate) fn note_sweep(&mut self) {
        self.refresh_counter += 1;
    }

    /// `cache[i] − θ_j x_ij + θ'_j x_ij`, written as `cache[i] + x_ij (θ'_j − θ_j)`:
    /// one multiply-add.
    pub fn proposed_linear_predictor(
        &self,
        dataset: &Dataset,
        i: usize,
        j: usize,
        theta_j: f64,
        theta_j_new: f64,
    ) -> Result<f64> {
        check_index(i, dataset.n(), "observation")?;
        check_index(j, dataset.d(), "feature")?;
        Ok(self.values[i] + dataset.x().get(i, j) * (theta_j_new - theta_j))
    }

    /// Folds an accepted move of coordinate `j` into the cache. Touches only the
    /// stored entries of column `j`; returns the number of multiply-adds.
    pub fn commit(
        &mut self,
        dataset: &Dataset,
        j: usize,
        theta_j: f64,
        theta_j_new: f64,
    ) -> Result<u64> {
        check_index(j, dataset.d(), "feature")?;
        let delta = theta_j_new - theta_j;
        if delta == 0.0 {
            return Ok(0);
        }
        let mut madds = 0;
        for (i, x) in dataset.x().column(j) {
            if x != 0.0 {
                self.values[i] += x * delta;
            }
            madds += 1;
        }
        Ok(madds)
    }

    /// Full rebuild from `θ` to shed accumulated rounding; resets the sweep counter.
    pub fn refresh(&mut self, dataset: &Dataset, theta: &[f64]) -> Result<u64> {
        check_regression_len(dataset, theta)?;
        if self.values.len() != dataset.n() {
            return Err(Error::DimensionMismatch {
                expected: dataset.n(),
                actual: self.values.len(),
                context: "cache length",
            });
        }
        dataset
            .x()
            .mul_vec_into(&theta[..dataset.d()], &mut self.values);
        self.refresh_counter = 0;
        Ok(dataset.x().stored_len() as u64)
    }

    /// Largest relative deviation `|cache_i − x_i·θ| / (1 + |x_i·θ|)` from a fresh product.
    pub fn max_relative_drift(&self, dataset: &Dataset, theta: &[f64]) -> Result<f64> {
        let fresh = Self::init(dataset, theta)?;
        Ok(self
            .values
            .iter()
            .zip(&fresh.values)
            .map(|(c, f)| (c - f).abs() / (1.0 + f.abs()))
            .fold(0.0, f64::max))
    }
}

fn check_index(index: usize, len: usize, context: &'static str) -> Result<()> {
    if index >= len {
        Err(Error::IndexOutOfRange {
            index,
            len,
            context,
        })
    } else {
        Ok(())
    }
}

/// Conditional log density of one coordinate, evaluated through the cache.
///
/// Built once per coordinate update. For sparse columns the likelihood of the
/// rows outside the column is summed at construction, so each evaluation costs
/// one multiply-add per stored entry of the column.
pub struct CachedConditional<'a> {
    likelihood: Likelihood,
    x: &'a DesignMatrix,
    y: &'a [u8],
    cache: &'a [f64],
    column: Option<usize>,
    current: f64,
    rest: f64,
    prior: PriorConditional,
}

impl<'a> CachedConditional<'a> {
    pub fn new(
        model: &GlmModel,
        dataset: &'a Dataset,
        cache: &'a LinearPredictorCache,
        theta: &[f64],
        k: usize,
    ) -> Self {
        let layout = model.layout(dataset.d());
        let prior = PriorConditional::new(model, layout, theta, k);
        let column = match layout.coordinate(k) {
            Coordinate::Regression(j) if model.likelihood.is_informative() => Some(j),
            _ => None,
        };
        let mut rest = 0.0;
        if let Some(j) = column {
            if dataset.x().is_sparse() {
                let mut in_column = vec![false; dataset.n()];
                for (i, _) in dataset.x().column(j) {
                    in_column[i] = true;
                }
                for (i, &y) in dataset.y().iter().enumerate() {
                    if !in_column[i] {
                        rest += model.likelihood.term(y, cache.values[i]);
                    }
                }
            }
        }
        CachedConditional {
            likelihood: model.likelihood,
            x: dataset.x(),
            y: dataset.y(),
            cache: &cache.values,
            column,
            current: theta[k],
            rest,
            prior,
        }
    }

    #[inline]
    pub fn eval(&self, value: f64, ops: &mut OpCounts) -> f64 {
        ops.target_evals += 1;
        let mut total = self.prior.eval(value);
        if let Some(j) = self.column {
            let delta = value - self.current;
            let mut ll = self.rest;
            if delta == 0.0 {
                // the cached predictors are already the answer
                for (i, _) in self.x.column(j) {
                    ll += self.likelihood.term(self.y[i], self.cache[i]);
                }
            } else {
                let mut madds = 0;
                for (i, x) in self.x.column(j) {
                    let eta = self.cache[i] + x * delta;
                    ll += self.likelihood.term(self.y[i], eta);
                    madds += 1;
                }
                ops.predictor_madds += madds;
            }
            total += ll;
        }
        total
    }
}

/// Conditional log density recomputing every `x_i · θ` from scratch: O(dn) per evaluation.
pub struct NaiveConditional<'a> {
    likelihood: Likelihood,
    dataset: &'a Dataset,
    k: usize,
    informative: bool,
    theta: Vec<f64>,
    predictors: std::cell::RefCell<Vec<f64>>,
    prior: PriorConditional,
}

impl<'a> NaiveConditional<'a> {
    pub fn new(model: &GlmModel, dataset: &'a Dataset, theta: &[f64], k: usize) -> Self {
        let layout = model.layout(dataset.d());
        NaiveConditional {
            likelihood: model.likelihood,
            dataset,
            k,
            informative: model.likelihood.is_informative()
                && matches!(layout.coordinate(k), Coordinate::Regression(_)),
            theta: theta[..dataset.d()].to_vec(),
            predictors: std::cell::RefCell::new(vec![0.0; dataset.n()]),
            prior: PriorConditional::new(model, layout, theta, k),
        }
    }

    pub fn eval(&self, value: f64, ops: &mut OpCounts) -> f64 {
        ops.target_evals += 1;
        let mut total = self.prior.eval(value);
        if self.informative {
            let x = self.dataset.x();
            let n = self.dataset.n();
            let mut eta = self.predictors.borrow_mut();
            eta.iter_mut().for_each(|e| *e = 0.0);
            for (col, &t) in self.theta.iter().enumerate() {
                let t = if col == self.k { value } else { t };
                x.add_scaled_column(col, t, &mut eta);
            }
            ops.predictor_madds += x.stored_len() as u64;
            let mut ll = 0.0;
            for i in 0..n {
                ll += self.likelihood.term(self.dataset.y()[i], eta[i]);
            }
            total += ll;
        }
        total
    }
}

/// `log π_{k|−k}(θ'_k)` up to an additive constant, through the cache.
///
/// Regression coordinates return the full log likelihood at the proposed point plus
/// the prior terms involving the coordinate; latent scale coordinates return prior
/// terms only. Debug builds spot-check one cached row against a fresh dot product.
pub fn conditional_logdensity(
    model: &GlmModel,
    dataset: &Dataset,
    cache: &LinearPredictorCache,
    k: usize,
    theta: &[f64],
    theta_k_new: f64,
) -> Result<f64> {
    let layout = model.layout(dataset.d());
    layout.check(theta)?;
    check_index(k, layout.dim(), "coordinate")?;
    if cache.values.len() != dataset.n() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n(),
            actual: cache.values.len(),
            context: "cache length",
        });
    }
    if cfg!(debug_assertions) {
        spot_check(dataset, cache, theta, k % dataset.n())?;
    }
    let target = CachedConditional::new(model, dataset, cache, theta, k);
    Ok(target.eval(theta_k_new, &mut OpCounts::default()))
}

/// Same quantity as [`conditional_logdensity`] without the cache.
pub fn naive_conditional_logdensity(
    model: &GlmModel,
    dataset: &Dataset,
    k: usize,
    theta: &[f64],
    theta_k_new: f64,
) -> Result<f64> {
    let layout = model.layout(dataset.d());
    layout.check(theta)?;
    check_index(k, layout.dim(), "coordinate")?;
    let target = NaiveConditional::new(model, dataset, theta, k);
    Ok(target.eval(theta_k_new, &mut OpCounts::default()))
}

fn spot_check(dataset: &Dataset, cache: &LinearPredictorCache, theta: &[f64], row: usize) -> Result<()> {
    let fresh: f64 = (0..dataset.d())
        .map(|j| dataset.x().get(row, j) * theta[j])
        .sum();
    let cached = cache.values[row];
    if (cached - fresh).abs() > 1e-6 * (1.0 + fresh.abs()) {
        return Err(Error::InconsistentCache { row, cached, fresh });
    }
    Ok(())
}
