use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

use super::dataset::Dataset;

const LN_2PI: f64 = 1.837_877_066_409_345_3;
const LN_PI: f64 = 1.144_729_885_849_400_2;
/// ln Γ(3/2) = ln(√π / 2)
const LN_GAMMA_3_2: f64 = -0.120_782_237_635_245_22;

/// Above this magnitude `log(1 + e^η)` switches to its asymptotic form.
pub const LOG1PEXP_SWITCH: f64 = 35.0;

const HORSESHOE_INITIAL_COEFFICIENT: f64 = 1e-2;

/// Response model of the GLM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Likelihood {
    /// Bernoulli response with logistic inverse link.
    LogisticBernoulli,
    /// Zero-information likelihood: the posterior equals the prior.
    PriorOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorSpec {
    /// `θ_j ~ N(0, sd²)` for every regression coefficient.
    IsotropicGaussian { sd: f64 },
    /// `θ_1 ~ t(3, 0, 1)` on the first (intercept) column,
    /// `θ_j ~ N(0, λ_j² τ²)` for the rest, `λ_j, τ ~ C⁺(0, 1)`.
    Horseshoe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlmModel {
    pub likelihood: Likelihood,
    pub prior: PriorSpec,
}

impl GlmModel {
    pub fn logistic(prior: PriorSpec) -> Result<Self> {
        Self::new(Likelihood::LogisticBernoulli, prior)
    }

    pub fn new(likelihood: Likelihood, prior: PriorSpec) -> Result<Self> {
        if let PriorSpec::IsotropicGaussian { sd } = prior {
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "prior sd must be positive and finite, got {sd}"
                )));
            }
        }
        Ok(GlmModel { likelihood, prior })
    }

    pub fn layout(&self, d: usize) -> ParameterLayout {
        ParameterLayout {
            d,
            horseshoe: matches!(self.prior, PriorSpec::Horseshoe),
        }
    }

    /// Parameter vector at which chains start: unit scales and zero coefficients,
    /// except that horseshoe slab coefficients start slightly off zero because the
    /// local-scale conditional given `θ_j = 0` is improper.
    pub fn initial_parameters(&self, d: usize) -> Vec<f64> {
        let layout = self.layout(d);
        let mut theta = vec![0.0; layout.dim()];
        if layout.horseshoe {
            theta[1..d].fill(HORSESHOE_INITIAL_COEFFICIENT);
        }
        theta
    }
}

/// One coordinate of the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    /// Regression coefficient `θ_j`.
    Regression(usize),
    /// `log λ_j` for regression column `j ≥ 1` (horseshoe only).
    LogLocalScale(usize),
    /// `log τ` (horseshoe only).
    LogGlobalScale,
}

/// Block layout of the parameter vector.
///
/// Gaussian prior: `[θ_0 .. θ_{d-1}]`, `D = d`.
/// Horseshoe: `[θ_0 .. θ_{d-1}, log λ_1 .. log λ_{d-1}, log τ]`, `D = 2d`.
/// Column 0 carries the intercept and has no local scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterLayout {
    pub d: usize,
    pub horseshoe: bool,
}

impl ParameterLayout {
    pub fn dim(&self) -> usize {
        if self.horseshoe {
            2 * self.d
        } else {
            self.d
        }
    }

    pub fn coordinate(&self, k: usize) -> Coordinate {
        if k < self.d {
            Coordinate::Regression(k)
        } else if k + 1 == 2 * self.d {
            Coordinate::LogGlobalScale
        } else {
            Coordinate::LogLocalScale(k - self.d + 1)
        }
    }

    /// Flat index of `log λ_j`, `1 ≤ j < d`.
    pub fn local_scale_index(&self, j: usize) -> usize {
        debug_assert!(self.horseshoe && j >= 1 && j < self.d);
        self.d + j - 1
    }

    pub fn global_scale_index(&self) -> usize {
        debug_assert!(self.horseshoe);
        2 * self.d - 1
    }

    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: theta.len(),
                context: "parameter vector",
            });
        }
        Ok(())
    }

    /// Column names for the full parameter vector.
    pub fn names(&self, dataset_names: impl Fn(usize) -> String) -> Vec<String> {
        (0..self.dim())
            .map(|k| match self.coordinate(k) {
                Coordinate::Regression(j) => format!("theta[{}]", dataset_names(j)),
                Coordinate::LogLocalScale(j) => format!("log_lambda[{}]", dataset_names(j)),
                Coordinate::LogGlobalScale => "log_tau".to_string(),
            })
            .collect()
    }
}

/// `log(1 + e^η)` without overflow.
#[inline]
pub fn log1pexp(eta: f64) -> f64 {
    if eta > LOG1PEXP_SWITCH {
        eta + (-eta).exp()
    } else if eta < -LOG1PEXP_SWITCH {
        eta.exp()
    } else {
        eta.exp().ln_1p()
    }
}

/// Logistic mean `1 / (1 + e^{-η})`.
pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log f(y | logistic(η)) = y η − log(1 + e^η)`.
#[inline]
pub fn logistic_loglik_term(y: u8, eta: f64) -> f64 {
    let yf = f64::from(y);
    yf * eta - log1pexp(eta)
}

impl Likelihood {
    #[inline]
    pub fn term(&self, y: u8, eta: f64) -> f64 {
        match self {
            Likelihood::LogisticBernoulli => logistic_loglik_term(y, eta),
            Likelihood::PriorOnly => 0.0,
        }
    }

    pub fn is_informative(&self) -> bool {
        matches!(self, Likelihood::LogisticBernoulli)
    }
}

/// `Σ_i log f(y_i | μ(η_i))` at the given linear predictors.
pub fn log_likelihood_at(model: &GlmModel, dataset: &Dataset, predictors: &[f64]) -> Result<f64> {
    if predictors.len() != dataset.n() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n(),
            actual: predictors.len(),
            context: "linear predictors",
        });
    }
    let mut total = 0.0;
    for (i, (&eta, &y)) in predictors.iter().zip(dataset.y()).enumerate() {
        ensure_finite(eta, || format!("linear predictor {i}"))?;
        total += model.likelihood.term(y, eta);
    }
    Ok(total)
}

pub(crate) fn gaussian_logpdf(x: f64, sd: f64) -> f64 {
    -0.5 * LN_2PI - sd.ln() - 0.5 * (x / sd) * (x / sd)
}

/// Student-t with 3 degrees of freedom, location 0, scale 1.
pub(crate) fn student_t3_logpdf(x: f64) -> f64 {
    // ln Γ(2) = 0
    -LN_GAMMA_3_2 - 0.5 * (3.0f64.ln() + LN_PI) - 2.0 * (x * x / 3.0).ln_1p()
}

/// Half-Cauchy(0, 1) density of `s = e^u`, expressed on `u` (Jacobian `e^u` included).
pub(crate) fn half_cauchy_log_scale_logpdf(u: f64) -> f64 {
    std::f64::consts::LN_2 - LN_PI - log1pexp(2.0 * u) + u
}

/// `N(0, e^{2 log_sd})` log density with the scale supplied on the log axis.
#[inline]
fn gaussian_logpdf_log_sd(x: f64, log_sd: f64) -> f64 {
    let base = -0.5 * LN_2PI - log_sd;
    if x == 0.0 {
        base
    } else {
        base - 0.5 * x * x * (-2.0 * log_sd).exp()
    }
}

/// Sum of the log prior densities, horseshoe latents evaluated on the log axis.
pub fn log_prior(model: &GlmModel, theta: &[f64]) -> Result<f64> {
    let d = match model.prior {
        PriorSpec::IsotropicGaussian { .. } => theta.len(),
        PriorSpec::Horseshoe => {
            if theta.len() % 2 != 0 || theta.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "horseshoe parameter vector must have even length 2d, got {}",
                    theta.len()
                )));
            }
            theta.len() / 2
        }
    };
    for (k, &v) in theta.iter().enumerate() {
        ensure_finite(v, || format!("parameter {k}"))?;
    }
    Ok(match model.prior {
        PriorSpec::IsotropicGaussian { sd } => theta.iter().map(|&t| gaussian_logpdf(t, sd)).sum(),
        PriorSpec::Horseshoe => {
            let layout = model.layout(d);
            let log_tau = theta[layout.global_scale_index()];
            let mut total = student_t3_logpdf(theta[0]) + half_cauchy_log_scale_logpdf(log_tau);
            for j in 1..d {
                let log_lambda = theta[layout.local_scale_index(j)];
                total += gaussian_logpdf_log_sd(theta[j], log_lambda + log_tau)
                    + half_cauchy_log_scale_logpdf(log_lambda);
            }
            total
        }
    })
}

/// Prior terms of coordinate `k` as a function of its value, others held fixed.
///
/// For `log τ` the sum over coefficients is folded into one scalar when the
/// evaluator is built, so each evaluation is O(1).
pub(crate) enum PriorConditional {
    Gaussian { sd: f64 },
    StudentT3,
    /// `θ_j ~ N(0, (λ_j τ)²)` seen from `θ_j`.
    HorseshoeSlab { log_scale: f64 },
    /// Terms involving `log λ_j`: slab density of `θ_j` plus the half-Cauchy.
    LocalScale { theta_j: f64, log_tau: f64 },
    /// Terms involving `log τ`: `m` slabs with `Σ θ_j² / λ_j² = weighted_sq`.
    GlobalScale { m: usize, weighted_sq: f64, log_lambda_sum: f64 },
}

impl PriorConditional {
    pub(crate) fn new(model: &GlmModel, layout: ParameterLayout, theta: &[f64], k: usize) -> Self {
        match (model.prior, layout.coordinate(k)) {
            (PriorSpec::IsotropicGaussian { sd }, _) => PriorConditional::Gaussian { sd },
            (PriorSpec::Horseshoe, Coordinate::Regression(0)) => PriorConditional::StudentT3,
            (PriorSpec::Horseshoe, Coordinate::Regression(j)) => PriorConditional::HorseshoeSlab {
                log_scale: theta[layout.local_scale_index(j)] + theta[layout.global_scale_index()],
            },
            (PriorSpec::Horseshoe, Coordinate::LogLocalScale(j)) => PriorConditional::LocalScale {
                theta_j: theta[j],
                log_tau: theta[layout.global_scale_index()],
            },
            (PriorSpec::Horseshoe, Coordinate::LogGlobalScale) => {
                let mut weighted_sq = 0.0;
                let mut log_lambda_sum = 0.0;
                for j in 1..layout.d {
                    let ll = theta[layout.local_scale_index(j)];
                    if theta[j] != 0.0 {
                        weighted_sq += theta[j] * theta[j] * (-2.0 * ll).exp();
                    }
                    log_lambda_sum += ll;
                }
                PriorConditional::GlobalScale {
                    m: layout.d - 1,
                    weighted_sq,
                    log_lambda_sum,
                }
            }
        }
    }

    #[inline]
    pub(crate) fn eval(&self, v: f64) -> f64 {
        match *self {
            PriorConditional::Gaussian { sd } => gaussian_logpdf(v, sd),
            PriorConditional::StudentT3 => student_t3_logpdf(v),
            PriorConditional::HorseshoeSlab { log_scale } => gaussian_logpdf_log_sd(v, log_scale),
            PriorConditional::LocalScale { theta_j, log_tau } => {
                gaussian_logpdf_log_sd(theta_j, v + log_tau) + half_cauchy_log_scale_logpdf(v)
            }
            PriorConditional::GlobalScale {
                m,
                weighted_sq,
                log_lambda_sum,
            } => {
                let m = m as f64;
                let slab = if weighted_sq == 0.0 {
                    0.0
                } else {
                    0.5 * weighted_sq * (-2.0 * v).exp()
                };
                -0.5 * LN_2PI * m - log_lambda_sum - m * v - slab + half_cauchy_log_scale_logpdf(v)
            }
        }
    }
}
