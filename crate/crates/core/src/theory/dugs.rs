use nalgebra::{DMatrix, DVector, Schur};
use serde::Serialize;

use crate::error::{Error, Result};

use super::condition::kappa;
use super::target::{Gaussian, GaussianTarget};

/// Above this size the spectral radius comes from repeated squaring instead of a
/// full eigen-decomposition.
pub const DENSE_EIGEN_MAX_DIM: usize = 512;

/// Iteration matrices of deterministic-scan Gibbs on a Gaussian target.
///
/// `A = I − diag(Q)⁻¹ Q`, `L` its strictly lower part, `U = A − L`, and
/// `B = (I − L)⁻¹ U` maps the centred state before a sweep to the centred conditional
/// mean after it.
#[derive(Debug, Clone, PartialEq)]
pub struct DugsMatrices {
    pub a: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

pub fn build_dugs_matrices(target: &GaussianTarget) -> Result<DugsMatrices> {
    let q = target.precision();
    let d = q.nrows();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let qii = q[(i, i)];
        if !(qii > 0.0) {
            return Err(Error::NotSpd(format!("precision diagonal {i} is {qii}")));
        }
        for j in 0..d {
            if i != j {
                a[(i, j)] = -q[(i, j)] / qii;
            }
        }
    }
    let l = a.lower_triangle() - DMatrix::from_diagonal(&a.diagonal());
    let u = &a - &l;
    let i_minus_l = DMatrix::identity(d, d) - &l;
    let b = i_minus_l
        .solve_lower_triangular(&u)
        .ok_or_else(|| Error::InvalidArgument("I − L is singular".into()))?;
    Ok(DugsMatrices { a, l, u, b })
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "spectral radius of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.nrows() <= DENSE_EIGEN_MAX_DIM {
        if let Some(schur) = Schur::try_new(m.clone(), 1e-14, 10_000) {
            return Ok(schur
                .complex_eigenvalues()
                .iter()
                .fold(0.0_f64, |acc, z| acc.max(z.norm())));
        }
        log::debug!("Schur decomposition did not converge; using repeated squaring");
    }
    gelfand_radius(m)
}

/// `ρ(M) = lim ‖M^k‖^{1/k}` along `k = 2^s`, renormalizing after each squaring.
pub(crate) fn gelfand_radius(m: &DMatrix<f64>) -> Result<f64> {
    const MAX_SQUARINGS: usize = 64;
    let norm = m.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut p = m / norm;
    // M^(2^s) = exp(log_scale) · p with ‖p‖ = 1
    let mut log_scale = norm.ln();
    let mut prev = f64::INFINITY;
    for s in 1..=MAX_SQUARINGS {
        p = &p * &p;
        let n = p.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        p /= n;
        log_scale = 2.0 * log_scale + n.ln();
        let est = (log_scale / 2f64.powi(s as i32)).exp();
        if s > 8 && (est - prev).abs() <= 1e-13 * est.max(1e-300) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NoConvergence {
        iterations: MAX_SQUARINGS,
        context: "spectral radius by repeated squaring".into(),
    })
}

/// `M^t` by binary powering.
pub fn matrix_power(m: &DMatrix<f64>, mut t: u64) -> DMatrix<f64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while t > 0 {
        if t & 1 == 1 {
            result = &result * &base;
        }
        t >>= 1;
        if t > 0 {
            base = &base * &base;
        }
    }
    result
}

fn check_start(target: &GaussianTarget, start: &Gaussian) -> Result<()> {
    let d = target.dim();
    if start.mean.len() != d || start.cov.nrows() != d || start.cov.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: start.mean.len(),
            context: "initial distribution",
        });
    }
    Ok(())
}

/// Exact law after `t` sweeps from `N(μ₀, Σ₀)`:
/// `μ_t = μ + Bᵗ(μ₀ − μ)`, `Σ_t = Σ + Bᵗ(Σ₀ − Σ)(Bᵗ)ᵀ`.
pub fn dugs_moments(target: &GaussianTarget, start: &Gaussian, t: u64) -> Result<Gaussian> {
    check_start(target, start)?;
    if t == 0 {
        return Ok(start.clone());
    }
    let b = build_dugs_matrices(target)?.b;
    let bt = matrix_power(&b, t);
    let mean = target.mu() + &bt * (&start.mean - target.mu());
    let cov = target.sigma() + &bt * (&start.cov - target.sigma()) * bt.transpose();
    Ok(Gaussian {
        mean,
        cov: (&cov + cov.transpose()) * 0.5,
    })
}

/// Sweep-by-sweep moment recursion, one matrix product per step.
#[derive(Debug, Clone)]
pub struct MomentRecursion {
    b: DMatrix<f64>,
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    mean_offset: DVector<f64>,
    cov_offset: DMatrix<f64>,
    t: u64,
}

impl MomentRecursion {
    pub fn new(target: &GaussianTarget, start: &Gaussian) -> Result<Self> {
        check_start(target, start)?;
        Ok(MomentRecursion {
            b: build_dugs_matrices(target)?.b,
            mu: target.mu().clone(),
            sigma: target.sigma().clone(),
            mean_offset: &start.mean - target.mu(),
            cov_offset: &start.cov - target.sigma(),
            t: 0,
        })
    }

    pub fn sweeps(&self) -> u64 {
        self.t
    }

    /// Current law.
    pub fn current(&self) -> Gaussian {
        Gaussian {
            mean: &self.mu + &self.mean_offset,
            cov: &self.sigma + &self.cov_offset,
        }
    }

    /// `μ_t − μ`, kept separately so it does not lose precision as it decays.
    pub fn mean_offset(&self) -> &DVector<f64> {
        &self.mean_offset
    }

    /// `Σ_t − Σ`.
    pub fn cov_offset(&self) -> &DMatrix<f64> {
        &self.cov_offset
    }

    pub fn step(&mut self) {
        self.mean_offset = &self.b * &self.mean_offset;
        let c = &self.b * &self.cov_offset * self.b.transpose();
        self.cov_offset = (&c + c.transpose()) * 0.5;
        self.t += 1;
    }
}

/// Both sides of the spectral-radius bound `ρ(B) ≤ exp(−1/κ(Σ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateBoundCheck {
    pub rho: f64,
    pub kappa: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks the rate bound on a target whose precision has non-positive off-diagonals.
pub fn rate_bound_check_target(target: &GaussianTarget) -> Result<RateBoundCheck> {
    if !target.has_nonpositive_precision_offdiagonals() {
        return Err(Error::HypothesisViolated(
            "precision has a positive off-diagonal entry".into(),
        ));
    }
    let rho = spectral_radius(&build_dugs_matrices(target)?.b)?;
    let kappa = kappa(target.sigma())?;
    let bound = (-1.0 / kappa).exp();
    Ok(RateBoundCheck {
        rho,
        kappa,
        bound,
        holds: rho <= bound + 1e-12,
    })
}

pub fn rate_bound_check(sigma: &DMatrix<f64>) -> Result<RateBoundCheck> {
    rate_bound_check_target(&GaussianTarget::centered(sigma.clone())?)
}

/// `ρ(B(Σ))` and `ρ(B(DΣD))` for a positive diagonal `D`; they agree because
/// `B(DΣD) = D⁻¹ B(Σ) D`.
pub fn rescaling_invariance_check(sigma: &DMatrix<f64>, diag: &[f64]) -> Result<(f64, f64)> {
    let d = sigma.nrows();
    if diag.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: diag.len(),
            context: "diagonal preconditioner",
        });
    }
    if let Some(v) = diag.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "preconditioner entries must be positive, got {v}"
        )));
    }
    let original = GaussianTarget::centered(sigma.clone())?;
    let scaled = DMatrix::from_fn(d, d, |i, j| sigma[(i, j)] * diag[i] * diag[j]);
    let preconditioned = GaussianTarget::centered(scaled)?;
    Ok((
        spectral_radius(&build_dugs_matrices(&original)?.b)?,
        spectral_radius(&build_dugs_matrices(&preconditioned)?.b)?,
    ))
}
