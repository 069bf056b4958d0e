use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Largest tolerated `max |QΣ − I|`.
const INVERSE_TOL: f64 = 1e-8;

/// Mean and covariance of a (possibly degenerate) Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Multivariate normal target with its precision computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTarget {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    precision: DMatrix<f64>,
}

fn check_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Symmetric part of `m` after checking it is symmetric up to round-off.
pub(crate) fn symmetrized(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    check_square(m, what)?;
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSpd(format!("{what} is not symmetric (max asymmetry {asym:e})")));
    }
    Ok((m + m.transpose()) * 0.5)
}

/// SPD inverse via Cholesky, with an explicit round-trip check.
pub(crate) fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotSpd(format!("{what} has no Cholesky factor")))?;
    let inv = chol.inverse();
    let inv = (&inv + inv.transpose()) * 0.5;
    let resid = (&inv * m - DMatrix::identity(m.nrows(), m.nrows())).amax();
    if !(resid <= INVERSE_TOL) {
        return Err(Error::NotSpd(format!(
            "{what} is too ill-conditioned to invert (residual {resid:e})"
        )));
    }
    Ok(inv)
}

impl GaussianTarget {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let sigma = symmetrized(&sigma, "covariance")?;
        check_mean(&mu, sigma.nrows())?;
        let precision = spd_inverse(&sigma, "covariance")?;
        Ok(GaussianTarget {
            mu,
            sigma,
            precision,
        })
    }

    /// Target specified by its precision; the stored precision is exactly `q`.
    pub fn from_precision(mu: DVector<f64>, q: DMatrix<f64>) -> Result<Self> {
        let precision = symmetrized(&q, "precision")?;
        check_mean(&mu, precision.nrows())?;
        let sigma = spd_inverse(&precision, "precision")?;
        Ok(GaussianTarget {
            mu,
            sigma,
            precision,
        })
    }

    /// Zero-mean target.
    pub fn centered(sigma: DMatrix<f64>) -> Result<Self> {
        let d = sigma.nrows();
        Self::new(DVector::zeros(d), sigma)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn as_gaussian(&self) -> Gaussian {
        Gaussian {
            mean: self.mu.clone(),
            cov: self.sigma.clone(),
        }
    }

    /// Whether every off-diagonal precision entry is non-positive (up to round-off).
    pub fn has_nonpositive_precision_offdiagonals(&self) -> bool {
        let q = &self.precision;
        let tol = 1e-12 * q.diagonal().amax();
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| i == j || q[(i, j)] <= tol))
    }

    /// One exact draw from the target.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let l = self
            .sigma
            .clone()
            .cholesky()
            .expect("covariance was checked SPD at construction")
            .unpack();
        let z = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        &self.mu + l * z
    }
}

fn check_mean(mu: &DVector<f64>, d: usize) -> Result<()> {
    if mu.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: mu.len(),
            context: "mean vector",
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("mean has non-finite entries".into()));
    }
    Ok(())
}

/// Random SPD covariance with heterogeneous marginal scales: `D (G Gᵀ/d + εI) D`,
/// `G` standard normal, `D = diag(exp(N(0, scale_spread²)))`.
pub fn random_spd<R: Rng + ?Sized>(d: usize, scale_spread: f64, rng: &mut R) -> DMatrix<f64> {
    let g: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let jitter = 0.05;
    let core = &g * g.transpose() / d as f64 + DMatrix::identity(d, d) * jitter;
    let scales: Vec<f64> = (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            (scale_spread * z).exp()
        })
        .collect();
    let mut s = DMatrix::from_fn(d, d, |i, j| core[(i, j)] * scales[i] * scales[j]);
    s = (&s + s.transpose()) * 0.5;
    s
}

/// Random precision with non-positive off-diagonals: `Q = D (sI − W) D` with `W`
/// symmetric, entrywise non-negative and sparse-ish, `s` above the spectral radius
/// of `W`, `D` a random positive diagonal.
pub fn random_m_matrix_precision<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            if rng.random::<f64>() < 0.6 {
                let v = rng.random::<f64>();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let radius = w
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    // margin spans nearly singular to strongly diagonal-dominant
    let margin = 10f64.powf(rng.random_range(-2.0..0.5));
    let s = radius * (1.0 + margin) + 1e-3;
    let scales: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0f64).exp()).collect();
    DMatrix::from_fn(d, d, |i, j| {
        let base = if i == j { s } else { -w[(i, j)] };
        base * scales[i] * scales[j]
    })
}

/// Target with an M-matrix precision and a standard normal mean.
pub fn random_m_matrix_target<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<GaussianTarget> {
    let q = random_m_matrix_precision(d, rng);
    let mu = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    GaussianTarget::from_precision(mu, q)
}

/// Three-dimensional covariance whose correlation matrix is worse conditioned than
/// the covariance itself (`κ ≈ 67.70`, `κ_cor ≈ 88.85`), found by random search.
pub fn correlation_worse_fixture() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[1.92, 1.77, 0.71, 1.77, 1.74, 0.67, 0.71, 0.67, 0.35],
    )
}
