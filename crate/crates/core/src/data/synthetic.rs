use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{logistic, Dataset, DesignMatrix};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Every column iid N(0,1); every coefficient active.
    IidNormal,
    /// Iid columns; only the first `n_significant` coefficients are nonzero.
    PrefixSignificant1,
    /// As 1, but columns past the active block are copies of column 0.
    PrefixSignificant2,
    /// As 1, but columns past the active block are identically zero.
    PrefixSignificant3,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" | "iid_normal" | "0" => Ok(Scenario::IidNormal),
            "1" | "prefix1" | "prefix_significant1" => Ok(Scenario::PrefixSignificant1),
            "2" | "prefix2" | "prefix_significant2" => Ok(Scenario::PrefixSignificant2),
            "3" | "prefix3" | "prefix_significant3" => Ok(Scenario::PrefixSignificant3),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::IidNormal => "iid",
            Scenario::PrefixSignificant1 => "1",
            Scenario::PrefixSignificant2 => "2",
            Scenario::PrefixSignificant3 => "3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub scenario: Scenario,
    pub n_significant: usize,
    pub intercept: f64,
    /// Multiplies every drawn coefficient.
    pub signal_scale: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, scenario: Scenario, seed: u64) -> Self {
        SyntheticSpec {
            n,
            d,
            scenario,
            n_significant: 30,
            intercept: 0.0,
            signal_scale: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidArgument(format!(
                "synthetic data needs n, d >= 1, got n={} d={}",
                self.n, self.d
            )));
        }
        if self.scenario != Scenario::IidNormal && self.n_significant > self.d {
            return Err(Error::InvalidArgument(format!(
                "n_significant = {} exceeds d = {}",
                self.n_significant, self.d
            )));
        }
        if !self.intercept.is_finite() || !self.signal_scale.is_finite() {
            return Err(Error::InvalidArgument("intercept and signal_scale must be finite".into()));
        }
        Ok(())
    }
}

/// Which columns of a prefix scenario are replaced, and by what. The active block
/// is columns `0..n_significant`; every later column is rewritten.
fn rewrite_trailing_columns(scenario: Scenario, n: usize, n_significant: usize, x: &mut [f64]) {
    let first: Vec<f64> = x[..n].to_vec();
    for col in x.chunks_mut(n).skip(n_significant) {
        match scenario {
            Scenario::PrefixSignificant2 => col.copy_from_slice(&first),
            Scenario::PrefixSignificant3 => col.fill(0.0),
            _ => {}
        }
    }
}

/// Draws a design matrix (no intercept column), coefficients and logistic
/// responses. Returns the data and `[a, θ_0, …, θ_{d−1}]`.
///
/// `IidNormal` draws `θ ~ N(0, 1/d)` so the linear predictor stays O(1); prefix
/// scenarios draw `θ_j ~ N(0, 1)` for the active block and zero elsewhere.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Vec<f64>)> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut x_rng = stream_rng(spec.seed, 0);
    let mut theta_rng = stream_rng(spec.seed, 1);
    let mut y_rng = stream_rng(spec.seed, 2);

    let mut x: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut x_rng)).collect();
    rewrite_trailing_columns(spec.scenario, n, spec.n_significant, &mut x);

    let (active, sd) = match spec.scenario {
        Scenario::IidNormal => (d, 1.0 / (d as f64).sqrt()),
        _ => (spec.n_significant, 1.0),
    };
    let mut truth = vec![spec.intercept];
    truth.extend((0..d).map(|j| {
        if j < active {
            let z: f64 = StandardNormal.sample(&mut theta_rng);
            spec.signal_scale * sd * z
        } else {
            0.0
        }
    }));

    let design = DesignMatrix::from_col_major(n, d, x)?;
    let mut eta = vec![0.0; n];
    design.mul_vec_into(&truth[1..], &mut eta);
    let y: Vec<u8> = eta
        .iter()
        .map(|&e| u8::from(y_rng.random::<f64>() < logistic(spec.intercept + e)))
        .collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Ok((Dataset::new(design, y, Some(names))?.with_auto_storage(), truth))
}
