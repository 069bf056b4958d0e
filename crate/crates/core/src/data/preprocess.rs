use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{Dataset, DesignMatrix};
use crate::rng::stream_rng;

/// Name given to the all-ones column.
pub const INTERCEPT_NAME: &str = "intercept";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreprocessMode {
    /// Centre and scale every column to mean 0, population sd 1.
    Standardize,
    /// Divide every column by its maximum absolute value; zeros stay zero.
    SparseMaxAbs,
    /// `SparseMaxAbs` when the zero fraction exceeds the threshold, else `Standardize`.
    Auto,
    /// Leave values untouched.
    None,
}

impl FromStr for PreprocessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standardize" => Ok(PreprocessMode::Standardize),
            "sparse_max_abs" | "maxabs" => Ok(PreprocessMode::SparseMaxAbs),
            "auto" => Ok(PreprocessMode::Auto),
            "none" => Ok(PreprocessMode::None),
            other => Err(Error::InvalidArgument(format!("unknown preprocessing mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSpec {
    pub mode: PreprocessMode,
    pub sparsity_threshold: f64,
    pub add_intercept: bool,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        PreprocessSpec {
            mode: PreprocessMode::Auto,
            sparsity_threshold: 0.85,
            add_intercept: true,
        }
    }
}

impl PreprocessSpec {
    /// Mode actually applied to `dataset`.
    pub fn resolve(&self, dataset: &Dataset) -> Result<PreprocessMode> {
        if !(0.0..=1.0).contains(&self.sparsity_threshold) {
            return Err(Error::InvalidArgument(format!(
                "sparsity threshold must lie in [0, 1], got {}",
                self.sparsity_threshold
            )));
        }
        Ok(match self.mode {
            PreprocessMode::Auto if dataset.x().zero_fraction() > self.sparsity_threshold => {
                PreprocessMode::SparseMaxAbs
            }
            PreprocessMode::Auto => PreprocessMode::Standardize,
            m => m,
        })
    }
}

fn map_columns(
    x: &DesignMatrix,
    mut f: impl FnMut(usize, &[(usize, f64)]) -> Result<Vec<(usize, f64)>>,
) -> Result<DesignMatrix> {
    let (n, d) = (x.nrows(), x.ncols());
    if x.is_sparse() {
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..d {
            let col: Vec<(usize, f64)> = x.column(j).collect();
            for (i, v) in f(j, &col)? {
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(DesignMatrix::Sparse {
            nrows: n,
            ncols: d,
            col_ptr,
            row_idx,
            values,
        })
    } else {
        let mut out = vec![0.0; n * d];
        for j in 0..d {
            let col: Vec<(usize, f64)> = x.column(j).collect();
            for (i, v) in f(j, &col)? {
                out[j * n + i] = v;
            }
        }
        DesignMatrix::from_col_major(n, d, out)
    }
}

fn standardize(dataset: &Dataset) -> Result<DesignMatrix> {
    let n = dataset.n();
    map_columns(&dataset.x().to_dense(), |j, col| {
        let mean = col.iter().map(|c| c.1).sum::<f64>() / n as f64;
        let var = col.iter().map(|c| (c.1 - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if !(sd > 1e-12 * (1.0 + mean.abs())) {
            return Err(Error::ZeroVarianceColumn { column: j });
        }
        Ok(col.iter().map(|&(i, v)| (i, (v - mean) / sd)).collect())
    })
}

fn max_abs_scale(dataset: &Dataset) -> Result<DesignMatrix> {
    map_columns(dataset.x(), |j, col| {
        let m = col.iter().fold(0.0f64, |m, c| m.max(c.1.abs()));
        if m == 0.0 {
            log::warn!("column {} ({}) is all zero; left unchanged", j, dataset.feature_name(j));
            return Ok(col.to_vec());
        }
        Ok(col.iter().map(|&(i, v)| (i, v / m)).collect())
    })
}

/// Applies the scaling rule of `spec` and optionally prepends an all-ones column.
pub fn preprocess(dataset: &Dataset, spec: &PreprocessSpec) -> Result<Dataset> {
    let x = match spec.resolve(dataset)? {
        PreprocessMode::Standardize => standardize(dataset)?,
        PreprocessMode::SparseMaxAbs => max_abs_scale(dataset)?,
        PreprocessMode::None | PreprocessMode::Auto => dataset.x().clone(),
    };
    let scaled = Dataset::new(x, dataset.y().to_vec(), dataset.feature_names().map(<[String]>::to_vec))?;
    let out = if spec.add_intercept {
        with_intercept(&scaled)?
    } else {
        scaled
    };
    Ok(out.with_auto_storage())
}

/// `dataset` with an all-ones column inserted at index 0.
pub fn with_intercept(dataset: &Dataset) -> Result<Dataset> {
    let (n, d) = (dataset.n(), dataset.d());
    let names: Vec<String> = std::iter::once(INTERCEPT_NAME.to_string())
        .chain((0..d).map(|j| dataset.feature_name(j)))
        .collect();
    let x = match dataset.x() {
        DesignMatrix::Dense { values, .. } => {
            let mut v = vec![1.0; n];
            v.extend_from_slice(values);
            DesignMatrix::from_col_major(n, d + 1, v)?
        }
        DesignMatrix::Sparse {
            col_ptr,
            row_idx,
            values,
            ..
        } => DesignMatrix::Sparse {
            nrows: n,
            ncols: d + 1,
            col_ptr: std::iter::once(0).chain(col_ptr.iter().map(|p| p + n)).collect(),
            row_idx: (0..n).chain(row_idx.iter().copied()).collect(),
            values: std::iter::repeat_n(1.0, n).chain(values.iter().copied()).collect(),
        },
    };
    Dataset::new(x, dataset.y().to_vec(), Some(names))
}

/// Uniform random column order for `d` columns, fixed by `seed`.
pub fn feature_permutation(d: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut stream_rng(seed, 0));
    perm
}

/// The first `d_sub` columns of a seeded shuffle. One seed gives nested prefixes
/// as `d_sub` grows.
pub fn subsample_features(dataset: &Dataset, d_sub: usize, seed: u64) -> Result<Dataset> {
    if d_sub == 0 || d_sub > dataset.d() {
        return Err(Error::InvalidArgument(format!(
            "subsample size must lie in 1..={}, got {d_sub}",
            dataset.d()
        )));
    }
    let perm = feature_permutation(dataset.d(), seed);
    dataset.select_columns(&perm[..d_sub])
}
