use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning of the univariate slice sampler (doubling + shrinkage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    /// Initial interval width `w`.
    pub initial_width: f64,
    /// Cap `p` on the number of doublings; the interval never exceeds `2^p w`.
    pub max_doublings: u32,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            initial_width: 10.0,
            max_doublings: 20,
        }
    }
}

impl SliceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_width > 0.0 && self.initial_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "slice width must be positive, got {}",
                self.initial_width
            )));
        }
        if self.max_doublings < 1 {
            return Err(Error::InvalidArgument("max_doublings must be >= 1".into()));
        }
        Ok(())
    }
}

/// What happened during one slice update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SliceOutcome {
    /// Vertical level `log f(x0) − Exp(1)` defining the slice.
    pub level: f64,
    pub doublings: u32,
    pub shrinks: u32,
    pub hit_doubling_cap: bool,
}

const MAX_SHRINKS: u32 = 10_000;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// One slice-sampling update of a scalar with log density `log_f`, Neal's doubling
/// procedure followed by shrinkage, including the doubling acceptance test.
///
/// Returns the new point; it equals `x0` only if the shrinkage collapsed onto it.
pub fn slice_update<R, F>(
    x0: f64,
    mut log_f: F,
    cfg: &SliceConfig,
    rng: &mut R,
) -> Result<(f64, SliceOutcome)>
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    let f0 = log_f(x0);
    if !f0.is_finite() {
        return Err(Error::NonFinite {
            value: f0,
            context: format!("slice target at current point {x0}"),
        });
    }
    let w = cfg.initial_width;
    let e: f64 = Exp1.sample(rng);
    let level = f0 - e;
    let mut out = SliceOutcome {
        level,
        ..SliceOutcome::default()
    };

    let mut left = x0 - w * rng.random::<f64>();
    let mut right = left + w;
    let mut f_left = sanitize(log_f(left));
    let mut f_right = sanitize(log_f(right));
    let mut k = cfg.max_doublings;
    while k > 0 && (level < f_left || level < f_right) {
        let width = right - left;
        if rng.random::<f64>() < 0.5 {
            left -= width;
            f_left = sanitize(log_f(left));
        } else {
            right += width;
            f_right = sanitize(log_f(right));
        }
        k -= 1;
        out.doublings += 1;
    }
    if k == 0 && (level < f_left || level < f_right) {
        out.hit_doubling_cap = true;
        log::trace!("slice doubling cap reached at [{left}, {right}]");
    }

    let (mut lo, mut hi) = (left, right);
    loop {
        let x1 = lo + rng.random::<f64>() * (hi - lo);
        let f1 = sanitize(log_f(x1));
        if level < f1 && doubling_accepts(x0, x1, level, left, right, w, &mut log_f) {
            return Ok((x1, out));
        }
        if x1 < x0 {
            lo = x1;
        } else {
            hi = x1;
        }
        out.shrinks += 1;
        if out.shrinks >= MAX_SHRINKS || hi - lo <= f64::EPSILON * (1.0 + x0.abs()) {
            log::debug!("slice shrinkage collapsed onto current point {x0}");
            return Ok((x0, out));
        }
    }
}

/// Acceptance test for a candidate from a doubled interval: rejects `x1` if the
/// doubling started from `x1` could not have produced `[left, right]`.
fn doubling_accepts<F: FnMut(f64) -> f64>(
    x0: f64,
    x1: f64,
    level: f64,
    left: f64,
    right: f64,
    w: f64,
    log_f: &mut F,
) -> bool {
    let (mut lo, mut hi) = (left, right);
    let mut differ = false;
    while hi - lo > 1.1 * w {
        let mid = 0.5 * (lo + hi);
        if (x0 < mid && x1 >= mid) || (x0 >= mid && x1 < mid) {
            differ = true;
        }
        if x1 < mid {
            hi = mid;
        } else {
            lo = mid;
        }
        if differ && level >= sanitize(log_f(lo)) && level >= sanitize(log_f(hi)) {
            return false;
        }
    }
    true
}
