//! Effective sample size and rate-based ESS bounds.
//!
//! ESS uses Geyer's initial positive sequence on FFT autocovariances:
//! `ESS = T γ_0 / σ²` with `σ² = −γ_0 + 2 Σ_m (γ_{2m} + γ_{2m+1})`, the sum stopping
//! at the first non-positive pair. Reports cover `θ_i` and `θ_i²` for every
//! recorded coordinate and are computed on post-warmup draws only.

mod bounds;
mod ess;
mod report;

pub use bounds::{
    gaussian_mixing_time, relative_ess_lower_bound_chi2, relative_ess_lower_bound_tv,
    RateEssBound,
};
pub use ess::{asymptotic_variance, autocovariance, ess, MIN_SERIES_LEN};
pub use report::{
    ess_report, ess_report_for, ess_report_table, EssReport, FunctionEss, ESS_HEADROOM,
    RELIABLE_MIN_ESS,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::theory::{Divergence, Gaussian, GaussianTarget};
    use crate::Error;
    use nalgebra::{DMatrix, DVector};
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(a: f64, t: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        let innovation_sd = (1.0 - a * a).sqrt();
        let mut x: f64 = StandardNormal.sample(&mut rng);
        (0..t)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = a * x + innovation_sd * z;
                x
            })
            .collect()
    }

    #[test]
    fn fft_autocovariance_matches_direct_sum() {
        let x = ar1(0.3, 257, 300);
        let t = x.len();
        let m = x.iter().sum::<f64>() / t as f64;
        let fast = autocovariance(&x);
        for k in [0, 1, 2, 17, 100, 256] {
            let direct: f64 =
                (0..t - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / t as f64;
            assert!((fast[k] - direct).abs() <= 1e-10, "lag {k}");
        }
    }

    #[test]
    fn iid_series() {
        let x = ar1(0.0, 100_000, 301);
        let s2 = asymptotic_variance(&x).unwrap();
        assert!((s2 - 1.0).abs() <= 0.1, "σ² {s2}");
        let rel = ess(&x).unwrap() / x.len() as f64;
        assert!((0.8..=1.2).contains(&rel), "ESS/T {rel}");
    }

    #[test]
    fn ar1_series() {
        let x = ar1(0.5, 100_000, 302);
        let var = autocovariance(&x)[0];
        let ratio = asymptotic_variance(&x).unwrap() / var;
        assert!((ratio / 3.0 - 1.0).abs() <= 0.15, "ratio {ratio}");
        let rel = ess(&x).unwrap() / x.len() as f64;
        assert!((rel * 3.0 - 1.0).abs() <= 0.15, "ESS/T {rel}");
    }

    #[test]
    fn antithetic_series_is_super_efficient() {
        let x = ar1(-0.5, 50_000, 303);
        assert!(ess(&x).unwrap() > x.len() as f64);
    }

    #[test]
    fn alternating_series_is_finite() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s2 = asymptotic_variance(&x).unwrap();
        assert!(s2.is_finite() && s2 >= 0.0);
        let e = ess(&x).unwrap();
        assert!(e.is_finite() && e <= 1000.0 * 3.0 + 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(ess(&[2.0; 500]), Err(Error::ZeroVariance)));
        assert!(matches!(
            ess(&[1.0, 2.0, 3.0]),
            Err(Error::SeriesTooShort { len: 3, min: 100 })
        ));
        let mut x = ar1(0.0, 200, 304);
        x[7] = f64::NAN;
        assert!(ess(&x).is_err());
    }

    fn iid_rows(t: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = stream_rng(seed, 0);
        (0..t)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn report_on_iid_draws() {
        let names: Vec<String> = (0..4).map(|j| format!("theta[{j}]")).collect();
        let rows = iid_rows(5000, 4, 305);
        let r = ess_report_for(&names, &rows, 2.0).unwrap();
        assert_eq!(r.per_function.len(), 8);
        assert_eq!(r.per_function[5].function, "theta[1]^2");
        let rel = r.median_ess.unwrap() / 5000.0;
        assert!((0.8..=1.2).contains(&rel), "median ESS/T {rel}");
        assert!(r.min_ess.unwrap() <= r.median_ess.unwrap());
        assert!(!r.unreliable);
        assert!(r.per_function.iter().all(|f| {
            let e = f.ess.unwrap();
            e > 0.0 && e <= ESS_HEADROOM * 5000.0
        }));
        let spe = r.sweeps_per_median_ess.unwrap();
        assert!((spe - 5000.0 / r.median_ess.unwrap()).abs() <= 1e-12);
        assert!((r.seconds_per_min_ess.unwrap() - 2.0 / r.min_ess.unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn report_duplicate_and_degenerate_columns() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = iid_rows(400, 1, 306)
            .into_iter()
            .map(|r| vec![r[0], r[0], 3.0])
            .collect();
        let r = ess_report_for(&names, &rows, 1.0).unwrap();
        assert_eq!(r.per_function[0].ess, r.per_function[1].ess);
        assert_eq!(r.per_function[2].ess, None);
        assert_eq!(r.per_function[5].ess, None);
        assert!(r.warnings.iter().any(|w| w.contains('c')));
    }

    #[test]
    fn short_report_is_unreliable() {
        let names = vec!["x".to_string()];
        let r = ess_report_for(&names, &iid_rows(50, 1, 307), 1.0).unwrap();
        assert!(r.unreliable);
        assert_eq!(r.min_ess, None);
        let dir = tempfile::tempdir().unwrap();
        r.write_json(&dir.path().join("r.json")).unwrap();
        r.write_csv(&dir.path().join("r.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert!(text.contains("x,NA,false"));
    }

    #[test]
    fn rate_bound_values() {
        assert_eq!(relative_ess_lower_bound_tv(0.0, 3.0, 0.5).unwrap(), 1.0);
        assert_eq!(relative_ess_lower_bound_chi2(0.0).unwrap(), 1.0);
        assert!((relative_ess_lower_bound_tv(0.5, 1.0, 1.0).unwrap() - 0.2).abs() <= 1e-15);
        assert!((relative_ess_lower_bound_chi2(0.25).unwrap() - 1.0 / 3.0).abs() <= 1e-15);
        assert!((relative_ess_lower_bound_chi2(0.81).unwrap() - 1.0 / 19.0).abs() <= 1e-15);
        assert!(relative_ess_lower_bound_chi2(1.0).is_err());
        assert!(relative_ess_lower_bound_tv(1.2, 1.0, 1.0).is_err());
        assert!(relative_ess_lower_bound_tv(0.5, -1.0, 1.0).is_err());
        assert!(relative_ess_lower_bound_tv(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn rate_bounds_are_monotone_and_match_asymptotics() {
        let mut prev = (1.0 + 1e-12, 1.0 + 1e-12);
        for i in 0..100 {
            let b = RateEssBound::new(i as f64 / 100.0, 0.7, 1.3).unwrap();
            assert!(b.bound_tv < prev.0 && b.bound_chi2 < prev.1);
            assert!(b.bound_tv > 0.0 && b.bound_chi2 > 0.0);
            prev = (b.bound_tv, b.bound_chi2);
        }
        let z = 1e4;
        let rho = 1.0 - 1.0 / z;
        let chi = relative_ess_lower_bound_chi2(rho).unwrap() * 4.0 * z;
        assert!((chi - 1.0).abs() <= 0.05, "{chi}");
        let (c, pf2) = (2.0, 0.5);
        let tv = relative_ess_lower_bound_tv(rho, c, pf2).unwrap() * z / (pf2 / (4.0 * c));
        assert!((tv - 1.0).abs() <= 0.05, "{tv}");
    }

    #[test]
    fn chi2_bound_below_exact_two_coordinate_ess() {
        // θ_1 under deterministic scan on a bivariate normal is AR(1) with coefficient r²
        for r in [0.2f64, 0.5, 0.9, 0.99] {
            let rho_b = r * r;
            let exact = (1.0 - rho_b) / (1.0 + rho_b);
            let bound = relative_ess_lower_bound_chi2(rho_b * rho_b).unwrap();
            assert!(bound <= exact + 1e-12, "r={r}: {bound} > {exact}");
        }
    }

    fn corr_target(r: f64) -> GaussianTarget {
        GaussianTarget::centered(DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0])).unwrap()
    }

    #[test]
    fn mixing_time_trivial_cases() {
        let t = corr_target(0.9);
        for which in [Divergence::W2, Divergence::KlBoundTv] {
            assert_eq!(gaussian_mixing_time(&t, &t.as_gaussian(), 1e-6, which, 1000).unwrap(), 0);
        }
        let near = Gaussian {
            mean: DVector::from_vec(vec![0.01, 0.0]),
            cov: DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]),
        };
        assert_eq!(gaussian_mixing_time(&t, &near, 1.0, Divergence::W2, 1000).unwrap(), 0);
        let far = Gaussian {
            mean: DVector::from_vec(vec![0.0, 1e6]),
            cov: DMatrix::identity(2, 2),
        };
        assert!(matches!(
            gaussian_mixing_time(&t, &far, 1e-12, Divergence::W2, 8),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn mixing_time_grows_by_log2_over_log_rate() {
        let t = corr_target(0.9);
        let start = Gaussian {
            mean: DVector::from_vec(vec![5.0, -5.0]),
            cov: DMatrix::zeros(2, 2),
        };
        let eps = 1e-2;
        let halvings = 10;
        let base = gaussian_mixing_time(&t, &start, eps, Divergence::W2, 100_000).unwrap();
        let later = gaussian_mixing_time(&t, &start, eps / 2f64.powi(halvings), Divergence::W2, 100_000)
            .unwrap();
        let expected = halvings as f64 * 2f64.ln() / 0.81f64.ln().abs();
        assert!(((later - base) as f64 - expected).abs() <= 1.0, "{base} → {later}, expected +{expected}");
    }
}
