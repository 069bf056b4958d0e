//! Exact analysis of deterministic-scan Gibbs on Gaussian targets.
//!
//! One sweep maps the centred state `x − μ` to `B (x − μ)` plus independent
//! Gaussian noise, so the chain's law stays Gaussian and its moments follow a
//! closed-form recursion. From `B` come spectral radii, convergence curves and the
//! condition-number inequalities checked here.
//!
//! `kappa_r` is an optimization result and therefore an upper bound on the true
//! infimum over diagonal rescalings.

mod condition;
mod divergence;
mod dugs;
mod target;

pub use condition::{kappa, kappa_cor, kappa_r, ResidualCondition};
pub(crate) use divergence::recursion_divergence;
pub use divergence::{
    w2_from_offsets,
    divergence_decay_curve, divergence_to_target, fit_log_slope, gaussian_kl, gaussian_w2,
    ols_slope, sym_sqrt, Divergence, LogSlopeFit,
};
pub use dugs::{
    build_dugs_matrices, dugs_moments, rate_bound_check, rate_bound_check_target, matrix_power,
    rescaling_invariance_check, spectral_radius, DugsMatrices, MomentRecursion, RateBoundCheck,
    DENSE_EIGEN_MAX_DIM,
};
pub use target::{
    correlation_worse_fixture, random_m_matrix_precision, random_m_matrix_target, random_spd,
    Gaussian, GaussianTarget,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    fn corr2(r: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0])
    }

    fn point_mass(at: DVector<f64>) -> Gaussian {
        let d = at.len();
        Gaussian {
            mean: at,
            cov: DMatrix::zeros(d, d),
        }
    }

    /// Linear map of one sweep in the given visiting order, built by pushing basis
    /// vectors through sequential conditional-mean updates.
    fn sweep_map(q: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
        let d = q.nrows();
        let mut m = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut x = DVector::zeros(d);
            x[k] = 1.0;
            for &j in order {
                let s: f64 = (0..d).filter(|&i| i != j).map(|i| q[(j, i)] * x[i]).sum();
                x[j] = -s / q[(j, j)];
            }
            m.set_column(k, &x);
        }
        m
    }

    #[test]
    fn target_inverse_round_trip() {
        let mut rng = stream_rng(100, 0);
        for _ in 0..20 {
            let s = random_spd(6, 1.0, &mut rng);
            let t = GaussianTarget::centered(s.clone()).unwrap();
            let resid = (t.precision() * t.sigma() - DMatrix::identity(6, 6)).amax();
            assert!(resid <= 1e-8);
        }
        assert!(GaussianTarget::centered(corr2(1.5)).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(GaussianTarget::centered(asym).is_err());
    }

    #[test]
    fn diagonal_target_has_zero_iteration_matrix() {
        let t = GaussianTarget::centered(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, 4.0, 0.25,
        ])))
        .unwrap();
        let m = build_dugs_matrices(&t).unwrap();
        assert_eq!(m.a.amax(), 0.0);
        assert_eq!(m.b.amax(), 0.0);
    }

    #[test]
    fn bivariate_iteration_matrix() {
        for r in [0.3, -0.6, 0.9] {
            let m = build_dugs_matrices(&GaussianTarget::centered(corr2(r)).unwrap()).unwrap();
            let expected = DMatrix::from_row_slice(2, 2, &[0.0, r, 0.0, r * r]);
            assert!((m.b - expected).amax() <= 1e-12, "r = {r}");
            assert!((m.a.clone() - (&m.l + &m.u)).amax() == 0.0);
            assert_eq!(m.a.diagonal().amax(), 0.0);
        }
    }

    #[test]
    fn iteration_matrix_matches_sequential_sweep() {
        let mut rng = stream_rng(101, 0);
        let s = random_spd(4, 0.5, &mut rng);
        let t = GaussianTarget::centered(s.clone()).unwrap();
        let b = build_dugs_matrices(&t).unwrap().b;
        assert!((&b - sweep_map(t.precision(), &[0, 1, 2, 3])).amax() <= 1e-12);

        // reorder the coordinates, then build: same as sweeping the original in that order
        let order = [2, 0, 3, 1];
        let p = DMatrix::from_fn(4, 4, |i, j| f64::from(u8::from(order[i] == j)));
        let permuted = GaussianTarget::centered(&p * &s * p.transpose()).unwrap();
        let rho_perm = spectral_radius(&build_dugs_matrices(&permuted).unwrap().b).unwrap();
        let rho_sweep = spectral_radius(&sweep_map(t.precision(), &order)).unwrap();
        assert!((rho_perm - rho_sweep).abs() <= 1e-10);
    }

    #[test]
    fn spectral_radius_cases() {
        assert!((spectral_radius(&DMatrix::identity(5, 5)).unwrap() - 1.0).abs() <= 1e-10);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.25]);
        assert!((spectral_radius(&b).unwrap() - 0.25).abs() <= 1e-10);
        let nil = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0]);
        assert!(spectral_radius(&nil).unwrap().abs() <= 1e-10);
        assert_eq!(dugs::gelfand_radius(&nil).unwrap(), 0.0);
        // rotation scaled by 0.7: complex pair of modulus 0.7
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]) * 0.7;
        assert!((spectral_radius(&rot).unwrap() - 0.7).abs() <= 1e-10);
        assert!((dugs::gelfand_radius(&rot).unwrap() - 0.7).abs() <= 1e-10);
    }

    #[test]
    fn repeated_squaring_agrees_with_eigen() {
        let mut rng = stream_rng(102, 0);
        for _ in 0..20 {
            let t = random_m_matrix_target(7, &mut rng).unwrap();
            let b = build_dugs_matrices(&t).unwrap().b;
            let a = spectral_radius(&b).unwrap();
            let g = dugs::gelfand_radius(&b).unwrap();
            assert!((a - g).abs() <= 1e-9, "{a} vs {g}");
        }
    }

    #[test]
    fn moments_at_zero_and_stationarity() {
        let mut rng = stream_rng(103, 0);
        let t = GaussianTarget::new(
            DVector::from_vec(vec![1.0, -2.0, 0.5]),
            random_spd(3, 0.5, &mut rng),
        )
        .unwrap();
        let start = Gaussian {
            mean: DVector::from_vec(vec![3.0, 3.0, 3.0]),
            cov: DMatrix::identity(3, 3) * 0.1,
        };
        assert_eq!(dugs_moments(&t, &start, 0).unwrap(), start);
        for steps in [1, 7, 40] {
            let m = dugs_moments(&t, &t.as_gaussian(), steps).unwrap();
            assert!((&m.mean - t.mu()).amax() <= 1e-12);
            assert!((&m.cov - t.sigma()).amax() <= 1e-12);
        }
    }

    #[test]
    fn moment_recursion_is_consistent() {
        let mut rng = stream_rng(104, 0);
        let t = random_m_matrix_target(5, &mut rng).unwrap();
        let start = point_mass(DVector::from_element(5, 2.0));
        let at_t = dugs_moments(&t, &start, 6).unwrap();
        let mut rec = MomentRecursion::new(&t, &at_t).unwrap();
        for _ in 0..9 {
            rec.step();
        }
        let direct = dugs_moments(&t, &start, 15).unwrap();
        assert!((rec.current().mean - &direct.mean).amax() <= 1e-10);
        assert!((rec.current().cov - &direct.cov).amax() <= 1e-10);
    }

    #[test]
    fn bivariate_mean_decays_at_spectral_radius() {
        let t = GaussianTarget::centered(corr2(0.9)).unwrap();
        let start = point_mass(DVector::from_vec(vec![1.0, 1.0]));
        let mut rec = MomentRecursion::new(&t, &start).unwrap();
        let mut pts = Vec::new();
        for step in 1..=60 {
            rec.step();
            pts.push((step as f64, rec.mean_offset().norm().ln()));
        }
        let slope = ols_slope(&pts[10..]);
        let target = 0.81f64.ln();
        assert!((slope / target - 1.0).abs() <= 0.01, "slope {slope}");
    }

    #[test]
    fn condition_number_examples() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        assert!((kappa(&diag).unwrap() - 4.0).abs() <= 1e-12);
        assert!((kappa(&DMatrix::identity(3, 3)).unwrap() - 1.0).abs() <= 1e-12);
        assert!((kappa(&corr2(0.5)).unwrap() - 3.0).abs() <= 1e-12);
        assert!((kappa_cor(&diag).unwrap() - 1.0).abs() <= 1e-12);
        assert!((kappa_cor(&corr2(0.5)).unwrap() - 3.0).abs() <= 1e-12);
        assert!(kappa(&corr2(1.0)).is_err());
    }

    #[test]
    fn residual_condition_of_diagonal_is_one() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 0.01, 2.0]));
        assert!((kappa_r(&diag, 200).unwrap().value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn residual_condition_bivariate_matches_grid_search() {
        for r in [0.1, 0.5, 0.9, -0.7] {
            // diag(1, e^u) is the only free direction up to overall scale
            let sigma = DMatrix::from_row_slice(2, 2, &[1.0, r * 2.0, r * 2.0, 4.0]);
            let mut grid = f64::INFINITY;
            let steps = 200_000;
            for i in 0..=steps {
                let u = -8.0 + 16.0 * i as f64 / steps as f64;
                let b = (0.5 * u).exp();
                let s = DMatrix::from_fn(2, 2, |a, c| {
                    let da = if a == 0 { 1.0 } else { b };
                    let dc = if c == 0 { 1.0 } else { b };
                    sigma[(a, c)] * da * dc
                });
                grid = grid.min(kappa(&s).unwrap());
            }
            let closed = (1.0 + r.abs()) / (1.0 - r.abs());
            let found = kappa_r(&sigma, 500).unwrap().value;
            assert!((grid - closed).abs() <= 1e-4, "grid {grid} vs {closed}");
            assert!((found - grid).abs() <= 1e-4, "r={r}: {found} vs grid {grid}");
        }
    }

    #[test]
    fn correlation_can_be_worse_conditioned() {
        let s = correlation_worse_fixture();
        // reference values from an independent LAPACK eigensolver
        assert!((kappa(&s).unwrap() - 67.700_291_831_672_94).abs() <= 1e-6);
        assert!((kappa_cor(&s).unwrap() - 88.849_213_208_038_6).abs() <= 1e-6);

        let mut rng = stream_rng(105, 0);
        let found = (0..20_000).any(|_| {
            let s = random_spd(3, 0.0, &mut rng);
            kappa_cor(&s).unwrap() > kappa(&s).unwrap()
        });
        assert!(found);
    }

    #[test]
    fn rate_bound_cases() {
        let c = rate_bound_check(&corr2(0.5)).unwrap();
        assert!((c.rho - 0.25).abs() <= 1e-12);
        assert!((c.bound - (-1.0f64 / 3.0).exp()).abs() <= 1e-12);
        assert!(c.holds);
        let c = rate_bound_check(&DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).unwrap();
        assert!(c.rho.abs() <= 1e-12 && c.holds);
        assert!((c.bound - (-2.0f64 / 3.0).exp()).abs() <= 1e-12);
        assert!(matches!(
            rate_bound_check(&corr2(-0.5)),
            Err(crate::Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn rate_bound_on_random_m_matrices() {
        let mut rng = stream_rng(106, 0);
        for _ in 0..200 {
            let d = rng.random_range(2..=10);
            let t = random_m_matrix_target(d, &mut rng).unwrap();
            let c = rate_bound_check_target(&t).unwrap();
            assert!(c.holds, "rho {} bound {}", c.rho, c.bound);
        }
    }

    #[test]
    fn rescaling_invariance_cases() {
        let (a, b) = rescaling_invariance_check(&corr2(0.5), &[1.0, 1.0]).unwrap();
        assert_eq!(a, b);
        let (a, b) = rescaling_invariance_check(&corr2(0.5), &[10.0, 0.1]).unwrap();
        assert!((a - 0.25).abs() <= 1e-12 && (b - 0.25).abs() <= 1e-12);
        assert!(rescaling_invariance_check(&corr2(0.5), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn divergences_closed_forms() {
        let mut rng = stream_rng(107, 0);
        let s = random_spd(3, 0.5, &mut rng);
        let p = Gaussian {
            mean: DVector::from_vec(vec![0.1, 0.2, 0.3]),
            cov: s.clone(),
        };
        assert!(gaussian_kl(&p, &p).unwrap().abs() <= 1e-12);
        assert!(gaussian_w2(&p, &p).unwrap().abs() <= 1e-6);

        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let q = Gaussian {
            mean: &p.mean + &v,
            cov: s.clone(),
        };
        let maha = v.dot(&(s.clone().cholesky().unwrap().solve(&v)));
        assert!((gaussian_kl(&p, &q).unwrap() - 0.5 * maha).abs() <= 1e-10);
        assert!((gaussian_w2(&p, &q).unwrap() - v.norm()).abs() <= 1e-6);

        let one = |var: f64| Gaussian {
            mean: DVector::zeros(1),
            cov: DMatrix::from_element(1, 1, var),
        };
        let kl = gaussian_kl(&one(1.0), &one(4.0)).unwrap();
        assert!((kl - 0.5 * (0.25 - 1.0 + 4f64.ln())).abs() <= 1e-14);
        assert!((gaussian_w2(&one(1.0), &one(4.0)).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn offset_w2_matches_direct_formula() {
        let mut rng = stream_rng(109, 0);
        for scale in [1e-3, 0.1, 0.9, 5.0f64] {
            let s = random_spd(4, 0.5, &mut rng);
            let t = GaussianTarget::centered(s.clone()).unwrap();
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            let e = (&a * a.transpose()) * scale - &s * (0.5 * scale.min(1.0));
            let delta = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let law = Gaussian {
                mean: delta.clone(),
                cov: &s + &e,
            };
            let direct = gaussian_w2(&law, &t.as_gaussian()).unwrap();
            let offset = w2_from_offsets(&t, &delta, &e).unwrap();
            assert!((direct - offset).abs() <= 1e-8 * (1.0 + direct), "{scale}: {direct} vs {offset}");
        }
        let t = GaussianTarget::centered(corr2(0.5)).unwrap();
        let delta = DVector::from_vec(vec![3.0, 4.0]);
        let w = w2_from_offsets(&t, &delta, &(-corr2(0.5))).unwrap();
        assert!((w - 27f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn offset_w2_has_no_roundoff_plateau() {
        let t = GaussianTarget::centered(corr2(0.9)).unwrap();
        let start = point_mass(DVector::from_vec(vec![10.0, -10.0]));
        let curve = divergence_decay_curve(&t, &start, 300, Divergence::W2).unwrap();
        let fit = fit_log_slope(&curve, 1e-12).unwrap();
        assert!((fit.slope / 0.81f64.ln() - 1.0).abs() <= 0.02, "{fit:?}");
    }

    #[test]
    fn stationary_start_gives_zero_curve() {
        let t = GaussianTarget::centered(corr2(0.7)).unwrap();
        for which in [Divergence::W2, Divergence::KlBoundTv] {
            let c = divergence_decay_curve(&t, &t.as_gaussian(), 20, which).unwrap();
            assert!(c.iter().all(|v| v.abs() <= 1e-6), "{which:?}: {c:?}");
        }
    }

    #[test]
    fn bivariate_w2_slope() {
        let t = GaussianTarget::centered(corr2(0.9)).unwrap();
        let start = point_mass(DVector::from_vec(vec![10.0, -10.0]));
        let curve = divergence_decay_curve(&t, &start, 200, Divergence::W2).unwrap();
        let fit = fit_log_slope(&curve, 1e-6).unwrap();
        let target = 0.81f64.ln();
        assert!((fit.slope / target - 1.0).abs() <= 0.02, "{fit:?}");

        let tv = divergence_decay_curve(&t, &start, 200, Divergence::KlBoundTv).unwrap();
        assert!(tv[0].is_infinite());
        let fit = fit_log_slope(&tv, 1e-6).unwrap();
        assert!((fit.slope / target - 1.0).abs() <= 0.02, "{fit:?}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;
        use rand::SeedableRng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn rescaling_leaves_radius_unchanged(seed in any::<u64>(), d in 2usize..=8) {
                let mut rng = crate::rng::ChainRng::seed_from_u64(seed);
                let s = random_spd(d, 1.0, &mut rng);
                let diag: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0f64).exp()).collect();
                let (a, b) = rescaling_invariance_check(&s, &diag).unwrap();
                prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
            }

            #[test]
            fn condition_numbers_are_ordered(seed in any::<u64>(), d in 2usize..=6) {
                let mut rng = crate::rng::ChainRng::seed_from_u64(seed);
                let s = random_spd(d, 1.0, &mut rng);
                let k = kappa(&s).unwrap();
                let kc = kappa_cor(&s).unwrap();
                let kr = kappa_r(&s, 100).unwrap().value;
                prop_assert!(k >= 1.0 && kc >= 1.0 - 1e-12 && kr >= 1.0);
                prop_assert!(kr <= k.min(kc) + 1e-9);
            }
        }
    }
}
