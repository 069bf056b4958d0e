//! GLM likelihoods, priors and the cached linear-predictor mechanism.
//!
//! A Gibbs update changes one coefficient `θ_j`, so every linear predictor moves by
//! `x_ij (θ'_j − θ_j)`. Keeping `x_i · θ` in a length-`n` cache turns one evaluation
//! of the conditional log density into O(n) work instead of O(dn).
//!
//! The intercept, when present, is an ordinary all-ones column of the design
//! matrix (added by [`crate::data::preprocess`]) and counts toward `d`.

mod cache;
mod dataset;
mod model;

pub use cache::{
    conditional_logdensity, naive_conditional_logdensity, CachedConditional,
    LinearPredictorCache, NaiveConditional, OpCounts,
};
pub use dataset::{ColumnIter, Dataset, DesignMatrix, SPARSE_STORAGE_THRESHOLD};
pub use model::{
    log1pexp, log_likelihood_at, log_prior, logistic, logistic_loglik_term, Coordinate,
    GlmModel, Likelihood, ParameterLayout, PriorSpec, LOG1PEXP_SWITCH,
};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, zero_prob: f64) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if rng.random::<f64>() < zero_prob {
                            0.0
                        } else {
                            rng.random_range(-2.0..2.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let y = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        Dataset::new(DesignMatrix::from_rows(&rows).unwrap(), y, None)
            .unwrap()
            .with_auto_storage()
    }

    fn brute_matvec(ds: &Dataset, theta: &[f64]) -> Vec<f64> {
        (0..ds.n())
            .map(|i| (0..ds.d()).map(|j| ds.x().get(i, j) * theta[j]).sum())
            .collect()
    }

    fn gaussian_model() -> GlmModel {
        GlmModel::logistic(PriorSpec::IsotropicGaussian { sd: 10.0 }).unwrap()
    }

    #[test]
    fn cache_init_small_cases() {
        let ds = Dataset::new(DesignMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap(), vec![1], None)
            .unwrap();
        let c = LinearPredictorCache::init(&ds, &[1.0, 2.0]).unwrap();
        assert_eq!(c.values(), &[11.0]);
        let z = LinearPredictorCache::init(&ds, &[0.0, 0.0]).unwrap();
        assert_eq!(z.values(), &[0.0]);
        assert!(LinearPredictorCache::init(&ds, &[1.0]).is_err());
    }

    #[test]
    fn cache_init_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ds = random_dataset(&mut rng, 5, 3, 0.0);
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = LinearPredictorCache::init(&ds, &theta).unwrap();
        for (a, b) in c.values().iter().zip(brute_matvec(&ds, &theta)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn proposed_predictor_cases() {
        let ds = Dataset::new(DesignMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap(), vec![1], None)
            .unwrap();
        let c = LinearPredictorCache::init(&ds, &[1.0, 2.0]).unwrap();
        assert_eq!(c.proposed_linear_predictor(&ds, 0, 0, 1.0, 0.0).unwrap(), 8.0);
        assert_eq!(c.proposed_linear_predictor(&ds, 0, 1, 2.0, 2.0).unwrap(), 11.0);
        assert!(c.proposed_linear_predictor(&ds, 1, 0, 1.0, 0.0).is_err());
        assert!(c.proposed_linear_predictor(&ds, 0, 2, 1.0, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = random_dataset(&mut rng, 7, 4, 0.3);
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = LinearPredictorCache::init(&ds, &theta).unwrap();
        for j in 0..4 {
            let mut moved = theta.clone();
            moved[j] = rng.random_range(-3.0..3.0);
            let fresh = brute_matvec(&ds, &moved);
            for i in 0..7 {
                let p = c.proposed_linear_predictor(&ds, i, j, theta[j], moved[j]).unwrap();
                assert!((p - fresh[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commit_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ds = random_dataset(&mut rng, 20, 6, 0.0);
        let mut theta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut c = LinearPredictorCache::init(&ds, &theta).unwrap();
        let before = c.clone();
        assert_eq!(c.commit(&ds, 2, theta[2], theta[2]).unwrap(), 0);
        assert_eq!(c, before);

        for _ in 0..50 {
            let j = rng.random_range(0..6);
            let new = rng.random_range(-2.0..2.0);
            c.commit(&ds, j, theta[j], new).unwrap();
            theta[j] = new;
        }
        assert_eq!(c.refresh_counter(), 0);
        let fresh = LinearPredictorCache::init(&ds, &theta).unwrap();
        for (a, b) in c.values().iter().zip(fresh.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sparse_commit_touches_only_nonzeros() {
        let rows = vec![
            vec![0.0, 1.0],
            vec![2.0, 0.0],
            vec![0.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
        ];
        let ds = Dataset::new(DesignMatrix::from_rows(&rows).unwrap(), vec![0, 1, 0, 1, 0], None)
            .unwrap()
            .with_auto_storage();
        assert!(ds.x().is_sparse());
        let mut c = LinearPredictorCache::init(&ds, &[0.5, 0.5]).unwrap();
        let before = c.values().to_vec();
        let madds = c.commit(&ds, 0, 0.5, 1.5).unwrap();
        assert_eq!(madds, 2);
        let changed = before
            .iter()
            .zip(c.values())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(changed, 2);
    }

    #[test]
    fn refresh_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ds = random_dataset(&mut rng, 30, 8, 0.0);
        let mut theta: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut c = LinearPredictorCache::init(&ds, &theta).unwrap();

        let snapshot = c.values().to_vec();
        c.refresh(&ds, &theta).unwrap();
        for (a, b) in snapshot.iter().zip(c.values()) {
            assert!((a - b).abs() <= 1e-15);
        }

        for _ in 0..100_000 {
            let j = rng.random_range(0..8);
            let new = rng.random_range(-5.0..5.0);
            c.commit(&ds, j, theta[j], new).unwrap();
            theta[j] = new;
        }
        c.note_sweep();
        c.note_sweep();
        assert_eq!(c.refresh_counter(), 2);
        let drifted = c.values().to_vec();
        c.refresh(&ds, &theta).unwrap();
        assert_eq!(c.refresh_counter(), 0);
        for (a, b) in drifted.iter().zip(c.values()) {
            assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn symmetric_logistic_likelihood() {
        let ds = Dataset::new(
            DesignMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]).unwrap(),
            vec![0, 1, 1, 0],
            None,
        )
        .unwrap();
        let ll = log_likelihood_at(&gaussian_model(), &ds, &[0.0; 4]).unwrap();
        assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!(log_likelihood_at(&gaussian_model(), &ds, &[0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(log_likelihood_at(&gaussian_model(), &ds, &[0.0; 3]).is_err());
        let big = log_likelihood_at(&gaussian_model(), &ds, &[700.0, -700.0, 700.0, -700.0]).unwrap();
        assert!(big.is_finite());
    }

    #[test]
    fn likelihood_matches_bernoulli_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = random_dataset(&mut rng, 12, 3, 0.0);
        let eta: Vec<f64> = (0..12).map(|_| rng.random_range(-4.0..4.0)).collect();
        let mut product = 1.0f64;
        for (e, &y) in eta.iter().zip(ds.y()) {
            let p = 1.0 / (1.0 + (-e).exp());
            product *= if y == 1 { p } else { 1.0 - p };
        }
        let ll = log_likelihood_at(&gaussian_model(), &ds, &eta).unwrap();
        assert!((ll - product.ln()).abs() < 1e-10);
    }

    #[test]
    fn conditional_identity_and_naive_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (model, zero_prob) in [
            (gaussian_model(), 0.0),
            (gaussian_model(), 0.7),
            (GlmModel::logistic(PriorSpec::Horseshoe).unwrap(), 0.0),
            (GlmModel::logistic(PriorSpec::Horseshoe).unwrap(), 0.7),
        ] {
            let ds = random_dataset(&mut rng, 15, 5, zero_prob);
            let layout = model.layout(5);
            let theta: Vec<f64> = (0..layout.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cache = LinearPredictorCache::init(&ds, &theta).unwrap();
            let ll = log_likelihood_at(&model, &ds, cache.values()).unwrap();

            for k in 0..layout.dim() {
                let here = conditional_logdensity(&model, &ds, &cache, k, &theta, theta[k]).unwrap();
                if let Coordinate::Regression(_) = layout.coordinate(k) {
                    let prior_terms = here - ll;
                    // prior part must equal the full-prior difference structure
                    let mut moved = theta.clone();
                    moved[k] += 0.5;
                    let a = conditional_logdensity(&model, &ds, &cache, k, &theta, moved[k]).unwrap();
                    let full = log_likelihood_at(&model, &ds, &brute_matvec(&ds, &moved)).unwrap()
                        + log_prior(&model, &moved).unwrap()
                        - ll
                        - log_prior(&model, &theta).unwrap();
                    assert!((a - here - full).abs() < 1e-10);
                    assert!(prior_terms.is_finite());
                }
                for _ in 0..20 {
                    let v = rng.random_range(-3.0..3.0);
                    let cached = conditional_logdensity(&model, &ds, &cache, k, &theta, v).unwrap();
                    let naive = naive_conditional_logdensity(&model, &ds, k, &theta, v).unwrap();
                    assert!((cached - naive).abs() < 1e-10, "k={k}: {cached} vs {naive}");
                }
            }
        }
    }

    #[test]
    fn latent_conditional_ignores_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = GlmModel::logistic(PriorSpec::Horseshoe).unwrap();
        let ds1 = random_dataset(&mut rng, 10, 3, 0.0);
        let ds2 = random_dataset(&mut rng, 10, 3, 0.0);
        let theta = vec![0.2, -0.4, 0.9, 0.3, -0.1, 0.5];
        let c1 = LinearPredictorCache::init(&ds1, &theta).unwrap();
        let c2 = LinearPredictorCache::init(&ds2, &theta).unwrap();
        for k in 3..6 {
            let a = conditional_logdensity(&model, &ds1, &c1, k, &theta, 0.7).unwrap();
            let b = conditional_logdensity(&model, &ds2, &c2, k, &theta, 0.7).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stale_cache_detected_in_debug() {
        if !cfg!(debug_assertions) {
            return;
        }
        let ds = Dataset::new(DesignMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap(), vec![1], None)
            .unwrap();
        let cache = LinearPredictorCache::init(&ds, &[0.0, 0.0]).unwrap();
        let err = conditional_logdensity(&gaussian_model(), &ds, &cache, 0, &[1.0, 1.0], 0.5);
        assert!(matches!(err, Err(crate::Error::InconsistentCache { .. })));
    }

    #[test]
    fn incremental_equivalence_over_many_proposals() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = gaussian_model();
        let ds = random_dataset(&mut rng, 40, 10, 0.2);
        let mut theta: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut cache = LinearPredictorCache::init(&ds, &theta).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let j = rng.random_range(0..10);
            let v = theta[j] + rng.random_range(-1.0..1.0);
            let cached = conditional_logdensity(&model, &ds, &cache, j, &theta, v).unwrap();
            let naive = naive_conditional_logdensity(&model, &ds, j, &theta, v).unwrap();
            worst = worst.max((cached - naive).abs());
            if rng.random::<bool>() {
                cache.commit(&ds, j, theta[j], v).unwrap();
                theta[j] = v;
            }
        }
        assert!(worst <= 1e-10, "worst discrepancy {worst}");
    }

    #[test]
    fn cached_evaluation_cost_is_one_madd_per_stored_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = gaussian_model();
        let ds = random_dataset(&mut rng, 25, 6, 0.0);
        let theta = vec![0.1; 6];
        let cache = LinearPredictorCache::init(&ds, &theta).unwrap();
        let mut ops = OpCounts::default();
        let t = CachedConditional::new(&model, &ds, &cache, &theta, 3);
        t.eval(0.4, &mut ops);
        t.eval(-0.4, &mut ops);
        assert_eq!(ops.predictor_madds, 50);
        t.eval(0.1, &mut ops);
        assert_eq!(ops.predictor_madds, 50);
        let mut naive_ops = OpCounts::default();
        NaiveConditional::new(&model, &ds, &theta, 3).eval(0.4, &mut naive_ops);
        assert_eq!(naive_ops.predictor_madds, 150);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn cache_stays_coherent(seed in 0u64..1000, steps in 1usize..300) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let ds = random_dataset(&mut rng, 12, 5, 0.4);
                let mut theta: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut cache = LinearPredictorCache::init(&ds, &theta).unwrap();
                for s in 0..steps {
                    let j = rng.random_range(0..5);
                    let v = rng.random_range(-10.0..10.0);
                    cache.commit(&ds, j, theta[j], v).unwrap();
                    theta[j] = v;
                    if s % 97 == 0 {
                        cache.refresh(&ds, &theta).unwrap();
                        prop_assert!(cache.max_relative_drift(&ds, &theta).unwrap() <= 1e-10);
                    }
                }
                prop_assert!(cache.max_relative_drift(&ds, &theta).unwrap() <= 1e-6);
            }
        }
    }
}
