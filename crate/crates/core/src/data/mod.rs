//! Loaders, scaling and synthetic generators.
//!
//! Scaled datasets carry an optional all-ones column at index 0 so that the first
//! coefficient is the intercept.

mod io;
mod preprocess;
mod registry;
mod synthetic;

pub use io::{load_csv, load_libsvm, save_csv};
pub use preprocess::{
    feature_permutation, preprocess, subsample_features, with_intercept, PreprocessMode,
    PreprocessSpec, INTERCEPT_NAME,
};
pub use registry::{known_dataset, KnownDataset, KNOWN_DATASETS};
pub use synthetic::{generate_synthetic, Scenario, SyntheticSpec};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::{Dataset, DesignMatrix};
    use crate::Error;
    use std::io::Write;
    use std::path::Path;

    fn write(path: &Path, text: &str) {
        std::fs::File::create(path).unwrap().write_all(text.as_bytes()).unwrap();
    }

    fn dense(ds: &Dataset) -> Vec<Vec<f64>> {
        (0..ds.n()).map(|i| (0..ds.d()).map(|j| ds.x().get(i, j)).collect()).collect()
    }

    #[test]
    fn csv_exact_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write(&p, "a,label,b\n1.5,1,-2\n0,0,3.25\n7,1,0.125\n");
        let ds = load_csv(&p, "label").unwrap();
        assert_eq!(dense(&ds), vec![vec![1.5, -2.0], vec![0.0, 3.25], vec![7.0, 0.125]]);
        assert_eq!(ds.y(), &[1, 0, 1]);
        assert_eq!(ds.feature_names().unwrap(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write(&p, "a,y\n1,0\nzz,1\n");
        assert!(matches!(load_csv(&p, "y"), Err(Error::Parse { line: 3, .. })));
        write(&p, "a,y\n1,0\n2,2\n");
        assert!(matches!(load_csv(&p, "y"), Err(Error::NonBinaryLabel { line: 3, .. })));
        assert!(matches!(load_csv(&p, "nope"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(20, 7, Scenario::IidNormal, 9)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        save_csv(&ds, &p, "y").unwrap();
        let back = load_csv(&p, "y").unwrap();
        assert_eq!(dense(&back), dense(&ds));
        assert_eq!(back.y(), ds.y());
    }

    #[test]
    fn libsvm_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.svm");
        write(&p, "# comment\n1 3:0.5\n\n-1 1:2 4:-1 # trailing\n");
        let ds = load_libsvm(&p, Some(4)).unwrap();
        assert_eq!(dense(&ds), vec![vec![0.0, 0.0, 0.5, 0.0], vec![2.0, 0.0, 0.0, -1.0]]);
        assert_eq!(ds.y(), &[1, 0]);
        assert_eq!(load_libsvm(&p, None).unwrap().d(), 4);
        assert!(matches!(load_libsvm(&p, Some(3)), Err(Error::Parse { line: 4, .. })));
        write(&p, "1 0:1\n");
        assert!(matches!(load_libsvm(&p, None), Err(Error::Parse { line: 1, .. })));
        write(&p, "1 1:1\n3 1:2\n");
        assert!(matches!(load_libsvm(&p, None), Err(Error::NonBinaryLabel { line: 2, .. })));
    }

    #[test]
    fn colon_shape_check() {
        let colon = known_dataset("colon").unwrap();
        assert_eq!((colon.n, colon.d), (62, 2000));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("colon.csv");
        let mut text: String = (0..2000).map(|j| format!("g{j},")).collect();
        text.push_str("y\n");
        for i in 0..62 {
            for j in 0..2000 {
                text.push_str(&format!("{},", (i * 31 + j * 7) % 13));
            }
            text.push_str(&format!("{}\n", i % 2));
        }
        write(&p, &text);
        let ds = load_csv(&p, "y").unwrap();
        colon.check_shape(&ds).unwrap();
        let smaller = ds.select_columns(&[0, 1]).unwrap();
        assert!(colon.check_shape(&smaller).is_err());
    }

    fn one_column(values: &[f64]) -> Dataset {
        let y = vec![0; values.len()];
        Dataset::new(DesignMatrix::from_col_major(values.len(), 1, values.to_vec()).unwrap(), y, None)
            .unwrap()
    }

    fn spec(mode: PreprocessMode) -> PreprocessSpec {
        PreprocessSpec {
            mode,
            add_intercept: false,
            ..PreprocessSpec::default()
        }
    }

    #[test]
    fn standardize_column() {
        let out = preprocess(&one_column(&[1.0, 2.0, 3.0]), &spec(PreprocessMode::Standardize)).unwrap();
        let col: Vec<f64> = (0..3).map(|i| out.x().get(i, 0)).collect();
        let mean = col.iter().sum::<f64>() / 3.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() <= 1e-12 && (var.sqrt() - 1.0).abs() <= 1e-12);
        let again = preprocess(&out, &spec(PreprocessMode::Standardize)).unwrap();
        for i in 0..3 {
            assert!((again.x().get(i, 0) - col[i]).abs() <= 1e-12);
        }
        assert!(matches!(
            preprocess(&one_column(&[2.0; 4]), &spec(PreprocessMode::Standardize)),
            Err(Error::ZeroVarianceColumn { column: 0 })
        ));
    }

    #[test]
    fn max_abs_column() {
        let out = preprocess(&one_column(&[0.0, 0.0, -4.0, 2.0]), &spec(PreprocessMode::SparseMaxAbs)).unwrap();
        let col: Vec<f64> = (0..4).map(|i| out.x().get(i, 0)).collect();
        assert_eq!(col, vec![0.0, 0.0, -1.0, 0.5]);
        let zero = preprocess(&one_column(&[0.0; 4]), &spec(PreprocessMode::SparseMaxAbs)).unwrap();
        assert_eq!(zero.x().get(2, 0), 0.0);
    }

    #[test]
    fn auto_mode_by_sparsity() {
        let mut v = vec![0.0; 10];
        v[3] = 5.0;
        let sparse = one_column(&v);
        assert_eq!(spec(PreprocessMode::Auto).resolve(&sparse).unwrap(), PreprocessMode::SparseMaxAbs);
        let dense = one_column(&[1.0, 0.0, 2.0, 3.0]);
        assert_eq!(spec(PreprocessMode::Auto).resolve(&dense).unwrap(), PreprocessMode::Standardize);
        let bad = PreprocessSpec {
            sparsity_threshold: 1.5,
            ..spec(PreprocessMode::Auto)
        };
        assert!(bad.resolve(&dense).is_err());
    }

    #[test]
    fn intercept_goes_first_and_is_not_scaled() {
        let ds = one_column(&[1.0, 2.0, 3.0]);
        let s = PreprocessSpec {
            add_intercept: true,
            ..spec(PreprocessMode::Standardize)
        };
        let out = preprocess(&ds, &s).unwrap();
        assert_eq!(out.d(), 2);
        assert_eq!(out.feature_name(0), INTERCEPT_NAME);
        assert!((0..3).all(|i| out.x().get(i, 0) == 1.0));
        let sparse = Dataset::new(ds.x().to_sparse(), ds.y().to_vec(), None).unwrap();
        let si = with_intercept(&sparse).unwrap();
        assert_eq!(dense(&si), vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]]);
    }

    #[test]
    fn subsample_prefixes() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(5, 100, Scenario::IidNormal, 1)).unwrap();
        let full = subsample_features(&ds, 100, 4).unwrap();
        let mut names: Vec<String> = full.feature_names().unwrap().to_vec();
        names.sort();
        let mut orig = ds.feature_names().unwrap().to_vec();
        orig.sort();
        assert_eq!(names, orig);
        let a = subsample_features(&ds, 4, 4).unwrap();
        let b = subsample_features(&ds, 8, 4).unwrap();
        assert_eq!(a.feature_names().unwrap(), &b.feature_names().unwrap()[..4]);
        assert_ne!(feature_permutation(100, 4), feature_permutation(100, 5));
        assert!(subsample_features(&ds, 101, 4).is_err());
    }

    #[test]
    fn prefix_scenarios() {
        let mut s = SyntheticSpec::new(40, 50, Scenario::PrefixSignificant3, 2);
        let (ds, truth) = generate_synthetic(&s).unwrap();
        assert_eq!(truth.len(), 51);
        assert!(truth[31..].iter().all(|&t| t == 0.0));
        assert!((30..50).all(|j| (0..40).all(|i| ds.x().get(i, j) == 0.0)));
        s.scenario = Scenario::PrefixSignificant2;
        let (ds2, _) = generate_synthetic(&s).unwrap();
        assert!((0..40).all(|i| ds2.x().get(i, 30) == ds2.x().get(i, 0)));
        s.scenario = Scenario::PrefixSignificant1;
        let (ds1, _) = generate_synthetic(&s).unwrap();
        assert!((0..40).any(|i| ds1.x().get(i, 30) != ds1.x().get(i, 0)));
        s.d = 10;
        assert!(generate_synthetic(&s).is_err());
    }

    #[test]
    fn generation_is_pure() {
        let s = SyntheticSpec::new(30, 6, Scenario::IidNormal, 77);
        assert_eq!(generate_synthetic(&s).unwrap(), generate_synthetic(&s).unwrap());
    }

    #[test]
    fn null_model_class_balance() {
        let s = SyntheticSpec {
            signal_scale: 0.0,
            ..SyntheticSpec::new(10_000, 2, Scenario::IidNormal, 5)
        };
        let (ds, truth) = generate_synthetic(&s).unwrap();
        assert!(truth.iter().all(|&t| t == 0.0));
        let frac = ds.y().iter().map(|&v| v as f64).sum::<f64>() / 10_000.0;
        assert!((frac - 0.5).abs() <= 3.0 * 0.005, "{frac}");
    }
}
