use crate::error::{Error, Result};
use crate::glm::Dataset;

/// Shape and zero fraction of a published benchmark dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownDataset {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    pub sparsity: f64,
}

pub const KNOWN_DATASETS: &[KnownDataset] = &[
    KnownDataset { name: "ALLAML", n: 72, d: 7129, sparsity: 3.3e-5 },
    KnownDataset { name: "BASEHOCK", n: 1993, d: 4862, sparsity: 0.9861 },
    KnownDataset { name: "GLI_85", n: 85, d: 22283, sparsity: 0.0 },
    KnownDataset { name: "PCMAC", n: 1943, d: 3289, sparsity: 0.9854 },
    KnownDataset { name: "Prostate_GE", n: 102, d: 5966, sparsity: 0.0 },
    KnownDataset { name: "RELATHE", n: 1427, d: 4322, sparsity: 0.9805 },
    KnownDataset { name: "SMK_CAN_187", n: 187, d: 19993, sparsity: 0.0 },
    KnownDataset { name: "arcene", n: 200, d: 10000, sparsity: 0.4562 },
    KnownDataset { name: "colon", n: 62, d: 2000, sparsity: 0.4158 },
    KnownDataset { name: "gisette", n: 7000, d: 5000, sparsity: 0.87 },
    KnownDataset { name: "leukemia", n: 72, d: 7070, sparsity: 0.4368 },
    KnownDataset { name: "madelon", n: 2600, d: 500, sparsity: 7.6e-7 },
];

/// Case-insensitive lookup by name.
pub fn known_dataset(name: &str) -> Option<&'static KnownDataset> {
    KNOWN_DATASETS.iter().find(|k| k.name.eq_ignore_ascii_case(name))
}

impl KnownDataset {
    /// Errors unless `dataset` has exactly the registered `n` and `d`. Sparsity
    /// is not enforced.
    pub fn check_shape(&self, dataset: &Dataset) -> Result<()> {
        if dataset.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: dataset.n(),
                context: "registered sample size",
            });
        }
        if dataset.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: dataset.d(),
                context: "registered feature count",
            });
        }
        Ok(())
    }
}
