use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::glm::OpCounts;

use super::chain::RunConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceStatus {
    Complete,
    /// The chain stopped early; the message is the kernel error.
    Aborted(String),
}

/// Post-warmup draws of one chain plus its cost record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub names: Vec<String>,
    /// One row per kept sweep.
    pub samples: Vec<Vec<f64>>,
    /// Wall-clock seconds of every sweep, warmup included.
    pub sweep_seconds: Vec<f64>,
    /// Multiply-adds of every sweep, warmup included.
    pub sweep_madds: Vec<u64>,
    pub kept_seconds: f64,
    pub total_seconds: f64,
    pub op_counts: OpCounts,
    pub config: RunConfig,
    pub config_hash: String,
    pub status: TraceStatus,
}

/// Short hex digest of any serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).unwrap_or_default();
    let digest = Sha256::digest(&bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl Trace {
    pub fn new(names: Vec<String>, config: RunConfig) -> Self {
        let config_hash = config_hash(&config);
        Trace {
            names,
            samples: Vec::new(),
            sweep_seconds: Vec::new(),
            sweep_madds: Vec::new(),
            kept_seconds: 0.0,
            total_seconds: 0.0,
            op_counts: OpCounts::default(),
            config,
            config_hash,
            status: TraceStatus::Complete,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == TraceStatus::Complete
    }

    pub fn n_kept(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|row| row[j]).collect()
    }

    /// Mean multiply-adds per sweep over the whole run.
    pub fn mean_sweep_madds(&self) -> f64 {
        if self.sweep_madds.is_empty() {
            return 0.0;
        }
        self.sweep_madds.iter().sum::<u64>() as f64 / self.sweep_madds.len() as f64
    }

    /// CSV with one row per kept sweep: sweep index, one column per parameter, config hash.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["sweep".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("config_hash".into());
        w.write_record(&header)?;
        for (t, row) in self.samples.iter().enumerate() {
            let mut rec = Vec::with_capacity(row.len() + 2);
            rec.push((self.config.warmup + t).to_string());
            rec.extend(row.iter().map(|v| format!("{v:.17e}")));
            rec.push(self.config_hash.clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.config.seed,
            "status": self.status,
            "kept_sweeps": self.n_kept(),
            "names": self.names,
            "timing": {
                "total_seconds": self.total_seconds,
                "kept_seconds": self.kept_seconds,
                "sweep_seconds": self.sweep_seconds,
            },
            "op_counts": self.op_counts,
            "mean_sweep_madds": self.mean_sweep_madds(),
        })
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &self.sidecar())?;
        Ok(())
    }
}

/// Numeric sample matrix read from a trace CSV, ours or external.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

const INDEX_COLUMNS: [&str; 4] = ["sweep", "iteration", "iter", "config_hash"];

/// Reads a draws CSV with a header row. Index and hash columns are dropped; every
/// remaining cell must parse as a finite number.
pub fn read_samples_csv(path: &Path) -> Result<SampleTable> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let keep: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| !INDEX_COLUMNS.contains(&h.trim().to_ascii_lowercase().as_str()))
        .map(|(i, _)| i)
        .collect();
    let names = keep.iter().map(|&i| header[i].trim().to_string()).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(keep.len());
        for &i in &keep {
            let cell = rec.get(i).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: line + 2,
                message: format!("column {:?}: not a number: {cell:?}", &header[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    context: format!("trace line {}", line + 2),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(SampleTable { names, rows })
}
