use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::glm::{Dataset, DesignMatrix};

fn parse_label(raw: &str, line: usize) -> Result<u8> {
    let t = raw.trim();
    let bad = || Error::NonBinaryLabel {
        label: t.to_string(),
        line,
    };
    match t.parse::<f64>() {
        Ok(v) if v == 0.0 => Ok(0),
        Ok(v) if v == 1.0 => Ok(1),
        _ => Err(bad()),
    }
}

/// Reads a CSV with a header row. `y_column` names the binary response; every
/// other column is a feature.
pub fn load_csv(path: &Path, y_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    let y_idx = header.iter().position(|h| h == y_column).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("no column named {y_column:?} in header"),
    })?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != y_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let d = names.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); d];
    let mut y = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let mut j = 0;
        for (i, cell) in rec.iter().enumerate() {
            if i == y_idx {
                y.push(parse_label(cell, line)?);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {:?}: not a number: {cell:?}", &header[i]),
            })?;
            columns[j].push(v);
            j += 1;
        }
    }
    let n = y.len();
    let x = DesignMatrix::from_col_major(n, d, columns.concat())?;
    Ok(Dataset::new(x, y, Some(names))?.with_auto_storage())
}

/// Writes `dataset` as CSV with feature columns followed by `y_column`, every value
/// with 17 significant digits so that reading it back is exact.
pub fn save_csv(dataset: &Dataset, path: &Path, y_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..dataset.d()).map(|j| dataset.feature_name(j)).collect();
    header.push(y_column.to_string());
    w.write_record(&header)?;
    let x = dataset.x();
    for i in 0..dataset.n() {
        let mut rec: Vec<String> = (0..dataset.d()).map(|j| format!("{:.16e}", x.get(i, j))).collect();
        rec.push(dataset.y()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `label idx:value ...` lines with 1-based indices. Labels may be `0/1` or
/// `-1/+1`. Without `d` the width is the largest index seen.
pub fn load_libsvm(path: &Path, d: Option<usize>) -> Result<Dataset> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut y = Vec::new();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_idx = 0;
    for (row, text) in reader.lines().enumerate() {
        let line = row + 1;
        let text = text?;
        let body = text.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let label = fields.next().unwrap_or_default();
        let yi = match label.trim_start_matches('+').parse::<f64>() {
            Ok(v) if v == 1.0 => 1,
            Ok(v) if v == 0.0 || v == -1.0 => 0,
            _ => {
                return Err(Error::NonBinaryLabel {
                    label: label.to_string(),
                    line,
                })
            }
        };
        let i = y.len();
        y.push(yi);
        for f in fields {
            let (idx, val) = f.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected idx:value, found {f:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    message: "feature indices are 1-based".into(),
                });
            }
            if let Some(d) = d {
                if idx > d {
                    return Err(Error::Parse {
                        line,
                        message: format!("feature index {idx} exceeds declared d = {d}"),
                    });
                }
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad feature value {val:?}"),
            })?;
            max_idx = max_idx.max(idx);
            if val != 0.0 {
                triplets.push((idx - 1, i, val));
            }
        }
    }
    let ncols = d.unwrap_or(max_idx);
    let nrows = y.len();
    triplets.sort_by_key(|&(j, i, _)| (j, i));
    if let Some(w) = triplets.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
        return Err(Error::Parse {
            line: w[0].1 + 1,
            message: format!("feature {} given twice", w[0].0 + 1),
        });
    }
    let mut col_ptr = vec![0usize; ncols + 1];
    for &(j, _, _) in &triplets {
        col_ptr[j + 1] += 1;
    }
    for j in 0..ncols {
        col_ptr[j + 1] += col_ptr[j];
    }
    let x = DesignMatrix::Sparse {
        nrows,
        ncols,
        col_ptr,
        row_idx: triplets.iter().map(|t| t.1).collect(),
        values: triplets.iter().map(|t| t.2).collect(),
    };
    Ok(Dataset::new(x, y, None)?.with_auto_storage())
}
