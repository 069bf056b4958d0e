use crate::error::{Error, Result};

/// Fraction of zero entries above which [`DesignMatrix::auto_storage`] switches to
/// compressed sparse columns.
pub const SPARSE_STORAGE_THRESHOLD: f64 = 0.5;

/// An `n x d` design matrix stored for fast column access.
///
/// Coordinate updates walk one column at a time, so both layouts are column-major.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignMatrix {
    Dense {
        nrows: usize,
        ncols: usize,
        /// column-major, `values[j * nrows + i] = x_ij`
        values: Vec<f64>,
    },
    Sparse {
        nrows: usize,
        ncols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// Iterator over the stored entries `(row, value)` of one column.
///
/// Dense columns yield every row, sparse columns only explicit nonzeros.
pub enum ColumnIter<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Dense(it) => it.next().map(|(i, &v)| (i, v)),
            ColumnIter::Sparse(it) => it.next().map(|(&i, &v)| (i, v)),
        }
    }
}

impl DesignMatrix {
    pub fn from_col_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                actual: values.len(),
                context: "column-major design matrix",
            });
        }
        Ok(DesignMatrix::Dense {
            nrows,
            ncols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut values = vec![0.0; nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    actual: row.len(),
                    context: "design matrix row",
                });
            }
            for (j, &v) in row.iter().enumerate() {
                values[j * nrows + i] = v;
            }
        }
        Self::from_col_major(nrows, ncols, values)
    }

    pub fn nrows(&self) -> usize {
        match self {
            DesignMatrix::Dense { nrows, .. } | DesignMatrix::Sparse { nrows, .. } => *nrows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DesignMatrix::Dense { ncols, .. } | DesignMatrix::Sparse { ncols, .. } => *ncols,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DesignMatrix::Sparse { .. })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            DesignMatrix::Dense { nrows, values, .. } => values[j * nrows + i],
            DesignMatrix::Sparse {
                col_ptr,
                row_idx,
                values,
                ..
            } => {
                let (start, end) = (col_ptr[j], col_ptr[j + 1]);
                match row_idx[start..end].binary_search(&i) {
                    Ok(k) => values[start + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    #[inline]
    pub fn column(&self, j: usize) -> ColumnIter<'_> {
        match self {
            DesignMatrix::Dense { nrows, values, .. } => {
                ColumnIter::Dense(values[j * nrows..(j + 1) * nrows].iter().enumerate())
            }
            DesignMatrix::Sparse {
                col_ptr,
                row_idx,
                values,
                ..
            } => {
                let (start, end) = (col_ptr[j], col_ptr[j + 1]);
                ColumnIter::Sparse(row_idx[start..end].iter().zip(values[start..end].iter()))
            }
        }
    }

    /// `out += alpha · x_j`.
    #[inline]
    pub fn add_scaled_column(&self, j: usize, alpha: f64, out: &mut [f64]) {
        match self {
            DesignMatrix::Dense { nrows, values, .. } => {
                for (o, x) in out.iter_mut().zip(&values[j * nrows..(j + 1) * nrows]) {
                    *o += x * alpha;
                }
            }
            DesignMatrix::Sparse { .. } => {
                for (i, x) in self.column(j) {
                    out[i] += x * alpha;
                }
            }
        }
    }

    /// Number of stored entries in column `j` (all rows when dense).
    pub fn column_len(&self, j: usize) -> usize {
        match self {
            DesignMatrix::Dense { nrows, .. } => *nrows,
            DesignMatrix::Sparse { col_ptr, .. } => col_ptr[j + 1] - col_ptr[j],
        }
    }

    /// Number of stored entries overall; the multiply-add cost of one product `X v`.
    pub fn stored_len(&self) -> usize {
        match self {
            DesignMatrix::Dense { values, .. } | DesignMatrix::Sparse { values, .. } => {
                values.len()
            }
        }
    }

    pub fn zero_fraction(&self) -> f64 {
        let total = self.nrows() * self.ncols();
        if total == 0 {
            return 0.0;
        }
        let nonzero = match self {
            DesignMatrix::Dense { values, .. } => values.iter().filter(|v| **v != 0.0).count(),
            DesignMatrix::Sparse { values, .. } => values.iter().filter(|v| **v != 0.0).count(),
        };
        1.0 - nonzero as f64 / total as f64
    }

    /// `out = X v`, accumulated column by column.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &vj) in v.iter().enumerate().take(self.ncols()) {
            self.add_scaled_column(j, vj, out);
        }
    }

    /// Dense column-major copy of the entries.
    pub fn to_col_major(&self) -> Vec<f64> {
        match self {
            DesignMatrix::Dense { values, .. } => values.clone(),
            DesignMatrix::Sparse { nrows, ncols, .. } => {
                let mut out = vec![0.0; nrows * ncols];
                for j in 0..*ncols {
                    for (i, v) in self.column(j) {
                        out[j * nrows + i] = v;
                    }
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> DesignMatrix {
        DesignMatrix::Dense {
            nrows: self.nrows(),
            ncols: self.ncols(),
            values: self.to_col_major(),
        }
    }

    pub fn to_sparse(&self) -> DesignMatrix {
        let (nrows, ncols) = (self.nrows(), self.ncols());
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..ncols {
            for (i, v) in self.column(j) {
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        DesignMatrix::Sparse {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Dense storage unless more than half of the entries are zero.
    pub fn auto_storage(self) -> DesignMatrix {
        let sparse = self.zero_fraction() > SPARSE_STORAGE_THRESHOLD;
        match (sparse, self.is_sparse()) {
            (true, false) => self.to_sparse(),
            (false, true) => self.to_dense(),
            _ => self,
        }
    }

    /// Keeps the listed columns in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> DesignMatrix {
        let nrows = self.nrows();
        let mut values = Vec::with_capacity(nrows * columns.len());
        for &j in columns {
            let start = values.len();
            values.resize(start + nrows, 0.0);
            for (i, v) in self.column(j) {
                values[start + i] = v;
            }
        }
        let dense = DesignMatrix::Dense {
            nrows,
            ncols: columns.len(),
            values,
        };
        if self.is_sparse() {
            dense.to_sparse()
        } else {
            dense
        }
    }
}

/// Observed covariates and binary responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DesignMatrix,
    y: Vec<u8>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: DesignMatrix, y: Vec<u8>, feature_names: Option<Vec<String>>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs n >= 1 and d >= 1, got n={} d={}",
                x.nrows(),
                x.ncols()
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                actual: y.len(),
                context: "response vector",
            });
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!(
                "response {} at row {i} is not in {{0,1}}",
                y[i]
            )));
        }
        for j in 0..x.ncols() {
            for (i, v) in x.column(j) {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        value: v,
                        context: format!("design matrix entry ({i}, {j})"),
                    });
                }
            }
        }
        if let Some(names) = &feature_names {
            if names.len() != x.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: x.ncols(),
                    actual: names.len(),
                    context: "feature names",
                });
            }
        }
        Ok(Dataset {
            x,
            y,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Feature label for column `j`, falling back to `x{j}`.
    pub fn feature_name(&self, j: usize) -> String {
        self.feature_names
            .as_ref()
            .map_or_else(|| format!("x{j}"), |names| names[j].clone())
    }

    pub fn into_parts(self) -> (DesignMatrix, Vec<u8>, Option<Vec<String>>) {
        (self.x, self.y, self.feature_names)
    }

    /// Same data with storage re-chosen by zero fraction.
    pub fn with_auto_storage(self) -> Self {
        Dataset {
            x: self.x.auto_storage(),
            ..self
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.d()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.d(),
                context: "column selection",
            });
        }
        let names = self
            .feature_names
            .as_ref()
            .map(|names| columns.iter().map(|&j| names[j].clone()).collect());
        Dataset::new(self.x.select_columns(columns), self.y.clone(), names)
    }
}
