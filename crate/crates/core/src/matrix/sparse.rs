use crate::error::{Error, Result};

use super::dense::{axpy, DenseMatrix};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Bookkeeping from assembling a matrix out of coordinate entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    /// Entries handed to the assembler.
    pub entries: usize,
    /// Entries merged into an earlier entry at the same coordinate.
    pub duplicates: usize,
    /// Coordinates whose (summed) value was exactly zero and were not stored.
    pub zeros_dropped: usize,
}

impl SparseMatrix {
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::dims(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::invalid("row_ptr does not delimit the stored entries"));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::invalid(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::invalid(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
            for (&c, &v) in cols.iter().zip(&values[lo..hi]) {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: c });
                }
                if v == 0.0 {
                    return Err(Error::invalid(format!("explicit zero stored at ({i}, {c})")));
                }
            }
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assembles a matrix from `(row, col, value)` entries, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        Self::from_triplets_with_stats(n_rows, n_cols, triplets).map(|(m, _)| m)
    }

    pub fn from_triplets_with_stats(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<(Self, AssemblyStats)> {
        let mut stats = AssemblyStats {
            entries: triplets.len(),
            ..Default::default()
        };
        for &(r, c, v) in &triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
        // stable sort keeps input order among duplicates, so summation order is reproducible
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                stats.duplicates += 1;
                iter.next();
            }
            if v == 0.0 {
                stats.zeros_dropped += 1;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok((
            SparseMatrix {
                n_rows,
                n_cols,
                row_ptr,
                col_idx,
                values,
            },
            stats,
        ))
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(dense.n_rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in dense.rows() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        row_ptr.resize(dense.n_rows() + 1, col_idx.len());
        SparseMatrix {
            n_rows: dense.n_rows(),
            n_cols: dense.n_cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let row = out.row_mut(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let p = next[c];
                col_idx[p] = i;
                values[p] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows);
        let mut out = vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * xi;
            }
        }
        out
    }

    /// `self · x` for a dense right-hand side.
    pub fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, x.n_rows(), "mul_dense inner dimension");
        let mut out = DenseMatrix::zeros(self.n_rows, x.n_cols());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let orow = out.row_mut(i);
            for (&c, &v) in cols.iter().zip(vals) {
                axpy(v, x.row(c), orow);
            }
        }
        out
    }

    /// Copy of the rows in `range`.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> SparseMatrix {
        let (lo, hi) = (self.row_ptr[range.start], self.row_ptr[range.end]);
        let row_ptr = self.row_ptr[range.start..=range.end].iter().map(|p| p - lo).collect();
        SparseMatrix {
            n_rows: range.len(),
            n_cols: self.n_cols,
            row_ptr,
            col_idx: self.col_idx[lo..hi].to_vec(),
            values: self.values[lo..hi].to_vec(),
        }
    }

    pub(crate) fn from_rows_unchecked(
        n_cols: usize,
        rows: impl Iterator<Item = (Vec<usize>, Vec<f64>)>,
    ) -> SparseMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (c, v) in rows {
            col_idx.extend(c);
            values.extend(v);
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            n_rows: row_ptr.len() - 1,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}
