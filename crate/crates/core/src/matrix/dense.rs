use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.n_cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Square matrix with `diag` on its diagonal.
    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in diag.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::from_vec(n, n, data)
    }

    /// Wraps a row-major buffer, rejecting wrong lengths and non-finite entries.
    pub fn from_vec(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::dims(format!(
                "buffer of length {} cannot hold a {}x{} matrix",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n_cols.max(1),
                col: pos % n_cols.max(1),
            });
        }
        Ok(DenseMatrix {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::dims(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(n_rows, n_cols, data)
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(n_rows, n_cols, data)
    }

    /// Builds a matrix from values the caller has already produced by
    /// finite arithmetic on finite inputs.
    pub(crate) fn from_raw(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_rows * n_cols);
        DenseMatrix {
            n_rows,
            n_cols,
            data,
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let width = self.n_cols.max(1);
        self.data
            .chunks_exact(width)
            .take(if self.n_cols == 0 { 0 } else { self.n_rows })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[j * self.n_rows + i] = self.data[i * self.n_cols + j];
            }
        }
        DenseMatrix::from_raw(self.n_cols, self.n_rows, out)
    }

    /// Copy of the rows in `range`.
    pub fn slice_rows(&self, range: Range<usize>) -> DenseMatrix {
        let data = self.data[range.start * self.n_cols..range.end * self.n_cols].to_vec();
        DenseMatrix::from_raw(range.len(), self.n_cols, data)
    }

    /// Copy of the leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> DenseMatrix {
        assert!(k <= self.n_cols);
        let mut data = Vec::with_capacity(self.n_rows * k);
        for r in self.rows() {
            data.extend_from_slice(&r[..k]);
        }
        DenseMatrix::from_raw(self.n_rows, k, data)
    }

    /// Copy with zero rows appended (or rows dropped) so it has `n_rows` rows.
    pub(crate) fn resized_rows(&self, n_rows: usize) -> DenseMatrix {
        let mut data = self.data.clone();
        data.resize(n_rows * self.n_cols, 0.0);
        DenseMatrix::from_raw(n_rows, self.n_cols, data)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix::from_raw(self.n_rows, self.n_cols, data)
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        let data = self.data.iter().map(|v| alpha * v).collect();
        DenseMatrix::from_raw(self.n_rows, self.n_cols, data)
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> DenseMatrix {
        assert_eq!(scale.len(), self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for (v, s) in out.row_mut(i).iter_mut().zip(scale) {
                *v *= s;
            }
        }
        out
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> DenseMatrix {
        assert_eq!(scale.len(), self.n_rows);
        let mut out = self.clone();
        for (i, s) in scale.iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    /// `self · other`
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows, "matmul inner dimension");
        gemm(
            View::plain(self),
            View::plain(other),
            self.n_rows,
            self.n_cols,
            other.n_cols,
        )
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_rows, other.n_rows, "t_matmul inner dimension");
        gemm(
            View::transposed(self),
            View::plain(other),
            self.n_cols,
            self.n_rows,
            other.n_cols,
        )
    }

    /// `self · otherᵀ`
    pub fn matmul_t(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_cols, "matmul_t inner dimension");
        gemm(
            View::plain(self),
            View::transposed(other),
            self.n_rows,
            self.n_cols,
            other.n_rows,
        )
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        self.rows().map(|r| dot(r, x)).collect()
    }

    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows);
        let mut out = vec![0.0; self.n_cols];
        for (r, &xi) in self.rows().zip(x) {
            if xi != 0.0 {
                axpy(xi, r, &mut out);
            }
        }
        out
    }

    /// `max |selfᵀ self − I|` over all entries.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.t_matmul(self);
        let mut err: f64 = 0.0;
        for i in 0..g.n_rows {
            for j in 0..g.n_cols {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g.get(i, j) - target).abs());
            }
        }
        err
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n_rows).all(|i| (0..i.min(self.n_cols)).all(|j| self.get(i, j) == 0.0))
    }
}

#[derive(Clone, Copy)]
struct View<'a> {
    data: &'a [f64],
    row_stride: isize,
    col_stride: isize,
}

impl<'a> View<'a> {
    fn plain(m: &'a DenseMatrix) -> Self {
        View {
            data: &m.data,
            row_stride: m.n_cols as isize,
            col_stride: 1,
        }
    }

    fn transposed(m: &'a DenseMatrix) -> Self {
        View {
            data: &m.data,
            row_stride: 1,
            col_stride: m.n_cols as isize,
        }
    }
}

fn gemm(a: View<'_>, b: View<'_>, m: usize, k: usize, n: usize) -> DenseMatrix {
    let mut out = vec![0.0; m * n];
    if m == 0 || n == 0 || k == 0 {
        return DenseMatrix::from_raw(m, n, out);
    }
    // SAFETY: the views cover buffers whose strides and extents were
    // checked against (m, k, n) by the callers' dimension asserts, and
    // `out` is a fresh m×n row-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.row_stride,
            a.col_stride,
            b.data.as_ptr(),
            b.row_stride,
            b.col_stride,
            0.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    DenseMatrix::from_raw(m, n, out)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn products_agree_with_naive() {
        let a = DenseMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64 - 5.0).unwrap();
        let b = DenseMatrix::from_fn(4, 2, |i, j| (i as f64) * 0.5 - j as f64).unwrap();
        let c = a.matmul(&b);
        for i in 0..3 {
            for j in 0..2 {
                let expect: f64 = (0..4).map(|t| a.get(i, t) * b.get(t, j)).sum();
                assert!((c.get(i, j) - expect).abs() < 1e-12);
            }
        }
        assert!(a.transpose().t_matmul(&b.transpose().transpose()).max_abs_diff(&c) < 1e-12);
        assert!(a.matmul_t(&b.transpose()).max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn matvec_pair() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(a.matvec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
        assert_eq!(a.t_matvec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
    }

    #[test]
    fn empty_shapes() {
        let a = DenseMatrix::zeros(0, 3);
        assert_eq!(a.rows().count(), 0);
        let b = DenseMatrix::zeros(3, 0);
        assert_eq!(b.rows().count(), 0);
        assert_eq!(a.matmul(&DenseMatrix::zeros(3, 2)).shape(), (0, 2));
    }
}
