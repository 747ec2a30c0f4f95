//! Subsampled randomized cosine transform: `B = √(n/ℓ)·R·F·D·A`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{validate_input, SketchOutput};
use crate::error::{Error, Result};
use crate::matrix::{row_space_basis, DenseMatrix, Matrix};

/// Orthonormal DCT-II of length `n`, computed with one complex FFT of
/// length `n` via the even/odd reordering of the input.
pub struct Dct {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    twiddles: Vec<Complex<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "DCT length must be positive");
        let fft = FftPlanner::new().plan_fft_forward(n);
        let nf = n as f64;
        let twiddles = (0..n)
            .map(|k| {
                let c = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                Complex::from_polar(c, -PI * k as f64 / (2.0 * nf))
            })
            .collect();
        let scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
        Dct {
            n,
            fft,
            twiddles,
            buf: vec![Complex::default(); n],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `y = F·x`.
    pub fn transform(&mut self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        // v = [x0, x2, x4, …, x5, x3, x1]
        let half = n.div_ceil(2);
        for j in 0..half {
            self.buf[j] = Complex::new(x[2 * j], 0.0);
        }
        for j in 0..n / 2 {
            self.buf[n - 1 - j] = Complex::new(x[2 * j + 1], 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for k in 0..n {
            y[k] = (self.buf[k] * self.twiddles[k]).re;
        }
    }
}

/// Signed, subsampled cosine-transform sketch.
///
/// Draws the ±1 diagonal `D` first, then ℓ of the `n` transform rows
/// uniformly without replacement. Cost is `O(d·n log n)`; each column of `A`
/// is transformed once.
pub fn dct_sketch<R: Rng + ?Sized>(a: &Matrix, ell: usize, rng: &mut R) -> Result<SketchOutput> {
    validate_input(a, ell)?;
    let (n, d) = a.shape();
    if ell > n {
        return Err(Error::invalid(format!(
            "cosine sketch needs ell <= n, got ell={ell}, n={n}"
        )));
    }
    let signs: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let picked = index::sample(rng, n, ell).into_vec();
    let scale = (n as f64 / ell as f64).sqrt();

    let mut dct = Dct::new(n);
    let mut col = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut b = DenseMatrix::zeros(ell, d);
    let columns = ColumnSource::new(a);
    for c in 0..d {
        columns.fill(c, &mut col);
        for (x, s) in col.iter_mut().zip(&signs) {
            *x *= s;
        }
        dct.transform(&col, &mut out);
        for (r, &k) in picked.iter().enumerate() {
            b.set(r, c, scale * out[k]);
        }
    }
    let v = row_space_basis(&b)?;
    Ok(SketchOutput::new(b, v, Vec::new()))
}

/// Column access for either storage format.
enum ColumnSource<'a> {
    Dense(&'a DenseMatrix),
    Csc(crate::matrix::SparseMatrix),
}

impl<'a> ColumnSource<'a> {
    fn new(a: &'a Matrix) -> Self {
        match a {
            Matrix::Dense(m) => ColumnSource::Dense(m),
            Matrix::Sparse(m) => ColumnSource::Csc(m.transpose()),
        }
    }

    fn fill(&self, c: usize, out: &mut [f64]) {
        match self {
            ColumnSource::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = m.get(i, c);
                }
            }
            ColumnSource::Csc(t) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let (rows, vals) = t.row(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    out[r] = v;
                }
            }
        }
    }
}
