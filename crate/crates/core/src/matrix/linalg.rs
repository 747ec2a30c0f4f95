//! Economy SVD, thin QR and symmetric eigen-decomposition over
//! [`DenseMatrix`], backed by faer.

use faer::{Mat, MatRef, Side};

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Economy SVD `A = U · diag(σ) · Vᵀ` with `r = min(m, n)` triplets.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// m×r, orthonormal columns.
    pub u: DenseMatrix,
    /// Non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// r×n, orthonormal rows.
    pub vt: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U · diag(σ) · Vᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_columns(&self.sigma).matmul(&self.vt)
    }

    /// Right singular vectors as columns (n×r).
    pub fn v(&self) -> DenseMatrix {
        self.vt.transpose()
    }
}

fn to_faer(a: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(a.n_rows(), a.n_cols(), |i, j| a.get(i, j))
}

fn from_faer(m: MatRef<'_, f64>) -> DenseMatrix {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        data.extend((0..m.ncols()).map(|j| m[(i, j)]));
    }
    DenseMatrix::from_raw(m.nrows(), m.ncols(), data)
}

/// `mᵀ` in our layout, without an intermediate copy.
fn from_faer_transposed(m: MatRef<'_, f64>) -> DenseMatrix {
    from_faer(m.transpose())
}

fn check_finite(a: &DenseMatrix) -> Result<()> {
    match a.data().iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(Error::NonFinite {
            row: pos / a.n_cols(),
            col: pos % a.n_cols(),
        }),
        None => Ok(()),
    }
}

/// Economy singular value decomposition.
///
/// Singular values are sorted non-increasing. Each left singular vector is
/// signed so that its largest-magnitude entry (lowest index on ties) is
/// positive, with the matching right singular vector flipped alongside.
///
/// Every factorization is checked against the input before it is returned.
/// The dense kernel occasionally loses accuracy on rank-deficient inputs with
/// many zero rows (typical of shrunk sketch buffers); such a result is
/// rejected and the decomposition is retried on `Aᵀ`, then on `A` with its
/// zero rows removed. Only if all three fail is an error returned.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    check_finite(a)?;
    let tol = 1e-10 * a.max_abs().max(f64::MIN_POSITIVE) * (m.max(n) as f64).sqrt();
    let mut worst = 0.0f64;
    for attempt in [svd_direct, svd_transposed, svd_compacted] {
        let (mut u, sigma, mut vt) = attempt(a)?;
        let err = u.scale_columns(&sigma).matmul(&vt).max_abs_diff(a);
        if err <= tol {
            canonicalize_signs(&mut u, &mut vt);
            return Ok(SvdResult { u, sigma, vt });
        }
        worst = worst.max(err);
    }
    Err(Error::Numerical(format!(
        "svd of {m}x{n} matrix is inaccurate (residual {worst:e})"
    )))
}

type Triplets = (DenseMatrix, Vec<f64>, DenseMatrix);

fn svd_direct(a: &DenseMatrix) -> Result<Triplets> {
    let (m, n) = a.shape();
    let dec = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd of {m}x{n} matrix failed: {e:?}")))?;
    let sigma = (0..m.min(n)).map(|i| dec.S()[i]).collect();
    Ok((from_faer(dec.U()), sigma, from_faer_transposed(dec.V())))
}

/// `Aᵀ = U'ΣV'ᵀ` gives `A = V'ΣU'ᵀ`.
fn svd_transposed(a: &DenseMatrix) -> Result<Triplets> {
    let (u, sigma, vt) = svd_direct(&a.transpose())?;
    Ok((vt.transpose(), sigma, u.transpose()))
}

/// Factors the nonzero rows only. Zero rows get zero rows in `U`; missing
/// triplets (when fewer than `min(m, n)` rows are nonzero) are filled with
/// zero singular values, unit vectors on the zero rows, and an orthonormal
/// completion of `V`.
fn svd_compacted(a: &DenseMatrix) -> Result<Triplets> {
    let (m, n) = a.shape();
    let r = m.min(n);
    let keep: Vec<usize> = (0..m).filter(|&i| a.row(i).iter().any(|&v| v != 0.0)).collect();
    let dropped: Vec<usize> = (0..m).filter(|&i| a.row(i).iter().all(|&v| v == 0.0)).collect();
    let mut u = DenseMatrix::zeros(m, r);
    let mut sigma = vec![0.0; r];
    let mut vt = DenseMatrix::zeros(r, n);
    let mut have = 0;
    if !keep.is_empty() {
        let c = DenseMatrix::from_fn(keep.len(), n, |i, j| a.get(keep[i], j))?;
        let (cu, cs, cvt) = svd_direct(&c)?;
        have = cs.len();
        for (t, &i) in keep.iter().enumerate() {
            for j in 0..have {
                u.set(i, j, cu.get(t, j));
            }
        }
        sigma[..have].copy_from_slice(&cs);
        for j in 0..have {
            vt.row_mut(j).copy_from_slice(cvt.row(j));
        }
    }
    if have < r {
        // the trailing columns of a full QR of the kept V span its complement
        let q = if have == 0 {
            Mat::identity(n, n)
        } else {
            to_faer(&vt.slice_rows(0..have).transpose()).qr().compute_Q()
        };
        for (j, &i) in (have..r).zip(&dropped) {
            u.set(i, j, 1.0);
            for c in 0..n {
                vt.set(j, c, q[(c, j)]);
            }
        }
    }
    Ok((u, sigma, vt))
}

fn canonicalize_signs(u: &mut DenseMatrix, vt: &mut DenseMatrix) {
    let (m, r) = u.shape();
    for j in 0..r {
        let mut best = 0.0f64;
        let mut best_val = 0.0;
        for i in 0..m {
            let v = u.get(i, j);
            if v.abs() > best {
                best = v.abs();
                best_val = v;
            }
        }
        if best_val < 0.0 {
            for i in 0..m {
                u.set(i, j, -u.get(i, j));
            }
            vt.row_mut(j).iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Householder thin QR of an m×n matrix with `m ≥ n`: `Q` is m×n with
/// orthonormal columns and `R` is n×n upper triangular.
///
/// Rank-deficient inputs are accepted; `Q` still has orthonormal columns.
pub fn thin_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::dims(format!("thin_qr needs rows >= cols, got {m}x{n}")));
    }
    check_finite(a)?;
    if n == 0 {
        return Ok((DenseMatrix::zeros(m, 0), DenseMatrix::zeros(0, 0)));
    }
    let qr = to_faer(a).qr();
    Ok((from_faer(qr.compute_thin_Q().as_ref()), upper(qr.thin_R())))
}

fn upper(r: MatRef<'_, f64>) -> DenseMatrix {
    let mut r = from_faer(r);
    for i in 0..r.n_rows() {
        for j in 0..i.min(r.n_cols()) {
            r.set(i, j, 0.0);
        }
    }
    r
}

/// The triangular factor of a Householder QR of a matrix with `m ≥ n`,
/// without forming `Q`.
pub(crate) fn qr_r(a: &DenseMatrix) -> DenseMatrix {
    debug_assert!(a.n_rows() >= a.n_cols());
    upper(to_faer(a).qr().thin_R())
}

/// Orthonormal basis (as columns) of a subspace containing the row space
/// of `b`, taken from the QR factorization of `bᵀ`.
///
/// Returns `min(rows, cols)` columns. When `b` has more rows than columns the
/// basis is the full space.
pub fn row_space_basis(b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.n_rows() == 0 || b.n_cols() == 0 {
        return Err(Error::invalid("row space of an empty matrix"));
    }
    check_finite(b)?;
    let qr = to_faer(&b.transpose()).qr();
    Ok(from_faer(qr.compute_thin_Q().as_ref()))
}

/// Singular values only, sorted non-increasing.
///
/// Much cheaper than [`svd`] on large inputs. With no vectors to verify
/// against, the result is checked through `Σσ² = ‖A‖_F²` instead.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    check_finite(a)?;
    let mut sigma = to_faer(a)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd of {m}x{n} matrix failed: {e:?}")))?;
    sigma.sort_by(|x, y| y.total_cmp(x));
    let norm_sq = a.frobenius_norm_sq();
    let sum: f64 = sigma.iter().map(|s| s * s).sum();
    if !((sum - norm_sq).abs() <= 1e-10 * norm_sq.max(f64::MIN_POSITIVE)) {
        return Err(Error::Numerical(format!(
            "singular values of {m}x{n} matrix are inaccurate (energy {sum:e} vs {norm_sq:e})"
        )));
    }
    Ok(sigma)
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues sorted
/// non-increasing and the matching eigenvectors as columns, each signed
/// like the left singular vectors of [`svd`].
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = check_symmetric(a)?;
    let dec = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen-decomposition of {n}x{n} matrix failed: {e:?}")))?;
    // faer sorts ascending
    let values = (0..n).rev().map(|i| dec.S()[i]).collect();
    let vectors = from_faer(dec.U());
    let mut out = DenseMatrix::zeros(n, n);
    for c in 0..n {
        let col = vectors.column(n - 1 - c);
        let mut best = (0.0f64, 0.0f64);
        for &v in &col {
            if v.abs() > best.0 {
                best = (v.abs(), v);
            }
        }
        let sign = if best.1 < 0.0 { -1.0 } else { 1.0 };
        for (r, v) in col.into_iter().enumerate() {
            out.set(r, c, sign * v);
        }
    }
    Ok((values, out))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    let n = check_symmetric(a)?;
    let vals = to_faer(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalues of {n}x{n} matrix failed: {e:?}")))?;
    Ok(vals[n - 1])
}

fn check_symmetric(a: &DenseMatrix) -> Result<usize> {
    let n = a.n_rows();
    if n == 0 || a.n_cols() != n {
        return Err(Error::dims(format!(
            "symmetric eigen-decomposition needs a non-empty square matrix, got {}x{}",
            n,
            a.n_cols()
        )));
    }
    check_finite(a)?;
    let sym = a.max_abs_diff(&a.transpose());
    if sym > 1e-10 * a.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(format!("matrix is not symmetric (asymmetry {sym:e})")));
    }
    Ok(n)
}
