//! Rank-k approximations `Ã_k = [AV]_k Vᵀ` from a sketch basis, the
//! approximate SVD built from the same basis, and the error ratios against
//! the truncated SVD.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{qr_r, svd, symmetric_max_eigenvalue, DenseMatrix, Matrix};
use crate::rng::SketchRng;

/// Factors of a rank-≤k matrix `left · right_basisᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankFactors {
    /// n×r column factor.
    pub left: DenseMatrix,
    /// d×r, orthonormal columns.
    pub right_basis: DenseMatrix,
    /// Requested rank; `r ≤ k`.
    pub k: usize,
}

impl LowRankFactors {
    pub fn rank(&self) -> usize {
        self.left.n_cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.n_rows(), self.right_basis.n_rows())
    }

    /// Dense `left · right_basisᵀ`. For tests and small problems.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.left.matmul_t(&self.right_basis)
    }

    pub fn frobenius_norm(&self) -> f64 {
        // right_basis is orthonormal, so ‖L Rᵀ‖_F = ‖L‖_F
        self.left.frobenius_norm()
    }
}

/// Truncated SVD `A_k`: `left = U_k Σ_k`, `right_basis = V_k`.
pub fn best_rank_k(a: &DenseMatrix, k: usize) -> Result<LowRankFactors> {
    let r = a.n_rows().min(a.n_cols());
    if k == 0 || k > r {
        return Err(Error::invalid(format!("rank k={k} must lie in 1..={r}")));
    }
    let s = svd(a)?;
    Ok(LowRankFactors {
        left: s.u.leading_columns(k).scale_columns(&s.sigma[..k]),
        right_basis: s.v().leading_columns(k),
        k,
    })
}

const ORTHONORMAL_TOL: f64 = 1e-8;

fn check_basis(a: &Matrix, v: &DenseMatrix) -> Result<()> {
    if v.n_rows() != a.n_cols() {
        return Err(Error::dims(format!(
            "basis has {} rows but the matrix has {} columns",
            v.n_rows(),
            a.n_cols()
        )));
    }
    if v.n_cols() == 0 {
        return Err(Error::invalid("basis has no columns"));
    }
    let err = v.orthonormality_error();
    if !(err <= ORTHONORMAL_TOL) {
        return Err(Error::invalid(format!(
            "basis columns are not orthonormal (max |VᵀV − I| = {err:e})"
        )));
    }
    Ok(())
}

/// `Ã_k = [AV]_k Vᵀ`, the best rank-k approximation of `A` whose rows lie
/// in the span of `V`.
///
/// Only the triangular factor of `AV` and an ℓ×ℓ SVD are computed: with
/// `AV = QR` and `R = U Σ Wᵀ`, the factors are `left = AV·W_k` and
/// `right_basis = V·W_k`.
pub fn approx_from_basis(a: &Matrix, v: &DenseMatrix, k: usize) -> Result<LowRankFactors> {
    check_basis(a, v)?;
    if k == 0 || k > v.n_cols() {
        return Err(Error::invalid(format!(
            "rank k={k} must lie in 1..={} (the basis size)",
            v.n_cols()
        )));
    }
    let av = a.mul_dense(v);
    let w = if av.n_rows() >= av.n_cols() {
        svd(&qr_r(&av))?.v()
    } else {
        svd(&av)?.v()
    };
    let w_k = w.leading_columns(k.min(w.n_cols()));
    Ok(LowRankFactors {
        left: av.matmul(&w_k),
        right_basis: v.matmul(&w_k),
        k,
    })
}

/// Approximate SVD `A ≈ Ũ Σ̃ Ṽᵀ` with `AV = Ũ Σ̃ V̂ᵀ` and `Ṽ = V V̂`.
#[derive(Clone, Debug)]
pub struct ApproxSvd {
    pub u_tilde: DenseMatrix,
    pub sigma_tilde: Vec<f64>,
    pub v_tilde: DenseMatrix,
}

impl ApproxSvd {
    /// `Ũ Σ̃ Ṽᵀ = AVVᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u_tilde.scale_columns(&self.sigma_tilde).matmul_t(&self.v_tilde)
    }
}

pub fn approx_svd(a: &Matrix, v: &DenseMatrix) -> Result<ApproxSvd> {
    check_basis(a, v)?;
    let s = svd(&a.mul_dense(v))?;
    let v_tilde = v.matmul(&s.v());
    Ok(ApproxSvd {
        u_tilde: s.u,
        sigma_tilde: s.sigma,
        v_tilde,
    })
}

/// Frobenius and spectral norms of a residual `A − X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualNorms {
    pub fro: f64,
    pub spec: f64,
}

impl ResidualNorms {
    /// Residual of the truncated SVD, read off the singular values:
    /// `‖A − A_k‖_F² = Σ_{i>k} σ_i²` and `‖A − A_k‖₂ = σ_{k+1}`.
    pub fn of_truncation(sigma: &[f64], k: usize) -> Self {
        let tail = sigma.get(k..).unwrap_or(&[]);
        ResidualNorms {
            fro: tail.iter().map(|s| s * s).sum::<f64>().sqrt(),
            spec: tail.first().copied().unwrap_or(0.0),
        }
    }
}

/// Above this many columns the spectral norm falls back to power iteration.
const GRAM_MAX_COLS: usize = 2048;
const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITER: usize = 1000;
const BLOCK_ROWS: usize = 256;

/// `‖A − LRᵀ‖_F` and `‖A − LRᵀ‖₂` without forming the n×d residual.
///
/// The residual is streamed in row blocks `E_b = A_b − L_b Rᵀ`, summing
/// `‖E_b‖_F²` and `E_bᵀE_b`; the spectral norm is then the square root of the
/// largest eigenvalue of the d×d Gram matrix, which is accurate to working
/// precision even when the residual spectrum is flat. Very wide inputs use
/// power iteration on `EᵀE` instead, with the Frobenius norm from factor
/// algebra.
pub fn residual_norms(a: &Matrix, f: &LowRankFactors) -> Result<ResidualNorms> {
    residual_norms_with(a, f, GRAM_MAX_COLS)
}

fn residual_norms_with(a: &Matrix, f: &LowRankFactors, gram_max_cols: usize) -> Result<ResidualNorms> {
    if f.shape() != a.shape() {
        return Err(Error::dims(format!(
            "factors are {:?}, matrix is {:?}",
            f.shape(),
            a.shape()
        )));
    }
    if a.n_cols() <= gram_max_cols {
        let (fro_sq, gram) = streamed_gram(a, f);
        let top = symmetric_max_eigenvalue(&gram)?;
        Ok(ResidualNorms {
            fro: fro_sq.sqrt(),
            spec: top.max(0.0).sqrt(),
        })
    } else {
        Ok(ResidualNorms {
            fro: factor_frobenius(a, f),
            spec: power_spectral(a, f)?,
        })
    }
}

fn streamed_gram(a: &Matrix, f: &LowRankFactors) -> (f64, DenseMatrix) {
    let (n, d) = a.shape();
    let mut gram = DenseMatrix::zeros(d, d);
    let mut fro_sq = 0.0;
    for start in (0..n).step_by(BLOCK_ROWS) {
        let end = (start + BLOCK_ROWS).min(n);
        let block = a.dense_row_block(start, end - start);
        let e = block.sub(&f.left.slice_rows(start..end).matmul_t(&f.right_basis));
        fro_sq += e.frobenius_norm_sq();
        let g = e.t_matmul(&e);
        for (x, y) in gram.data_mut().iter_mut().zip(g.data()) {
            *x += y;
        }
    }
    (fro_sq, gram)
}

/// `‖A‖² − 2⟨L, AR⟩ + ‖L‖²`, re-done by streaming when cancellation has
/// eaten most of the digits.
fn factor_frobenius(a: &Matrix, f: &LowRankFactors) -> f64 {
    let total = a.frobenius_norm_sq();
    let ar = a.mul_dense(&f.right_basis);
    let cross: f64 = ar.data().iter().zip(f.left.data()).map(|(x, y)| x * y).sum();
    let value = total - 2.0 * cross + f.left.frobenius_norm_sq();
    if value > 1e-6 * total {
        return value.sqrt();
    }
    let n = a.n_rows();
    let mut fro_sq = 0.0;
    for start in (0..n).step_by(BLOCK_ROWS) {
        let end = (start + BLOCK_ROWS).min(n);
        let block = a.dense_row_block(start, end - start);
        fro_sq += block
            .sub(&f.left.slice_rows(start..end).matmul_t(&f.right_basis))
            .frobenius_norm_sq();
    }
    fro_sq.sqrt()
}

/// Power iteration on `EᵀE`, `E = A − LRᵀ`, from a fixed Gaussian start.
/// Stops when successive eigenvalue estimates agree to `POWER_TOL`
/// relative.
fn power_spectral(a: &Matrix, f: &LowRankFactors) -> Result<f64> {
    let d = a.n_cols();
    let mut rng = SketchRng::seed_from_u64(0x5eed_5bec);
    let mut x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = crate::matrix::norm2(&x);
    x.iter_mut().for_each(|v| *v /= norm);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let mut r = a.matvec(&x);
        let lr = f.left.matvec(&f.right_basis.t_matvec(&x));
        crate::matrix::axpy(-1.0, &lr, &mut r);
        let mut y = a.t_matvec(&r);
        let rl = f.right_basis.matvec(&f.left.t_matvec(&r));
        crate::matrix::axpy(-1.0, &rl, &mut y);
        let next = crate::matrix::dot(&x, &y);
        let ny = crate::matrix::norm2(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / ny).collect();
        let done = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    if !lambda.is_finite() {
        return Err(Error::Numerical("power iteration produced a non-finite estimate".into()));
    }
    Ok(lambda.max(0.0).sqrt())
}

/// Error of an approximation relative to the truncated SVD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// `‖A − Ã_k‖_F / ‖A − A_k‖_F`
    pub fro_ratio: f64,
    /// `‖A − Ã_k‖₂ / ‖A − A_k‖₂`
    pub spec_ratio: f64,
    pub elapsed_seconds: f64,
    pub residual: ResidualNorms,
}

/// A residual at most this fraction of `‖A‖_F` counts as zero.
const EXACT_ZERO: f64 = 1e-10;
const APPROX_ZERO: f64 = 1e-8;

/// Compares `approx` against the residual norms of the exact `A_k`.
///
/// When `A` has rank ≤ k the exact residual vanishes; the ratio is then 1
/// if the approximation is also exact (to `1e-8·‖A‖_F`) and an error
/// otherwise.
pub fn error_report(
    a: &Matrix,
    approx: &LowRankFactors,
    exact: &ResidualNorms,
    elapsed_seconds: f64,
) -> Result<ErrorReport> {
    let residual = residual_norms(a, approx)?;
    let scale = a.frobenius_norm();
    let ratio = |num: f64, den: f64, what: &str| -> Result<f64> {
        if den <= EXACT_ZERO * scale {
            if num <= APPROX_ZERO * scale {
                Ok(1.0)
            } else {
                Err(Error::Numerical(format!(
                    "{what} ratio undefined: the matrix has rank <= k but the approximation error is {num:e}"
                )))
            }
        } else {
            Ok(num / den)
        }
    };
    Ok(ErrorReport {
        fro_ratio: ratio(residual.fro, exact.fro, "Frobenius")?,
        spec_ratio: ratio(residual.spec, exact.spec, "spectral")?,
        elapsed_seconds,
        residual,
    })
}

/// `‖A − A_k‖` for a dense `A`, via the singular values only.
pub fn exact_residual(a: &DenseMatrix, k: usize) -> Result<ResidualNorms> {
    let sigma = crate::matrix::singular_values(a)?;
    Ok(ResidualNorms::of_truncation(&sigma, k))
}
