use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{validate_input, SketchOutput};
use crate::error::{Error, Result};
use crate::matrix::{row_space_basis, DenseMatrix, Matrix};

/// Row-norm sampling probabilities `p_i = ‖A_(i)‖² / ‖A‖_F²`.
pub fn norm_sampling_probabilities(a: &Matrix) -> Result<Vec<f64>> {
    let norms = a.row_norms_sq();
    let total: f64 = norms.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("norm sampling is undefined for an all-zero matrix"));
    }
    Ok(norms.into_iter().map(|v| v / total).collect())
}

/// Norm sampling: ℓ rows drawn i.i.d. (with replacement) with probability
/// `p_i`, each rescaled by `1/√(ℓ p_i)` so that `E[BᵀB] = AᵀA`.
pub fn norm_sampling_sketch<R: Rng + ?Sized>(
    a: &Matrix,
    ell: usize,
    rng: &mut R,
) -> Result<SketchOutput> {
    validate_input(a, ell)?;
    let norms = a.row_norms_sq();
    let total: f64 = norms.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("norm sampling is undefined for an all-zero matrix"));
    }
    let dist = WeightedIndex::new(&norms)
        .map_err(|e| Error::Numerical(format!("row-norm distribution: {e}")))?;
    let mut b = DenseMatrix::zeros(ell, a.n_cols());
    for r in 0..ell {
        let i = dist.sample(rng);
        // 1/√(ℓ p_i) with p_i = ‖a_i‖²/‖A‖²
        let scale = (total / (ell as f64 * norms[i])).sqrt();
        a.add_scaled_row(i, scale, b.row_mut(r));
    }
    let v = row_space_basis(&b)?;
    Ok(SketchOutput::new(b, v, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn probabilities_of_diagonal() {
        let a = Matrix::from(DenseMatrix::from_diag(&[3.0, 4.0]).unwrap());
        let p = norm_sampling_probabilities(&a).unwrap();
        assert!((p[0] - 9.0 / 25.0).abs() < 1e-15);
        assert!((p[1] - 16.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn single_nonzero_row_is_always_drawn() {
        let a = Matrix::from(
            DenseMatrix::from_rows(&[[0.0, 0.0], [3.0, -4.0], [0.0, 0.0]]).unwrap(),
        );
        let ell = 4;
        let out = norm_sampling_sketch(&a, ell, &mut seeded(1)).unwrap();
        let scale = 1.0 / (ell as f64).sqrt();
        for r in out.b.rows() {
            assert!((r[0] - 3.0 * scale).abs() < 1e-15);
            assert!((r[1] + 4.0 * scale).abs() < 1e-15);
        }
        assert!(out.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let a = Matrix::from(DenseMatrix::zeros(3, 2));
        assert!(norm_sampling_sketch(&a, 2, &mut seeded(0)).is_err());
        assert!(norm_sampling_probabilities(&a).is_err());
    }
}
