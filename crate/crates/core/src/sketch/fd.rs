//! Frequent directions and its sparse-embedding accelerated variant.

use super::spemb::BlockEmbedding;
use super::{validate_input, SketchOutput};
use crate::error::{Error, Result};
use crate::matrix::{row_space_basis, svd, DenseMatrix, Matrix};
use crate::rng::seeded;

/// Parameters of [`spfd_sketch`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpfdConfig {
    pub ell: usize,
    pub q: usize,
    pub seed: u64,
}

impl SpfdConfig {
    pub fn new(ell: usize, q: usize, seed: u64) -> Result<Self> {
        let cfg = SpfdConfig { ell, q, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.q == 0 {
            return Err(Error::invalid("SpFD needs ell >= 1 and q >= 1"));
        }
        Ok(())
    }
}

/// The 2ℓ-row working buffer of the shrinking loop.
struct ShrinkBuffer {
    ell: usize,
    buf: DenseMatrix,
    vt: Option<DenseMatrix>,
    deltas: Vec<f64>,
}

impl ShrinkBuffer {
    fn new(first: DenseMatrix, ell: usize) -> Self {
        debug_assert_eq!(first.n_rows(), ell);
        ShrinkBuffer {
            ell,
            buf: first.resized_rows(2 * ell),
            vt: None,
            deltas: Vec::new(),
        }
    }

    /// Loads `block` into the lower half, then SVD-and-shrink.
    fn push(&mut self, block: &DenseMatrix) -> Result<()> {
        let ell = self.ell;
        debug_assert_eq!(block.n_rows(), ell);
        self.buf.data_mut()[ell * block.n_cols()..].copy_from_slice(block.data());
        let delta = self.shrink()?;
        self.deltas.push(delta);
        Ok(())
    }

    /// `B ← sqrt(max(Σ² − δ, 0))·Vᵀ` with `δ = σ²_{ℓ+1}` (zero when the
    /// economy SVD has no (ℓ+1)-th triplet). Returns `δ`.
    fn shrink(&mut self) -> Result<f64> {
        let dec = svd(&self.buf)?;
        let delta = dec.sigma.get(self.ell).map_or(0.0, |s| s * s);
        let d = self.buf.n_cols();
        let mut next = DenseMatrix::zeros(2 * self.ell, d);
        for (j, &s) in dec.sigma.iter().enumerate() {
            let scale = (s * s - delta).max(0.0).sqrt();
            if scale > 0.0 {
                let src = dec.vt.row(j);
                for (o, v) in next.row_mut(j).iter_mut().zip(src) {
                    *o = scale * v;
                }
            }
        }
        self.buf = next;
        self.vt = Some(dec.vt);
        Ok(delta)
    }

    fn finish(mut self) -> Result<SketchOutput> {
        if self.vt.is_none() {
            // The loop never ran: one SVD of the buffer supplies V. Its lower
            // half is zero, so σ_{ℓ+1} vanishes and no shrink is applied.
            let dec = svd(&self.buf)?;
            let d = self.buf.n_cols();
            let mut next = DenseMatrix::zeros(2 * self.ell, d);
            for (j, &s) in dec.sigma.iter().enumerate().take(self.ell) {
                for (o, v) in next.row_mut(j).iter_mut().zip(dec.vt.row(j)) {
                    *o = s * v;
                }
            }
            self.buf = next;
            self.vt = Some(dec.vt);
        }
        let vt = self.vt.expect("set above");
        let keep = self.ell.min(vt.n_rows());
        let v = vt.slice_rows(0..keep).transpose();
        let b = self.buf.slice_rows(0..self.ell);
        Ok(SketchOutput::new(b, v, self.deltas))
    }
}

/// Frequent directions with an ℓ-row sketch.
///
/// `A` is zero-padded to a multiple of ℓ rows; the buffer starts with the
/// first ℓ rows and absorbs the remaining blocks one by one, running
/// `⌈n/ℓ⌉ − 1` shrink iterations. Deterministic.
pub fn fd_sketch(a: &Matrix, ell: usize) -> Result<SketchOutput> {
    validate_input(a, ell)?;
    let n_blocks = a.n_rows().div_ceil(ell);
    let mut buffer = ShrinkBuffer::new(a.dense_row_block(0, ell), ell);
    for i in 1..n_blocks {
        buffer.push(&a.dense_row_block(i * ell, ell))?;
    }
    buffer.finish()
}

/// Runs the frequent-directions loop over the `q` blocks of an already drawn
/// block embedding.
pub fn spfd_with_embedding(a: &Matrix, emb: &BlockEmbedding) -> Result<SketchOutput> {
    validate_input(a, emb.ell())?;
    let first = emb.apply_block(a, 0)?;
    if emb.blocks() == 1 {
        // a single block is a plain sparse embedding: V comes from QR of Bᵀ
        let v = row_space_basis(&first)?;
        return Ok(SketchOutput::new(first, v, Vec::new()));
    }
    let mut buffer = ShrinkBuffer::new(first, emb.ell());
    for j in 1..emb.blocks() {
        buffer.push(&emb.apply_block(a, j)?)?;
    }
    buffer.finish()
}

/// SpFD: permute the rows of `A`, sparse-embed each of `q` row blocks down to
/// ℓ rows, and feed the blocks through the frequent-directions loop
/// (`q − 1` shrink iterations).
///
/// Randomness comes from `cfg.seed` alone: the permutation is drawn first,
/// followed by the block embeddings in block order.
pub fn spfd_sketch(a: &Matrix, cfg: &SpfdConfig) -> Result<SketchOutput> {
    cfg.validate()?;
    validate_input(a, cfg.ell)?;
    let mut rng = seeded(cfg.seed);
    let emb = BlockEmbedding::draw(a.n_rows(), cfg.q, cfg.ell, &mut rng)?;
    spfd_with_embedding(a, &emb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{permute_rows, svd};
    use crate::sketch::spemb::{spemb_apply, SpEmbSpec};
    use rand::Rng;

    fn random(n: usize, d: usize, seed: u64) -> DenseMatrix {
        let mut rng = seeded(seed);
        DenseMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0).unwrap()
    }

    fn low_rank(n: usize, d: usize, r: usize, seed: u64) -> DenseMatrix {
        random(n, r, seed).matmul(&random(r, d, seed + 1))
    }

    #[test]
    fn exact_when_rank_fits() {
        let a = Matrix::from(low_rank(30, 8, 3, 7));
        let out = fd_sketch(&a, 4).unwrap();
        assert_eq!(out.deltas.len(), 30usize.div_ceil(4) - 1);
        assert!(out.deltas.iter().all(|&d| d <= 1e-20 * a.frobenius_norm_sq()));
        // same Gram matrix means same row space and same energy
        let gram = a.to_dense().t_matmul(&a.to_dense());
        assert!(out.b.t_matmul(&out.b).max_abs_diff(&gram) < 1e-9 * gram.max_abs());
        assert_eq!(out.v.shape(), (8, 4));
        assert!(out.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn zero_iterations_when_n_equals_ell() {
        let a = Matrix::from(random(5, 7, 2));
        let out = fd_sketch(&a, 5).unwrap();
        assert!(out.deltas.is_empty());
        assert!((out.b.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12 * a.frobenius_norm());
        assert_eq!(out.v.shape(), (7, 5));
        assert!(out.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn narrow_matrix_gives_narrow_basis() {
        let a = Matrix::from(random(20, 3, 4));
        let out = fd_sketch(&a, 5).unwrap();
        assert_eq!(out.b.shape(), (5, 3));
        assert_eq!(out.v.shape(), (3, 3));
        assert!(out.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn spfd_single_block_is_spemb_of_permuted_rows() {
        let a = Matrix::from(random(11, 4, 9));
        let cfg = SpfdConfig::new(3, 1, 77).unwrap();
        let out = spfd_sketch(&a, &cfg).unwrap();

        let mut rng = seeded(77);
        let p = crate::matrix::random_permutation(11, &mut rng).unwrap();
        let spec = SpEmbSpec::random(11, 3, &mut rng).unwrap();
        let b = spemb_apply(&permute_rows(&a, &p).unwrap(), &spec).unwrap();
        let v = row_space_basis(&b).unwrap();
        assert_eq!(out.b, b);
        assert_eq!(out.v, v);
        assert!(out.deltas.is_empty());
    }

    #[test]
    fn spfd_on_zero_matrix() {
        let a = Matrix::from(DenseMatrix::zeros(12, 3));
        let out = spfd_sketch(&a, &SpfdConfig::new(2, 3, 1).unwrap()).unwrap();
        assert_eq!(out.b.frobenius_norm(), 0.0);
        assert_eq!(out.deltas, vec![0.0, 0.0]);
    }

    #[test]
    fn spfd_allows_small_blocks() {
        // qℓ > n: blocks of two rows embedded into four
        let a = Matrix::from(random(8, 6, 3));
        let out = spfd_sketch(&a, &SpfdConfig::new(4, 4, 5).unwrap()).unwrap();
        assert_eq!(out.deltas.len(), 3);
        assert!(out.v.orthonormality_error() < 1e-10);
    }

    #[test]
    fn fd_is_deterministic_and_sparse_agnostic() {
        let d = random(25, 6, 12);
        let s = crate::matrix::SparseMatrix::from_dense(&d);
        let x = fd_sketch(&Matrix::from(d), 3).unwrap();
        let y = fd_sketch(&Matrix::from(s), 3).unwrap();
        assert_eq!(x.b, y.b);
        assert_eq!(x.deltas, y.deltas);
    }

    #[test]
    fn fd_shrinks_by_sigma_ell_plus_one() {
        // one iteration by hand
        let a = random(4, 5, 21);
        let out = fd_sketch(&Matrix::from(a.clone()), 2).unwrap();
        let s = svd(&a).unwrap();
        assert_eq!(out.deltas.len(), 1);
        assert!((out.deltas[0] - s.sigma[2] * s.sigma[2]).abs() < 1e-12);
        let expect: f64 = s.sigma[..2].iter().map(|x| x * x - s.sigma[2] * s.sigma[2]).sum();
        assert!((out.b.frobenius_norm_sq() - expect).abs() < 1e-10);
    }
}
