use rand::Rng;

use super::{validate_input, SketchOutput};
use crate::error::{Error, Result};
use crate::matrix::{random_permutation, row_space_basis, DenseMatrix, Matrix, Permutation};

/// One sparse subspace embedding `S = ΦD` of shape `n_out × n_in`.
///
/// Input row `i` lands in output row `buckets[i]` with sign `signs[i]`, so
/// every column of `S` has exactly one nonzero entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SpEmbSpec {
    n_out: usize,
    buckets: Vec<usize>,
    signs: Vec<f64>,
}

impl SpEmbSpec {
    pub fn new(n_out: usize, buckets: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        if n_out == 0 {
            return Err(Error::invalid("embedding output size must be at least 1"));
        }
        if buckets.len() != signs.len() {
            return Err(Error::dims("buckets and signs differ in length"));
        }
        if buckets.iter().any(|&b| b >= n_out) {
            return Err(Error::invalid("bucket index out of range"));
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::invalid("signs must be +1 or -1"));
        }
        Ok(SpEmbSpec {
            n_out,
            buckets,
            signs,
        })
    }

    /// Uniform buckets and fair signs; all buckets are drawn before the signs.
    pub fn random<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Result<Self> {
        if n_out == 0 {
            return Err(Error::invalid("embedding output size must be at least 1"));
        }
        let buckets = (0..n_in).map(|_| rng.random_range(0..n_out)).collect();
        let signs = (0..n_in)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Ok(SpEmbSpec {
            n_out,
            buckets,
            signs,
        })
    }

    pub fn n_in(&self) -> usize {
        self.buckets.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn buckets(&self) -> &[usize] {
        &self.buckets
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Explicit `n_out × n_in` matrix. Only meant for small checks.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut s = DenseMatrix::zeros(self.n_out, self.n_in());
        for (i, (&b, &sg)) in self.buckets.iter().zip(&self.signs).enumerate() {
            s.set(b, i, sg);
        }
        s
    }

    /// Accumulates `S · A(rows, :)` where `rows[t]` is the source row of
    /// embedding input `t`; sources at or past `a.n_rows()` are zero rows.
    fn embed_rows(&self, a: &Matrix, rows: impl Iterator<Item = usize>) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_out, a.n_cols());
        let n = a.n_rows();
        for ((&b, &s), src) in self.buckets.iter().zip(&self.signs).zip(rows) {
            if src < n {
                a.add_scaled_row(src, s, out.row_mut(b));
            }
        }
        out
    }
}

/// `B = S·A`, streamed over the rows of `A` in O(nnz(A)).
pub fn spemb_apply(a: &Matrix, spec: &SpEmbSpec) -> Result<DenseMatrix> {
    if spec.n_in() != a.n_rows() {
        return Err(Error::dims(format!(
            "embedding expects {} rows, matrix has {}",
            spec.n_in(),
            a.n_rows()
        )));
    }
    Ok(spec.embed_rows(a, 0..a.n_rows()))
}

/// Sparse-embedding sketch: `B = S·A` for a fresh `S`, with `V` spanning
/// the row space of `B` (QR of `Bᵀ`).
pub fn spemb_sketch<R: Rng + ?Sized>(a: &Matrix, ell: usize, rng: &mut R) -> Result<SketchOutput> {
    validate_input(a, ell)?;
    let spec = SpEmbSpec::random(a.n_rows(), ell, rng)?;
    sketch_from_spec(a, &spec)
}

/// Same as [`spemb_sketch`] with a caller-supplied embedding.
pub fn sketch_from_spec(a: &Matrix, spec: &SpEmbSpec) -> Result<SketchOutput> {
    let b = spemb_apply(a, spec)?;
    let v = row_space_basis(&b)?;
    Ok(SketchOutput::new(b, v, Vec::new()))
}

/// The block-diagonal embedding `S·P` used by SpFD: a row permutation of the
/// zero-padded input followed by `q` independent embeddings, each mapping
/// `n_pad/q` consecutive permuted rows to `ell` rows.
#[derive(Clone, Debug)]
pub struct BlockEmbedding {
    n_rows: usize,
    perm: Permutation,
    specs: Vec<SpEmbSpec>,
}

impl BlockEmbedding {
    /// Draws the permutation first, then the `q` block embeddings in order.
    pub fn draw<R: Rng + ?Sized>(n_rows: usize, q: usize, ell: usize, rng: &mut R) -> Result<Self> {
        if q == 0 || ell == 0 {
            return Err(Error::invalid("block count and sketch size must be at least 1"));
        }
        if n_rows == 0 {
            return Err(Error::invalid("cannot embed an empty matrix"));
        }
        let n_pad = n_rows.div_ceil(q) * q;
        let perm = random_permutation(n_pad, rng)?;
        let block = n_pad / q;
        let specs = (0..q)
            .map(|_| SpEmbSpec::random(block, ell, rng))
            .collect::<Result<_>>()?;
        Ok(BlockEmbedding {
            n_rows,
            perm,
            specs,
        })
    }

    pub fn from_parts(n_rows: usize, perm: Permutation, specs: Vec<SpEmbSpec>) -> Result<Self> {
        let q = specs.len();
        if q == 0 || perm.len() % q != 0 || perm.len() < n_rows {
            return Err(Error::dims("permutation length must be a multiple of the block count"));
        }
        let block = perm.len() / q;
        let ell = specs[0].n_out();
        if specs.iter().any(|s| s.n_in() != block || s.n_out() != ell) {
            return Err(Error::dims("block embeddings must all be block_len → ell"));
        }
        Ok(BlockEmbedding {
            n_rows,
            perm,
            specs,
        })
    }

    pub fn blocks(&self) -> usize {
        self.specs.len()
    }

    pub fn block_len(&self) -> usize {
        self.perm.len() / self.specs.len()
    }

    pub fn ell(&self) -> usize {
        self.specs[0].n_out()
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn specs(&self) -> &[SpEmbSpec] {
        &self.specs
    }

    fn check(&self, a: &Matrix) -> Result<()> {
        if a.n_rows() != self.n_rows {
            return Err(Error::dims(format!(
                "embedding drawn for {} rows, matrix has {}",
                self.n_rows,
                a.n_rows()
            )));
        }
        Ok(())
    }

    /// `S_j (PA)_j`, the `ell × d` sketch of block `j`.
    pub fn apply_block(&self, a: &Matrix, j: usize) -> Result<DenseMatrix> {
        self.check(a)?;
        let len = self.block_len();
        let rows = self.perm.as_slice()[j * len..(j + 1) * len].iter().copied();
        Ok(self.specs[j].embed_rows(a, rows))
    }

    /// The stacked `qℓ × d` intermediate sketch `S·P·A`.
    pub fn apply(&self, a: &Matrix) -> Result<DenseMatrix> {
        self.check(a)?;
        let (ell, d) = (self.ell(), a.n_cols());
        let mut data = Vec::with_capacity(self.blocks() * ell * d);
        for j in 0..self.blocks() {
            data.extend(self.apply_block(a, j)?.into_data());
        }
        Ok(DenseMatrix::from_raw(self.blocks() * ell, d, data))
    }
}
