//! Hub and authority scores on directed graphs.
//!
//! Three scorers share one result type: HITS power iteration, the diagonal of
//! `exp` of the symmetric bipartite embedding `[[0, A], [Aᵀ, 0]]` from a full
//! SVD, and the same diagonal read off a sketch-based approximate SVD.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lowrank::approx_svd;
use crate::matrix::{svd, DenseMatrix, Matrix, SparseMatrix};
use crate::sketch::Method;

/// Largest graph accepted by [`expm_scores_exact`].
pub const EXACT_MAX_NODES: usize = 4000;

/// Oversampling added to `k` to get the sketch size of the sketched scorer.
pub const DEFAULT_OVERSAMPLING: usize = 5;

/// Per-node scores and the induced rankings.
#[derive(Clone, Debug, PartialEq)]
pub struct RankingResult {
    pub hub_scores: Vec<f64>,
    pub authority_scores: Vec<f64>,
    /// Every node, by descending hub score; ties go to the lower id.
    pub top_hubs: Vec<usize>,
    /// Every node, by descending authority score; ties go to the lower id.
    pub top_authorities: Vec<usize>,
    pub method_tag: String,
    pub elapsed_seconds: f64,
    /// False only for an iterative scorer that hit its iteration cap.
    pub converged: bool,
    /// Set when the scores carry no ranking information (no edges).
    pub degenerate: bool,
}

impl RankingResult {
    fn new(hub_scores: Vec<f64>, authority_scores: Vec<f64>, method_tag: String) -> Self {
        let top_hubs = ranking(&hub_scores);
        let top_authorities = ranking(&authority_scores);
        RankingResult {
            hub_scores,
            authority_scores,
            top_hubs,
            top_authorities,
            method_tag,
            elapsed_seconds: 0.0,
            converged: true,
            degenerate: false,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.hub_scores.len()
    }
}

/// Node ids ordered by descending score, ascending id among equal scores.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    ids
}

fn check_square(adj: &SparseMatrix) -> Result<usize> {
    let (n, m) = adj.shape();
    if n != m {
        return Err(Error::dims(format!("adjacency must be square, got {n}x{m}")));
    }
    Ok(n)
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Flips `x` so that its largest-magnitude entry (lowest index on ties) is
/// positive.
fn fix_sign(x: &mut [f64]) {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    if x.get(best).is_some_and(|&v| v < 0.0) {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// HITS: alternating `a ← Aᵀh`, `h ← A a`, each followed by 2-norm
/// normalization, from a standard normal start.
///
/// Stops once both vectors move by at most `tol` in one sweep. Hitting
/// `max_iter` is reported through `converged = false`. A graph without
/// edges yields all-zero scores flagged `degenerate`.
pub fn hits<R: Rng + ?Sized>(
    adj: &SparseMatrix,
    tol: f64,
    max_iter: usize,
    rng: &mut R,
) -> Result<RankingResult> {
    let start = Instant::now();
    let n = check_square(adj)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let mut h: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    normalize(&mut h);
    normalize(&mut a);

    let mut converged = false;
    let mut degenerate = adj.nnz() == 0;
    if !degenerate {
        for _ in 0..max_iter {
            let mut a_next = adj.t_matvec(&h);
            let mut h_next = adj.matvec(&a_next);
            if normalize(&mut a_next) == 0.0 {
                degenerate = true;
                break;
            }
            if normalize(&mut h_next) == 0.0 {
                degenerate = true;
                break;
            }
            let moved = distance(&a_next, &a).max(distance(&h_next, &h));
            a = a_next;
            h = h_next;
            if moved <= tol {
                converged = true;
                break;
            }
        }
    }
    if degenerate {
        h.iter_mut().for_each(|v| *v = 0.0);
        a.iter_mut().for_each(|v| *v = 0.0);
        converged = true;
    }
    fix_sign(&mut h);
    fix_sign(&mut a);

    let mut out = RankingResult::new(h, a, "hits".into());
    out.converged = converged;
    out.degenerate = degenerate;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Row-wise `Σ_j X_ij² cosh(σ_j)`, the diagonal of `X cosh(Σ) Xᵀ`.
fn cosh_diagonal(x: &DenseMatrix, sigma: &[f64]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = sigma.iter().map(|s| s.cosh()).collect();
    if let Some(s) = sigma.iter().find(|s| !s.cosh().is_finite()) {
        return Err(Error::Numerical(format!(
            "cosh({s}) overflows; scores are not representable in f64"
        )));
    }
    Ok(x.rows()
        .map(|row| row.iter().zip(&weights).map(|(u, w)| u * u * w).sum())
        .collect())
}

/// Hub and authority scores `(U cosh Σ Uᵀ)_ii` and `(V cosh Σ Vᵀ)_ii`
/// from a full SVD of the adjacency matrix, i.e. the diagonal of `e^𝒜`.
pub fn expm_scores_exact(adj: &SparseMatrix) -> Result<RankingResult> {
    let start = Instant::now();
    let n = check_square(adj)?;
    if n == 0 {
        return Err(Error::invalid("graph has no nodes"));
    }
    if n > EXACT_MAX_NODES {
        return Err(Error::invalid(format!(
            "exact exponential scores need a dense SVD; {n} nodes exceeds the limit of {EXACT_MAX_NODES}"
        )));
    }
    let s = svd(&adj.to_dense())?;
    let hub = cosh_diagonal(&s.u, &s.sigma)?;
    let auth = cosh_diagonal(&s.v(), &s.sigma)?;
    let mut out = RankingResult::new(hub, auth, "expm".into());
    out.degenerate = adj.nnz() == 0;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Exponential scores from the approximate SVD `A ≈ Ũ Σ̃ Ṽᵀ` built on the
/// basis `v` (n×ℓ, orthonormal columns).
pub fn expm_scores_from_basis(
    adj: &SparseMatrix,
    v: &DenseMatrix,
    method_tag: impl Into<String>,
) -> Result<RankingResult> {
    let start = Instant::now();
    check_square(adj)?;
    let a = Matrix::from(adj.clone());
    let approx = approx_svd(&a, v)?;
    let hub = cosh_diagonal(&approx.u_tilde, &approx.sigma_tilde)?;
    let auth = cosh_diagonal(&approx.v_tilde, &approx.sigma_tilde)?;
    let mut out = RankingResult::new(hub, auth, method_tag.into());
    out.degenerate = adj.nnz() == 0;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Exponential scores through a sketch of size `ℓ = k + p`: sketch the
/// adjacency with `method`, take the basis of the sketch's row space, and
/// read the scores off the resulting approximate SVD. The reported time
/// covers sketching and scoring.
pub fn expm_scores_sketched(
    adj: &SparseMatrix,
    method: Method,
    k: usize,
    p: usize,
    seed: u64,
) -> Result<RankingResult> {
    let start = Instant::now();
    let n = check_square(adj)?;
    let ell = k + p;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if ell > n {
        return Err(Error::invalid(format!(
            "sketch size k + p = {ell} exceeds the {n} nodes of the graph"
        )));
    }
    let a = Matrix::from(adj.clone());
    let sketch = method.sketch(&a, ell, seed)?;
    let mut out = expm_scores_from_basis(adj, &sketch.v, method.to_string())?;
    out.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Which score vector a ranking comparison refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Hub,
    Authority,
}

/// Size of the intersection of the top-`k` node sets of `a` and `b`.
pub fn ranking_overlap(a: &RankingResult, b: &RankingResult, role: Role, k: usize) -> Result<usize> {
    if a.n_nodes() != b.n_nodes() {
        return Err(Error::dims(format!(
            "rankings over {} and {} nodes",
            a.n_nodes(),
            b.n_nodes()
        )));
    }
    let (x, y) = match role {
        Role::Hub => (&a.top_hubs, &b.top_hubs),
        Role::Authority => (&a.top_authorities, &b.top_authorities),
    };
    top_k_overlap(x, y, k)
}

/// Size of the intersection of the first `k` entries of two rankings.
pub fn top_k_overlap(x: &[usize], y: &[usize], k: usize) -> Result<usize> {
    if k > x.len() || k > y.len() {
        return Err(Error::invalid(format!(
            "top-{k} requested from rankings of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let first: HashSet<usize> = x[..k].iter().copied().collect();
    Ok(y[..k].iter().filter(|i| first.contains(i)).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{symmetric_eigen, thin_qr};
    use crate::rng::seeded;
    use rand::seq::SliceRandom;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, edges.iter().map(|&(i, j)| (i, j, 1.0)).collect()).unwrap()
    }

    fn random_digraph(n: usize, density: f64, seed: u64) -> SparseMatrix {
        let mut rng = seeded(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random::<f64>() < density {
                    edges.push((i, j));
                }
            }
        }
        graph(n, &edges)
    }

    fn relabel(adj: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
        let n = adj.n_rows();
        let mut t = Vec::new();
        for i in 0..n {
            let (cols, vals) = adj.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.push((perm[i], perm[j], v));
            }
        }
        SparseMatrix::from_triplets(n, n, t).unwrap()
    }

    /// Dominant eigenpair of a symmetric matrix from the dense eigensolver,
    /// with the sign convention of [`fix_sign`], plus the gap to the next one.
    fn dominant(m: &DenseMatrix) -> (Vec<f64>, f64) {
        let (vals, vecs) = symmetric_eigen(m).unwrap();
        let mut x = vecs.column(0);
        fix_sign(&mut x);
        (x, vals[0] - vals[1])
    }

    #[test]
    fn two_edges_into_one_node() {
        // 1 → 2, 3 → 2 with ids shifted to 0-based.
        let adj = graph(3, &[(0, 1), (2, 1)]);
        let r = hits(&adj, 1e-10, 1000, &mut seeded(3)).unwrap();
        assert!(r.converged && !r.degenerate);
        assert_eq!(r.top_authorities[0], 1);
        assert_eq!(r.hub_scores[0], r.hub_scores[2]);
        assert_eq!(&r.top_hubs[..2], &[0, 2]);
        assert!(r.hub_scores[1].abs() < 1e-12);
    }

    #[test]
    fn empty_graph_is_degenerate() {
        let adj = SparseMatrix::zeros(4, 4);
        let r = hits(&adj, 1e-3, 100, &mut seeded(0)).unwrap();
        assert!(r.degenerate);
        assert!(r.hub_scores.iter().chain(&r.authority_scores).all(|&v| v == 0.0));
        assert_eq!(r.top_hubs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn hits_matches_dense_eigenvectors() {
        for seed in 0..5 {
            let adj = random_digraph(30, 0.12, seed);
            let dense = adj.to_dense();
            let (hub, gap_h) = dominant(&dense.matmul_t(&dense));
            let (auth, gap_a) = dominant(&dense.t_matmul(&dense));
            assert!(gap_h > 1e-2 && gap_a > 1e-2, "seed {seed} has a near-degenerate top eigenvalue");
            let r = hits(&adj, 1e-9, 100_000, &mut seeded(seed + 100)).unwrap();
            assert!(r.converged);
            assert!(distance(&r.hub_scores, &hub) < 1e-3, "seed {seed}");
            assert!(distance(&r.authority_scores, &auth) < 1e-3, "seed {seed}");
        }
    }

    #[test]
    fn hits_authority_is_a_fixed_point_direction() {
        let tol = 1e-6;
        let adj = random_digraph(40, 0.1, 11);
        let r = hits(&adj, tol, 100_000, &mut seeded(1)).unwrap();
        assert!(r.converged);
        let a = &r.authority_scores;
        let ata_a = adj.t_matvec(&adj.matvec(a));
        let lambda: f64 = a.iter().zip(&ata_a).map(|(x, y)| x * y).sum();
        let resid: Vec<f64> = ata_a.iter().zip(a).map(|(y, x)| y - lambda * x).collect();
        assert!(resid.iter().map(|v| v * v).sum::<f64>().sqrt() <= 10.0 * tol * lambda);
    }

    #[test]
    fn hits_reports_iteration_cap() {
        let adj = random_digraph(30, 0.2, 5);
        let r = hits(&adj, 1e-14, 2, &mut seeded(0)).unwrap();
        assert!(!r.converged);
        assert!(hits(&adj, 0.0, 10, &mut seeded(0)).is_err());
        assert!(hits(&SparseMatrix::zeros(2, 3), 1e-3, 10, &mut seeded(0)).is_err());
    }

    #[test]
    fn expm_of_zero_matrix_is_identity() {
        let r = expm_scores_exact(&SparseMatrix::zeros(5, 5)).unwrap();
        assert!(r.degenerate);
        for v in r.hub_scores.iter().chain(&r.authority_scores) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_scalar_self_loop() {
        let r = expm_scores_exact(&graph(1, &[(0, 0)])).unwrap();
        assert!((r.hub_scores[0] - 1f64.cosh()).abs() < 1e-14);
        assert!((r.authority_scores[0] - 1f64.cosh()).abs() < 1e-14);
    }

    /// Diagonal of `exp([[0, A], [Aᵀ, 0]])` from the eigendecomposition of
    /// the symmetric 2n×2n embedding.
    fn expm_diagonal_oracle(adj: &SparseMatrix) -> Vec<f64> {
        let n = adj.n_rows();
        let a = adj.to_dense();
        let big = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, false) => a.get(i, j - n),
            (false, true) => a.get(j, i - n),
            _ => 0.0,
        })
        .unwrap();
        let (vals, q) = symmetric_eigen(&big).unwrap();
        (0..2 * n)
            .map(|i| (0..2 * n).map(|j| q.get(i, j).powi(2) * vals[j].exp()).sum())
            .collect()
    }

    #[test]
    fn expm_matches_dense_exponential() {
        for seed in 0..3 {
            let adj = random_digraph(20, 0.15, seed);
            let oracle = expm_diagonal_oracle(&adj);
            let r = expm_scores_exact(&adj).unwrap();
            for i in 0..20 {
                assert!((r.hub_scores[i] - oracle[i]).abs() < 1e-8 * oracle[i]);
                assert!((r.authority_scores[i] - oracle[20 + i]).abs() < 1e-8 * oracle[20 + i]);
                assert!(r.hub_scores[i] >= 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn scores_follow_node_relabeling() {
        let adj = random_digraph(25, 0.15, 21);
        let mut perm: Vec<usize> = (0..25).collect();
        perm.shuffle(&mut seeded(2));
        let moved = relabel(&adj, &perm);

        let x = expm_scores_exact(&adj).unwrap();
        let y = expm_scores_exact(&moved).unwrap();
        let h = hits(&adj, 1e-12, 100_000, &mut seeded(4)).unwrap();
        let g = hits(&moved, 1e-12, 100_000, &mut seeded(5)).unwrap();
        for i in 0..25 {
            let j = perm[i];
            assert!((x.hub_scores[i] - y.hub_scores[j]).abs() < 1e-10 * x.hub_scores[i]);
            assert!((x.authority_scores[i] - y.authority_scores[j]).abs() < 1e-10 * x.authority_scores[i]);
            assert!((h.hub_scores[i] - g.hub_scores[j]).abs() < 1e-8);
            assert!((h.authority_scores[i] - g.authority_scores[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn full_basis_reproduces_exact_scores() {
        let adj = random_digraph(30, 0.12, 8);
        let exact = expm_scores_exact(&adj).unwrap();
        let full = svd(&adj.to_dense()).unwrap().v();
        let r = expm_scores_from_basis(&adj, &full, "full").unwrap();
        for i in 0..30 {
            assert!((r.hub_scores[i] - exact.hub_scores[i]).abs() < 1e-10 * exact.hub_scores[i]);
        }
        assert_eq!(&r.top_hubs[..10], &exact.top_hubs[..10]);
        assert_eq!(&r.top_authorities[..10], &exact.top_authorities[..10]);

        // Any other orthonormal basis of the whole space gives the same scores.
        let mut rng = seeded(1);
        let g = DenseMatrix::from_fn(30, 30, |_, _| rng.random::<f64>() - 0.5).unwrap();
        let (q, _) = thin_qr(&g).unwrap();
        let r = expm_scores_from_basis(&adj, &q, "rotated").unwrap();
        assert_eq!(&r.top_hubs[..10], &exact.top_hubs[..10]);
    }

    #[test]
    fn sketched_scores_rank_a_low_rank_graph() {
        // Two dense bipartite blocks of different sizes: rank 2, clear hubs.
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in 20..30 {
                edges.push((i, j));
            }
        }
        for i in 6..9 {
            for j in 30..34 {
                edges.push((i, j));
            }
        }
        let adj = graph(40, &edges);
        let exact = expm_scores_exact(&adj).unwrap();
        for m in [Method::Fd, Method::SpFd { q: 5 }, Method::SpEmb] {
            let r = expm_scores_sketched(&adj, m, 3, 2, 7).unwrap();
            assert_eq!(r.method_tag, m.to_string());
            assert_eq!(ranking_overlap(&r, &exact, Role::Hub, 9).unwrap(), 9, "{m}");
            assert_eq!(ranking_overlap(&r, &exact, Role::Authority, 14).unwrap(), 14, "{m}");
        }
        assert!(expm_scores_sketched(&adj, Method::Fd, 40, 5, 0).is_err());
    }

    #[test]
    fn overlap_counts() {
        assert_eq!(top_k_overlap(&[1, 2, 3, 4], &[3, 2, 1, 0], 3).unwrap(), 3);
        assert_eq!(top_k_overlap(&[1, 2, 3, 4], &[4, 0, 1, 2], 2).unwrap(), 0);
        assert!(top_k_overlap(&[1, 2], &[2, 1], 3).is_err());
        let r = expm_scores_exact(&random_digraph(12, 0.3, 1)).unwrap();
        assert_eq!(ranking_overlap(&r, &r, Role::Hub, 10).unwrap(), 10);
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        assert_eq!(ranking(&[1.0, 3.0, 1.0, 3.0]), vec![1, 3, 0, 2]);
    }
}
