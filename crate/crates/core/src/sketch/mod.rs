//! Row sketches `B` (ℓ×d) of an input `A` (n×d) together with an orthonormal
//! basis `V` for (a superspace of) the row space of `B`.

mod dct;
mod fd;
mod sampling;
mod spemb;

pub use dct::{dct_sketch, Dct};
pub use fd::{fd_sketch, spfd_sketch, spfd_with_embedding, SpfdConfig};
pub use sampling::{norm_sampling_probabilities, norm_sampling_sketch};
pub use spemb::{sketch_from_spec, spemb_apply, spemb_sketch, BlockEmbedding, SpEmbSpec};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix};
use crate::rng::seeded;

/// Result of one sketching run.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchOutput {
    /// The ℓ×d sketch.
    pub b: DenseMatrix,
    /// d×min(ℓ, d) basis with orthonormal columns.
    pub v: DenseMatrix,
    /// Shrinkage `δ_i = σ²_{ℓ+1}` of each frequent-directions iteration.
    pub deltas: Vec<f64>,
    /// `Δ = Σ δ_i`.
    pub delta_total: f64,
}

impl SketchOutput {
    pub(crate) fn new(b: DenseMatrix, v: DenseMatrix, deltas: Vec<f64>) -> Self {
        let delta_total = deltas.iter().sum();
        SketchOutput {
            b,
            v,
            deltas,
            delta_total,
        }
    }

    pub fn ell(&self) -> usize {
        self.b.n_rows()
    }
}

pub(crate) fn validate_input(a: &Matrix, ell: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::invalid("sketch size must be at least 1"));
    }
    if a.n_rows() == 0 || a.n_cols() == 0 {
        return Err(Error::invalid(format!(
            "cannot sketch an empty {}x{} matrix",
            a.n_rows(),
            a.n_cols()
        )));
    }
    Ok(())
}

/// A sketching method, addressable by its short name
/// (`normsamp`, `dct`, `spemb`, `fd`, `spfd<q>`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    NormSamp,
    Dct,
    SpEmb,
    Fd,
    SpFd { q: usize },
}

impl Method {
    /// Runs the method with a generator seeded from `seed`.
    pub fn sketch(&self, a: &Matrix, ell: usize, seed: u64) -> Result<SketchOutput> {
        let mut rng = seeded(seed);
        match *self {
            Method::NormSamp => norm_sampling_sketch(a, ell, &mut rng),
            Method::Dct => dct_sketch(a, ell, &mut rng),
            Method::SpEmb => spemb_sketch(a, ell, &mut rng),
            Method::Fd => fd_sketch(a, ell),
            Method::SpFd { q } => spfd_sketch(a, &SpfdConfig::new(ell, q, seed)?),
        }
    }

    pub fn is_randomized(&self) -> bool {
        !matches!(self, Method::Fd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::NormSamp => f.write_str("normsamp"),
            Method::Dct => f.write_str("dct"),
            Method::SpEmb => f.write_str("spemb"),
            Method::Fd => f.write_str("fd"),
            Method::SpFd { q } => write!(f, "spfd{q}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "normsamp" => Method::NormSamp,
            "dct" => Method::Dct,
            "spemb" => Method::SpEmb,
            "fd" => Method::Fd,
            other => {
                let q = other
                    .strip_prefix("spfd")
                    .and_then(|q| q.parse::<usize>().ok())
                    .filter(|&q| q >= 1)
                    .ok_or_else(|| Error::invalid(format!("unknown sketching method '{s}'")))?;
                Method::SpFd { q }
            }
        })
    }
}

impl serde::Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
