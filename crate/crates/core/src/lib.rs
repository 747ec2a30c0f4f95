//! Matrix sketching for low-rank approximation.
//!
//! The centrepiece is [`sketch::spfd_sketch`], which feeds blocks of a
//! sparse subspace embedding of a row-permuted input through the frequent
//! directions shrinking loop. Around it sit the classic sketchers it is
//! compared against, the `[AV]_k Vᵀ` low-rank reconstruction with its error
//! metrics, synthetic and file-based data sources, hub/authority ranking on
//! directed graphs, and a benchmark harness.

pub mod error;
pub mod matrix;
pub mod rng;
pub mod datagen;
pub mod lowrank;
pub mod sketch;
pub mod netrank;
pub mod bench;

pub use error::{Error, Result};
