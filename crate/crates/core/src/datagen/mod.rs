//! Synthetic signal-plus-noise matrices and loaders for the usual sparse
//! and dense matrix text formats.

mod edges;
mod mtx;
mod svmlight;
mod synthetic;

pub use edges::load_edge_list;
pub use mtx::{load_matrix_market, write_matrix_market};
pub use svmlight::{load_svmlight, write_svmlight};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::AssemblyStats;

/// A loaded matrix with the bookkeeping of its assembly: every parsed entry
/// is either stored, merged into a duplicate, or an explicit zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Loaded<M> {
    pub matrix: M,
    pub stats: AssemblyStats,
}

/// Calls `f(line_number, line)` for each line, with any trailing `\r`
/// removed. Line numbers start at 1.
pub(crate) fn for_each_line(
    path: &Path,
    mut f: impl FnMut(usize, &str) -> Result<()>,
) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => parse_error(path, i + 1, "line is not valid UTF-8"),
            _ => Error::io(path, e),
        })?;
        f(i + 1, line.strip_suffix('\r').unwrap_or(&line))?;
    }
    Ok(())
}

pub(crate) fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
