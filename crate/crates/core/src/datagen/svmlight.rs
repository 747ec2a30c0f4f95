use std::io::Write;
use std::path::Path;

use super::{for_each_line, parse_error, write_file, Loaded};
use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;

/// Reads `label idx:val idx:val …` rows (1-indexed features, strictly
/// increasing per line). Labels, `qid:` tokens and `#` comments are
/// ignored; a line holding only a label is an all-zero row, a blank line is
/// skipped. The column count is the largest index seen unless `n_cols` is
/// given.
pub fn load_svmlight(path: impl AsRef<Path>, n_cols: Option<usize>) -> Result<Loaded<SparseMatrix>> {
    let path = path.as_ref();
    let mut triplets = Vec::new();
    let mut n_rows = 0;
    let mut max_col = 0;
    for_each_line(path, |lineno, line| {
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label) = tokens.next() else {
            return Ok(());
        };
        if label.contains(':') {
            return Err(parse_error(path, lineno, format!("expected a label, found '{label}'")));
        }
        let row = n_rows;
        n_rows += 1;
        let mut prev = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(path, lineno, format!("expected idx:value, found '{tok}'")))?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("bad feature index '{idx}'")))?;
            if idx == 0 {
                return Err(parse_error(path, lineno, "feature index 0 (indices are 1-based)"));
            }
            if idx <= prev {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("feature indices must increase strictly ({idx} after {prev})"),
                ));
            }
            prev = idx;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("bad value '{val}'")))?;
            if !val.is_finite() {
                return Err(parse_error(path, lineno, format!("non-finite value '{val}'")));
            }
            max_col = max_col.max(idx);
            triplets.push((row, idx - 1, val));
        }
        Ok(())
    })?;
    let n_cols = match n_cols {
        Some(c) if c < max_col => {
            return Err(Error::invalid(format!(
                "{}: feature index {max_col} exceeds the requested {c} columns",
                path.display()
            )))
        }
        Some(c) => c,
        None => max_col,
    };
    let (matrix, stats) = SparseMatrix::from_triplets_with_stats(n_rows, n_cols, triplets)?;
    Ok(Loaded { matrix, stats })
}

/// Writes every row with label `0`.
pub fn write_svmlight(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    write_file(path.as_ref(), |w: &mut dyn Write| {
        for i in 0..a.n_rows() {
            let (cols, vals) = a.row(i);
            write!(w, "0")?;
            for (c, v) in cols.iter().zip(vals) {
                write!(w, " {}:{:e}", c + 1, v)?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}
