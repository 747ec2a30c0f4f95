use std::path::Path;

use super::{for_each_line, parse_error, Loaded};
use crate::error::Result;
use crate::matrix::{AssemblyStats, SparseMatrix};

/// Reads a directed edge list (`i j` per line, `#` comment lines) into a
/// square 0/1 adjacency matrix with `a_ij = 1` for each edge `i → j`.
/// Repeated edges collapse to a single 1 and are counted as duplicates.
pub fn load_edge_list(path: impl AsRef<Path>, one_indexed: bool) -> Result<Loaded<SparseMatrix>> {
    let path = path.as_ref();
    let mut edges = Vec::new();
    let mut max_id = None;
    for_each_line(path, |lineno, line| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields.as_slice() else {
            return Err(parse_error(path, lineno, format!("expected two node ids, found '{line}'")));
        };
        let id = |s: &str| -> Result<usize> {
            if s.starts_with('-') {
                return Err(parse_error(path, lineno, format!("negative node id '{s}'")));
            }
            let v: usize = s
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("node id '{s}' is not an integer")))?;
            match (one_indexed, v) {
                (true, 0) => Err(parse_error(path, lineno, "node id 0 in a one-indexed edge list")),
                (true, v) => Ok(v - 1),
                (false, v) => Ok(v),
            }
        };
        let (i, j) = (id(a)?, id(b)?);
        max_id = Some(max_id.unwrap_or(0).max(i).max(j));
        edges.push((i, j));
        Ok(())
    })?;
    let n = max_id.map_or(0, |m| m + 1);
    let entries = edges.len();
    edges.sort_unstable();
    edges.dedup();
    let stats = AssemblyStats {
        entries,
        duplicates: entries - edges.len(),
        zeros_dropped: 0,
    };
    let matrix = SparseMatrix::from_triplets(n, n, edges.into_iter().map(|(i, j)| (i, j, 1.0)).collect())?;
    Ok(Loaded { matrix, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use std::fs;

    fn load_str(text: &str, one: bool) -> Result<Loaded<SparseMatrix>> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        fs::write(&p, text).unwrap();
        load_edge_list(&p, one)
    }

    #[test]
    fn small_graph() {
        let m = load_str("# two edges\n1 2\n3 2\n", true).unwrap().matrix;
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense().column(1), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn self_loops_kept_and_duplicates_collapsed() {
        let l = load_str("2 2\n1 2\n1 2\n", true).unwrap();
        assert_eq!(l.matrix.get(1, 1), 1.0);
        assert_eq!(l.matrix.get(0, 1), 1.0);
        assert_eq!(l.matrix.nnz(), 2);
        assert_eq!(l.stats.duplicates, 1);
        assert_eq!(l.stats.entries, l.matrix.nnz() + l.stats.duplicates);
    }

    #[test]
    fn zero_indexed_size() {
        let m = load_str("0 4\r\n", false).unwrap().matrix;
        assert_eq!(m.shape(), (5, 5));
        assert_eq!(m.get(0, 4), 1.0);
    }

    #[test]
    fn bad_tokens_rejected() {
        for (text, one) in [("1 -2\n", true), ("1 x\n", true), ("0 1\n", true), ("1 2 3\n", false), ("1.5 2\n", false)] {
            assert!(matches!(load_str(text, one), Err(Error::Parse { line: 1, .. })), "{text:?}");
        }
    }
}
