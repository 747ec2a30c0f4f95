use std::io::Write;
use std::path::Path;

use super::{for_each_line, parse_error, write_file, Loaded};
use crate::error::{Error, Result};
use crate::matrix::{AssemblyStats, DenseMatrix, Matrix, SparseMatrix};

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

enum State {
    Banner,
    Size,
    Coordinate { n_rows: usize, n_cols: usize, declared: usize },
    Array { n_rows: usize, n_cols: usize },
}

/// Reads a real (or integer) general MatrixMarket file: `coordinate`
/// becomes CSR with duplicate coordinates summed, `array` becomes dense.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<Loaded<Matrix>> {
    let path = path.as_ref();
    let mut state = State::Banner;
    let mut layout = Layout::Coordinate;
    let mut triplets = Vec::new();
    let mut values = Vec::new();
    for_each_line(path, |lineno, line| {
        if let State::Banner = state {
            layout = parse_banner(line).map_err(|msg| parse_error(path, lineno, msg))?;
            state = State::Size;
            return Ok(());
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            return Ok(());
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let count = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| parse_error(path, lineno, format!("bad integer '{s}'")))
        };
        let real = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| parse_error(path, lineno, format!("bad value '{s}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_error(path, lineno, format!("non-finite value '{s}'")))
            }
        };
        match state {
            State::Banner => unreachable!(),
            State::Size => {
                state = match (layout, fields.as_slice()) {
                    (Layout::Coordinate, [r, c, nnz]) => State::Coordinate {
                        n_rows: count(r)?,
                        n_cols: count(c)?,
                        declared: count(nnz)?,
                    },
                    (Layout::Array, [r, c]) => State::Array {
                        n_rows: count(r)?,
                        n_cols: count(c)?,
                    },
                    _ => return Err(parse_error(path, lineno, "malformed size line")),
                };
            }
            State::Coordinate { n_rows, n_cols, declared } => {
                let [i, j, v] = fields.as_slice() else {
                    return Err(parse_error(path, lineno, "expected 'row col value'"));
                };
                let (i, j) = (count(i)?, count(j)?);
                if i == 0 || j == 0 || i > n_rows || j > n_cols {
                    return Err(parse_error(
                        path,
                        lineno,
                        format!("entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix (indices are 1-based)"),
                    ));
                }
                if triplets.len() == declared {
                    return Err(parse_error(path, lineno, format!("more than the declared {declared} entries")));
                }
                triplets.push((i - 1, j - 1, real(v)?));
            }
            State::Array { n_rows, n_cols } => {
                let [v] = fields.as_slice() else {
                    return Err(parse_error(path, lineno, "expected one value per line"));
                };
                if values.len() == n_rows * n_cols {
                    return Err(parse_error(path, lineno, "more values than the declared size"));
                }
                values.push(real(v)?);
            }
        }
        Ok(())
    })?;
    match state {
        State::Banner | State::Size => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "missing banner or size line".into(),
        }),
        State::Coordinate { n_rows, n_cols, declared } => {
            if triplets.len() != declared {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    msg: format!("declared {declared} entries, found {}", triplets.len()),
                });
            }
            let (m, stats) = SparseMatrix::from_triplets_with_stats(n_rows, n_cols, triplets)?;
            Ok(Loaded {
                matrix: Matrix::Sparse(m),
                stats,
            })
        }
        State::Array { n_rows, n_cols } => {
            if values.len() != n_rows * n_cols {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    msg: format!("declared {} values, found {}", n_rows * n_cols, values.len()),
                });
            }
            // column-major on disk
            let m = DenseMatrix::from_fn(n_rows, n_cols, |i, j| values[j * n_rows + i])?;
            let stats = AssemblyStats {
                entries: values.len(),
                ..Default::default()
            };
            Ok(Loaded {
                matrix: Matrix::Dense(m),
                stats,
            })
        }
    }
}

fn parse_banner(line: &str) -> std::result::Result<Layout, String> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    let [banner, object, format, field, symmetry] = words.as_slice() else {
        return Err(format!("malformed MatrixMarket banner '{line}'"));
    };
    if banner != "%%matrixmarket" || object != "matrix" {
        return Err(format!("not a MatrixMarket matrix file: '{line}'"));
    }
    let layout = match format.as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(format!("unknown format '{other}'")),
    };
    if field != "real" && field != "integer" && field != "double" {
        return Err(format!("unsupported field '{field}' (only real matrices are supported)"));
    }
    if symmetry != "general" {
        return Err(format!("unsupported symmetry '{symmetry}' (only general matrices are supported)"));
    }
    Ok(layout)
}

/// Sparse matrices are written in coordinate format, dense ones as arrays.
/// Values use the shortest representation that reads back bit-exactly.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &Matrix) -> Result<()> {
    write_file(path.as_ref(), |w: &mut dyn Write| match a {
        Matrix::Sparse(m) => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
            for i in 0..m.n_rows() {
                let (cols, vals) = m.row(i);
                for (c, v) in cols.iter().zip(vals) {
                    writeln!(w, "{} {} {:e}", i + 1, c + 1, v)?;
                }
            }
            Ok(())
        }
        Matrix::Dense(m) => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", m.n_rows(), m.n_cols())?;
            for j in 0..m.n_cols() {
                for i in 0..m.n_rows() {
                    writeln!(w, "{:e}", m.get(i, j))?;
                }
            }
            Ok(())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;
    use std::fs;

    fn load_str(text: &str) -> Result<Loaded<Matrix>> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        fs::write(&p, text).unwrap();
        load_matrix_market(&p)
    }

    #[test]
    fn single_coordinate_entry() {
        let l = load_str("%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n1 2 5\n").unwrap();
        let Matrix::Sparse(m) = l.matrix else { panic!("expected CSR") };
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 5.0);
    }

    #[test]
    fn duplicates_are_summed_and_counted() {
        let l = load_str("%%MatrixMarket matrix coordinate real general\r\n1 1 2\r\n1 1 2\r\n1 1 3\r\n").unwrap();
        assert_eq!(l.matrix.to_dense().get(0, 0), 5.0);
        assert_eq!(l.stats.duplicates, 1);
        assert_eq!(l.stats.entries, 2);
    }

    #[test]
    fn array_is_column_major() {
        let l = load_str("%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n").unwrap();
        let Matrix::Dense(m) = l.matrix else { panic!("expected dense") };
        assert_eq!(m.row(0), &[1.0, 3.0, 5.0]);
        assert_eq!(m.row(1), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn unsupported_qualifiers_rejected() {
        for banner in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate pattern general",
            "%%MatrixMarket matrix coordinate real symmetric",
            "%%MatrixMarket vector coordinate real general",
        ] {
            assert!(load_str(&format!("{banner}\n1 1 1\n1 1 1\n")).is_err(), "{banner}");
        }
    }

    #[test]
    fn count_mismatch_rejected() {
        assert!(load_str("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(load_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n").is_err());
        assert!(load_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
        assert!(load_str("%%MatrixMarket matrix array real general\n2 2\n1\n").is_err());
    }

    #[test]
    fn round_trips_are_bit_exact() {
        let mut rng = seeded(5);
        let dense = DenseMatrix::from_fn(7, 4, |_, _| rng.random::<f64>() * 10f64.powi(rng.random_range(-30..30))).unwrap();
        let sparse = SparseMatrix::from_dense(&DenseMatrix::from_fn(9, 6, |_, _| {
            if rng.random::<f64>() < 0.3 { rng.random::<f64>() - 0.5 } else { 0.0 }
        }).unwrap());
        let dir = tempfile::tempdir().unwrap();
        for (name, m) in [("d.mtx", Matrix::Dense(dense)), ("s.mtx", Matrix::Sparse(sparse))] {
            let p = dir.path().join(name);
            write_matrix_market(&p, &m).unwrap();
            assert_eq!(load_matrix_market(&p).unwrap().matrix, m);
        }
    }
}
