use std::fs;
use std::path::Path;

use super::{Problem, SymmetryClass};
use crate::linalg::{DenseMatrix, Matrix, SparseMatrix, Vector};
use crate::{Error, Result};

/// Reads a real-valued Matrix Market file into a [`Problem`].
///
/// Supported headers: `matrix coordinate real {general|symmetric|skew-symmetric}`
/// and `matrix array real general`. Symmetric and skew-symmetric coordinate
/// files must store the lower triangle (skew strictly below the diagonal)
/// and are expanded to full storage; the expansion determines the problem's
/// symmetry class. The right-hand side is taken as `A·1` so the constant-one
/// vector solves the system; pair with [`read_vector_market`] when a file
/// supplies its own `b`.
pub fn read_matrix_market(path: &Path) -> Result<Problem> {
    let (a, class) = read_matrix(path)?;
    let n = a.rows();
    let b = a.matvec(&Vector::ones(n));
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix-market".into());
    Problem::new(a, b, class, label)?.with_solution(Vector::ones(n))
}

fn err_at(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads just the matrix and the symmetry class implied by the header.
pub fn read_matrix(path: &Path) -> Result<(Matrix, SymmetryClass)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| err_at(path, 1, "empty file, expected %%MatrixMarket header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || !fields[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(err_at(path, 1, "malformed header, expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if !fields[1].eq_ignore_ascii_case("matrix") {
        return Err(err_at(path, 1, format!("unsupported object '{}'", fields[1])));
    }
    let format = fields[2].to_ascii_lowercase();
    let field = fields[3].to_ascii_lowercase();
    let symmetry = fields[4].to_ascii_lowercase();
    match field.as_str() {
        "real" | "integer" => {}
        other => {
            return Err(err_at(path, 1, format!("unsupported field type '{other}', only real-valued matrices are handled")));
        }
    }
    let class = match symmetry.as_str() {
        "general" => SymmetryClass::General,
        "symmetric" => SymmetryClass::Symmetric,
        "skew-symmetric" => SymmetryClass::SkewSymmetric,
        other => {
            return Err(err_at(path, 1, format!("unsupported symmetry '{other}'")));
        }
    };

    // Skip comment and blank lines to the size line.
    let mut size_line = None;
    for (no, l) in lines.by_ref() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some((no, t.to_owned()));
        break;
    }
    let (size_no, size) =
        size_line.ok_or_else(|| err_at(path, text.lines().count().max(1), "missing size line"))?;

    match format.as_str() {
        "coordinate" => {
            let dims: Vec<&str> = size.split_whitespace().collect();
            if dims.len() != 3 {
                return Err(err_at(path, size_no, "coordinate size line must be 'rows cols nnz'"));
            }
            let rows = parse_usize(path, size_no, dims[0])?;
            let cols = parse_usize(path, size_no, dims[1])?;
            let nnz = parse_usize(path, size_no, dims[2])?;
            if class != SymmetryClass::General && rows != cols {
                return Err(err_at(path, size_no, "symmetric storage requires a square matrix"));
            }
            let mut triplets = Vec::with_capacity(2 * nnz);
            let mut seen = 0usize;
            for (no, l) in lines {
                let t = l.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                let parts: Vec<&str> = t.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err_at(path, no, "coordinate entry must be 'row col value'"));
                }
                let i = parse_usize(path, no, parts[0])?;
                let j = parse_usize(path, no, parts[1])?;
                let v = parse_f64(path, no, parts[2])?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(err_at(path, no, format!("index ({i}, {j}) out of range for {rows}x{cols}")));
                }
                let (i, j) = (i - 1, j - 1);
                match class {
                    SymmetryClass::General => triplets.push((i, j, v)),
                    SymmetryClass::Symmetric => {
                        if i < j {
                            return Err(err_at(path, no, "entry above the diagonal in a symmetric file"));
                        }
                        triplets.push((i, j, v));
                        if i != j {
                            triplets.push((j, i, v));
                        }
                    }
                    SymmetryClass::SkewSymmetric => {
                        if i <= j {
                            return Err(err_at(path, no, "skew-symmetric files store strictly lower-triangular entries"));
                        }
                        triplets.push((i, j, v));
                        triplets.push((j, i, -v));
                    }
                    SymmetryClass::ShiftedSkewSymmetric => unreachable!(),
                }
                seen += 1;
                if seen > nnz {
                    return Err(err_at(path, no, format!("more than the declared {nnz} entries")));
                }
            }
            if seen < nnz {
                return Err(err_at(
                    path,
                    text.lines().count().max(1),
                    format!("file ended after {seen} of {nnz} declared entries"),
                ));
            }
            Ok((Matrix::from(SparseMatrix::from_triplets(rows, cols, &triplets)?), class))
        }
        "array" => {
            if class != SymmetryClass::General {
                return Err(err_at(path, 1, "array format is only supported with general symmetry"));
            }
            let dims: Vec<&str> = size.split_whitespace().collect();
            if dims.len() != 2 {
                return Err(err_at(path, size_no, "array size line must be 'rows cols'"));
            }
            let rows = parse_usize(path, size_no, dims[0])?;
            let cols = parse_usize(path, size_no, dims[1])?;
            let mut values = Vec::with_capacity(rows * cols);
            let mut last_no = size_no;
            for (no, l) in lines {
                let t = l.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                last_no = no;
                for tok in t.split_whitespace() {
                    values.push(parse_f64(path, no, tok)?);
                }
                if values.len() > rows * cols {
                    return Err(err_at(path, no, format!("more than {} declared values", rows * cols)));
                }
            }
            if values.len() < rows * cols {
                return Err(err_at(
                    path,
                    last_no,
                    format!("file ended after {} of {} declared values", values.len(), rows * cols),
                ));
            }
            // Array format lists columns one after another.
            let m = DenseMatrix::from_fn(rows, cols, |i, j| values[j * rows + i]);
            Ok((Matrix::from(m), SymmetryClass::General))
        }
        other => Err(err_at(path, 1, format!("unsupported format '{other}'"))),
    }
}

/// Reads a dense vector stored as an `array real general` file with a
/// single column.
pub fn read_vector_market(path: &Path) -> Result<Vector> {
    let (m, _) = read_matrix(path)?;
    let d = m.to_dense();
    if d.cols() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{} holds a {}x{} matrix, expected a single column",
            path.display(),
            d.rows(),
            d.cols()
        )));
    }
    Vector::new((0..d.rows()).map(|i| d.at(i, 0)).collect())
}

/// Writes a matrix in `coordinate real general` format with full `f64`
/// round-trip precision.
pub fn write_matrix_market(path: &Path, a: &Matrix, comments: &[&str]) -> Result<()> {
    let triplets = a.nonzero_triplets();
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    for c in comments {
        out.push_str(&format!("% {c}\n"));
    }
    out.push_str(&format!("{} {} {}\n", a.rows(), a.cols(), triplets.len()));
    for (i, j, v) in triplets {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a vector as a one-column `array real general` file.
pub fn write_vector_market(path: &Path, v: &Vector) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} 1\n", v.len()));
    for x in v.iter() {
        out.push_str(&format!("{x}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| err_at(path, line, format!("expected a non-negative integer, got '{tok}'")))
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v = tok
        .parse::<f64>()
        .map_err(|_| err_at(path, line, format!("expected a real number, got '{tok}'")))?;
    if !v.is_finite() {
        return Err(err_at(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}
