use super::{DenseMatrix, Vector};
use crate::{Error, Result};

/// Compressed sparse row matrix.
///
/// Invariants enforced at construction: `row_offsets` has `rows + 1`
/// non-decreasing entries ending at `values.len()`, column indices are
/// strictly increasing within each row and in range, and all values are
/// finite. Explicitly stored zeros are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != rows + 1 {
            return Err(Error::InvalidArgument(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                rows + 1
            )));
        }
        if col_indices.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "col_indices length {} != values length {}",
                col_indices.len(),
                values.len()
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::InvalidArgument(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            for k in lo..hi {
                if col_indices[k] >= cols {
                    return Err(Error::InvalidArgument(format!(
                        "column index {} out of range in row {i}",
                        col_indices[k]
                    )));
                }
                if k > lo && col_indices[k] <= col_indices[k - 1] {
                    return Err(Error::InvalidArgument(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sparse value {k} is {}", values[k])));
        }
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    /// Builds a CSR matrix from `(row, col, value)` triplets, summing
    /// duplicates. Triplet order does not matter.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) out of range for {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("triplet ({i}, {j}) value is {v}")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            match merged.last_mut() {
                Some((pi, pj, pv)) if *pi == i && *pj == j => *pv += v,
                _ => merged.push((i, j, v)),
            }
        }

        let mut row_offsets = vec![0usize; rows + 1];
        for &(i, _, _) in &merged {
            row_offsets[i + 1] += 1;
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        let col_indices = merged.iter().map(|&(_, j, _)| j).collect();
        let values = merged.iter().map(|&(_, _, v)| v).collect();
        Self::new(rows, cols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_offsets[i]..self.row_offsets[i + 1])
                .map(move |k| (i, self.col_indices[k], self.values[k]))
        })
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "matvec with mismatched dimensions");
        let x = v.as_slice();
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *o = acc;
        }
        Vector::from(out)
    }

    pub fn matvec_transpose(&self, v: &Vector) -> Vector {
        assert_eq!(self.rows, v.len(), "transpose matvec with mismatched dimensions");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                out[self.col_indices[k]] += self.values[k] * vi;
            }
        }
        Vector::from(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, v);
        }
        d
    }

    /// A copy with every stored value multiplied by `a`.
    pub fn scaled(&self, a: f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= a;
        }
        out
    }

    /// Scales row `i` by `factors[i]` in place.
    pub fn scale_rows(&mut self, factors: &Vector) -> Result<()> {
        if factors.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "{} scale factors for {} rows",
                factors.len(),
                self.rows
            )));
        }
        for i in 0..self.rows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                self.values[k] *= factors[i];
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SparseMatrix {
        // [ 1 0 2 ]
        // [ 0 3 0 ]
        // [ 4 0 5 ]
        SparseMatrix::new(
            3,
            3,
            vec![0, 2, 3, 5],
            vec![0, 2, 1, 0, 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
        )
        .unwrap()
    }

    #[test]
    fn matvec_matches_dense() {
        let a = example();
        let v = Vector::from(vec![1.0, -1.0, 2.0]);
        assert_eq!(a.matvec(&v).as_slice(), &[5.0, -3.0, 14.0]);
        assert_eq!(a.to_dense().matvec(&v), a.matvec(&v));
        assert_eq!(a.to_dense().matvec_transpose(&v), a.matvec_transpose(&v));
    }

    #[test]
    fn from_triplets_sums_duplicates_in_any_order() {
        let t = [(2, 0, 4.0), (0, 2, 2.0), (1, 1, 1.0), (0, 0, 1.0), (2, 2, 5.0), (1, 1, 2.0)];
        let a = SparseMatrix::from_triplets(3, 3, &t).unwrap();
        assert_eq!(a, example());
        assert_eq!(a.nnz(), 5);
    }

    #[test]
    fn invalid_structure_is_rejected() {
        // Column index out of range.
        assert!(SparseMatrix::new(2, 2, vec![0, 1, 2], vec![0, 2], vec![1.0, 1.0]).is_err());
        // Offsets not ending at nnz.
        assert!(SparseMatrix::new(2, 2, vec![0, 1, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        // Duplicate column within a row.
        assert!(SparseMatrix::new(1, 2, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        // Non-finite value.
        assert!(SparseMatrix::new(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn scale_rows_applies_per_row() {
        let mut a = example();
        a.scale_rows(&Vector::from(vec![2.0, 0.5, 1.0])).unwrap();
        assert_eq!(a.values(), &[2.0, 4.0, 1.5, 4.0, 5.0]);
    }
}
