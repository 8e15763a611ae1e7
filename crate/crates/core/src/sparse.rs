//! Complex compressed-row sparse matrices.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

/// Rows per rayon task in matrix-vector products.
const ROW_CHUNK: usize = 2048;

/// Complex sparse matrix in compressed-row storage.
///
/// Column indices are sorted and unique within each row. Explicit zeros produced
/// by cancellation during assembly are kept, so the pattern of an assembled FE
/// matrix is always structurally symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C64>,
}

impl ComplexSparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, C64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::invalid(format!(
                    "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![C64::new(0.0, 0.0); triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, C64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            // stable sort keeps the summation order of duplicates deterministic
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in scratch.iter() {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1
            || row_offsets[0] != 0
            || *row_offsets.last().unwrap() != col_indices.len()
            || col_indices.len() != values.len()
        {
            return Err(Error::invalid("inconsistent CSR arrays"));
        }
        for i in 0..nrows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(Error::invalid("row offsets must be non-decreasing"));
            }
            let row = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&j| j >= ncols) {
                return Err(Error::invalid(format!(
                    "row {i}: columns must be sorted, unique and in range"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
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

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterator over stored `(row, col, value)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller buffer. Each row is reduced sequentially, so the
    /// result does not depend on the thread count.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        check_len(self.ncols, x.len())?;
        check_len(self.nrows, y.len())?;
        let row_dot = |i: usize| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .fold(C64::new(0.0, 0.0), |acc, (&j, &v)| acc + v * x[j])
        };
        if self.nrows >= 4 * ROW_CHUNK {
            y.par_chunks_mut(ROW_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    for (r, yi) in chunk.iter_mut().enumerate() {
                        *yi = row_dot(c * ROW_CHUNK + r);
                    }
                });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        self.transpose_map(|v| v)
    }

    /// Conjugate transpose `A*`.
    pub fn conj_transpose(&self) -> Self {
        self.transpose_map(|v| v.conj())
    }

    fn transpose_map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        // rows are visited in increasing order, so columns of the result come out sorted
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_indices[p] = i;
                values[p] = f(v);
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Sparse product `A B` (row-by-row Gustavson).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len(self.ncols, other.nrows)?;
        let zero = C64::new(0.0, 0.0);
        let rows: Vec<(Vec<usize>, Vec<C64>)> = (0..self.nrows)
            .into_par_iter()
            .map_init(
                || (vec![usize::MAX; other.ncols], vec![zero; other.ncols]),
                |(marker, acc), i| {
                    let mut pattern = Vec::new();
                    let (cols, vals) = self.row(i);
                    for (&k, &a) in cols.iter().zip(vals) {
                        let (bcols, bvals) = other.row(k);
                        for (&j, &b) in bcols.iter().zip(bvals) {
                            if marker[j] != i {
                                marker[j] = i;
                                acc[j] = zero;
                                pattern.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    pattern.sort_unstable();
                    let values = pattern.iter().map(|&j| acc[j]).collect();
                    (pattern, values)
                },
            )
            .collect();
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0);
        let total = rows.iter().map(|r| r.0.len()).sum();
        let mut col_indices = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for (c, v) in rows {
            col_indices.extend(c);
            values.extend(v);
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `a·self + b·other` on the union pattern.
    pub fn linear_combination(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        check_len(self.nrows, other.nrows)?;
        check_len(self.ncols, other.ncols)?;
        let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz() + other.nnz());
        triplets.extend(self.iter().map(|(i, j, v)| (i, j, a * v)));
        triplets.extend(other.iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    /// Extracts `A[rows, cols]` with the given (not necessarily sorted) index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let mut position = vec![usize::MAX; self.ncols];
        for (local, &j) in cols.iter().enumerate() {
            if j >= self.ncols {
                return Err(Error::invalid(format!("column index {j} out of range")));
            }
            position[j] = local;
        }
        let mut triplets = Vec::new();
        for (li, &i) in rows.iter().enumerate() {
            if i >= self.nrows {
                return Err(Error::invalid(format!("row index {i} out of range")));
            }
            let (rc, rv) = self.row(i);
            for (&j, &v) in rc.iter().zip(rv) {
                if position[j] != usize::MAX {
                    triplets.push((li, position[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &triplets)
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut out = vec![vec![C64::new(0.0, 0.0); self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            out[i][j] = v;
        }
        out
    }

    pub fn to_faer_dense(&self) -> faer::Mat<C64> {
        let mut out = faer::Mat::<C64>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            out[(i, j)] = v;
        }
        out
    }

    /// Column-major copy for the direct solver.
    pub(crate) fn to_faer_csc(&self) -> Result<faer::sparse::SparseColMat<usize, C64>> {
        let t = self.transpose();
        let symbolic = faer::sparse::SymbolicSparseColMat::new_checked(
            self.nrows,
            self.ncols,
            t.row_offsets,
            None,
            t.col_indices,
        );
        Ok(faer::sparse::SparseColMat::new(symbolic, t.values))
    }

    /// True when the pattern equals the pattern of the transpose.
    pub fn is_structurally_symmetric(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        t.row_offsets == self.row_offsets && t.col_indices == self.col_indices
    }

    /// `max |A_ij - A_ji|` over stored entries; `f64::INFINITY` for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - B_ij|` over the union of both patterns.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_len(self.nrows, other.nrows)?;
        check_len(self.ncols, other.ncols)?;
        let a = self
            .iter()
            .map(|(i, j, v)| (v - other.get(i, j)).norm())
            .fold(0.0, f64::max);
        let b = other
            .iter()
            .map(|(i, j, v)| (v - self.get(i, j)).norm())
            .fold(0.0, f64::max);
        Ok(a.max(b))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Writes `row col re im` lines (zero-based) after a `rows cols nnz` header.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(out, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_are_summed_and_sorted() {
        let a = ComplexSparseMatrix::from_triplets(
            2,
            3,
            &[
                (0, 2, c(1.0, 0.0)),
                (0, 0, c(2.0, 1.0)),
                (0, 2, c(0.5, -1.0)),
                (1, 1, c(3.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(a.row_offsets(), &[0, 2, 3]);
        assert_eq!(a.col_indices(), &[0, 2, 1]);
        assert_eq!(a.get(0, 2), c(1.5, -1.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(ComplexSparseMatrix::from_triplets(2, 2, &[(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn from_csr_rejects_unsorted_rows() {
        let r = ComplexSparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![c(1.0, 0.0); 2]);
        assert!(r.is_err());
    }

    #[test]
    fn conj_transpose_and_matmul() {
        let a = ComplexSparseMatrix::from_triplets(
            2,
            2,
            &[
                (0, 0, c(1.0, 1.0)),
                (0, 1, c(2.0, 0.0)),
                (1, 1, c(0.0, -1.0)),
            ],
        )
        .unwrap();
        let ah = a.conj_transpose();
        assert_eq!(ah.get(1, 0), c(2.0, 0.0));
        assert_eq!(ah.get(0, 0), c(1.0, -1.0));
        let p = a.matmul(&ah).unwrap();
        // (A A*)_00 = |1+i|² + |2|² = 6
        assert!((p.get(0, 0) - c(6.0, 0.0)).norm() < 1e-15);
        // (A A*)_01 = 2 · conj(-i) = 2i
        assert!((p.get(0, 1) - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn submatrix_follows_index_order() {
        let a = ComplexSparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, c(1.0, 0.0)),
                (1, 2, c(5.0, 0.0)),
                (2, 1, c(7.0, 0.0)),
            ],
        )
        .unwrap();
        let s = a.submatrix(&[2, 1], &[1, 2]).unwrap();
        assert_eq!(s.get(0, 0), c(7.0, 0.0));
        assert_eq!(s.get(1, 1), c(5.0, 0.0));
    }

    #[test]
    fn coordinate_export_has_header_and_one_line_per_entry() {
        let a = ComplexSparseMatrix::identity(3);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "3 3 3");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1 1 1.0"));
    }
}
