//! Compressed sparse row matrices.

use crate::error::{Error, Result};

/// Row-major sparse matrix. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Format(format!(
                "{} weights do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut b = RowBuilder::new(cols);
        for r in 0..rows {
            for (c, &v) in data[r * cols..(r + 1) * cols].iter().enumerate() {
                b.push(c, v);
            }
            b.end_row();
        }
        Ok(b.finish())
    }

    /// Rows given as `(column, value)` lists; columns must be increasing.
    pub fn from_rows(cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut b = RowBuilder::new(cols);
        for row in rows {
            for &(c, v) in row {
                b.push(c, v);
            }
            b.end_row();
        }
        b.finish()
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

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out[r * self.cols + c] = v;
            }
        }
        out
    }

    /// `out[r] = Σ_c A[r, c] x[c]`, summed in column order.
    #[inline]
    pub fn mul_vec(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.rows).map(|r| {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut acc = 0.0;
            for (c, v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[*c];
            }
            acc
        }));
    }

    /// Stacks `parts` vertically, shifting the columns of part `i` by
    /// `col_offsets[i]`; the result has `cols` columns.
    pub fn stack(parts: &[&SparseMatrix], col_offsets: &[usize], cols: usize) -> Self {
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let nnz: usize = parts.iter().map(|p| p.nnz()).sum();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (p, &off) in parts.iter().zip(col_offsets) {
            for r in 0..p.rows {
                for (c, v) in p.row(r) {
                    col_idx.push(c + off);
                    values.push(v);
                }
                row_ptr.push(col_idx.len());
            }
        }
        SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

struct RowBuilder {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl RowBuilder {
    fn new(cols: usize) -> Self {
        RowBuilder {
            cols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    fn push(&mut self, c: usize, v: f64) {
        debug_assert!(c < self.cols);
        if v != 0.0 {
            self.col_idx.push(c);
            self.values.push(v);
        }
    }

    fn end_row(&mut self) {
        self.row_ptr.push(self.col_idx.len());
    }

    fn finish(self) -> SparseMatrix {
        SparseMatrix {
            rows: self.row_ptr.len() - 1,
            cols: self.cols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        }
    }
}
