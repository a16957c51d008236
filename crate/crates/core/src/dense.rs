//! Column-major dense matrices used as embedding blocks.
//!
//! Rows are the embedding width, columns are nodes, so a node's embedding
//! is a contiguous slice.

/// Dense f64 matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Dense::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign(&mut self, other: &Dense) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: f64, other: &Dense) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Dense) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Horizontal concatenation of column blocks sharing a row count.
    pub fn hstack(blocks: &[&Dense]) -> Dense {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Dense::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            out.data[at * rows..(at + b.cols) * rows].copy_from_slice(&b.data);
            at += b.cols;
        }
        out
    }

    /// Vertical concatenation: stack row blocks per column.
    pub fn vstack(blocks: &[&Dense]) -> Dense {
        assert!(!blocks.is_empty());
        let cols = blocks[0].cols;
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = Dense::zeros(rows, cols);
        for c in 0..cols {
            let dst = out.col_mut(c);
            let mut at = 0;
            for b in blocks {
                assert_eq!(b.cols, cols);
                dst[at..at + b.rows].copy_from_slice(b.col(c));
                at += b.rows;
            }
        }
        out
    }

    /// Copy of columns `range`.
    pub fn slice_cols(&self, start: usize, len: usize) -> Dense {
        let mut out = Dense::zeros(self.rows, len);
        out.data
            .copy_from_slice(&self.data[start * self.rows..(start + len) * self.rows]);
        out
    }

    /// Copy of rows [start, start+len) across all columns.
    pub fn slice_rows(&self, start: usize, len: usize) -> Dense {
        Dense::from_fn(len, self.cols, |r, c| self.get(start + r, c))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
