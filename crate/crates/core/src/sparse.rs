//! Row-compressed sparse matrices and the binary graph format.

use std::io::{Read, Write};
use std::path::Path;

use crate::dense::Dense;
use crate::error::{Error, Result};

const GRAPH_MAGIC: &[u8; 4] = b"MMSG";
const GRAPH_VERSION: u32 = 1;

/// CSR matrix with f64 values and u32 column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    /// Build from per-row (col, value) lists. Entries within a row must have
    /// strictly increasing column indices.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Csr {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut prev: Option<u32> = None;
            for (c, v) in row {
                assert!((c as usize) < cols, "column index out of range");
                if let Some(p) = prev {
                    assert!(c > p, "row entries must be strictly increasing");
                }
                prev = Some(c);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Csr {
            rows: n,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&(c as u32)) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, vals) = self.row(r);
            idx.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> Dense {
        let mut d = Dense::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            d.set(r, c as usize, v);
        }
        d
    }

    /// Weighted sum of same-shape matrices (union of sparsity patterns).
    pub fn weighted_sum(mats: &[&Csr], weights: &[f64]) -> Csr {
        assert_eq!(mats.len(), weights.len());
        assert!(!mats.is_empty());
        let rows = mats[0].rows;
        let cols = mats[0].cols;
        let mut out_rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(rows);
        for r in 0..rows {
            let mut acc: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
            for (m, &w) in mats.iter().zip(weights) {
                assert_eq!(m.rows, rows);
                assert_eq!(m.cols, cols);
                let (idx, vals) = m.row(r);
                for (&c, &v) in idx.iter().zip(vals) {
                    *acc.entry(c).or_insert(0.0) += w * v;
                }
            }
            out_rows.push(acc.into_iter().collect());
        }
        Csr::from_rows(cols, out_rows)
    }

    /// X · S for column-major X (width × rows): out[:, i] += S[j, i] · X[:, j].
    pub fn right_mul(&self, x: &Dense) -> Dense {
        assert_eq!(x.cols(), self.rows, "X·S dimension mismatch");
        let mut out = Dense::zeros(x.rows(), self.cols);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            let src: Vec<f64> = x.col(r).to_vec();
            for (&c, &v) in idx.iter().zip(vals) {
                let dst = out.col_mut(c as usize);
                for (d, s) in dst.iter_mut().zip(&src) {
                    *d += v * s;
                }
            }
        }
        out
    }

    /// X · Sᵀ: out[:, j] = Σ_i S[j, i] · X[:, i].
    pub fn right_mul_transpose(&self, x: &Dense) -> Dense {
        assert_eq!(x.cols(), self.cols, "X·Sᵀ dimension mismatch");
        let mut out = Dense::zeros(x.rows(), self.rows);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            let dst = out.col_mut(r);
            for (&c, &v) in idx.iter().zip(vals) {
                let src = x.col(c as usize);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
        out
    }

    /// Persist to the binary graph format. Only square matrices are stored;
    /// the format carries a single dimension field.
    pub fn save(&self, path: &Path) -> Result<()> {
        assert_eq!(self.rows, self.cols, "only square graphs persist");
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(GRAPH_MAGIC);
        buf.extend_from_slice(&GRAPH_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.rows as u64).to_le_bytes());
        buf.extend_from_slice(&(self.nnz() as u64).to_le_bytes());
        for &p in &self.indptr {
            buf.extend_from_slice(&(p as u64).to_le_bytes());
        }
        for &c in &self.indices {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        for &v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Csr> {
        let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut buf = Vec::new();
        f.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
        let mut rd = ByteReader::new(&buf, path);
        let magic = rd.take(4)?;
        if magic != GRAPH_MAGIC {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
                expected: "MMSG",
            });
        }
        let version = rd.u32()?;
        if version != GRAPH_VERSION {
            return Err(Error::BadVersion {
                path: path.to_path_buf(),
                found: version,
            });
        }
        let rows = rd.u64()? as usize;
        let nnz = rd.u64()? as usize;
        let cols = rows;
        let mut indptr = Vec::with_capacity(rows + 1);
        for _ in 0..=rows {
            indptr.push(rd.u64()? as usize);
        }
        let mut indices = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            indices.push(rd.u32()?);
        }
        let mut values = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            values.push(f64::from_le_bytes(rd.take(8)?.try_into().unwrap()));
        }
        Ok(Csr {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }
}

pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8], path: &'a Path) -> Self {
        ByteReader { buf, at: 0, path }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                context: format!("need {} bytes at offset {}", n, self.at),
            });
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
