//! Compressed sparse row storage and Matrix Market I/O.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Real sparse matrix in row-compressed layout. Column indices within a row
/// are strictly increasing.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    abs_norm: OnceLock<f64>,
}

impl PartialEq for CsrMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed,
    /// explicit zeros are kept out.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut sum = 0.0;
                while k < row.len() && row[k].0 == j {
                    sum += row[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    col_idx.push(j);
                    values.push(sum);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            abs_norm: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_triplets(
            d.len(),
            d.len(),
            d.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
        .expect("diagonal entries are in range")
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t).expect("dense entries are in range")
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

    /// Stored `(column, value)` pairs of row `i`, in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    pub fn max_col_nnz(&self) -> usize {
        let mut counts = vec![0usize; self.ncols];
        for &j in &self.col_idx {
            counts[j] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(i, j, v)| (j, i, v)),
        )
        .expect("transpose preserves bounds")
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(i, j, v)| (i, j, c * v)),
        )
        .expect("scaling preserves bounds")
    }

    pub fn abs(&self) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(i, j, v)| (i, j, v.abs())),
        )
        .expect("abs preserves bounds")
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Carrier-precision product `K w`.
    pub fn matvec(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec operand", self.ncols, w.len())?;
        Ok((0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * w[j]).sum())
            .collect())
    }

    /// Sparse product `self * other` in carrier precision.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut acc = vec![0.0; other.ncols];
        let mut touched = vec![false; other.ncols];
        let mut cols = Vec::new();
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &cols {
                triplets.push((i, j, acc[j]));
                acc[j] = 0.0;
                touched[j] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.triplets()
            .all(|(i, j, v)| (v - self.get(j, i)).abs() <= rel_tol * scale)
    }

    /// Spectral norm of the entrywise absolute value, `|| |K| ||`. Computed
    /// once by a dense eigensolve of `|K|^t |K|` and cached.
    pub fn abs_norm(&self) -> f64 {
        *self.abs_norm.get_or_init(|| {
            let a = self.abs().to_dense();
            crate::linops::operator_norm(&a).expect("abs norm eigensolve")
        })
    }

    /// Hash of the exact stored bit patterns; used to detect mutation.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.nrows.hash(&mut h);
        self.ncols.hash(&mut h);
        self.row_ptr.hash(&mut h);
        self.col_idx.hash(&mut h);
        for v in &self.values {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Writes Matrix Market coordinate format. Symmetric matrices store the
    /// lower triangle only. Values use shortest round-trip formatting.
    pub fn write_matrix_market<W: Write>(&self, mut out: W, symmetric: bool) -> Result<()> {
        let kind = if symmetric { "symmetric" } else { "general" };
        let entries: Vec<_> = self
            .triplets()
            .filter(|&(i, j, _)| !symmetric || j <= i)
            .collect();
        let mut s = String::new();
        writeln!(s, "%%MatrixMarket matrix coordinate real {kind}").unwrap();
        writeln!(s, "{} {} {}", self.nrows, self.ncols, entries.len()).unwrap();
        for (i, j, v) in entries {
            writeln!(s, "{} {} {:e}", i + 1, j + 1, v).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Reads Matrix Market `coordinate real` data, `general` or `symmetric`.
    pub fn read_matrix_market<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
        let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
        if tokens.len() != 5
            || tokens[0] != "%%matrixmarket"
            || tokens[1] != "matrix"
            || tokens[2] != "coordinate"
            || tokens[3] != "real"
        {
            return Err(Error::Parse(format!("unsupported header: {header}")));
        }
        let symmetric = match tokens[4].as_str() {
            "symmetric" => true,
            "general" => false,
            other => return Err(Error::Parse(format!("unsupported symmetry: {other}"))),
        };
        let mut size: Option<(usize, usize, usize)> = None;
        let mut triplets = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("malformed line: {line}"));
            match size {
                None => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let p = |s: &str| s.parse::<usize>().map_err(|_| bad());
                    size = Some((p(parts[0])?, p(parts[1])?, p(parts[2])?));
                }
                Some((nr, nc, _)) => {
                    if parts.len() != 3 {
                        return Err(bad());
                    }
                    let i: usize = parts[0].parse().map_err(|_| bad())?;
                    let j: usize = parts[1].parse().map_err(|_| bad())?;
                    let v: f64 = parts[2].parse().map_err(|_| bad())?;
                    if i == 0 || j == 0 || i > nr || j > nc {
                        return Err(bad());
                    }
                    triplets.push((i - 1, j - 1, v));
                    if symmetric && i != j {
                        triplets.push((j - 1, i - 1, v));
                    }
                }
            }
        }
        let (nr, nc, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
        let stored = if symmetric {
            triplets.iter().filter(|&&(i, j, _)| j <= i).count()
        } else {
            triplets.len()
        };
        if stored != nnz {
            return Err(Error::Parse(format!(
                "expected {nnz} entries, found {stored}"
            )));
        }
        Self::from_triplets(nr, nc, triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0), (1, 0, 0.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn out_of_range_entry_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, [(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]).unwrap();
        let b = CsrMatrix::from_triplets(3, 2, [(0, 1, 4.0), (2, 0, 5.0), (1, 1, -1.0)]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_dense(), a.to_dense() * b.to_dense());
    }

    #[test]
    fn matrix_market_round_trip_is_bitwise() {
        let m = CsrMatrix::from_triplets(
            3,
            3,
            [
                (0, 0, 2.0 / 3.0),
                (1, 0, -0.1),
                (0, 1, -0.1),
                (1, 1, 1e-7),
                (2, 2, 3.0),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf, true).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        let back = CsrMatrix::read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_market_rejects_bad_header() {
        let text = "%%MatrixMarket matrix array real general\n1 1\n1.0\n";
        assert!(CsrMatrix::read_matrix_market(text.as_bytes()).is_err());
    }

    #[test]
    fn column_counts() {
        let m = CsrMatrix::from_triplets(3, 1, [(0, 0, 0.5), (1, 0, 1.0), (2, 0, 0.5)]).unwrap();
        assert_eq!(m.max_row_nnz(), 1);
        assert_eq!(m.max_col_nnz(), 3);
    }
}
