//! A compressed-sparse-column matrix with real entries.
//!
//! Built from triplets in any order; stored column-major with rows sorted
//! inside each column, which is also the order [`triplets`](SparseMatrix::triplets)
//! yields. Structural zeros are preserved: an explicitly stored `0.0` stays
//! an entry, so a decompressed Jacobian keeps the shape of its pattern even
//! where the current point evaluates to zero.

use crate::matrix::Mat;
use crate::mmio::{self, Field};
use crate::pattern::SparsityPattern;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use crate::mmio::MatrixMarketError;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) is outside a {nrows} x {ncols} matrix")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    /// Start of each column in `rows`/`values`; length `ncols + 1`.
    col_ptr: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets in any order. Duplicate
    /// positions are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::EntryOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut rows: Vec<u32> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (r, c, v) in sorted {
            if last == Some((c, r)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                rows.push(r as u32);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((c, r));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            rows,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    /// The stored value at `(row, col)`, or `0.0` when the position has no
    /// entry.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let slice = &self.rows[self.col_ptr[col]..self.col_ptr[col + 1]];
        match slice.binary_search(&(row as u32)) {
            Ok(k) => self.values[self.col_ptr[col] + k],
            Err(_) => 0.0,
        }
    }

    /// `(row, value)` pairs of one column, rows ascending.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        self.rows[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&r, &v)| (r as usize, v))
    }

    /// All `(row, col, value)` triplets, column-major, rows ascending.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |c| self.column(c).map(move |(r, v)| (r, c, v)))
    }

    /// The positions of the stored entries.
    pub fn pattern(&self) -> SparsityPattern {
        let entries: Vec<(usize, usize)> = self.triplets().map(|(r, c, _)| (r, c)).collect();
        SparsityPattern::from_entries(self.nrows, self.ncols, &entries)
            .expect("stored entries are in range")
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest absolute difference against a dense matrix of the same
    /// shape, counting positions missing from the sparse side as zero.
    pub fn max_abs_diff_dense(&self, dense: &Mat<f64>) -> f64 {
        self.to_dense().max_abs_diff(dense)
    }

    /// Writes `coordinate real general` format, 1-based indices.
    pub fn write_matrix_market(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
        }
        Ok(())
    }

    pub fn to_matrix_market_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_matrix_market(&mut buf)
            .expect("writing to memory");
        String::from_utf8(buf).expect("output is ascii")
    }

    /// Reads `coordinate real general` format. Comment and blank lines are
    /// tolerated; duplicate entries are summed.
    pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Self, MatrixMarketError> {
        let mut lines = mmio::DataLines::new(reader);
        let (no, banner) = lines
            .next_raw()?
            .ok_or_else(|| mmio::parse_err(0, "empty file"))?;
        mmio::check_banner(&banner, no, Field::Real)?;
        let (no, size) = lines
            .next_data()?
            .ok_or_else(|| mmio::parse_err(no, "missing size line"))?;
        let (nrows, ncols, nnz) = mmio::parse_size(&size, no)?;
        let mut triplets = Vec::with_capacity(nnz);
        let mut last = no;
        while let Some((no, line)) = lines.next_data()? {
            last = no;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(mmio::parse_err(
                    no,
                    format!("expected `row col value`, found `{line}`"),
                ));
            }
            let i = mmio::parse_coord(parts[0], no, "row", nrows)?;
            let j = mmio::parse_coord(parts[1], no, "column", ncols)?;
            let v: f64 = parts[2]
                .parse()
                .map_err(|_| mmio::parse_err(no, format!("invalid value `{}`", parts[2])))?;
            triplets.push((i, j, v));
        }
        if triplets.len() != nnz {
            return Err(mmio::parse_err(
                last,
                format!(
                    "size line promised {} entries, found {}",
                    nnz,
                    triplets.len()
                ),
            ));
        }
        Ok(Self::from_triplets(nrows, ncols, &triplets)
            .expect("coordinates were range-checked while parsing"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_matrix_market(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MatrixMarketError> {
        let file = std::fs::File::open(path)?;
        Self::read_matrix_market(BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(3, 4, &[(2, 1, 5.0), (0, 0, 1.0), (1, 3, -2.5), (0, 1, 3.0)])
            .unwrap()
    }

    #[test]
    fn triplets_come_back_column_major() {
        let m = sample();
        let t: Vec<_> = m.triplets().collect();
        assert_eq!(t, vec![(0, 0, 1.0), (0, 1, 3.0), (2, 1, 5.0), (1, 3, -2.5)]);
        assert_eq!(m.nnz(), 4);
    }

    #[test]
    fn get_answers_stored_and_missing_positions() {
        let m = sample();
        assert_eq!(m.get(2, 1), 5.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(2, 2), 0.0);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.5)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.5);
    }

    #[test]
    fn explicit_zero_stays_an_entry() {
        let m = SparseMatrix::from_triplets(2, 2, &[(1, 0, 0.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.pattern().entries(), vec![(1, 0)]);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let err = SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, SparseError::EntryOutOfRange { row: 2, .. }));
    }

    #[test]
    fn dense_conversion_round_trips_values() {
        let m = sample();
        let d = m.to_dense();
        assert_eq!(d[(2, 1)], 5.0);
        assert_eq!(d[(1, 3)], -2.5);
        assert_eq!(m.max_abs_diff_dense(&d), 0.0);
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = sample();
        let text = m.to_matrix_market_string();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n3 4 4\n"));
        let back = SparseMatrix::read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_market_rejects_pattern_banner() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n";
        let err = SparseMatrix::read_matrix_market(text.as_bytes()).unwrap_err();
        assert!(matches!(err, MatrixMarketError::Parse { line: 1, .. }));
    }

    #[test]
    fn matrix_market_rejects_missing_value() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2\n";
        let err = SparseMatrix::read_matrix_market(text.as_bytes()).unwrap_err();
        assert!(matches!(err, MatrixMarketError::Parse { line: 3, .. }));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        let m = sample();
        m.save(&path).unwrap();
        assert_eq!(SparseMatrix::load(&path).unwrap(), m);
    }

    #[test]
    fn empty_columns_have_empty_ranges() {
        let m = SparseMatrix::from_triplets(3, 3, &[(0, 2, 1.0)]).unwrap();
        assert_eq!(m.column(0).count(), 0);
        assert_eq!(m.column(1).count(), 0);
        assert_eq!(m.column(2).collect::<Vec<_>>(), vec![(0, 1.0)]);
    }
}
