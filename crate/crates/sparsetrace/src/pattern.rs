//! Sparsity patterns: which entries of a Jacobian or Hessian can be
//! nonzero.
//!
//! A [`SparsityPattern`] is the detector's output and the coloring stage's
//! input. Rows are stored as sorted index lists; the column view is derived
//! on demand. Patterns round-trip through the Matrix Market coordinate
//! `pattern` format for exchange with other tools.

use crate::mmio::{self, Field};
use crate::sets::PatternSet;
use std::io::{BufRead, Write};
use std::path::Path;

pub use crate::mmio::MatrixMarketError;

/// Errors from constructing patterns.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("entry ({row}, {col}) outside a {nrows} x {ncols} pattern")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("expected {expected} rows, got {got}")]
    RowCountMismatch { expected: usize, got: usize },
}

/// The set of structurally nonzero positions of an `nrows x ncols` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<u32>>,
}

impl SparsityPattern {
    /// A pattern with no nonzeros.
    pub fn empty(nrows: usize, ncols: usize) -> Self {
        SparsityPattern {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    /// Builds a pattern from per-row column indices. Rows are sorted and
    /// deduplicated; the outer length must equal `nrows`.
    pub fn from_rows(
        nrows: usize,
        ncols: usize,
        rows: Vec<Vec<usize>>,
    ) -> Result<Self, PatternError> {
        if rows.len() != nrows {
            return Err(PatternError::RowCountMismatch {
                expected: nrows,
                got: rows.len(),
            });
        }
        let mut out = SparsityPattern::empty(nrows, ncols);
        for (i, row) in rows.into_iter().enumerate() {
            for j in row {
                out.insert_checked(i, j)?;
            }
            out.rows[i].sort_unstable();
            out.rows[i].dedup();
        }
        Ok(out)
    }

    /// Builds a pattern from entry coordinates, in any order and with
    /// duplicates tolerated.
    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        entries: &[(usize, usize)],
    ) -> Result<Self, PatternError> {
        let mut out = SparsityPattern::empty(nrows, ncols);
        for &(i, j) in entries {
            out.insert_checked(i, j)?;
        }
        for row in &mut out.rows {
            row.sort_unstable();
            row.dedup();
        }
        Ok(out)
    }

    /// Builds a pattern from one index set per row. Set capacities are not
    /// consulted, so constant rows of capacity 0 are fine.
    pub fn from_sets<S: PatternSet>(ncols: usize, row_sets: &[S]) -> Self {
        SparsityPattern {
            nrows: row_sets.len(),
            ncols,
            rows: row_sets
                .iter()
                .map(|s| s.indices().into_iter().map(|j| j as u32).collect())
                .collect(),
        }
    }

    fn insert_checked(&mut self, row: usize, col: usize) -> Result<(), PatternError> {
        if row >= self.nrows || col >= self.ncols {
            return Err(PatternError::EntryOutOfRange {
                row,
                col,
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        self.rows[row].push(col as u32);
        Ok(())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of structural nonzeros.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Fraction of entries that are structurally zero, in `[0, 1]`.
    pub fn zeros_fraction(&self) -> f64 {
        let total = self.nrows * self.ncols;
        if total == 0 {
            return 1.0;
        }
        1.0 - self.nnz() as f64 / total as f64
    }

    /// Column indices of row `i`, ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|&j| j as usize)
    }

    /// Number of nonzeros in row `i`.
    pub fn row_nnz(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.nrows && self.rows[row].binary_search(&(col as u32)).is_ok()
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for j in self.row(i) {
                out.push((i, j));
            }
        }
        out
    }

    /// The column view: a pattern with rows and columns exchanged.
    pub fn transpose(&self) -> SparsityPattern {
        let mut rows = vec![Vec::new(); self.ncols];
        for i in 0..self.nrows {
            for j in self.row(i) {
                rows[j].push(i as u32);
            }
        }
        // Row-major traversal pushes ascending row indices; already sorted.
        SparsityPattern {
            nrows: self.ncols,
            ncols: self.nrows,
            rows,
        }
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Whether the pattern equals its transpose.
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    /// Writes the pattern in Matrix Market coordinate `pattern` form,
    /// 1-based, entries in row-major order.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate pattern general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j) in self.entries() {
            writeln!(w, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }

    /// The Matrix Market text of this pattern.
    pub fn to_matrix_market_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_matrix_market(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("matrix market text is ascii")
    }

    /// Reads a Matrix Market coordinate `pattern` file. Duplicate entries
    /// are merged.
    pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Self, MatrixMarketError> {
        let mut lines = mmio::DataLines::new(reader);
        let (no, banner) = lines
            .next_raw()?
            .ok_or_else(|| mmio::parse_err(0, "empty file"))?;
        mmio::check_banner(&banner, no, Field::Pattern)?;
        let (no, size) = lines
            .next_data()?
            .ok_or_else(|| mmio::parse_err(no, "missing size line"))?;
        let (nrows, ncols, nnz) = mmio::parse_size(&size, no)?;
        let mut entries = Vec::with_capacity(nnz);
        let mut last = no;
        while let Some((no, line)) = lines.next_data()? {
            last = no;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(mmio::parse_err(
                    no,
                    format!("expected `row col`, found `{line}`"),
                ));
            }
            let i = mmio::parse_coord(parts[0], no, "row", nrows)?;
            let j = mmio::parse_coord(parts[1], no, "column", ncols)?;
            entries.push((i, j));
        }
        if entries.len() != nnz {
            return Err(mmio::parse_err(
                last,
                format!(
                    "size line promised {} entries, found {}",
                    nnz,
                    entries.len()
                ),
            ));
        }
        SparsityPattern::from_entries(nrows, ncols, &entries)
            .map_err(|e| mmio::parse_err(last, e.to_string()))
    }

    /// Writes the pattern to a file.
    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_matrix_market(std::io::BufWriter::new(f))
    }

    /// Reads a pattern from a file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MatrixMarketError> {
        let f = std::fs::File::open(path)?;
        SparsityPattern::read_matrix_market(std::io::BufReader::new(f))
    }
}

/// Formats a percentage with 4 significant digits, e.g. `91.67` or `8.333`.
pub fn percent_4sig(percent: f64) -> String {
    let decimals = if percent >= 99.995 {
        1
    } else if percent >= 10.0 {
        2
    } else {
        3
    };
    format!("{percent:.decimals$}")
}
