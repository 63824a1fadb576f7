//! Shared scaffolding for the Matrix Market coordinate format.

use std::io::BufRead;

/// The value field of a coordinate file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Field {
    Pattern,
    Real,
}

impl Field {
    pub(crate) fn keyword(self) -> &'static str {
        match self {
            Field::Pattern => "pattern",
            Field::Real => "real",
        }
    }
}

/// Errors from reading or writing Matrix Market files.
#[derive(Debug, thiserror::Error)]
pub enum MatrixMarketError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("matrix market line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> MatrixMarketError {
    MatrixMarketError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Checks the banner line `%%MatrixMarket matrix coordinate <field> general`.
pub(crate) fn check_banner(
    line: &str,
    lineno: usize,
    want: Field,
) -> Result<(), MatrixMarketError> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    let expected = [
        "%%matrixmarket",
        "matrix",
        "coordinate",
        want.keyword(),
        "general",
    ];
    if tokens.len() != expected.len() || !tokens.iter().zip(expected).all(|(t, e)| t == e) {
        return Err(parse_err(
            lineno,
            format!(
                "expected banner `%%MatrixMarket matrix coordinate {} general`, found `{}`",
                want.keyword(),
                line.trim()
            ),
        ));
    }
    Ok(())
}

/// Reads lines, dropping `%` comments (after the banner) and blank lines.
/// Yields `(line_number, content)` pairs.
pub(crate) struct DataLines<R: BufRead> {
    reader: R,
    lineno: usize,
}

impl<R: BufRead> DataLines<R> {
    pub(crate) fn new(reader: R) -> Self {
        DataLines { reader, lineno: 0 }
    }

    /// The next raw line, including the banner; `None` at end of input.
    pub(crate) fn next_raw(&mut self) -> Result<Option<(usize, String)>, MatrixMarketError> {
        let mut buf = String::new();
        if self.reader.read_line(&mut buf)? == 0 {
            return Ok(None);
        }
        self.lineno += 1;
        Ok(Some((self.lineno, buf)))
    }

    /// The next line that holds data (not blank, not a comment).
    pub(crate) fn next_data(&mut self) -> Result<Option<(usize, String)>, MatrixMarketError> {
        loop {
            match self.next_raw()? {
                None => return Ok(None),
                Some((no, line)) => {
                    let t = line.trim();
                    if !t.is_empty() && !t.starts_with('%') {
                        return Ok(Some((no, t.to_string())));
                    }
                }
            }
        }
    }
}

/// Parses the `rows cols nnz` size line.
pub(crate) fn parse_size(
    line: &str,
    lineno: usize,
) -> Result<(usize, usize, usize), MatrixMarketError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(parse_err(
            lineno,
            format!("expected `rows cols nnz`, found `{line}`"),
        ));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(lineno, format!("invalid size `{s}`")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

/// Parses a 1-based coordinate, checking the range `1..=bound`.
pub(crate) fn parse_coord(
    s: &str,
    lineno: usize,
    what: &str,
    bound: usize,
) -> Result<usize, MatrixMarketError> {
    let v: usize = s
        .parse()
        .map_err(|_| parse_err(lineno, format!("invalid {what} index `{s}`")))?;
    if v == 0 || v > bound {
        return Err(parse_err(
            lineno,
            format!("{what} index {v} outside 1..={bound}"),
        ));
    }
    Ok(v - 1)
}
