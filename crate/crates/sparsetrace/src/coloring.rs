//! Column colorings that make compressed derivative evaluation possible.
//!
//! For Jacobians, two columns may share a seed direction when no row has a
//! nonzero in both; coloring the conflict graph (columns adjacent when they
//! share a row) groups the columns, and one forward product per color
//! recovers every entry directly.
//!
//! For Hessians, symmetry allows a weaker requirement. A *star* coloring is
//! a proper vertex coloring of the adjacency graph where every path on four
//! vertices uses at least three colors. It guarantees each entry `(i, j)`
//! can be read from the compressed product, from row `i` or row `j`,
//! without solving any equations.
//!
//! Both colorings are greedy in natural column order. They are
//! deterministic, and the verifiers in this module check the defining
//! property of each coloring directly, independently of how it was built.

use crate::matrix::Mat;
use crate::pattern::SparsityPattern;
use std::collections::HashMap;
use std::io::{self, Write};
use std::path::Path;

/// An assignment of colors `0..num_colors` to columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    num_colors: usize,
}

impl Coloring {
    /// Wraps an explicit assignment; colors must be exactly `0..k` for some
    /// `k` with every color in range (gaps are fine for imported colorings,
    /// `num_colors` is one past the maximum).
    pub fn from_colors(colors: Vec<usize>) -> Self {
        let num_colors = colors.iter().max().map_or(0, |m| m + 1);
        Coloring { colors, num_colors }
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn num_columns(&self) -> usize {
        self.colors.len()
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn color(&self, column: usize) -> usize {
        self.colors[column]
    }

    /// Columns grouped by color.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_colors];
        for (j, &c) in self.colors.iter().enumerate() {
            groups[c].push(j);
        }
        groups
    }

    /// The 0/1 seed matrix whose column `c` sums the columns colored `c`.
    pub fn seed_matrix(&self) -> Mat<f64> {
        let mut s = Mat::zeros(self.colors.len(), self.num_colors);
        for (j, &c) in self.colors.iter().enumerate() {
            s[(j, c)] = 1.0;
        }
        s
    }

    /// Writes `column,color` lines, both 1-based, with a header.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "column,color")?;
        for (j, &c) in self.colors.iter().enumerate() {
            writeln!(w, "{},{}", j + 1, c + 1)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = io::BufWriter::new(file);
        self.write_csv(&mut w)
    }
}

/// Errors from star coloring and from the verifiers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum ColoringError {
    #[error("expected a square pattern, got {nrows} x {ncols}")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("expected a symmetric pattern; entry ({row}, {col}) has no mirror")]
    NotSymmetric { row: usize, col: usize },
    #[error("coloring covers {got} columns, pattern has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("columns {first} and {second} share row {row} but have the same color")]
    SharedRow {
        row: usize,
        first: usize,
        second: usize,
    },
    #[error("adjacent columns {first} and {second} have the same color")]
    AdjacentSameColor { first: usize, second: usize },
    #[error("path {path:?} uses only two colors")]
    BicoloredPath { path: [usize; 4] },
}

/// Tracks forbidden colors for one vertex at a time without reallocating.
struct ForbiddenColors {
    stamp: Vec<u32>,
    current: u32,
}

impl ForbiddenColors {
    fn new(max_colors: usize) -> Self {
        ForbiddenColors {
            stamp: vec![0; max_colors + 1],
            current: 0,
        }
    }

    fn clear(&mut self) {
        self.current += 1;
    }

    fn forbid(&mut self, color: usize) {
        self.stamp[color] = self.current;
    }

    fn smallest_allowed(&self) -> usize {
        self.stamp
            .iter()
            .position(|&s| s != self.current)
            .expect("a free color always exists among n + 1 slots")
    }
}

/// Greedily colors the columns of `pattern` so that no two columns of the
/// same color have a nonzero in the same row.
pub fn color_jacobian_columns(pattern: &SparsityPattern) -> Coloring {
    let ncols = pattern.ncols();
    let columns = pattern.transpose();
    let mut colors = vec![usize::MAX; ncols];
    let mut forbidden = ForbiddenColors::new(ncols);
    let mut num_colors = 0;
    for j in 0..ncols {
        forbidden.clear();
        for r in columns.row(j) {
            for j2 in pattern.row(r) {
                if colors[j2] != usize::MAX {
                    forbidden.forbid(colors[j2]);
                }
            }
        }
        let c = forbidden.smallest_allowed();
        colors[j] = c;
        num_colors = num_colors.max(c + 1);
    }
    Coloring { colors, num_colors }
}

/// Checks that no two columns with equal color share a row.
pub fn verify_structural_orthogonality(
    pattern: &SparsityPattern,
    coloring: &Coloring,
) -> Result<(), ColoringError> {
    if coloring.num_columns() != pattern.ncols() {
        return Err(ColoringError::WrongLength {
            expected: pattern.ncols(),
            got: coloring.num_columns(),
        });
    }
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..pattern.nrows() {
        seen.clear();
        seen.resize(coloring.num_colors(), usize::MAX);
        for j in pattern.row(i) {
            let c = coloring.color(j);
            if seen[c] != usize::MAX {
                return Err(ColoringError::SharedRow {
                    row: i,
                    first: seen[c],
                    second: j,
                });
            }
            seen[c] = j;
        }
    }
    Ok(())
}

/// Off-diagonal adjacency lists of a square symmetric pattern.
fn symmetric_adjacency(pattern: &SparsityPattern) -> Result<Vec<Vec<usize>>, ColoringError> {
    if !pattern.is_square() {
        return Err(ColoringError::NotSquare {
            nrows: pattern.nrows(),
            ncols: pattern.ncols(),
        });
    }
    for (i, j) in pattern.entries() {
        if !pattern.contains(j, i) {
            return Err(ColoringError::NotSymmetric { row: i, col: j });
        }
    }
    let adj = (0..pattern.nrows())
        .map(|i| pattern.row(i).filter(|&j| j != i).collect())
        .collect();
    Ok(adj)
}

/// Greedily star-colors the adjacency graph of a symmetric pattern.
/// Diagonal entries are ignored; they never constrain the coloring.
///
/// For each vertex `v` in natural order, a color is forbidden when using it
/// would either repeat a neighbor's color or close a two-colored path on
/// four vertices. The path cases reduce to two local rules:
///
/// * `v` as an endpoint: for a colored neighbor `w` and a colored `x`
///   adjacent to `w`, the color of `x` is forbidden when `x` already has
///   two neighbors of `w`'s color (so a path `v w x y` would exist);
/// * `v` as an interior vertex: if two neighbors of `v` share a color, any
///   color seen next to either of them would complete a path through `v`.
///
/// The second-neighbor counts are kept incrementally per vertex and color.
pub fn color_hessian_star(pattern: &SparsityPattern) -> Result<Coloring, ColoringError> {
    let adj = symmetric_adjacency(pattern)?;
    let n = adj.len();
    let mut colors = vec![usize::MAX; n];
    // colored_neighbors[x] maps a color to how many neighbors of x have it.
    let mut colored_neighbors: Vec<HashMap<usize, u32>> = vec![HashMap::new(); n];
    let mut forbidden = ForbiddenColors::new(n);
    let mut num_colors = 0;
    // Scratch for grouping v's colored neighbors by color.
    let mut by_color: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        forbidden.clear();
        by_color.clear();
        for &w in &adj[v] {
            if colors[w] == usize::MAX {
                continue;
            }
            let d = colors[w];
            forbidden.forbid(d);
            by_color.entry(d).or_default().push(w);
            for &x in &adj[w] {
                if x == v || colors[x] == usize::MAX || colors[x] == d {
                    continue;
                }
                if colored_neighbors[x].get(&d).copied().unwrap_or(0) >= 2 {
                    forbidden.forbid(colors[x]);
                }
            }
        }
        for same in by_color.values().filter(|g| g.len() >= 2) {
            for &x in same {
                for &y in &adj[x] {
                    if y != v && colors[y] != usize::MAX {
                        forbidden.forbid(colors[y]);
                    }
                }
            }
        }
        let c = forbidden.smallest_allowed();
        colors[v] = c;
        num_colors = num_colors.max(c + 1);
        for &u in &adj[v] {
            *colored_neighbors[u].entry(c).or_insert(0) += 1;
        }
    }
    Ok(Coloring { colors, num_colors })
}

/// Checks the star property: the coloring is proper and no path on four
/// vertices is two-colored. Paths are enumerated by their middle edge.
pub fn verify_star_coloring(
    pattern: &SparsityPattern,
    coloring: &Coloring,
) -> Result<(), ColoringError> {
    let adj = symmetric_adjacency(pattern)?;
    if coloring.num_columns() != adj.len() {
        return Err(ColoringError::WrongLength {
            expected: adj.len(),
            got: coloring.num_columns(),
        });
    }
    let color = coloring.colors();
    for (x, xs) in adj.iter().enumerate() {
        for &y in xs {
            if x > y {
                continue;
            }
            if color[x] == color[y] {
                return Err(ColoringError::AdjacentSameColor {
                    first: x,
                    second: y,
                });
            }
            // A two-colored path w x y z has color(w) = color(y) and
            // color(z) = color(x); those differ, so w != z comes free.
            for &w in &adj[x] {
                if w == y || color[w] != color[y] {
                    continue;
                }
                for &z in &adj[y] {
                    if z != x && color[z] == color[x] {
                        return Err(ColoringError::BicoloredPath { path: [w, x, y, z] });
                    }
                }
            }
        }
    }
    Ok(())
}
