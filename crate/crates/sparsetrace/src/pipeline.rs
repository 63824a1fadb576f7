//! The compressed evaluation pipeline: pattern in, colored seeds out,
//! sparse derivative matrices back.
//!
//! Preparation is the expensive, point-independent half (coloring the
//! pattern and building the seed matrix); it is done once per structure and
//! reused across evaluation points. Evaluation runs one forward product per
//! color and scatters the compressed columns back into a
//! [`SparseMatrix`].
//!
//! Decompression is exact, not approximate. For Jacobians, structural
//! orthogonality means each compressed entry is a sum with at most one
//! structurally nonzero summand. For Hessians, the star property
//! guarantees every off-diagonal entry is readable from at least one of
//! its two symmetric positions, and the diagonal is always readable from
//! its own color.

use crate::ad::{self, AdError};
use crate::coloring::{self, Coloring, ColoringError};
use crate::detect::{self, DetectError, Program};
use crate::matrix::Mat;
use crate::pattern::SparsityPattern;
use crate::sparse::{SparseError, SparseMatrix};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("program takes {program} inputs, pattern has {pattern} columns")]
    InputColumns { program: usize, pattern: usize },
    #[error("program has {program} outputs, pattern has {pattern} rows")]
    OutputRows { program: usize, pattern: usize },
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Ad(#[from] AdError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// A colored Jacobian pattern, ready to evaluate at any point.
#[derive(Debug, Clone)]
pub struct JacobianPrep {
    pattern: SparsityPattern,
    coloring: Coloring,
    seeds: Mat<f64>,
}

impl JacobianPrep {
    /// Colors the pattern's columns and builds the seed matrix.
    pub fn new(pattern: SparsityPattern) -> Self {
        let coloring = coloring::color_jacobian_columns(&pattern);
        let seeds = coloring.seed_matrix();
        JacobianPrep {
            pattern,
            coloring,
            seeds,
        }
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn num_colors(&self) -> usize {
        self.coloring.num_colors()
    }

    /// The seed matrix handed to the forward products, one column per
    /// color.
    pub fn seeds(&self) -> &Mat<f64> {
        &self.seeds
    }

    fn check_shape<P: Program>(&self, p: &P) -> Result<(), PipelineError> {
        if p.input_len() != self.pattern.ncols() {
            return Err(PipelineError::InputColumns {
                program: p.input_len(),
                pattern: self.pattern.ncols(),
            });
        }
        if p.output_len() != self.pattern.nrows() {
            return Err(PipelineError::OutputRows {
                program: p.output_len(),
                pattern: self.pattern.nrows(),
            });
        }
        Ok(())
    }

    /// The compressed product `J(x) S`, one column per color.
    pub fn compressed<P: Program>(&self, p: &P, x: &[f64]) -> Result<Mat<f64>, PipelineError> {
        self.check_shape(p)?;
        Ok(ad::jvp_batch(p, x, &self.seeds)?)
    }

    /// Scatters a compressed product back into the sparse Jacobian.
    pub fn decompress(&self, compressed: &Mat<f64>) -> Result<SparseMatrix, PipelineError> {
        let triplets: Vec<(usize, usize, f64)> = self
            .pattern
            .entries()
            .into_iter()
            .map(|(i, j)| (i, j, compressed[(i, self.coloring.color(j))]))
            .collect();
        Ok(SparseMatrix::from_triplets(
            self.pattern.nrows(),
            self.pattern.ncols(),
            &triplets,
        )?)
    }

    /// The sparse Jacobian at `x`: `num_colors` forward products plus a
    /// scatter.
    pub fn evaluate<P: Program>(&self, p: &P, x: &[f64]) -> Result<SparseMatrix, PipelineError> {
        let compressed = self.compressed(p, x)?;
        self.decompress(&compressed)
    }
}

/// A star-colored Hessian pattern, ready to evaluate at any point.
///
/// Each off-diagonal entry is routed at preparation time: read from its own
/// row when it is the only entry of its color there, otherwise from the
/// mirrored row, which the star property guarantees is conflict-free.
#[derive(Debug, Clone)]
pub struct HessianPrep {
    pattern: SparsityPattern,
    coloring: Coloring,
    seeds: Mat<f64>,
    /// Upper-triangle routes `(i, j, from_own_row)` with `i < j`.
    routes: Vec<(usize, usize, bool)>,
}

impl HessianPrep {
    /// Star-colors the pattern and routes every entry. Fails when the
    /// pattern is not square and symmetric.
    pub fn new(pattern: SparsityPattern) -> Result<Self, PipelineError> {
        let coloring = coloring::color_hessian_star(&pattern)?;
        let seeds = coloring.seed_matrix();
        let mut routes = Vec::new();
        for (i, j) in pattern.entries() {
            if i >= j {
                continue;
            }
            if Self::unique_in_row(&pattern, &coloring, i, j) {
                routes.push((i, j, true));
            } else {
                debug_assert!(
                    Self::unique_in_row(&pattern, &coloring, j, i),
                    "star coloring leaves every entry readable from one side"
                );
                routes.push((i, j, false));
            }
        }
        Ok(HessianPrep {
            pattern,
            coloring,
            seeds,
            routes,
        })
    }

    /// Whether `col` is the only entry of its color in `row` (so
    /// `compressed[row, color(col)]` is exactly the `(row, col)` entry).
    fn unique_in_row(
        pattern: &SparsityPattern,
        coloring: &Coloring,
        row: usize,
        col: usize,
    ) -> bool {
        let c = coloring.color(col);
        pattern.row(row).all(|j| j == col || coloring.color(j) != c)
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn num_colors(&self) -> usize {
        self.coloring.num_colors()
    }

    pub fn seeds(&self) -> &Mat<f64> {
        &self.seeds
    }

    fn check_shape<P: Program>(&self, p: &P) -> Result<(), PipelineError> {
        if p.input_len() != self.pattern.ncols() {
            return Err(PipelineError::InputColumns {
                program: p.input_len(),
                pattern: self.pattern.ncols(),
            });
        }
        Ok(())
    }

    /// The compressed product `H(x) S`, one column per color.
    pub fn compressed<P: Program>(&self, p: &P, x: &[f64]) -> Result<Mat<f64>, PipelineError> {
        self.check_shape(p)?;
        Ok(ad::hvp_batch(p, x, &self.seeds)?)
    }

    /// Scatters a compressed product back into the sparse Hessian, filling
    /// both triangles.
    pub fn decompress(&self, compressed: &Mat<f64>) -> Result<SparseMatrix, PipelineError> {
        let n = self.pattern.nrows();
        let mut triplets = Vec::with_capacity(self.pattern.nnz());
        for i in 0..n {
            if self.pattern.contains(i, i) {
                triplets.push((i, i, compressed[(i, self.coloring.color(i))]));
            }
        }
        for &(i, j, from_own_row) in &self.routes {
            let v = if from_own_row {
                compressed[(i, self.coloring.color(j))]
            } else {
                compressed[(j, self.coloring.color(i))]
            };
            triplets.push((i, j, v));
            triplets.push((j, i, v));
        }
        Ok(SparseMatrix::from_triplets(n, n, &triplets)?)
    }

    /// The sparse Hessian at `x`: `num_colors` Hessian-vector products plus
    /// a scatter.
    pub fn evaluate<P: Program>(&self, p: &P, x: &[f64]) -> Result<SparseMatrix, PipelineError> {
        let compressed = self.compressed(p, x)?;
        self.decompress(&compressed)
    }
}

/// Detects the global Jacobian pattern, prepares it, and evaluates at `x`.
pub fn sparse_jacobian<P: Program>(
    p: &P,
    x: &[f64],
) -> Result<(SparseMatrix, JacobianPrep), PipelineError> {
    let pattern = detect::jacobian_pattern_global(p)?;
    let prep = JacobianPrep::new(pattern);
    let m = prep.evaluate(p, x)?;
    Ok((m, prep))
}

/// Detects the global Hessian pattern, prepares it, and evaluates at `x`.
pub fn sparse_hessian<P: Program>(
    p: &P,
    x: &[f64],
) -> Result<(SparseMatrix, HessianPrep), PipelineError> {
    let pattern = detect::hessian_pattern_global(p)?;
    let prep = HessianPrep::new(pattern)?;
    let m = prep.evaluate(p, x)?;
    Ok((m, prep))
}
