//! Forward-mode derivative drivers: Jacobian-vector and Hessian-vector
//! products, batched over seed matrices, plus dense fallbacks.
//!
//! Everything here evaluates the program itself, so the results are exact
//! to floating point, not finite-difference approximations. A thread-local
//! counter tallies how many directional products have been requested;
//! the compressed pipeline uses it to demonstrate that a colored pattern
//! really does cut the number of products from the input dimension down to
//! the number of colors.

use crate::detect::Program;
use crate::dual::{Dual, SecondOrderDual};
use crate::matrix::Mat;
use std::cell::Cell;

/// Default number of seed columns evaluated per pass. Wider chunks mean
/// fewer sweeps over the program but more memory per scalar.
pub const DEFAULT_CHUNK: usize = 16;

thread_local! {
    static FORWARD_PRODUCTS: Cell<usize> = const { Cell::new(0) };
}

/// Directional products requested on this thread since the last reset. A
/// Jacobian-vector product counts one per seed column; a Hessian-vector
/// product likewise. Internal chunking does not affect the tally.
pub fn forward_product_count() -> usize {
    FORWARD_PRODUCTS.with(|c| c.get())
}

pub fn reset_forward_product_count() {
    FORWARD_PRODUCTS.with(|c| c.set(0));
}

fn count_products(k: usize) {
    FORWARD_PRODUCTS.with(|c| c.set(c.get() + k));
}

/// Errors from the derivative drivers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum AdError {
    #[error("program takes {expected} inputs, point has {got}")]
    InputLength { expected: usize, got: usize },
    #[error("seed matrix has {got} rows, program takes {expected} inputs")]
    SeedRows { expected: usize, got: usize },
    #[error("second-order drivers need a scalar-valued program, this one has {outputs} outputs")]
    NotScalarValued { outputs: usize },
}

fn check_point(n: usize, x: &[f64]) -> Result<(), AdError> {
    if x.len() != n {
        return Err(AdError::InputLength {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

fn check_seeds(n: usize, seeds: &Mat<f64>) -> Result<(), AdError> {
    if seeds.nrows() != n {
        return Err(AdError::SeedRows {
            expected: n,
            got: seeds.nrows(),
        });
    }
    Ok(())
}

fn check_scalar_valued<P: Program>(p: &P) -> Result<(), AdError> {
    if p.output_len() != 1 {
        return Err(AdError::NotScalarValued {
            outputs: p.output_len(),
        });
    }
    Ok(())
}

/// One Jacobian-vector product `J(x) v`.
pub fn jvp<P: Program>(p: &P, x: &[f64], v: &[f64]) -> Result<Vec<f64>, AdError> {
    let n = p.input_len();
    check_point(n, x)?;
    if v.len() != n {
        return Err(AdError::SeedRows {
            expected: n,
            got: v.len(),
        });
    }
    let seeds = Mat::from_fn(n, 1, |i, _| v[i]);
    let out = jvp_batch(p, x, &seeds)?;
    Ok((0..p.output_len()).map(|r| out[(r, 0)]).collect())
}

/// The product `J(x) S` for an `n x k` seed matrix `S`, evaluated
/// [`DEFAULT_CHUNK`] columns at a time.
pub fn jvp_batch<P: Program>(p: &P, x: &[f64], seeds: &Mat<f64>) -> Result<Mat<f64>, AdError> {
    jvp_batch_chunked(p, x, seeds, DEFAULT_CHUNK)
}

/// [`jvp_batch`] with an explicit chunk width.
pub fn jvp_batch_chunked<P: Program>(
    p: &P,
    x: &[f64],
    seeds: &Mat<f64>,
    chunk: usize,
) -> Result<Mat<f64>, AdError> {
    let (n, m) = (p.input_len(), p.output_len());
    check_point(n, x)?;
    check_seeds(n, seeds)?;
    let chunk = chunk.max(1);
    let k = seeds.ncols();
    let mut out = Mat::zeros(m, k);
    let mut col = 0;
    while col < k {
        let w = chunk.min(k - col);
        let inputs: Vec<Dual> = (0..n)
            .map(|i| Dual::with_partials(x[i], (0..w).map(|t| seeds[(i, col + t)]).collect()))
            .collect();
        let mut y = vec![Dual::constant(0.0); m];
        p.eval(&inputs, &mut y);
        for (r, yr) in y.iter().enumerate() {
            for t in 0..w {
                out[(r, col + t)] = yr.partial(t);
            }
        }
        count_products(w);
        col += w;
    }
    Ok(out)
}

/// The full `m x n` Jacobian, one product per input dimension.
pub fn dense_jacobian<P: Program>(p: &P, x: &[f64]) -> Result<Mat<f64>, AdError> {
    let n = p.input_len();
    jvp_batch(p, x, &Mat::identity(n))
}

/// The gradient of a scalar-valued program.
pub fn gradient<P: Program>(p: &P, x: &[f64]) -> Result<Vec<f64>, AdError> {
    check_scalar_valued(p)?;
    let j = dense_jacobian(p, x)?;
    Ok(j.row(0).to_vec())
}

/// One Hessian-vector product `H(x) v` for a scalar-valued program.
pub fn hvp<P: Program>(p: &P, x: &[f64], v: &[f64]) -> Result<Vec<f64>, AdError> {
    let n = p.input_len();
    check_point(n, x)?;
    if v.len() != n {
        return Err(AdError::SeedRows {
            expected: n,
            got: v.len(),
        });
    }
    let seeds = Mat::from_fn(n, 1, |i, _| v[i]);
    let out = hvp_batch(p, x, &seeds)?;
    Ok((0..n).map(|r| out[(r, 0)]).collect())
}

/// The product `H(x) S` for an `n x k` seed matrix `S`.
///
/// Rows of the result are recovered in blocks: each pass seeds a block of
/// unit directions alongside all `k` seed columns and reads the block-row
/// slice of `H S` out of the cross terms of the second-order block. The
/// tally still counts `k` products, one per seed column; the block width
/// only trades memory against the number of passes.
pub fn hvp_batch<P: Program>(p: &P, x: &[f64], seeds: &Mat<f64>) -> Result<Mat<f64>, AdError> {
    hvp_batch_blocked(p, x, seeds, DEFAULT_CHUNK)
}

/// [`hvp_batch`] with an explicit row-block width.
pub fn hvp_batch_blocked<P: Program>(
    p: &P,
    x: &[f64],
    seeds: &Mat<f64>,
    block: usize,
) -> Result<Mat<f64>, AdError> {
    let n = p.input_len();
    check_scalar_valued(p)?;
    check_point(n, x)?;
    check_seeds(n, seeds)?;
    let block = block.max(1);
    let k = seeds.ncols();
    let mut out = Mat::zeros(n, k);
    let mut r0 = 0;
    while r0 < n {
        let b = block.min(n - r0);
        let w = b + k;
        let inputs: Vec<SecondOrderDual> = (0..n)
            .map(|i| {
                let mut first = vec![0.0; w];
                if (r0..r0 + b).contains(&i) {
                    first[i - r0] = 1.0;
                }
                for t in 0..k {
                    first[b + t] = seeds[(i, t)];
                }
                SecondOrderDual::with_first(x[i], first)
            })
            .collect();
        let mut y = vec![SecondOrderDual::constant(0.0)];
        p.eval(&inputs, &mut y);
        let y = y.pop().expect("buffer of length one");
        if !y.first().is_empty() {
            for j in 0..b {
                for t in 0..k {
                    out[(r0 + j, t)] = y.second()[(j, b + t)];
                }
            }
        }
        r0 += b;
    }
    count_products(k);
    Ok(out)
}

/// The full `n x n` Hessian of a scalar-valued program, in one pass seeded
/// with every unit direction.
pub fn dense_hessian<P: Program>(p: &P, x: &[f64]) -> Result<Mat<f64>, AdError> {
    let n = p.input_len();
    check_scalar_valued(p)?;
    check_point(n, x)?;
    let inputs: Vec<SecondOrderDual> = (0..n)
        .map(|i| SecondOrderDual::seeded(x[i], i, n))
        .collect();
    let mut y = vec![SecondOrderDual::constant(0.0)];
    p.eval(&inputs, &mut y);
    let y = y.pop().expect("buffer of length one");
    count_products(n);
    if y.first().is_empty() {
        return Ok(Mat::zeros(n, n));
    }
    Ok(y.second().clone())
}
