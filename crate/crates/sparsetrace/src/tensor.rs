//! Array-level shortcuts for tracing through tensor operations.
//!
//! Tracing a matrix product elementwise performs a set union per scalar
//! multiply and add: `n * m * (2p - 1)` unions for an `(n, p) x (p, m)`
//! product. But the resulting sets are highly redundant: every entry of
//! row `i` of the product depends on all of row `i` of the left factor and
//! all of the corresponding column of the right factor. Precomputing one
//! union per row and per column and combining them per entry yields the
//! *same* pattern with `(n + m) * (p - 1) + n * m` unions.
//!
//! The shortcut is first-order only. Second-order pair sets do not factor
//! this way, so matrices of Hessian tracers go through
//! [`conservative_collapse_hessian`] or plain elementwise arithmetic
//! instead.

use crate::matrix::Mat;
use crate::sets::{PairSet, PatternSet, SetError};
use crate::tracer::{GradientTracer, HessianTracer, Tracer};

fn union_all<S: PatternSet>(tracers: impl Iterator<Item = GradientTracer<S>>) -> GradientTracer<S> {
    tracers.fold(GradientTracer::constant(), |acc, t| acc.union_tracer(&t))
}

/// The dependency pattern of a matrix product, computed with row and
/// column unions instead of elementwise multiply-accumulate. The result
/// equals the elementwise pattern entry for entry.
pub fn tracer_matmul<S: PatternSet>(
    a: &Mat<GradientTracer<S>>,
    b: &Mat<GradientTracer<S>>,
) -> Mat<GradientTracer<S>> {
    assert_eq!(
        a.ncols(),
        b.nrows(),
        "inner dimensions must agree: {}x{} times {}x{}",
        a.nrows(),
        a.ncols(),
        b.nrows(),
        b.ncols()
    );
    let row_u: Vec<GradientTracer<S>> = (0..a.nrows())
        .map(|i| union_all(a.row(i).iter().cloned()))
        .collect();
    let col_u: Vec<GradientTracer<S>> = (0..b.ncols())
        .map(|j| union_all((0..b.nrows()).map(|k| b[(k, j)].clone())))
        .collect();
    Mat::from_fn(a.nrows(), b.ncols(), |i, j| {
        row_u[i].union_tracer(&col_u[j])
    })
}

/// The same product traced scalar by scalar; the baseline the shortcut is
/// measured against.
pub fn tracer_matmul_elementwise<S: PatternSet>(
    a: &Mat<GradientTracer<S>>,
    b: &Mat<GradientTracer<S>>,
) -> Mat<GradientTracer<S>> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    Mat::from_fn(a.nrows(), b.ncols(), |i, j| {
        let mut acc: Option<GradientTracer<S>> = None;
        for k in 0..a.ncols() {
            let term = a[(i, k)].clone() * b[(k, j)].clone();
            acc = Some(match acc {
                None => term,
                Some(acc) => acc + term,
            });
        }
        acc.expect("inner dimension is nonzero")
    })
}

/// Unions every entry into a single tracer: the sound fallback for an
/// operation with no dedicated rule, treating every output as possibly
/// depending on every input that reaches the operation.
pub fn conservative_collapse<S: PatternSet>(entries: &[GradientTracer<S>]) -> GradientTracer<S> {
    union_all(entries.iter().cloned())
}

/// The second-order fallback: the collapsed gradient is the union of all
/// gradients, and the pair set is that union crossed with itself. Any pair
/// set reachable by further tracing is contained in the cross, because a
/// tracer's pairs only ever relate indices present in its gradient.
pub fn conservative_collapse_hessian<S: PatternSet>(
    entries: &[HessianTracer<S>],
) -> Result<HessianTracer<S>, SetError> {
    let mut grad: Option<S> = None;
    for t in entries {
        if t.capacity() == 0 {
            continue;
        }
        grad = Some(match grad {
            None => t.gradient().clone(),
            Some(g) => g.union(t.gradient())?,
        });
    }
    match grad {
        None => Ok(HessianTracer::constant()),
        Some(g) => {
            let pairs = PairSet::product(&g, &g)?;
            HessianTracer::from_sets(g, pairs)
        }
    }
}
