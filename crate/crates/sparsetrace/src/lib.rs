//! Sparsity detection and compressed derivative evaluation for numeric
//! programs.
//!
//! The crate answers two questions about a program `f: R^n -> R^m` written
//! against its generic [`Scalar`](scalar::Scalar) interface:
//!
//! 1. *Which* entries of the Jacobian (or Hessian) can be nonzero? Running
//!    the program on tracer numbers that carry index sets instead of values
//!    yields a [`SparsityPattern`](pattern::SparsityPattern) without any
//!    symbolic analysis of the source.
//! 2. *What are* those entries? Coloring the pattern groups structurally
//!    orthogonal columns, and a handful of forward-mode derivative products
//!    then fill in every nonzero at a fraction of the dense cost.
//!
//! See the [`guide`] module for a walk-through, or start with
//! [`detect::jacobian_pattern_global`] and [`pipeline::sparse_jacobian`].

pub mod ad;
pub mod coloring;
pub mod detect;
pub mod dual;
pub mod fd;
pub mod guide;
pub mod matrix;
mod mmio;
pub mod ops;
pub mod pattern;
pub mod pipeline;
pub mod problems;
pub mod scalar;
pub mod sets;
pub mod sparse;
pub mod tensor;
pub mod tracer;

// Compiles the workspace README's example as a doc-test.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
