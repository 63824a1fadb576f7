//! The user guide, importable as documentation.
//!
//! Each chapter of the book under `book/` in the repository root is
//! included here verbatim, so every code block in the book compiles and
//! runs as a doc-test. If a chapter drifts from the library, `cargo
//! test` fails; the rendered book and the crate cannot disagree.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection {}

#[doc = include_str!("../../../book/src/hessians.md")]
pub mod hessians {}

#[doc = include_str!("../../../book/src/coloring.md")]
pub mod coloring {}

#[doc = include_str!("../../../book/src/compression.md")]
pub mod compression {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/problems.md")]
pub mod problems {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
