//! Runs every code snippet in the guide as a doc-test.
//!
//! mdbook renders `book/` but cannot execute its Rust listings; including
//! each chapter as module documentation here makes `cargo test --doc` do
//! it. One module per chapter keeps a failing snippet traceable to its
//! source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/generating-functions.md")]
pub mod generating_functions {}

#[doc = include_str!("../../../book/src/criteria.md")]
pub mod criteria {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
