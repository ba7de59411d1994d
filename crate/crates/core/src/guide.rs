//! The book, compiled: each chapter of the mdbook under `book/` is included
//! here verbatim, so `cargo test --doc` builds and runs every code snippet
//! the book shows. If a snippet drifts from the library, the doc-tests fail
//! and the book cannot go stale.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/mallows-model.md")]
pub mod mallows_model {}

#[doc = include_str!("../../../book/src/threshold-strategies.md")]
pub mod threshold_strategies {}

#[doc = include_str!("../../../book/src/exact-oracle.md")]
pub mod exact_oracle {}

#[doc = include_str!("../../../book/src/dynamic-program.md")]
pub mod dynamic_program {}

#[doc = include_str!("../../../book/src/closed-forms.md")]
pub mod closed_forms {}

#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}

#[doc = include_str!("../../../book/src/expectations.md")]
pub mod expectations {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
