//! Compiles the book chapters so their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/exact.md")]
pub mod exact {}
#[doc = include_str!("../../../book/src/algebroids.md")]
pub mod algebroids {}
#[doc = include_str!("../../../book/src/pairs.md")]
pub mod pairs {}
#[doc = include_str!("../../../book/src/curved.md")]
pub mod curved {}
#[doc = include_str!("../../../book/src/deformations.md")]
pub mod deformations {}
#[doc = include_str!("../../../book/src/tot.md")]
pub mod tot {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
