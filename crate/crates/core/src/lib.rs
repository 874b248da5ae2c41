//! Concomitant group testing.
//!
//! A population of `n` items hides `m >= 2` disjoint nonempty sets. A pooled
//! test is positive iff the pool contains at least one item of every hidden
//! set. This crate provides the metered test oracle, the standard group
//! testing building blocks, deterministic (non-adaptive and adaptive) and
//! randomized recovery schemes, closed-form bounds, and a seeded Monte Carlo
//! harness.
//!
//! Items are 1-indexed throughout (`1..=n`).

pub mod adaptive;
pub mod analysis;
pub mod disjunct;
pub mod error;
pub mod harness;
pub mod instance;
pub mod matrix;
pub mod pool;
pub mod randomized;
pub mod seed;
pub mod session;
pub mod standard_gt;

pub use error::{Error, Result};
pub use instance::{evaluate_test, Instance, ItemSet};
pub use matrix::BitMatrix;
pub use pool::Pool;
pub use session::{compare_up_to_permutation, LedgerEntry, RecoveryResult, Session};
