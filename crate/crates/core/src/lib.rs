//! Numerical laboratory for nonsingular actions of partially ordered
//! abelian semigroups embedded in `N^d`.

pub mod action;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fixed;
pub mod metric;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod semigroup;
pub mod selftest;
pub mod sensitivity;
pub mod subsemigroup;

pub use error::{Error, Result};
