//! Clearing vectors for financial networks with debt and equity cross-holdings.
//!
//! Given firms with exogenous assets `a`, nominal liabilities `d` and
//! ownership matrices `Md` (debt) and `Ms` (equity), the crate computes the
//! unique clearing state `(r*, s*)` with iterative and finite algorithms,
//! checks them against a brute-force oracle, and runs the error-rate and
//! runtime studies that compare them.

pub mod experiments;
pub mod generators;
pub mod linalg;
pub mod model;
pub mod solvers;

pub use linalg::{solve_linear, LinalgError, SquareMatrix, Vector};
pub use model::{Bounds, ClearingState, DefaultSet, FinancialSystem, ModelError, SystemDocument};
