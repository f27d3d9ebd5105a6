//! Cheeger deformations of `G`-invariant metrics, their extension to fiber
//! bundles with compact structure group, and Ricci positivity certificates.
//!
//! Every quantity is evaluated at a single point from Lie-algebra data and a
//! curvature oracle. Curvature bounds that drop non-negative residuals are
//! lower bounds; a negative bound never asserts negative curvature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod certify;
pub mod cli;
pub mod cheeger;
pub mod error;
pub mod lie;
pub mod linalg;
pub mod oracle;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};

/// Default tolerances.
pub mod tol {
    /// Algebraic identity checks.
    pub const IDENTITY: f64 = 1e-10;
    /// Curvature comparisons.
    pub const CURVATURE: f64 = 1e-8;
}
