//! Primal-dual interior point solver for linear and convex quadratic programs
//! with non-diagonal primal-dual regularization, together with a dense
//! spectral lab that checks the eigenvalue bounds of the regularized systems
//! and a small benchmark harness.

pub mod bench;
pub mod dense;
pub mod error;
pub mod factor;
pub mod ipm;
pub mod ordering;
pub mod par;
pub mod problem;
pub mod profile;
pub mod regularizer;
pub mod sparse;
pub mod spectral;

pub use error::{Error, FactorizationFailure};
pub use sparse::{ColumnPartition, SparseMatrix, Symmetry};
