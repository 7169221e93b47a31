//! Numerical verification toolkit for singular value inequalities of matrix
//! means.
//!
//! The crate is organised in four layers:
//!
//! * [`linalg`]: dense complex Hermitian / PSD primitives (Jacobi
//!   eigensolver, singular values, fractional powers, random generation).
//! * [`pencil`]: eigenvalue curves of a Hermitian pencil `M(t) = M0 + t M1`,
//!   with branch tracking, degeneracy detection and derivative formulas.
//! * [`inequalities`]: one verifier per inequality, returning per-index
//!   margins under a uniform tolerance policy.
//! * [`explorer`]: reproducible randomized campaigns, counterexample
//!   shrinking and report aggregation.

pub mod error;
pub mod explorer;
pub mod inequalities;
pub mod linalg;
pub mod pencil;

pub use error::{Error, Result};
pub use linalg::{HermitianMatrix, MatrixC, PsdMatrix, SingularValues, Spectrum};
