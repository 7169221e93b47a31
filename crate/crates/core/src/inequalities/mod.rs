//! One verifier per inequality, each returning per-index margins
//! `rhs_j − lhs_j` under the policy `pass ⇔ min margin ≥ −1e-9·max(1, max rhs)`.
//!
//! Any negative margin (even inside the tolerance band) triggers one re-run
//! with the tight Jacobi threshold before the record is returned.

mod checks;
mod monotonicity;
mod record;

pub use checks::{
    ag_mean_check, bhatia_kittaneh_check, corollary2_check, drury_check, mean_comparison_check,
    mean_matrix, proposition4_check, zhan_is_proven, zhan_norm_all_orders, zhan_norm_check,
    zhan_norm_explore, zhan_norm_is_proven, zhan_singular_value_check,
};
pub use monotonicity::{
    difference_squared, monotonicity_trace, DerivativeSample, MonotonicityTrace,
    MonotonicityViolation, MonotonicityViolationKind, DERIVATIVE_AGREEMENT_TOL,
    DERIVATIVE_SIGN_TOL,
};
pub(crate) use record::check_t;
pub use record::{CheckKind, InequalityCase, VerificationRecord, TOL_FACTOR};
