//! Dense complex Hermitian and PSD matrix primitives.

mod hermitian;
pub(crate) mod jacobi;
mod matrix;
mod psd;
pub mod random;

pub use hermitian::{eigh, eigh_with, re_part, HermitianMatrix, Spectrum};
pub use jacobi::EighOptions;
pub use matrix::MatrixC;
pub use psd::{
    eigenvalues, psd_power, psd_power_with, singular_values, singular_values_with, PsdMatrix,
    SingularValues, PSD_CLAMP_TOL,
};
pub use random::{random_psd, SpectrumSpec};
