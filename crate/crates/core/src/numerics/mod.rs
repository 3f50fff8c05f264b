//! Dense complex linear algebra kernels: the matrix type, factorizations,
//! and the matrix exponential. Everything is f64-complex and allocation
//! based; no global state.

mod eig;
mod expm;
mod matrix;
mod qr;
mod svd;

pub use eig::{default_herm_tol, herm_eig, psd_sqrt, HermEig};
pub use expm::expm;
pub use matrix::{commutator, diff_norm, Complex64, ComplexMatrix, ONE, ZERO};
pub use qr::{inverse, lstsq, orthonormal_range, qr_pivoted, rank_of, solve, PivotedQr};
pub use svd::{min_singular, null_space, op_norm, svd, Svd};

/// Default tolerances; operations take explicit tolerance arguments and these
/// are the documented defaults.
pub mod tol {
    /// Default absolute tolerance on unit-normalized operators.
    pub const DEFAULT: f64 = 1e-9;
    /// Slack allowed on contraction norms before rejection.
    pub const CONTRACTION_SLACK: f64 = 1e-8;
    /// Relative threshold below which a singular value counts as zero.
    pub const RANK_REL: f64 = 1e-8;
    /// Negative-eigenvalue clip threshold for PSD square roots.
    pub const PSD_CLIP: f64 = 1e-10;
}
