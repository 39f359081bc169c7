//! Numerical tolerances, fixed once for the whole crate.
//!
//! All quantities are in natural units with hbar = 1, so the vacuum
//! quadrature variance is 1/2 and every symplectic eigenvalue of a
//! physical covariance matrix is at least 1/2.

/// Absolute tolerance on the worst entry of `S - S^T` when a matrix is
/// required to be symmetric. Double precision with matrices up to ~20x20.
pub const SYM_TOL: f64 = 1e-10;

/// Tolerance on the minimum eigenvalue of `S + (i/2) Omega` when deciding
/// whether a covariance matrix is physical.
pub const PSD_TOL: f64 = 1e-9;

/// Below this, a variance counts as exactly zero (degenerate correlations).
pub const ZERO_TOL: f64 = 1e-12;

/// Vacuum quadrature variance with hbar = 1.
pub const VACUUM_VARIANCE: f64 = 0.5;
