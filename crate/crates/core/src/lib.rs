//! Multiparticle Gaussian states relative to quantum reference frames.
//!
//! A perspective is a particle chosen as the origin; the remaining
//! particles are described by first and second moments of their canonical
//! observables. This crate provides:
//!
//! * exact integer maps between perspectives and per-moment prediction
//!   formulas that cross-validate them ([`frame`]),
//! * uncertainty, triangle, momentum, purity and entanglement diagnostics
//!   with their frame-invariance checks ([`diagnostics`]),
//! * symplectic time evolution under quadratic Hamiltonians together with
//!   closed-form free-evolution moments ([`dynamics`]),
//! * an independent wavefunction-grid oracle that re-derives every moment
//!   by quadrature and finite differencing ([`oracle`]).
//!
//! Units are natural: hbar = 1, vacuum quadrature variance 1/2.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
mod expm;
pub mod frame;
pub mod oracle;
pub mod ordering;
pub mod parallel;
pub mod query;
pub mod random;
pub mod state;
pub mod sweep;
pub mod system;
pub mod tol;

// Re-exported so downstream crates build matrices with the same version.
pub use nalgebra;

pub use error::{Error, Result};
pub use frame::{frame_map, switch_frame, FrameChangeMap};
pub use ordering::{symplectic_form, Ordering, SymplecticForm};
pub use parallel::Parallelism;
pub use query::{LinearCombination, MomentQuery, Observable};
pub use random::random_state;
pub use state::{MomentState, Physicality};
pub use system::{Label, ParticleSystem};
