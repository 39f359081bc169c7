//! Seeded random physical states.
//!
//! Any covariance matrix can be written `S diag(nu_k, nu_k) S^T` with `S`
//! symplectic, so sampling `S = exp(Omega G)` for a random symmetric `G`
//! and symplectic eigenvalues `nu_k >= 1/2` generates physical states by
//! construction.

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::ordering::{omega, Ordering};
use crate::state::MomentState;
use crate::system::{Label, ParticleSystem};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random physical state for `frame`, with symplectic
/// eigenvalues drawn uniformly from `nu_range` (inclusive).
pub fn random_state(
    system: &ParticleSystem,
    frame: &Label,
    seed: u64,
    nu_range: (f64, f64),
) -> Result<MomentState> {
    let (lo, hi) = nu_range;
    if !(lo >= 0.5 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidNuRange { lo, hi });
    }
    let n = system.described(frame)?.len();
    let d = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut g = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = rng.gen_range(-1.0..1.0);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let s = expm(&(omega(n, Ordering::Blocked) * g));

    let mut nus = Vec::with_capacity(n);
    for _ in 0..n {
        nus.push(if hi > lo { rng.gen_range(lo..=hi) } else { lo });
    }
    let mut diag = DVector::zeros(d);
    for (k, nu) in nus.iter().enumerate() {
        diag[k] = *nu;
        diag[n + k] = *nu;
    }
    let cov = &s * DMatrix::from_diagonal(&diag) * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;

    let mean = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    MomentState::new(system.clone(), frame.clone(), mean, cov, Ordering::Blocked)
}
