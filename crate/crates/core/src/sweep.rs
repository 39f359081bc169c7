//! Batch sweeps over seeded random states.
//!
//! These are the Monte Carlo inner loops of the verification suite; each
//! state is independent, so they parallelize trivially and reduce with
//! order-insensitive max operations.

use crate::error::Result;
use crate::frame::switch_frame;
use crate::parallel::{map_collect, Parallelism};
use crate::random::random_state;
use crate::state::MomentState;
use crate::system::ParticleSystem;

/// Deterministic sweep state: the i-th sample for the given base seed.
pub fn sweep_state(
    base_seed: u64,
    index: usize,
    particle_counts: &[usize],
    nu_range: (f64, f64),
) -> Result<MomentState> {
    let n = particle_counts[index % particle_counts.len()];
    let system = ParticleSystem::unit_masses(n)?;
    let frame = system.labels()[index % n].clone();
    random_state(&system, &frame, base_seed.wrapping_add(index as u64), nu_range)
}

/// Worst relative deviation, over `samples` random states and all frame
/// pairs, of the full, position-only and momentum-only covariance
/// determinants between the original and the switched state.
pub fn determinant_invariance_max_deviation(
    base_seed: u64,
    samples: usize,
    particle_counts: &[usize],
    nu_range: (f64, f64),
    mode: Parallelism,
) -> Result<f64> {
    let devs = map_collect(samples, mode, |i| -> Result<f64> {
        let state = sweep_state(base_seed, i, particle_counts, nu_range)?;
        let reference = [
            state.det_full(),
            state.det_position(),
            state.det_momentum(),
        ];
        let mut worst: f64 = 0.0;
        for to in state.system().labels().to_vec() {
            if &to == state.frame() {
                continue;
            }
            let switched = switch_frame(&state, &to)?;
            let dets = [
                switched.det_full(),
                switched.det_position(),
                switched.det_momentum(),
            ];
            for (d, r) in dets.iter().zip(reference.iter()) {
                worst = worst.max((d - r).abs() / r.abs().max(1.0));
            }
        }
        Ok(worst)
    });
    let mut max: f64 = 0.0;
    for d in devs {
        max = max.max(d?);
    }
    Ok(max)
}
