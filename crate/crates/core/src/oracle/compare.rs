//! End-to-end comparison of the grid oracle against the moment pipeline.

use super::{
    gaussian_wavefunction_with, grid_moments_with, substitute_frame_with, substitution_policy,
    GaussianWavefunctionSpec, GridPolicy,
};
use crate::error::Result;
use crate::frame::switch_frame;
use crate::parallel::Parallelism;
use crate::state::MomentState;
use crate::system::Label;

/// Worst moment deviation between the two routes into one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDeviation {
    pub frame: Label,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub tol: f64,
    pub frames: Vec<FrameDeviation>,
    pub pass: bool,
}

fn max_moment_deviation(a: &MomentState, b: &MomentState) -> f64 {
    let mean_dev = (a.mean() - b.mean())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let cov_dev = (a.cov() - b.cov())
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    mean_dev.max(cov_dev)
}

/// Builds the wavefunction for `spec`, reads its moments off the grid, and
/// for every requested frame compares the matrix-level switch against the
/// wavefunction-level substitution followed by fresh quadrature.
pub fn oracle_compare(
    spec: &GaussianWavefunctionSpec,
    frames: &[Label],
    tol: f64,
) -> Result<OracleComparison> {
    let dim = spec.system.len() - 1;
    oracle_compare_with(spec, frames, tol, &GridPolicy::default_for(dim), Parallelism::default())
}

/// Two grids are used: a tight one for every moment readout (finite
/// differences need the fine step) and a widened maximal-count one that
/// serves purely as the interpolation source for substitutions.
pub fn oracle_compare_with(
    spec: &GaussianWavefunctionSpec,
    frames: &[Label],
    tol: f64,
    policy: &GridPolicy,
    mode: Parallelism,
) -> Result<OracleComparison> {
    let psi = gaussian_wavefunction_with(spec, policy, mode)?;
    let base = grid_moments_with(&psi, mode)?;

    let needs_substitution = frames.iter().any(|f| f != &spec.frame);
    let source = if needs_substitution {
        let wide_policy = substitution_policy(spec, frames, policy)?;
        Some(gaussian_wavefunction_with(spec, &wide_policy, mode)?)
    } else {
        None
    };

    let mut results = Vec::with_capacity(frames.len());
    for frame in frames {
        let max_deviation = if frame == &spec.frame {
            0.0
        } else {
            let matrix_route = switch_frame(&base, frame)?;
            let substituted = substitute_frame_with(
                source.as_ref().expect("substitution source was built"),
                frame,
                mode,
            )?;
            let grid_route = grid_moments_with(&substituted, mode)?;
            max_moment_deviation(&matrix_route, &grid_route)
        };
        results.push(FrameDeviation {
            frame: frame.clone(),
            max_deviation,
            pass: max_deviation <= tol,
        });
    }
    Ok(OracleComparison {
        tol,
        pass: results.iter().all(|r| r.pass),
        frames: results,
    })
}
