//! Wavefunction-level ground truth for the moment pipeline.
//!
//! A perspective wavefunction is held in momentum representation, where the
//! translation-invariance constraint is algebraic: switching perspective is
//! the substitution `p_new_origin -> -(sum of described momenta)` with unit
//! Jacobian. Moments come out by midpoint quadrature, with position
//! observables realized as `x = i d/dp` through finite differences. None of
//! this shares code with the matrix pipeline, so agreement between the two
//! is a real cross-check.

mod compare;
mod moments;
mod substitute;
mod wavefunction;

pub use compare::{oracle_compare, oracle_compare_with, FrameDeviation, OracleComparison};
pub use moments::{grid_moments, grid_moments_with};
pub use substitute::{
    substitute_frame, substitute_frame_padded, substitute_frame_with, substitution_policy,
};
pub use wavefunction::{gaussian_wavefunction, gaussian_wavefunction_with, GaussianWavefunctionSpec};

use crate::parallel::{sum_f64, Parallelism};
use crate::system::{Label, ParticleSystem};
use num_complex::Complex64;

/// Largest allowed drift of the L2 norm under substitution.
pub const NORM_TOL: f64 = 1e-6;

/// Agreement required between the two differentiation stencils.
pub const FD_CHECK_TOL: f64 = 1e-5;

/// Estimated quadrature error on a momentum variance above which the grid
/// is rejected as too coarse.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// One uniform momentum axis; points sit at cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    /// Axis centered on `center` covering `center +- half_extent`.
    pub fn centered(center: f64, half_extent: f64, count: usize) -> Self {
        let min = center - half_extent;
        let step = 2.0 * half_extent / count as f64;
        GridAxis { min, step, count }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.step
    }

    pub fn max(&self) -> f64 {
        self.min + self.step * self.count as f64
    }
}

/// Grid construction knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPolicy {
    /// Points per axis; a power of two in [256, 4096] for one axis and
    /// [128, 1024] for two.
    pub points_per_axis: usize,
    /// Half-extent of each axis in units of that axis's standard
    /// deviation. At least 6; the default 7 keeps the truncated tail mass
    /// below 1e-10.
    pub extent_sigmas: f64,
    /// Optional absolute `(min, max)` unions per axis, used to leave room
    /// for later substitutions.
    pub axis_extent_overrides: Vec<Option<(f64, f64)>>,
}

impl GridPolicy {
    pub fn default_for(dim: usize) -> Self {
        GridPolicy {
            points_per_axis: if dim == 1 { 4096 } else { 512 },
            extent_sigmas: 7.0,
            axis_extent_overrides: vec![None; dim],
        }
    }
}

/// A discretized perspective wavefunction on a momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub(crate) system: ParticleSystem,
    pub(crate) frame: Label,
    pub(crate) described: Vec<Label>,
    pub(crate) axes: Vec<GridAxis>,
    pub(crate) values: Vec<Complex64>,
    pub(crate) extent_sigmas: f64,
}

impl GridWavefunction {
    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    pub fn frame(&self) -> &Label {
        &self.frame
    }

    pub fn described(&self) -> &[Label] {
        &self.described
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Product of the axis steps: the quadrature weight per grid point.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// Multi-index of a linear index, row-major over the axes.
    pub(crate) fn unravel(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            2 => [idx / self.axes[1].count, idx % self.axes[1].count],
            _ => unreachable!("grids are one- or two-dimensional"),
        }
    }

    /// Momentum coordinate of axis `a` at linear index `idx`.
    pub(crate) fn coordinate(&self, idx: usize, a: usize) -> f64 {
        self.axes[a].point(self.unravel(idx)[a])
    }

    /// L2 norm over the grid.
    pub fn norm(&self) -> f64 {
        self.norm_with(Parallelism::default())
    }

    pub fn norm_with(&self, mode: Parallelism) -> f64 {
        let vol = self.cell_volume();
        (sum_f64(self.len(), mode, |i| self.values[i].norm_sqr()) * vol).sqrt()
    }
}

/// Quadrature mean and variance of the momentum coordinate of one axis;
/// `stride > 1` subsamples every axis for error estimation.
pub(crate) fn axis_momentum_stats(
    psi: &GridWavefunction,
    axis: usize,
    stride: usize,
    mode: Parallelism,
) -> (f64, f64) {
    let keep = |idx: usize| -> bool {
        let mi = psi.unravel(idx);
        (0..psi.dim()).all(|a| mi[a].is_multiple_of(stride))
    };
    let weight = |idx: usize| if keep(idx) { psi.values[idx].norm_sqr() } else { 0.0 };
    let total = sum_f64(psi.len(), mode, weight);
    let m1 = sum_f64(psi.len(), mode, |i| weight(i) * psi.coordinate(i, axis)) / total;
    let m2 = sum_f64(psi.len(), mode, |i| {
        let p = psi.coordinate(i, axis);
        weight(i) * p * p
    }) / total;
    (m1, m2 - m1 * m1)
}

/// Mean and variance of the *total* described momentum.
pub(crate) fn total_momentum_stats(psi: &GridWavefunction, mode: Parallelism) -> (f64, f64) {
    let vol = psi.cell_volume();
    let total = sum_f64(psi.len(), mode, |i| psi.values[i].norm_sqr()) * vol;
    let coord_sum = |i: usize| (0..psi.dim()).map(|a| psi.coordinate(i, a)).sum::<f64>();
    let m1 = sum_f64(psi.len(), mode, |i| psi.values[i].norm_sqr() * coord_sum(i)) * vol / total;
    let m2 = sum_f64(psi.len(), mode, |i| {
        let s = coord_sum(i);
        psi.values[i].norm_sqr() * s * s
    }) * vol
        / total;
    (m1, m2 - m1 * m1)
}
