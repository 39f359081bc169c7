//! Gaussian perspective wavefunctions on momentum grids.

use super::{axis_momentum_stats, GridAxis, GridPolicy, GridWavefunction, QUADRATURE_TOL};
use crate::error::{Error, Result};
use crate::parallel::{fill_c64, Parallelism};
use crate::system::{Label, ParticleSystem};
use crate::tol::SYM_TOL;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Parameters of a normalized pure Gaussian perspective state,
///
/// `psi(P) ~ exp(-(1/4) (P-mu)^T C^{-1} (P-mu) + (i/2) P^T Phi P + i l^T P)`,
///
/// so the momentum covariance is exactly `C`, the momentum mean is `mu`,
/// the quadratic phase `Phi` generates x-p correlations and the linear
/// phase `l` shifts position means.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWavefunctionSpec {
    pub system: ParticleSystem,
    pub frame: Label,
    pub momentum_mean: DVector<f64>,
    pub momentum_covariance: DMatrix<f64>,
    pub phase_quadratic: DMatrix<f64>,
    pub phase_linear: DVector<f64>,
}

impl GaussianWavefunctionSpec {
    pub fn new(
        system: ParticleSystem,
        frame: Label,
        momentum_mean: DVector<f64>,
        momentum_covariance: DMatrix<f64>,
        phase_quadratic: DMatrix<f64>,
        phase_linear: DVector<f64>,
    ) -> Result<Self> {
        let n = system.described(&frame)?.len();
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        for (len, got) in [(momentum_mean.len(), n), (phase_linear.len(), n)] {
            if len != got {
                return Err(Error::DimensionMismatch {
                    expected: got,
                    got: len,
                });
            }
        }
        for m in [&momentum_covariance, &phase_quadratic] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.nrows().max(m.ncols()),
                });
            }
            let mut asym: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
                }
            }
            if asym > SYM_TOL {
                return Err(Error::NonSymmetric {
                    max_asym: asym,
                    tol: SYM_TOL,
                });
            }
        }
        if momentum_covariance.clone().cholesky().is_none() {
            return Err(Error::NonPositiveDefiniteCovariance);
        }
        Ok(GaussianWavefunctionSpec {
            system,
            frame,
            momentum_mean,
            momentum_covariance,
            phase_quadratic,
            phase_linear,
        })
    }

    /// Product of vacuum-variance modes: `C = I/2`, no phases.
    pub fn vacuum(system: ParticleSystem, frame: Label) -> Result<Self> {
        let n = system.described(&frame)?.len();
        Self::new(
            system,
            frame,
            DVector::zeros(n),
            DMatrix::identity(n, n) * 0.5,
            DMatrix::zeros(n, n),
            DVector::zeros(n),
        )
    }
}

fn validate_counts(dim: usize, count: usize) -> Result<()> {
    let (min, max) = if dim == 1 { (256, 4096) } else { (128, 1024) };
    if !count.is_power_of_two() || count < min || count > max {
        return Err(Error::InvalidGridCount {
            got: count,
            min,
            max,
        });
    }
    Ok(())
}

/// Discretizes `spec` on a fresh grid and normalizes it.
pub fn gaussian_wavefunction(
    spec: &GaussianWavefunctionSpec,
    policy: &GridPolicy,
) -> Result<GridWavefunction> {
    gaussian_wavefunction_with(spec, policy, Parallelism::default())
}

pub fn gaussian_wavefunction_with(
    spec: &GaussianWavefunctionSpec,
    policy: &GridPolicy,
    mode: Parallelism,
) -> Result<GridWavefunction> {
    let described = spec.system.described(&spec.frame)?;
    let dim = described.len();
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    validate_counts(dim, policy.points_per_axis)?;
    if policy.extent_sigmas < 6.0 {
        return Err(Error::NonPositiveParameter {
            name: "extent_sigmas (must be at least 6)",
            value: policy.extent_sigmas,
        });
    }

    let c_inv = spec
        .momentum_covariance
        .clone()
        .cholesky()
        .ok_or(Error::NonPositiveDefiniteCovariance)?
        .inverse();

    let mut axes = Vec::with_capacity(dim);
    for k in 0..dim {
        let sigma = spec.momentum_covariance[(k, k)].sqrt();
        let mut lo = spec.momentum_mean[k] - policy.extent_sigmas * sigma;
        let mut hi = spec.momentum_mean[k] + policy.extent_sigmas * sigma;
        if let Some(Some((omin, omax))) = policy.axis_extent_overrides.get(k) {
            lo = lo.min(*omin);
            hi = hi.max(*omax);
        }
        let count = policy.points_per_axis;
        axes.push(GridAxis {
            min: lo,
            step: (hi - lo) / count as f64,
            count,
        });
    }

    let len: usize = axes.iter().map(|a| a.count).product();
    let n1 = if dim == 2 { axes[1].count } else { 1 };
    let axes_for_fill = axes.clone();
    let mu = spec.momentum_mean.clone();
    let c_inv_f = c_inv.clone();
    let phi = spec.phase_quadratic.clone();
    let ell = spec.phase_linear.clone();
    let values = fill_c64(len, mode, move |idx| {
        let mi = if dim == 1 {
            [idx, 0]
        } else {
            [idx / n1, idx % n1]
        };
        let mut quad = 0.0;
        let mut phase = 0.0;
        let p: Vec<f64> = (0..dim).map(|a| axes_for_fill[a].point(mi[a])).collect();
        for a in 0..dim {
            let ua = p[a] - mu[a];
            phase += ell[a] * p[a];
            for b in 0..dim {
                let ub = p[b] - mu[b];
                quad += ua * c_inv_f[(a, b)] * ub;
                phase += 0.5 * p[a] * phi[(a, b)] * p[b];
            }
        }
        Complex64::from_polar((-0.25 * quad).exp(), phase)
    });

    let mut psi = GridWavefunction {
        system: spec.system.clone(),
        frame: spec.frame.clone(),
        described,
        axes,
        values,
        extent_sigmas: policy.extent_sigmas,
    };
    let norm = psi.norm_with(mode);
    let inv = 1.0 / norm;
    for v in &mut psi.values {
        *v *= inv;
    }

    // Resolution check: the momentum variance must be stable under
    // dropping every other point along each axis.
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        let (_, full) = axis_momentum_stats(&psi, a, 1, mode);
        let (_, half) = axis_momentum_stats(&psi, a, 2, mode);
        worst = worst.max((full - half).abs());
    }
    if worst > QUADRATURE_TOL {
        return Err(Error::GridTooCoarse {
            err: worst,
            tol: QUADRATURE_TOL,
        });
    }

    Ok(psi)
}
