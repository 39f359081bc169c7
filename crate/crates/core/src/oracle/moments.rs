//! Moments of a grid wavefunction by quadrature and differentiation.
//!
//! Momentum moments are plain midpoint sums over `|psi|^2`. Position
//! observables act as `x_K = i d/dp_K`, realized with fourth-order central
//! differences; every derivative-based moment is computed twice, on the
//! unit stencil and on the doubled stencil, and the two must agree within
//! `FD_CHECK_TOL` or the grid is rejected as `DifferentiationUnstable`.
//!
//! The useful identities (boundary terms vanish with the decayed tails):
//!   <x_a>            = Re( i sum psi* D_a psi )
//!   sym<x_a x_b>     = Re( sum (D_a psi)* (D_b psi) )
//!   sym<x_a p_b>     = Re( i sum p_b psi* D_a psi )

use super::{FD_CHECK_TOL, GridWavefunction};
use crate::error::{Error, Result};
use crate::ordering::Ordering;
use crate::parallel::{map_collect, sum_c64, sum_f64, Parallelism};
use crate::state::MomentState;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Fourth-order central difference along `axis` with node spacing
/// `spacing` grid steps; out-of-range neighbors read as zero.
fn derivative(psi: &GridWavefunction, axis: usize, spacing: usize, mode: Parallelism) -> Vec<Complex64> {
    let dim = psi.dim();
    let n1 = if dim == 2 { psi.axes[1].count } else { 1 };
    let count = psi.axes[axis].count;
    let h = psi.axes[axis].step * spacing as f64;
    let values = &psi.values;
    map_collect(psi.len(), mode, move |idx| {
        let mi = if dim == 1 {
            [idx, 0]
        } else {
            [idx / n1, idx % n1]
        };
        let fetch = |offset: isize| -> Complex64 {
            let pos = mi[axis] as isize + offset * spacing as isize;
            if pos < 0 || pos >= count as isize {
                return Complex64::new(0.0, 0.0);
            }
            let mut full = mi;
            full[axis] = pos as usize;
            values[if dim == 1 { full[0] } else { full[0] * n1 + full[1] }]
        };
        (-fetch(2) + fetch(1) * 8.0 - fetch(-1) * 8.0 + fetch(-2)) / (12.0 * h)
    })
}

struct XMoments {
    mean_x: Vec<f64>,
    /// Raw symmetrized `<x_a x_b>`.
    xx: DMatrix<f64>,
    /// Raw symmetrized `<x_a p_b>`.
    xp: DMatrix<f64>,
}

fn x_moments(
    psi: &GridWavefunction,
    spacing: usize,
    total: f64,
    mode: Parallelism,
) -> XMoments {
    let dim = psi.dim();
    let vol = psi.cell_volume();
    let derivs: Vec<Vec<Complex64>> = (0..dim)
        .map(|a| derivative(psi, a, spacing, mode))
        .collect();
    let i_unit = Complex64::new(0.0, 1.0);

    let mean_x: Vec<f64> = (0..dim)
        .map(|a| {
            let d = &derivs[a];
            let s = sum_c64(psi.len(), mode, |i| psi.values[i].conj() * d[i]);
            (i_unit * s * vol).re / total
        })
        .collect();

    let mut xx = DMatrix::zeros(dim, dim);
    let mut xp = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if b >= a {
                let (da, db) = (&derivs[a], &derivs[b]);
                let s = sum_c64(psi.len(), mode, |i| da[i].conj() * db[i]);
                xx[(a, b)] = (s * vol).re / total;
                xx[(b, a)] = xx[(a, b)];
            }
            let da = &derivs[a];
            let s = sum_c64(psi.len(), mode, |i| {
                psi.values[i].conj() * da[i] * psi.coordinate(i, b)
            });
            xp[(a, b)] = (i_unit * s * vol).re / total;
        }
    }
    XMoments { mean_x, xx, xp }
}

/// Extracts a full `MomentState` (blocked ordering) from the grid.
pub fn grid_moments(psi: &GridWavefunction) -> Result<MomentState> {
    grid_moments_with(psi, Parallelism::default())
}

pub fn grid_moments_with(psi: &GridWavefunction, mode: Parallelism) -> Result<MomentState> {
    let dim = psi.dim();
    let vol = psi.cell_volume();
    let total = sum_f64(psi.len(), mode, |i| psi.values[i].norm_sqr()) * vol;

    let mean_p: Vec<f64> = (0..dim)
        .map(|a| {
            sum_f64(psi.len(), mode, |i| {
                psi.values[i].norm_sqr() * psi.coordinate(i, a)
            }) * vol
                / total
        })
        .collect();
    let mut pp = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let raw = sum_f64(psi.len(), mode, |i| {
                psi.values[i].norm_sqr() * psi.coordinate(i, a) * psi.coordinate(i, b)
            }) * vol
                / total;
            pp[(a, b)] = raw - mean_p[a] * mean_p[b];
            pp[(b, a)] = pp[(a, b)];
        }
    }

    let fine = x_moments(psi, 1, total, mode);
    let coarse = x_moments(psi, 2, total, mode);
    let mut dev: f64 = 0.0;
    for a in 0..dim {
        dev = dev.max((fine.mean_x[a] - coarse.mean_x[a]).abs());
        for b in 0..dim {
            dev = dev.max((fine.xx[(a, b)] - coarse.xx[(a, b)]).abs());
            dev = dev.max((fine.xp[(a, b)] - coarse.xp[(a, b)]).abs());
        }
    }
    if dev > FD_CHECK_TOL {
        return Err(Error::DifferentiationUnstable {
            dev,
            tol: FD_CHECK_TOL,
        });
    }

    let mut mean = DVector::zeros(2 * dim);
    let mut cov = DMatrix::zeros(2 * dim, 2 * dim);
    for a in 0..dim {
        mean[a] = fine.mean_x[a];
        mean[dim + a] = mean_p[a];
        for b in 0..dim {
            cov[(a, b)] = fine.xx[(a, b)] - fine.mean_x[a] * fine.mean_x[b];
            cov[(dim + a, dim + b)] = pp[(a, b)];
            let mixed = fine.xp[(a, b)] - fine.mean_x[a] * mean_p[b];
            cov[(a, dim + b)] = mixed;
            cov[(dim + b, a)] = mixed;
        }
    }

    MomentState::new(
        psi.system().clone(),
        psi.frame().clone(),
        mean,
        cov,
        Ordering::Blocked,
    )
}
