//! Perspective change at the wavefunction level.
//!
//! On the constraint surface the old frame's momentum is minus the sum of
//! the new description's momenta, so the new wavefunction is the old one
//! evaluated at `p_to = -(p_from + sum of spectators)` with every
//! spectator coordinate unchanged. The output grid is sized by the extent
//! rule from quadrature statistics of the new variables; values come from
//! tensor-product cubic (four-point) interpolation of the source grid,
//! matching the fourth-order differentiation budget.

use super::{
    axis_momentum_stats, total_momentum_stats, GaussianWavefunctionSpec, GridAxis, GridPolicy,
    GridWavefunction,
};
use crate::error::{Error, Result};
use crate::parallel::{fill_c64, Parallelism};
use crate::system::Label;
use num_complex::Complex64;

/// A grid policy sized so the wavefunction of `spec` can be substituted
/// into every listed frame without leaving the source extent.
///
/// The axis of each target particle is widened to cover the image of the
/// new grid's corners (computed from the spec's own momentum statistics,
/// plus slack for the other widened axes), and the point count is raised
/// to the maximum allowed so the widened axes keep a fine interpolation
/// step. Grids built with this policy are interpolation sources; moments
/// should be read from grids built with the plain policy.
pub fn substitution_policy(
    spec: &GaussianWavefunctionSpec,
    frames: &[Label],
    base: &GridPolicy,
) -> Result<GridPolicy> {
    let described = spec.system.described(&spec.frame)?;
    let dim = described.len();
    let mut policy = base.clone();
    policy.points_per_axis = if dim == 1 { 4096 } else { 1024 };
    policy.axis_extent_overrides.resize(dim, None);
    let s = policy.extent_sigmas;
    let mu = &spec.momentum_mean;
    let c = &spec.momentum_covariance;

    // Extent of the substituted coordinate, -(old-frame axis + spectators),
    // over the corners of the output grid. Output axes are always sized
    // from the tight statistics, so one pass suffices.
    let total_mean: f64 = (0..dim).map(|k| mu[k]).sum();
    let total_sigma = (0..dim)
        .flat_map(|a| (0..dim).map(move |b| (a, b)))
        .map(|(a, b)| c[(a, b)])
        .sum::<f64>()
        .max(0.0)
        .sqrt();

    for to in frames {
        if to == &spec.frame {
            continue;
        }
        let to_slot = match described.iter().position(|l| l == to) {
            Some(slot) => slot,
            None => continue, // invalid frame; surfaced later by the switch
        };
        let mut lo = total_mean - s * total_sigma;
        let mut hi = total_mean + s * total_sigma;
        for (k, _) in described.iter().enumerate().filter(|(k, _)| *k != to_slot) {
            let sigma = c[(k, k)].sqrt();
            lo -= mu[k] + s * sigma;
            hi -= mu[k] - s * sigma;
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        policy.axis_extent_overrides[to_slot] = Some(match policy.axis_extent_overrides[to_slot] {
            Some((plo, phi)) => (plo.min(lo), phi.max(hi)),
            None => (lo, hi),
        });
    }
    Ok(policy)
}

/// Four-point Lagrange stencil on a uniform axis; valid anywhere in the
/// cell-covered range `[axis.min, axis.max()]`.
fn stencil(axis: &GridAxis, x: f64, axis_id: usize) -> Result<(usize, [f64; 4])> {
    if !(axis.min..=axis.max()).contains(&x) {
        return Err(Error::InterpolationOutOfRange {
            axis: axis_id,
            coordinate: x,
        });
    }
    let t = (x - axis.min) / axis.step - 0.5;
    let base = (t.floor() as isize - 1).clamp(0, axis.count as isize - 4) as usize;
    let u = t - base as f64;
    let weights = [
        -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
        u * (u - 2.0) * (u - 3.0) / 2.0,
        -u * (u - 1.0) * (u - 3.0) / 2.0,
        u * (u - 1.0) * (u - 2.0) / 6.0,
    ];
    Ok((base, weights))
}

/// Re-expresses `psi` from the perspective of `to`.
pub fn substitute_frame(psi: &GridWavefunction, to: &Label) -> Result<GridWavefunction> {
    substitute_frame_with(psi, to, Parallelism::default())
}

pub fn substitute_frame_with(
    psi: &GridWavefunction,
    to: &Label,
    mode: Parallelism,
) -> Result<GridWavefunction> {
    substitute_frame_padded(psi, to, &[], mode)
}

/// Like [`substitute_frame_with`], with `(min, max)` unions applied to the
/// output axes (indexed in the target's described order). Widened output
/// grids can serve as sources for a further substitution, e.g. for
/// round-trip checks.
pub fn substitute_frame_padded(
    psi: &GridWavefunction,
    to: &Label,
    output_overrides: &[Option<(f64, f64)>],
    mode: Parallelism,
) -> Result<GridWavefunction> {
    if to == &psi.frame {
        return Err(Error::SameFrame(to.clone()));
    }
    let to_slot = psi
        .described
        .iter()
        .position(|l| l == to)
        .ok_or_else(|| Error::UnknownLabel(to.clone()))?;
    let new_described = psi.system.described(to)?;
    let dim = psi.dim();

    // Output axes by the extent rule from quadrature statistics: the old
    // frame particle's momentum is minus the total described momentum;
    // spectators keep their own marginals.
    let mut new_axes = Vec::with_capacity(dim);
    let mut old_slot_of_new: Vec<Option<usize>> = Vec::with_capacity(dim);
    for (a, label) in new_described.iter().enumerate() {
        let (center, half, count) = if label == &psi.frame {
            let (tot_mean, tot_var) = total_momentum_stats(psi, mode);
            (
                -tot_mean,
                psi.extent_sigmas * tot_var.max(0.0).sqrt(),
                psi.axes[to_slot].count,
            )
        } else {
            let s = psi
                .described
                .iter()
                .position(|l| l == label)
                .expect("spectators are described in both perspectives");
            let (mean, var) = axis_momentum_stats(psi, s, 1, mode);
            (
                mean,
                psi.extent_sigmas * var.max(0.0).sqrt(),
                psi.axes[s].count,
            )
        };
        old_slot_of_new.push(if label == &psi.frame {
            None
        } else {
            psi.described.iter().position(|l| l == label)
        });
        let (mut lo, mut hi) = (center - half, center + half);
        if let Some(Some((omin, omax))) = output_overrides.get(a) {
            lo = lo.min(*omin);
            hi = hi.max(*omax);
        }
        new_axes.push(GridAxis {
            min: lo,
            step: (hi - lo) / count as f64,
            count,
        });
    }

    // Old coordinates over the output box are affine in the new ones, so
    // extent violations surface at the corners. Probe them up front to make
    // an undersized source a hard error rather than a partial fill.
    let corner_sum_min: f64 = (0..dim).map(|a| new_axes[a].point(0)).sum();
    let corner_sum_max: f64 = (0..dim)
        .map(|a| new_axes[a].point(new_axes[a].count - 1))
        .sum();
    stencil(&psi.axes[to_slot], -corner_sum_min, to_slot)?;
    stencil(&psi.axes[to_slot], -corner_sum_max, to_slot)?;
    for (a, slot) in old_slot_of_new.iter().enumerate() {
        if let Some(s) = slot {
            stencil(&psi.axes[*s], new_axes[a].point(0), *s)?;
            stencil(&psi.axes[*s], new_axes[a].point(new_axes[a].count - 1), *s)?;
        }
    }

    let len: usize = new_axes.iter().map(|a| a.count).product();
    let n1 = if dim == 2 { new_axes[1].count } else { 1 };
    let old_axes = psi.axes.clone();
    let old_values = &psi.values;
    let old_n1 = if dim == 2 { old_axes[1].count } else { 1 };
    let axes_for_fill = new_axes.clone();
    let old_slots = old_slot_of_new.clone();

    let values = fill_c64(len, mode, move |idx| {
        let mi = if dim == 1 {
            [idx, 0]
        } else {
            [idx / n1, idx % n1]
        };
        let coords: Vec<f64> = (0..dim).map(|a| axes_for_fill[a].point(mi[a])).collect();
        let mut old_coords = [0.0f64; 2];
        old_coords[to_slot] = -coords.iter().sum::<f64>();
        for a in 0..dim {
            if let Some(s) = old_slots[a] {
                old_coords[s] = coords[a];
            }
        }
        let in_range = |a: usize| {
            stencil(&old_axes[a], old_coords[a], a)
                .expect("substitution extent was pre-checked at the corners")
        };
        if dim == 1 {
            let (b, w) = in_range(0);
            (0..4).map(|i| old_values[b + i] * w[i]).sum()
        } else {
            let (b0, w0) = in_range(0);
            let (b1, w1) = in_range(1);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += old_values[(b0 + i) * old_n1 + (b1 + j)] * (w0[i] * w1[j]);
                }
            }
            acc
        }
    });

    Ok(GridWavefunction {
        system: psi.system.clone(),
        frame: to.clone(),
        described: new_described,
        axes: new_axes,
        values,
        extent_sigmas: psi.extent_sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{gaussian_wavefunction, GridPolicy};
    use crate::parallel::Parallelism;
    use crate::system::ParticleSystem;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn one_dimensional_substitution_reflects() {
        let spec = GaussianWavefunctionSpec::new(
            ParticleSystem::unit_masses(2).unwrap(),
            Label::from("A"),
            dvector![0.4],
            dmatrix![0.5],
            dmatrix![0.0],
            dvector![0.0],
        )
        .unwrap();
        let policy = GridPolicy {
            points_per_axis: 512,
            ..GridPolicy::default_for(1)
        };
        let psi = gaussian_wavefunction(&spec, &policy).unwrap();
        let flipped = substitute_frame(&psi, &Label::from("B")).unwrap();
        assert_relative_eq!(flipped.norm(), 1.0, epsilon = 1e-6);
        let (mean, var) = axis_momentum_stats(&flipped, 0, 1, Parallelism::default());
        assert_relative_eq!(mean, -0.4, epsilon = 1e-6);
        assert_relative_eq!(var, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn norm_is_preserved_in_two_dimensions() {
        let spec = GaussianWavefunctionSpec::new(
            ParticleSystem::unit_masses(3).unwrap(),
            Label::from("A"),
            dvector![0.1, -0.2],
            dmatrix![0.6, 0.1; 0.1, 0.8],
            dmatrix![0.2, 0.0; 0.0, -0.1],
            dvector![0.0, 0.3],
        )
        .unwrap();
        let to = [Label::from("B")];
        let policy = substitution_policy(&spec, &to, &GridPolicy::default_for(2)).unwrap();
        let psi = gaussian_wavefunction(&spec, &policy).unwrap();
        let swapped = substitute_frame(&psi, &to[0]).unwrap();
        assert!(
            (swapped.norm() - 1.0).abs() <= 1e-6,
            "norm {}",
            swapped.norm()
        );
    }

    #[test]
    fn round_trip_recovers_the_original_profile() {
        let spec = GaussianWavefunctionSpec::new(
            ParticleSystem::unit_masses(2).unwrap(),
            Label::from("A"),
            dvector![0.3],
            dmatrix![0.8],
            dmatrix![0.4],
            dvector![0.1],
        )
        .unwrap();
        let policy = GridPolicy {
            points_per_axis: 2048,
            ..GridPolicy::default_for(1)
        };
        let psi = gaussian_wavefunction(&spec, &policy).unwrap();
        let there = substitute_frame(&psi, &Label::from("B")).unwrap();
        let back = substitute_frame(&there, &Label::from("A")).unwrap();
        let (mean0, var0) = axis_momentum_stats(&psi, 0, 1, Parallelism::default());
        let (mean1, var1) = axis_momentum_stats(&back, 0, 1, Parallelism::default());
        assert_relative_eq!(mean0, mean1, epsilon = 1e-6);
        assert_relative_eq!(var0, var1, epsilon = 1e-6);
    }

    #[test]
    fn undersized_source_grid_is_rejected() {
        // Without substitution headroom the image of the new grid's
        // corners falls outside the stored extent.
        let spec = GaussianWavefunctionSpec::vacuum(
            ParticleSystem::unit_masses(3).unwrap(),
            Label::from("A"),
        )
        .unwrap();
        let policy = GridPolicy {
            points_per_axis: 256,
            ..GridPolicy::default_for(2)
        };
        let psi = gaussian_wavefunction(&spec, &policy).unwrap();
        let err = substitute_frame(&psi, &Label::from("B")).unwrap_err();
        assert!(matches!(err, Error::InterpolationOutOfRange { .. }));
    }

    #[test]
    fn same_frame_rejected() {
        let spec = GaussianWavefunctionSpec::vacuum(
            ParticleSystem::unit_masses(2).unwrap(),
            Label::from("A"),
        )
        .unwrap();
        let policy = GridPolicy {
            points_per_axis: 256,
            ..GridPolicy::default_for(1)
        };
        let psi = gaussian_wavefunction(&spec, &policy).unwrap();
        let err = substitute_frame(&psi, &Label::from("A")).unwrap_err();
        assert_eq!(err, Error::SameFrame(Label::from("A")));
    }
}
