//! Scalar functionals and consistency reports on perspective states.
//!
//! Report operations never fail on physics violations; they return margins
//! and flags so callers (and the scenario runner) decide what counts as a
//! failure.

use crate::error::{Error, Result};
use crate::frame::switch_frame;
use crate::ordering::{omega, Ordering};
use crate::query::LinearCombination;
use crate::state::{uncertainty_min_eigenvalue, MomentState};
use crate::system::Label;
use crate::tol::ZERO_TOL;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Slack used when checking analytic bounds against floating-point values.
pub const BOUND_SLACK: f64 = 1e-9;

/// Robertson-Schroedinger physicality margins.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    /// Minimum eigenvalue of `S + (i/2) Omega`; physical states satisfy
    /// `psd_margin >= -PSD_TOL`.
    pub psd_margin: f64,
    /// Determinant of each single-particle 2x2 block; at least 1/4 for
    /// physical states.
    pub per_particle_dets: Vec<(Label, f64)>,
}

/// Margins of the Robertson-Schroedinger relation for a whole state.
pub fn rs_uncertainty_check(state: &MomentState) -> UncertaintyReport {
    let psd_margin = uncertainty_min_eigenvalue(state.cov(), state.ordering());
    let per_particle_dets = state
        .described()
        .iter()
        .map(|l| {
            let b = state.particle_block(l).expect("described particle");
            (l.clone(), b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)])
        })
        .collect();
    UncertaintyReport {
        psd_margin,
        per_particle_dets,
    }
}

/// Symplectic eigenvalues of a covariance matrix, sorted ascending.
///
/// Computed as the absolute imaginary parts of the eigenvalues of
/// `Omega S`, which come in conjugate pairs; one representative per pair
/// is returned. Physical states have every value at least 1/2.
pub fn symplectic_spectrum(cov: &DMatrix<f64>, ordering: Ordering) -> Result<Vec<f64>> {
    let d = cov.nrows();
    if !d.is_multiple_of(2) {
        return Err(Error::OddDimension(d));
    }
    let n = d / 2;
    let product = omega(n, ordering) * cov;
    let eigen = product.complex_eigenvalues();
    let mut mags: Vec<f64> = eigen.iter().map(|z| z.im.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(mags.into_iter().skip(1).step_by(2).collect())
}

/// Purity of an n-mode Gaussian state: `1 / (2^n sqrt(det S))`.
pub fn gaussian_purity(cov_subsystem: &DMatrix<f64>) -> Result<f64> {
    let d = cov_subsystem.nrows();
    if !d.is_multiple_of(2) {
        return Err(Error::OddDimension(d));
    }
    let det = cov_subsystem.clone().lu().determinant();
    if det <= 0.0 {
        return Err(Error::NonPositiveDeterminant(det));
    }
    Ok(1.0 / (2f64.powi((d / 2) as i32) * det.sqrt()))
}

/// Bound flags of the triangle equivalence, all with [`BOUND_SLACK`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangleFlags {
    /// Every side is at most the sum of the other two.
    pub triangle_inequality: bool,
    /// `1 <= c1 + c2 + c3 <= 3/2`.
    pub sum_bound: bool,
    /// `-1 <= c1 c2 c3 <= 1/8`.
    pub product_bound: bool,
    /// `c_i + c_j >= 0` for all pairs.
    pub pairwise_sums: bool,
    /// `c_i c_j + c_k >= 0` for all cyclic choices.
    pub product_plus_third: bool,
}

impl TriangleFlags {
    pub fn all_pass(&self) -> bool {
        self.triangle_inequality
            && self.sum_bound
            && self.product_bound
            && self.pairwise_sums
            && self.product_plus_third
    }
}

/// Geometry of the reciprocal position uncertainties of three particles.
///
/// `sides = (sigma_I(x_J), sigma_J(x_K), sigma_K(x_I))` and
/// `cosines = (corr_K(x_I,x_J), corr_I(x_J,x_K), corr_J(x_K,x_I))`, so the
/// cosine at position `i` belongs to the angle opposite side `i`.
/// Cosines, angles, the constraint residual and the flags are `None` when
/// a side degenerates to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub frames: (Label, Label, Label),
    pub sides: [f64; 3],
    pub cosines: Option<[f64; 3]>,
    pub angles: Option<[f64; 3]>,
    /// `|c1^2 + c2^2 + c3^2 + 2 c1 c2 c3 - 1|`
    pub constraint_residual: Option<f64>,
    pub flags: Option<TriangleFlags>,
}

impl TriangleReport {
    pub fn is_degenerate(&self) -> bool {
        self.cosines.is_none()
    }

    pub fn all_pass(&self) -> bool {
        self.flags.map(|f| f.all_pass()).unwrap_or(false)
    }
}

fn state_in_frame(state: &MomentState, frame: &Label) -> Result<MomentState> {
    if state.frame() == frame {
        Ok(state.clone())
    } else {
        switch_frame(state, frame)
    }
}

/// Assembles the triangle of reciprocal position moments of `i`, `j`, `k`
/// by switching the state into each of the three frames.
pub fn triangle_report(
    state: &MomentState,
    i: &Label,
    j: &Label,
    k: &Label,
) -> Result<TriangleReport> {
    if i == j || j == k || i == k {
        return Err(Error::InvalidFrameChoice(
            "triangle frames must be three distinct particles".into(),
        ));
    }
    let in_i = state_in_frame(state, i)?;
    let in_j = state_in_frame(state, j)?;
    let in_k = state_in_frame(state, k)?;

    let var_i_j = in_i.var_x(j)?;
    let var_j_k = in_j.var_x(k)?;
    let var_k_i = in_k.var_x(i)?;
    let sides = [var_i_j.sqrt(), var_j_k.sqrt(), var_k_i.sqrt()];

    if sides.iter().any(|s| *s * *s <= ZERO_TOL) {
        return Ok(TriangleReport {
            frames: (i.clone(), j.clone(), k.clone()),
            sides,
            cosines: None,
            angles: None,
            constraint_residual: None,
            flags: None,
        });
    }

    let corr = |s: &MomentState, a: &Label, b: &Label| -> Result<f64> {
        s.correlation(
            &LinearCombination::position(a.clone()),
            &LinearCombination::position(b.clone()),
        )
    };
    let c = [corr(&in_k, i, j)?, corr(&in_i, j, k)?, corr(&in_j, k, i)?];
    let angles = [
        c[0].clamp(-1.0, 1.0).acos(),
        c[1].clamp(-1.0, 1.0).acos(),
        c[2].clamp(-1.0, 1.0).acos(),
    ];
    let residual =
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + 2.0 * c[0] * c[1] * c[2] - 1.0).abs();

    let tri = (0..3).all(|a| {
        let (s, t, u) = (sides[a], sides[(a + 1) % 3], sides[(a + 2) % 3]);
        s <= t + u + BOUND_SLACK
    });
    let sum = c[0] + c[1] + c[2];
    let prod = c[0] * c[1] * c[2];
    let flags = TriangleFlags {
        triangle_inequality: tri,
        sum_bound: (1.0 - BOUND_SLACK..=1.5 + BOUND_SLACK).contains(&sum),
        product_bound: (-1.0 - BOUND_SLACK..=0.125 + BOUND_SLACK).contains(&prod),
        pairwise_sums: (0..3).all(|a| c[a] + c[(a + 1) % 3] >= -BOUND_SLACK),
        product_plus_third: (0..3).all(|a| c[a] * c[(a + 1) % 3] + c[(a + 2) % 3] >= -BOUND_SLACK),
    };

    Ok(TriangleReport {
        frames: (i.clone(), j.clone(), k.clone()),
        sides,
        cosines: Some(c),
        angles: Some(angles),
        constraint_residual: Some(residual),
        flags: Some(flags),
    })
}

/// Reciprocal momentum relations between two frames `I` and `J`.
///
/// With `sigma_rest` the uncertainty of the total momentum of everything
/// except the pair, the correlations are
/// `c1 = corr_I(p_rest, p_J)`, `c2 = corr_J(p_rest, p_I)` and
/// `c3 = corr_a(p_I, p_J)` for any third frame `a`. Degenerate entries are
/// `None` rather than zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumRelationReport {
    pub pair: (Label, Label),
    /// `sigma_I(p_J)`
    pub sigma_reciprocal_ij: f64,
    /// `sigma_J(p_I)`
    pub sigma_reciprocal_ji: f64,
    /// `sigma(p_rest)`, identical from either frame of the pair.
    pub sigma_rest: f64,
    /// `|sigma_rest from I - sigma_rest from J|`, a consistency residual.
    pub sigma_rest_deviation: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    /// `sigma_rest - |sigma_I(p_J) - sigma_J(p_I)|`; non-negative in theory.
    pub variance_triangle_margin: f64,
    /// `c1 + c2`; non-positive in theory.
    pub corr_sum: Option<f64>,
    /// Residuals `(c3 c2 - c1, c3 c1 - c2)` of the printed product
    /// relation `c_i <= c3 c_j`; reported, not asserted.
    pub corr_product_margins: Option<(f64, f64)>,
    /// Worst residual of `c3 = -corr_I(p_bar_I, p_J) = -corr_J(p_bar_J, p_I)`,
    /// evaluated only when both reciprocal variances are nonzero.
    pub reciprocal_corr_residual: Option<f64>,
}

impl MomentumRelationReport {
    /// The two hard relations: the variance triangle and `c1 + c2 <= 0`.
    pub fn hard_relations_pass(&self, slack: f64) -> bool {
        self.variance_triangle_margin >= -slack
            && self.corr_sum.map(|s| s <= slack).unwrap_or(true)
    }
}

/// Evaluates the momentum variance/correlation relations for frames `i`, `j`.
pub fn momentum_relation_report(
    state: &MomentState,
    i: &Label,
    j: &Label,
) -> Result<MomentumRelationReport> {
    if i == j {
        return Err(Error::SameFrame(i.clone()));
    }
    if state.system().len() < 3 {
        return Err(Error::TooFewParticles(state.system().len()));
    }
    let in_i = state_in_frame(state, i)?;
    let in_j = state_in_frame(state, j)?;
    let third = state
        .system()
        .labels()
        .iter()
        .find(|l| *l != i && *l != j)
        .expect("three particles exist")
        .clone();
    let in_a = state_in_frame(state, &third)?;

    let rest_i = LinearCombination::momentum_complement(&in_i, &[j]);
    let rest_j = LinearCombination::momentum_complement(&in_j, &[i]);
    let p_j = LinearCombination::momentum(j.clone());
    let p_i = LinearCombination::momentum(i.clone());

    let var_ij = in_i.var_p(j)?;
    let var_ji = in_j.var_p(i)?;
    let rest_var_i = in_i.variance(&rest_i)?;
    let rest_var_j = in_j.variance(&rest_j)?;
    let sigma_rest = rest_var_i.max(0.0).sqrt();
    let sigma_rest_deviation = (sigma_rest - rest_var_j.max(0.0).sqrt()).abs();

    let c1 = in_i.correlation(&rest_i, &p_j).ok();
    let c2 = in_j.correlation(&rest_j, &p_i).ok();
    let c3 = in_a.correlation(&p_i, &p_j).ok();

    let sigma_ij = var_ij.max(0.0).sqrt();
    let sigma_ji = var_ji.max(0.0).sqrt();
    let variance_triangle_margin = sigma_rest - (sigma_ij - sigma_ji).abs();
    let corr_sum = match (c1, c2) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    let corr_product_margins = match (c1, c2, c3) {
        (Some(a), Some(b), Some(c)) => Some((c * b - a, c * a - b)),
        _ => None,
    };

    // Total-momentum correlations from inside each frame of the pair.
    let reciprocal_corr_residual = match c3 {
        Some(c3v) => {
            let total_i = LinearCombination::described_momentum_total(&in_i);
            let total_j = LinearCombination::described_momentum_total(&in_j);
            let from_i = in_i.correlation(&total_i, &p_j).ok();
            let from_j = in_j.correlation(&total_j, &p_i).ok();
            match (from_i, from_j) {
                (Some(a), Some(b)) => Some((c3v + a).abs().max((c3v + b).abs())),
                _ => None,
            }
        }
        None => None,
    };

    Ok(MomentumRelationReport {
        pair: (i.clone(), j.clone()),
        sigma_reciprocal_ij: sigma_ij,
        sigma_reciprocal_ji: sigma_ji,
        sigma_rest,
        sigma_rest_deviation,
        c1,
        c2,
        c3,
        variance_triangle_margin,
        corr_sum,
        corr_product_margins,
        reciprocal_corr_residual,
    })
}

/// Variance-based separability criteria for one particle pair.
///
/// Flags use strict inequality against the exact thresholds 1 and 2; the
/// margins carry the distances so callers can apply their own band.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub frame: Label,
    pub pair: (Label, Label),
    /// `var(x_K - x_L) * var(p_K + p_L)`
    pub c_prod: f64,
    /// `var(x_K - x_L) + var(p_K + p_L)`
    pub c_sum: f64,
    /// `c_prod < 1`: entanglement witnessed by the product criterion.
    pub entangled_flag_prod: bool,
    /// `c_sum < 2`: entanglement witnessed by the sum criterion.
    pub entangled_flag_sum: bool,
}

impl CriteriaReport {
    pub fn margin_prod(&self) -> f64 {
        1.0 - self.c_prod
    }

    pub fn margin_sum(&self) -> f64 {
        2.0 - self.c_sum
    }
}

/// Evaluates the product and sum criteria for particles `k`, `l` in the
/// state's own frame.
pub fn entanglement_criteria(state: &MomentState, k: &Label, l: &Label) -> Result<CriteriaReport> {
    if k == l {
        return Err(Error::InvalidFrameChoice(
            "criteria need two distinct particles".into(),
        ));
    }
    let rel = LinearCombination::position_difference(k.clone(), l.clone());
    let tot = LinearCombination::momentum_sum(k.clone(), l.clone());
    let vx = state.variance(&rel)?;
    let vp = state.variance(&tot)?;
    let c_prod = vx * vp;
    let c_sum = vx + vp;
    Ok(CriteriaReport {
        frame: state.frame().clone(),
        pair: (k.clone(), l.clone()),
        c_prod,
        c_sum,
        entangled_flag_prod: c_prod < 1.0,
        entangled_flag_sum: c_sum < 2.0,
    })
}

/// Criteria evaluated from several frames, with their spread.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaInvarianceReport {
    pub pair: (Label, Label),
    pub per_frame: Vec<CriteriaReport>,
    pub max_rel_dev_prod: f64,
    pub max_rel_dev_sum: f64,
    pub pass: bool,
}

/// Relative tolerance for criteria invariance across frames.
pub const CRITERIA_INVARIANCE_TOL: f64 = 1e-9;

fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = max.abs().max(min.abs());
    if scale <= f64::MIN_POSITIVE {
        0.0
    } else {
        (max - min) / scale
    }
}

/// Evaluates the criteria for pair `(k, l)` from every listed frame and
/// reports the maximal relative deviation.
pub fn criteria_invariance(
    state: &MomentState,
    frames: &[Label],
    k: &Label,
    l: &Label,
) -> Result<CriteriaInvarianceReport> {
    for f in frames {
        if f == k || f == l {
            return Err(Error::FrameOverlapsPair(f.clone()));
        }
    }
    let mut per_frame = Vec::with_capacity(frames.len());
    for f in frames {
        let s = state_in_frame(state, f)?;
        per_frame.push(entanglement_criteria(&s, k, l)?);
    }
    let prods: Vec<f64> = per_frame.iter().map(|r| r.c_prod).collect();
    let sums: Vec<f64> = per_frame.iter().map(|r| r.c_sum).collect();
    let max_rel_dev_prod = relative_spread(&prods);
    let max_rel_dev_sum = relative_spread(&sums);
    Ok(CriteriaInvarianceReport {
        pair: (k.clone(), l.clone()),
        per_frame,
        pass: max_rel_dev_prod <= CRITERIA_INVARIANCE_TOL
            && max_rel_dev_sum <= CRITERIA_INVARIANCE_TOL,
        max_rel_dev_prod,
        max_rel_dev_sum,
    })
}

/// Outcome of the sufficient conditions under which two frames describe
/// every other subsystem identically.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub frames: (Label, Label),
    /// `var_I(x_J)`; condition (a) requires it below `tol`.
    pub localization_variance: f64,
    pub localization_pass: bool,
    /// Worst `|cov_I(x_J, x_K)|` or `|cov_I(x_J, p_K)|` over spectators K.
    pub cross_cov_max: f64,
    pub cross_cov_pass: bool,
    /// Worst entry difference of the spectator covariance blocks between
    /// the two frames.
    pub spectator_deviation: f64,
    /// `3 * tol`, from the transformation identities for the blocks.
    pub derived_tolerance: f64,
    /// Conditions hold and the spectator blocks agree within the derived
    /// tolerance.
    pub equivalent: bool,
}

/// Checks the localization conditions under which frames `i` and `j` agree
/// on all spectator moments.
pub fn equivalence_conditions(
    state: &MomentState,
    i: &Label,
    j: &Label,
    tol: f64,
) -> Result<EquivalenceReport> {
    if i == j {
        return Err(Error::SameFrame(i.clone()));
    }
    let in_i = state_in_frame(state, i)?;
    let in_j = state_in_frame(state, j)?;

    let localization_variance = in_i.var_x(j)?;
    let localization_pass = localization_variance <= tol;

    let spectators: Vec<Label> = state
        .system()
        .labels()
        .iter()
        .filter(|l| *l != i && *l != j)
        .cloned()
        .collect();
    let mut cross_cov_max: f64 = 0.0;
    for k in &spectators {
        cross_cov_max = cross_cov_max.max(in_i.xx(j, k)?.abs());
        cross_cov_max = cross_cov_max.max(in_i.xp(j, k)?.abs());
    }
    let cross_cov_pass = cross_cov_max <= tol;

    let block_i = in_i.subsystem_cov(&spectators)?;
    let block_j = in_j.subsystem_cov(&spectators)?;
    let spectator_deviation = (&block_i - &block_j)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let derived_tolerance = 3.0 * tol;
    Ok(EquivalenceReport {
        frames: (i.clone(), j.clone()),
        localization_variance,
        localization_pass,
        cross_cov_max,
        cross_cov_pass,
        spectator_deviation,
        derived_tolerance,
        equivalent: localization_pass && cross_cov_pass && spectator_deviation <= derived_tolerance,
    })
}

/// Purity of every single-particle subsystem seen from the state's frame.
pub fn particle_purities(state: &MomentState) -> Result<BTreeMap<Label, f64>> {
    let mut out = BTreeMap::new();
    for l in state.described() {
        out.insert(l.clone(), gaussian_purity(&state.particle_block(l)?)?);
    }
    Ok(out)
}

/// Two-mode squeezed covariance with parameter `r`, blocked ordering,
/// vacuum normalization 1/2. `var(x_1 - x_2) = var(p_1 + p_2) = e^{-2r}`.
pub fn two_mode_squeezed_cov(r: f64) -> DMatrix<f64> {
    let ch = (2.0 * r).cosh() * 0.5;
    let sh = (2.0 * r).sinh() * 0.5;
    let mut cov = DMatrix::zeros(4, 4);
    cov[(0, 0)] = ch;
    cov[(1, 1)] = ch;
    cov[(0, 1)] = sh;
    cov[(1, 0)] = sh;
    cov[(2, 2)] = ch;
    cov[(3, 3)] = ch;
    cov[(2, 3)] = -sh;
    cov[(3, 2)] = -sh;
    cov
}
