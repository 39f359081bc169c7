//! Exact linear maps between perspectives.
//!
//! Switching the reference frame from particle I to particle J sends the
//! described observables to
//!
//! ```text
//!   x_K |_J = x_K - x_J        (K a spectator),   x_I |_J = -x_J,
//!   p_K |_J = p_K              (K a spectator),   p_I |_J = -sum_M p_M,
//! ```
//!
//! all read in frame I. On moment vectors this is an integer matrix
//! `Theta = diag(alpha, beta)` in blocked ordering with `beta` the inverse
//! transpose of `alpha`; both are built in the swap layout (the old frame
//! takes the new frame's slot) and then permuted to canonical label order.
//!
//! `switch_frame` applies Theta to the whole state; the `predict_*`
//! functions compute single target moments from scalar identities instead,
//! so each route validates the other.

use crate::error::{Error, Result};
use crate::ordering::Ordering;
use crate::query::LinearCombination;
use crate::state::MomentState;
use crate::system::{Label, ParticleSystem};
use nalgebra::DMatrix;

/// The integer linear map carrying one perspective's moments to another's.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameChangeMap {
    from: Label,
    to: Label,
    /// Position block in canonical label order (entries 0, +1, -1).
    alpha: DMatrix<f64>,
    /// Momentum block in canonical label order.
    beta: DMatrix<f64>,
    /// `diag(alpha, beta)` acting on blocked-ordered moment vectors.
    theta: DMatrix<f64>,
    /// Sign of the slot permutation from swap layout to label order.
    det_sign: i32,
}

impl FrameChangeMap {
    pub fn from_frame(&self) -> &Label {
        &self.from
    }

    pub fn to_frame(&self) -> &Label {
        &self.to
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn det_sign(&self) -> i32 {
        self.det_sign
    }
}

fn permutation_sign(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Builds the map taking moments in `from`'s perspective to `to`'s.
pub fn frame_map(system: &ParticleSystem, from: &Label, to: &Label) -> Result<FrameChangeMap> {
    if from == to {
        return Err(Error::SameFrame(from.clone()));
    }
    let described_from = system.described(from)?;
    let described_to = system.described(to)?;
    let n = described_from.len();
    let to_slot = described_from
        .iter()
        .position(|l| l == to)
        .expect("target frame is described in the source frame");

    // Swap layout: the old frame particle occupies the new frame's slot.
    let mut swap_order = described_from.clone();
    swap_order[to_slot] = from.clone();

    // alpha in swap layout: identity with the target column set to -1.
    let mut alpha_swap = DMatrix::<f64>::identity(n, n);
    for r in 0..n {
        alpha_swap[(r, to_slot)] = -1.0;
    }
    // beta in swap layout: identity with the target row set to -1.
    let beta_swap = alpha_swap.transpose();

    // Row permutation from swap layout to canonical label order.
    let perm: Vec<usize> = described_to
        .iter()
        .map(|l| {
            swap_order
                .iter()
                .position(|s| s == l)
                .expect("swap layout is a permutation of the target described set")
        })
        .collect();
    let det_sign = permutation_sign(&perm);

    let permute_rows = |m: &DMatrix<f64>| -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| m[(perm[i], j)])
    };
    let alpha = permute_rows(&alpha_swap);
    let beta = permute_rows(&beta_swap);

    let mut theta = DMatrix::<f64>::zeros(2 * n, 2 * n);
    theta.view_mut((0, 0), (n, n)).copy_from(&alpha);
    theta.view_mut((n, n), (n, n)).copy_from(&beta);

    Ok(FrameChangeMap {
        from: from.clone(),
        to: to.clone(),
        alpha,
        beta,
        theta,
        det_sign,
    })
}

/// Re-expresses `state` from the perspective of `to`.
pub fn switch_frame(state: &MomentState, to: &Label) -> Result<MomentState> {
    let map = frame_map(state.system(), state.frame(), to)?;
    let blocked = state.reorder(Ordering::Blocked);
    let mean = map.theta() * blocked.mean();
    let cov = map.theta() * blocked.cov() * map.theta().transpose();
    // The exact conjugation is symmetric; halve out the rounding asymmetry.
    let cov = (&cov + cov.transpose()) * 0.5;
    let switched = MomentState::new(
        state.system().clone(),
        to.clone(),
        mean,
        cov,
        Ordering::Blocked,
    )?;
    Ok(switched.reorder(state.ordering()))
}

/// Position-moment predictions for a frame change, from scalar identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMomentPrediction {
    /// `var_{new}(x_target)`
    pub var_of_target: f64,
    /// `cov_{new}(x_target, x_partner)`
    pub cov_of_pair: f64,
    /// `var_{old}(x_new)`, which equals `var_{new}(x_old)` exactly.
    pub reciprocal_variance: f64,
}

fn check_new_frame(state: &MomentState, new_frame: &Label) -> Result<()> {
    state.system().index(new_frame)?;
    if new_frame == state.frame() {
        return Err(Error::InvalidFrameChoice(format!(
            "new frame `{new_frame}` equals the current frame"
        )));
    }
    Ok(())
}

fn check_described_in(new_frame: &Label, label: &Label, system: &ParticleSystem) -> Result<()> {
    system.index(label)?;
    if label == new_frame {
        return Err(Error::InvalidFrameChoice(format!(
            "particle `{label}` is the new frame and is not described there"
        )));
    }
    Ok(())
}

/// `cov_{new}(x_k, x_l)` predicted from moments held in `state`'s frame.
///
/// The old frame particle may appear as `k` or `l`; its position is the
/// zero operator in its own perspective, which collapses the identities to
/// the reciprocal-variance and sign-flipped forms.
pub fn predict_position_cov(
    state: &MomentState,
    new_frame: &Label,
    k: &Label,
    l: &Label,
) -> Result<f64> {
    check_new_frame(state, new_frame)?;
    check_described_in(new_frame, k, state.system())?;
    check_described_in(new_frame, l, state.system())?;
    let old = state.frame();
    let var_old_of_new = state.var_x(new_frame)?;
    let value = match (k == old, l == old) {
        (true, true) => var_old_of_new,
        (true, false) => var_old_of_new - state.xx(new_frame, l)?,
        (false, true) => var_old_of_new - state.xx(new_frame, k)?,
        (false, false) => {
            state.xx(k, l)? - state.xx(k, new_frame)? - state.xx(l, new_frame)?
                + var_old_of_new
        }
    };
    Ok(value)
}

/// Variance, pair covariance and reciprocal variance for a frame change.
pub fn predict_position_moments(
    state: &MomentState,
    new_frame: &Label,
    target: &Label,
    partner: &Label,
) -> Result<PositionMomentPrediction> {
    Ok(PositionMomentPrediction {
        var_of_target: predict_position_cov(state, new_frame, target, target)?,
        cov_of_pair: predict_position_cov(state, new_frame, target, partner)?,
        reciprocal_variance: state.var_x(new_frame)?,
    })
}

/// `cov_{new}(p_k, p_l)` predicted from moments held in `state`'s frame.
///
/// Spectator momenta are untouched; moments involving the old frame's
/// momentum come from the constraint `p_old = -sum of described momenta`.
pub fn predict_momentum_cov(
    state: &MomentState,
    new_frame: &Label,
    k: &Label,
    l: &Label,
) -> Result<f64> {
    check_new_frame(state, new_frame)?;
    check_described_in(new_frame, k, state.system())?;
    check_described_in(new_frame, l, state.system())?;
    let old = state.frame();
    let described = state.described().to_vec();
    let sum_against = |target: &Label| -> Result<f64> {
        let mut acc = 0.0;
        for m in &described {
            acc += state.pp(m, target)?;
        }
        Ok(acc)
    };
    let value = match (k == old, l == old) {
        (true, true) => {
            let mut acc = 0.0;
            for b in &described {
                acc += sum_against(b)?;
            }
            acc
        }
        (true, false) => -sum_against(l)?,
        (false, true) => -sum_against(k)?,
        (false, false) => state.pp(k, l)?,
    };
    Ok(value)
}

/// `cov_{new}(x_k, p_l)` predicted from moments held in `state`'s frame.
pub fn predict_mixed_cov(
    state: &MomentState,
    new_frame: &Label,
    k: &Label,
    l: &Label,
) -> Result<f64> {
    check_new_frame(state, new_frame)?;
    check_described_in(new_frame, k, state.system())?;
    check_described_in(new_frame, l, state.system())?;
    let old = state.frame();
    // cov_old(x_k, p_m) with the old frame's own position reading zero.
    let x_term = |m: &Label| -> Result<f64> {
        if k == old {
            Ok(0.0)
        } else {
            state.xp(k, m)
        }
    };
    let value = if l == old {
        let mut acc = 0.0;
        for m in state.described().to_vec() {
            acc -= x_term(&m)? - state.xp(new_frame, &m)?;
        }
        acc
    } else {
        x_term(l)? - state.xp(new_frame, l)?
    };
    Ok(value)
}

/// Reciprocal variance of momenta: `var_{a != I}(p_I)` evaluated from
/// frame I as the variance of the total described momentum.
pub fn reciprocal_momentum_variance(state: &MomentState) -> f64 {
    let total = LinearCombination::described_momentum_total(state);
    state.variance(&total).expect("described momenta are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, DVector};

    fn unit_system(n: usize) -> ParticleSystem {
        ParticleSystem::unit_masses(n).unwrap()
    }

    fn e1() -> MomentState {
        MomentState::centered(
            unit_system(3),
            Label::from("A"),
            DMatrix::identity(4, 4),
            Ordering::Blocked,
        )
        .unwrap()
    }

    #[test]
    fn two_particle_map_is_minus_identity() {
        let map = frame_map(&unit_system(2), &Label::from("A"), &Label::from("B")).unwrap();
        assert_eq!(map.alpha(), &dmatrix![-1.0]);
        assert_eq!(map.beta(), &dmatrix![-1.0]);
        assert_eq!(map.theta(), &(-DMatrix::<f64>::identity(2, 2)));
    }

    #[test]
    fn three_particle_swap_layout_blocks() {
        // A -> B: swap layout equals label order, so the blocks are the raw
        // swap-layout matrices: -1 column for positions, -1 row for momenta.
        let map = frame_map(&unit_system(3), &Label::from("A"), &Label::from("B")).unwrap();
        assert_eq!(map.alpha(), &dmatrix![-1.0, 0.0; -1.0, 1.0]);
        assert_eq!(map.beta(), &dmatrix![-1.0, -1.0; 0.0, 1.0]);
        assert_eq!(map.beta(), &map.alpha().transpose());
        assert_eq!(map.det_sign(), 1);
    }

    #[test]
    fn theta_determinant_is_unit() {
        for n in 2..6 {
            let sys = unit_system(n);
            for from in sys.labels() {
                for to in sys.labels() {
                    if from == to {
                        continue;
                    }
                    let map = frame_map(&sys, from, to).unwrap();
                    let det = map.theta().clone().lu().determinant();
                    assert_relative_eq!(det.abs(), 1.0, epsilon = 1e-12);
                    assert_relative_eq!(det, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn map_composed_with_inverse_is_identity() {
        let sys = unit_system(4);
        let fwd = frame_map(&sys, &Label::from("B"), &Label::from("D")).unwrap();
        let bwd = frame_map(&sys, &Label::from("D"), &Label::from("B")).unwrap();
        let id = DMatrix::<f64>::identity(6, 6);
        assert_eq!(bwd.theta() * fwd.theta(), id);
    }

    #[test]
    fn composition_equals_direct_map_exactly() {
        let sys = unit_system(5);
        let labels = sys.labels().to_vec();
        for a in &labels {
            for b in &labels {
                for c in &labels {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let ab = frame_map(&sys, a, b).unwrap();
                    let bc = frame_map(&sys, b, c).unwrap();
                    let ac = frame_map(&sys, a, c).unwrap();
                    assert_eq!(bc.theta() * ab.theta(), *ac.theta());
                }
            }
        }
    }

    #[test]
    fn e1_switch_matches_hand_values() {
        let switched = switch_frame(&e1(), &Label::from("B")).unwrap();
        assert_eq!(switched.position_block(), dmatrix![1.0, 1.0; 1.0, 2.0]);
        assert_eq!(switched.momentum_block(), dmatrix![2.0, -1.0; -1.0, 1.0]);
        assert_eq!(switched.mixed_block(), DMatrix::zeros(2, 2));
        assert_eq!(switched.mean(), &DVector::zeros(4));
        assert_relative_eq!(switched.det_full(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_particle_switch_flips_means_keeps_cov() {
        let sys = unit_system(2);
        let mean = DVector::from_vec(vec![0.3, -0.2]);
        let cov = dmatrix![0.7, 0.1; 0.1, 0.6];
        let s = MomentState::new(sys, Label::from("A"), mean.clone(), cov.clone(), Ordering::Blocked)
            .unwrap();
        let switched = switch_frame(&s, &Label::from("B")).unwrap();
        assert_eq!(switched.cov(), &cov);
        assert_eq!(switched.mean(), &(-mean));
    }

    #[test]
    fn round_trip_is_exact_on_integer_data() {
        let s = e1();
        let round = switch_frame(&switch_frame(&s, &Label::from("B")).unwrap(), &Label::from("A"))
            .unwrap();
        assert_eq!(round.cov(), s.cov());
        assert_eq!(round.mean(), s.mean());
    }

    #[test]
    fn position_predictions_match_e1() {
        let s = e1();
        let pred = predict_position_moments(&s, &Label::from("B"), &Label::from("C"), &Label::from("A"))
            .unwrap();
        assert_relative_eq!(pred.var_of_target, 2.0);
        assert_relative_eq!(pred.cov_of_pair, 1.0);
        assert_relative_eq!(pred.reciprocal_variance, 1.0);
    }

    #[test]
    fn position_predictions_on_pure_state() {
        let s = MomentState::centered(
            unit_system(3),
            Label::from("A"),
            DMatrix::identity(4, 4) * 0.5,
            Ordering::Blocked,
        )
        .unwrap();
        let pred = predict_position_moments(&s, &Label::from("B"), &Label::from("C"), &Label::from("A"))
            .unwrap();
        assert_relative_eq!(pred.var_of_target, 1.0);
        assert_relative_eq!(pred.reciprocal_variance, 0.5);
    }

    #[test]
    fn momentum_predictions_match_e1() {
        let s = e1();
        let var = predict_momentum_cov(&s, &Label::from("B"), &Label::from("A"), &Label::from("A"))
            .unwrap();
        assert_relative_eq!(var, 2.0);
        let cov = predict_momentum_cov(&s, &Label::from("B"), &Label::from("A"), &Label::from("C"))
            .unwrap();
        assert_relative_eq!(cov, -1.0);
    }

    #[test]
    fn momentum_correlation_on_pure_state() {
        // From frame C, corr(p_A, p_B) = -1/sqrt(2) for the half-identity state.
        let s = MomentState::centered(
            unit_system(3),
            Label::from("A"),
            DMatrix::identity(4, 4) * 0.5,
            Ordering::Blocked,
        )
        .unwrap();
        let to = Label::from("C");
        let cov = predict_momentum_cov(&s, &to, &Label::from("A"), &Label::from("B")).unwrap();
        let va = predict_momentum_cov(&s, &to, &Label::from("A"), &Label::from("A")).unwrap();
        let vb = predict_momentum_cov(&s, &to, &Label::from("B"), &Label::from("B")).unwrap();
        let corr = cov / (va.sqrt() * vb.sqrt());
        assert_relative_eq!(corr, -1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mixed_prediction_matches_hand_example() {
        // cov_A(x_C, p_C) = 0.3 and cov_A(x_B, p_C) = 0.1 give
        // cov_B(x_C, p_C) = 0.2.
        let mut cov = DMatrix::<f64>::identity(4, 4);
        cov[(1, 3)] = 0.3;
        cov[(3, 1)] = 0.3;
        cov[(0, 3)] = 0.1;
        cov[(3, 0)] = 0.1;
        let s = MomentState::centered(unit_system(3), Label::from("A"), cov, Ordering::Blocked)
            .unwrap();
        let v = predict_mixed_cov(&s, &Label::from("B"), &Label::from("C"), &Label::from("C"))
            .unwrap();
        assert_relative_eq!(v, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn new_frame_is_not_a_valid_target() {
        let s = e1();
        let err = predict_mixed_cov(&s, &Label::from("B"), &Label::from("B"), &Label::from("C"))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidFrameChoice(_)));
    }

    #[test]
    fn predictions_agree_with_switch_frame() {
        // Dual-route check on a generic state, including old-frame targets.
        let sys = unit_system(4);
        let s = crate::random::random_state(&sys, &Label::from("B"), 11, (0.5, 2.5)).unwrap();
        let to = Label::from("D");
        let switched = switch_frame(&s, &to).unwrap();
        for k in switched.described().to_vec() {
            for l in switched.described().to_vec() {
                let xx = predict_position_cov(&s, &to, &k, &l).unwrap();
                assert_relative_eq!(xx, switched.xx(&k, &l).unwrap(), max_relative = 1e-12);
                let pp = predict_momentum_cov(&s, &to, &k, &l).unwrap();
                assert_relative_eq!(pp, switched.pp(&k, &l).unwrap(), max_relative = 1e-12);
                let xp = predict_mixed_cov(&s, &to, &k, &l).unwrap();
                assert_relative_eq!(xp, switched.xp(&k, &l).unwrap(), max_relative = 1e-12,
                    epsilon = 1e-13);
            }
        }
    }
}
