//! Time evolution under perspective-dependent quadratic Hamiltonians.
//!
//! A Hamiltonian `H = (1/2) R^T G R` with symmetric `G` propagates moments
//! through the symplectic matrix `S(t) = exp(Omega G t)`:
//! `mean(t) = S mean(0)`, `cov(t) = S cov(0) S^T`. The free Hamiltonian has
//! `G` supported on the momentum block only, so `Omega G` is nilpotent and
//! the exponential truncates after the linear term.
//!
//! `free_evolution_closed_form` rebuilds the same evolution from scalar
//! moment formulas (relative-velocity covariances), giving an independent
//! second route for every entry.

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::ordering::{omega, Ordering};
use crate::state::MomentState;
use crate::system::{Label, ParticleSystem};
use crate::tol::SYM_TOL;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// `H = (1/2) R^T G R` for the described particles of one perspective,
/// with `R` in blocked ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    frame: Label,
    matrix: DMatrix<f64>,
}

impl QuadraticHamiltonian {
    pub fn frame(&self) -> &Label {
        &self.frame
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// True when the position and mixed blocks vanish identically, so the
    /// propagator is the exact nilpotent truncation.
    pub fn is_momentum_only(&self) -> bool {
        let n = self.n_modes();
        for i in 0..n {
            for j in 0..n {
                if self.matrix[(i, j)] != 0.0 || self.matrix[(i, n + j)] != 0.0
                    || self.matrix[(n + i, j)] != 0.0
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Wraps a caller-supplied symmetric coefficient matrix.
pub fn quadratic_hamiltonian(frame: &Label, g: DMatrix<f64>) -> Result<QuadraticHamiltonian> {
    let d = g.nrows();
    if d != g.ncols() || !d.is_multiple_of(2) {
        return Err(Error::OddDimension(d));
    }
    let mut max_asym: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            max_asym = max_asym.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    if max_asym > SYM_TOL {
        return Err(Error::NonSymmetric {
            max_asym,
            tol: SYM_TOL,
        });
    }
    Ok(QuadraticHamiltonian {
        frame: frame.clone(),
        matrix: g,
    })
}

/// The free perspective Hamiltonian: kinetic terms of the described
/// particles plus the constraint-induced `(sum p)^2 / (2 m_frame)` coupling.
pub fn free_hamiltonian(system: &ParticleSystem, frame: &Label) -> Result<QuadraticHamiltonian> {
    let described = system.described(frame)?;
    let n = described.len();
    let frame_mass = system.mass(frame)?;
    let mut g = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (i, a) in described.iter().enumerate() {
        for j in 0..n {
            g[(n + i, n + j)] = 1.0 / frame_mass;
        }
        g[(n + i, n + i)] += 1.0 / system.mass(a)?;
    }
    Ok(QuadraticHamiltonian {
        frame: frame.clone(),
        matrix: g,
    })
}

/// Symplectic propagator `S(t) = exp(Omega G t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: DMatrix<f64>,
    time: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Max-entry residual of `S Omega S^T - Omega`.
    pub fn symplectic_residual(&self) -> f64 {
        let n = self.matrix.nrows() / 2;
        let om = omega(n, Ordering::Blocked);
        (&self.matrix * &om * self.matrix.transpose() - om)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Propagator for `hamiltonian` over time `t`.
pub fn propagator(hamiltonian: &QuadraticHamiltonian, t: f64) -> Propagator {
    let n = hamiltonian.n_modes();
    let generator = omega(n, Ordering::Blocked) * hamiltonian.matrix();
    let matrix = if hamiltonian.is_momentum_only() {
        // Omega G = [[0, G_pp], [0, 0]] is nilpotent of order two.
        DMatrix::identity(2 * n, 2 * n) + generator * t
    } else {
        expm(&(generator * t))
    };
    Propagator { matrix, time: t }
}

/// Propagates mean and covariance: `S mean`, `S cov S^T`.
pub fn evolve(state: &MomentState, hamiltonian: &QuadraticHamiltonian, t: f64) -> Result<MomentState> {
    if hamiltonian.frame() != state.frame() {
        return Err(Error::FrameMismatch {
            hamiltonian: hamiltonian.frame().clone(),
            state: state.frame().clone(),
        });
    }
    if hamiltonian.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n_modes(),
            got: 2 * hamiltonian.n_modes(),
        });
    }
    let blocked = state.reorder(Ordering::Blocked);
    let s = propagator(hamiltonian, t);
    let mean = s.matrix() * blocked.mean();
    let cov = s.matrix() * blocked.cov() * s.matrix().transpose();
    // The exact conjugation is symmetric; halve out the rounding asymmetry.
    let cov = (&cov + cov.transpose()) * 0.5;
    let evolved = MomentState::new(
        state.system().clone(),
        state.frame().clone(),
        mean,
        cov,
        Ordering::Blocked,
    )?;
    Ok(evolved.reorder(state.ordering()))
}

/// Free evolution rebuilt from per-moment scalar formulas.
///
/// Momentum moments are copied unchanged; mixed and position moments gain
/// the relative-velocity covariance terms linear and quadratic in `t`.
/// Agrees with `evolve(state, free_hamiltonian(..), t)` to rounding.
pub fn free_evolution_closed_form(state: &MomentState, t: f64) -> Result<MomentState> {
    let blocked = state.reorder(Ordering::Blocked);
    let system = state.system();
    let frame_mass = system.mass(state.frame())?;
    let described = blocked.described().to_vec();
    let n = described.len();
    let masses: Vec<f64> = described
        .iter()
        .map(|l| system.mass(l))
        .collect::<Result<_>>()?;

    let pp = blocked.momentum_block();
    let xp = blocked.mixed_block();
    let xx = blocked.position_block();

    let pp_row_sum: Vec<f64> = (0..n).map(|k| (0..n).map(|l| pp[(l, k)]).sum()).collect();
    let pp_total: f64 = pp_row_sum.iter().sum();
    let xp_row_sum: Vec<f64> = (0..n).map(|j| (0..n).map(|l| xp[(j, l)]).sum()).collect();

    // cov(v_j, p_k) and cov(v_j, v_k) from the velocity observable
    // v_j = p_j / m_j + (sum_l p_l) / m_frame.
    let cov_v_p = |j: usize, k: usize| pp[(j, k)] / masses[j] + pp_row_sum[k] / frame_mass;
    let cov_v_v = |j: usize, k: usize| {
        pp[(j, k)] / (masses[j] * masses[k])
            + pp_row_sum[j] / (masses[j] * frame_mass)
            + pp_row_sum[k] / (masses[k] * frame_mass)
            + pp_total / (frame_mass * frame_mass)
    };
    // cov(x_j, v_k)
    let cov_x_v = |j: usize, k: usize| xp[(j, k)] / masses[k] + xp_row_sum[j] / frame_mass;

    let mut cov = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            cov[(n + j, n + k)] = pp[(j, k)];
            cov[(j, n + k)] = xp[(j, k)] + t * cov_v_p(j, k);
            cov[(j, k)] = xx[(j, k)] + t * (cov_x_v(j, k) + cov_x_v(k, j)) + t * t * cov_v_v(j, k);
        }
    }
    for j in 0..n {
        for k in 0..n {
            cov[(n + k, j)] = cov[(j, n + k)];
        }
    }

    let mean_p_sum: f64 = (0..n).map(|k| blocked.mean()[n + k]).sum();
    let mut mean = blocked.mean().clone();
    for j in 0..n {
        let v_mean = blocked.mean()[n + j] / masses[j] + mean_p_sum / frame_mass;
        mean[j] += t * v_mean;
    }

    let evolved = MomentState::new(
        system.clone(),
        state.frame().clone(),
        mean,
        cov,
        Ordering::Blocked,
    )?;
    Ok(evolved.reorder(state.ordering()))
}

/// One sample of the single-particle uncertainty series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyPoint {
    pub t: f64,
    /// `var(x_J)(t) * var(p_J)(t)` under free evolution.
    pub uncertainty_product: f64,
    /// Determinant of particle J's 2x2 covariance block at `t`.
    pub det2x2: f64,
}

/// Free-evolution series of the uncertainty product and single-particle
/// determinant for particle `j`, as explicit polynomials in `t` with
/// coefficients assembled from the initial moments.
pub fn uncertainty_evolution(
    state: &MomentState,
    j: &Label,
    times: &[f64],
) -> Result<Vec<UncertaintyPoint>> {
    let blocked = state.reorder(Ordering::Blocked);
    let system = state.system();
    let frame_mass = system.mass(state.frame())?;
    let mass_j = system.mass(j)?;
    let js = blocked.slot(j)?;
    let n = blocked.n_modes();

    let pp = blocked.momentum_block();
    let xp = blocked.mixed_block();
    let sx2 = blocked.position_block()[(js, js)];
    let sp2 = pp[(js, js)];
    let cxp_jj = xp[(js, js)];

    let sum_xp_j: f64 = (0..n).map(|l| xp[(js, l)]).sum();
    let sum_pp_j: f64 = (0..n).map(|l| pp[(js, l)]).sum();
    let sum_pp_all: f64 = (0..n).flat_map(|k| (0..n).map(move |l| (k, l))).map(|(k, l)| pp[(k, l)]).sum();

    let ur_c0 = sx2 * sp2;
    let ur_c1 = (2.0 / mass_j * cxp_jj + 2.0 / frame_mass * sum_xp_j) * sp2;
    let ur_c2 = (sp2 / (mass_j * mass_j)
        + 2.0 / (frame_mass * mass_j) * sum_pp_j
        + sum_pp_all / (frame_mass * frame_mass))
        * sp2;

    let det_c0 = sx2 * sp2 - cxp_jj * cxp_jj;
    let det_c1 = (2.0 / frame_mass)
        * (0..n)
            .map(|l| sp2 * xp[(js, l)] - pp[(js, l)] * cxp_jj)
            .sum::<f64>();
    let det_c2 = (1.0 / (frame_mass * frame_mass))
        * (0..n)
            .flat_map(|k| (0..n).map(move |l| (k, l)))
            .map(|(k, l)| sp2 * pp[(k, l)] - pp[(js, k)] * pp[(js, l)])
            .sum::<f64>();

    Ok(times
        .iter()
        .map(|&t| UncertaintyPoint {
            t,
            uncertainty_product: ur_c0 + ur_c1 * t + ur_c2 * t * t,
            det2x2: det_c0 + det_c1 * t + det_c2 * t * t,
        })
        .collect())
}

/// Closed-form single-particle free evolution in an abstract (non-
/// relational) frame: the heavy-frame baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselinePoint {
    pub t: f64,
    pub cov_xp: f64,
    pub uncertainty_product: f64,
    /// Constant in time.
    pub det: f64,
}

/// `cov(x,p)(t) = cov(0) + (t/m) var(p)`, the quadratic uncertainty
/// product, and the (constant) determinant.
pub fn nonrelational_baseline(
    sigma_x2: f64,
    sigma_p2: f64,
    cov_xp: f64,
    mass: f64,
    t: f64,
) -> Result<BaselinePoint> {
    if mass <= 0.0 || mass.is_nan() {
        return Err(Error::NonPositiveParameter {
            name: "mass",
            value: mass,
        });
    }
    Ok(BaselinePoint {
        t,
        cov_xp: cov_xp + t / mass * sigma_p2,
        uncertainty_product: sigma_x2 * sigma_p2
            + t / mass * 2.0 * cov_xp * sigma_p2
            + (t / mass).powi(2) * sigma_p2 * sigma_p2,
        det: sigma_x2 * sigma_p2 - cov_xp * cov_xp,
    })
}

/// First and second moments of the relative velocity of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityMoments {
    pub particle: Label,
    pub frame: Label,
    /// `<p_J>/m_J + <sum p>/m_frame`
    pub mean_velocity: f64,
    pub cov_with_position: BTreeMap<Label, f64>,
    pub cov_with_momentum: BTreeMap<Label, f64>,
    pub cov_with_velocity: BTreeMap<Label, f64>,
}

/// Velocity observable moments of particle `j` in the state's frame.
pub fn velocity_moments(state: &MomentState, j: &Label) -> Result<VelocityMoments> {
    let blocked = state.reorder(Ordering::Blocked);
    let system = state.system();
    let frame_mass = system.mass(state.frame())?;
    let mass_j = system.mass(j)?;
    let jphs = blocked.slot(j)?;
    let n = blocked.n_modes();
    let described = blocked.described().to_vec();
    let masses: Vec<f64> = described
        .iter()
        .map(|l| system.mass(l))
        .collect::<Result<_>>()?;

    let pp = blocked.momentum_block();
    let xp = blocked.mixed_block();
    let pp_row_sum: Vec<f64> = (0..n).map(|k| (0..n).map(|l| pp[(l, k)]).sum()).collect();
    let pp_total: f64 = pp_row_sum.iter().sum();
    let xp_row_sum: Vec<f64> = (0..n).map(|k| (0..n).map(|l| xp[(k, l)]).sum()).collect();

    let mean_p_sum: f64 = (0..n).map(|k| blocked.mean()[n + k]).sum();
    let mean_velocity = blocked.mean()[n + jphs] / mass_j + mean_p_sum / frame_mass;

    let mut cov_with_position = BTreeMap::new();
    let mut cov_with_momentum = BTreeMap::new();
    let mut cov_with_velocity = BTreeMap::new();
    for (k, label) in described.iter().enumerate() {
        cov_with_momentum.insert(
            label.clone(),
            pp[(jphs, k)] / mass_j + pp_row_sum[k] / frame_mass,
        );
        cov_with_position.insert(
            label.clone(),
            xp[(k, jphs)] / mass_j + xp_row_sum[k] / frame_mass,
        );
        cov_with_velocity.insert(
            label.clone(),
            pp[(jphs, k)] / (mass_j * masses[k])
                + pp_row_sum[jphs] / (mass_j * frame_mass)
                + pp_row_sum[k] / (masses[k] * frame_mass)
                + pp_total / (frame_mass * frame_mass),
        );
    }

    Ok(VelocityMoments {
        particle: j.clone(),
        frame: state.frame().clone(),
        mean_velocity,
        cov_with_position,
        cov_with_momentum,
        cov_with_velocity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_state;
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
    fn free_hamiltonian_momentum_block() {
        let h = free_hamiltonian(&unit_system(3), &Label::from("A")).unwrap();
        let g = h.matrix();
        assert_eq!(
            g.view((2, 2), (2, 2)).clone_owned(),
            dmatrix![2.0, 1.0; 1.0, 2.0]
        );
        assert_eq!(g.view((0, 0), (2, 2)).clone_owned(), DMatrix::zeros(2, 2));
        assert!(h.is_momentum_only());
    }

    #[test]
    fn free_hamiltonian_two_particles() {
        let h = free_hamiltonian(&unit_system(2), &Label::from("A")).unwrap();
        assert_eq!(h.matrix()[(1, 1)], 2.0);
    }

    #[test]
    fn heavy_frame_decouples() {
        let sys = ParticleSystem::new([
            (Label::from("A"), 1e12),
            (Label::from("B"), 1.0),
            (Label::from("C"), 1.0),
        ])
        .unwrap();
        let h = free_hamiltonian(&sys, &Label::from("A")).unwrap();
        let g = h.matrix().view((2, 2), (2, 2)).clone_owned();
        assert!((g - DMatrix::identity(2, 2)).iter().all(|v| v.abs() <= 1e-11));
    }

    #[test]
    fn zero_hamiltonian_freezes() {
        let h = quadratic_hamiltonian(&Label::from("A"), DMatrix::zeros(4, 4)).unwrap();
        let s = propagator(&h, 3.7);
        assert_eq!(s.matrix(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn asymmetric_hamiltonian_rejected() {
        let mut g = DMatrix::identity(4, 4);
        g[(0, 1)] = 1e-3;
        let err = quadratic_hamiltonian(&Label::from("A"), g).unwrap_err();
        assert!(matches!(err, Error::NonSymmetric { .. }));
    }

    #[test]
    fn free_propagator_is_nilpotent_truncation() {
        let h = free_hamiltonian(&unit_system(3), &Label::from("A")).unwrap();
        let s = propagator(&h, 1.0);
        let g_pp = dmatrix![2.0, 1.0; 1.0, 2.0];
        assert_eq!(s.matrix().view((0, 2), (2, 2)).clone_owned(), g_pp);
        assert_eq!(
            s.matrix().view((0, 0), (2, 2)).clone_owned(),
            DMatrix::identity(2, 2)
        );
        assert_eq!(s.matrix().view((2, 0), (2, 2)).clone_owned(), DMatrix::zeros(2, 2));
        assert!(s.symplectic_residual() < 1e-15);
    }

    #[test]
    fn zero_time_propagator_is_identity() {
        let h = quadratic_hamiltonian(&Label::from("A"), DMatrix::identity(4, 4)).unwrap();
        assert_eq!(propagator(&h, 0.0).matrix(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn harmonic_quarter_period_rotates() {
        let h = quadratic_hamiltonian(&Label::from("A"), DMatrix::identity(2, 2)).unwrap();
        let s = propagator(&h, std::f64::consts::FRAC_PI_2);
        let expected = dmatrix![0.0, 1.0; -1.0, 0.0];
        assert!((s.matrix() - expected).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn e1_free_evolution_blocks() {
        let h = free_hamiltonian(&unit_system(3), &Label::from("A")).unwrap();
        let evolved = evolve(&e1(), &h, 1.0).unwrap();
        assert_eq!(evolved.position_block(), dmatrix![6.0, 4.0; 4.0, 6.0]);
        assert_eq!(evolved.mixed_block(), dmatrix![2.0, 1.0; 1.0, 2.0]);
        assert_eq!(evolved.momentum_block(), DMatrix::identity(2, 2));
        assert_relative_eq!(evolved.det_full(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let s = random_state(&unit_system(4), &Label::from("B"), 9, (0.5, 2.0)).unwrap();
        let h = free_hamiltonian(&unit_system(4), &Label::from("B")).unwrap();
        let evolved = evolve(&s, &h, 0.0).unwrap();
        assert_eq!(evolved.cov(), s.cov());
        assert_eq!(evolved.mean(), s.mean());
    }

    #[test]
    fn frame_mismatch_rejected() {
        let h = free_hamiltonian(&unit_system(3), &Label::from("B")).unwrap();
        let err = evolve(&e1(), &h, 1.0).unwrap_err();
        assert!(matches!(err, Error::FrameMismatch { .. }));
    }

    #[test]
    fn two_particle_vacuum_spreads() {
        let sys = unit_system(2);
        let s = MomentState::centered(
            sys.clone(),
            Label::from("A"),
            DMatrix::identity(2, 2) * 0.5,
            Ordering::Blocked,
        )
        .unwrap();
        let h = free_hamiltonian(&sys, &Label::from("A")).unwrap();
        let evolved = evolve(&s, &h, 1.0).unwrap();
        assert_relative_eq!(evolved.var_x(&Label::from("B")).unwrap(), 2.5);
        assert_relative_eq!(
            evolved.xp(&Label::from("B"), &Label::from("B")).unwrap(),
            1.0
        );
        assert_relative_eq!(evolved.det_full(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_matches_symplectic_route() {
        for n in 2..5 {
            let sys = unit_system(n);
            let frame = Label::from("A");
            let s = random_state(&sys, &frame, 31 + n as u64, (0.5, 2.5)).unwrap();
            let h = free_hamiltonian(&sys, &frame).unwrap();
            for t in [0.0, 0.5, 1.0, 3.0] {
                let a = evolve(&s, &h, t).unwrap();
                let b = free_evolution_closed_form(&s, t).unwrap();
                let dev = (a.cov() - b.cov()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let scale = a.cov().iter().fold(1.0f64, |m, v| m.max(v.abs()));
                assert!(dev / scale <= 1e-10, "n={n} t={t}: dev {dev:e}");
                let mdev = (a.mean() - b.mean()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(mdev <= 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_momentum_block_is_bit_equal() {
        let sys = unit_system(3);
        let s = random_state(&sys, &Label::from("A"), 77, (0.5, 2.0)).unwrap();
        let evolved = free_evolution_closed_form(&s, 2.5).unwrap();
        assert_eq!(evolved.momentum_block(), s.momentum_block());
        let symplectic = evolve(&s, &free_hamiltonian(&sys, &Label::from("A")).unwrap(), 2.5)
            .unwrap();
        assert_eq!(symplectic.momentum_block(), s.momentum_block());
    }

    #[test]
    fn e1_sigma_x_closed_form() {
        let evolved = free_evolution_closed_form(&e1(), 1.0).unwrap();
        assert_relative_eq!(evolved.var_x(&Label::from("B")).unwrap(), 6.0);
    }

    #[test]
    fn e1_uncertainty_series() {
        let pts = uncertainty_evolution(&e1(), &Label::from("B"), &[0.0, 0.5, 1.0, 2.0]).unwrap();
        for p in &pts {
            assert_relative_eq!(p.det2x2, 1.0 + p.t * p.t, epsilon = 1e-12);
            assert_relative_eq!(p.uncertainty_product, 1.0 + 5.0 * p.t * p.t, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_particle_vacuum_det_is_constant() {
        let sys = unit_system(2);
        let s = MomentState::centered(
            sys,
            Label::from("A"),
            DMatrix::identity(2, 2) * 0.5,
            Ordering::Blocked,
        )
        .unwrap();
        let pts = uncertainty_evolution(&s, &Label::from("B"), &[0.0, 1.0, 7.0]).unwrap();
        for p in pts {
            assert_relative_eq!(p.det2x2, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn uncertainty_series_matches_evolve() {
        let sys = unit_system(4);
        let s = random_state(&sys, &Label::from("B"), 4, (0.5, 2.0)).unwrap();
        let h = free_hamiltonian(&sys, &Label::from("B")).unwrap();
        let j = Label::from("C");
        for t in [0.3, 1.7, 9.0] {
            let evolved = evolve(&s, &h, t).unwrap();
            let block = evolved.particle_block(&j).unwrap();
            let point = uncertainty_evolution(&s, &j, &[t]).unwrap()[0];
            let ur = block[(0, 0)] * block[(1, 1)];
            let det = block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)];
            assert_relative_eq!(point.uncertainty_product, ur, max_relative = 1e-9);
            assert_relative_eq!(point.det2x2, det, max_relative = 1e-9);
        }
    }

    #[test]
    fn baseline_vacuum_values() {
        let p = nonrelational_baseline(0.5, 0.5, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.cov_xp, 0.5);
        assert_relative_eq!(p.uncertainty_product, 0.5);
        assert_relative_eq!(p.det, 0.25);
        let p0 = nonrelational_baseline(0.5, 0.5, 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(p0.cov_xp, 0.0);
        assert_relative_eq!(p0.uncertainty_product, 0.25);
    }

    #[test]
    fn baseline_rejects_bad_mass() {
        let err = nonrelational_baseline(0.5, 0.5, 0.0, -1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { .. }));
    }

    #[test]
    fn velocity_moments_on_e1() {
        let v = velocity_moments(&e1(), &Label::from("B")).unwrap();
        assert_relative_eq!(v.mean_velocity, 0.0);
        assert_relative_eq!(v.cov_with_velocity[&Label::from("B")], 5.0);
    }

    #[test]
    fn velocity_mean_two_particles() {
        let sys = unit_system(2);
        let mean = DVector::from_vec(vec![0.0, 1.0]);
        let s = MomentState::new(
            sys,
            Label::from("A"),
            mean,
            DMatrix::identity(2, 2) * 0.5,
            Ordering::Blocked,
        )
        .unwrap();
        let v = velocity_moments(&s, &Label::from("B")).unwrap();
        assert_relative_eq!(v.mean_velocity, 2.0);
    }

    #[test]
    fn velocity_addition_identity() {
        // <v_{J(K)}>_K = <v_{J(I)}>_I - <v_{K(I)}>_I on free states.
        let sys = ParticleSystem::new([
            (Label::from("A"), 1.5),
            (Label::from("B"), 0.7),
            (Label::from("C"), 2.2),
            (Label::from("D"), 1.0),
        ])
        .unwrap();
        let s = random_state(&sys, &Label::from("A"), 13, (0.5, 2.0)).unwrap();
        let j = Label::from("B");
        let k = Label::from("C");
        let v_j_from_a = velocity_moments(&s, &j).unwrap().mean_velocity;
        let v_k_from_a = velocity_moments(&s, &k).unwrap().mean_velocity;
        let in_k = crate::frame::switch_frame(&s, &k).unwrap();
        let v_j_from_k = velocity_moments(&in_k, &j).unwrap().mean_velocity;
        assert_relative_eq!(v_j_from_k, v_j_from_a - v_k_from_a, epsilon = 1e-12);
    }

    #[test]
    fn determinant_conserved_for_generic_quadratic() {
        // Indefinite G gives hyperbolic propagators; keep |t| * ||G|| small
        // enough that the conjugated covariance stays well conditioned for
        // the determinant comparison.
        let sys = unit_system(3);
        let s = random_state(&sys, &Label::from("A"), 21, (0.5, 2.0)).unwrap();
        let mut g = DMatrix::<f64>::zeros(4, 4);
        let vals = [0.4, -0.2, 0.1, 0.3, -0.5, 0.2, 0.6, -0.1, 0.05, 0.25];
        let mut it = vals.iter();
        for i in 0..4 {
            for j in i..4 {
                let v = 0.05 * *it.next().unwrap();
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        let h = quadratic_hamiltonian(&Label::from("A"), g).unwrap();
        let d0 = s.det_full();
        for t in [0.5, 2.0, 10.0] {
            let evolved = evolve(&s, &h, t).unwrap();
            assert_relative_eq!(evolved.det_full(), d0, max_relative = 1e-9);
            assert!(propagator(&h, t).symplectic_residual() < 1e-9);
        }
    }

    #[test]
    fn determinant_conserved_for_confining_quadratic_at_long_times() {
        // Positive definite G keeps the propagator bounded, so conservation
        // can be checked far out in time.
        let sys = unit_system(3);
        let s = random_state(&sys, &Label::from("A"), 22, (0.5, 2.0)).unwrap();
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.2, 0.0, -0.1, //
                0.1, 0.8, 0.3, 0.0, //
                0.0, -0.2, 1.1, 0.2, //
                0.2, 0.0, 0.1, 0.9,
            ],
        );
        let g = &m * m.transpose() * 0.5 + DMatrix::identity(4, 4) * 0.2;
        let g = (&g + g.transpose()) * 0.5;
        let h = quadratic_hamiltonian(&Label::from("A"), g).unwrap();
        let d0 = s.det_full();
        for t in [1.0, 10.0, 100.0] {
            let evolved = evolve(&s, &h, t).unwrap();
            assert_relative_eq!(evolved.det_full(), d0, max_relative = 1e-9);
            assert!(propagator(&h, t).symplectic_residual() < 1e-9);
        }
    }

    #[test]
    fn semigroup_property() {
        let sys = unit_system(3);
        let s = random_state(&sys, &Label::from("A"), 8, (0.5, 2.0)).unwrap();
        let h = free_hamiltonian(&sys, &Label::from("A")).unwrap();
        let two_step = evolve(&evolve(&s, &h, 1.25).unwrap(), &h, 0.75).unwrap();
        let one_step = evolve(&s, &h, 2.0).unwrap();
        let dev = (two_step.cov() - one_step.cov())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dev <= 1e-9);
    }
}
