//! Property tests for the diagnostic reports on random physical states.

use proptest::prelude::*;
use qrf_core::diagnostics::{
    criteria_invariance, gaussian_purity, momentum_relation_report, particle_purities,
    rs_uncertainty_check, symplectic_spectrum, triangle_report,
};
use qrf_core::{random_state, Label, MomentState, Ordering, ParticleSystem};

fn state_for(seed: u64, n: usize) -> MomentState {
    let system = ParticleSystem::unit_masses(n).unwrap();
    let frame = system.labels()[seed as usize % n].clone();
    random_state(&system, &frame, seed, (0.5, 2.5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn physical_states_pass_the_uncertainty_gate(seed in 0u64..10_000, n in 2usize..7) {
        let s = state_for(seed, n);
        let report = rs_uncertainty_check(&s);
        prop_assert!(report.psd_margin >= -1e-9);
        for (_, det) in report.per_particle_dets {
            prop_assert!(det >= 0.25 - 1e-9, "single-particle det {det}");
        }
    }

    #[test]
    fn symplectic_spectrum_sits_above_vacuum(seed in 0u64..10_000, n in 2usize..6) {
        let s = state_for(seed, n);
        let nus = symplectic_spectrum(s.cov(), Ordering::Blocked).unwrap();
        prop_assert_eq!(nus.len(), n - 1);
        for nu in nus {
            prop_assert!(nu >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn triangle_relations_hold(seed in 0u64..10_000, n in 3usize..7) {
        let s = state_for(seed, n);
        let labels = s.system().labels().to_vec();
        let (i, j, k) = (&labels[0], &labels[1], &labels[2]);
        let report = triangle_report(&s, i, j, k).unwrap();
        prop_assert!(!report.is_degenerate());
        prop_assert!(report.constraint_residual.unwrap() <= 1e-8);
        prop_assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn momentum_relations_hold(seed in 0u64..10_000, n in 3usize..7) {
        let s = state_for(seed, n);
        let labels = s.system().labels().to_vec();
        for i in 0..n {
            for j in (i + 1)..n {
                let report = momentum_relation_report(&s, &labels[i], &labels[j]).unwrap();
                prop_assert!(report.variance_triangle_margin >= -1e-10, "{report:?}");
                if let Some(sum) = report.corr_sum {
                    prop_assert!(sum <= 1e-10, "{report:?}");
                }
                if let Some(res) = report.reciprocal_corr_residual {
                    prop_assert!(res <= 1e-9, "{report:?}");
                }
            }
        }
    }

    #[test]
    fn subsystem_purities_are_in_range(seed in 0u64..10_000, n in 2usize..6) {
        let s = state_for(seed, n);
        for (_, mu) in particle_purities(&s).unwrap() {
            prop_assert!(mu > 0.0 && mu <= 1.0 + 1e-9, "purity {mu}");
        }
    }

    #[test]
    fn criteria_agree_across_admissible_frames(seed in 0u64..10_000, n in 4usize..6) {
        let s = state_for(seed, n);
        let labels = s.system().labels().to_vec();
        let (k, l) = (labels[n - 2].clone(), labels[n - 1].clone());
        let frames: Vec<Label> = labels.into_iter().filter(|f| f != &k && f != &l).collect();
        let report = criteria_invariance(&s, &frames, &k, &l).unwrap();
        prop_assert!(report.pass, "prod dev {:e}, sum dev {:e}",
            report.max_rel_dev_prod, report.max_rel_dev_sum);
    }

    #[test]
    fn pure_states_have_unit_total_purity(seed in 0u64..10_000, n in 2usize..5) {
        let system = ParticleSystem::unit_masses(n).unwrap();
        let s = random_state(&system, &system.labels()[0].clone(), seed, (0.5, 0.5)).unwrap();
        let mu = gaussian_purity(s.cov()).unwrap();
        prop_assert!((mu - 1.0).abs() <= 1e-7, "total purity {mu}");
    }
}
