//! Property tests over random parameters.

use approx::assert_relative_eq;
use proptest::prelude::*;

use planar_pendulum::cli::Range;
use planar_pendulum::elements::{element_matrix, Operator};
use planar_pendulum::rotor::{free_rotor_wavefunction, make_grid, topological_index, InteractionParams, RotorState};
use planar_pendulum::spectrum::{solve_full_spectrum, solve_spectrum};
use planar_pendulum::sudden::{SwitchOffCoefficients, SwitchOnCoefficients};
use planar_pendulum::tdse::{propagate, PulseSchedule};

const J_MAX: usize = 40;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_sorted_and_bounded(eta in -40.0f64..0.0, zeta in 0.0f64..40.0) {
        let p = InteractionParams::new(eta, zeta).unwrap();
        let s = solve_spectrum(&p, 9, J_MAX).unwrap();
        let e = s.energies();
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        // ground state lies between the potential minimum and the free-rotor value
        let v_min = (-eta.abs() - zeta).min(eta.abs() - zeta).min(if eta.abs() < 2.0 * zeta { eta * eta / (4.0 * zeta) } else { f64::MAX });
        prop_assert!(e[0] >= v_min - 1e-9 && e[0] <= 1e-9 - zeta / 2.0);
    }

    #[test]
    fn elements_symmetric_and_bounded(eta in -30.0f64..0.0, zeta in 1.0f64..40.0) {
        let s = solve_spectrum(&InteractionParams::new(eta, zeta).unwrap(), 6, J_MAX).unwrap();
        let cos = element_matrix(&s, Operator::Cos);
        let cos2 = element_matrix(&s, Operator::Cos2);
        for i in 0..6 {
            prop_assert!(cos[(i, i)].abs() <= 1.0 + 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&cos2[(i, i)]));
            for j in 0..6 {
                prop_assert!((cos[(i, j)] - cos[(j, i)]).abs() < 1e-12);
                if s.states[i].label != s.states[j].label {
                    prop_assert!(cos[(i, j)].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn switch_coefficients_complete(eta in -30.0f64..0.0, zeta in 0.0f64..30.0, n0 in 0usize..5, j0 in -3i64..=3) {
        let s = solve_full_spectrum(&InteractionParams::new(eta, zeta).unwrap(), J_MAX).unwrap();
        let off = SwitchOffCoefficients::from_spectrum(&s, n0, J_MAX).unwrap();
        prop_assert!(off.parseval_defect() < 1e-10);
        prop_assert!(off.symmetry_defect() < 1e-12);
        let on = SwitchOnCoefficients::from_spectrum(&s, j0).unwrap();
        prop_assert!(on.parseval_defect() < 1e-10);
    }

    #[test]
    fn kappa_scales(eta in -40.0f64..0.0, zeta in 0.1f64..40.0, s in 0.1f64..10.0) {
        // κ is invariant under (η, ζ) → (s η, s² ζ)
        let a = topological_index(&InteractionParams::new(eta, zeta).unwrap()).unwrap().kappa;
        let b = topological_index(&InteractionParams::new(s * eta, s * s * zeta).unwrap()).unwrap().kappa;
        assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn propagation_unitary(eta in -20.0f64..0.0, zeta in 0.0f64..30.0, j in -4i64..=4) {
        let grid = make_grid(128).unwrap();
        let psi = free_rotor_wavefunction(RotorState::new(j), &grid).unwrap();
        let sched = PulseSchedule::frozen(InteractionParams::new(eta, zeta).unwrap(), 0.5).unwrap();
        let traj = propagate(&psi, &sched, 2e-3, 50).unwrap();
        prop_assert!(traj.norm_drift() < 1e-11);
    }

    #[test]
    fn range_endpoints(start in -50.0f64..50.0, len in 0.0f64..20.0, step in 0.05f64..2.0) {
        let r: Range = format!("{start}:{}:{step}", start + len).parse().unwrap();
        let v = r.values();
        prop_assert_eq!(v[0], start);
        let last = *v.last().unwrap();
        prop_assert!((last - (start + len)).abs() <= step / 2.0 + 1e-9);
    }
}
