//! Property tests for the structural invariants of the library.

use proptest::prelude::*;

use dephasim_core::bloch::{self, EvolutionParams, PolarizationState};
use dephasim_core::counting::{self, MixtureSpec, OutcomeSequence};
use dephasim_core::influence::{self, DetectorSetup};
use dephasim_core::smatrix::{build_smatrix, transmission_probability, BarrierParams, Direction};

const TOL: f64 = 1e-12;

/// Lower bound for phases, kept strictly inside the (-pi, pi] domain.
const PHASE_MIN: f64 = 1e-3 - std::f64::consts::PI;

fn angles() -> impl Strategy<Value = BarrierParams> {
    (
        0.0..=std::f64::consts::FRAC_PI_2,
        PHASE_MIN..=std::f64::consts::PI,
        PHASE_MIN..=std::f64::consts::PI,
    )
        .prop_map(|(theta, phi, eta)| BarrierParams::new(theta, phi, eta).unwrap())
}

fn setups() -> impl Strategy<Value = DetectorSetup> {
    (angles(), angles(), 0.0..10.0f64, prop::bool::ANY).prop_map(|(l, r, flux, forward)| {
        let direction = if forward {
            Direction::Forward
        } else {
            Direction::Backward
        };
        DetectorSetup::new(l, r, flux, direction).unwrap()
    })
}

proptest! {
    #[test]
    fn smatrix_is_unitary_and_time_reversal_symmetric(params in angles()) {
        let s = build_smatrix(&params);
        prop_assert!(s.is_unitary(TOL));
        prop_assert!(s.is_time_reversal_symmetric(TOL));
    }

    #[test]
    fn transmission_and_reflection_probabilities_conserve(params in angles()) {
        let s = build_smatrix(&params);
        let total = transmission_probability(&params) + s.entry(1, 0).norm_sqr();
        prop_assert!((total - 1.0).abs() <= TOL);
    }

    #[test]
    fn eta_flip_only_changes_reflection_phases(
        theta in 0.0..=std::f64::consts::FRAC_PI_2,
        phi in PHASE_MIN..=std::f64::consts::PI,
        eta in PHASE_MIN..=std::f64::consts::PI,
    ) {
        let plus = build_smatrix(&BarrierParams::new(theta, phi, eta).unwrap());
        let minus = build_smatrix(&BarrierParams::new(theta, phi, -eta).unwrap());
        prop_assert!((plus.entry(0, 0) - minus.entry(0, 0)).norm() <= TOL);
        prop_assert!((plus.entry(1, 1) - minus.entry(1, 1)).norm() <= TOL);
        for row in 0..2 {
            for col in 0..2 {
                prop_assert!(
                    (plus.entry(row, col).norm() - minus.entry(row, col).norm()).abs() <= TOL
                );
            }
        }
    }

    #[test]
    fn closed_forms_match_the_matrix_oracle(setup in setups()) {
        let lambda = influence::lambda_oracle(&setup);
        prop_assert!((influence::damping_closed_form(&setup) - lambda.im).abs() <= TOL);
        prop_assert!((influence::induced_energy_shift(&setup) - lambda.re).abs() <= TOL);
    }

    #[test]
    fn damping_is_bounded_by_twice_the_flux(setup in setups()) {
        let damping = influence::damping_closed_form(&setup);
        prop_assert!(damping >= 0.0);
        prop_assert!(damping <= 2.0 * setup.flux() + TOL);
    }

    #[test]
    fn equal_eta_makes_influence_direction_independent(
        theta_l in 0.0..=std::f64::consts::FRAC_PI_2,
        theta_r in 0.0..=std::f64::consts::FRAC_PI_2,
        phi_l in PHASE_MIN..=std::f64::consts::PI,
        phi_r in PHASE_MIN..=std::f64::consts::PI,
        eta in PHASE_MIN..=std::f64::consts::PI,
        flux in 0.0..10.0f64,
    ) {
        let l = BarrierParams::new(theta_l, phi_l, eta).unwrap();
        let r = BarrierParams::new(theta_r, phi_r, eta).unwrap();
        let fwd = DetectorSetup::new(l, r, flux, Direction::Forward).unwrap();
        let bwd = fwd.reversed();
        prop_assert!(
            (influence::damping_closed_form(&fwd) - influence::damping_closed_form(&bwd)).abs()
                <= TOL
        );
        prop_assert!(
            (influence::induced_energy_shift(&fwd) - influence::induced_energy_shift(&bwd)).abs()
                <= TOL
        );
        let (dd, dvz) = influence::direction_asymmetry(&fwd);
        prop_assert!(dd.abs() <= TOL && dvz.abs() <= TOL);
    }

    #[test]
    fn asymmetry_matches_direction_differences_and_is_odd(setup in setups()) {
        let fwd = DetectorSetup::new(
            *setup.barrier_l(),
            *setup.barrier_r(),
            setup.flux(),
            Direction::Forward,
        ).unwrap();
        let bwd = fwd.reversed();
        let (dd, dvz) = influence::direction_asymmetry(&fwd);
        let dd_ref = influence::damping_closed_form(&fwd) - influence::damping_closed_form(&bwd);
        let dvz_ref =
            influence::induced_energy_shift(&fwd) - influence::induced_energy_shift(&bwd);
        prop_assert!((dd - dd_ref).abs() <= TOL);
        prop_assert!((dvz - dvz_ref).abs() <= TOL);

        // Exchanging the asymmetry phases flips the sign of delta_eta and
        // of both differences.
        let swapped_l = BarrierParams::new(
            setup.barrier_l().theta(),
            setup.barrier_l().phi(),
            setup.barrier_r().eta(),
        ).unwrap();
        let swapped_r = BarrierParams::new(
            setup.barrier_r().theta(),
            setup.barrier_r().phi(),
            setup.barrier_l().eta(),
        ).unwrap();
        let mirrored = DetectorSetup::new(swapped_l, swapped_r, setup.flux(), Direction::Forward)
            .unwrap();
        let (dd_m, dvz_m) = influence::direction_asymmetry(&mirrored);
        prop_assert!((dd + dd_m).abs() <= TOL);
        prop_assert!((dvz + dvz_m).abs() <= TOL);
    }

    #[test]
    fn swapping_barriers_preserves_damping_and_flips_shift(
        theta_l in 0.0..=std::f64::consts::FRAC_PI_2,
        theta_r in 0.0..=std::f64::consts::FRAC_PI_2,
        phi_l in PHASE_MIN..=std::f64::consts::PI,
        phi_r in PHASE_MIN..=std::f64::consts::PI,
        eta in PHASE_MIN..=std::f64::consts::PI,
        flux in 0.0..10.0f64,
    ) {
        let l = BarrierParams::new(theta_l, phi_l, eta).unwrap();
        let r = BarrierParams::new(theta_r, phi_r, eta).unwrap();
        let original = DetectorSetup::new(l, r, flux, Direction::Forward).unwrap();
        let swapped = DetectorSetup::new(r, l, flux, Direction::Forward).unwrap();
        prop_assert!(
            (influence::damping_closed_form(&original)
                - influence::damping_closed_form(&swapped)).abs() <= TOL
        );
        prop_assert!(
            (influence::induced_energy_shift(&original)
                + influence::induced_energy_shift(&swapped)).abs() <= TOL
        );
    }

    #[test]
    fn count_distribution_matches_sequence_enumeration(
        rho_ll in 0.0..=1.0f64,
        p_l in 0.0..=1.0f64,
        p_r in 0.0..=1.0f64,
        n in 1usize..=12,
    ) {
        let spec = MixtureSpec::from_occupation(rho_ll, p_l, p_r).unwrap();
        let dist = counting::count_distribution(&spec, n);
        let mut sums = vec![0.0; n + 1];
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let sequence = OutcomeSequence::new(bits).unwrap();
            let p = counting::sequence_probability(&sequence, &spec);
            sums[sequence.count_ones()] += p;
            total += p;
        }
        prop_assert!((total - 1.0).abs() <= TOL);
        for (q, &sum) in sums.iter().enumerate() {
            prop_assert!((dist.prob(q) - sum).abs() <= TOL);
        }
    }

    #[test]
    fn window_correlation_symmetry_and_normalization(
        rho_ll in 0.0..=1.0f64,
        p_l in 0.0..=1.0f64,
        p_r in 0.0..=1.0f64,
        n1 in 1usize..=8,
        n2 in 1usize..=8,
    ) {
        let spec = MixtureSpec::from_occupation(rho_ll, p_l, p_r).unwrap();
        let mut sum = 0.0;
        for q1 in 0..=n1 {
            for q2 in 0..=n2 {
                let value = counting::window_correlation(&spec, n1, n2, q1, q2);
                let mirrored = counting::window_correlation(&spec, n2, n1, q2, q1);
                prop_assert_eq!(value, mirrored);
                sum += value;
            }
        }
        prop_assert!(sum.abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_never_increases_along_trajectories(
        px in -0.7..0.7f64,
        py in -0.7..0.7f64,
        pz in -0.1..0.1f64,
        vx in -2.0..2.0f64,
        vz in -2.0..2.0f64,
        d in 0.0..2.0f64,
    ) {
        let p0 = PolarizationState::new(px, py, pz).unwrap();
        let params = EvolutionParams::new([vx, 0.0, vz], d).unwrap();
        let step = (bloch::max_step(&params)).min(0.05);
        let trajectory = bloch::evolve(&p0, &params, 4.0, step).unwrap();
        let mut previous = f64::INFINITY;
        for (_, state) in trajectory.iter() {
            prop_assert!(state.norm() <= previous + TOL);
            previous = state.norm();
        }
        // Without damping the norm is conserved to integration tolerance.
        let free = EvolutionParams::new([vx, 0.0, vz], 0.0).unwrap();
        let conserved = bloch::evolve(&p0, &free, 4.0, step).unwrap();
        prop_assert!((conserved.final_state().norm() - p0.norm()).abs() <= 1e-9);
    }

    #[test]
    fn pz_conserved_without_tunneling(
        px in -0.5..0.5f64,
        py in -0.5..0.5f64,
        pz in -0.5..0.5f64,
        vz in -3.0..3.0f64,
        d in 0.0..3.0f64,
    ) {
        let p0 = PolarizationState::new(px, py, pz).unwrap();
        let params = EvolutionParams::new([0.0, 0.0, vz], d).unwrap();
        let step = (bloch::max_step(&params)).min(0.05);
        let trajectory = bloch::evolve(&p0, &params, 2.0, step).unwrap();
        for (_, state) in trajectory.iter() {
            prop_assert!((state.pz() - pz).abs() < TOL);
        }
    }
}
