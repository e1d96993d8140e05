use std::f64::consts::PI;

use pathport::hilbert::{DensityMatrix, PureState, QuantumState, BOB_POL};
use pathport::protocol::{
    bsm_branches, bsm_evolve, build_joint_state, run_teleport, InputQubit, NoiseModel,
};
use pathport::source::SourceModel;
use pathport::tomography::{
    estimate_from_counts, reconstruct_density, simulate_counts, StokesVector,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn input() -> impl Strategy<Value = InputQubit> {
    (0.0..=1.0f64, -PI..PI).prop_map(|(eta, phase)| InputQubit::new(eta, phase).unwrap())
}

fn noise() -> impl Strategy<Value = NoiseModel> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
        .prop_map(|(p, v, d)| NoiseModel::new(p, v, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ideal_protocol_is_exact(input in input()) {
        let result = run_teleport(&input, &NoiseModel::ideal()).unwrap();
        prop_assert!((result.fidelity - 1.0).abs() < 1e-12);
        let target = input.target_state().to_density();
        prop_assert!(result.corrected_state.max_abs_diff(&target).unwrap() < 1e-12);
    }

    #[test]
    fn every_outcome_is_equally_likely(input in input(), noise in noise()) {
        let result = run_teleport(&input, &noise).unwrap();
        for p in result.branch_probs() {
            prop_assert!((p - 0.25).abs() < 1e-12, "{:?}", result.branch_probs());
        }
    }

    #[test]
    fn corrected_states_are_physical(input in input(), noise in noise()) {
        let result = run_teleport(&input, &noise).unwrap();
        result.corrected_state.validate().unwrap();
        for branch in &result.branches {
            branch.corrected_state.as_ref().unwrap().validate().unwrap();
        }
    }

    #[test]
    fn fidelity_factorizes_over_source_noise(input in input(), p in 0.0..=1.0f64, v in 0.0..=1.0f64) {
        let noisy = run_teleport(&input, &NoiseModel::new(p, v, 0.0).unwrap()).unwrap();
        let clean = run_teleport(&input, &NoiseModel::new(1.0, v, 0.0).unwrap()).unwrap();
        prop_assert!((noisy.fidelity - (p * clean.fidelity + (1.0 - p) / 2.0)).abs() < 1e-10);
    }

    #[test]
    fn equatorial_states_follow_visibility_law(phase in -PI..PI, v in 0.0..=1.0f64) {
        let input = InputQubit::new(0.5, phase).unwrap();
        let result = run_teleport(&input, &NoiseModel::new(1.0, v, 0.0).unwrap()).unwrap();
        prop_assert!((result.fidelity - (1.0 + v) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn joint_state_and_evolution_stay_physical(input in input(), p in 0.0..=1.0f64, v in 0.0..=1.0f64) {
        let joint = build_joint_state(&input, &SourceModel::new(p).unwrap()).unwrap();
        joint.validate().unwrap();
        let evolved = bsm_evolve(&joint, v).unwrap();
        evolved.validate().unwrap();
        let total: f64 = bsm_branches(&evolved).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stokes_round_trip(seed in any::<u64>(), rank in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(&[BOB_POL], rank, &mut rng).unwrap();
        let recon = reconstruct_density(&StokesVector::of_density(&rho).unwrap());
        prop_assert!(!recon.clipped);
        prop_assert!(recon.rho.max_abs_diff(&rho).unwrap() < 1e-10);
    }

    #[test]
    fn reconstruction_is_always_physical(s1 in -2.0..2.0f64, s2 in -2.0..2.0f64, s3 in -2.0..2.0f64) {
        let recon = reconstruct_density(&StokesVector::new(s1, s2, s3));
        recon.rho.validate().unwrap();
        prop_assert_eq!(recon.clipped, StokesVector::new(s1, s2, s3).norm() > 1.0 + 1e-10);
    }
}

#[test]
fn basis_states_ignore_visibility() {
    for eta in [0.0, 1.0] {
        let input = InputQubit::new(eta, 0.4).unwrap();
        let states: Vec<DensityMatrix> = [0.0, 0.3, 0.83, 1.0]
            .iter()
            .map(|&v| {
                run_teleport(&input, &NoiseModel::new(0.9, v, 0.0).unwrap())
                    .unwrap()
                    .corrected_state
            })
            .collect();
        for s in &states[1..] {
            assert!(s.max_abs_diff(&states[0]).unwrap() < 1e-15);
        }
    }
}

#[test]
fn teleport_is_linear_in_the_input() {
    // Bob's output for an equal mixture of two inputs equals the mixture of
    // the outputs; checked through the corrected density matrices.
    let noise = NoiseModel::new(0.8, 0.6, 0.0).unwrap();
    let a = InputQubit::new(0.2, 0.3).unwrap();
    let b = InputQubit::new(0.9, -1.2).unwrap();
    let ra = run_teleport(&a, &noise).unwrap().corrected_state;
    let rb = run_teleport(&b, &noise).unwrap().corrected_state;
    let mixed_in = DensityMatrix::mixture([
        (0.5, &a.target_state().to_density()),
        (0.5, &b.target_state().to_density()),
    ])
    .unwrap();
    let mixed_out = DensityMatrix::mixture([(0.5, &ra), (0.5, &rb)]).unwrap();
    // Channel: ρ ↦ p·D_V(ρ) + (1−p)·I/2, with D_V scaling coherences by V.
    let mut expected = mixed_in.entries().clone();
    expected[(0, 1)] *= 0.6;
    expected[(1, 0)] *= 0.6;
    let expected = expected.scale(0.8) + pathport::hilbert::gates::identity(2).scale(0.1);
    let expected = DensityMatrix::new(expected, &[BOB_POL]).unwrap();
    assert!(mixed_out.max_abs_diff(&expected).unwrap() < 1e-12);
}

#[test]
fn stokes_estimates_converge_with_more_events() {
    let rho = PureState::from_unnormalized(
        vec![
            num_complex::Complex64::new(0.8, 0.0),
            num_complex::Complex64::new(0.3, -0.5),
        ],
        &[BOB_POL],
    )
    .unwrap()
    .to_density();
    let mixed = DensityMatrix::maximally_mixed(&[BOB_POL]).unwrap();
    let rho = DensityMatrix::mixture([(0.85, &rho), (0.15, &mixed)]).unwrap();
    let truth = StokesVector::of_density(&rho).unwrap().components();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut wins = [0usize; 3];
    for _ in 0..100 {
        let small =
            estimate_from_counts(&simulate_counts(&rho, 3_000, rng.random()).unwrap()).unwrap();
        let large =
            estimate_from_counts(&simulate_counts(&rho, 3_000_000, rng.random()).unwrap()).unwrap();
        for k in 0..3 {
            let e_small = (small.stokes.components()[k] - truth[k]).abs();
            let e_large = (large.stokes.components()[k] - truth[k]).abs();
            if e_large < e_small {
                wins[k] += 1;
            }
        }
    }
    for (k, w) in wins.iter().enumerate() {
        assert!(*w >= 95, "component {k}: {w}/100");
    }
}

#[test]
fn partial_trace_of_random_states_preserves_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let rho = DensityMatrix::random(&["a", "b", "c"], 4, &mut rng).unwrap();
        for keep in [&["a"][..], &["b", "c"], &["a", "c"]] {
            let reduced = rho.partial_trace(keep).unwrap();
            assert!((reduced.trace().re - 1.0).abs() < 1e-12);
            assert_eq!(reduced.num_qubits(), keep.len());
        }
    }
}

#[test]
fn tensor_then_trace_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let a = PureState::random(&["a", "b"], &mut rng)
            .unwrap()
            .to_density();
        let b = PureState::random(&["c"], &mut rng).unwrap().to_density();
        let back = a.tensor(&b).unwrap().partial_trace(&["a", "b"]).unwrap();
        assert!(back.max_abs_diff(&a).unwrap() < 1e-12);
    }
}
