mod common;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use scpec::circuits::{ghz_circuit, repeated_cnot};
use scpec::devices::{asymmetric_pair_truth, line_gates, pair_ratio_truth};
use scpec::par;
use scpec::sim::{backpropagate_observable, exact_pauli_expectation, sample_counts, ShotConfig};
use scpec::Pauli;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_matches_density_matrix(seed in any_seed(), n in 1usize..=3) {
        let mut r = rng(seed);
        let gates = random_gates(n, &mut r);
        let model = random_model(gates.clone(), seed, 0.05);
        let (c, o) = if r.random_bool(0.5) { stabilizer_circuit(&gates, 6, &mut r) } else { random_circuit(&gates, 6, &mut r) };
        let fast = exact_pauli_expectation(&c, &model, &o).unwrap();
        let slow = dense_expectation(&c, &model, &o);
        prop_assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn gauge_leaves_expectations_unchanged(seed in any_seed(), n in 1usize..=3, per_pattern: bool) {
        let mut r = rng(seed);
        let gates = random_gates(n, &mut r);
        let model = random_model(gates.clone(), seed, 0.05);
        let eta = random_gauge(n, per_pattern, &mut r);
        let moved = model.apply_gauge(&eta).unwrap();
        let (c, o) = stabilizer_circuit(&gates, 6, &mut r);
        let a = exact_pauli_expectation(&c, &model, &o).unwrap();
        let b = exact_pauli_expectation(&c, &moved, &o).unwrap();
        prop_assert!(a.abs() > 1e-3, "stabilizer circuit gave {a}");
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((b - dense_expectation(&c, &moved, &o)).abs() < 1e-12);
    }
}

#[test]
fn noiseless_ghz_is_ideal() {
    for n in [3, 5, 9] {
        let gates = line_gates(n).unwrap();
        let (c, o) = ghz_circuit(&gates).unwrap();
        let bp = backpropagate_observable(&c, &o).unwrap();
        assert_eq!(bp.ideal, 1.0);
        let clean = pair_ratio_truth(gates, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(exact_pauli_expectation(&c, &clean, &o).unwrap(), 1.0);
    }
}

#[test]
fn sampling_converges_to_exact() {
    let truth = asymmetric_pair_truth().unwrap();
    let gates = truth.gates().clone();
    let obs: Vec<Pauli> = ["ZI", "IZ", "ZZ"].iter().map(|s| s.parse().unwrap()).collect();
    for depth in [1, 4] {
        let c = repeated_cnot(&gates, depth).unwrap();
        let cfg = ShotConfig { shots: 200_000, twirls: 8, seed: 3, twirling: true };
        let (counts, est) = sample_counts(&c, &truth, &obs, &cfg, depth as u64).unwrap();
        assert_eq!(counts.histogram.values().sum::<u64>(), cfg.shots);
        for (o, e) in obs.iter().zip(&est) {
            let want = exact_pauli_expectation(&c, &truth, o).unwrap();
            assert!((e.value - want).abs() < 5.0 * e.stderr.max(1e-4), "{o} depth {depth}: {} vs {want}", e.value);
        }
    }
}

#[test]
fn twirling_does_not_move_the_mean() {
    let truth = asymmetric_pair_truth().unwrap();
    let c = repeated_cnot(truth.gates(), 3).unwrap();
    let obs: Vec<Pauli> = vec!["ZZ".parse().unwrap(), "IZ".parse().unwrap()];
    let run = |twirling| {
        let cfg = ShotConfig { shots: 200_000, twirls: 16, seed: 11, twirling };
        sample_counts(&c, &truth, &obs, &cfg, 0).unwrap().1
    };
    for (a, b) in run(true).iter().zip(run(false)) {
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < 5.0 * se);
    }
}

#[test]
fn sampling_is_deterministic_across_thread_counts() {
    let truth = asymmetric_pair_truth().unwrap();
    let c = repeated_cnot(truth.gates(), 5).unwrap();
    let obs = vec!["ZZ".parse::<Pauli>().unwrap()];
    let cfg = ShotConfig { shots: 20_000, twirls: 8, seed: 5, twirling: true };
    let a = par::with_threads(1, || sample_counts(&c, &truth, &obs, &cfg, 9).unwrap().0);
    let b = par::with_threads(3, || sample_counts(&c, &truth, &obs, &cfg, 9).unwrap().0);
    assert_eq!(a, b);
    let other = sample_counts(&c, &truth, &obs, &ShotConfig { seed: 6, ..cfg }, 9).unwrap().0;
    assert_ne!(a, other);
}

#[test]
fn sampling_rejects_unmeasured_observable() {
    let truth = asymmetric_pair_truth().unwrap();
    let c = repeated_cnot(truth.gates(), 1).unwrap();
    let xx = vec!["XX".parse::<Pauli>().unwrap()];
    assert!(sample_counts(&c, &truth, &xx, &ShotConfig::default(), 0).is_err());
}
