mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use scpec::circuits::{ghz_circuit, repeated_cnot};
use scpec::devices::{
    asymmetric_pair_truth, line_gates, pair_ratio_truth, random_truth, ring_factor_sets, ring_gates, RandomTruth,
};
use scpec::learn::{build_design_matrix, harvest_b, ring_plan, sample_design};
use scpec::mitigate::quasiprob::{inverse_quasiprob_dense, inverse_quasiprob_factored, ChannelInverse, PlanMode, QuasiProbPlan};
use scpec::mitigate::{
    gauge_optimize, gauge_optimize_two_step, pec_expectation_exact, pec_expectation_with_plan, pec_sample, GaugeProblem,
    PecConfig,
};
use scpec::model::space::ParamSpace;
use scpec::sim::{backpropagate_observable, ShotConfig};
use scpec::{ChannelParams, Error, FactorSet, GaugeClass, GaugeVector, GeneratorSet, Pauli, Slot};

fn full_gens(n: usize) -> Arc<GeneratorSet> {
    Arc::new(GeneratorSet::new(FactorSet::full(n).unwrap()))
}

/// Greedy GF(2)-independent subset of the generators, in random order.
fn independent_subset(gens: &GeneratorSet, r: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gens.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    let mut basis: Vec<u128> = Vec::new();
    let mut chosen = Vec::new();
    for i in order {
        let a = &gens.members()[i];
        let mut v = a.x_bits() | a.z_bits() << 64;
        for b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 && chosen.len() < 4 {
            basis.push(v);
            basis.sort_by(|a, b| b.cmp(a));
            chosen.push(i);
        }
    }
    chosen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_inverse_undoes_the_channel(n in 1usize..=3, seed in any_seed()) {
        let mut r = rng(seed);
        let gens = full_gens(n);
        let tau: Vec<f64> = gens.members().iter().map(|_| r.random_range(-0.02..0.08)).collect();
        let c = ChannelParams::from_tau(Slot::Meas, gens, tau).unwrap();
        let ChannelInverse::Dense(inv) = inverse_quasiprob_dense(&c.to_dense().unwrap()).unwrap() else { unreachable!() };
        let forward = DenseChannel::from_eigenvalues(n, |a| c.eigenvalue(a));
        let mats: Vec<(f64, M)> = Pauli::all(n).zip(inv.quasi()).map(|(a, q)| (*q, pauli_matrix(&a))).collect();
        let backward = |rho: &M| mats.iter().fold(M::zeros(rho.nrows(), rho.ncols()), |acc, (q, p)| acc + p * rho * p.adjoint() * C::new(*q, 0.0));
        for a in Pauli::all(n) {
            let lam = eigenvalue_of(n, &a, |m| forward.apply(&backward(m)));
            prop_assert!((lam - 1.0).abs() < 1e-12, "{a}: {lam}");
        }
    }

    #[test]
    fn factored_gamma_bounds_dense_and_matches_on_independent_generators(n in 1usize..=3, seed in any_seed()) {
        let mut r = rng(seed);
        let gens = full_gens(n);
        let tau: Vec<f64> = gens.members().iter().map(|_| r.random_range(0.0..0.05)).collect();
        let c = ChannelParams::from_tau(Slot::Prep, gens.clone(), tau).unwrap();
        let dense = inverse_quasiprob_dense(&c.to_dense().unwrap()).unwrap();
        let fact = inverse_quasiprob_factored(&c);
        prop_assert!(dense.gamma() <= fact.gamma() + 1e-12);
        for a in Pauli::all(n).skip(1) {
            prop_assert!((dense.signed_eigenvalue(&a) - fact.signed_eigenvalue(&a)).abs() < 1e-12);
        }

        let mut sparse = vec![0.0; gens.len()];
        for i in independent_subset(&gens, &mut r) {
            sparse[i] = r.random_range(0.0..0.1);
        }
        let c = ChannelParams::from_tau(Slot::Prep, gens, sparse).unwrap();
        let dense = inverse_quasiprob_dense(&c.to_dense().unwrap()).unwrap();
        prop_assert!((dense.gamma() - inverse_quasiprob_factored(&c).gamma()).abs() < 1e-12);
    }

    #[test]
    fn pec_with_any_gauge_of_the_truth_is_exact(seed in any_seed(), n in 1usize..=3, per_pattern: bool) {
        let mut r = rng(seed);
        let gates = random_gates(n, &mut r);
        let truth = random_model(gates.clone(), seed, 0.05);
        let learned = truth.apply_gauge(&random_gauge(n, per_pattern, &mut r)).unwrap();
        let (c, o) = stabilizer_circuit(&gates, 6, &mut r);
        let ideal = backpropagate_observable(&c, &o).unwrap().ideal;
        prop_assert!((pec_expectation_exact(&c, &truth, &learned, &o).unwrap() - ideal).abs() < 1e-10);
        let factored = QuasiProbPlan::new(&learned, PlanMode::Factored).unwrap();
        prop_assert!((pec_expectation_with_plan(&c, &truth, &factored, &o).unwrap() - ideal).abs() < 1e-10);
    }
}

#[test]
fn overhead_depends_on_the_gauge() {
    let truth = asymmetric_pair_truth().unwrap();
    let moved = truth.apply_gauge(&GaugeVector::PerPattern(vec![0.0, 0.02, -0.01, 0.015])).unwrap();
    let g0 = QuasiProbPlan::new(&truth, PlanMode::Dense).unwrap().gate_log_gamma();
    let g1 = QuasiProbPlan::new(&moved, PlanMode::Dense).unwrap().gate_log_gamma();
    assert!((g0 - g1).abs() > 1e-4, "{g0} vs {g1}");
}

#[test]
fn sampled_pec_mean_of_means_is_unbiased() {
    let truth = asymmetric_pair_truth().unwrap();
    let c = repeated_cnot(truth.gates(), 3).unwrap();
    let o: Pauli = "ZZ".parse().unwrap();
    let plan = QuasiProbPlan::new(&truth, PlanMode::Dense).unwrap();
    let exact = pec_expectation_with_plan(&c, &truth, &plan, &o).unwrap();
    let runs = 16u64;
    let est: Vec<_> = (0..runs)
        .map(|seed| pec_sample(&c, &truth, &plan, &o, &PecConfig { samples: 10_000, twirls: 4, seed }).unwrap())
        .collect();
    let mean = est.iter().map(|e| e.value).sum::<f64>() / runs as f64;
    let se = est.iter().map(|e| e.stderr).sum::<f64>() / runs as f64;
    assert!((mean - exact).abs() < 5.0 * se / (runs as f64).sqrt(), "{mean} vs {exact}");
    assert!(est.iter().all(|e| e.gamma > 1.0 && e.negative_fraction > 0.0));
}

#[test]
fn pec_undoes_line_noise_in_factored_mode() {
    let gates = line_gates(5).unwrap();
    let (c, o) = ghz_circuit(&gates).unwrap();
    // exact mode accepts the non-physical pair-ratio model
    let skewed = pair_ratio_truth(gates.clone(), 0.01, 1.01, 0.002, 0.004).unwrap();
    let plan = QuasiProbPlan::new(&skewed, PlanMode::Factored).unwrap();
    assert!((pec_expectation_with_plan(&c, &skewed, &plan, &o).unwrap() - 1.0).abs() < 1e-10);

    let f = FactorSet::local(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let layers = gates.ids().map(|id| (id.to_string(), f.clone())).collect();
    let knobs = RandomTruth { asymmetry: 0.005, seed: 8, ..RandomTruth::default() };
    let truth = random_truth(gates, &f, &layers, GaugeClass::PerQubit, &knobs).unwrap();
    let plan = QuasiProbPlan::new(&truth, PlanMode::Factored).unwrap();
    let est = pec_sample(&c, &truth, &plan, &o, &PecConfig { samples: 50_000, twirls: 8, seed: 1 }).unwrap();
    assert!((est.value - 1.0).abs() < 5.0 * est.stderr);
}

#[test]
fn gauge_optimization_contract_on_a_small_ring() {
    let n = 4;
    let gates = ring_gates(n).unwrap();
    let plan = ring_plan(gates.clone(), &[4, 12, 24]).unwrap();
    let (spam, layers) = ring_factor_sets(n).unwrap();
    let knobs = RandomTruth { tau_max: 1e-3, density: 0.3, asymmetry: 0.02, spam_max: 0.2, meas_scale: 0.0, seed: 5 };
    let truth = random_truth(gates.clone(), &spam, &layers, GaugeClass::PerQubit, &knobs).unwrap();
    let space = ParamSpace::r_basis(gates, spam, layers, GaugeClass::PerQubit).unwrap();
    let f = build_design_matrix(&plan, Arc::new(space)).unwrap();
    let est = sample_design(&f, &plan, &truth, &ShotConfig { shots: 20_000, twirls: 8, seed: 2, twirling: true }).unwrap();
    let data = harvest_b(&f, &est).unwrap();
    let problem = GaugeProblem::new(&f, &data).unwrap();
    assert_eq!(problem.kernel_dim(), n);

    let pinv = problem.pseudo_inverse();
    let two = gauge_optimize_two_step(&problem).unwrap();
    let one = gauge_optimize(&problem, None).unwrap();
    assert!(one.log_gamma_star <= two.log_gamma_star + 1e-12);
    assert!(two.log_gamma_star <= problem.log_gamma(&pinv) + 1e-12);
    assert!((two.residual - problem.ls_residual()).abs() < 1e-9);
    assert!(one.residual <= one.epsilon_used + 1e-9);
    assert!((one.epsilon_used - 1.05 * problem.ls_residual()).abs() < 1e-15);
    assert!(!one.trace.is_empty());

    // feasible comparison points along gauge directions are no better
    let gauge = f.space.gauge_kernel_basis().unwrap();
    for y in &gauge {
        for step in [-0.01, 0.01] {
            let mut r = two.r_star.clone();
            r.iter_mut().zip(y).for_each(|(ri, yi)| *ri += step * yi);
            assert!(problem.residual(&r) <= one.epsilon_used);
            assert!(one.log_gamma_star <= problem.log_gamma(&r) + 1e-9);
        }
    }

    match gauge_optimize(&problem, Some(0.5 * problem.ls_residual())) {
        Err(Error::Infeasible { .. }) => {}
        other => panic!("expected infeasible, got {other:?}"),
    }
}
