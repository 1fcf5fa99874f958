use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scpec::circuits::{ghz_circuit, repeated_cnot};
use scpec::devices::{asymmetric_pair_truth, line_gates, random_truth, RandomTruth};
use scpec::mitigate::{pec_sample, PecConfig, PlanMode, QuasiProbPlan};
use scpec::par;
use scpec::sim::{sample_counts, ShotConfig};
use scpec::{FactorSet, GaugeClass, Pauli};

// `sequential` pins the pool to one worker; `parallel` uses the default pool.
fn modes() -> [(&'static str, usize); 2] {
    [("sequential", 1), ("parallel", par::worker_count().max(1))]
}

fn bench_sample_counts(c: &mut Criterion) {
    let n = 9;
    let gates = line_gates(n).unwrap();
    let f = FactorSet::local(n, &(0..n - 1).map(|q| (q, q + 1)).collect::<Vec<_>>()).unwrap();
    let layers = gates.ids().map(|id| (id.to_string(), f.clone())).collect();
    let truth = random_truth(gates.clone(), &f, &layers, GaugeClass::PerQubit, &RandomTruth::default()).unwrap();
    let (circuit, o) = ghz_circuit(&gates).unwrap();
    let cfg = ShotConfig { shots: 20_000, twirls: 16, seed: 1, twirling: true };
    let mut g = c.benchmark_group("sample_counts_ghz9");
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::with_threads(threads, || sample_counts(&circuit, &truth, std::slice::from_ref(&o), &cfg, 0).unwrap()))
        });
    }
    g.finish();
}

fn bench_pec_sample(c: &mut Criterion) {
    let truth = asymmetric_pair_truth().unwrap();
    let circuit = repeated_cnot(truth.gates(), 6).unwrap();
    let o: Pauli = "ZZ".parse().unwrap();
    let plan = QuasiProbPlan::new(&truth, PlanMode::Dense).unwrap();
    let cfg = PecConfig { samples: 50_000, twirls: 16, seed: 1 };
    let mut g = c.benchmark_group("pec_sample_pair");
    for (name, threads) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::with_threads(threads, || pec_sample(&circuit, &truth, &plan, &o, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_sample_counts, bench_pec_sample);
criterion_main!(benches);
