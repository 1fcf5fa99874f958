//! Brute-force density-matrix oracle for small registers (n ≤ 3).
//!
//! Nothing here goes through the symplectic machinery: Paulis and Cliffords
//! become explicit complex matrices, Pauli channels act as Kraus sums.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scpec::circuit::rotation_to_z;
use scpec::devices::{random_truth, RandomTruth};
use scpec::{Circuit, Clifford1, CliffordLayer, FactorSet, GateSet, GateSetNoiseModel, GaugeClass, GaugeVector, Op, Pauli, Slot};

pub type C = Complex<f64>;
pub type M = DMatrix<C>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// Matrix of a signed Pauli; basis index bit q is qubit q.
pub fn pauli_matrix(p: &Pauli) -> M {
    let n = p.n();
    let d = 1usize << n;
    let mut m = M::zeros(d, d);
    for i in 0..d {
        let mut j = i;
        let mut phase = c(p.sign(), 0.0);
        for q in 0..n {
            let b = (i >> q) & 1;
            let sgn = if b == 1 { -1.0 } else { 1.0 };
            match p.letter(q) {
                1 => j ^= 1 << q,
                2 => {
                    j ^= 1 << q;
                    phase *= c(0.0, sgn);
                }
                3 => phase *= c(sgn, 0.0),
                _ => {}
            }
        }
        m[(j, i)] += phase;
    }
    m
}

fn one_qubit(l: u8) -> M {
    let mut p = Pauli::identity(1);
    p.set_letter(0, l);
    pauli_matrix(&p)
}

fn close(a: &M, b: &M) -> bool {
    (a - b).iter().all(|z| z.norm() < 1e-12)
}

/// A 2x2 unitary for each single-qubit Clifford, found by closing {H, S}
/// and matching conjugation images.
pub fn clifford_unitary(cl: &Clifford1) -> M {
    let s = 1.0 / 2f64.sqrt();
    let h = M::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
    let ph = M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)]);
    let mut group = vec![M::identity(2, 2)];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = vec![];
        for u in &frontier {
            for g in [&h, &ph] {
                let v = g * u;
                // equal up to phase iff |tr(W†V)| = 2
                let known = group.iter().any(|w| ((w.adjoint() * &v).trace().norm() - 2.0).abs() < 1e-9);
                if !known {
                    group.push(v.clone());
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    assert_eq!(group.len(), 24);
    let image = |u: &M, l: u8| -> (u8, bool) {
        let conj = u * one_qubit(l) * u.adjoint();
        for m in 1..4u8 {
            if close(&conj, &one_qubit(m)) {
                return (m, false);
            }
            if close(&conj, &(-one_qubit(m))) {
                return (m, true);
            }
        }
        unreachable!("not a Clifford")
    };
    let want = (cl.map_letter(1), cl.map_letter(3));
    group.into_iter().find(|u| (image(u, 1), image(u, 3)) == want).expect("every Clifford appears")
}

fn embed_single(n: usize, q: usize, u: &M) -> M {
    let d = 1usize << n;
    let mut m = M::zeros(d, d);
    for i in 0..d {
        let b = (i >> q) & 1;
        for b2 in 0..2 {
            let j = (i & !(1 << q)) | (b2 << q);
            m[(j, i)] += u[(b2, b)];
        }
    }
    m
}

pub fn singles_unitary(cs: &[Clifford1]) -> M {
    let n = cs.len();
    cs.iter().enumerate().fold(M::identity(1 << n, 1 << n), |acc, (q, cl)| embed_single(n, q, &clifford_unitary(cl)) * acc)
}

pub fn cnot_unitary(n: usize, ctl: usize, tgt: usize) -> M {
    let d = 1usize << n;
    let mut m = M::zeros(d, d);
    for i in 0..d {
        let j = if (i >> ctl) & 1 == 1 { i ^ (1 << tgt) } else { i };
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

pub fn layer_unitary(l: &CliffordLayer) -> M {
    let n = l.n();
    let mut u = M::identity(1 << n, 1 << n);
    for &(ct, tg) in l.cnots() {
        u = cnot_unitary(n, ct, tg) * u;
    }
    singles_unitary(l.singles()) * u
}

fn commute(a: &M, b: &M) -> bool {
    close(&(a * b), &(b * a))
}

/// Pauli channel from eigenvalues λ(a), applied as Σ p_a P_a ρ P_a with
/// p_a = 4^{-n} Σ_b ±λ_b, signs read off the matrices.
pub struct DenseChannel {
    kraus: Vec<(f64, M)>,
}

impl DenseChannel {
    pub fn from_eigenvalues(n: usize, lambda: impl Fn(&Pauli) -> f64) -> Self {
        let labels: Vec<Pauli> = Pauli::all(n).collect();
        let mats: Vec<M> = labels.iter().map(pauli_matrix).collect();
        let lam: Vec<f64> = labels.iter().map(|a| if a.is_identity() { 1.0 } else { lambda(a) }).collect();
        let norm = 4f64.powi(n as i32);
        let kraus = mats
            .iter()
            .map(|pa| {
                let p: f64 = mats.iter().zip(&lam).map(|(pb, l)| if commute(pa, pb) { *l } else { -*l }).sum::<f64>() / norm;
                (p, pa.clone())
            })
            .collect();
        DenseChannel { kraus }
    }

    pub fn apply(&self, rho: &M) -> M {
        let d = rho.nrows();
        self.kraus.iter().fold(M::zeros(d, d), |acc, (p, k)| acc + k * rho * k.adjoint() * c(*p, 0.0))
    }
}

pub fn model_channel(model: &GateSetNoiseModel, slot: &Slot) -> DenseChannel {
    let ch = model.channel(slot).unwrap();
    DenseChannel::from_eigenvalues(model.n(), |a| ch.eigenvalue(a))
}

/// Exact expectation by evolving the density matrix.
pub fn dense_expectation(circuit: &Circuit, model: &GateSetNoiseModel, observable: &Pauli) -> f64 {
    let n = circuit.n();
    let d = 1usize << n;
    let mut rho = M::zeros(d, d);
    let prep = circuit.prep_bits() as usize;
    rho[(prep, prep)] = c(1.0, 0.0);
    rho = model_channel(model, &Slot::Prep).apply(&rho);
    for op in circuit.ops() {
        match op {
            Op::Prepare(_) => {}
            Op::SingleQubit(cs) => {
                let u = singles_unitary(cs);
                rho = &u * rho * u.adjoint();
            }
            Op::Layer(id) => {
                rho = model_channel(model, &Slot::Layer(id.clone())).apply(&rho);
                let u = layer_unitary(circuit.gates().layer(id).unwrap());
                rho = &u * rho * u.adjoint();
            }
            Op::Pauli(p) => {
                let u = pauli_matrix(p);
                rho = &u * rho * u.adjoint();
            }
            Op::Measure(basis) => {
                let u = singles_unitary(&rotation_to_z(basis));
                rho = &u * rho * u.adjoint();
                rho = model_channel(model, &Slot::Meas).apply(&rho);
                let o = &u * pauli_matrix(observable) * u.adjoint();
                return (o * rho).trace().re;
            }
        }
    }
    unreachable!("circuits end with a measurement")
}

/// Eigenvalue λ_a = tr(P_a Λ(P_a)) / 2^n of a channel given as a map on matrices.
pub fn eigenvalue_of(n: usize, a: &Pauli, apply: impl Fn(&M) -> M) -> f64 {
    let p = pauli_matrix(a);
    (&p * apply(&p)).trace().re / (1usize << n) as f64
}

/// Random gate set on n ≤ 3 qubits: one or two layers of disjoint CNOTs,
/// some with single-qubit Cliffords attached.
pub fn random_gates(n: usize, rng: &mut ChaCha8Rng) -> Arc<GateSet> {
    let all = Clifford1::all();
    let count = rng.random_range(1..=2);
    let layers = (0..count).map(|k| {
        let mut qubits: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            qubits.swap(i, rng.random_range(0..=i));
        }
        let cnots = if n >= 2 { vec![(qubits[0], qubits[1])] } else { vec![] };
        let singles = rng.random_bool(0.5).then(|| (0..n).map(|_| all[rng.random_range(0..24)]).collect());
        (format!("g{k}"), CliffordLayer::new(n, cnots, singles).unwrap())
    });
    Arc::new(GateSet::new(n, layers.collect::<Vec<_>>()).unwrap())
}

/// Random full-factor model; layer rates up to `tau_max`.
pub fn random_model(gates: Arc<GateSet>, seed: u64, tau_max: f64) -> GateSetNoiseModel {
    let n = gates.n();
    let full = FactorSet::full(n).unwrap();
    let layers: BTreeMap<String, FactorSet> = gates.ids().map(|id| (id.to_string(), full.clone())).collect();
    let knobs = RandomTruth { tau_max, density: 0.7, asymmetry: 0.0, spam_max: 0.02, meas_scale: 1.0, seed };
    random_truth(gates, &full, &layers, GaugeClass::PerPattern, &knobs).unwrap()
}

pub fn random_gauge(n: usize, per_pattern: bool, rng: &mut ChaCha8Rng) -> GaugeVector {
    if per_pattern {
        let mut e: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-0.05..0.05)).collect();
        e[0] = 0.0;
        GaugeVector::PerPattern(e)
    } else {
        GaugeVector::PerQubit((0..n).map(|_| rng.random_range(-0.05..0.05)).collect())
    }
}

/// Random circuit of at most `max_depth` noisy layers with interleaved
/// single-qubit Cliffords and Paulis, plus an observable it measures.
pub fn random_circuit(gates: &Arc<GateSet>, max_depth: usize, rng: &mut ChaCha8Rng) -> (Circuit, Pauli) {
    let n = gates.n();
    let all = Clifford1::all();
    let ids: Vec<String> = gates.ids().map(str::to_string).collect();
    let mut ops = vec![Op::Prepare(rng.random_range(0..1u128 << n))];
    for _ in 0..rng.random_range(0..=max_depth) {
        match rng.random_range(0..4) {
            0 => ops.push(Op::SingleQubit((0..n).map(|_| all[rng.random_range(0..24)]).collect())),
            1 => {
                let mut p = Pauli::identity(n);
                (0..n).for_each(|q| p.set_letter(q, rng.random_range(0..4)));
                ops.push(Op::Pauli(p));
            }
            _ => {}
        }
        ops.push(Op::Layer(ids[rng.random_range(0..ids.len())].clone()));
    }
    let basis: Vec<u8> = (0..n).map(|_| rng.random_range(1..4)).collect();
    let mut obs = Pauli::identity(n);
    while obs.is_identity() {
        for (q, &b) in basis.iter().enumerate() {
            obs.set_letter(q, if rng.random_bool(0.6) { b } else { 0 });
        }
    }
    ops.push(Op::Measure(basis));
    (Circuit::new(gates.clone(), ops).unwrap(), obs)
}

/// Random circuit whose observable has a nonzero ideal value: the final
/// basis is chosen to diagonalize the pushed-forward stabilizer.
pub fn stabilizer_circuit(gates: &Arc<GateSet>, max_depth: usize, rng: &mut ChaCha8Rng) -> (Circuit, Pauli) {
    loop {
        let (c, _) = random_circuit(gates, max_depth, rng);
        let n = c.n();
        // push a random Z-type stabilizer of the prep through the circuit
        let mut s = Pauli::identity(n);
        while s.is_identity() {
            (0..n).for_each(|q| s.set_letter(q, if rng.random_bool(0.5) { 3 } else { 0 }));
        }
        let mut ops = c.ops().to_vec();
        ops.pop();
        for op in &ops {
            match op {
                Op::SingleQubit(cs) => s = scpec::clifford::conjugate_singles(cs, &s),
                Op::Layer(id) => s = c.gates().layer(id).unwrap().conjugate(&s).unwrap(),
                _ => {}
            }
        }
        let basis: Vec<u8> = (0..n).map(|q| if s.letter(q) == 0 { 3 } else { s.letter(q) }).collect();
        ops.push(Op::Measure(basis));
        let circuit = Circuit::new(gates.clone(), ops).unwrap();
        if circuit.measures(&s) {
            return (circuit, s.unsigned());
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn any_seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}
