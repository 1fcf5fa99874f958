//! Synthetic devices: standard gate sets and ground-truth noise models.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::PauliChannel;
use crate::clifford::CliffordLayer;
use crate::error::{Error, Result};
use crate::model::{ChannelParams, FactorSet, GateSet, GateSetNoiseModel, GaugeClass, GeneratorSet, Slot};
use crate::pauli::{Pattern, Pauli};

/// Two qubits, one CNOT layer `cx` with control 0.
pub fn pair_gates() -> Arc<GateSet> {
    let l = CliffordLayer::cnots_only(2, vec![(0, 1)]).expect("valid pair");
    Arc::new(GateSet::new(2, [("cx".to_string(), l)]).expect("valid gate set"))
}

/// Open line: layer `a` on pairs (2i, 2i+1), layer `b` on (2i+1, 2i+2).
pub fn line_gates(n: usize) -> Result<Arc<GateSet>> {
    if n < 2 {
        return Err(Error::Invalid("a line needs at least two qubits".into()));
    }
    let a = (0..n - 1).step_by(2).map(|c| (c, c + 1)).collect();
    let b = (1..n - 1).step_by(2).map(|c| (c, c + 1)).collect();
    Ok(Arc::new(GateSet::new(
        n,
        [("a".to_string(), CliffordLayer::cnots_only(n, a)?), ("b".to_string(), CliffordLayer::cnots_only(n, b)?)],
    )?))
}

/// Closed ring of even length: `a` on (2i, 2i+1), `b` on (2i+1, 2i+2 mod n).
pub fn ring_gates(n: usize) -> Result<Arc<GateSet>> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::Invalid(format!("a ring needs an even number of qubits >= 4, got {n}")));
    }
    let a = (0..n).step_by(2).map(|c| (c, c + 1)).collect();
    let b = (1..n).step_by(2).map(|c| (c, (c + 1) % n)).collect();
    Ok(Arc::new(GateSet::new(
        n,
        [("a".to_string(), CliffordLayer::cnots_only(n, a)?), ("b".to_string(), CliffordLayer::cnots_only(n, b)?)],
    )?))
}

pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|q| (q, (q + 1) % n)).collect()
}

/// Factor sets of the nearest-neighbour ring ansatz: SPAM and both layers
/// on single qubits plus ring edges.
pub fn ring_factor_sets(n: usize) -> Result<(FactorSet, BTreeMap<String, FactorSet>)> {
    let f = FactorSet::local(n, &ring_edges(n))?;
    Ok((f.clone(), BTreeMap::from([("a".to_string(), f.clone()), ("b".to_string(), f)])))
}

fn assemble(
    ansatz: &str,
    gauge: GaugeClass,
    gates: Arc<GateSet>,
    prep: ChannelParams,
    meas: ChannelParams,
    layers: BTreeMap<String, ChannelParams>,
) -> Result<GateSetNoiseModel> {
    let ok = [&prep, &meas].into_iter().chain(layers.values()).all(|c| c.is_physical());
    GateSetNoiseModel::new(ansatz, gauge, gates, prep, meas, layers, !ok)
}

/// Pattern-symmetric SPAM channel with log-fidelity `per_qubit · |P|`.
pub fn weight_spam(kind: Slot, gens: Arc<GeneratorSet>, per_qubit: f64) -> Result<ChannelParams> {
    let x = gens.members().iter().map(|a| per_qubit * a.weight() as f64).collect();
    ChannelParams::from_x(kind, gens, x)
}

/// Two-qubit CNOT with dense error rates {II: .975, IX: .005, XI: .02}:
/// λ_ZI = .96, λ_IZ = .99, λ_ZZ = .95. SPAM is noiseless.
pub fn asymmetric_pair_truth() -> Result<GateSetNoiseModel> {
    let gates = pair_gates();
    let ch = PauliChannel::from_rate_map(2, &[("II", 0.975), ("IX", 0.005), ("XI", 0.02)])?;
    let layer = ChannelParams::from_dense(Slot::Layer("cx".into()), &ch)?;
    let gens = layer.generators().clone();
    assemble(
        "pair-dense",
        GaugeClass::PerPattern,
        gates,
        ChannelParams::zero(Slot::Prep, gens.clone()),
        ChannelParams::zero(Slot::Meas, gens),
        BTreeMap::from([("cx".to_string(), layer)]),
    )
}

/// The four conjugate pairs of a CNOT as (weight-one member, weight-two
/// member), written on (control, target).
pub const CNOT_CONJUGATE_PAIRS: [(&str, &str); 4] = [("XI", "XX"), ("YI", "YX"), ("IZ", "ZZ"), ("IY", "ZY")];

fn embed(n: usize, c: usize, t: usize, two: &str) -> Pauli {
    let b = two.as_bytes();
    let code = |ch: u8| match ch {
        b'X' => 1,
        b'Y' => 2,
        b'Z' => 3,
        _ => 0,
    };
    let mut p = Pauli::identity(n);
    p.set_letter(c, code(b[0]));
    p.set_letter(t, code(b[1]));
    p
}

/// Layer noise that is a product over the layer's CNOT pairs. Every label
/// of K has log-fidelity `base`, except that the weight-two member of each
/// conjugate pair carries an extra `ln(ratio)`. SPAM uses
/// `spam_prep`/`spam_meas` per qubit.
pub fn pair_ratio_truth(gates: Arc<GateSet>, base: f64, ratio: f64, spam_prep: f64, spam_meas: f64) -> Result<GateSetNoiseModel> {
    let n = gates.n();
    let singles = FactorSet::local(n, &[])?;
    let spam_gens = Arc::new(GeneratorSet::new(singles.clone()));
    let mut layers = BTreeMap::new();
    for (id, layer) in gates.layers() {
        let f = FactorSet::local(n, layer.cnots())?;
        let gens = Arc::new(GeneratorSet::new(f));
        let mut x = vec![base; gens.len()];
        for &(c, t) in layer.cnots() {
            for (_, heavy) in CNOT_CONJUGATE_PAIRS {
                let i = gens.index_of(&embed(n, c, t, heavy)).expect("pair label in K");
                x[i] += ratio.ln();
            }
        }
        layers.insert(id.to_string(), ChannelParams::from_x(Slot::Layer(id.to_string()), gens, x)?);
    }
    assemble(
        "pair-ratio",
        GaugeClass::PerQubit,
        gates,
        weight_spam(Slot::Prep, spam_gens.clone(), spam_prep)?,
        weight_spam(Slot::Meas, spam_gens, spam_meas)?,
        layers,
    )
}

/// Knobs for random quasi-local truth models.
#[derive(Clone, Debug)]
pub struct RandomTruth {
    /// Generator rates are drawn uniformly from [0, tau_max].
    pub tau_max: f64,
    /// Fraction of generators that get a non-zero rate.
    pub density: f64,
    /// Shift moving rate from one member of each conjugate pair to the other.
    pub asymmetry: f64,
    /// SPAM rates are drawn from [0, spam_max]; measurement gets `meas_scale` times that.
    pub spam_max: f64,
    pub meas_scale: f64,
    pub seed: u64,
}

impl Default for RandomTruth {
    fn default() -> Self {
        RandomTruth { tau_max: 2e-3, density: 1.0, asymmetry: 0.0, spam_max: 5e-3, meas_scale: 1.0, seed: 0 }
    }
}

/// Generator on the pair that flips `light` but not `heavy`.
fn splitting_generator(n: usize, c: usize, t: usize, light: &Pauli, heavy: &Pauli) -> Pauli {
    const TWO: [&str; 9] = ["XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"];
    TWO.iter()
        .map(|s| embed(n, c, t, s))
        .find(|g| !g.commutes_with(light) && g.commutes_with(heavy))
        .expect("some two-qubit generator separates the pair")
}

/// Random physical model over the given factor sets. SPAM rates depend only
/// on the support pattern. With `asymmetry > 0`, each CNOT pair moves rate
/// between generators that separate its conjugate pairs, so the two members
/// of a pair get different fidelities.
pub fn random_truth(
    gates: Arc<GateSet>,
    spam: &FactorSet,
    layer_factors: &BTreeMap<String, FactorSet>,
    gauge: GaugeClass,
    knobs: &RandomTruth,
) -> Result<GateSetNoiseModel> {
    let n = gates.n();
    let mut rng = ChaCha8Rng::seed_from_u64(knobs.seed);
    let spam_gens = Arc::new(GeneratorSet::new(spam.clone()));
    let mut spam_channel = |kind: Slot, scale: f64| -> Result<ChannelParams> {
        let rate: BTreeMap<Pattern, f64> = spam.subsets().map(|p| (p, scale * rng.random_range(0.0..=knobs.spam_max))).collect();
        // equal rates across letters keep the channel a function of patterns
        let tau: Vec<f64> = spam_gens.members().iter().map(|a| rate[&a.support()] / 3f64.powi(a.weight() as i32)).collect();
        ChannelParams::from_tau(kind, spam_gens.clone(), tau)
    };
    let prep = spam_channel(Slot::Prep, 1.0)?;
    let meas = spam_channel(Slot::Meas, knobs.meas_scale)?;
    let mut layers = BTreeMap::new();
    for (id, layer) in gates.layers() {
        let f = layer_factors.get(id).ok_or_else(|| Error::Invalid(format!("no factor set for layer {id}")))?;
        let gens = Arc::new(GeneratorSet::new(f.clone()));
        let mut tau: Vec<f64> = gens
            .members()
            .iter()
            .map(|_| if rng.random::<f64>() < knobs.density { rng.random_range(0.0..=knobs.tau_max) } else { 0.0 })
            .collect();
        if knobs.asymmetry != 0.0 {
            for &(c, t) in layer.cnots() {
                for (light, heavy) in CNOT_CONJUGATE_PAIRS {
                    let (l, h) = (embed(n, c, t, light), embed(n, c, t, heavy));
                    let up = splitting_generator(n, c, t, &l, &h);
                    let down = splitting_generator(n, c, t, &h, &l);
                    let (Some(iu), Some(id_)) = (gens.index_of(&up), gens.index_of(&down)) else {
                        return Err(Error::Invalid(format!("layer {id} factor set lacks the CNOT pair ({c},{t})")));
                    };
                    tau[iu] += knobs.asymmetry;
                    tau[id_] = (tau[id_] - knobs.asymmetry).max(0.0);
                }
            }
        }
        layers.insert(id.to_string(), ChannelParams::from_tau(Slot::Layer(id.to_string()), gens, tau)?);
    }
    assemble("random-local", gauge, gates, prep, meas, layers)
}
