//! Finite-shot sampling with Pauli frames.
//!
//! Ideal outcomes come from [`OutcomeSampler`]; noise is tracked as a Pauli
//! frame that is pushed through the circuit and flips the outcome bits it
//! anticommutes with. Gate layers are Pauli-twirled and readout is twirled
//! with random bit flips that are undone classically.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tableau::OutcomeSampler;
use crate::circuit::{rotation_to_z, Circuit, Op};
use crate::clifford::{conjugate_singles, Clifford1, CliffordLayer};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, GateSetNoiseModel};
use crate::par;
use crate::pauli::Pauli;

/// Counter-based stream for (seed, domain, instance, stream).
pub fn stream_rng(seed: u64, domain: u64, instance: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&instance.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Independent Bernoulli draws of Pauli factors, with geometric skipping
/// so the cost scales with the expected number of hits.
#[derive(Clone, Debug, Default)]
pub(crate) struct FactorDraw {
    // (x, z, probability, negative sign)
    items: Vec<(u128, u128, f64, bool)>,
    pmax: f64,
}

impl FactorDraw {
    pub(crate) fn new(items: Vec<(u128, u128, f64, bool)>) -> Self {
        let items: Vec<_> = items.into_iter().filter(|it| it.2 > 0.0).collect();
        let pmax = items.iter().map(|it| it.2).fold(0.0, f64::max);
        FactorDraw { items, pmax }
    }

    /// Returns (x, z, odd number of negative factors).
    #[inline]
    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> (u128, u128, bool) {
        let (mut x, mut z, mut neg) = (0u128, 0u128, false);
        if self.items.is_empty() {
            return (x, z, neg);
        }
        let log_q = (1.0 - self.pmax).ln();
        let mut i = 0usize;
        loop {
            if self.pmax < 1.0 {
                let u: f64 = rng.random();
                let skip = ((1.0 - u).ln() / log_q).floor();
                if skip >= (self.items.len() - i) as f64 {
                    break;
                }
                i += skip as usize;
            }
            let (ix, iz, p, s) = self.items[i];
            if p >= self.pmax || rng.random::<f64>() * self.pmax < p {
                x ^= ix;
                z ^= iz;
                neg ^= s;
            }
            i += 1;
            if i >= self.items.len() {
                break;
            }
        }
        (x, z, neg)
    }
}

/// Error sampler for one physical channel.
#[derive(Clone, Debug)]
pub(crate) enum ErrorSampler {
    Factored(FactorDraw),
    Dense { n: usize, cdf: Vec<f64> },
}

impl ErrorSampler {
    pub(crate) fn new(ch: &ChannelParams) -> Result<Self> {
        if ch.is_physical() {
            let items = ch
                .generators()
                .members()
                .iter()
                .zip(ch.tau())
                .map(|(a, &t)| (a.x_bits(), a.z_bits(), if t > 0.0 { (1.0 - (-t).exp()) / 2.0 } else { 0.0 }, false))
                .collect();
            return Ok(ErrorSampler::Factored(FactorDraw::new(items)));
        }
        if ch.n() <= 8 {
            let dense = ch.to_dense()?.eigenvalues_to_rates();
            let rates = dense.rates().expect("rates were just computed");
            if rates.iter().all(|&p| p >= -1e-12) {
                let mut acc = 0.0;
                let cdf = rates
                    .iter()
                    .map(|&p| {
                        acc += p.max(0.0);
                        acc
                    })
                    .collect();
                return Ok(ErrorSampler::Dense { n: ch.n(), cdf });
            }
        }
        Err(Error::NotPhysical(format!("{} channel has negative error rates; sampling refused", ch.kind())))
    }

    #[inline]
    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> (u128, u128) {
        match self {
            ErrorSampler::Factored(f) => {
                let (x, z, _) = f.draw(rng);
                (x, z)
            }
            ErrorSampler::Dense { n, cdf } => {
                let u = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
                let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                let p = Pauli::from_dense_index(*n, idx);
                (p.x_bits(), p.z_bits())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub twirls: u32,
    pub seed: u64,
    pub twirling: bool,
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig { shots: 10_000, twirls: 16, seed: 0, twirling: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub shots: u64,
    pub twirls: u32,
}

impl ExpectationEstimate {
    /// Mean and standard error of ±1-valued (or scaled) samples.
    pub fn from_moments(sum: f64, sum_sq: f64, shots: u64, twirls: u32) -> Self {
        let n = shots.max(1) as f64;
        let mean = sum / n;
        let var = if shots > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        ExpectationEstimate { value: mean, stderr: (var / n).sqrt(), shots, twirls }
    }
}

/// Outcome histogram of one circuit; bit q of a key is qubit q.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub n: usize,
    pub shots: u64,
    pub histogram: BTreeMap<u128, u64>,
}

impl Counts {
    /// Parity estimate of an observable measured by the circuit's basis.
    pub fn expectation(&self, support: u128, twirls: u32) -> ExpectationEstimate {
        let mut sum = 0.0;
        for (&k, &c) in &self.histogram {
            let s = if (k & support).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            sum += s * c as f64;
        }
        ExpectationEstimate::from_moments(sum, self.shots as f64, self.shots, twirls)
    }

    /// Bitstrings with qubit 0 leftmost.
    pub fn labelled(&self) -> BTreeMap<String, u64> {
        self.histogram.iter().map(|(&k, &c)| (crate::pauli::pattern_label(self.n, k), c)).collect()
    }
}

pub(crate) enum Step<'a> {
    PrepNoise,
    Singles(&'a [Clifford1]),
    Layer(&'a CliffordLayer, usize),
    Readout(Vec<Clifford1>),
}

/// Circuit compiled for repeated frame simulation.
pub(crate) struct FrameProgram<'a> {
    pub n: usize,
    pub steps: Vec<Step<'a>>,
    pub layer_ids: Vec<String>,
    pub outcomes: OutcomeSampler,
}

impl<'a> FrameProgram<'a> {
    pub(crate) fn new(circuit: &'a Circuit) -> Result<Self> {
        let mut layer_ids: Vec<String> = Vec::new();
        let mut steps = Vec::new();
        for op in circuit.ops() {
            match op {
                Op::Prepare(_) => steps.push(Step::PrepNoise),
                Op::SingleQubit(cs) => steps.push(Step::Singles(cs)),
                Op::Layer(id) => {
                    let k = match layer_ids.iter().position(|l| l == id) {
                        Some(k) => k,
                        None => {
                            layer_ids.push(id.clone());
                            layer_ids.len() - 1
                        }
                    };
                    steps.push(Step::Layer(circuit.gates().layer(id)?, k));
                }
                Op::Pauli(_) => {}
                Op::Measure(basis) => steps.push(Step::Readout(rotation_to_z(basis))),
            }
        }
        Ok(FrameProgram { n: circuit.n(), steps, layer_ids, outcomes: OutcomeSampler::new(circuit)? })
    }

    /// Number of layer steps.
    pub(crate) fn layer_steps(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Layer(..))).count()
    }
}

fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> Pauli {
    let mask = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };
    Pauli::from_bits(n, rng.random::<u128>() & mask, rng.random::<u128>() & mask, false).expect("masked")
}

fn bits(n: usize, (x, z): (u128, u128)) -> Pauli {
    Pauli::from_bits(n, x, z, false).expect("channel generators fit the register")
}

/// Simulate `shots` noisy shots of one twirl instance. `extra` may add
/// frame insertions per slot (slot index: 0 prep, 1.. layers in order,
/// last readout) and returns the sign to attach to the shot.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_frames<F>(
    prog: &FrameProgram<'_>,
    prep: &ErrorSampler,
    layers: &[&ErrorSampler],
    meas: &ErrorSampler,
    twirl_paulis: Option<&[Pauli]>,
    mut rng_for_shot: impl FnMut(u64) -> ChaCha8Rng,
    shots: u64,
    mut extra: F,
    mut record: impl FnMut(u128, bool),
) where
    F: FnMut(usize, &mut ChaCha8Rng) -> (u128, u128, bool),
{
    let n = prog.n;
    for shot in 0..shots {
        let mut rng = rng_for_shot(shot);
        let mut frame = Pauli::identity(n);
        let mut neg = false;
        let mut slot = 0usize;
        let mut layer_no = 0usize;
        let mut flips_mask = 0u128;
        let ideal = prog.outcomes.sample(&mut rng);
        for step in &prog.steps {
            match step {
                Step::PrepNoise => {
                    frame = frame.frame_mul(&bits(n, prep.draw(&mut rng)));
                    let (x, z, s) = extra(slot, &mut rng);
                    frame = frame.frame_mul(&bits(n, (x, z)));
                    neg ^= s;
                    slot += 1;
                }
                Step::Singles(cs) => frame = conjugate_singles(cs, &frame),
                Step::Layer(layer, k) => {
                    let t = twirl_paulis.map(|t| t[layer_no]);
                    if let Some(t) = &t {
                        frame = frame.frame_mul(t);
                    }
                    let (x, z, s) = extra(slot, &mut rng);
                    frame = frame.frame_mul(&bits(n, (x, z)));
                    neg ^= s;
                    frame = frame.frame_mul(&bits(n, layers[*k].draw(&mut rng)));
                    frame = layer.apply(&frame);
                    if let Some(t) = &t {
                        frame = frame.frame_mul(&layer.apply(t));
                    }
                    slot += 1;
                    layer_no += 1;
                }
                Step::Readout(rot) => {
                    frame = conjugate_singles(rot, &frame);
                    let (x, z, s) = extra(slot, &mut rng);
                    frame = frame.frame_mul(&bits(n, (x, z)));
                    neg ^= s;
                    frame = frame.frame_mul(&bits(n, meas.draw(&mut rng)));
                    if twirl_paulis.is_some() {
                        // flip a random subset before readout, undo afterwards
                        let mask = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };
                        flips_mask = rng.random::<u128>() & mask;
                        frame = frame.frame_mul(&Pauli::x_on(n, flips_mask));
                    }
                }
            }
        }
        let outcome = ideal ^ frame.x_bits() ^ flips_mask;
        record(outcome, neg);
    }
}

/// Build error samplers for every slot of a circuit.
pub(crate) fn samplers(
    model: &GateSetNoiseModel,
    prog: &FrameProgram<'_>,
) -> Result<(ErrorSampler, Vec<ErrorSampler>, ErrorSampler)> {
    if model.n() != prog.n {
        return Err(Error::Dimension { expected: prog.n, found: model.n() });
    }
    let prep = ErrorSampler::new(model.prep())?;
    let meas = ErrorSampler::new(model.meas())?;
    let layers = prog.layer_ids.iter().map(|id| ErrorSampler::new(model.layer(id)?)).collect::<Result<Vec<_>>>()?;
    Ok((prep, layers, meas))
}

/// Sample a noisy circuit and estimate each observable from the counts.
///
/// `domain` separates the random streams of different circuits that share
/// a seed.
pub fn sample_counts(
    circuit: &Circuit,
    model: &GateSetNoiseModel,
    observables: &[Pauli],
    cfg: &ShotConfig,
    domain: u64,
) -> Result<(Counts, Vec<ExpectationEstimate>)> {
    if cfg.shots == 0 || cfg.twirls == 0 {
        return Err(Error::Invalid("shots and twirls must be positive".into()));
    }
    for o in observables {
        if !circuit.measures(o) {
            return Err(Error::Invalid(format!("{o} is not measured by the final basis")));
        }
    }
    let prog = FrameProgram::new(circuit)?;
    let (prep, layers, meas) = samplers(model, &prog)?;
    let layer_refs: Vec<&ErrorSampler> = layers.iter().collect();
    let n = circuit.n();
    let twirls = cfg.twirls as u64;
    let per = |t: u64| cfg.shots / twirls + u64::from(t < cfg.shots % twirls);
    let parts = par::map_range(twirls as usize, |t| {
        let t = t as u64;
        let twirl_paulis: Option<Vec<Pauli>> = cfg.twirling.then(|| {
            let mut trng = stream_rng(cfg.seed, domain, t, u64::MAX);
            (0..prog.layer_steps()).map(|_| random_pauli(n, &mut trng)).collect()
        });
        let mut hist: HashMap<u128, u64> = HashMap::new();
        run_frames(
            &prog,
            &prep,
            &layer_refs,
            &meas,
            twirl_paulis.as_deref(),
            |shot| stream_rng(cfg.seed, domain, t, shot),
            per(t),
            |_, _| (0, 0, false),
            |outcome, _| *hist.entry(outcome).or_default() += 1,
        );
        hist
    });
    let mut counts = Counts { n, shots: cfg.shots, histogram: BTreeMap::new() };
    for h in parts {
        for (k, c) in h {
            *counts.histogram.entry(k).or_default() += c;
        }
    }
    let estimates = observables.iter().map(|o| counts.expectation(o.support(), cfg.twirls)).collect();
    Ok((counts, estimates))
}
