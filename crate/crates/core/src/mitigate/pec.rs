//! Probabilistic error cancellation: exact expectation and sampling.

use serde::Serialize;

use super::quasiprob::{PlanMode, QuasiProbPlan};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::model::{FidelitySource, GateSetNoiseModel, Slot};
use crate::par;
use crate::pauli::Pauli;
use crate::sim::backpropagate_observable;
use crate::sim::sample::{run_frames, samplers, stream_rng, FrameProgram};

/// Expected PEC estimate, summing every insertion with its quasi-probability.
/// Each slot contributes Σ_a p*_a (−1)^⟨a,b⟩ for the Pauli b the observable
/// sees there; the sums are exact and independent across slots.
pub fn pec_expectation_with_plan(
    circuit: &Circuit,
    truth: &dyn FidelitySource,
    plan: &QuasiProbPlan,
    observable: &Pauli,
) -> Result<f64> {
    let bp = backpropagate_observable(circuit, observable)?;
    if bp.ideal == 0.0 {
        return Ok(0.0);
    }
    let mut v = bp.ideal;
    for (slot, b) in &bp.terms {
        v *= (-truth.log_fidelity(slot, b)?).exp() * plan.slot(slot)?.signed_eigenvalue(b);
    }
    Ok(v)
}

/// Exact PEC expectation with the learned model's inverse. Dense
/// quasi-probabilities for n ≤ 3, generator factors above.
pub fn pec_expectation_exact(
    circuit: &Circuit,
    truth: &dyn FidelitySource,
    learned: &GateSetNoiseModel,
    observable: &Pauli,
) -> Result<f64> {
    let plan = QuasiProbPlan::new(learned, PlanMode::Auto)?;
    pec_expectation_with_plan(circuit, truth, &plan, observable)
}

/// Infinite-sample mitigated value for any learned fidelities:
/// ideal · Π exp(x̂ − x) along the path.
pub fn mitigated_expectation(
    circuit: &Circuit,
    truth: &dyn FidelitySource,
    learned: &dyn FidelitySource,
    observable: &Pauli,
) -> Result<f64> {
    let bp = backpropagate_observable(circuit, observable)?;
    if bp.ideal == 0.0 {
        return Ok(0.0);
    }
    let mut log = 0.0;
    for (slot, b) in &bp.terms {
        log += learned.log_fidelity(slot, b)? - truth.log_fidelity(slot, b)?;
    }
    Ok(bp.ideal * log.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct PecEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Product of slot overheads for this circuit.
    pub gamma: f64,
    /// Observed fraction of samples with a negative sign.
    pub negative_fraction: f64,
    pub sample_variance: f64,
    /// γ² − ideal²: the variance of ±γ-valued samples with the ideal mean.
    pub predicted_variance: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PecConfig {
    pub samples: u64,
    pub twirls: u32,
    pub seed: u64,
}

/// Sampled PEC: each shot draws one insertion per slot, runs the noisy
/// circuit on `truth`, and records γ · sign · outcome parity.
pub fn pec_sample(
    circuit: &Circuit,
    truth: &GateSetNoiseModel,
    plan: &QuasiProbPlan,
    observable: &Pauli,
    cfg: &PecConfig,
) -> Result<PecEstimate> {
    if cfg.samples == 0 || cfg.twirls == 0 {
        return Err(Error::Invalid("samples and twirls must be positive".into()));
    }
    if !circuit.measures(observable) {
        return Err(Error::Invalid(format!("{observable} is not measured by the final basis")));
    }
    let prog = FrameProgram::new(circuit)?;
    let (prep, layers, meas) = samplers(truth, &prog)?;
    let layer_refs: Vec<_> = layers.iter().collect();
    // slot order: prep, each layer occurrence, readout
    let mut slots = vec![plan.slot(&Slot::Prep)?];
    for op in circuit.ops() {
        if let crate::circuit::Op::Layer(id) = op {
            slots.push(plan.slot(&Slot::Layer(id.clone()))?);
        }
    }
    slots.push(plan.slot(&Slot::Meas)?);
    let gamma = plan.circuit_gamma(circuit)?;
    let support = observable.support();
    let n = circuit.n();
    let twirls = cfg.twirls as u64;
    let per = |t: u64| cfg.samples / twirls + u64::from(t < cfg.samples % twirls);
    const DOMAIN: u64 = 0x5045_4300;
    let parts = par::map_range(twirls as usize, |t| {
        let t = t as u64;
        let mut trng = stream_rng(cfg.seed, DOMAIN, t, u64::MAX);
        let twirl: Vec<Pauli> = (0..prog.layer_steps())
            .map(|_| {
                use rand::Rng;
                let mask = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };
                Pauli::from_bits(n, trng.random::<u128>() & mask, trng.random::<u128>() & mask, false).expect("masked")
            })
            .collect();
        let (mut sum, mut sum_sq, mut negs) = (0.0f64, 0.0f64, 0u64);
        run_frames(
            &prog,
            &prep,
            &layer_refs,
            &meas,
            Some(&twirl),
            |shot| stream_rng(cfg.seed, DOMAIN, t, shot),
            per(t),
            |slot, rng| slots[slot].draw(rng),
            |outcome, neg| {
                let parity = (outcome & support).count_ones() % 2 == 1;
                let v = if parity ^ neg { -gamma } else { gamma };
                sum += v;
                sum_sq += v * v;
                negs += u64::from(neg);
            },
        );
        (sum, sum_sq, negs)
    });
    let (sum, sum_sq, negs) = parts.iter().fold((0.0, 0.0, 0u64), |(s, q, k), (a, b, c)| (s + a, q + b, k + c));
    let m = cfg.samples as f64;
    let mean = sum / m;
    let var = if cfg.samples > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
    let ideal = backpropagate_observable(circuit, observable)?.ideal;
    Ok(PecEstimate {
        value: mean,
        stderr: (var / m).sqrt(),
        samples: cfg.samples,
        gamma,
        negative_fraction: negs as f64 / m,
        sample_variance: var,
        predicted_variance: gamma * gamma - ideal * ideal,
    })
}
