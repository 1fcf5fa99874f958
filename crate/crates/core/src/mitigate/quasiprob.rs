//! Quasi-probability representations of inverse Pauli channels.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::channel::{inverse_walsh_hadamard, PauliChannel};
use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, GateSetNoiseModel, Slot};
use crate::pauli::Pauli;
use crate::sim::sample::FactorDraw;

/// Dense inverse: p*_a = 4^{-n} Σ_b (−1)^⟨a,b⟩ / λ_b.
#[derive(Clone, Debug)]
pub struct DenseInverse {
    n: usize,
    quasi: Vec<f64>,
    gamma: f64,
    cdf: Vec<f64>,
}

pub const DENSE_INVERSE_MAX_QUBITS: usize = 6;

impl DenseInverse {
    pub fn new(ch: &PauliChannel) -> Result<Self> {
        let n = ch.n();
        if n > DENSE_INVERSE_MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        if let Some(l) = ch.eigenvalues().iter().find(|&&l| l <= 0.0) {
            return Err(Error::NotPhysical(format!("eigenvalue {l} cannot be inverted")));
        }
        let inv: Vec<f64> = ch.eigenvalues().iter().map(|l| 1.0 / l).collect();
        let quasi = inverse_walsh_hadamard(&inv);
        let gamma: f64 = quasi.iter().map(|q| q.abs()).sum();
        let mut acc = 0.0;
        let cdf = quasi
            .iter()
            .map(|q| {
                acc += q.abs() / gamma;
                acc
            })
            .collect();
        Ok(DenseInverse { n, quasi, gamma, cdf })
    }

    /// p*_a indexed densely.
    pub fn quasi(&self) -> &[f64] {
        &self.quasi
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn negative_mass(&self) -> f64 {
        self.quasi.iter().filter(|&&q| q < 0.0).map(|q| -q / self.gamma).sum()
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (u128, u128, bool) {
        let u = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let p = Pauli::from_dense_index(self.n, i);
        (p.x_bits(), p.z_bits(), self.quasi[i] < 0.0)
    }

    fn signed_eigenvalue(&self, b: &Pauli) -> f64 {
        self.quasi
            .iter()
            .enumerate()
            .map(|(i, q)| if Pauli::from_dense_index(self.n, i).commutes_with(b) { *q } else { -q })
            .sum()
    }
}

/// Product of inverted generator factors, one per τ_a.
#[derive(Clone, Debug)]
pub struct FactoredInverse {
    // (generator, probability of inserting it, negative)
    factors: Vec<(Pauli, f64, bool)>,
    log_gamma: f64,
    sampler: FactorDraw,
}

impl FactoredInverse {
    pub fn new(params: &ChannelParams) -> Self {
        let mut factors = Vec::new();
        let mut log_gamma = 0.0;
        for (a, &t) in params.generators().members().iter().zip(params.tau()) {
            // inverse factor has eigenvalue e^{τ} on anticommuting labels
            let prob = (1.0 - (-t.abs()).exp()) / 2.0;
            factors.push((*a, prob, t > 0.0));
            log_gamma += t.max(0.0);
        }
        let sampler = FactorDraw::new(factors.iter().map(|(a, p, s)| (a.x_bits(), a.z_bits(), *p, *s)).collect());
        FactoredInverse { factors, log_gamma, sampler }
    }

    pub fn gamma(&self) -> f64 {
        self.log_gamma.exp()
    }

    pub fn log_gamma(&self) -> f64 {
        self.log_gamma
    }

    /// Probability that a draw carries a negative sign.
    pub fn negative_mass(&self) -> f64 {
        let even: f64 = self.factors.iter().filter(|f| f.2).map(|f| 1.0 - 2.0 * f.1).product();
        (1.0 - even) / 2.0
    }

    fn signed_eigenvalue(&self, b: &Pauli) -> f64 {
        let g = self.gamma();
        g * self
            .factors
            .iter()
            .map(|(a, p, neg)| {
                let s = if *neg { -1.0 } else { 1.0 };
                let flip = if a.commutes_with(b) { 1.0 } else { -1.0 };
                (1.0 - p) + s * p * flip
            })
            .product::<f64>()
    }
}

#[derive(Clone, Debug)]
pub enum ChannelInverse {
    Dense(DenseInverse),
    Factored(FactoredInverse),
}

impl ChannelInverse {
    pub fn gamma(&self) -> f64 {
        match self {
            ChannelInverse::Dense(d) => d.gamma(),
            ChannelInverse::Factored(f) => f.gamma(),
        }
    }

    pub fn negative_mass(&self) -> f64 {
        match self {
            ChannelInverse::Dense(d) => d.negative_mass(),
            ChannelInverse::Factored(f) => f.negative_mass(),
        }
    }

    /// One insertion (x, z, negative).
    #[inline]
    pub fn draw<R: Rng>(&self, rng: &mut R) -> (u128, u128, bool) {
        match self {
            ChannelInverse::Dense(d) => d.draw(rng),
            ChannelInverse::Factored(f) => f.sampler.draw(rng),
        }
    }

    /// Σ_a p*_a (−1)^⟨a,b⟩, summed term by term.
    pub fn signed_eigenvalue(&self, b: &Pauli) -> f64 {
        match self {
            ChannelInverse::Dense(d) => d.signed_eigenvalue(b),
            ChannelInverse::Factored(f) => f.signed_eigenvalue(b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    /// Dense up to three qubits, factored above.
    Auto,
    Dense,
    Factored,
}

pub fn inverse_quasiprob_dense(ch: &PauliChannel) -> Result<ChannelInverse> {
    Ok(ChannelInverse::Dense(DenseInverse::new(ch)?))
}

pub fn inverse_quasiprob_factored(params: &ChannelParams) -> ChannelInverse {
    ChannelInverse::Factored(FactoredInverse::new(params))
}

/// Inverses for every slot of a learned model.
#[derive(Clone, Debug)]
pub struct QuasiProbPlan {
    pub prep: ChannelInverse,
    pub meas: ChannelInverse,
    pub layers: BTreeMap<String, ChannelInverse>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRow {
    pub slot: String,
    pub gamma: f64,
    pub negative_mass: f64,
}

impl QuasiProbPlan {
    pub fn new(model: &GateSetNoiseModel, mode: PlanMode) -> Result<Self> {
        let dense = match mode {
            PlanMode::Auto => model.n() <= 3,
            PlanMode::Dense => true,
            PlanMode::Factored => false,
        };
        let inv = |c: &ChannelParams| -> Result<ChannelInverse> {
            if dense {
                inverse_quasiprob_dense(&c.to_dense()?)
            } else {
                Ok(inverse_quasiprob_factored(c))
            }
        };
        let layers = model.layers().map(|(id, c)| Ok((id.to_string(), inv(c)?))).collect::<Result<_>>()?;
        Ok(QuasiProbPlan { prep: inv(model.prep())?, meas: inv(model.meas())?, layers })
    }

    pub fn slot(&self, s: &Slot) -> Result<&ChannelInverse> {
        match s {
            Slot::Prep => Ok(&self.prep),
            Slot::Meas => Ok(&self.meas),
            Slot::Layer(id) => self.layers.get(id).ok_or_else(|| Error::Invalid(format!("no inverse for layer {id}"))),
        }
    }

    /// Product of slot overheads over one run of `circuit`.
    pub fn circuit_gamma(&self, circuit: &Circuit) -> Result<f64> {
        let mut g = self.prep.gamma() * self.meas.gamma();
        for op in circuit.ops() {
            if let Op::Layer(id) = op {
                g *= self.slot(&Slot::Layer(id.clone()))?.gamma();
            }
        }
        Ok(g)
    }

    /// Sum of ln γ over gate layers only.
    pub fn gate_log_gamma(&self) -> f64 {
        self.layers.values().map(|c| c.gamma().ln()).sum()
    }

    pub fn gamma_table(&self) -> Vec<GammaRow> {
        let row = |slot: String, c: &ChannelInverse| GammaRow { slot, gamma: c.gamma(), negative_mass: c.negative_mass() };
        let mut out = vec![row("prep".into(), &self.prep), row("meas".into(), &self.meas)];
        out.extend(self.layers.iter().map(|(id, c)| row(format!("layer:{id}"), c)));
        out
    }
}
