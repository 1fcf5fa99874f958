//! Run configuration: one flat TOML document with a schema version.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use scpec::devices::{
    asymmetric_pair_truth, line_gates, pair_gates, pair_ratio_truth, random_truth, ring_factor_sets, ring_gates, RandomTruth,
};
use scpec::{ChannelParams, FactorSet, GateSet, GateSetNoiseModel, GaugeClass, GeneratorSet, Pauli, Slot};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Pair,
    Line,
    Ring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Learn,
    Mitigate,
    GaugeOpt,
    Report,
}

impl std::str::FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "learn" => Ok(Task::Learn),
            "mitigate" => Ok(Task::Mitigate),
            "gauge-opt" => Ok(Task::GaugeOpt),
            "report" => Ok(Task::Report),
            other => Err(CliError::Config(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthKind {
    /// The fixed two-qubit model with λ_IZ = .99, λ_ZZ = .95.
    AsymmetricPair,
    /// Uniform rates with a multiplicative skew on every conjugate pair.
    PairRatio,
    Random,
    /// Per-channel τ values from `tau`.
    Explicit,
}

fn default_name() -> String {
    "run".into()
}
fn default_max_depth() -> usize {
    8
}
fn default_blocks() -> usize {
    4
}
fn default_epsilon_factor() -> f64 {
    1.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub topology: Topology,
    pub n: usize,
    /// `full` (pair), `line-local` or `ring-local`.
    pub ansatz: String,
    pub depths: Vec<usize>,
    pub shots: u64,
    pub twirls: u32,
    pub seed: u64,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub exact: bool,

    pub truth: TruthKind,
    #[serde(default)]
    pub truth_seed: u64,
    pub tau_max: Option<f64>,
    pub density: Option<f64>,
    pub asymmetry: Option<f64>,
    pub spam_max: Option<f64>,
    pub meas_scale: Option<f64>,
    pub base: Option<f64>,
    pub ratio: Option<f64>,
    pub spam_prep: Option<f64>,
    pub spam_meas: Option<f64>,
    /// Entries `slot:LABEL=τ` with slot `prep`, `meas` or a layer id.
    #[serde(default)]
    pub tau: Vec<String>,

    /// Line only: GHZ sizes to sweep; defaults to `[n]`.
    #[serde(default)]
    pub sweep: Vec<usize>,
    /// Pair only: repeated-CNOT depths 1..=max_depth are mitigated.
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    /// Ring only: staircase block-layers.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    /// Residual budget of the one-step optimizer, relative to the LS residual.
    #[serde(default = "default_epsilon_factor")]
    pub epsilon_factor: f64,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(invalid(format!("unsupported schema {}, expected {SCHEMA}", self.schema)));
        }
        let want = match self.topology {
            Topology::Pair => "full",
            Topology::Line => "line-local",
            Topology::Ring => "ring-local",
        };
        if self.ansatz != want {
            return Err(invalid(format!("{:?} topology needs ansatz {want:?}, got {:?}", self.topology, self.ansatz)));
        }
        match self.topology {
            Topology::Pair if self.n != 2 => return Err(invalid("pair topology has n = 2")),
            Topology::Line => {
                for &m in self.sizes().iter() {
                    if m < 3 || m % 2 == 0 || m > 127 {
                        return Err(invalid(format!("GHZ sizes must be odd and in 3..=127, got {m}")));
                    }
                }
            }
            Topology::Ring if !self.n.is_multiple_of(4) || self.n == 0 || self.n > 128 => {
                return Err(invalid(format!("ring size must be a positive multiple of four up to 128, got {}", self.n)));
            }
            _ => {}
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(invalid("depths must be a non-empty list of positive integers"));
        }
        if !self.exact && (self.shots == 0 || self.twirls == 0) {
            return Err(invalid("shots and twirls must be positive unless exact = true"));
        }
        if self.tasks.contains(&Task::GaugeOpt) && self.topology != Topology::Ring {
            return Err(invalid("gauge-opt needs the ring-local ansatz"));
        }
        if !(self.epsilon_factor.is_finite() && self.epsilon_factor > 0.0) {
            return Err(invalid("epsilon_factor must be positive"));
        }
        if self.truth == TruthKind::AsymmetricPair && self.topology != Topology::Pair {
            return Err(invalid("asymmetric-pair truth needs the pair topology"));
        }
        if self.truth == TruthKind::PairRatio && (self.base.is_none() || self.ratio.is_none()) {
            return Err(invalid("pair-ratio truth needs base and ratio"));
        }
        if self.truth != TruthKind::Explicit && !self.tau.is_empty() {
            return Err(invalid("tau entries are only read by explicit truth"));
        }
        Ok(())
    }

    /// Problem sizes this run covers.
    pub fn sizes(&self) -> Vec<usize> {
        if self.topology == Topology::Line && !self.sweep.is_empty() {
            self.sweep.clone()
        } else {
            vec![self.n]
        }
    }

    pub fn gates(&self, n: usize) -> Result<Arc<GateSet>, CliError> {
        let g = match self.topology {
            Topology::Pair => Ok(pair_gates()),
            Topology::Line => line_gates(n),
            Topology::Ring => ring_gates(n),
        };
        g.map_err(|e| invalid(e.to_string()))
    }

    /// SPAM factor set, per-layer factor sets and gauge class of the ansatz.
    fn factor_sets(&self, gates: &GateSet) -> Result<(FactorSet, BTreeMap<String, FactorSet>, GaugeClass), CliError> {
        let n = gates.n();
        let e = |e: scpec::Error| invalid(e.to_string());
        Ok(match self.topology {
            Topology::Pair => {
                let f = FactorSet::full(2).map_err(e)?;
                (f.clone(), BTreeMap::from([("cx".to_string(), f)]), GaugeClass::PerPattern)
            }
            Topology::Line => {
                let edges: Vec<(usize, usize)> = (0..n - 1).map(|q| (q, q + 1)).collect();
                let f = FactorSet::local(n, &edges).map_err(e)?;
                (f.clone(), gates.ids().map(|id| (id.to_string(), f.clone())).collect(), GaugeClass::PerQubit)
            }
            Topology::Ring => {
                let (spam, layers) = ring_factor_sets(n).map_err(e)?;
                (spam, layers, GaugeClass::PerQubit)
            }
        })
    }

    /// The injected noise model on `gates`.
    pub fn truth(&self, gates: &Arc<GateSet>) -> Result<GateSetNoiseModel, CliError> {
        let e = |e: scpec::Error| invalid(format!("truth model: {e}"));
        match self.truth {
            TruthKind::AsymmetricPair => asymmetric_pair_truth().map_err(e),
            TruthKind::PairRatio => pair_ratio_truth(
                gates.clone(),
                self.base.unwrap_or_default(),
                self.ratio.unwrap_or(1.0),
                self.spam_prep.unwrap_or_default(),
                self.spam_meas.unwrap_or_default(),
            )
            .map_err(e),
            TruthKind::Random => {
                let (spam, layers, gauge) = self.factor_sets(gates)?;
                let d = RandomTruth::default();
                let knobs = RandomTruth {
                    tau_max: self.tau_max.unwrap_or(d.tau_max),
                    density: self.density.unwrap_or(d.density),
                    asymmetry: self.asymmetry.unwrap_or(d.asymmetry),
                    spam_max: self.spam_max.unwrap_or(d.spam_max),
                    meas_scale: self.meas_scale.unwrap_or(d.meas_scale),
                    seed: self.truth_seed,
                };
                random_truth(gates.clone(), &spam, &layers, gauge, &knobs).map_err(e)
            }
            TruthKind::Explicit => self.explicit_truth(gates),
        }
    }

    fn explicit_truth(&self, gates: &Arc<GateSet>) -> Result<GateSetNoiseModel, CliError> {
        let (spam, layer_sets, gauge) = self.factor_sets(gates)?;
        let e = |e: scpec::Error| invalid(format!("truth model: {e}"));
        let spam_gens = Arc::new(GeneratorSet::new(spam));
        let mut taus: BTreeMap<Slot, (Arc<GeneratorSet>, Vec<f64>)> = BTreeMap::new();
        taus.insert(Slot::Prep, (spam_gens.clone(), vec![0.0; spam_gens.len()]));
        taus.insert(Slot::Meas, (spam_gens.clone(), vec![0.0; spam_gens.len()]));
        for (id, f) in layer_sets {
            let g = Arc::new(GeneratorSet::new(f));
            let len = g.len();
            taus.insert(Slot::Layer(id), (g, vec![0.0; len]));
        }
        for entry in &self.tau {
            let (slot, rest) =
                entry.split_once(':').ok_or_else(|| invalid(format!("tau entry {entry:?} is not slot:LABEL=value")))?;
            let (label, value) =
                rest.split_once('=').ok_or_else(|| invalid(format!("tau entry {entry:?} is not slot:LABEL=value")))?;
            let slot = match slot.trim() {
                "prep" => Slot::Prep,
                "meas" => Slot::Meas,
                id => Slot::Layer(id.to_string()),
            };
            let a: Pauli = label.trim().parse().map_err(|e: scpec::Error| invalid(format!("tau entry {entry:?}: {e}")))?;
            let v: f64 = value.trim().parse().map_err(|_| invalid(format!("tau entry {entry:?}: bad number")))?;
            let (g, t) = taus.get_mut(&slot).ok_or_else(|| invalid(format!("tau entry {entry:?}: unknown slot")))?;
            let i =
                g.index_of(&a).ok_or_else(|| invalid(format!("tau entry {entry:?}: {a} is not a generator of the ansatz")))?;
            t[i] = v;
        }
        let mut build = |slot: Slot| -> Result<ChannelParams, CliError> {
            let (g, t) = taus.remove(&slot).expect("slot registered above");
            ChannelParams::from_tau(slot, g, t).map_err(e)
        };
        let prep = build(Slot::Prep)?;
        let meas = build(Slot::Meas)?;
        let layers = gates
            .ids()
            .map(|id| Ok((id.to_string(), build(Slot::Layer(id.to_string()))?)))
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        let physical = [&prep, &meas].into_iter().chain(layers.values()).all(|c| c.is_physical());
        GateSetNoiseModel::new("explicit", gauge, gates.clone(), prep, meas, layers, !physical).map_err(e)
    }
}
