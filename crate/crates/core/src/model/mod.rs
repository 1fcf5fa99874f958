//! Quasi-local Pauli noise models for a gate set.
//!
//! Every channel is parameterized over a generator set `K` derived from a
//! factor set `Ω`. The log-fidelities `x_a = −ln λ_a` on `K` are canonical;
//! generator rates `τ` and Möbius parameters `r` are linear views.

mod serial;
pub mod space;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::PauliChannel;
use crate::clifford::CliffordLayer;
use crate::error::{Error, Result};
use crate::pauli::{Pattern, Pauli, MAX_QUBITS};

pub use serial::ModelDocument;

/// Downward-closed family of non-empty qubit subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSet {
    n: usize,
    subsets: BTreeSet<Pattern>,
}

fn submasks(pattern: Pattern) -> impl Iterator<Item = Pattern> {
    // non-empty submasks, descending
    let mut next = Some(pattern);
    std::iter::from_fn(move || {
        let cur = next?;
        if cur == 0 {
            return None;
        }
        next = Some((cur - 1) & pattern);
        Some(cur)
    })
}

impl FactorSet {
    /// Validate an explicit family.
    pub fn new(n: usize, subsets: impl IntoIterator<Item = Pattern>) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let subsets: BTreeSet<Pattern> = subsets.into_iter().filter(|&p| p != 0).collect();
        for &s in &subsets {
            if n < 128 && s >> n != 0 {
                return Err(Error::Invalid(format!("subset {s:#b} outside {n} qubits")));
            }
            if s.count_ones() > 24 {
                return Err(Error::Invalid("factor of more than 24 qubits".into()));
            }
            if let Some(missing) = submasks(s).find(|m| !subsets.contains(m)) {
                return Err(Error::Invalid(format!("not downward closed: {missing:#b} missing below {s:#b}")));
            }
        }
        Ok(FactorSet { n, subsets })
    }

    /// Downward closure of the given maximal subsets.
    pub fn closure(n: usize, maximal: &[Pattern]) -> Result<Self> {
        let all: BTreeSet<Pattern> = maximal.iter().flat_map(|&m| submasks(m)).collect();
        Self::new(n, all)
    }

    /// Every subset of the register (dense models).
    pub fn full(n: usize) -> Result<Self> {
        if n > 6 {
            return Err(Error::Invalid(format!("full factor set limited to n <= 6, got {n}")));
        }
        Self::new(n, 1..(1u128 << n))
    }

    /// Single qubits plus the given edges.
    pub fn local(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut max: Vec<Pattern> = (0..n).map(|q| 1u128 << q).collect();
        max.extend(edges.iter().map(|&(a, b)| (1u128 << a) | (1u128 << b)));
        Self::closure(n, &max)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subsets(&self) -> impl Iterator<Item = Pattern> + '_ {
        self.subsets.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn contains(&self, p: Pattern) -> bool {
        self.subsets.contains(&p)
    }

    /// True when every subset of the register is present.
    pub fn is_full(&self) -> bool {
        self.n <= 24 && self.subsets.len() == (1usize << self.n) - 1
    }

    /// Members contained in `pattern`.
    pub fn members_within(&self, pattern: Pattern) -> Vec<Pattern> {
        let w = pattern.count_ones();
        if (w as usize) < 12 && (1usize << w) < 4 * self.subsets.len() {
            submasks(pattern).filter(|s| self.subsets.contains(s)).collect()
        } else {
            self.subsets.iter().copied().filter(|s| s & !pattern == 0).collect()
        }
    }
}

/// All non-identity Paulis supported on a member of Ω, in weight-then-lex order.
#[derive(Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    factors: FactorSet,
    members: Vec<Pauli>,
    index: HashMap<(u128, u128), usize>,
}

impl GeneratorSet {
    pub fn new(factors: FactorSet) -> Self {
        let n = factors.n();
        let mut members: Vec<Pauli> = factors.subsets().flat_map(|s| Pauli::with_support(n, s)).collect();
        members.sort_by(|a, b| a.cmp_weight_lex(b));
        let index = members.iter().enumerate().map(|(i, p)| ((p.x_bits(), p.z_bits()), i)).collect();
        GeneratorSet { factors, members, index }
    }

    pub fn n(&self) -> usize {
        self.factors.n()
    }

    pub fn factors(&self) -> &FactorSet {
        &self.factors
    }

    pub fn members(&self) -> &[Pauli] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, a: &Pauli) -> Option<usize> {
        self.index.get(&(a.x_bits(), a.z_bits())).copied()
    }
}

/// Which slot of the gate set a channel belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Prep,
    Meas,
    Layer(String),
}

impl Slot {
    pub fn is_spam(&self) -> bool {
        !matches!(self, Slot::Layer(_))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Prep => f.write_str("prep"),
            Slot::Meas => f.write_str("meas"),
            Slot::Layer(id) => write!(f, "layer:{id}"),
        }
    }
}

impl std::str::FromStr for Slot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prep" => Ok(Slot::Prep),
            "meas" => Ok(Slot::Meas),
            _ => s
                .strip_prefix("layer:")
                .filter(|id| !id.is_empty())
                .map(|id| Slot::Layer(id.to_string()))
                .ok_or_else(|| Error::Parse(format!("bad channel kind {s:?}"))),
        }
    }
}

/// Anything that assigns log-fidelities to (slot, Pauli) pairs.
pub trait FidelitySource: Sync {
    fn n(&self) -> usize;
    fn log_fidelity(&self, slot: &Slot, a: &Pauli) -> Result<f64>;
}

/// One channel's parameters over its generator set.
#[derive(Clone, Debug)]
pub struct ChannelParams {
    kind: Slot,
    gens: Arc<GeneratorSet>,
    x: Vec<f64>,
    tau: Vec<f64>,
}

/// Inverse of [`tau_to_x`] over K.
///
/// Restricted to a factor P ∈ Ω the channel is a full Pauli channel, so a
/// Walsh–Hadamard inversion on P gives, for each b supported in P, the total
/// rate of generators that agree with b on P. Subtracting the generators with
/// strictly larger support, largest first, leaves τ_b.
pub fn x_to_tau(gens: &GeneratorSet, x: &[f64]) -> Vec<f64> {
    let m = gens.members();
    let lumped: Vec<f64> = m
        .iter()
        .map(|b| {
            let s = b.support();
            let scale = -2.0 / 4f64.powi(s.count_ones() as i32);
            m.iter()
                .zip(x)
                .filter(|(a, _)| a.support() & !s == 0)
                .map(|(a, &xa)| if a.symplectic(b) == 0 { scale * xa } else { -scale * xa })
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(m[i].weight()));
    let mut tau = vec![0.0; m.len()];
    for &i in &order {
        let s = m[i].support();
        let above: f64 = m
            .iter()
            .zip(&tau)
            .filter(|(c, _)| c.support() != s && c.support() & s == s && c.restrict(s) == m[i])
            .map(|(_, t)| t)
            .sum();
        tau[i] = lumped[i] - above;
    }
    tau
}

/// x_target = Σ_b ⟨target,b⟩ τ_b.
pub fn tau_to_x(gens: &GeneratorSet, tau: &[f64], target: &Pauli) -> f64 {
    let supp = target.support();
    gens.members().iter().zip(tau).filter(|(b, _)| b.support() & supp != 0 && b.symplectic(target) == 1).map(|(_, t)| t).sum()
}

impl ChannelParams {
    pub fn from_x(kind: Slot, gens: Arc<GeneratorSet>, x: Vec<f64>) -> Result<Self> {
        if x.len() != gens.len() {
            return Err(Error::Dimension { expected: gens.len(), found: x.len() });
        }
        let tau = x_to_tau(&gens, &x);
        Ok(ChannelParams { kind, gens, x, tau })
    }

    pub fn from_tau(kind: Slot, gens: Arc<GeneratorSet>, tau: Vec<f64>) -> Result<Self> {
        if tau.len() != gens.len() {
            return Err(Error::Dimension { expected: gens.len(), found: tau.len() });
        }
        let x = gens.members().iter().map(|a| tau_to_x(&gens, &tau, a)).collect();
        Ok(ChannelParams { kind, gens, x, tau })
    }

    /// From Möbius parameters on K.
    pub fn from_r(kind: Slot, gens: Arc<GeneratorSet>, r: &[f64]) -> Result<Self> {
        if r.len() != gens.len() {
            return Err(Error::Dimension { expected: gens.len(), found: r.len() });
        }
        let x = gens.members().iter().map(|a| r_sum(&gens, r, a)).collect();
        Self::from_x(kind, gens, x)
    }

    /// Noise-free channel.
    pub fn zero(kind: Slot, gens: Arc<GeneratorSet>) -> Self {
        let len = gens.len();
        ChannelParams { kind, gens, x: vec![0.0; len], tau: vec![0.0; len] }
    }

    /// Read a dense channel into a full factor set (n ≤ 6).
    pub fn from_dense(kind: Slot, ch: &PauliChannel) -> Result<Self> {
        if !ch.is_invertible() {
            return Err(Error::Invalid("dense channel has a non-positive eigenvalue".into()));
        }
        let gens = Arc::new(GeneratorSet::new(FactorSet::full(ch.n())?));
        let x = gens.members().iter().map(|a| -ch.eigenvalue(a).ln()).collect();
        Self::from_x(kind, gens, x)
    }

    pub fn kind(&self) -> &Slot {
        &self.kind
    }

    pub fn generators(&self) -> &Arc<GeneratorSet> {
        &self.gens
    }

    pub fn n(&self) -> usize {
        self.gens.n()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Möbius parameters r_b = Σ_{a◁b} (−1)^{|b|−|a|} x_a.
    pub fn r(&self) -> Vec<f64> {
        x_to_r(&self.gens, &self.x)
    }

    /// x for any non-identity Pauli.
    pub fn tau_to_x(&self, target: &Pauli) -> Result<f64> {
        if target.is_identity() {
            return Err(Error::IdentityTarget);
        }
        if target.n() != self.n() {
            return Err(Error::Dimension { expected: self.n(), found: target.n() });
        }
        Ok(self.x_of(target))
    }

    /// x through the Möbius sum; agrees with `tau_to_x` on a factor-set model.
    pub fn r_to_x(&self, target: &Pauli) -> Result<f64> {
        if target.n() != self.n() {
            return Err(Error::Dimension { expected: self.n(), found: target.n() });
        }
        Ok(r_sum(&self.gens, &self.r(), target))
    }

    /// Log-fidelity; the identity maps to 0.
    #[inline]
    pub fn x_of(&self, target: &Pauli) -> f64 {
        if let Some(i) = self.gens.index_of(target) {
            return self.x[i];
        }
        tau_to_x(&self.gens, &self.tau, target)
    }

    pub fn eigenvalue(&self, target: &Pauli) -> f64 {
        (-self.x_of(target)).exp()
    }

    /// Non-negative generator rates make the channel a composition of
    /// proper Pauli channels.
    pub fn is_physical(&self) -> bool {
        self.tau.iter().all(|&t| t >= -1e-12)
    }

    /// x depends on the support pattern only.
    pub fn is_pattern_symmetric(&self, tol: f64) -> bool {
        let mut by_pattern: HashMap<Pattern, f64> = HashMap::new();
        self.gens.members().iter().zip(&self.x).all(|(a, &xa)| {
            let v = *by_pattern.entry(a.support()).or_insert(xa);
            (v - xa).abs() <= tol
        })
    }

    /// All 4^n eigenvalues (n ≤ 12).
    pub fn to_dense(&self) -> Result<PauliChannel> {
        let n = self.n();
        if n > crate::channel::DENSE_MAX_QUBITS {
            return Err(Error::Invalid(format!("dense expansion needs n <= 12, got {n}")));
        }
        let eig = Pauli::all(n).map(|a| if a.is_identity() { 1.0 } else { self.eigenvalue(&a) }).collect();
        PauliChannel::from_eigenvalues(n, eig)
    }

    pub(crate) fn with_x(&self, x: Vec<f64>) -> Result<Self> {
        Self::from_x(self.kind.clone(), self.gens.clone(), x)
    }
}

/// Möbius transform over K.
pub fn x_to_r(gens: &GeneratorSet, x: &[f64]) -> Vec<f64> {
    gens.members()
        .iter()
        .map(|b| {
            let wb = b.weight() as u32;
            submasks(b.support())
                .map(|p| {
                    let a = b.restrict(p);
                    let i = gens.index_of(&a).expect("factor set is downward closed");
                    let sign = if (wb - p.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * x[i]
                })
                .sum()
        })
        .collect()
}

// x_target = Σ_{P ∈ Ω, P ⊆ pt(target)} r_{target|P}
fn r_sum(gens: &GeneratorSet, r: &[f64], target: &Pauli) -> f64 {
    gens.factors()
        .members_within(target.support())
        .into_iter()
        .map(|p| r[gens.index_of(&target.restrict(p)).expect("restriction lies in K")])
        .sum()
}

/// How the gauge of an ansatz is parameterized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeClass {
    /// One depolarizing parameter per qubit.
    PerQubit,
    /// One parameter per support pattern.
    PerPattern,
}

/// Generalized depolarizing gauge map D_η in log-fidelity form.
#[derive(Clone, Debug, PartialEq)]
pub enum GaugeVector {
    /// η(P) = Σ_{i∈P} η_i
    PerQubit(Vec<f64>),
    /// η indexed by pattern; entry 0 must be 0.
    PerPattern(Vec<f64>),
}

impl GaugeVector {
    pub fn eta(&self, p: Pattern) -> f64 {
        match self {
            GaugeVector::PerQubit(e) => crate::pauli::pattern_qubits(p).map(|q| e[q]).sum(),
            GaugeVector::PerPattern(e) => e[p as usize],
        }
    }

    pub fn negated(&self) -> GaugeVector {
        match self {
            GaugeVector::PerQubit(e) => GaugeVector::PerQubit(e.iter().map(|v| -v).collect()),
            GaugeVector::PerPattern(e) => GaugeVector::PerPattern(e.iter().map(|v| -v).collect()),
        }
    }
}

/// The gate set: named entangling layers on a fixed register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSet {
    n: usize,
    layers: BTreeMap<String, CliffordLayer>,
}

impl GateSet {
    pub fn new(n: usize, layers: impl IntoIterator<Item = (String, CliffordLayer)>) -> Result<Self> {
        let layers: BTreeMap<String, CliffordLayer> = layers.into_iter().collect();
        for (id, l) in &layers {
            if l.n() != n {
                return Err(Error::Invalid(format!("layer {id} acts on {} qubits, expected {n}", l.n())));
            }
            if id.is_empty() || id.contains(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad layer id {id:?}")));
            }
        }
        Ok(GateSet { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layer(&self, id: &str) -> Result<&CliffordLayer> {
        self.layers.get(id).ok_or_else(|| Error::Invalid(format!("unknown layer {id:?}")))
    }

    pub fn layers(&self) -> impl Iterator<Item = (&str, &CliffordLayer)> {
        self.layers.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.layers.keys().map(|k| k.as_str())
    }
}

/// Noise model for state preparation, measurement and every layer.
#[derive(Clone, Debug)]
pub struct GateSetNoiseModel {
    n: usize,
    ansatz: String,
    gauge: GaugeClass,
    gates: Arc<GateSet>,
    prep: ChannelParams,
    meas: ChannelParams,
    layers: BTreeMap<String, ChannelParams>,
    nonphysical_ok: bool,
}

impl GateSetNoiseModel {
    pub fn new(
        ansatz: impl Into<String>,
        gauge: GaugeClass,
        gates: Arc<GateSet>,
        prep: ChannelParams,
        meas: ChannelParams,
        layers: BTreeMap<String, ChannelParams>,
        nonphysical_ok: bool,
    ) -> Result<Self> {
        let n = gates.n();
        let check = |c: &ChannelParams, want: &Slot| -> Result<()> {
            if c.n() != n {
                return Err(Error::Dimension { expected: n, found: c.n() });
            }
            if c.kind() != want {
                return Err(Error::Invalid(format!("channel {} stored under {want}", c.kind())));
            }
            Ok(())
        };
        check(&prep, &Slot::Prep)?;
        check(&meas, &Slot::Meas)?;
        for id in gates.ids() {
            let c = layers.get(id).ok_or_else(|| Error::Invalid(format!("no channel for layer {id}")))?;
            check(c, &Slot::Layer(id.to_string()))?;
        }
        if layers.len() != gates.layers.len() {
            return Err(Error::Invalid("channels for layers missing from the gate set".into()));
        }
        for c in [&prep, &meas] {
            if !c.is_pattern_symmetric(1e-9) {
                return Err(Error::Invalid(format!("{} channel must depend on support pattern only", c.kind())));
            }
        }
        let model = GateSetNoiseModel { n, ansatz: ansatz.into(), gauge, gates, prep, meas, layers, nonphysical_ok };
        if !nonphysical_ok && !model.is_physical() {
            return Err(Error::NotPhysical("negative generator rate without the nonphysical_ok flag".into()));
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn ansatz(&self) -> &str {
        &self.ansatz
    }
    pub fn gauge_class(&self) -> GaugeClass {
        self.gauge
    }
    pub fn gates(&self) -> &Arc<GateSet> {
        &self.gates
    }
    pub fn prep(&self) -> &ChannelParams {
        &self.prep
    }
    pub fn meas(&self) -> &ChannelParams {
        &self.meas
    }
    pub fn layer(&self, id: &str) -> Result<&ChannelParams> {
        self.layers.get(id).ok_or_else(|| Error::Invalid(format!("unknown layer {id:?}")))
    }
    pub fn layers(&self) -> impl Iterator<Item = (&str, &ChannelParams)> {
        self.layers.iter().map(|(k, v)| (k.as_str(), v))
    }
    pub fn nonphysical_ok(&self) -> bool {
        self.nonphysical_ok
    }

    pub fn channel(&self, slot: &Slot) -> Result<&ChannelParams> {
        match slot {
            Slot::Prep => Ok(&self.prep),
            Slot::Meas => Ok(&self.meas),
            Slot::Layer(id) => self.layer(id),
        }
    }

    pub fn channels(&self) -> impl Iterator<Item = &ChannelParams> {
        [&self.prep, &self.meas].into_iter().chain(self.layers.values())
    }

    pub fn is_physical(&self) -> bool {
        self.channels().all(|c| c.is_physical())
    }

    /// Apply D_η: prep → D_η∘Λ^S, meas → Λ^M∘D_η^{-1},
    /// layer → (G^{-1}D_ηG)∘Λ^G∘D_η^{-1}.
    pub fn apply_gauge(&self, eta: &GaugeVector) -> Result<GateSetNoiseModel> {
        match eta {
            GaugeVector::PerQubit(e) => {
                if e.len() != self.n {
                    return Err(Error::Dimension { expected: self.n, found: e.len() });
                }
                for (id, c) in &self.layers {
                    let f = c.generators().factors();
                    for &(a, b) in self.gates.layer(id)?.cnots() {
                        if !f.contains((1u128 << a) | (1u128 << b)) {
                            return Err(Error::Invalid(format!("layer {id}: pair ({a},{b}) not in the factor set")));
                        }
                    }
                }
            }
            GaugeVector::PerPattern(e) => {
                if self.n > 12 || e.len() != 1usize << self.n {
                    return Err(Error::Dimension { expected: 1usize << self.n.min(12), found: e.len() });
                }
                if e[0] != 0.0 {
                    return Err(Error::Invalid("gauge at the empty pattern must be 0".into()));
                }
                if !self.channels().all(|c| c.generators().factors().is_full()) {
                    return Err(Error::Invalid("per-pattern gauge needs full factor sets".into()));
                }
            }
        }
        let shift = |c: &ChannelParams, f: &dyn Fn(&Pauli) -> f64| -> Result<ChannelParams> {
            let x = c.generators().members().iter().zip(c.x()).map(|(a, &xa)| xa + f(a)).collect();
            c.with_x(x)
        };
        let prep = shift(&self.prep, &|a| eta.eta(a.support()))?;
        let meas = shift(&self.meas, &|a| -eta.eta(a.support()))?;
        let mut layers = BTreeMap::new();
        for (id, c) in &self.layers {
            let g = self.gates.layer(id)?;
            let shifted = shift(c, &|a| eta.eta(g.apply(a).support()) - eta.eta(a.support()))?;
            layers.insert(id.clone(), shifted);
        }
        let mut out = GateSetNoiseModel { prep, meas, layers, ..self.clone() };
        out.nonphysical_ok = self.nonphysical_ok || !out.is_physical();
        Ok(out)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument::from_model(self)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_document()).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        doc.into_model()
    }
}

impl FidelitySource for GateSetNoiseModel {
    fn n(&self) -> usize {
        self.n
    }

    fn log_fidelity(&self, slot: &Slot, a: &Pauli) -> Result<f64> {
        Ok(self.channel(slot)?.x_of(&a.unsigned()))
    }
}
