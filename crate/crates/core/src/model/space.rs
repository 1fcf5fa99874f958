//! Parameter spaces: the columns of a design matrix.
//!
//! In the `X` basis a column is one log-fidelity (SPAM by support pattern,
//! gates by exact label). In the `R` basis a column is one Möbius parameter
//! of a quasi-local model, and any log-fidelity is a 0/1 combination.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{x_to_r, ChannelParams, FactorSet, FidelitySource, GateSet, GateSetNoiseModel, GaugeClass, GeneratorSet, Slot};
use crate::error::{Error, Result};
use crate::pauli::{pattern_label, Pattern, Pauli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Spam { slot: Slot, pattern: Pattern },
    Gate { layer: String, label: Pauli },
}

impl Column {
    pub fn slot(&self) -> Slot {
        match self {
            Column::Spam { slot, .. } => slot.clone(),
            Column::Gate { layer, .. } => Slot::Layer(layer.clone()),
        }
    }

    pub fn label(&self, n: usize) -> String {
        match self {
            Column::Spam { slot: Slot::Prep, pattern } => format!("S:{}", pattern_label(n, *pattern)),
            Column::Spam { pattern, .. } => format!("M:{}", pattern_label(n, *pattern)),
            Column::Gate { layer, label } => format!("{layer}:{label}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParamSpace {
    n: usize,
    basis: Basis,
    gauge: GaugeClass,
    gates: Arc<GateSet>,
    columns: Vec<Column>,
    index: HashMap<Column, usize>,
    spam_factors: Option<FactorSet>,
    layer_gens: BTreeMap<String, Arc<GeneratorSet>>,
}

impl ParamSpace {
    /// Log-fidelity columns for exactly the given SPAM patterns and gate labels.
    pub fn x_basis(
        gates: Arc<GateSet>,
        spam_patterns: impl IntoIterator<Item = Pattern>,
        gate_labels: impl IntoIterator<Item = (String, Pauli)>,
        gauge: GaugeClass,
    ) -> Result<Self> {
        let patterns: BTreeSet<Pattern> = spam_patterns.into_iter().filter(|&p| p != 0).collect();
        let mut labels: BTreeMap<String, Vec<Pauli>> = BTreeMap::new();
        for (layer, a) in gate_labels {
            gates.layer(&layer)?;
            if !a.is_identity() {
                labels.entry(layer).or_default().push(a.unsigned());
            }
        }
        let mut columns = Vec::new();
        for slot in [Slot::Prep, Slot::Meas] {
            columns.extend(patterns.iter().map(|&pattern| Column::Spam { slot: slot.clone(), pattern }));
        }
        for (layer, mut ls) in labels {
            ls.sort_by(|a, b| a.cmp_weight_lex(b));
            ls.dedup();
            columns.extend(ls.into_iter().map(|label| Column::Gate { layer: layer.clone(), label }));
        }
        Ok(Self::assemble(gates, Basis::X, gauge, columns, None, BTreeMap::new()))
    }

    /// Möbius columns of a quasi-local model: SPAM patterns in `spam`,
    /// one generator set per layer.
    pub fn r_basis(gates: Arc<GateSet>, spam: FactorSet, layers: BTreeMap<String, FactorSet>, gauge: GaugeClass) -> Result<Self> {
        let mut columns = Vec::new();
        for slot in [Slot::Prep, Slot::Meas] {
            columns.extend(spam.subsets().map(|pattern| Column::Spam { slot: slot.clone(), pattern }));
        }
        let mut layer_gens = BTreeMap::new();
        for id in gates.ids() {
            let f = layers.get(id).ok_or_else(|| Error::Invalid(format!("no factor set for layer {id}")))?;
            let g = Arc::new(GeneratorSet::new(f.clone()));
            columns.extend(g.members().iter().map(|&label| Column::Gate { layer: id.to_string(), label }));
            layer_gens.insert(id.to_string(), g);
        }
        Ok(Self::assemble(gates, Basis::R, gauge, columns, Some(spam), layer_gens))
    }

    fn assemble(
        gates: Arc<GateSet>,
        basis: Basis,
        gauge: GaugeClass,
        columns: Vec<Column>,
        spam_factors: Option<FactorSet>,
        layer_gens: BTreeMap<String, Arc<GeneratorSet>>,
    ) -> Self {
        let index = columns.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        ParamSpace { n: gates.n(), basis, gauge, gates, columns, index, spam_factors, layer_gens }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn basis(&self) -> Basis {
        self.basis
    }
    pub fn gauge_class(&self) -> GaugeClass {
        self.gauge
    }
    pub fn gates(&self) -> &Arc<GateSet> {
        &self.gates
    }
    pub fn columns(&self) -> &[Column] {
        &self.columns
    }
    pub fn len(&self) -> usize {
        self.columns.len()
    }
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
    pub fn column_index(&self, c: &Column) -> Option<usize> {
        self.index.get(c).copied()
    }
    pub fn layer_generators(&self, id: &str) -> Option<&Arc<GeneratorSet>> {
        self.layer_gens.get(id)
    }
    pub fn spam_factors(&self) -> Option<&FactorSet> {
        self.spam_factors.as_ref()
    }

    fn col(&self, c: Column) -> Result<usize> {
        self.column_index(&c).ok_or_else(|| Error::Invalid(format!("{} is not a parameter of this space", c.label(self.n))))
    }

    /// Coefficients expressing x_a of `slot` as a combination of columns.
    pub fn expand(&self, slot: &Slot, a: &Pauli) -> Result<Vec<(usize, f64)>> {
        let a = a.unsigned();
        if a.is_identity() {
            return Ok(Vec::new());
        }
        match (self.basis, slot) {
            (Basis::X, Slot::Layer(id)) => Ok(vec![(self.col(Column::Gate { layer: id.clone(), label: a })?, 1.0)]),
            (Basis::X, s) => Ok(vec![(self.col(Column::Spam { slot: s.clone(), pattern: a.support() })?, 1.0)]),
            (Basis::R, Slot::Layer(id)) => {
                let g = self.layer_gens.get(id).ok_or_else(|| Error::Invalid(format!("unknown layer {id:?}")))?;
                g.factors()
                    .members_within(a.support())
                    .into_iter()
                    .map(|p| Ok((self.col(Column::Gate { layer: id.clone(), label: a.restrict(p) })?, 1.0)))
                    .collect()
            }
            (Basis::R, s) => {
                let f = self.spam_factors.as_ref().expect("r basis carries SPAM factors");
                f.members_within(a.support())
                    .into_iter()
                    .map(|p| Ok((self.col(Column::Spam { slot: s.clone(), pattern: p })?, 1.0)))
                    .collect()
            }
        }
    }

    fn shift_vector(&self, spam: &dyn Fn(Pattern) -> f64, gate: &dyn Fn(&str, &Pauli) -> f64) -> Vec<f64> {
        let mut y = vec![0.0; self.columns.len()];
        match self.basis {
            Basis::X => {
                for (i, c) in self.columns.iter().enumerate() {
                    y[i] = match c {
                        Column::Spam { slot: Slot::Prep, pattern } => spam(*pattern),
                        Column::Spam { pattern, .. } => -spam(*pattern),
                        Column::Gate { layer, label } => gate(layer, label),
                    };
                }
            }
            Basis::R => {
                let f = self.spam_factors.as_ref().expect("r basis carries SPAM factors");
                for p in f.subsets() {
                    // pattern-level Möbius transform of the SPAM shift
                    let r: f64 = f
                        .members_within(p)
                        .into_iter()
                        .map(|q| if (p.count_ones() - q.count_ones()) % 2 == 0 { spam(q) } else { -spam(q) })
                        .sum();
                    y[self.column_index(&Column::Spam { slot: Slot::Prep, pattern: p }).unwrap()] = r;
                    y[self.column_index(&Column::Spam { slot: Slot::Meas, pattern: p }).unwrap()] = -r;
                }
                for (id, g) in &self.layer_gens {
                    let dx: Vec<f64> = g.members().iter().map(|a| gate(id, a)).collect();
                    for (a, r) in g.members().iter().zip(x_to_r(g, &dx)) {
                        y[self.column_index(&Column::Gate { layer: id.clone(), label: *a }).unwrap()] = r;
                    }
                }
            }
        }
        y
    }

    /// Basis of the gauge directions of this space.
    pub fn gauge_kernel_basis(&self) -> Result<Vec<Vec<f64>>> {
        let gates = &self.gates;
        let image = |id: &str, a: &Pauli| gates.layer(id).map(|l| l.apply(a).support()).unwrap_or(0);
        match self.gauge {
            GaugeClass::PerQubit => Ok((0..self.n)
                .map(|q| {
                    let bit = 1u128 << q;
                    let ind = move |p: Pattern| if p & bit != 0 { 1.0 } else { 0.0 };
                    self.shift_vector(&ind, &|id, a| ind(image(id, a)) - ind(a.support()))
                })
                .collect()),
            GaugeClass::PerPattern => {
                if self.basis == Basis::R && !self.spam_factors.as_ref().is_some_and(|f| f.is_full()) {
                    return Err(Error::Invalid("per-pattern gauge in the r basis needs a full factor set".into()));
                }
                let mut patterns = BTreeSet::new();
                for c in &self.columns {
                    match c {
                        Column::Spam { pattern, .. } => {
                            patterns.insert(*pattern);
                        }
                        Column::Gate { layer, label } => {
                            patterns.insert(label.support());
                            patterns.insert(image(layer, label));
                        }
                    }
                }
                Ok(patterns
                    .into_iter()
                    .map(|p| {
                        let ind = move |q: Pattern| if q == p { 1.0 } else { 0.0 };
                        self.shift_vector(&ind, &|id, a| ind(image(id, a)) - ind(a.support()))
                    })
                    .collect())
            }
        }
    }

    /// Column-space representation of a noise model.
    pub fn project_model(&self, m: &GateSetNoiseModel) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.columns.len()];
        match self.basis {
            Basis::X => {
                for (i, c) in self.columns.iter().enumerate() {
                    v[i] = match c {
                        Column::Spam { slot, pattern } => m.channel(slot)?.x_of(&Pauli::z_on(self.n, *pattern)),
                        Column::Gate { layer, label } => m.layer(layer)?.x_of(label),
                    };
                }
            }
            Basis::R => {
                let f = self.spam_factors.as_ref().expect("r basis carries SPAM factors");
                for slot in [Slot::Prep, Slot::Meas] {
                    let ch = m.channel(&slot)?;
                    for p in f.subsets() {
                        let r: f64 = f
                            .members_within(p)
                            .into_iter()
                            .map(|q| {
                                let x = ch.x_of(&Pauli::z_on(self.n, q));
                                if (p.count_ones() - q.count_ones()) % 2 == 0 {
                                    x
                                } else {
                                    -x
                                }
                            })
                            .sum();
                        v[self.column_index(&Column::Spam { slot: slot.clone(), pattern: p }).unwrap()] = r;
                    }
                }
                for (id, g) in &self.layer_gens {
                    let ch = m.layer(id)?;
                    let x: Vec<f64> = g.members().iter().map(|a| ch.x_of(a)).collect();
                    for (a, r) in g.members().iter().zip(x_to_r(g, &x)) {
                        v[self.column_index(&Column::Gate { layer: id.clone(), label: *a }).unwrap()] = r;
                    }
                }
            }
        }
        Ok(v)
    }
}

/// A parameter vector in a [`ParamSpace`].
#[derive(Clone, Debug)]
pub struct FittedModel {
    pub space: Arc<ParamSpace>,
    pub params: Vec<f64>,
}

impl FittedModel {
    pub fn new(space: Arc<ParamSpace>, params: Vec<f64>) -> Result<Self> {
        if params.len() != space.len() {
            return Err(Error::Dimension { expected: space.len(), found: params.len() });
        }
        Ok(FittedModel { space, params })
    }

    /// Expand an r-basis fit into a full quasi-local noise model.
    pub fn to_noise_model(&self, ansatz: &str) -> Result<GateSetNoiseModel> {
        let s = &self.space;
        if s.basis != Basis::R {
            return Err(Error::Invalid("only r-basis fits define a full model".into()));
        }
        let f = s.spam_factors.clone().expect("r basis carries SPAM factors");
        let spam_gens = Arc::new(GeneratorSet::new(f));
        let spam = |slot: Slot| -> Result<ChannelParams> {
            let x = spam_gens.members().iter().map(|a| self.log_fidelity(&slot, a)).collect::<Result<Vec<_>>>()?;
            ChannelParams::from_x(slot, spam_gens.clone(), x)
        };
        let prep = spam(Slot::Prep)?;
        let meas = spam(Slot::Meas)?;
        let mut layers = BTreeMap::new();
        for (id, g) in &s.layer_gens {
            let r: Vec<f64> = g
                .members()
                .iter()
                .map(|a| self.params[s.column_index(&Column::Gate { layer: id.clone(), label: *a }).unwrap()])
                .collect();
            layers.insert(id.clone(), ChannelParams::from_r(Slot::Layer(id.clone()), g.clone(), &r)?);
        }
        GateSetNoiseModel::new(ansatz, s.gauge, s.gates.clone(), prep, meas, layers, true)
    }
}

impl FidelitySource for FittedModel {
    fn n(&self) -> usize {
        self.space.n
    }

    fn log_fidelity(&self, slot: &Slot, a: &Pauli) -> Result<f64> {
        Ok(self.space.expand(slot, a)?.into_iter().map(|(i, c)| c * self.params[i]).sum())
    }
}

impl fmt::Display for ParamSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} basis, {} columns", self.basis, self.columns.len())
    }
}
