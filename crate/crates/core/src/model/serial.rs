use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ChannelParams, FactorSet, GateSet, GateSetNoiseModel, GaugeClass, GeneratorSet, Slot};
use crate::clifford::{Clifford1, CliffordLayer};
use crate::error::{Error, Result};
use crate::pauli::{parse_pattern, pattern_label, Pauli};

/// On-disk form of a [`GateSetNoiseModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub n: usize,
    pub ansatz: String,
    pub gauge: GaugeClass,
    #[serde(default)]
    pub nonphysical_ok: bool,
    pub layers: Vec<LayerDocument>,
    pub channels: Vec<ChannelDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDocument {
    pub id: String,
    pub cnots: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singles: Option<Vec<Clifford1>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub kind: String,
    pub factors: Vec<String>,
    pub labels: Vec<Pauli>,
    pub x: Vec<f64>,
}

impl ModelDocument {
    pub fn from_model(m: &GateSetNoiseModel) -> Self {
        let layers = m
            .gates
            .layers()
            .map(|(id, l)| LayerDocument {
                id: id.to_string(),
                cnots: l.cnots().to_vec(),
                singles: (!l.singles().iter().all(|c| c.is_identity())).then(|| l.singles().to_vec()),
            })
            .collect();
        let channels = m
            .channels()
            .map(|c| ChannelDocument {
                kind: c.kind().to_string(),
                factors: c.generators().factors().subsets().map(|s| pattern_label(m.n, s)).collect(),
                labels: c.generators().members().to_vec(),
                x: c.x().to_vec(),
            })
            .collect();
        ModelDocument { n: m.n, ansatz: m.ansatz.clone(), gauge: m.gauge, nonphysical_ok: m.nonphysical_ok, layers, channels }
    }

    pub fn into_model(self) -> Result<GateSetNoiseModel> {
        let n = self.n;
        let mut gate_layers = Vec::new();
        for l in self.layers {
            gate_layers.push((l.id, CliffordLayer::new(n, l.cnots, l.singles)?));
        }
        let gates = Arc::new(GateSet::new(n, gate_layers)?);
        let mut cache: BTreeMap<Vec<String>, Arc<GeneratorSet>> = BTreeMap::new();
        let (mut prep, mut meas, mut layers) = (None, None, BTreeMap::new());
        for c in self.channels {
            let slot: Slot = c.kind.parse()?;
            let gens = match cache.get(&c.factors) {
                Some(g) => g.clone(),
                None => {
                    let subsets = c.factors.iter().map(|s| parse_pattern(s)).collect::<Result<Vec<_>>>()?;
                    let g = Arc::new(GeneratorSet::new(FactorSet::new(n, subsets)?));
                    cache.insert(c.factors.clone(), g.clone());
                    g
                }
            };
            if c.labels.as_slice() != gens.members() {
                return Err(Error::Invalid(format!("channel {slot}: labels do not match the factor set")));
            }
            let params = ChannelParams::from_x(slot.clone(), gens, c.x)?;
            let dup = match slot {
                Slot::Prep => prep.replace(params).is_some(),
                Slot::Meas => meas.replace(params).is_some(),
                Slot::Layer(id) => layers.insert(id, params).is_some(),
            };
            if dup {
                return Err(Error::Invalid("duplicate channel".into()));
            }
        }
        let prep = prep.ok_or_else(|| Error::Invalid("missing prep channel".into()))?;
        let meas = meas.ok_or_else(|| Error::Invalid("missing meas channel".into()))?;
        GateSetNoiseModel::new(self.ansatz, self.gauge, gates, prep, meas, layers, self.nonphysical_ok)
    }
}
