//! Learning experiments: which circuits to run and which observables to read.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{dressing, Circuit, Op};
use crate::error::{Error, Result};
use crate::model::GateSet;
use crate::pauli::Pauli;
use crate::sim::backpropagate_observable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingKind {
    /// Prepare and measure, no layers.
    Spam,
    /// One application of a layer.
    Depth1,
    /// An even number of repetitions of a layer.
    Even,
}

/// One circuit family: product-state input, `depth` repetitions of the
/// layer sequence, product-basis readout. Letters are 1..=3; 0 means
/// unconstrained and is filled with Z when the circuit is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetting {
    pub kind: SettingKind,
    pub prep: Vec<u8>,
    pub layers: Vec<String>,
    pub depth: usize,
    pub meas: Vec<u8>,
    pub observables: Vec<Pauli>,
}

fn filled(letters: &[u8]) -> Vec<u8> {
    letters.iter().map(|&l| if l == 0 { 3 } else { l }).collect()
}

fn letters_of(p: &Pauli) -> Vec<u8> {
    (0..p.n()).map(|q| p.letter(q)).collect()
}

fn compatible(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0 || x == y)
}

fn merge(a: &mut [u8], b: &[u8]) {
    for (x, &y) in a.iter_mut().zip(b) {
        if *x == 0 {
            *x = y;
        }
    }
}

impl ExperimentSetting {
    pub fn prep_letters(&self) -> Vec<u8> {
        filled(&self.prep)
    }

    pub fn meas_letters(&self) -> Vec<u8> {
        filled(&self.meas)
    }

    pub fn circuit(&self, gates: &Arc<GateSet>) -> Result<Circuit> {
        let z = vec![3u8; gates.n()];
        let mut ops = vec![Op::Prepare(0), Op::SingleQubit(dressing(&z, &self.prep_letters())?)];
        for _ in 0..self.depth {
            ops.extend(self.layers.iter().map(|l| Op::Layer(l.clone())));
        }
        ops.push(Op::Measure(self.meas_letters()));
        Circuit::new(gates.clone(), ops)
    }

    fn try_absorb(&mut self, other: &ExperimentSetting) -> bool {
        if self.kind != other.kind
            || self.layers != other.layers
            || self.depth != other.depth
            || !compatible(&self.prep, &other.prep)
            || !compatible(&self.meas, &other.meas)
        {
            return false;
        }
        merge(&mut self.prep, &other.prep);
        merge(&mut self.meas, &other.meas);
        for o in &other.observables {
            if !self.observables.contains(o) {
                self.observables.push(*o);
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub gates: Arc<GateSet>,
    pub settings: Vec<ExperimentSetting>,
}

impl ExperimentPlan {
    pub fn n(&self) -> usize {
        self.gates.n()
    }

    pub fn row_count(&self) -> usize {
        self.settings.iter().map(|s| s.observables.len()).sum()
    }

    pub fn circuits(&self) -> Result<Vec<Circuit>> {
        self.settings.iter().map(|s| s.circuit(&self.gates)).collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            n: usize,
            settings: Vec<SettingDoc<'a>>,
        }
        #[derive(Serialize)]
        struct SettingDoc<'a> {
            kind: SettingKind,
            prep: String,
            layers: &'a [String],
            depth: usize,
            meas: String,
            observables: Vec<String>,
        }
        let word = |l: &[u8]| l.iter().map(|&c| crate::pauli::LETTERS[c as usize]).collect::<String>();
        let doc = Doc {
            n: self.n(),
            settings: self
                .settings
                .iter()
                .map(|s| SettingDoc {
                    kind: s.kind,
                    prep: word(&s.prep_letters()),
                    layers: &s.layers,
                    depth: s.depth,
                    meas: word(&s.meas_letters()),
                    observables: s.observables.iter().map(|o| o.to_string()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plan serializes")
    }
}

/// Greedy grouping: each setting joins the first earlier compatible one.
fn group(settings: Vec<ExperimentSetting>) -> Vec<ExperimentSetting> {
    let mut out: Vec<ExperimentSetting> = Vec::new();
    for s in settings {
        if !out.iter_mut().any(|g| g.try_absorb(&s)) {
            out.push(s);
        }
    }
    out
}

/// Plan that learns exactly the gate labels in `touched` (pre-gate Paulis
/// per layer), their conjugate partners, and the SPAM patterns they reach.
///
/// Depth-1 rows go from each label to its image; with `each_member` the
/// reverse direction is added too, and even-depth rows start from both.
pub fn restricted_plan(
    gates: Arc<GateSet>,
    touched: &[(String, Pauli)],
    depths: &[usize],
    each_member: bool,
) -> Result<ExperimentPlan> {
    check_depths(depths)?;
    let n = gates.n();
    let mut labels: Vec<(String, Pauli)> = Vec::new();
    for (id, a) in touched {
        let a = a.unsigned();
        if a.is_identity() || labels.iter().any(|(l, b)| l == id && *b == a) {
            continue;
        }
        let g = gates.layer(id)?;
        if g.apply(&g.apply(&a)).unsigned() != a {
            return Err(Error::Invalid(format!("layer {id} is not an involution on {a}")));
        }
        labels.push((id.clone(), a));
    }
    let mut patterns = Vec::new();
    for (id, a) in &labels {
        let ga = gates.layer(id)?.apply(a);
        for p in [a.support(), ga.support()] {
            if !patterns.contains(&p) {
                patterns.push(p);
            }
        }
    }
    patterns.sort();
    let mut settings = vec![ExperimentSetting {
        kind: SettingKind::Spam,
        prep: vec![3; n],
        layers: Vec::new(),
        depth: 0,
        meas: vec![3; n],
        observables: patterns.iter().map(|&p| Pauli::z_on(n, p)).collect(),
    }];
    let mut depth1 = Vec::new();
    let mut even = Vec::new();
    for (id, a) in &labels {
        let ga = gates.layer(id)?.apply(a).unsigned();
        let mut starts = vec![*a];
        if each_member && ga != *a {
            starts.push(ga);
        }
        for s in starts {
            let image = gates.layer(id)?.apply(&s).unsigned();
            depth1.push(ExperimentSetting {
                kind: SettingKind::Depth1,
                prep: letters_of(&s),
                layers: vec![id.clone()],
                depth: 1,
                meas: letters_of(&image),
                observables: vec![image],
            });
            for &d in depths {
                even.push((
                    d,
                    ExperimentSetting {
                        kind: SettingKind::Even,
                        prep: letters_of(&s),
                        layers: vec![id.clone()],
                        depth: d,
                        meas: letters_of(&s),
                        observables: vec![s],
                    },
                ));
            }
        }
    }
    // keep depth-1 rows unique per observable path
    depth1.dedup_by(|a, b| a.prep == b.prep && a.meas == b.meas && a.layers == b.layers);
    settings.extend(group(depth1));
    let mut by_depth: BTreeMap<usize, Vec<ExperimentSetting>> = BTreeMap::new();
    for (d, s) in even {
        by_depth.entry(d).or_default().push(s);
    }
    for (_, v) in by_depth {
        settings.extend(group(v));
    }
    Ok(ExperimentPlan { gates, settings })
}

fn check_depths(depths: &[usize]) -> Result<()> {
    if depths.is_empty() || depths.iter().any(|d| d % 2 == 1 || *d == 0) {
        return Err(Error::Invalid(format!("repetition depths must be positive and even, got {depths:?}")));
    }
    Ok(())
}

/// Depth-1 input/output templates for the ring's first layer, period 2 or 4.
/// `I` in an output only marks the image; that qubit is read in Z.
pub const RING_DEPTH1_TEMPLATES: [(&str, &str); 17] = [
    ("YZ", "XY"),
    ("YY", "XZ"),
    ("XZ", "YY"),
    ("XY", "YZ"),
    ("ZYXX", "ZYXX"),
    ("XXZY", "XXZY"),
    ("ZYYX", "IYYI"),
    ("YXZY", "YIIY"),
    ("ZZXX", "IZXI"),
    ("XXZZ", "XIIZ"),
    ("ZZYX", "IZYI"),
    ("YXZZ", "YIIZ"),
    ("XXXX", "XXXX"),
    ("YX", "YX"),
    ("ZX", "ZX"),
    ("ZY", "ZY"),
    ("ZZ", "ZZ"),
];

fn tile(template: &str, n: usize, shift: usize) -> Vec<u8> {
    let t: Vec<u8> = template
        .bytes()
        .map(|c| match c {
            b'X' => 1,
            b'Y' => 2,
            b'Z' => 3,
            _ => 0,
        })
        .collect();
    (0..n).map(|q| t[(q + n - shift) % t.len()]).collect()
}

/// Observables on contiguous ring windows of one to three qubits.
pub fn ring_windows(n: usize, meas: &[u8]) -> Vec<Pauli> {
    let mut out = Vec::with_capacity(3 * n);
    for w in 1..=3.min(n) {
        for start in 0..n {
            if w == n && start > 0 {
                break;
            }
            let mut p = Pauli::identity(n);
            for k in 0..w {
                let q = (start + k) % n;
                p.set_letter(q, meas[q]);
            }
            out.push(p);
        }
    }
    out
}

/// Keep the candidates with a non-zero noiseless value.
pub fn harvest(setting: &ExperimentSetting, gates: &Arc<GateSet>, candidates: &[Pauli]) -> Result<Vec<Pauli>> {
    let c = setting.circuit(gates)?;
    let mut out = Vec::new();
    for o in candidates {
        if c.measures(o) && backpropagate_observable(&c, o)?.ideal != 0.0 && !out.contains(o) {
            out.push(*o);
        }
    }
    Ok(out)
}

/// Template plan for a ring with layers `a` (pairs 2i→2i+1) and `b`
/// (pairs 2i+1→2i+2). The setting count does not grow with n.
pub fn ring_plan(gates: Arc<GateSet>, depths: &[usize]) -> Result<ExperimentPlan> {
    check_depths(depths)?;
    let n = gates.n();
    if !n.is_multiple_of(4) || n < 4 {
        return Err(Error::Invalid(format!("ring plans need n divisible by 4, got {n}")));
    }
    gates.layer("a")?;
    gates.layer("b")?;
    let mut settings = vec![ExperimentSetting {
        kind: SettingKind::Spam,
        prep: vec![3; n],
        layers: Vec::new(),
        depth: 0,
        meas: vec![3; n],
        observables: Vec::new(),
    }];
    for (layer, shift) in [("a", 0), ("b", 1)] {
        for (input, output) in RING_DEPTH1_TEMPLATES {
            settings.push(ExperimentSetting {
                kind: SettingKind::Depth1,
                prep: tile(input, n, shift),
                layers: vec![layer.to_string()],
                depth: 1,
                meas: tile(output, n, shift),
                observables: Vec::new(),
            });
        }
    }
    const LETTERS: [char; 3] = ['X', 'Y', 'Z'];
    for &d in depths {
        for (layer, shift) in [("a", 0), ("b", 1)] {
            for p in LETTERS {
                for q in LETTERS {
                    let t = format!("{p}{q}");
                    settings.push(ExperimentSetting {
                        kind: SettingKind::Even,
                        prep: tile(&t, n, shift),
                        layers: vec![layer.to_string()],
                        depth: d,
                        meas: tile(&t, n, shift),
                        observables: Vec::new(),
                    });
                }
            }
        }
    }
    for s in &mut settings {
        let candidates = ring_windows(n, &s.meas_letters());
        s.observables = harvest(s, &gates, &candidates)?;
    }
    Ok(ExperimentPlan { gates, settings })
}
