use std::sync::Arc;

use crate::clifford::Clifford1;
use crate::error::{Error, Result};
use crate::model::GateSet;
use crate::pauli::Pauli;

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// Computational basis state; bit q is qubit q.
    Prepare(u128),
    /// Noiseless single-qubit Cliffords, one per qubit.
    SingleQubit(Vec<Clifford1>),
    /// Noisy entangling layer from the gate set.
    Layer(String),
    /// Noiseless Pauli gate.
    Pauli(Pauli),
    /// Measure qubit q in the eigenbasis of letter `basis[q]` (1..=3).
    Measure(Vec<u8>),
}

#[derive(Clone, Debug)]
pub struct Circuit {
    n: usize,
    gates: Arc<GateSet>,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(gates: Arc<GateSet>, ops: Vec<Op>) -> Result<Self> {
        let n = gates.n();
        match (ops.first(), ops.last()) {
            (Some(Op::Prepare(_)), Some(Op::Measure(_))) if ops.len() >= 2 => {}
            _ => return Err(Error::Invalid("a circuit starts with one prepare and ends with one measure".into())),
        }
        for (i, op) in ops.iter().enumerate() {
            let inner = i > 0 && i + 1 < ops.len();
            match op {
                Op::Prepare(bits) => {
                    if inner || (n < 128 && bits >> n != 0) {
                        return Err(Error::Invalid("misplaced or oversized prepare".into()));
                    }
                }
                Op::Measure(basis) => {
                    if inner || basis.len() != n || basis.iter().any(|&l| !(1..=3).contains(&l)) {
                        return Err(Error::Invalid("misplaced or malformed measure".into()));
                    }
                }
                Op::SingleQubit(cs) => {
                    if cs.len() != n {
                        return Err(Error::Dimension { expected: n, found: cs.len() });
                    }
                }
                Op::Layer(id) => {
                    gates.layer(id)?;
                }
                Op::Pauli(p) => {
                    if p.n() != n {
                        return Err(Error::Dimension { expected: n, found: p.n() });
                    }
                }
            }
        }
        Ok(Circuit { n, gates, ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &Arc<GateSet> {
        &self.gates
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn prep_bits(&self) -> u128 {
        match self.ops[0] {
            Op::Prepare(b) => b,
            _ => unreachable!("validated on construction"),
        }
    }

    pub fn meas_basis(&self) -> &[u8] {
        match self.ops.last() {
            Some(Op::Measure(b)) => b,
            _ => unreachable!("validated on construction"),
        }
    }

    /// Number of noisy layers.
    pub fn layer_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Layer(_))).count()
    }

    /// True when `o` acts with the measured letter on every qubit of its support.
    pub fn measures(&self, o: &Pauli) -> bool {
        let basis = self.meas_basis();
        o.n() == self.n && crate::pauli::pattern_qubits(o.support()).all(|q| o.letter(q) == basis[q])
    }

    /// The all-basis Pauli measured by the final op.
    pub fn meas_pauli(&self) -> Pauli {
        let mut p = Pauli::identity(self.n);
        for (q, &l) in self.meas_basis().iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }
}

/// Per-qubit Cliffords sending each letter of `from` to the paired letter of
/// `to` (unsigned). Positions with letter 0 get the identity.
pub fn dressing(from: &[u8], to: &[u8]) -> Result<Vec<Clifford1>> {
    from.iter()
        .zip(to)
        .map(|(&f, &t)| {
            if f == 0 || f == t {
                Ok(Clifford1::IDENTITY)
            } else {
                Clifford1::find(&[(f, t)]).ok_or_else(|| Error::Invalid(format!("no Clifford maps {f} to {t}")))
            }
        })
        .collect()
}

/// Per-qubit Cliffords mapping `letter` to +Z on each qubit.
pub fn rotation_to_z(basis: &[u8]) -> Vec<Clifford1> {
    basis
        .iter()
        .map(|&l| {
            Clifford1::all().into_iter().find(|c| c.map_letter(l) == (3, false)).expect("some Clifford maps any letter to +Z")
        })
        .collect()
}
