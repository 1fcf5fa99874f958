//! Noisy Clifford circuit simulation.
//!
//! Exact values come from propagating the observable backwards through the
//! circuit: each noise slot contributes the log-fidelity of the Pauli it
//! sees. Finite-shot sampling lives in [`sample`].

pub mod sample;
pub mod tableau;

use crate::circuit::{rotation_to_z, Circuit, Op};
use crate::clifford::conjugate_singles;
use crate::error::{Error, Result};
use crate::model::{FidelitySource, Slot};
use crate::pauli::Pauli;

pub use sample::{sample_counts, Counts, ExpectationEstimate, ShotConfig};
pub use tableau::OutcomeSampler;

/// Noise slots met by an observable, from measurement back to preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct Backprop {
    pub terms: Vec<(Slot, Pauli)>,
    /// Observable as it looks right after preparation, with sign.
    pub at_prep: Pauli,
    /// Noiseless expectation: ±1, or 0 if the observable is not a
    /// stabilizer of the prepared state.
    pub ideal: f64,
}

impl Backprop {
    pub fn log_fidelity_sum(&self, model: &dyn FidelitySource) -> Result<f64> {
        self.terms.iter().map(|(s, a)| model.log_fidelity(s, a)).sum()
    }

    /// Terms for entangling layers only: (layer id, pre-gate Pauli).
    pub fn layer_terms(&self) -> impl Iterator<Item = (&str, &Pauli)> {
        self.terms.iter().filter_map(|(s, a)| match s {
            Slot::Layer(id) => Some((id.as_str(), a)),
            _ => None,
        })
    }
}

/// Heisenberg-picture walk of `observable` through `circuit`.
///
/// The observable must be measurable in the circuit's final basis.
pub fn backpropagate_observable(circuit: &Circuit, observable: &Pauli) -> Result<Backprop> {
    if observable.n() != circuit.n() {
        return Err(Error::Dimension { expected: circuit.n(), found: observable.n() });
    }
    if !circuit.measures(observable) {
        return Err(Error::Invalid(format!("{observable} is not measured by the final basis")));
    }
    let mut terms = Vec::with_capacity(circuit.layer_count() + 2);
    // the readout channel acts after the rotation into the Z basis
    let rotated = conjugate_singles(&rotation_to_z(circuit.meas_basis()), &observable.unsigned());
    terms.push((Slot::Meas, rotated.unsigned()));
    let mut p = *observable;
    for op in circuit.ops().iter().rev() {
        match op {
            Op::Measure(_) | Op::Prepare(_) => {}
            Op::Pauli(q) => {
                if !p.commutes_with(q) {
                    p = p.negated();
                }
            }
            Op::SingleQubit(cs) => {
                let inv: Vec<_> = cs.iter().map(|c| c.inverse()).collect();
                p = conjugate_singles(&inv, &p);
            }
            Op::Layer(id) => {
                p = circuit.gates().layer(id)?.apply_inverse(&p);
                terms.push((Slot::Layer(id.clone()), p.unsigned()));
            }
        }
    }
    terms.push((Slot::Prep, p.unsigned()));
    let ideal = if p.x_bits() == 0 {
        let flips = (p.z_bits() & circuit.prep_bits()).count_ones();
        p.sign() * if flips.is_multiple_of(2) { 1.0 } else { -1.0 }
    } else {
        0.0
    };
    Ok(Backprop { terms, at_prep: p, ideal })
}

/// Noisy expectation: ideal · Π λ over the backpropagated path.
pub fn exact_pauli_expectation(circuit: &Circuit, model: &dyn FidelitySource, observable: &Pauli) -> Result<f64> {
    let bp = backpropagate_observable(circuit, observable)?;
    if bp.ideal == 0.0 {
        return Ok(0.0);
    }
    Ok(bp.ideal * (-bp.log_fidelity_sum(model)?).exp())
}
