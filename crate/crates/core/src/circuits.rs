//! Benchmark circuits: repeated CNOTs, GHZ preparation on a line, and
//! staircase blocks on a ring.

use std::sync::Arc;

use crate::circuit::{dressing, Circuit, Op};
use crate::clifford::{conjugate_singles, Clifford1};
use crate::error::{Error, Result};
use crate::model::GateSet;
use crate::pauli::Pauli;
use crate::sim::backpropagate_observable;

/// |00⟩, `depth` CNOTs, read both qubits in Z. Layer id `cx`.
pub fn repeated_cnot(gates: &Arc<GateSet>, depth: usize) -> Result<Circuit> {
    let mut ops = vec![Op::Prepare(0)];
    ops.extend((0..depth).map(|_| Op::Layer("cx".into())));
    ops.push(Op::Measure(vec![3, 3]));
    Circuit::new(gates.clone(), ops)
}

/// GHZ-type circuit on a line gate set (layers `a`, `b`) whose observable
/// X⊗n has ideal value +1.
///
/// The state grows outward from the middle qubit. Before each layer the
/// tracked stabilizer is dressed so that CNOTs on the frontier extend its
/// support and CNOTs inside it leave the support alone.
pub fn ghz_circuit(gates: &Arc<GateSet>) -> Result<(Circuit, Pauli)> {
    let n = gates.n();
    if n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("GHZ circuits use an odd line length, got {n}")));
    }
    let root = (n - 1) / 2;
    let mut p = Pauli::single(n, root, 3);
    let mut ops = vec![Op::Prepare(0)];
    let mut next = "a";
    while p.weight() < n {
        let layer = gates.layer(next)?;
        let mut want: Vec<u8> = (0..n).map(|q| p.letter(q)).collect();
        for &(c, t) in layer.cnots() {
            let (in_c, in_t) = (p.letter(c) != 0, p.letter(t) != 0);
            match (in_c, in_t) {
                (true, true) => {
                    want[c] = 3;
                    want[t] = 1;
                }
                // right frontier on the control: X on c spreads to t
                (true, false) => want[c] = 1,
                // left frontier on the target: Z on t spreads to c
                (false, true) => want[t] = 3,
                (false, false) => {}
            }
        }
        let now: Vec<u8> = (0..n).map(|q| p.letter(q)).collect();
        let d = dressing(&now, &want)?;
        p = layer.apply(&conjugate_singles(&d, &p));
        ops.push(Op::SingleQubit(d));
        ops.push(Op::Layer(next.to_string()));
        next = if next == "a" { "b" } else { "a" };
    }
    let now: Vec<u8> = (0..n).map(|q| p.letter(q)).collect();
    ops.push(Op::SingleQubit(dressing(&now, &vec![1; n])?));
    ops.push(Op::Measure(vec![1; n]));
    let obs = Pauli::x_on(n, if n == 128 { u128::MAX } else { (1u128 << n) - 1 });
    let c = Circuit::new(gates.clone(), ops.clone())?;
    if backpropagate_observable(&c, &obs)?.ideal < 0.0 {
        ops[0] = Op::Prepare(1u128 << root);
    }
    Ok((Circuit::new(gates.clone(), ops)?, obs))
}

fn cliff(constraints: &[(u8, u8)]) -> Clifford1 {
    Clifford1::find(constraints).expect("consistent constraints")
}

/// One block-layer on every pair of `layer`: C0, G, C1, G, C2. The two
/// block types send Z on either qubit of a pair to Z on the other while
/// the gates see complementary members of the CNOT conjugate pairs.
fn staircase_block(gates: &Arc<GateSet>, layer: &str, kind_b: bool, ops: &mut Vec<Op>) -> Result<()> {
    let n = gates.n();
    let id = Clifford1::IDENTITY;
    let mut c0 = vec![id; n];
    let mut c1 = vec![id; n];
    let mut c2 = vec![id; n];
    for &(c, t) in gates.layer(layer)?.cnots() {
        if !kind_b {
            // Z_c: XI → XX, ZZ → IZ.  Z_t: IY → ZY, YX → YI.
            c0[c] = cliff(&[(3, 1)]);
            c0[t] = cliff(&[(3, 2)]);
            c1[c] = cliff(&[(1, 3), (3, 2)]);
            c1[t] = cliff(&[(1, 3), (2, 1)]);
            c2[c] = cliff(&[(2, 3)]);
        } else {
            // Z_c: YI → YX, ZY → IY.  Z_t: IZ → ZZ, XX → XI.
            c0[c] = cliff(&[(3, 2)]);
            c1[c] = cliff(&[(2, 3), (3, 1)]);
            c1[t] = cliff(&[(1, 2), (3, 1)]);
            c2[c] = cliff(&[(1, 3)]);
            c2[t] = cliff(&[(2, 3)]);
        }
    }
    ops.push(Op::SingleQubit(c0));
    ops.push(Op::Layer(layer.to_string()));
    ops.push(Op::SingleQubit(c1));
    ops.push(Op::Layer(layer.to_string()));
    ops.push(Op::SingleQubit(c2));
    Ok(())
}

/// Staircase circuit on a ring gate set with `blocks` block-layers.
/// Block-layer k uses layer `a` for even k and `b` for odd k, and the first
/// block type for k mod 4 in {0, 1}. Every weight-one Z is a valid
/// observable.
pub fn staircase_circuit(gates: &Arc<GateSet>, blocks: usize) -> Result<(Circuit, Vec<Pauli>)> {
    let n = gates.n();
    let mut ops = vec![Op::Prepare(0)];
    for k in 0..blocks {
        let layer = if k % 2 == 0 { "a" } else { "b" };
        staircase_block(gates, layer, k % 4 >= 2, &mut ops)?;
    }
    ops.push(Op::Measure(vec![3; n]));
    let obs = (0..n).map(|q| Pauli::single(n, q, 3)).collect();
    Ok((Circuit::new(gates.clone(), ops)?, obs))
}
