//! Ideal measurement statistics of a stabilizer circuit.
//!
//! The prepared state is stabilized by ±Z_i. Pushing those generators
//! forward and rotating into the measured basis, the Z-type part of the
//! stabilizer group fixes parities of the outcome bits; every outcome
//! consistent with them is equally likely.

use rand::Rng;

use crate::circuit::{rotation_to_z, Circuit, Op};
use crate::clifford::conjugate_singles;
use crate::error::Result;
use crate::pauli::Pauli;

#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    n: usize,
    particular: u128,
    null_basis: Vec<u128>,
}

impl OutcomeSampler {
    // row elimination reads clearer with indices
    #[allow(clippy::needless_range_loop)]
    pub fn new(circuit: &Circuit) -> Result<Self> {
        let n = circuit.n();
        let prep = circuit.prep_bits();
        let mut gens: Vec<Pauli> = (0..n).map(|q| Pauli::single(n, q, 3).with_sign(prep >> q & 1 == 1)).collect();
        for op in circuit.ops() {
            match op {
                Op::Prepare(_) => {}
                Op::SingleQubit(cs) => gens.iter_mut().for_each(|g| *g = conjugate_singles(cs, g)),
                Op::Layer(id) => {
                    let l = circuit.gates().layer(id)?;
                    gens.iter_mut().for_each(|g| *g = l.apply(g));
                }
                Op::Pauli(p) => gens.iter_mut().for_each(|g| {
                    if !g.commutes_with(p) {
                        *g = g.negated();
                    }
                }),
                Op::Measure(basis) => {
                    let rot = rotation_to_z(basis);
                    gens.iter_mut().for_each(|g| *g = conjugate_singles(&rot, g));
                }
            }
        }
        // Eliminate x-bits; leftover rows are Z-type stabilizers.
        let mut rank = 0;
        for q in 0..n {
            let bit = 1u128 << q;
            let Some(piv) = (rank..n).find(|&r| gens[r].x_bits() & bit != 0) else { continue };
            gens.swap(rank, piv);
            let pivot = gens[rank];
            for r in 0..n {
                if r != rank && gens[r].x_bits() & bit != 0 {
                    gens[r] = gens[r].mul_commuting(&pivot);
                }
            }
            rank += 1;
        }
        let constraints: Vec<(u128, bool)> = gens[rank..].iter().map(|g| (g.z_bits(), g.is_negative())).collect();
        let (particular, null_basis) = solve_gf2(n, constraints);
        Ok(OutcomeSampler { n, particular, null_basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of uniformly random outcome bits.
    pub fn entropy_bits(&self) -> usize {
        self.null_basis.len()
    }

    /// A deterministic outcome compatible with every constraint.
    pub fn particular(&self) -> u128 {
        self.particular
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u128 {
        let mut s = self.particular;
        let mut coins: u128 = 0;
        for chunk in 0..self.null_basis.len().div_ceil(64) {
            coins |= (rng.random::<u64>() as u128) << (64 * chunk);
        }
        for (i, v) in self.null_basis.iter().enumerate() {
            if coins >> i & 1 == 1 {
                s ^= v;
            }
        }
        s
    }
}

/// Solve parity(v·m) = c for all rows. Returns a particular solution and a
/// basis of the homogeneous solutions. Rows are consistent by construction.
#[allow(clippy::needless_range_loop)]
fn solve_gf2(n: usize, mut rows: Vec<(u128, bool)>) -> (u128, Vec<u128>) {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for q in 0..n {
        let bit = 1u128 << q;
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r].0 & bit != 0) else { continue };
        rows.swap(rank, piv);
        let (pv, pc) = rows[rank];
        for r in 0..rows.len() {
            if r != rank && rows[r].0 & bit != 0 {
                rows[r].0 ^= pv;
                rows[r].1 ^= pc;
            }
        }
        pivots.push(q);
        rank += 1;
    }
    debug_assert!(rows[rank..].iter().all(|&(v, c)| v == 0 && !c), "inconsistent stabilizer constraints");
    let pivot_mask: u128 = pivots.iter().fold(0, |m, &q| m | 1u128 << q);
    let mut particular = 0u128;
    for (r, &q) in pivots.iter().enumerate() {
        if rows[r].1 {
            particular |= 1u128 << q;
        }
    }
    let mut null_basis = Vec::new();
    for f in (0..n).filter(|&q| pivot_mask >> q & 1 == 0) {
        let mut v = 1u128 << f;
        for (r, &q) in pivots.iter().enumerate() {
            if rows[r].0 >> f & 1 == 1 {
                v |= 1u128 << q;
            }
        }
        null_basis.push(v);
    }
    (particular, null_basis)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::clifford::{Clifford1, CliffordLayer};
    use crate::model::GateSet;

    #[test]
    fn bell_state_outcomes_are_correlated() {
        let gates = Arc::new(GateSet::new(2, [("cx".to_string(), CliffordLayer::cnots_only(2, vec![(0, 1)]).unwrap())]).unwrap());
        let h = vec![Clifford1::hadamard(), Clifford1::IDENTITY];
        let c = Circuit::new(gates, vec![Op::Prepare(0), Op::SingleQubit(h), Op::Layer("cx".into()), Op::Measure(vec![3, 3])])
            .unwrap();
        let s = OutcomeSampler::new(&c).unwrap();
        assert_eq!(s.entropy_bits(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<u128> = (0..64).map(|_| s.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&m| m == 0 || m == 0b11));
        assert!(draws.contains(&0) && draws.contains(&0b11));
    }

    #[test]
    fn computational_state_is_deterministic() {
        let gates = Arc::new(GateSet::new(3, []).unwrap());
        let c = Circuit::new(gates, vec![Op::Prepare(0b101), Op::Measure(vec![3, 3, 3])]).unwrap();
        let s = OutcomeSampler::new(&c).unwrap();
        assert_eq!(s.entropy_bits(), 0);
        assert_eq!(s.particular(), 0b101);
    }

    #[test]
    fn gf2_solver_handles_dependent_rows() {
        let (p, null) = solve_gf2(3, vec![(0b011, true), (0b110, false), (0b101, true)]);
        for (v, c) in [(0b011u128, true), (0b110, false)] {
            assert_eq!((p & v).count_ones() % 2 == 1, c);
            for w in &null {
                assert_eq!((w & v).count_ones() % 2, 0);
            }
        }
        assert_eq!(null.len(), 1);
    }
}
