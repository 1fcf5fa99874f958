mod common;

use nalgebra::Complex;
use proptest::prelude::*;

use common::*;
use scpec::channel::{inverse_walsh_hadamard, walsh_hadamard};
use scpec::clifford::conjugate_singles;
use scpec::{Clifford1, CliffordLayer, Pauli, PauliChannel};

fn pauli(n: usize) -> impl Strategy<Value = Pauli> {
    (prop::collection::vec(0u8..4, n), any::<bool>()).prop_map(move |(letters, neg)| {
        let mut p = Pauli::identity(n);
        letters.iter().enumerate().for_each(|(q, &l)| p.set_letter(q, l));
        p.with_sign(neg)
    })
}

fn random_rates(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1 << (2 * n)).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|p| p / s).collect()
    })
}

proptest! {
    #[test]
    fn text_roundtrip(p in (1usize..=20).prop_flat_map(pauli)) {
        prop_assert_eq!(p.to_string().parse::<Pauli>().unwrap(), p);
    }

    #[test]
    fn dense_index_roundtrip(p in (1usize..=6).prop_flat_map(pauli)) {
        let u = p.unsigned();
        prop_assert_eq!(Pauli::from_dense_index(u.n(), u.dense_index()), u);
    }

    #[test]
    fn product_matches_matrices(a in pauli(3), b in pauli(3)) {
        let (k, prod) = a.mul(&b);
        let phase = if k == 1 { Complex::new(0.0, 1.0) } else { Complex::new(1.0, 0.0) };
        let want = pauli_matrix(&a) * pauli_matrix(&b);
        let got = pauli_matrix(&prod) * phase;
        prop_assert!((want - got).iter().all(|z| z.norm() < 1e-12));
        let ab = pauli_matrix(&a) * pauli_matrix(&b);
        let ba = pauli_matrix(&b) * pauli_matrix(&a);
        prop_assert_eq!(a.commutes_with(&b), (ab - ba).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn single_qubit_conjugation_matches_unitaries(p in pauli(2), i in 0usize..24, j in 0usize..24) {
        let all = Clifford1::all();
        let cs = [all[i], all[j]];
        let u = singles_unitary(&cs);
        let want = &u * pauli_matrix(&p) * u.adjoint();
        let got = pauli_matrix(&conjugate_singles(&cs, &p));
        prop_assert!((want - got).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn wht_roundtrip(rates in (1usize..=4).prop_flat_map(random_rates)) {
        let back = inverse_walsh_hadamard(&walsh_hadamard(&rates));
        for (a, b) in rates.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_by_pattern_is_clifford_invariant(
        by_pattern in prop::collection::vec(0.5f64..1.0, 8),
        picks in prop::collection::vec(0usize..24, 3),
    ) {
        let all = Clifford1::all();
        let cs: Vec<Clifford1> = picks.iter().map(|&i| all[i]).collect();
        let lam = |a: &Pauli| if a.is_identity() { 1.0 } else { by_pattern[a.support() as usize] };
        for a in Pauli::all(3) {
            let moved = conjugate_singles(&cs, &a);
            prop_assert_eq!(lam(&moved.unsigned()), lam(&a));
        }
    }
}

#[test]
fn cnot_layers_permute_labels_with_even_sign_flips() {
    for n in 2..=3 {
        let pairs: Vec<Vec<(usize, usize)>> = match n {
            2 => vec![vec![(0, 1)], vec![(1, 0)]],
            _ => vec![vec![(0, 1)], vec![(2, 0)], vec![(1, 2)]],
        };
        for cnots in pairs {
            let layer = CliffordLayer::cnots_only(n, cnots).unwrap();
            let u = layer_unitary(&layer);
            let mut seen = std::collections::BTreeSet::new();
            let mut flips = 0;
            for a in Pauli::all(n) {
                let b = layer.conjugate(&a).unwrap();
                let want = &u * pauli_matrix(&a) * u.adjoint();
                assert!((want - pauli_matrix(&b)).iter().all(|z| z.norm() < 1e-12), "{a}");
                flips += b.is_negative() as usize;
                seen.insert(b.unsigned());
                assert_eq!(layer.conjugate_inverse(&b).unwrap(), a);
            }
            assert_eq!(seen.len(), 1 << (2 * n));
            assert_eq!(flips % 2, 0);
        }
    }
}

#[test]
fn dense_channel_eigenvalues_match_kraus_form() {
    let ch = PauliChannel::from_rate_map(2, &[("II", 0.9), ("XZ", 0.06), ("YI", 0.04)]).unwrap();
    let dense = DenseChannel::from_eigenvalues(2, |a| ch.eigenvalue(a));
    for a in Pauli::all(2) {
        let lam = eigenvalue_of(2, &a, |m| dense.apply(m));
        assert!((lam - ch.eigenvalue(&a)).abs() < 1e-12, "{a}");
    }
}
