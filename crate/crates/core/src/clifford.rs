//! Single-qubit Cliffords and layers of disjoint CNOTs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Element of the 24-element single-qubit Clifford group (modulo phase),
/// identified by the signed images of X and Z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Clifford1 {
    // image[l] = (letter, negative) for l in {X=1, Y=2, Z=3}; index 0 unused
    image: [(u8, bool); 4],
}

// X·Z = -iY, so C(Y) = i·C(X)·C(Z).
fn y_image(xi: (u8, bool), zi: (u8, bool)) -> (u8, bool) {
    let a = Pauli::single(1, 0, xi.0).with_sign(xi.1);
    let b = Pauli::single(1, 0, zi.0).with_sign(zi.1);
    let (k, r) = a.mul(&b);
    debug_assert_eq!(k, 1);
    // i * i^1 * r = -r
    (r.letter(0), !r.is_negative())
}

impl Clifford1 {
    pub const IDENTITY: Clifford1 = Clifford1 { image: [(0, false), (1, false), (2, false), (3, false)] };

    /// Build from the images of X and Z. They must anticommute.
    pub fn from_images(x: (u8, bool), z: (u8, bool)) -> Result<Self> {
        if !(1..=3).contains(&x.0) || !(1..=3).contains(&z.0) || x.0 == z.0 {
            return Err(Error::Invalid(format!("images {x:?}, {z:?} do not define a Clifford")));
        }
        let y = y_image(x, z);
        Ok(Clifford1 { image: [(0, false), x, y, z] })
    }

    pub fn hadamard() -> Self {
        Self::from_images((3, false), (1, false)).unwrap()
    }

    pub fn phase() -> Self {
        Self::from_images((2, false), (3, false)).unwrap()
    }

    /// All 24 elements in a fixed order; index 0 is the identity.
    pub fn all() -> Vec<Clifford1> {
        let mut out = Vec::with_capacity(24);
        for xl in 1..=3u8 {
            for zl in 1..=3u8 {
                if xl == zl {
                    continue;
                }
                for s in 0..4u8 {
                    out.push(Self::from_images((xl, s & 1 == 1), (zl, s & 2 == 2)).unwrap());
                }
            }
        }
        out.sort_by_key(|c| c.index());
        out
    }

    /// Stable index in 0..24.
    pub fn index(&self) -> u8 {
        let (xl, xs) = self.image[1];
        let (zl, zs) = self.image[3];
        // the six ordered letter pairs, identity pair first
        let pair = match (xl, zl) {
            (1, 3) => 0,
            (1, 2) => 1,
            (2, 1) => 2,
            (2, 3) => 3,
            (3, 1) => 4,
            (3, 2) => 5,
            _ => unreachable!(),
        };
        pair * 4 + xs as u8 + 2 * zs as u8
    }

    pub fn from_index(i: u8) -> Result<Self> {
        Self::all().into_iter().find(|c| c.index() == i).ok_or_else(|| Error::Invalid(format!("Clifford index {i} out of range")))
    }

    /// Signed image of a single letter.
    #[inline]
    pub fn map_letter(&self, l: u8) -> (u8, bool) {
        self.image[l as usize]
    }

    pub fn inverse(&self) -> Clifford1 {
        let mut image = [(0u8, false); 4];
        for l in 1..=3u8 {
            let (m, s) = self.image[l as usize];
            image[m as usize] = (l, s);
        }
        Clifford1 { image }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Clifford1) -> Clifford1 {
        let mut image = [(0u8, false); 4];
        for l in 1..=3u8 {
            let (m, s) = other.image[l as usize];
            let (k, t) = self.image[m as usize];
            image[l as usize] = (k, s ^ t);
        }
        Clifford1 { image }
    }

    /// Some Clifford whose unsigned action sends each `from` letter to the
    /// paired `to` letter. Constraints must be consistent.
    pub fn find(constraints: &[(u8, u8)]) -> Option<Clifford1> {
        Self::all().into_iter().find(|c| constraints.iter().all(|&(f, t)| c.image[f as usize].0 == t))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for Clifford1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |(l, neg): (u8, bool)| format!("{}{}", if neg { "-" } else { "+" }, crate::pauli::LETTERS[l as usize]);
        write!(f, "X{}Z{}", s(self.image[1]), s(self.image[3]))
    }
}

impl fmt::Debug for Clifford1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Clifford1({self})")
    }
}

impl std::str::FromStr for Clifford1 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        let bad = || Error::Parse(format!("bad Clifford {s:?}, expected e.g. X+ZZ+X"));
        if b.len() != 6 || b[0] != b'X' || b[3] != b'Z' {
            return Err(bad());
        }
        let letter = |c: u8| match c {
            b'X' => Ok(1),
            b'Y' => Ok(2),
            b'Z' => Ok(3),
            _ => Err(bad()),
        };
        let sign = |c: u8| match c {
            b'+' => Ok(false),
            b'-' => Ok(true),
            _ => Err(bad()),
        };
        Self::from_images((letter(b[2])?, sign(b[1])?), (letter(b[5])?, sign(b[4])?))
    }
}

impl TryFrom<String> for Clifford1 {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Clifford1> for String {
    fn from(c: Clifford1) -> String {
        c.to_string()
    }
}

/// Apply single-qubit Cliffords qubit-wise.
pub fn conjugate_singles(cliffords: &[Clifford1], p: &Pauli) -> Pauli {
    let mut out = *p;
    let mut neg = p.is_negative();
    let mut rest = p.support();
    while rest != 0 {
        let q = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let c = &cliffords[q];
        if c.is_identity() {
            continue;
        }
        let (l, s) = c.map_letter(p.letter(q));
        out.set_letter(q, l);
        neg ^= s;
    }
    out.with_sign(neg)
}

/// Conjugate by CNOT(c→t): X_c → X_cX_t, Z_t → Z_cZ_t.
#[inline]
pub fn conjugate_cnot(c: usize, t: usize, p: &Pauli) -> Pauli {
    let x = p.x_bits();
    let z = p.z_bits();
    let xc = (x >> c) & 1;
    let zc = (z >> c) & 1;
    let xt = (x >> t) & 1;
    let zt = (z >> t) & 1;
    let flip = xc & zt & (xt ^ zc ^ 1);
    let nx = x ^ (xc << t);
    let nz = z ^ (zt << c);
    Pauli::from_bits(p.n(), nx, nz, p.is_negative() ^ (flip == 1)).expect("bits stay within register")
}

/// One layer: disjoint CNOTs followed by single-qubit Cliffords.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordLayer {
    n: usize,
    cnots: Vec<(usize, usize)>,
    singles: Vec<Clifford1>,
}

impl CliffordLayer {
    pub fn new(n: usize, cnots: Vec<(usize, usize)>, singles: Option<Vec<Clifford1>>) -> Result<Self> {
        if n > crate::pauli::MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let mut used = 0u128;
        for &(c, t) in &cnots {
            if c >= n || t >= n || c == t {
                return Err(Error::Invalid(format!("bad CNOT pair ({c},{t}) for n={n}")));
            }
            let m = (1u128 << c) | (1u128 << t);
            if used & m != 0 {
                return Err(Error::Invalid(format!("qubit reused in CNOT pair ({c},{t})")));
            }
            used |= m;
        }
        let singles = singles.unwrap_or_else(|| vec![Clifford1::IDENTITY; n]);
        if singles.len() != n {
            return Err(Error::Dimension { expected: n, found: singles.len() });
        }
        Ok(CliffordLayer { n, cnots, singles })
    }

    pub fn cnots_only(n: usize, cnots: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(n, cnots, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cnots(&self) -> &[(usize, usize)] {
        &self.cnots
    }

    pub fn singles(&self) -> &[Clifford1] {
        &self.singles
    }

    /// Qubits touched by a CNOT.
    pub fn entangled(&self) -> u128 {
        self.cnots.iter().fold(0, |m, &(c, t)| m | 1 << c | 1 << t)
    }

    /// U P U† for the layer unitary U.
    pub fn conjugate(&self, p: &Pauli) -> Result<Pauli> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.n() });
        }
        Ok(self.apply(p))
    }

    /// U† P U.
    pub fn conjugate_inverse(&self, p: &Pauli) -> Result<Pauli> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.n() });
        }
        Ok(self.apply_inverse(p))
    }

    #[inline]
    pub(crate) fn apply(&self, p: &Pauli) -> Pauli {
        let mut q = *p;
        for &(c, t) in &self.cnots {
            q = conjugate_cnot(c, t, &q);
        }
        conjugate_singles(&self.singles, &q)
    }

    #[inline]
    pub(crate) fn apply_inverse(&self, p: &Pauli) -> Pauli {
        let inv: Vec<Clifford1> = self.singles.iter().map(|c| c.inverse()).collect();
        let mut q = conjugate_singles(&inv, p);
        for &(c, t) in self.cnots.iter().rev() {
            q = conjugate_cnot(c, t, &q);
        }
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pauli {
        s.parse().unwrap()
    }

    fn cx() -> CliffordLayer {
        CliffordLayer::cnots_only(2, vec![(0, 1)]).unwrap()
    }

    #[test]
    fn cnot_examples() {
        let g = cx();
        assert_eq!(g.conjugate(&p("IZ")).unwrap().to_string(), "ZZ");
        assert_eq!(g.conjugate(&p("II")).unwrap().to_string(), "II");
        assert_eq!(g.conjugate(&p("YX")).unwrap().to_string(), "YI");
        assert_eq!(g.conjugate(&p("XZ")).unwrap().to_string(), "-YY");
        assert_eq!(g.conjugate(&p("YZ")).unwrap().to_string(), "XY");
        assert_eq!(g.conjugate(&p("YY")).unwrap().to_string(), "-XZ");
        assert!(g.conjugate(&p("Z")).is_err());
    }

    #[test]
    fn cnot_is_self_inverse_on_all_labels() {
        let g = CliffordLayer::cnots_only(3, vec![(2, 0)]).unwrap();
        for a in Pauli::all(3) {
            assert_eq!(g.apply(&g.apply(&a)), a);
            assert_eq!(g.apply_inverse(&g.apply(&a)), a);
        }
    }

    #[test]
    fn clifford_group_has_24_distinct_elements() {
        let all = Clifford1::all();
        assert_eq!(all.len(), 24);
        assert!(all[0].is_identity());
        for (i, c) in all.iter().enumerate() {
            assert_eq!(c.index() as usize, i);
            assert!(c.compose(&c.inverse()).is_identity());
            assert_eq!(c.to_string().parse::<Clifford1>().unwrap(), *c);
        }
    }

    #[test]
    fn hadamard_and_phase_images() {
        let h = Clifford1::hadamard();
        assert_eq!(h.map_letter(2), (2, true));
        let s = Clifford1::phase();
        assert_eq!(s.map_letter(2), (1, true));
    }

    #[test]
    fn solver_honours_constraints() {
        let c = Clifford1::find(&[(1, 3), (3, 2)]).unwrap();
        assert_eq!(c.map_letter(1).0, 3);
        assert_eq!(c.map_letter(3).0, 2);
        assert!(Clifford1::find(&[(1, 3), (2, 3)]).is_none());
    }

    #[test]
    fn overlapping_pairs_rejected() {
        assert!(CliffordLayer::cnots_only(3, vec![(0, 1), (1, 2)]).is_err());
        assert!(CliffordLayer::cnots_only(2, vec![(0, 0)]).is_err());
    }
}
