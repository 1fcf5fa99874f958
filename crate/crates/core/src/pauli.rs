//! n-qubit Pauli operators in symplectic form.
//!
//! A Pauli is stored as two bit masks (`x`, `z`) plus a sign bit. Qubit `q`
//! lives in bit `q` of each mask; the letter on that qubit is
//! `I=(0,0) X=(1,0) Y=(1,1) Z=(0,1)`. Text labels put qubit 0 leftmost.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported register. Masks are `u128`.
pub const MAX_QUBITS: usize = 128;

/// Single-qubit letters in label order.
pub const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Support pattern: bit `q` set iff qubit `q` is acted on.
pub type Pattern = u128;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pauli {
    n: usize,
    x: u128,
    z: u128,
    neg: bool,
}

#[inline]
fn mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

impl Pauli {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Pauli { n, x: 0, z: 0, neg: false }
    }

    /// Build from raw masks; bits above `n` are rejected.
    pub fn from_bits(n: usize, x: u128, z: u128, neg: bool) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        if (x | z) & !mask(n) != 0 {
            return Err(Error::Dimension { expected: n, found: 128 - (x | z).leading_zeros() as usize });
        }
        Ok(Pauli { n, x, z, neg })
    }

    /// Single letter (0..4 = I,X,Y,Z) on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: u8) -> Self {
        let mut p = Pauli::identity(n);
        p.set_letter(q, letter);
        p
    }

    /// All-Z Pauli on the given pattern.
    pub fn z_on(n: usize, pattern: Pattern) -> Self {
        Pauli { n, x: 0, z: pattern & mask(n), neg: false }
    }

    /// All-X Pauli on the given pattern.
    pub fn x_on(n: usize, pattern: Pattern) -> Self {
        Pauli { n, x: pattern & mask(n), z: 0, neg: false }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn x_bits(&self) -> u128 {
        self.x
    }
    #[inline]
    pub fn z_bits(&self) -> u128 {
        self.z
    }
    #[inline]
    pub fn is_negative(&self) -> bool {
        self.neg
    }
    #[inline]
    pub fn sign(&self) -> f64 {
        if self.neg {
            -1.0
        } else {
            1.0
        }
    }

    /// Same operator with sign +1; noise channels act on these labels.
    #[inline]
    pub fn unsigned(&self) -> Self {
        Pauli { neg: false, ..*self }
    }

    #[inline]
    pub fn negated(&self) -> Self {
        Pauli { neg: !self.neg, ..*self }
    }

    #[inline]
    pub fn with_sign(&self, neg: bool) -> Self {
        Pauli { neg, ..*self }
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// pt(P): the set of qubits acted on non-trivially.
    #[inline]
    pub fn support(&self) -> Pattern {
        self.x | self.z
    }

    /// |P|, the number of qubits in the support.
    #[inline]
    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    #[inline]
    pub fn letter(&self, q: usize) -> u8 {
        letter_code(((self.x >> q) & 1) as u8, ((self.z >> q) & 1) as u8)
    }

    pub fn set_letter(&mut self, q: usize, letter: u8) {
        assert!(q < self.n, "qubit {q} out of range for n={}", self.n);
        let (xb, zb) = letter_bits(letter);
        let bit = 1u128 << q;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
    }

    /// Symplectic product: 0 if the operators commute, 1 otherwise.
    #[inline]
    pub fn symplectic(&self, other: &Pauli) -> u8 {
        (((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1) as u8
    }

    #[inline]
    pub fn commutes_with(&self, other: &Pauli) -> bool {
        self.symplectic(other) == 0
    }

    /// Operator product `self * other`; returns the power k of `i` and the
    /// signed Pauli such that `self * other = i^k * result`. `k` is 0 or 1.
    pub fn mul(&self, other: &Pauli) -> (u8, Pauli) {
        debug_assert_eq!(self.n, other.n);
        // P = i^{|x z|} X^x Z^z with Y = iXZ.
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let mut phase: i64 = (self.x & self.z).count_ones() as i64
            + (other.x & other.z).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64
            - (x3 & z3).count_ones() as i64;
        if self.neg {
            phase += 2;
        }
        if other.neg {
            phase += 2;
        }
        let phase = phase.rem_euclid(4) as u8;
        let neg = phase >= 2;
        (phase & 1, Pauli { n: self.n, x: x3, z: z3, neg })
    }

    /// Product of two commuting Paulis (always Hermitian, sign ±1).
    pub fn mul_commuting(&self, other: &Pauli) -> Pauli {
        let (i, p) = self.mul(other);
        debug_assert_eq!(i, 0, "product of anticommuting Paulis is not Hermitian");
        p
    }

    /// Product ignoring phase; used for Pauli frames.
    #[inline]
    pub fn frame_mul(&self, other: &Pauli) -> Pauli {
        Pauli { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z, neg: false }
    }

    /// Restriction of this Pauli to the qubits in `pattern`.
    #[inline]
    pub fn restrict(&self, pattern: Pattern) -> Pauli {
        Pauli { n: self.n, x: self.x & pattern, z: self.z & pattern, neg: false }
    }

    /// `self ◁ other`: support contained in `other`'s and equal letters there,
    /// i.e. qubit-wise commuting on a sub-support.
    #[inline]
    pub fn divides(&self, other: &Pauli) -> bool {
        let s = self.support();
        s & !other.support() == 0 && (self.x ^ other.x) & s == 0 && (self.z ^ other.z) & s == 0
    }

    /// Letter-wise compatibility: on every qubit where both act, same letter.
    #[inline]
    pub fn qubitwise_commutes(&self, other: &Pauli) -> bool {
        let both = self.support() & other.support();
        (self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0
    }

    /// Dense index in `0..4^n`: base-4 digits I=0,X=1,Y=2,Z=3, qubit 0 most
    /// significant, so index order equals lexicographic label order.
    pub fn dense_index(&self) -> usize {
        let mut idx = 0usize;
        for q in 0..self.n {
            idx = idx * 4 + self.letter(q) as usize;
        }
        idx
    }

    pub fn from_dense_index(n: usize, mut idx: usize) -> Pauli {
        let mut p = Pauli::identity(n);
        for q in (0..n).rev() {
            p.set_letter(q, (idx % 4) as u8);
            idx /= 4;
        }
        p
    }

    /// Every unsigned Pauli on `n` qubits in dense-index order.
    pub fn all(n: usize) -> impl Iterator<Item = Pauli> {
        assert!(n <= 12, "dense enumeration is limited to n <= 12");
        (0..1usize << (2 * n)).map(move |i| Pauli::from_dense_index(n, i))
    }

    /// Every unsigned Pauli whose support is exactly `pattern`.
    pub fn with_support(n: usize, pattern: Pattern) -> Vec<Pauli> {
        let qubits: Vec<usize> = (0..n).filter(|q| pattern >> q & 1 == 1).collect();
        let count = 3usize.pow(qubits.len() as u32);
        let mut out = Vec::with_capacity(count);
        for mut c in 0..count {
            let mut p = Pauli::identity(n);
            for &q in qubits.iter().rev() {
                p.set_letter(q, (c % 3) as u8 + 1);
                c /= 3;
            }
            out.push(p);
        }
        out
    }

    /// Label order used for generator sets: by weight, then lexicographic.
    pub fn cmp_weight_lex(&self, other: &Pauli) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.cmp_lex(other))
    }

    pub fn cmp_lex(&self, other: &Pauli) -> Ordering {
        for q in 0..self.n.min(other.n) {
            let c = self.letter(q).cmp(&other.letter(q));
            if c != Ordering::Equal {
                return c;
            }
        }
        self.n.cmp(&other.n)
    }

    pub fn parse(s: &str) -> Result<Pauli> {
        s.parse()
    }
}

#[inline]
fn letter_code(x: u8, z: u8) -> u8 {
    match (x, z) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

#[inline]
pub(crate) fn letter_bits(letter: u8) -> (bool, bool) {
    match letter {
        0 => (false, false),
        1 => (true, false),
        2 => (true, true),
        3 => (false, true),
        _ => panic!("invalid Pauli letter code {letter}"),
    }
}

impl PartialOrd for Pauli {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pauli {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_lex(other).then(self.neg.cmp(&other.neg))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            f.write_str("-")?;
        }
        for q in 0..self.n {
            write!(f, "{}", LETTERS[self.letter(q) as usize])?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pauli> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli label {s:?}")));
        }
        if body.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(body.len()));
        }
        let mut p = Pauli::identity(body.len());
        for (q, c) in body.chars().enumerate() {
            let l = match c {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                'Z' => 3,
                _ => return Err(Error::Parse(format!("bad Pauli letter {c:?} in {s:?}"))),
            };
            p.set_letter(q, l);
        }
        p.neg = neg;
        Ok(p)
    }
}

impl serde::Serialize for Pauli {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Pauli {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Check two Paulis act on the same register.
pub fn same_n(a: &Pauli, b: &Pauli) -> Result<()> {
    if a.n != b.n {
        Err(Error::Dimension { expected: a.n, found: b.n })
    } else {
        Ok(())
    }
}

/// ⟨a,b⟩ with a dimension check.
pub fn symplectic_product(a: &Pauli, b: &Pauli) -> Result<u8> {
    same_n(a, b)?;
    Ok(a.symplectic(b))
}

/// Qubit indices of a pattern, ascending.
pub fn pattern_qubits(pattern: Pattern) -> impl Iterator<Item = usize> {
    let mut rest = pattern;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let q = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(q)
        }
    })
}

/// Pattern rendered as a 0/1 string, qubit 0 leftmost.
pub fn pattern_label(n: usize, pattern: Pattern) -> String {
    (0..n).map(|q| if pattern >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_pattern(s: &str) -> Result<Pattern> {
    let mut p: Pattern = 0;
    if s.len() > MAX_QUBITS {
        return Err(Error::TooManyQubits(s.len()));
    }
    for (q, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => p |= 1 << q,
            _ => return Err(Error::Parse(format!("bad pattern {s:?}"))),
        }
    }
    Ok(p)
}
