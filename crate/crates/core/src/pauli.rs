//! Pauli labels, Pauli strings, weighted-sum observables, and eigenvalue
//! sign strings. These are the common currency between the simulator, the
//! cutting engine, and the hypothesis test.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Single-qubit Pauli label. Ordering is `I < X < Y < Z`, which fixes the
/// enumeration order of measurement bases everywhere in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Eigenvalue sign assigned to a computational-basis measurement bit
    /// once the measurement rotation for this label has been applied.
    ///
    /// The identity label reads in the Z frame but carries eigenvalue +1 for
    /// both outcomes (I = |0><0| + |1><1|), so its sign is pinned to plus.
    pub fn sign_of_bit(self, bit: bool) -> Sign {
        match self {
            Pauli::I => Sign::Plus,
            _ if bit => Sign::Minus,
            _ => Sign::Plus,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl Serialize for Pauli {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(self.as_char())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliParseError {
    #[error("invalid Pauli character {0:?} (expected I, X, Y, or Z)")]
    BadChar(char),
}

/// Tensor product of single-qubit Pauli labels, e.g. "ZIX".
/// Position i refers to wire i of whatever register the string is applied to.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn all_z(len: usize) -> PauliString {
        PauliString(vec![Pauli::Z; len])
    }

    pub fn all_i(len: usize) -> PauliString {
        PauliString(vec![Pauli::I; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }
}

impl FromStr for PauliString {
    type Err = PauliParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or(PauliParseError::BadChar(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("observable has no terms")]
    Empty,
    #[error("observable term {index} has width {got}, expected {expected}")]
    WidthMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("observable coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),
}

/// Hermitian observable as a real-weighted sum of Pauli strings,
/// `O = sum_S a_S * S`. All terms share one width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Observable, ObservableError> {
        let width = match terms.first() {
            Some((_, s)) => s.len(),
            None => return Err(ObservableError::Empty),
        };
        for (i, (a, s)) in terms.iter().enumerate() {
            if !a.is_finite() {
                return Err(ObservableError::NonFiniteCoefficient(*a));
            }
            if s.len() != width {
                return Err(ObservableError::WidthMismatch {
                    index: i,
                    got: s.len(),
                    expected: width,
                });
            }
        }
        Ok(Observable { terms })
    }

    /// Single Pauli string with unit coefficient.
    pub fn single(string: PauliString) -> Observable {
        Observable {
            terms: vec![(1.0, string)],
        }
    }

    pub fn width(&self) -> usize {
        self.terms[0].1.len()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }
}

/// Eigenvalue sign, +1 or -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_bit(bit: bool) -> Sign {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

/// String of eigenvalue signs, e.g. "+-+". Stored as a bitmask (bit i set
/// means position i is -1), so strings are limited to 32 positions — far
/// beyond what a dense simulator can reach anyway.
///
/// The canonical ordering treats the mask as an integer with position 0 as
/// the least significant bit; all fixed summation orders in the crate use it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Eigenstring {
    len: u8,
    minus_mask: u32,
}

impl Eigenstring {
    pub const MAX_LEN: usize = 32;

    /// All-plus string of the given length.
    pub fn plus(len: usize) -> Eigenstring {
        assert!(len <= Self::MAX_LEN);
        Eigenstring {
            len: len as u8,
            minus_mask: 0,
        }
    }

    /// Builds from a minus-mask; bit i of `mask` set means sign -1 at i.
    pub fn from_mask(mask: u32, len: usize) -> Eigenstring {
        assert!(len <= Self::MAX_LEN);
        let keep = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
        Eigenstring {
            len: len as u8,
            minus_mask: mask & keep,
        }
    }

    pub fn from_signs(signs: &[Sign]) -> Eigenstring {
        let mut e = Eigenstring::plus(signs.len());
        for (i, s) in signs.iter().enumerate() {
            e.set(i, *s);
        }
        e
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Sign {
        debug_assert!(i < self.len());
        Sign::from_bit(self.minus_mask >> i & 1 == 1)
    }

    pub fn set(&mut self, i: usize, sign: Sign) {
        debug_assert!(i < self.len());
        match sign {
            Sign::Plus => self.minus_mask &= !(1 << i),
            Sign::Minus => self.minus_mask |= 1 << i,
        }
    }

    pub fn mask(&self) -> u32 {
        self.minus_mask
    }

    /// Product of all signs: +1 for an even number of minuses, else -1.
    pub fn parity(&self) -> f64 {
        if self.minus_mask.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Elementwise product of two sign strings of equal length.
    pub fn elementwise_product(&self, other: &Eigenstring) -> Eigenstring {
        assert_eq!(self.len, other.len);
        Eigenstring {
            len: self.len,
            minus_mask: self.minus_mask ^ other.minus_mask,
        }
    }

    /// Concatenation, with `other`'s positions shifted past `self`'s.
    pub fn concat(&self, other: &Eigenstring) -> Eigenstring {
        let len = self.len() + other.len();
        assert!(len <= Self::MAX_LEN);
        Eigenstring {
            len: len as u8,
            minus_mask: self.minus_mask | other.minus_mask << self.len,
        }
    }

    pub fn signs(&self) -> impl Iterator<Item = Sign> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

impl fmt::Display for Eigenstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.signs() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for Eigenstring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Product of signs of an eigenstring; +1 for the empty string.
pub fn parity(signs: &Eigenstring) -> f64 {
    signs.parity()
}
