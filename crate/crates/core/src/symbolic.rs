//! Classical shadow of the quantum layer.
//!
//! Bell codes and key material are both 2-bit symbols, and
//! every quantum step of the protocol reduces to XOR arithmetic over them.
//! This module provides that arithmetic plus a sampler for entanglement
//! swapping, and doubles as an oracle for the state-vector layer.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logical::{BellCode, UnitaryCode};

/// A 2-bit symbol. The high bit is written first: `Dibit(0b10)` prints as `10`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dibit(u8);

impl Dibit {
    pub const ALL: [Dibit; 4] = [Dibit(0), Dibit(1), Dibit(2), Dibit(3)];

    pub fn new(value: u8) -> Result<Self> {
        if value > 3 {
            return Err(Error::InvalidArgument(format!(
                "{value} is not a 2-bit value"
            )));
        }
        Ok(Dibit(value))
    }

    pub(crate) const fn from_low_bits(value: u8) -> Self {
        Dibit(value & 3)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn high(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn low(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Dibit(rng.random_range(0..4))
    }
}

impl BitXor for Dibit {
    type Output = Dibit;

    fn bitxor(self, rhs: Dibit) -> Dibit {
        Dibit(self.0 ^ rhs.0)
    }
}

impl fmt::Display for Dibit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.high()), u8::from(self.low()))
    }
}

impl FromStr for Dibit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Dibit(0)),
            "01" => Ok(Dibit(1)),
            "10" => Ok(Dibit(2)),
            "11" => Ok(Dibit(3)),
            _ => Err(Error::InvalidArgument(format!("'{s}' is not a dibit"))),
        }
    }
}

impl Serialize for Dibit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dibit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sequence of dibits, e.g. a party's secret key or the measurement record `M`.
///
/// Text form is the bit string read left to right, most significant dibit
/// first: `"0011"` is `[00, 11]`. Serialized as a list of 2-character groups.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DibitString(Vec<Dibit>);

impl DibitString {
    pub fn new(dibits: Vec<Dibit>) -> Self {
        DibitString(dibits)
    }

    pub fn zeros(len: usize) -> Self {
        DibitString(vec![Dibit(0); len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        DibitString((0..len).map(|_| Dibit::random(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Dibit] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Dibit> + '_ {
        self.0.iter().copied()
    }

    /// Elementwise XOR.
    pub fn xor(&self, other: &DibitString) -> Result<DibitString> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(DibitString(
            self.0.iter().zip(&other.0).map(|(a, b)| *a ^ *b).collect(),
        ))
    }

    pub fn to_bits(&self) -> BitString {
        BitString(self.0.iter().flat_map(|d| [d.high(), d.low()]).collect())
    }
}

impl From<Vec<Dibit>> for DibitString {
    fn from(v: Vec<Dibit>) -> Self {
        DibitString(v)
    }
}

impl std::ops::Index<usize> for DibitString {
    type Output = Dibit;

    fn index(&self, i: usize) -> &Dibit {
        &self.0[i]
    }
}

impl FromIterator<Dibit> for DibitString {
    fn from_iter<I: IntoIterator<Item = Dibit>>(iter: I) -> Self {
        DibitString(iter.into_iter().collect())
    }
}

impl fmt::Display for DibitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for DibitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: BitString = s.parse()?;
        bits.to_dibits()
    }
}

/// Plain bit string, written most significant bit first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Splits into dibits; fails on odd length.
    pub fn to_dibits(&self) -> Result<DibitString> {
        if !self.0.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "bit string of length {} does not split into dibits",
                self.0.len()
            )));
        }
        Ok(self
            .0
            .chunks(2)
            .map(|c| Dibit((u8::from(c[0]) << 1) | u8::from(c[1])))
            .collect())
    }

    /// `(first half, second half)`; fails on odd length.
    pub fn halves(&self) -> Result<(BitString, BitString)> {
        if !self.0.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "odd-length bit string has no halves".into(),
            ));
        }
        let (a, b) = self.0.split_at(self.0.len() / 2);
        Ok((BitString(a.to_vec()), BitString(b.to_vec())))
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BitString(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "'{other}' is not a bit in \"{s}\""
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bell code reached by applying unitary `u` to one half of a pair in state `b`.
pub fn unitary_action(u: UnitaryCode, b: BellCode) -> BellCode {
    b ^ u
}

/// Samples the results of swapping two Bell pairs with codes `is1` and `is2`.
///
/// `mr1` is uniform; `mr2` is pinned by `mr1 ⊕ mr2 = is1 ⊕ is2`.
pub fn entanglement_swap<R: Rng + ?Sized>(
    is1: BellCode,
    is2: BellCode,
    rng: &mut R,
) -> (BellCode, BellCode) {
    let mr1 = BellCode::from(Dibit::random(rng));
    let mr2 = mr1 ^ is1 ^ is2;
    (mr1, mr2)
}

/// `(K_A ⊕ K_B) ∥ (K_A ⊕ K_B ⊕ M)` as a bit string of length `4n`.
pub fn final_key(ka: &DibitString, kb: &DibitString, m: &DibitString) -> Result<BitString> {
    let mixed = ka.xor(kb)?;
    let masked = mixed.xor(m)?;
    Ok(mixed.to_bits().concat(&masked.to_bits()))
}
