use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One bit of a four-state value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Logic {
    Zero,
    One,
    X,
    Z,
}

impl Logic {
    pub fn from_char(c: char) -> Option<Logic> {
        match c {
            '0' => Some(Logic::Zero),
            '1' => Some(Logic::One),
            'x' | 'X' => Some(Logic::X),
            'z' | 'Z' => Some(Logic::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Logic::Zero => '0',
            Logic::One => '1',
            Logic::X => 'x',
            Logic::Z => 'z',
        }
    }
}

/// A vector over {0,1,x,z}, most significant bit first. The width is the
/// number of bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourStateValue {
    bits: Vec<Logic>,
}

impl FourStateValue {
    pub fn new(bits: Vec<Logic>) -> Self {
        assert!(!bits.is_empty(), "zero-width value");
        FourStateValue { bits }
    }

    pub fn filled(width: usize, b: Logic) -> Self {
        Self::new(alloc::vec![b; width.max(1)])
    }

    pub fn unknown(width: usize) -> Self {
        Self::filled(width, Logic::X)
    }

    pub fn from_u128(v: u128, width: usize) -> Self {
        let width = width.max(1);
        let bits = (0..width)
            .rev()
            .map(|i| {
                if i < 128 && (v >> i) & 1 == 1 {
                    Logic::One
                } else {
                    Logic::Zero
                }
            })
            .collect();
        FourStateValue { bits }
    }

    /// Parse a binary digit string and fit it to `width` using the VCD
    /// left-extension rule: a leading x or z extends as itself, anything
    /// else extends with 0. Longer strings keep their low bits.
    pub fn from_binary(s: &str, width: usize) -> Option<Self> {
        let digits: Option<Vec<Logic>> = s.chars().map(Logic::from_char).collect();
        let mut digits = digits?;
        if digits.is_empty() {
            return None;
        }
        let width = width.max(1);
        if digits.len() > width {
            digits.drain(..digits.len() - width);
        } else if digits.len() < width {
            let fill = match digits[0] {
                Logic::X => Logic::X,
                Logic::Z => Logic::Z,
                _ => Logic::Zero,
            };
            let mut v = alloc::vec![fill; width - digits.len()];
            v.extend(digits);
            digits = v;
        }
        Some(FourStateValue { bits: digits })
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[Logic] {
        &self.bits
    }

    pub fn is_known(&self) -> bool {
        self.bits.iter().all(|b| matches!(b, Logic::Zero | Logic::One))
    }

    pub fn to_u128(&self) -> Option<u128> {
        if !self.is_known() || self.bits.len() > 128 {
            return None;
        }
        Some(
            self.bits
                .iter()
                .fold(0u128, |acc, b| (acc << 1) | (*b == Logic::One) as u128),
        )
    }

    pub fn to_binary(&self) -> String {
        self.bits.iter().map(|b| b.as_char()).collect()
    }

    /// Hex digits, most significant first. A nibble with any x shows `x`,
    /// an all-z nibble `z`, a partly-z nibble `X`.
    pub fn to_hex(&self) -> String {
        let pad = (4 - self.bits.len() % 4) % 4;
        let mut padded = alloc::vec![Logic::Zero; pad];
        padded.extend_from_slice(&self.bits);
        padded
            .chunks(4)
            .map(|n| {
                if n.iter().all(|b| *b == Logic::Z) {
                    'z'
                } else if n.contains(&Logic::X) {
                    'x'
                } else if n.contains(&Logic::Z) {
                    'X'
                } else {
                    let v = n.iter().fold(0u32, |a, b| (a << 1) | (*b == Logic::One) as u32);
                    core::char::from_digit(v, 16).unwrap_or('?')
                }
            })
            .collect()
    }

    /// Report formatting: binary up to 4 bits, `0x`-prefixed hex above.
    pub fn display(&self) -> String {
        if self.width() > 4 {
            let mut s = String::from("0x");
            s.push_str(&self.to_hex());
            s
        } else {
            self.to_binary()
        }
    }
}

impl fmt::Display for FourStateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

// Serialized as the binary string so reports stay readable.
impl Serialize for FourStateValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_binary())
    }
}

impl<'de> Deserialize<'de> for FourStateValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FourStateValue::from_binary(&s, s.len())
            .ok_or_else(|| serde::de::Error::custom("expected a string over 0,1,x,z"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_extension() {
        assert_eq!(FourStateValue::from_binary("1", 4).unwrap().to_binary(), "0001");
        assert_eq!(FourStateValue::from_binary("x1", 4).unwrap().to_binary(), "xxx1");
        assert_eq!(FourStateValue::from_binary("z", 3).unwrap().to_binary(), "zzz");
        assert_eq!(FourStateValue::from_binary("10110", 4).unwrap().to_binary(), "0110");
    }

    #[test]
    fn display_switches_to_hex_above_four_bits() {
        assert_eq!(FourStateValue::from_u128(0b1100, 4).display(), "1100");
        assert_eq!(FourStateValue::from_u128(0x1a, 8).display(), "0x1a");
        assert_eq!(FourStateValue::from_binary("x0001", 5).unwrap().display(), "0xx1");
    }

    #[test]
    fn numeric_roundtrip() {
        let v = FourStateValue::from_u128(0xdead, 16);
        assert_eq!(v.to_u128(), Some(0xdead));
        assert_eq!(FourStateValue::unknown(3).to_u128(), None);
    }
}
