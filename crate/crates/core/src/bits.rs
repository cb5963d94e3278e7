use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Widest bit string representable; tables are capped much lower.
pub const MAX_BITS: usize = 31;

/// An n-bit string. The most significant bit belongs to box 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    bits: u32,
    width: u8,
}

impl BitString {
    pub fn new(bits: u32, width: usize) -> Result<Self> {
        if width == 0 || width > MAX_BITS {
            return Err(Error::Domain(format!("bit string width {width} not in 1..={MAX_BITS}")));
        }
        if (bits as u64) >> width != 0 {
            return Err(Error::Domain(format!("{bits} does not fit in {width} bits")));
        }
        Ok(BitString { bits, width: width as u8 })
    }

    pub fn zeros(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn value(&self) -> u32 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Bit of box `i`, 1-based.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.width(), "box index {i} out of range");
        (self.bits >> (self.width() - i)) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn hamming(&self, other: &BitString) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn all(width: usize) -> impl Iterator<Item = BitString> {
        (0..1u32 << width).map(move |b| BitString { bits: b, width: width as u8 })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.width())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("invalid bit string '{s}'")));
        }
        if s.len() > MAX_BITS {
            return Err(Error::Parse(format!("bit string '{s}' longer than {MAX_BITS}")));
        }
        let bits = u32::from_str_radix(s, 2).map_err(|e| Error::Parse(e.to_string()))?;
        BitString::new(bits, s.len())
    }
}

/// Formats an index as a `width`-bit string without constructing a `BitString`.
pub fn bits_to_string(bits: usize, width: usize) -> String {
    format!("{:0width$b}", bits, width = width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_is_box_one() {
        let b: BitString = "10".parse().unwrap();
        assert_eq!(b.value(), 2);
        assert!(b.bit(1));
        assert!(!b.bit(2));
        assert_eq!(b.to_string(), "10");
    }

    #[test]
    fn rejects_garbage() {
        assert!("".parse::<BitString>().is_err());
        assert!("012".parse::<BitString>().is_err());
        assert!(BitString::new(4, 2).is_err());
        assert!(BitString::new(0, 0).is_err());
    }

    #[test]
    fn hamming_distance() {
        let a: BitString = "0110".parse().unwrap();
        let b: BitString = "1100".parse().unwrap();
        assert_eq!(a.hamming(&b), 2);
        assert_eq!(BitString::all(3).count(), 8);
    }
}
