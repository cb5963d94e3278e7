//! Hash functions `{0,1}^n -> {0,1}` applied to the box outputs.
//!
//! Spec strings: `xor`, `and`, `majority`, `const0`, `const1`, or
//! `tt:<hex>` where bit `k` of the hex number is `f(k)` (low bit is
//! `f(0...0)`, and `k` reads its bits with box 1 as the most significant).

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest width for which a hash function can be enumerated or given as `tt:`.
pub const MAX_TRUTH_TABLE_WIDTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HashName {
    Xor,
    And,
    Majority,
    Const0,
    Const1,
    Custom,
}

impl HashName {
    pub fn as_str(&self) -> &'static str {
        match self {
            HashName::Xor => "xor",
            HashName::And => "and",
            HashName::Majority => "majority",
            HashName::Const0 => "const0",
            HashName::Const1 => "const1",
            HashName::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashFunction {
    width: usize,
    table: Vec<bool>,
    name: HashName,
}

impl HashFunction {
    pub fn from_table(width: usize, table: Vec<bool>) -> Result<Self> {
        if width > 24 {
            return Err(Error::Resource { requested: width, cap: 24 });
        }
        if table.len() != 1 << width {
            return Err(Error::Domain(format!(
                "truth table has {} entries, expected 2^{width}",
                table.len()
            )));
        }
        Ok(HashFunction { width, table, name: HashName::Custom })
    }

    pub fn named(name: HashName, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::Domain("hash function width must be positive".into()));
        }
        let table = (0..1usize << width)
            .map(|x| match name {
                HashName::Xor => x.count_ones() % 2 == 1,
                HashName::And => x == (1 << width) - 1,
                // strict majority; for even widths a tie maps to 0
                HashName::Majority => 2 * x.count_ones() as usize > width,
                HashName::Const0 => false,
                HashName::Const1 => true,
                HashName::Custom => unreachable!("custom functions need a truth table"),
            })
            .collect();
        let mut f = Self::from_table(width, table)?;
        f.name = name;
        Ok(f)
    }

    pub fn xor(width: usize) -> Self {
        Self::named(HashName::Xor, width).expect("valid width")
    }

    pub fn const0(width: usize) -> Self {
        Self::named(HashName::Const0, width).expect("valid width")
    }

    /// Builds a function from the integer encoding of its truth table.
    pub fn from_code(width: usize, code: u64) -> Result<Self> {
        if width > MAX_TRUTH_TABLE_WIDTH {
            return Err(Error::Unsupported(format!(
                "truth tables limited to width {MAX_TRUTH_TABLE_WIDTH}"
            )));
        }
        let size = 1usize << width;
        if size < 64 && code >> size != 0 {
            return Err(Error::Domain(format!(
                "truth table {code:#x} has bits beyond 2^{width} entries"
            )));
        }
        Self::from_table(width, (0..size).map(|x| (code >> x) & 1 == 1).collect())
    }

    pub fn parse(spec: &str, width: usize) -> Result<Self> {
        let spec = spec.trim();
        let name = match spec {
            "xor" => HashName::Xor,
            "and" => HashName::And,
            "majority" => HashName::Majority,
            "const0" => HashName::Const0,
            "const1" => HashName::Const1,
            _ => {
                let hex = spec
                    .strip_prefix("tt:")
                    .ok_or_else(|| Error::Parse(format!("unknown hash function '{spec}'")))?;
                let hex = hex.trim_start_matches("0x");
                let code = u64::from_str_radix(hex, 16)
                    .map_err(|_| Error::Parse(format!("invalid truth table '{spec}'")))?;
                return Self::from_code(width, code);
            }
        };
        Self::named(name, width)
    }

    /// All `2^(2^width)` functions, in truth-table code order.
    pub fn enumerate(width: usize) -> Result<impl Iterator<Item = HashFunction>> {
        if width == 0 || width > 4 {
            return Err(Error::Unsupported(format!(
                "exhaustive enumeration only for widths 1..=4, got {width}"
            )));
        }
        let count = 1u64 << (1u32 << width);
        Ok((0..count).map(move |code| Self::from_code(width, code).expect("code in range")))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn name(&self) -> HashName {
        self.name
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x]
    }

    /// `f(x)` as 0 or 1.
    pub fn bit(&self, x: usize) -> usize {
        self.table[x] as usize
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn ones(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }

    pub fn code(&self) -> Option<u64> {
        if self.width > MAX_TRUTH_TABLE_WIDTH {
            return None;
        }
        Some(
            self.table
                .iter()
                .enumerate()
                .fold(0u64, |acc, (x, &b)| acc | ((b as u64) << x)),
        )
    }

    /// Spec string that parses back to this function.
    pub fn spec(&self) -> String {
        match self.name {
            HashName::Custom => match self.code() {
                Some(code) => format!("tt:{code:x}"),
                None => "custom".to_string(),
            },
            named => named.as_str().to_string(),
        }
    }
}

impl fmt::Display for HashFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl Serialize for HashFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_functions() {
        let xor = HashFunction::parse("xor", 2).unwrap();
        assert_eq!(xor.table(), &[false, true, true, false]);
        let and = HashFunction::parse("and", 2).unwrap();
        assert_eq!(and.table(), &[false, false, false, true]);
        let maj = HashFunction::parse("majority", 3).unwrap();
        assert_eq!(maj.ones(), 4);
        assert_eq!(HashFunction::parse("const1", 3).unwrap().ones(), 8);
    }

    #[test]
    fn truth_table_low_bit_first() {
        // 0b10: f(0)=0, f(1)=1, the identity on one bit
        let id = HashFunction::parse("tt:2", 1).unwrap();
        assert_eq!(id.table(), &[false, true]);
        assert_eq!(id.spec(), "tt:2");
        assert_eq!(HashFunction::parse("tt:6", 2).unwrap(), {
            let mut x = HashFunction::xor(2);
            x.name = HashName::Custom;
            x
        });
    }

    #[test]
    fn truth_table_errors() {
        assert!(HashFunction::parse("tt:10", 2).is_err());
        assert!(HashFunction::parse("tt:zz", 2).is_err());
        assert!(HashFunction::parse("sha256", 2).is_err());
        assert!(HashFunction::from_table(2, vec![true; 3]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(HashFunction::enumerate(1).unwrap().count(), 4);
        assert_eq!(HashFunction::enumerate(2).unwrap().count(), 16);
        assert_eq!(HashFunction::enumerate(3).unwrap().count(), 256);
        assert!(HashFunction::enumerate(5).is_err());
    }

    #[test]
    fn spec_round_trips() {
        for f in HashFunction::enumerate(3).unwrap() {
            assert_eq!(HashFunction::parse(&f.spec(), 3).unwrap(), f);
        }
    }
}
