//! Systematic CRC precoding.
//!
//! The generator is stored with bit `k` holding the coefficient of `D^k`,
//! so `1 + D^5 + D^6` is `0x61`. Message bits enter the division
//! highest-order first and the remainder is appended highest-order first,
//! i.e. the constant-term coefficient is the last appended bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcSpec {
    poly: u64,
    degree: u32,
}

impl CrcSpec {
    /// `1 + D^5 + D^6`.
    pub const CRC6: CrcSpec = CrcSpec {
        poly: 0x61,
        degree: 6,
    };

    pub fn new(poly: u64) -> Result<Self> {
        if poly < 2 {
            return Err(invalid("CRC generator must have degree >= 1"));
        }
        let degree = 63 - poly.leading_zeros();
        if degree > 32 {
            return Err(invalid("CRC degree above 32 is not supported"));
        }
        if poly & 1 == 0 {
            return Err(invalid(format!(
                "CRC generator {poly:#x} must have a nonzero constant term"
            )));
        }
        Ok(Self { poly, degree })
    }

    pub fn poly(&self) -> u64 {
        self.poly
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    /// Remainder of `d(x) * x^deg` modulo the generator, highest-order bit first.
    pub fn remainder(&self, bits: &BitVector) -> BitVector {
        let deg = self.degree;
        let mask = (1u64 << deg) - 1;
        let taps = self.poly & mask;
        let mut reg = 0u64;
        for b in bits.iter() {
            let feedback = b ^ ((reg >> (deg - 1)) & 1 == 1);
            reg = (reg << 1) & mask;
            if feedback {
                reg ^= taps;
            }
        }
        BitVector::from_bools((0..deg).rev().map(|k| (reg >> k) & 1 == 1))
    }

    pub fn append(&self, bits: &BitVector) -> BitVector {
        bits.concat(&self.remainder(bits))
    }

    pub fn check(&self, extended: &BitVector) -> bool {
        extended.len() >= self.degree() && self.remainder(extended).is_zero()
    }
}

impl fmt::Display for CrcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.poly)
    }
}

impl FromStr for CrcSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .unwrap_or(t);
        let poly = u64::from_str_radix(t, 16)
            .map_err(|e| Error::Parse(format!("bad CRC polynomial {s:?}: {e}")))?;
        CrcSpec::new(poly)
    }
}

pub fn crc_append(bits: &BitVector, spec: &CrcSpec) -> BitVector {
    spec.append(bits)
}

pub fn crc_check(extended: &BitVector, spec: &CrcSpec) -> bool {
    spec.check(extended)
}
