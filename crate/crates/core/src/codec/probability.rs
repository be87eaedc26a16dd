use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `P('0')` quantized to sixteen fractional bits: `p = num / 65536`.
///
/// Both ends of a stream use this exact value, so every map parameter is a
/// dyadic rational and encoder and decoder can never disagree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Probability(u16);

impl Probability {
    pub const SCALE_BITS: u32 = 16;
    pub const SCALE: u32 = 1 << Self::SCALE_BITS;
    pub const HALF: Probability = Probability(1 << 15);

    pub fn from_num(num: u16) -> Result<Self> {
        if num == 0 {
            return Err(Error::Model("p_num must be in 1..=65535".into()));
        }
        Ok(Probability(num))
    }

    /// Rounds `p` to the nearest representable value, keeping it inside (0,1).
    pub fn from_f64(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Model(format!("p = {p} not in (0,1)")));
        }
        let num = (p * f64::from(Self::SCALE)).round().clamp(1.0, 65535.0);
        Ok(Probability(num as u16))
    }

    /// Rounds `num / den` to the nearest representable value.
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::Model(format!("p = {num}/{den} not in (0,1)")));
        }
        let scaled = (u128::from(num) * u128::from(Self::SCALE) + u128::from(den) / 2) / u128::from(den);
        Ok(Probability(scaled.clamp(1, 65535) as u16))
    }

    /// Measured frequency of '0' in `bits`; one half for an empty message.
    pub fn measured(bits: &[bool]) -> Self {
        let zeros = bits.iter().filter(|&&b| !b).count() as u64;
        if bits.is_empty() {
            return Self::HALF;
        }
        let total = bits.len() as u64;
        let scaled = (u128::from(zeros) * u128::from(Self::SCALE) + u128::from(total) / 2) / u128::from(total);
        Probability(scaled.clamp(1, 65535) as u16)
    }

    pub fn num(self) -> u16 {
        self.0
    }

    /// Numerator of `1 - p`.
    pub fn complement_num(self) -> u32 {
        Self::SCALE - u32::from(self.0)
    }

    /// Numerator of the width of `bit`'s interval.
    pub fn width_num(self, bit: bool) -> u32 {
        if bit {
            self.complement_num()
        } else {
            u32::from(self.0)
        }
    }

    pub fn to_ratio(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(Self::SCALE))
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / f64::from(Self::SCALE)
    }
}

impl TryFrom<u16> for Probability {
    type Error = Error;

    fn try_from(num: u16) -> Result<Self> {
        Probability::from_num(num)
    }
}

impl From<Probability> for u16 {
    fn from(p: Probability) -> u16 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/65536", self.0)
    }
}
