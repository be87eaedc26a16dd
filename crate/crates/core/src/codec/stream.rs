//! Fixed-precision coder with bit-at-a-time renormalization.
//!
//! `low..=high` is the current interval in `P`-bit registers. A negatively
//! sloped decode affine reverses the orientation of everything composed after
//! it; the coder tracks that parity and places each sub-interval from the top
//! of the register range while it is set. Renormalization is the usual
//! three-way scaling: emit 0, emit 1, or defer an underflow bit.

use crate::codec::exact::{check_key, check_stream_key};
use crate::codec::format::Codeword;
use crate::codec::Probability;
use crate::error::{Error, Result};
use crate::keying::EncryptionKey;
use crate::maps::MapMode;

pub const DEFAULT_PRECISION: u32 = 32;
pub const MIN_PRECISION: u32 = 16;
pub const MAX_PRECISION: u32 = 62;

fn check_precision(precision: u32) -> Result<()> {
    if (MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "precision {precision} outside {MIN_PRECISION}..={MAX_PRECISION}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scale {
    /// Interval in the lower half.
    Low,
    /// Interval in the upper half.
    High,
    /// Interval straddles the midpoint inside the middle half.
    Middle,
}

#[derive(Clone, Debug)]
struct Registers {
    precision: u32,
    low: u64,
    high: u64,
    reversed: bool,
    p: Probability,
}

impl Registers {
    fn new(precision: u32, p: Probability) -> Self {
        Registers { precision, low: 0, high: (1u64 << precision) - 1, reversed: false, p }
    }

    fn half(&self) -> u64 {
        1 << (self.precision - 1)
    }

    fn quarter(&self) -> u64 {
        1 << (self.precision - 2)
    }

    /// Integer size of the bottom part `[0, K)` of the unit interval, where
    /// `K` is the width of whichever symbol sits at the bottom in `mode`.
    /// The rarer symbol's share is rounded up so it never loses range; the
    /// common symbol gives up at most one register unit.
    fn split(&self, mode: MapMode) -> u64 {
        let range = self.high - self.low + 1;
        let rare_bit = self.p.width_num(true) < self.p.width_num(false);
        let k = u128::from(self.p.width_num(rare_bit));
        let rare = (u128::from(range) * k).div_ceil(1 << Probability::SCALE_BITS) as u64;
        let rare = rare.clamp(1, range - 1);
        let bottom_bit = !mode.zero_is_lower();
        if bottom_bit == rare_bit {
            rare
        } else {
            range - rare
        }
    }

    /// Whether register value `value` falls in the bottom part for a split `q`.
    fn in_bottom(&self, value: u64, q: u64) -> bool {
        if self.reversed {
            value > self.high - q
        } else {
            value < self.low + q
        }
    }

    fn narrow(&mut self, mode: MapMode, bit: bool, q: u64) {
        let bottom = bit != mode.zero_is_lower();
        match (bottom, self.reversed) {
            (true, false) => self.high = self.low + q - 1,
            (false, false) => self.low += q,
            (true, true) => self.low = self.high - q + 1,
            (false, true) => self.high -= q,
        }
        self.reversed ^= mode.decode_slope_negative(bit);
    }

    fn renorm_step(&mut self) -> Option<Scale> {
        let (half, quarter) = (self.half(), self.quarter());
        let scale = if self.high < half {
            Scale::Low
        } else if self.low >= half {
            self.low -= half;
            self.high -= half;
            Scale::High
        } else if self.low >= quarter && self.high < half + quarter {
            self.low -= quarter;
            self.high -= quarter;
            Scale::Middle
        } else {
            return None;
        };
        self.low <<= 1;
        self.high = (self.high << 1) | 1;
        Some(scale)
    }
}

/// Streaming encoder over a bit sink held in memory.
#[derive(Clone, Debug)]
pub struct StreamEncoder {
    regs: Registers,
    pending: u64,
    encoded: bool,
    out: Vec<bool>,
}

impl StreamEncoder {
    pub fn new(p: Probability, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        Ok(StreamEncoder { regs: Registers::new(precision, p), pending: 0, encoded: false, out: Vec::new() })
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    pub fn encode(&mut self, bit: bool, mode: MapMode) {
        self.encoded = true;
        let q = self.regs.split(mode);
        self.regs.narrow(mode, bit, q);
        while let Some(scale) = self.regs.renorm_step() {
            match scale {
                Scale::Low => self.emit(false),
                Scale::High => self.emit(true),
                Scale::Middle => self.pending += 1,
            }
        }
    }

    /// Appends the fewest bits that pin a point strictly inside the final
    /// interval, given that the decoder reads zeros past the end. `low` is an
    /// endpoint of some intermediate interval, open under a negative slope, so
    /// it is never used. Nothing is appended if nothing was encoded.
    pub fn finish(mut self) -> Vec<bool> {
        if !self.encoded {
            return self.out;
        }
        let precision = self.regs.precision;
        let min_len = u32::from(self.pending > 0);
        let start = u128::from(self.regs.low) + 1;
        for len in min_len..=precision {
            let unit = 1u128 << (precision - len);
            let point = start.div_ceil(unit) * unit;
            if point <= u128::from(self.regs.high) {
                for i in 0..len {
                    let bit = (point >> (precision - 1 - i)) & 1 == 1;
                    if i == 0 {
                        self.emit(bit);
                    } else {
                        self.out.push(bit);
                    }
                }
                return self.out;
            }
        }
        unreachable!("the interval spans at least a quarter of the register range")
    }
}

/// Streaming decoder reading from a payload slice.
#[derive(Clone, Debug)]
pub struct StreamDecoder<'a> {
    regs: Registers,
    value: u64,
    payload: &'a [bool],
    pos: usize,
}

impl<'a> StreamDecoder<'a> {
    pub fn new(payload: &'a [bool], p: Probability, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        let mut dec = StreamDecoder { regs: Registers::new(precision, p), value: 0, payload, pos: 0 };
        for _ in 0..precision {
            dec.value = (dec.value << 1) | u64::from(dec.next_bit());
        }
        Ok(dec)
    }

    fn next_bit(&mut self) -> bool {
        let bit = self.payload.get(self.pos).copied().unwrap_or(false);
        self.pos += 1;
        bit
    }

    pub fn decode(&mut self, mode: MapMode) -> bool {
        let q = self.regs.split(mode);
        let bottom = self.regs.in_bottom(self.value, q);
        let bit = bottom != mode.zero_is_lower();
        self.regs.narrow(mode, bit, q);
        while let Some(scale) = self.regs.renorm_step() {
            match scale {
                Scale::Low => {}
                Scale::High => self.value -= self.regs.half(),
                Scale::Middle => self.value -= self.regs.quarter(),
            }
            self.value = (self.value << 1) | u64::from(self.next_bit());
        }
        bit
    }
}

pub fn encode_stream(
    bits: &[bool],
    p: Probability,
    key: &EncryptionKey,
    precision: u32,
) -> Result<Codeword> {
    check_key(bits.len(), key)?;
    let mut enc = StreamEncoder::new(p, precision)?;
    for (t, &bit) in bits.iter().enumerate() {
        enc.encode(bit, key.mode_at(t));
    }
    Ok(Codeword::new(p, key.len(), bits.len(), enc.finish()))
}

pub fn decode_stream(cw: &Codeword, key: &EncryptionKey, precision: u32) -> Result<Vec<bool>> {
    let n_bits = check_stream_key(cw, key)?;
    let mut dec = StreamDecoder::new(cw.payload(), cw.header().probability, precision)?;
    Ok((0..n_bits).map(|t| dec.decode(key.mode_at(t))).collect())
}
