//! Reference coder in exact arithmetic.
//!
//! Encoding composes, in message order, the decode affine of each bit under the
//! mode keyed for its position: `F = T_1 ∘ T_2 ∘ ... ∘ T_N`. The message's
//! interval is `F([0,1))` and the codeword is a dyadic point strictly inside
//! it. Decoding runs the chaotic map forward from that point, reading one bit
//! per step from which interval the orbit is in.
//!
//! With `p = p_num / 2^16` every affine is dyadic, so the composition is kept
//! as a pair of integers over `2^(16N)` and built with a balanced product tree.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::codec::format::Codeword;
use crate::codec::Probability;
use crate::error::{Error, Result};
use crate::keying::EncryptionKey;
use crate::maps::{bcac_params, MapMode};

const SCALE_BITS: u64 = Probability::SCALE_BITS as u64;

/// Per-mode parameters as numerators over `2^16`.
#[derive(Clone, Debug)]
pub(crate) struct DyadicModes {
    // [mode - 1][bit] -> (slope, offset)
    decode: [[(i64, i64); 2]; 8],
    // [mode - 1][bit] -> [lo, hi)
    intervals: [[(i64, i64); 2]; 8],
}

impl DyadicModes {
    pub(crate) fn new(p: Probability) -> Self {
        let scale = BigRational::from_integer(BigInt::from(Probability::SCALE));
        let to_num = |r: &BigRational| -> i64 {
            let scaled = r * &scale;
            debug_assert!(scaled.is_integer());
            i64::try_from(scaled.to_integer()).expect("dyadic parameter fits in i64")
        };
        let mut decode = [[(0, 0); 2]; 8];
        let mut intervals = [[(0, 0); 2]; 8];
        let p = p.to_ratio();
        for mode in MapMode::ALL {
            let params = bcac_params(mode, &p).expect("quantized p lies in (0,1)");
            let i = usize::from(mode.digit() - 1);
            for bit in [false, true] {
                let affine = params.decode(bit);
                let (lo, hi) = params.interval(bit);
                decode[i][usize::from(bit)] = (to_num(&affine.slope), to_num(&affine.offset));
                intervals[i][usize::from(bit)] = (to_num(lo), to_num(hi));
            }
        }
        DyadicModes { decode, intervals }
    }

    pub(crate) fn decode(&self, mode: MapMode, bit: bool) -> (i64, i64) {
        self.decode[usize::from(mode.digit() - 1)][usize::from(bit)]
    }

    fn interval(&self, mode: MapMode, bit: bool) -> (i64, i64) {
        self.intervals[usize::from(mode.digit() - 1)][usize::from(bit)]
    }
}

/// The message's interval `(lo, hi)`, both over `2^scale_bits`. For a
/// nonempty message the codeword lies strictly between the endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalInterval {
    pub lo: BigUint,
    pub hi: BigUint,
    pub scale_bits: u64,
}

impl FinalInterval {
    pub fn width(&self) -> BigRational {
        self.to_ratio(&(&self.hi - &self.lo))
    }

    pub fn lo_ratio(&self) -> BigRational {
        self.to_ratio(&self.lo)
    }

    pub fn hi_ratio(&self) -> BigRational {
        self.to_ratio(&self.hi)
    }

    fn to_ratio(&self, v: &BigUint) -> BigRational {
        BigRational::new(BigInt::from(v.clone()), BigInt::one() << self.scale_bits)
    }

    /// `ceil(-log2(width))`.
    pub fn min_code_len(&self) -> u64 {
        let width = &self.hi - &self.lo;
        self.scale_bits - (width.bits() - 1)
    }

    /// Smallest `j / 2^len` strictly inside `(lo, hi)` with `len` no shorter
    /// than `ceil(-log2(width))`; the smallest such value at that length.
    pub fn codeword(&self) -> Vec<bool> {
        let start = self.min_code_len();
        for len in start..=start + 1 {
            let (j, fits) = if len <= self.scale_bits {
                let shift = self.scale_bits - len;
                let j = (&self.lo >> shift) + 1u32;
                let fits = (&j << shift) < self.hi;
                (j, fits)
            } else {
                let shift = len - self.scale_bits;
                let j = (&self.lo << shift) + 1u32;
                let fits = j < (&self.hi << shift);
                (j, fits)
            };
            if fits {
                return (0..len).rev().map(|i| j.bit(i)).collect();
            }
        }
        unreachable!("an open interval of width >= 2^-L holds a multiple of 2^-(L+1)")
    }
}

fn compose(maps: &[(i64, i64)]) -> (BigInt, BigInt) {
    match maps {
        [] => (BigInt::one(), BigInt::zero()),
        [(slope, offset)] => (BigInt::from(*slope), BigInt::from(*offset)),
        _ => {
            let (left, right) = maps.split_at(maps.len() / 2);
            let (a1, c1) = compose(left);
            let (a2, c2) = compose(right);
            let offset = &a1 * c2 + (c1 << (SCALE_BITS * right.len() as u64));
            (a1 * a2, offset)
        }
    }
}

pub(crate) fn check_key(n_bits: usize, key: &EncryptionKey) -> Result<()> {
    if key.len() > n_bits {
        return Err(Error::Key(format!(
            "key covers {} positions but the message has {n_bits} bits",
            key.len()
        )));
    }
    Ok(())
}

/// Exact interval of `bits` under `key`.
pub fn final_interval(bits: &[bool], p: Probability, key: &EncryptionKey) -> FinalInterval {
    let table = DyadicModes::new(p);
    let maps: Vec<(i64, i64)> = bits
        .iter()
        .enumerate()
        .map(|(t, &bit)| table.decode(key.mode_at(t), bit))
        .collect();
    let (slope, offset) = compose(&maps);
    let end = &slope + &offset;
    let (lo, hi) = if slope.is_negative() { (end, offset) } else { (offset, end) };
    FinalInterval {
        lo: lo.to_biguint().expect("interval lies in [0,1]"),
        hi: hi.to_biguint().expect("interval lies in [0,1]"),
        scale_bits: SCALE_BITS * bits.len() as u64,
    }
}

pub fn encode_exact(bits: &[bool], p: Probability, key: &EncryptionKey) -> Result<Codeword> {
    check_key(bits.len(), key)?;
    let payload = if bits.is_empty() {
        Vec::new()
    } else {
        final_interval(bits, p, key).codeword()
    };
    Ok(Codeword::new(p, key.len(), bits.len(), payload))
}

pub(crate) fn check_stream_key(cw: &Codeword, key: &EncryptionKey) -> Result<usize> {
    let header = cw.header();
    if key.len() as u64 != u64::from(header.m_len) {
        return Err(Error::Key(format!(
            "key covers {} positions, stream encrypts {}",
            key.len(),
            header.m_len
        )));
    }
    usize::try_from(header.n_bits).map_err(|_| Error::Format("n_bits too large".into()))
}

/// Iterates the map from the codeword point. Cost grows quadratically with
/// the message length; intended for reference use and moderate `N`.
pub fn decode_exact(cw: &Codeword, key: &EncryptionKey) -> Result<Vec<bool>> {
    let n_bits = check_stream_key(cw, key)?;
    let table = DyadicModes::new(cw.header().probability);

    // x = num / den, den > 0
    let payload = cw.payload();
    let mut num = payload
        .iter()
        .fold(BigInt::zero(), |acc, &b| (acc << 1u32) + u32::from(b));
    let mut den = BigInt::one() << payload.len();
    let mut out = Vec::with_capacity(n_bits);

    for t in 0..n_bits {
        let mode = key.mode_at(t);
        let scaled = &num << SCALE_BITS;
        let inside = |bit: bool| {
            let (lo, hi) = table.interval(mode, bit);
            scaled >= &den * lo && scaled < &den * hi
        };
        let bit = if inside(false) {
            false
        } else if inside(true) {
            true
        } else {
            return Err(Error::Decode { position: t, reason: "point outside both intervals".into() });
        };
        // y = (x - offset) / slope
        let (slope, offset) = table.decode(mode, bit);
        let mut next = scaled - &den * offset;
        if slope < 0 {
            next = -next;
        }
        den *= slope.unsigned_abs();
        if next.sign() == Sign::Minus || next >= den {
            return Err(Error::Decode { position: t, reason: "orbit left [0,1)".into() });
        }
        // keep the fraction from growing in powers of two
        let twos = next.trailing_zeros().unwrap_or(0).min(den.trailing_zeros().unwrap_or(0));
        num = next >> twos;
        den >>= twos;
        if num.is_zero() {
            den = BigInt::one();
        }
        out.push(bit);
    }
    Ok(out)
}

/// `(ceil(-log2 W), ceil(-log2 W) + 1)` for the width `W` of the message's
/// interval, which does not depend on the key.
pub fn code_length_bound(bits: &[bool], p: Probability) -> (u64, u64) {
    let ones = bits.iter().filter(|&&b| b).count() as u64;
    let zeros = bits.len() as u64 - ones;
    let width_num = BigUint::from(p.num()).pow(zeros as u32) * BigUint::from(p.complement_num()).pow(ones as u32);
    let lower = SCALE_BITS * bits.len() as u64 - (width_num.bits() - 1);
    (lower, lower + 1)
}
