//! The eight skewed binary maps.
//!
//! With two symbols there are `2! * 2^2 = 8` ways to arrange the pieces. Each
//! arrangement is a [`MapMode`] numbered 1 through 8. Modes 1-4 put the '0'
//! interval `[0,p)` at the bottom, modes 5-8 put it at the top `[1-p,1)`.
//!
//! For a fixed bit value, modes come in pairs that share both the decode affine
//! and the symbol interval for that bit. Encoding a bit with either member of
//! the pair gives the same interval, so either member decodes it.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the eight binary map arrangements, as a digit 1-8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct MapMode(u8);

impl MapMode {
    pub const ALL: [MapMode; 8] = [
        MapMode(1),
        MapMode(2),
        MapMode(3),
        MapMode(4),
        MapMode(5),
        MapMode(6),
        MapMode(7),
        MapMode(8),
    ];

    /// Conventional arithmetic coding: '0' low, '1' high, both slopes positive.
    pub const CONVENTIONAL: MapMode = MapMode(1);

    pub fn new(digit: u8) -> Result<Self> {
        if (1..=8).contains(&digit) {
            Ok(MapMode(digit))
        } else {
            Err(Error::Key(format!("mode digit {digit} outside 1..=8")))
        }
    }

    pub fn digit(self) -> u8 {
        self.0
    }

    /// Whether the '0' interval sits at the bottom of `[0,1)`.
    pub fn zero_is_lower(self) -> bool {
        self.0 <= 4
    }

    /// Slope sign of the decode affine for `bit`.
    pub fn decode_slope_negative(self, bit: bool) -> bool {
        const ZERO_NEG: [bool; 8] = [false, false, true, true, false, true, true, false];
        const ONE_NEG: [bool; 8] = [false, true, true, false, false, false, true, true];
        let i = usize::from(self.0 - 1);
        if bit {
            ONE_NEG[i]
        } else {
            ZERO_NEG[i]
        }
    }
}

impl TryFrom<u8> for MapMode {
    type Error = Error;

    fn try_from(digit: u8) -> Result<Self> {
        MapMode::new(digit)
    }
}

impl From<MapMode> for u8 {
    fn from(mode: MapMode) -> u8 {
        mode.0
    }
}

impl fmt::Display for MapMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `y -> slope * y + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub slope: BigRational,
    pub offset: BigRational,
}

impl Affine {
    fn new(slope: BigRational, offset: BigRational) -> Self {
        Affine { slope, offset }
    }

    pub fn apply(&self, y: &BigRational) -> BigRational {
        &self.slope * y + &self.offset
    }
}

/// Closed-form parameters of one mode at a given `p = P('0')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BcacParams {
    pub mode: MapMode,
    /// Carries `[0,1)` onto the '0' interval.
    pub decode_zero: Affine,
    /// Carries `[0,1)` onto the '1' interval.
    pub decode_one: Affine,
    /// Map branch for `x <= threshold`.
    pub forward_lower: Affine,
    /// Map branch for `x > threshold`.
    pub forward_upper: Affine,
    pub zero_interval: (BigRational, BigRational),
    pub one_interval: (BigRational, BigRational),
    pub threshold: BigRational,
}

impl BcacParams {
    pub fn decode(&self, bit: bool) -> &Affine {
        if bit {
            &self.decode_one
        } else {
            &self.decode_zero
        }
    }

    pub fn interval(&self, bit: bool) -> &(BigRational, BigRational) {
        if bit {
            &self.one_interval
        } else {
            &self.zero_interval
        }
    }

    /// Half-open interval membership: the bit whose `[lo,hi)` holds `x`.
    pub fn symbol_at(&self, x: &BigRational) -> Option<bool> {
        let inside = |(lo, hi): &(BigRational, BigRational)| lo <= x && x < hi;
        if inside(&self.zero_interval) {
            Some(false)
        } else if inside(&self.one_interval) {
            Some(true)
        } else {
            None
        }
    }

    /// One step of the map, choosing the branch by `x <= threshold`.
    pub fn forward(&self, x: &BigRational) -> BigRational {
        if *x <= self.threshold {
            self.forward_lower.apply(x)
        } else {
            self.forward_upper.apply(x)
        }
    }

    /// The branch whose domain is the interval of `bit`.
    pub fn forward_for(&self, bit: bool) -> &Affine {
        if bit != self.mode.zero_is_lower() {
            &self.forward_lower
        } else {
            &self.forward_upper
        }
    }
}

/// Parameters of `mode` with `p = P('0')` substituted.
pub fn bcac_params(mode: MapMode, p: &BigRational) -> Result<BcacParams> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if *p <= zero || *p >= one {
        return Err(Error::Model(format!("p = {p} not in (0,1)")));
    }
    let q = &one - p;
    let r = |n: i64| BigRational::from_integer(BigInt::from(n));
    let inv_p = p.recip();
    let inv_q = q.recip();
    let a = |m: &BigRational, b: &BigRational| Affine::new(m.clone(), b.clone());

    // (decode '0', decode '1', forward lower, forward upper)
    let (d0, d1, fl, fu) = match mode.digit() {
        1 => (a(p, &zero), a(&q, p), a(&inv_p, &zero), a(&inv_q, &(-p / &q))),
        2 => (a(p, &zero), a(&-&q, &one), a(&inv_p, &zero), a(&-&inv_q, &inv_q)),
        3 => (a(&-p, p), a(&-&q, &one), a(&-&inv_p, &one), a(&-&inv_q, &inv_q)),
        4 => (a(&-p, p), a(&q, p), a(&-&inv_p, &one), a(&inv_q, &(-p / &q))),
        5 => (a(p, &q), a(&q, &zero), a(&inv_q, &zero), a(&inv_p, &(-&q / p))),
        6 => (a(&-p, &one), a(&q, &zero), a(&inv_q, &zero), a(&-&inv_p, &inv_p)),
        7 => (a(&-p, &one), a(&-&q, &q), a(&-&inv_q, &r(1)), a(&-&inv_p, &inv_p)),
        8 => (a(p, &q), a(&-&q, &q), a(&-&inv_q, &r(1)), a(&inv_p, &(-&q / p))),
        _ => unreachable!("MapMode holds 1..=8"),
    };
    let (zero_interval, one_interval, threshold) = if mode.zero_is_lower() {
        ((zero.clone(), p.clone()), (p.clone(), one.clone()), p.clone())
    } else {
        ((q.clone(), one.clone()), (zero.clone(), q.clone()), q.clone())
    };
    debug_assert_eq!(d0.slope.is_negative(), mode.decode_slope_negative(false));
    debug_assert_eq!(d1.slope.is_negative(), mode.decode_slope_negative(true));
    Ok(BcacParams {
        mode,
        decode_zero: d0,
        decode_one: d1,
        forward_lower: fl,
        forward_upper: fu,
        zero_interval,
        one_interval,
        threshold,
    })
}

// Pairs sharing a decode affine: for '0' {1,2} {3,4} {5,8} {6,7};
// for '1' {1,4} {2,3} {5,6} {7,8}.
const TWIN_ZERO: [u8; 8] = [2, 1, 4, 3, 8, 7, 6, 5];
const TWIN_ONE: [u8; 8] = [4, 3, 2, 1, 6, 5, 8, 7];

/// The other mode that encodes `bit` to the same interval as `mode`.
pub fn twin_mode(mode: MapMode, bit: bool) -> MapMode {
    let table = if bit { &TWIN_ONE } else { &TWIN_ZERO };
    MapMode(table[usize::from(mode.0 - 1)])
}
