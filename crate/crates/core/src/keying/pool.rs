//! Multicast key pools.
//!
//! For each encrypted position, the mode the encoder used and its twin for the
//! plaintext bit at that position both decode the stream correctly. The pool
//! is the product of those pairs: `2^M` keys out of `8^M`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::keying::EncryptionKey;
use crate::maps::{twin_mode, MapMode};

/// Largest prefix that [`KeyPoolSpec::enumerate`] will list.
pub const MAX_ENUMERATE: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPoolSpec {
    pairs: Vec<(MapMode, MapMode)>,
    tail: MapMode,
}

impl KeyPoolSpec {
    pub fn pairs(&self) -> &[(MapMode, MapMode)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn tail(&self) -> MapMode {
        self.tail
    }

    /// `2^M`.
    pub fn size(&self) -> BigUint {
        BigUint::one() << self.pairs.len()
    }

    pub fn original(&self) -> EncryptionKey {
        EncryptionKey::new(self.pairs.iter().map(|&(o, _)| o).collect(), self.tail)
    }

    /// Member selected by a flip pattern: bit `t` of `pattern` (LSB = position
    /// 0) picks the twin at position `t`.
    pub fn member(&self, pattern: &BigUint) -> EncryptionKey {
        let modes = self
            .pairs
            .iter()
            .enumerate()
            .map(|(t, &(orig, twin))| if pattern.bit(t as u64) { twin } else { orig })
            .collect();
        EncryptionKey::new(modes, self.tail)
    }

    /// Flip pattern of a member, or `None` if `key` is not in the pool.
    pub fn pattern_of(&self, key: &EncryptionKey) -> Option<BigUint> {
        if key.len() != self.pairs.len() || key.tail() != self.tail {
            return None;
        }
        let mut pattern = BigUint::zero();
        for (t, (&mode, &(orig, twin))) in key.modes().iter().zip(&self.pairs).enumerate() {
            if mode == twin {
                pattern.set_bit(t as u64, true);
            } else if mode != orig {
                return None;
            }
        }
        Some(pattern)
    }

    /// All members in digit-string order. Refused above [`MAX_ENUMERATE`] positions.
    pub fn enumerate(&self) -> Result<Vec<EncryptionKey>> {
        if self.pairs.len() > MAX_ENUMERATE {
            return Err(Error::Capacity(format!(
                "refusing to enumerate 2^{} keys (limit 2^{MAX_ENUMERATE})",
                self.pairs.len()
            )));
        }
        let count = 1u64 << self.pairs.len();
        let set: BTreeSet<EncryptionKey> =
            (0..count).map(|i| self.member(&BigUint::from(i))).collect();
        Ok(set.into_iter().collect())
    }

    /// Members whose digits all come from `modes`: `prod |pair ∩ modes|`.
    pub fn count_within(&self, modes: &ModeSet) -> BigUint {
        self.pairs
            .iter()
            .map(|&(o, t)| BigUint::from(u32::from(modes.contains(o)) + u32::from(modes.contains(t))))
            .product()
    }
}

/// Pairs each key digit with its twin for the plaintext bit at that position.
pub fn derive_pool(key: &EncryptionKey, plaintext_prefix: &[bool]) -> Result<KeyPoolSpec> {
    if key.len() != plaintext_prefix.len() {
        return Err(Error::Key(format!(
            "key covers {} positions, prefix has {} bits",
            key.len(),
            plaintext_prefix.len()
        )));
    }
    let pairs = key
        .modes()
        .iter()
        .zip(plaintext_prefix)
        .map(|(&mode, &bit)| (mode, twin_mode(mode, bit)))
        .collect();
    Ok(KeyPoolSpec { pairs, tail: key.tail() })
}

pub fn is_pool_member(pool: &KeyPoolSpec, key: &EncryptionKey) -> bool {
    pool.pattern_of(key).is_some()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolMath {
    pub valid: BigUint,
    pub total: BigUint,
    pub guess_prob: BigRational,
}

impl PoolMath {
    /// `-log2(guess_prob)` when it is a power of two.
    pub fn guess_bits(&self) -> Option<u64> {
        let (n, d) = (self.guess_prob.numer(), self.guess_prob.denom());
        if n.is_one() && d.trailing_zeros() == Some(d.bits() - 1) {
            Some(d.bits() - 1)
        } else {
            None
        }
    }
}

impl fmt::Display for PoolMath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} valid keys of {}", self.valid, self.total)?;
        match self.guess_bits() {
            Some(0) => write!(f, ", guess probability 1"),
            Some(b) => write!(f, ", guess probability 2^-{b}"),
            None => write!(f, ", guess probability {}", self.guess_prob),
        }
    }
}

/// Pool size, key space and chance that a uniform guess lands in the pool.
pub fn pool_math(m: usize) -> PoolMath {
    restricted_pool_math(m, 8)
}

/// Pool size against a key space of `base^M`, as for keys drawn from a
/// restricted mode set of `base` modes.
pub fn restricted_pool_math(m: usize, base: u32) -> PoolMath {
    let valid = BigUint::one() << m;
    let total = BigUint::from(base).pow(m as u32);
    let guess_prob = BigRational::new(BigInt::from(valid.clone()), BigInt::from(total.clone()));
    PoolMath { valid, total, guess_prob }
}

/// Set of map modes a key generator may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const ALL: ModeSet = ModeSet(0xff);

    /// The two modes with positive slopes that swap the '0' and '1' intervals:
    /// keyed interval swapping only.
    pub const INTERVAL_SWAP: ModeSet = ModeSet(0b0001_0001);

    pub fn new(modes: &[MapMode]) -> Result<Self> {
        let mask = modes.iter().fold(0u8, |m, mode| m | (1 << (mode.digit() - 1)));
        if mask == 0 {
            return Err(Error::Config("mode set is empty".into()));
        }
        Ok(ModeSet(mask))
    }

    /// Parses a comma-separated digit list such as `1,5`.
    pub fn parse(s: &str) -> Result<Self> {
        let modes = s
            .split(',')
            .map(str::trim)
            .filter(|d| !d.is_empty())
            .map(|d| {
                d.parse::<u8>()
                    .map_err(|_| Error::Config(format!("bad mode {d:?}")))
                    .and_then(|d| MapMode::new(d).map_err(|e| Error::Config(e.to_string())))
            })
            .collect::<Result<Vec<_>>>()?;
        ModeSet::new(&modes)
    }

    pub fn contains(self, mode: MapMode) -> bool {
        self.0 & (1 << (mode.digit() - 1)) != 0
    }

    pub fn modes(self) -> Vec<MapMode> {
        MapMode::ALL.into_iter().filter(|&m| self.contains(m)).collect()
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl Default for ModeSet {
    fn default() -> Self {
        ModeSet::ALL
    }
}

pub type Seed = [u8; 32];

/// Expands 3M bits of ChaCha20 output into M mode digits.
pub fn keygen(seed: &Seed, m: usize) -> EncryptionKey {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let mut bytes = vec![0u8; (3 * m).div_ceil(8)];
    rng.fill(&mut bytes[..]);
    EncryptionKey::unpack(&bytes, m, MapMode::CONVENTIONAL).expect("buffer sized for m digits")
}

/// Like [`keygen`], but every digit is drawn uniformly from `modes`.
pub fn keygen_restricted(seed: &Seed, m: usize, modes: &ModeSet) -> EncryptionKey {
    if *modes == ModeSet::ALL {
        return keygen(seed, m);
    }
    let choices = modes.modes();
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let digits = (0..m).map(|_| choices[rng.gen_range(0..choices.len())]).collect();
    EncryptionKey::from_modes(digits)
}

/// A 256-bit seed from a 64-bit integer, little-endian in the first 8 bytes.
pub fn seed_from_u64(v: u64) -> Seed {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&v.to_le_bytes());
    seed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::bits::parse_bit_str;

    fn key(s: &str) -> EncryptionKey {
        s.parse().unwrap()
    }

    fn worked_pool() -> KeyPoolSpec {
        derive_pool(&key("136"), &parse_bit_str("001").unwrap()).unwrap()
    }

    #[test]
    fn worked_example_pairs_and_members() {
        let pool = worked_pool();
        let digits: Vec<(u8, u8)> = pool.pairs().iter().map(|(a, b)| (a.digit(), b.digit())).collect();
        assert_eq!(digits, vec![(1, 2), (3, 4), (6, 5)]);
        let members: Vec<String> = pool.enumerate().unwrap().iter().map(|k| k.to_string()).collect();
        assert_eq!(members, vec!["135", "136", "145", "146", "235", "236", "245", "246"]);
        assert_eq!(pool.size(), BigUint::from(8u32));
    }

    #[test]
    fn membership() {
        let pool = worked_pool();
        assert!(is_pool_member(&pool, &key("135")));
        assert!(is_pool_member(&pool, &key("136")));
        assert!(!is_pool_member(&pool, &key("333")));
        assert!(!is_pool_member(&pool, &key("13")));
        assert!(!is_pool_member(&pool, &key("136/5")));
        assert_eq!(pool.pattern_of(&key("245")), Some(BigUint::from(0b111u32)));
    }

    #[test]
    fn empty_prefix_pool() {
        let pool = derive_pool(&EncryptionKey::empty(), &[]).unwrap();
        assert_eq!(pool.enumerate().unwrap(), vec![EncryptionKey::empty()]);
        assert!(derive_pool(&key("1"), &[]).is_err());
    }

    #[test]
    fn pool_counts() {
        let m3 = pool_math(3);
        assert_eq!(m3.valid, BigUint::from(8u32));
        assert_eq!(m3.total, BigUint::from(512u32));
        assert_eq!(m3.guess_bits(), Some(6));
        let m0 = pool_math(0);
        assert_eq!((m0.valid.clone(), m0.total.clone()), (BigUint::one(), BigUint::one()));
        assert!(m0.guess_prob.is_one());
        let m128 = pool_math(128);
        assert_eq!(m128.valid, BigUint::one() << 128);
        assert_eq!(m128.total, BigUint::one() << 384);
        assert_eq!(m128.guess_bits(), Some(256));
        let rbac = restricted_pool_math(4, ModeSet::INTERVAL_SWAP.len());
        assert_eq!(rbac.total, BigUint::from(16u32));
        assert_eq!(rbac.valid, BigUint::from(16u32));
    }

    #[test]
    fn interval_swap_modes_hold_no_twin_pairs() {
        let pool = derive_pool(&key("1515"), &parse_bit_str("0110").unwrap()).unwrap();
        assert_eq!(pool.count_within(&ModeSet::INTERVAL_SWAP), BigUint::one());
        assert_eq!(pool.count_within(&ModeSet::ALL), BigUint::from(16u32));
    }

    #[test]
    fn enumerate_limit() {
        let k = EncryptionKey::from_modes(vec![MapMode::CONVENTIONAL; 17]);
        let pool = derive_pool(&k, &[false; 17]).unwrap();
        assert!(matches!(pool.enumerate(), Err(Error::Capacity(_))));
    }

    #[test]
    fn keygen_is_deterministic() {
        let s0 = seed_from_u64(0);
        assert_eq!(keygen(&s0, 3), keygen(&s0, 3));
        assert!(keygen(&s0, 0).is_empty());
        // a longer key extends the shorter one: both read the same bit stream
        assert!(keygen(&s0, 16).to_string().starts_with(&keygen(&s0, 5).to_string()));
    }

    #[test]
    fn restricted_keygen_draws_from_subset() {
        let set = ModeSet::parse("1,5").unwrap();
        for s in 0..50 {
            let k = keygen_restricted(&seed_from_u64(s), 4, &set);
            assert!(k.modes().iter().all(|&m| set.contains(m)), "{k}");
        }
        assert_eq!(keygen_restricted(&seed_from_u64(3), 9, &ModeSet::ALL), keygen(&seed_from_u64(3), 9));
        assert!(ModeSet::parse("").is_err());
        assert!(ModeSet::parse("0,1").is_err());
        assert_eq!(ModeSet::parse("1,5").unwrap(), ModeSet::INTERVAL_SWAP);
    }
}
