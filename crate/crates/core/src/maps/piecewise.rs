//! N-ary piecewise-linear chaotic maps on `[0,1)`.
//!
//! A map is a row of linear pieces laid end to end. Piece `k` covers
//! `[beg_k, end_k)`, is stretched onto the whole of `[0,1)`, and is owned by
//! exactly one symbol whose probability equals the width of the piece. Any
//! permutation of the pieces combined with any choice of slope signs gives a
//! map with the same coding efficiency, which is where the key space comes from.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Probabilities of an N-symbol alphabet, held as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolModel {
    probs: Vec<BigRational>,
}

impl SymbolModel {
    pub fn new(probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidAlphabet(probs.len()));
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        for (i, p) in probs.iter().enumerate() {
            if *p <= zero || *p >= one {
                return Err(Error::Model(format!("probability of symbol {i} is {p}, not in (0,1)")));
            }
        }
        let total: BigRational = probs.iter().sum();
        if total != one {
            return Err(Error::Model(format!("probabilities sum to {total}, not 1")));
        }
        Ok(SymbolModel { probs })
    }

    /// Two-symbol model with `P('0') = p`.
    pub fn binary(p: BigRational) -> Result<Self> {
        let q = BigRational::one() - &p;
        SymbolModel::new(vec![p, q])
    }

    /// Empirical model `p_i = N_i / N` from symbol occurrence counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Model("no symbols counted".into()));
        }
        let probs = counts
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), BigInt::from(total)))
            .collect();
        SymbolModel::new(probs)
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Slope sign of a linear piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPiece {
    pub beg: BigRational,
    pub end: BigRational,
    pub orientation: Orientation,
    pub symbol: usize,
}

impl LinearPiece {
    pub fn width(&self) -> BigRational {
        &self.end - &self.beg
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.beg <= x && x < &self.end
    }

    /// Image of `x` under this piece. Not range-checked.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let t = (x - &self.beg) / self.width();
        match self.orientation {
            Orientation::Positive => t,
            Orientation::Negative => BigRational::one() - t,
        }
    }

    /// The affine `y -> slope*y + offset` that undoes [`LinearPiece::eval`],
    /// carrying `[0,1)` back onto the piece's domain.
    pub fn inverse_affine(&self) -> (BigRational, BigRational) {
        let w = self.width();
        match self.orientation {
            Orientation::Positive => (w, self.beg.clone()),
            Orientation::Negative => (-w, self.end.clone()),
        }
    }
}

/// One arrangement of the pieces: slot `k` holds the piece of symbol
/// `permutation[k]` with slope sign `orientations[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaryMapSpec {
    model: SymbolModel,
    permutation: Vec<usize>,
    orientations: Vec<Orientation>,
}

impl NaryMapSpec {
    pub fn new(
        model: SymbolModel,
        permutation: Vec<usize>,
        orientations: Vec<Orientation>,
    ) -> Result<Self> {
        let n = model.len();
        if permutation.len() != n || orientations.len() != n {
            return Err(Error::Model(format!(
                "arrangement covers {} slots with {} orientations, alphabet has {n}",
                permutation.len(),
                orientations.len()
            )));
        }
        let mut seen = vec![false; n];
        for &s in &permutation {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::Model(format!("{permutation:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(NaryMapSpec { model, permutation, orientations })
    }

    /// Symbols in natural order, all slopes positive: the conventional
    /// arithmetic-coding layout.
    pub fn identity(model: SymbolModel) -> Self {
        let n = model.len();
        NaryMapSpec {
            model,
            permutation: (0..n).collect(),
            orientations: vec![Orientation::Positive; n],
        }
    }

    pub fn model(&self) -> &SymbolModel {
        &self.model
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }
}

/// Number of distinct maps for an alphabet of `n` symbols: `n! * 2^n`.
pub fn keyspace_size(alphabet_size: usize) -> Result<BigUint> {
    if alphabet_size < 2 {
        return Err(Error::InvalidAlphabet(alphabet_size));
    }
    let factorial: BigUint = (1..=alphabet_size as u64).map(BigUint::from).product();
    Ok(factorial << alphabet_size)
}

/// Bits needed to name one map: `ceil(log2(n! * 2^n))`.
pub fn key_bits(alphabet_size: usize) -> Result<u64> {
    let size = keyspace_size(alphabet_size)?;
    let bits = size.bits();
    // size >= 8, so bits >= 4
    let is_pow2 = size.trailing_zeros() == Some(bits - 1);
    Ok(if is_pow2 { bits - 1 } else { bits })
}

pub fn build_nary_map(spec: &NaryMapSpec) -> Result<Vec<LinearPiece>> {
    let probs = spec.model.probs();
    let total: BigRational = probs.iter().sum();
    if !total.is_one() {
        return Err(Error::Model(format!("probabilities sum to {total}, not 1")));
    }
    let mut beg = BigRational::zero();
    let pieces = spec
        .permutation
        .iter()
        .zip(&spec.orientations)
        .map(|(&symbol, &orientation)| {
            let end = &beg + &probs[symbol];
            let piece = LinearPiece { beg: beg.clone(), end: end.clone(), orientation, symbol };
            beg = end;
            piece
        })
        .collect();
    Ok(pieces)
}

/// One step of the map: the symbol owning `x` and the image point.
///
/// The image lies in `[0,1]`; it reaches 1 only at the left edge of a
/// negatively sloped piece.
pub fn map_forward(pieces: &[LinearPiece], x: &BigRational) -> Result<(usize, BigRational)> {
    if x.is_negative() || *x >= BigRational::one() {
        return Err(Error::Domain(x.to_string()));
    }
    let piece = pieces
        .iter()
        .find(|piece| piece.contains(x))
        .ok_or_else(|| Error::Domain(format!("{x} is not covered by any piece")))?;
    Ok((piece.symbol, piece.eval(x)))
}
