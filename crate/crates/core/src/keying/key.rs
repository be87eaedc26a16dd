use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::maps::MapMode;

/// Per-position map modes for the encrypted prefix, plus the public mode used
/// for every position after it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EncryptionKey {
    modes: Vec<MapMode>,
    tail: MapMode,
}

impl EncryptionKey {
    pub fn new(modes: Vec<MapMode>, tail: MapMode) -> Self {
        EncryptionKey { modes, tail }
    }

    /// Key with the conventional tail mode.
    pub fn from_modes(modes: Vec<MapMode>) -> Self {
        EncryptionKey::new(modes, MapMode::CONVENTIONAL)
    }

    /// Compression-only key: no encrypted prefix.
    pub fn empty() -> Self {
        EncryptionKey::from_modes(Vec::new())
    }

    pub fn modes(&self) -> &[MapMode] {
        &self.modes
    }

    pub fn tail(&self) -> MapMode {
        self.tail
    }

    /// Length of the encrypted prefix.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode governing message position `t` (0-based).
    pub fn mode_at(&self, t: usize) -> MapMode {
        self.modes.get(t).copied().unwrap_or(self.tail)
    }

    /// Packs the prefix at 3 bits per position, MSB first, storing `digit - 1`.
    pub fn pack(&self) -> Vec<u8> {
        let mut out = vec![0u8; (3 * self.modes.len()).div_ceil(8)];
        for (i, mode) in self.modes.iter().enumerate() {
            let v = mode.digit() - 1;
            for j in 0..3 {
                if v & (4 >> j) != 0 {
                    let pos = 3 * i + j;
                    out[pos / 8] |= 0x80 >> (pos % 8);
                }
            }
        }
        out
    }

    /// Inverse of [`EncryptionKey::pack`] for a prefix of `len` positions.
    pub fn unpack(bytes: &[u8], len: usize, tail: MapMode) -> Result<Self> {
        if bytes.len() * 8 < 3 * len {
            return Err(Error::Key(format!(
                "{} bytes cannot hold {len} packed positions",
                bytes.len()
            )));
        }
        let modes = (0..len)
            .map(|i| {
                let v = (0..3).fold(0u8, |acc, j| {
                    let pos = 3 * i + j;
                    (acc << 1) | ((bytes[pos / 8] >> (7 - pos % 8)) & 1)
                });
                MapMode::new(v + 1)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EncryptionKey::new(modes, tail))
    }

    /// One-line text form: `CACKEY v1 M=<m> tail=<d> key=<digits>`.
    pub fn to_key_file(&self) -> String {
        format!("CACKEY v1 M={} tail={} key={}\n", self.len(), self.tail, self)
    }

    pub fn from_key_file(text: &str) -> Result<Self> {
        let line = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .ok_or_else(|| Error::Key("empty key file".into()))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some("CACKEY") || fields.next() != Some("v1") {
            return Err(Error::Key(format!("not a v1 key line: {line:?}")));
        }
        let (mut m, mut tail, mut digits) = (None, None, None);
        for field in fields {
            match field.split_once('=') {
                Some(("M", v)) => m = v.parse::<usize>().ok(),
                Some(("tail", v)) => tail = v.parse::<u8>().ok(),
                Some(("key", v)) => digits = Some(v),
                _ => return Err(Error::Key(format!("unexpected field {field:?}"))),
            }
        }
        let m = m.ok_or_else(|| Error::Key("missing or bad M=".into()))?;
        let tail = MapMode::new(tail.ok_or_else(|| Error::Key("missing or bad tail=".into()))?)?;
        let key = parse_digits(digits.unwrap_or(""), tail)?;
        if key.len() != m {
            return Err(Error::Key(format!("M={m} but key has {} digits", key.len())));
        }
        Ok(key)
    }
}

fn parse_digits(s: &str, tail: MapMode) -> Result<EncryptionKey> {
    let modes = s
        .chars()
        .map(|c| {
            let d = c.to_digit(10).ok_or_else(|| Error::Key(format!("bad key digit {c:?}")))?;
            MapMode::new(d as u8)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncryptionKey::new(modes, tail))
}

impl fmt::Display for EncryptionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for mode in &self.modes {
            write!(f, "{mode}")?;
        }
        Ok(())
    }
}

/// Parses a digit string such as `136`; the tail is the conventional mode.
/// A non-default tail is written `136/5`.
impl FromStr for EncryptionKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('/') {
            Some((digits, tail)) => {
                let tail = tail.parse::<u8>().map_err(|_| Error::Key(format!("bad tail {tail:?}")))?;
                parse_digits(digits, MapMode::new(tail)?)
            }
            None => parse_digits(s, MapMode::CONVENTIONAL),
        }
    }
}

impl Serialize for EncryptionKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.tail == MapMode::CONVENTIONAL {
            serializer.collect_str(self)
        } else {
            serializer.collect_str(&format_args!("{self}/{}", self.tail))
        }
    }
}

impl<'de> Deserialize<'de> for EncryptionKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
