//! Codeword container.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CAC1"
//!      4     1  version (1)
//!      5     2  p_num, u16 LE, p = p_num / 65536
//!      7     4  m_len, u32 LE, encrypted prefix length
//!     11     8  n_bits, u64 LE, message length
//!     19     8  payload_len_bits, u64 LE
//!     27     -  payload, MSB first, final byte zero-padded
//! ```

use std::path::Path;

use crate::codec::bits::{bits_from_bytes, bits_to_bytes};
use crate::codec::Probability;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CAC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub probability: Probability,
    pub m_len: u32,
    pub n_bits: u64,
    pub payload_len_bits: u64,
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = self.version;
        out[5..7].copy_from_slice(&self.probability.num().to_le_bytes());
        out[7..11].copy_from_slice(&self.m_len.to_le_bytes());
        out[11..19].copy_from_slice(&self.n_bits.to_le_bytes());
        out[19..27].copy_from_slice(&self.payload_len_bits.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("truncated header: {} bytes", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = bytes[4];
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let le = |r: std::ops::Range<usize>| {
            let mut buf = [0u8; 8];
            buf[..r.len()].copy_from_slice(&bytes[r]);
            u64::from_le_bytes(buf)
        };
        let probability = Probability::from_num(le(5..7) as u16)
            .map_err(|_| Error::Format("p_num is zero".into()))?;
        let header = StreamHeader {
            version,
            probability,
            m_len: le(7..11) as u32,
            n_bits: le(11..19),
            payload_len_bits: le(19..27),
        };
        if u64::from(header.m_len) > header.n_bits {
            return Err(Error::Format(format!(
                "m_len {} exceeds n_bits {}",
                header.m_len, header.n_bits
            )));
        }
        Ok(header)
    }
}

/// A header plus its payload bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    header: StreamHeader,
    payload: Vec<bool>,
}

impl Codeword {
    pub fn new(probability: Probability, m_len: usize, n_bits: usize, payload: Vec<bool>) -> Self {
        let header = StreamHeader {
            version: VERSION,
            probability,
            m_len: m_len as u32,
            n_bits: n_bits as u64,
            payload_len_bits: payload.len() as u64,
        };
        Codeword { header, payload }
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn payload(&self) -> &[bool] {
        &self.payload
    }

    pub fn payload_len(&self) -> usize {
        self.payload.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.to_bytes().to_vec();
        out.extend(bits_to_bytes(&self.payload));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = StreamHeader::from_bytes(bytes)?;
        let body = &bytes[HEADER_LEN..];
        let need = header.payload_len_bits.div_ceil(8);
        if (body.len() as u64) < need {
            return Err(Error::Format(format!(
                "truncated payload: {} of {need} bytes",
                body.len()
            )));
        }
        if body.len() as u64 > need {
            return Err(Error::Format(format!("{} trailing bytes", body.len() as u64 - need)));
        }
        let mut payload = bits_from_bytes(body);
        let len = header.payload_len_bits as usize;
        if payload[len..].iter().any(|&b| b) {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        payload.truncate(len);
        Ok(Codeword { header, payload })
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Codeword::from_bytes(&std::fs::read(path)?)
    }
}
