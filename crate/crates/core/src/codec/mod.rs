//! Binary chaotic arithmetic coding.
//!
//! Two coders share one container format: an exact reference coder over
//! dyadic rationals and a fixed-precision streaming coder. Every position of
//! the message is coded with the map mode the key assigns to it.

pub mod bits;
mod exact;
mod format;
mod probability;
mod stream;

pub use exact::{code_length_bound, decode_exact, encode_exact, final_interval, FinalInterval};
pub use format::{Codeword, StreamHeader, HEADER_LEN, MAGIC, VERSION};
pub use probability::Probability;
pub use stream::{
    decode_stream, encode_stream, StreamDecoder, StreamEncoder, DEFAULT_PRECISION, MAX_PRECISION,
    MIN_PRECISION,
};

use crate::error::Result;
use crate::keying::EncryptionKey;

/// Which coder produced, or should read, a codeword.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coder {
    Exact,
    Stream { precision: u32 },
}

impl Default for Coder {
    fn default() -> Self {
        Coder::Stream { precision: DEFAULT_PRECISION }
    }
}

impl Coder {
    pub fn encode(self, bits: &[bool], p: Probability, key: &EncryptionKey) -> Result<Codeword> {
        match self {
            Coder::Exact => encode_exact(bits, p, key),
            Coder::Stream { precision } => encode_stream(bits, p, key, precision),
        }
    }

    pub fn decode(self, cw: &Codeword, key: &EncryptionKey) -> Result<Vec<bool>> {
        match self {
            Coder::Exact => decode_exact(cw, key),
            Coder::Stream { precision } => decode_stream(cw, key, precision),
        }
    }
}
