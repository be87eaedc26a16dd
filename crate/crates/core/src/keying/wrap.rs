//! Key wrapping for distribution.
//!
//! Each user's key is sealed to that user before it goes on the wire. Real
//! public-key encryption is plugged in through [`WrapScheme`]; this crate only
//! ships [`NullTestScheme`], a keyed scrambler whose "public" and "secret"
//! inputs are the same string. It exists to exercise the plumbing and offers
//! no confidentiality.
//!
//! Blob layout: scheme id (1 byte), ciphertext length (u32 LE), ciphertext.
//! The sealed plaintext is `M` (u32 LE), the tail digit (1 byte), then the
//! 3-bit packed prefix.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::keying::EncryptionKey;
use crate::maps::MapMode;

pub trait WrapScheme: Send + Sync {
    fn id(&self) -> u8;
    fn name(&self) -> &'static str;
    fn seal(&self, recipient_public: &[u8], plaintext: &[u8]) -> Vec<u8>;
    fn open(&self, recipient_secret: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>>;
}

/// Test double. NOT encryption: anyone who knows the recipient id can open it.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullTestScheme;

impl NullTestScheme {
    pub const ID: u8 = 0x00;
    pub const NAME: &'static str = "NULL-TEST";
    const TAG_LEN: usize = 8;

    fn pad(identity: &[u8], len: usize) -> Vec<u8> {
        (0u32..)
            .flat_map(|block| {
                Sha256::new()
                    .chain_update(Self::NAME)
                    .chain_update(identity)
                    .chain_update(block.to_le_bytes())
                    .finalize()
            })
            .take(len)
            .collect()
    }

    fn tag(identity: &[u8], plaintext: &[u8]) -> [u8; Self::TAG_LEN] {
        let digest = Sha256::new()
            .chain_update(b"NULL-TEST tag")
            .chain_update(identity)
            .chain_update(plaintext)
            .finalize();
        let mut tag = [0u8; Self::TAG_LEN];
        tag.copy_from_slice(&digest[..Self::TAG_LEN]);
        tag
    }
}

impl WrapScheme for NullTestScheme {
    fn id(&self) -> u8 {
        Self::ID
    }

    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn seal(&self, recipient_public: &[u8], plaintext: &[u8]) -> Vec<u8> {
        let mut out: Vec<u8> = plaintext
            .iter()
            .zip(Self::pad(recipient_public, plaintext.len()))
            .map(|(a, b)| a ^ b)
            .collect();
        out.extend(Self::tag(recipient_public, plaintext));
        out
    }

    fn open(&self, recipient_secret: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>> {
        let body_len = ciphertext.len().checked_sub(Self::TAG_LEN).ok_or(Error::Authentication)?;
        let (body, tag) = ciphertext.split_at(body_len);
        let plaintext: Vec<u8> = body
            .iter()
            .zip(Self::pad(recipient_secret, body.len()))
            .map(|(a, b)| a ^ b)
            .collect();
        if Self::tag(recipient_secret, &plaintext) != tag {
            return Err(Error::Authentication);
        }
        Ok(plaintext)
    }
}

/// Schemes available for wrapping and unwrapping, looked up by id byte.
pub struct SchemeRegistry {
    schemes: Vec<Box<dyn WrapScheme>>,
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        SchemeRegistry { schemes: Vec::new() }
    }

    /// Registry holding only the test double.
    pub fn with_null_test() -> Self {
        let mut r = SchemeRegistry::empty();
        r.register(Box::new(NullTestScheme));
        r
    }

    pub fn register(&mut self, scheme: Box<dyn WrapScheme>) {
        self.schemes.retain(|s| s.id() != scheme.id());
        self.schemes.push(scheme);
    }

    pub fn get(&self, id: u8) -> Result<&dyn WrapScheme> {
        self.schemes
            .iter()
            .find(|s| s.id() == id)
            .map(|s| s.as_ref())
            .ok_or(Error::UnknownScheme(id))
    }

    pub fn by_name(&self, name: &str) -> Option<&dyn WrapScheme> {
        self.schemes.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrappedKey {
    pub recipient: String,
    pub scheme: u8,
    pub ciphertext: Vec<u8>,
}

/// Bytes of framing around the packed prefix in the sealed plaintext.
pub const KEY_FRAME_BYTES: usize = 5;

fn key_plaintext(key: &EncryptionKey) -> Vec<u8> {
    let mut out = (key.len() as u32).to_le_bytes().to_vec();
    out.push(key.tail().digit());
    out.extend(key.pack());
    out
}

fn key_from_plaintext(bytes: &[u8]) -> Result<EncryptionKey> {
    if bytes.len() < KEY_FRAME_BYTES {
        return Err(Error::Format("sealed key too short".into()));
    }
    let m = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    let tail = MapMode::new(bytes[4])?;
    let packed = &bytes[KEY_FRAME_BYTES..];
    if packed.len() != (3 * m).div_ceil(8) {
        return Err(Error::Format(format!("sealed key length does not match M={m}")));
    }
    EncryptionKey::unpack(packed, m, tail)
}

impl WrappedKey {
    /// Bits of key material inside: 3 per encrypted position.
    pub fn key_bits(m: usize) -> usize {
        3 * m
    }

    pub fn to_blob(&self) -> Vec<u8> {
        let mut out = vec![self.scheme];
        out.extend((self.ciphertext.len() as u32).to_le_bytes());
        out.extend(&self.ciphertext);
        out
    }

    pub fn from_blob(recipient: impl Into<String>, blob: &[u8]) -> Result<Self> {
        if blob.len() < 5 {
            return Err(Error::Format("wrapped key blob too short".into()));
        }
        let len = u32::from_le_bytes(blob[1..5].try_into().expect("4 bytes")) as usize;
        if blob.len() != 5 + len {
            return Err(Error::Format(format!(
                "wrapped key blob declares {len} ciphertext bytes, carries {}",
                blob.len() - 5
            )));
        }
        Ok(WrappedKey { recipient: recipient.into(), scheme: blob[0], ciphertext: blob[5..].to_vec() })
    }

    /// Blob size beyond the packed 3M-bit prefix; constant for a scheme.
    pub fn overhead_bytes(&self, m: usize) -> usize {
        self.to_blob().len() - (3 * m).div_ceil(8)
    }
}

pub fn wrap_key(
    key: &EncryptionKey,
    recipient: &str,
    recipient_public: &[u8],
    scheme: &dyn WrapScheme,
) -> WrappedKey {
    WrappedKey {
        recipient: recipient.to_owned(),
        scheme: scheme.id(),
        ciphertext: scheme.seal(recipient_public, &key_plaintext(key)),
    }
}

pub fn unwrap_key(
    wrapped: &WrappedKey,
    recipient_secret: &[u8],
    registry: &SchemeRegistry,
) -> Result<EncryptionKey> {
    let scheme = registry.get(wrapped.scheme)?;
    key_from_plaintext(&scheme.open(recipient_secret, &wrapped.ciphertext)?)
}
