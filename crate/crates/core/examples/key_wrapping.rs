//! Sealing a per-user key before it goes on the wire.
//!
//! The bundled scheme is a test double with no secrecy; a real deployment
//! registers its own `WrapScheme`.

use chaotic_ac::keying::wrap::{unwrap_key, wrap_key, SchemeRegistry, WrappedKey};
use chaotic_ac::keying::{keygen, seed_from_u64};

fn main() -> chaotic_ac::Result<()> {
    let registry = SchemeRegistry::with_null_test();
    let scheme = registry.by_name("NULL-TEST").expect("bundled");
    let key = keygen(&seed_from_u64(3), 128);

    let wrapped = wrap_key(&key, "erin", b"erin", scheme);
    let blob = wrapped.to_blob();
    println!("key: {} bits, blob: {} bytes ({} bytes overhead)", WrappedKey::key_bits(key.len()), blob.len(), wrapped.overhead_bytes(key.len()));
    println!("packed key visible in blob: {}", blob.windows(key.pack().len()).any(|w| w == key.pack()));

    let back = unwrap_key(&WrappedKey::from_blob("erin", &blob)?, b"erin", &registry)?;
    println!("unwrapped matches: {}", back == key);

    let mut tampered = blob.clone();
    tampered[10] ^= 1;
    let err = unwrap_key(&WrappedKey::from_blob("erin", &tampered)?, b"erin", &registry).unwrap_err();
    println!("tampered blob: {err}");
    Ok(())
}
