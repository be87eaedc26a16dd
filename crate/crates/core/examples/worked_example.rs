//! Three bits, three keyed positions: the smallest multicast session.

use chaotic_ac::codec::bits::{bit_string, parse_bit_str};
use chaotic_ac::codec::{decode_exact, encode_exact, final_interval, Coder, Probability};
use chaotic_ac::keying::{derive_pool, pool_math, EncryptionKey};
use chaotic_ac::sim::brute_force_valid_keys;

fn main() -> chaotic_ac::Result<()> {
    let message = parse_bit_str("001")?;
    let key: EncryptionKey = "136".parse()?;
    let p = Probability::HALF;

    let interval = final_interval(&message, p, &key);
    let cw = encode_exact(&message, p, &key)?;
    println!(
        "'001' under key 136 at p=1/2: interval ({}, {}), codeword {}",
        interval.lo_ratio(),
        interval.hi_ratio(),
        bit_string(cw.payload())
    );

    let pool = derive_pool(&key, &message)?;
    println!("\n{}", pool_math(pool.len()));
    for member in pool.enumerate()? {
        println!("  {member} -> {}", bit_string(&decode_exact(&cw, &member)?));
    }

    let valid = brute_force_valid_keys(&cw, &message, 3, Coder::Exact, key.tail())?;
    println!("\nexhaustive sweep: {} of 512 keys reproduce '001' from this codeword", valid.len());
    Ok(())
}
