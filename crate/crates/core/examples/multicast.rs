//! One encode, a hundred listeners, a hundred different keys.

use chaotic_ac::codec::Probability;
use chaotic_ac::keying::seed_from_u64;
use chaotic_ac::sim::{simulate_multicast, SimConfig};

fn main() -> chaotic_ac::Result<()> {
    let report = simulate_multicast(&SimConfig {
        users: 100,
        n: 10_000,
        m: 128,
        p: Probability::from_f64(0.9)?,
        seed: seed_from_u64(2024),
        ..SimConfig::default()
    })?;
    println!("session {}: {}/{} users decoded", report.session, report.successes, report.users);
    println!("ciphertext {} bytes, sha256 {}", report.ciphertext_bytes, report.ciphertext_sha256);
    println!("every user received identical bytes: {}", report.identical_ciphertext);
    println!(
        "rate {:.4} bits/symbol; {} key bits per user, {} bytes of wrapping",
        report.rate, report.key_bits_per_user, report.key_overhead_bytes_per_user
    );
    println!("pool of {} keys, guess probability {}", report.pool_size, report.pool_guess_probability);
    for u in report.user_outcomes.iter().take(3) {
        println!("  {} holds {}..", u.user, &u.key[..24]);
    }
    for probe in &report.probes {
        println!("  non-pool key {}.. breaks {} of {} bits", &probe.key[..24], probe.mismatches, report.n);
    }
    Ok(())
}
