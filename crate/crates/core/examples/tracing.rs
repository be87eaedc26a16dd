//! Issue keys from a pool, leak one, mix two, and see what the ledger says.

use chaotic_ac::keying::{derive_pool, keygen, sample_user_key, seed_from_u64, trace_key, KeyLedger};
use chaotic_ac::sim::{collude, derive_seed, random_message, run_trace_experiment, SimConfig};
use chaotic_ac::codec::Probability;

fn main() -> chaotic_ac::Result<()> {
    let seed = seed_from_u64(7);
    let m = 12;
    let message = random_message(&derive_seed(&seed, "message", 0), 64, Probability::HALF);
    let pool = derive_pool(&keygen(&seed, m), &message[..m])?;

    let mut ledger = KeyLedger::new("demo");
    for (i, user) in ["ana", "ben", "cy", "dee"].iter().enumerate() {
        let key = sample_user_key(&pool, user, &mut ledger, &derive_seed(&seed, "user", i as u64))?;
        println!("{user:>4} <- {key}");
    }

    let leaked = ledger.key_of("ben").unwrap().clone();
    println!("\nleak of {leaked}: {:?}", trace_key(&leaked, &ledger, &pool));
    let mix = collude(
        &[ledger.key_of("ana").unwrap().clone(), ledger.key_of("cy").unwrap().clone()],
        &seed,
    )?;
    println!("mix of ana and cy {mix}: {:?}", trace_key(&mix, &ledger, &pool));
    println!("random key: {:?}", trace_key(&keygen(&seed_from_u64(99), m), &ledger, &pool));

    for k in [0, 2, 3] {
        let s = run_trace_experiment(&SimConfig { users: 6, n: 64, m: 8, collude_k: k, seed, ..SimConfig::default() })?;
        println!(
            "\nK={k}: {} traced to a leaker, {} to an innocent holding the same key, {} suspected, {} misattributed",
            s.attributed_to_leaker, s.innocent_exact_match, s.collusion_suspected, s.misattributed
        );
    }
    Ok(())
}
