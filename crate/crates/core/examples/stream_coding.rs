//! Exact and fixed-precision coders side by side on a skewed source.
//!
//! `cargo run --release --example stream_coding -- [N] [p]`

use std::time::Instant;

use chaotic_ac::codec::{code_length_bound, decode_stream, encode_exact, encode_stream, Probability};
use chaotic_ac::keying::{keygen, seed_from_u64};
use chaotic_ac::sim::{derive_seed, random_message};

fn main() -> chaotic_ac::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let p = Probability::from_f64(args.next().and_then(|s| s.parse().ok()).unwrap_or(0.9))?;
    let seed = seed_from_u64(1);
    let message = random_message(&derive_seed(&seed, "message", 0), n, p);
    let key = keygen(&seed, 128.min(n));
    let (lo, hi) = code_length_bound(&message, p);
    let h = {
        let q = p.to_f64();
        -(q * q.log2() + (1.0 - q) * (1.0 - q).log2())
    };
    println!("N={n}, p={:.4}, entropy {:.4} bits/symbol, length bound {lo}..={hi}", p.to_f64(), h);

    let t = Instant::now();
    let exact = encode_exact(&message, p, &key)?;
    println!("exact         {:>8} bits  rate {:.4}  {:>8.1?}", exact.payload_len(), exact.payload_len() as f64 / n as f64, t.elapsed());
    for precision in [16, 32, 48, 62] {
        let t = Instant::now();
        let cw = encode_stream(&message, p, &key, precision)?;
        let elapsed = t.elapsed();
        assert_eq!(decode_stream(&cw, &key, precision)?, message);
        println!(
            "stream P={precision:<3} {:>8} bits  rate {:.4}  {:>8.1?}",
            cw.payload_len(),
            cw.payload_len() as f64 / n as f64,
            elapsed
        );
    }
    Ok(())
}
