//! Acceptance criteria, one test each. Every test prints a single
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them all).

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use chaotic_ac::codec::bits::parse_bit_str;
use chaotic_ac::codec::{
    code_length_bound, decode_exact, decode_stream, encode_exact, encode_stream, final_interval, Coder,
    Probability,
};
use chaotic_ac::keying::{derive_pool, pool_math, EncryptionKey};
use chaotic_ac::maps::{bcac_params, keyspace_size, MapMode};
use chaotic_ac::sim::{brute_force_valid_keys, run_trace_experiment, simulate_multicast, SimConfig};

fn report(id: u32, title: &str, pass: bool, detail: &str, started: Instant) {
    println!(
        "[{}] criterion {id:>2} {title}: {detail} ({:.2?})",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed()
    );
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn random_key(rng: &mut impl Rng, m: usize) -> EncryptionKey {
    let modes = (0..m).map(|_| MapMode::new(rng.gen_range(1..=8)).unwrap()).collect();
    EncryptionKey::new(modes, MapMode::new(rng.gen_range(1..=8)).unwrap())
}

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.gen()).collect()
}

#[test]
fn criterion_01_keyspace_counts() {
    let t = Instant::now();
    let k2 = keyspace_size(2).unwrap();
    let k4 = keyspace_size(4).unwrap();
    let pass = k2 == BigUint::from(8u32) && k4 == BigUint::from(384u32);
    report(1, "keyspace counts", pass, &format!("N=2 -> {k2}, N=4 -> {k4}"), t);
    assert!(pass);
}

#[test]
fn criterion_02_mode_table_fidelity() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ps = [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(3, 10)];
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for p in &ps {
        let q = BigRational::one() - p;
        for mode in MapMode::ALL {
            let params = bcac_params(mode, p).unwrap();
            for (bit, width) in [(false, p), (true, &q)] {
                let (lo, hi) = params.interval(bit);
                if &(hi - lo) != width {
                    failures.push(format!("p={p} mode {mode} bit {bit}: width {}", hi - lo));
                }
            }
            for _ in 0..1000 {
                let den: i64 = rng.gen_range(1..=1_000_000);
                let y = ratio(rng.gen_range(0..den), den);
                for bit in [false, true] {
                    let x = params.decode(bit).apply(&y);
                    checks += 1;
                    if params.forward(&x) != y || params.symbol_at(&x) != Some(bit) {
                        failures.push(format!("p={p} mode {mode} bit {bit} y={y}"));
                    }
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{checks} inverse-law checks and 64 interval widths exact")
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    report(2, "mode table fidelity", pass, &detail, t);
    assert!(pass);
}

#[test]
fn criterion_03_worked_pool() {
    let t = Instant::now();
    let key: EncryptionKey = "136".parse().unwrap();
    let bits = parse_bit_str("001").unwrap();
    let pool = derive_pool(&key, &bits).unwrap();
    let members: BTreeSet<String> = pool.enumerate().unwrap().iter().map(ToString::to_string).collect();
    let expected: BTreeSet<String> =
        ["245", "246", "235", "236", "135", "136", "145", "146"].iter().map(|s| s.to_string()).collect();
    let mut bad = Vec::new();
    for p_num in [16384u16, 32768, 49152] {
        let p = Probability::from_num(p_num).unwrap();
        let exact = encode_exact(&bits, p, &key).unwrap();
        let stream = encode_stream(&bits, p, &key, 32).unwrap();
        for member in pool.enumerate().unwrap() {
            if decode_exact(&exact, &member).unwrap() != bits || decode_stream(&stream, &member, 32).unwrap() != bits {
                bad.push(format!("p_num={p_num} key {member}"));
            }
        }
    }
    let pass = members == expected && bad.is_empty();
    report(
        3,
        "worked example pool",
        pass,
        &format!("pool {members:?}; {} decode failures over p in 1/4,1/2,3/4", bad.len()),
        t,
    );
    assert!(pass, "{bad:?}");
}

#[test]
fn criterion_04_brute_force_m3() {
    let t = Instant::now();
    let key: EncryptionKey = "136".parse().unwrap();
    let bits = parse_bit_str("001").unwrap();
    let pool = derive_pool(&key, &bits).unwrap().enumerate().unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for p_num in [16384u16, 32768, 49152] {
        let p = Probability::from_num(p_num).unwrap();
        let cw = encode_exact(&bits, p, &key).unwrap();
        let valid = brute_force_valid_keys(&cw, &bits, 3, Coder::Exact, key.tail()).unwrap();
        let contained = pool.iter().all(|k| valid.contains(k));
        pass &= contained && valid.len() >= 8;
        details.push(format!("p_num={p_num}: {} of 512 valid", valid.len()));
    }
    report(4, "brute force at M=3", pass, &details.join(", "), t);
    assert!(pass);
}

#[test]
fn criterion_05_pool_math() {
    let t = Instant::now();
    let m = pool_math(128);
    let one = BigUint::one();
    let pass = m.valid == &one << 128usize
        && m.total == &one << 384usize
        && m.guess_prob == BigRational::new(BigInt::one(), BigInt::one() << 256usize);
    report(5, "pool math at M=128", pass, &m.to_string(), t);
    assert!(pass);
}

/// Messages of exactly `zeros` '0' bits in random positions.
fn message_with_zeros(rng: &mut impl Rng, n: usize, zeros: usize) -> Vec<bool> {
    let mut bits = vec![true; n];
    for i in rand::seq::index::sample(rng, n, zeros) {
        bits[i] = false;
    }
    bits
}

#[test]
fn criterion_06_compression_rate() {
    let t = Instant::now();
    const N: usize = 100_000;
    const ZEROS: usize = 90_000;
    let p = Probability::from_f64(0.9).unwrap();
    let messages: Vec<Vec<bool>> = (0..100u64)
        .map(|s| message_with_zeros(&mut ChaCha8Rng::seed_from_u64(600 + s), N, ZEROS))
        .collect();
    // Independent of the coder: -log2 W from the counts in floating point.
    let p0 = f64::from(p.num()) / 65536.0;
    let info = -(ZEROS as f64 * p0.log2() + (N - ZEROS) as f64 * (1.0 - p0).log2());
    let oracle_lower = info.ceil() as u64;

    let results: Vec<(usize, usize, (u64, u64))> = messages
        .par_iter()
        .map(|bits| {
            let key = EncryptionKey::from_modes(vec![]);
            let exact = encode_exact(bits, p, &key).unwrap().payload_len();
            let stream = encode_stream(bits, p, &key, 32).unwrap().payload_len();
            (exact, stream, code_length_bound(bits, p))
        })
        .collect();
    let total_symbols = (results.len() * N) as f64;
    let exact_rate = results.iter().map(|r| r.0 as f64).sum::<f64>() / total_symbols;
    let stream_rate = results.iter().map(|r| r.1 as f64).sum::<f64>() / total_symbols;
    let in_bound = results.iter().all(|&(e, _, (lo, hi))| lo <= e as u64 && e as u64 <= hi);
    let oracle_ok = results.iter().all(|r| r.2 .0 == oracle_lower);
    let pass = (0.4690..=0.4790).contains(&exact_rate) && in_bound && oracle_ok;
    report(
        6,
        "compression rate",
        pass,
        &format!(
            "mean rate {exact_rate:.6} (stream coder {stream_rate:.6}), bound {oracle_lower}..={} bits, all within bound: {in_bound}",
            oracle_lower + 1
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_07_key_invariance() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_spread = 0;
    let mut widths_equal = true;
    for _ in 0..50 {
        let bits = random_bits(&mut rng, 64);
        let p = Probability::from_num(rng.gen_range(1..=65535)).unwrap();
        let keys: Vec<EncryptionKey> = (0..20).map(|_| random_key(&mut rng, 64)).collect();
        let width = final_interval(&bits, p, &keys[0]).width();
        let mut lens = Vec::new();
        for key in &keys {
            widths_equal &= final_interval(&bits, p, key).width() == width;
            lens.push(encode_exact(&bits, p, key).unwrap().payload_len());
        }
        worst_spread = worst_spread.max(lens.iter().max().unwrap() - lens.iter().min().unwrap());
    }
    let pass = widths_equal && worst_spread <= 1;
    report(
        7,
        "key invariance",
        pass,
        &format!("widths identical: {widths_equal}, widest length spread {worst_spread} bit(s)"),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_08_coder_equivalence() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<(Vec<bool>, Probability, EncryptionKey, u32)> = (0..1000)
        .map(|i| {
            let n = rng.gen_range(0..=64);
            let bits = random_bits(&mut rng, n);
            let p = Probability::from_num(rng.gen_range(1..=65535)).unwrap();
            let m = rng.gen_range(0..=n);
            (bits, p, random_key(&mut rng, m), [16, 32, 48][i % 3])
        })
        .collect();
    let outcomes: Vec<[bool; 4]> = cases
        .par_iter()
        .map(|(bits, p, key, precision)| {
            let stream = encode_stream(bits, *p, key, *precision).unwrap();
            let exact = encode_exact(bits, *p, key).unwrap();
            [
                decode_stream(&stream, key, *precision).unwrap() == *bits,
                decode_exact(&stream, key).is_ok_and(|d| d == *bits),
                decode_stream(&exact, key, *precision).is_ok_and(|d| d == *bits),
                stream.payload_len() <= exact.payload_len() + 2,
            ]
        })
        .collect();
    let count = |i: usize| outcomes.iter().filter(|o| o[i]).count();
    let (roundtrip, exact_reads_stream, stream_reads_exact, length) = (count(0), count(1), count(2), count(3));
    let pass = outcomes.iter().all(|o| o.iter().all(|&b| b));
    report(
        8,
        "coder equivalence",
        pass,
        &format!(
            "stream roundtrip {roundtrip}/1000, exact decodes stream {exact_reads_stream}/1000, \
             stream decodes exact {stream_reads_exact}/1000, length within +2 {length}/1000"
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_09_multicast() {
    let t = Instant::now();
    let cfg = SimConfig {
        users: 100,
        n: 10_000,
        m: 128,
        p: Probability::from_f64(0.9).unwrap(),
        seed: chaotic_ac::keying::seed_from_u64(9),
        ..SimConfig::default()
    };
    let r = simulate_multicast(&cfg).unwrap();
    let pass = r.identical_ciphertext && r.successes == 100 && r.key_bits_per_user == 384 && r.total_key_bits == 38_400;
    report(
        9,
        "multicast end to end",
        pass,
        &format!(
            "{}/100 decoded, one ciphertext {} (sha256 {}..), {} key bits per user + {} bytes wrapping, rate {:.4}",
            r.successes,
            r.ciphertext_bytes,
            &r.ciphertext_sha256[..12],
            r.key_bits_per_user,
            r.key_overhead_bytes_per_user,
            r.rate
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_10_tracing() {
    let t = Instant::now();
    let base = SimConfig {
        users: 100,
        n: 1024,
        m: 128,
        seed: chaotic_ac::keying::seed_from_u64(10),
        ..SimConfig::default()
    };
    let single = run_trace_experiment(&SimConfig { collude_k: 0, ..base.clone() }).unwrap();
    let mixed = run_trace_experiment(&SimConfig { collude_k: 2, ..base.clone() }).unwrap();
    let small = run_trace_experiment(&SimConfig { users: 4, m: 8, collude_k: 2, ..base }).unwrap();
    let pass = single.attributed_to_leaker == 100
        && single.trials == 100
        && [&single, &mixed, &small].iter().all(|s| s.misattributed == 0)
        && mixed.attributed_to_leaker + mixed.collusion_suspected + mixed.innocent_exact_match == mixed.trials
        && [&single, &mixed, &small].iter().all(|s| s.non_pool_unknown == s.non_pool_trials)
        && !single.raw_keys_on_wire;
    report(
        10,
        "tracing",
        pass,
        &format!(
            "single leaks {}/100 attributed; K=2 at M=128: {} suspected, {} matched a colluder; \
             K=2 at M=8 with 4 users: {} suspected, {} matched a colluder, {} matched an innocent's identical key; \
             misattributions 0; non-pool leaks all unknown",
            single.attributed_to_leaker,
            mixed.collusion_suspected,
            mixed.attributed_to_leaker,
            small.collusion_suspected,
            small.attributed_to_leaker,
            small.innocent_exact_match
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn empty_message_interval_is_unit() {
    let fi = final_interval(&[], Probability::HALF, &EncryptionKey::empty());
    assert_eq!(fi.width(), BigRational::one());
    assert!(fi.lo_ratio().is_zero());
}
