//! In-process multicast: one encoded stream, many users, one pool key each.
//!
//! The "wire" is a list of byte frames. The codeword is broadcast once; each
//! user's key goes out as its own unicast frame, wrapped or raw. Users rebuild
//! everything they need from the frames they receive.

use std::collections::HashSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codec::{code_length_bound, Codeword, Coder, Probability};
use crate::error::{Error, Result};
use crate::keying::wrap::{unwrap_key, wrap_key, NullTestScheme, SchemeRegistry, WrappedKey};
use crate::keying::{
    derive_pool, is_pool_member, keygen, keygen_restricted, pool_math, sample_user_key, trace_key,
    EncryptionKey, KeyLedger, KeyPoolSpec, ModeSet, Seed, TraceOutcome,
};
use crate::maps::MapMode;

/// Largest prefix [`brute_force_valid_keys`] will sweep (8^4 = 4096 decodes).
pub const MAX_BRUTE_FORCE_M: usize = 4;

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub users: usize,
    pub n: usize,
    pub m: usize,
    pub p: Probability,
    pub seed: Seed,
    /// Modes the session key is drawn from.
    pub modes: ModeSet,
    /// Colluders per leak in the tracing experiment; 0 or 1 leaks an issued key.
    pub collude_k: usize,
    pub coder: Coder,
    pub wrap: bool,
    /// Plaintext; drawn from `p` and `seed` when absent.
    pub message: Option<Vec<bool>>,
    /// Session key; drawn from `modes` and `seed` when absent.
    pub key: Option<EncryptionKey>,
    /// Non-pool keys tried against the stream.
    pub probes: usize,
    pub trials: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            users: 8,
            n: 1024,
            m: 16,
            p: Probability::from_num(58982).expect("nonzero"),
            seed: [0; 32],
            modes: ModeSet::ALL,
            collude_k: 0,
            coder: Coder::default(),
            wrap: true,
            message: None,
            key: None,
            probes: 4,
            trials: DEFAULT_TRIALS,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m > self.n {
            return Err(Error::Config(format!("prefix M={} exceeds message length N={}", self.m, self.n)));
        }
        if BigUint::from(self.users) > BigUint::from(1u8) << self.m {
            return Err(Error::Capacity(format!("{} users exceed the 2^{} pool", self.users, self.m)));
        }
        if let Some(msg) = &self.message {
            if msg.len() != self.n {
                return Err(Error::Config(format!("message has {} bits, N={}", msg.len(), self.n)));
            }
        }
        if let Some(key) = &self.key {
            if key.len() != self.m {
                return Err(Error::Key(format!("key covers {} positions, M={}", key.len(), self.m)));
            }
        }
        if self.collude_k > self.users {
            return Err(Error::Config(format!("{} colluders among {} users", self.collude_k, self.users)));
        }
        Ok(())
    }
}

/// Independent stream for one purpose within a run.
pub fn derive_seed(seed: &Seed, label: &str, index: u64) -> Seed {
    Sha256::new()
        .chain_update(seed)
        .chain_update(label)
        .chain_update(index.to_le_bytes())
        .finalize()
        .into()
}

/// `n` iid bits with `P(0) = p` exactly.
pub fn random_message(seed: &Seed, n: usize, p: Probability) -> Vec<bool> {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    (0..n).map(|_| u32::from(rng.gen::<u16>()) >= u32::from(p.num())).collect()
}

#[derive(Clone, Debug)]
pub enum Frame {
    Broadcast(Vec<u8>),
    Unicast { to: String, bytes: Vec<u8> },
}

#[derive(Clone, Debug, Default)]
pub struct Wire {
    frames: Vec<Frame>,
}

impl Wire {
    pub fn broadcast(&mut self, bytes: Vec<u8>) {
        self.frames.push(Frame::Broadcast(bytes));
    }

    pub fn unicast(&mut self, to: &str, bytes: Vec<u8>) {
        self.frames.push(Frame::Unicast { to: to.to_owned(), bytes });
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Every frame `user` would receive, in order.
    pub fn received_by<'a>(&'a self, user: &'a str) -> impl Iterator<Item = &'a [u8]> + 'a {
        self.frames.iter().filter_map(move |f| match f {
            Frame::Broadcast(b) => Some(b.as_slice()),
            Frame::Unicast { to, bytes } if to == user => Some(bytes.as_slice()),
            Frame::Unicast { .. } => None,
        })
    }

    pub fn contains(&self, needle: &[u8]) -> bool {
        !needle.is_empty()
            && self.frames.iter().any(|f| {
                let bytes = match f {
                    Frame::Broadcast(b) => b,
                    Frame::Unicast { bytes, .. } => bytes,
                };
                bytes.windows(needle.len()).any(|w| w == needle)
            })
    }
}

/// Unwrapped key frame: `M` (u32 LE), tail digit, packed prefix.
fn raw_key_frame(key: &EncryptionKey) -> Vec<u8> {
    let mut out = (key.len() as u32).to_le_bytes().to_vec();
    out.push(key.tail().digit());
    out.extend(key.pack());
    out
}

fn key_from_raw_frame(bytes: &[u8]) -> Result<EncryptionKey> {
    if bytes.len() < 5 {
        return Err(Error::Format("key frame too short".into()));
    }
    let m = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    EncryptionKey::unpack(&bytes[5..], m, MapMode::new(bytes[4])?)
}

/// Everything fixed before anything is decoded: plaintext, session key, pool,
/// ledger, and the key frames on the wire.
#[derive(Debug)]
pub struct Session {
    pub config: SimConfig,
    pub message: Vec<bool>,
    pub key: EncryptionKey,
    pub pool: KeyPoolSpec,
    pub ledger: KeyLedger,
    pub wire: Wire,
}

impl Session {
    pub fn setup(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let message = match &cfg.message {
            Some(m) => m.clone(),
            None => random_message(&derive_seed(&cfg.seed, "message", 0), cfg.n, cfg.p),
        };
        let key = match &cfg.key {
            Some(k) => k.clone(),
            None => keygen_restricted(&derive_seed(&cfg.seed, "key", 0), cfg.m, &cfg.modes),
        };
        let pool = derive_pool(&key, &message[..cfg.m])?;
        let mut ledger = KeyLedger::new(format!("sim-{}", hex::encode(&cfg.seed[..8])));
        let mut wire = Wire::default();
        for u in 0..cfg.users {
            let user = user_name(u);
            let issued = sample_user_key(&pool, &user, &mut ledger, &derive_seed(&cfg.seed, "user", u as u64))?;
            let frame = if cfg.wrap {
                wrap_key(&issued, &user, user.as_bytes(), &NullTestScheme).to_blob()
            } else {
                raw_key_frame(&issued)
            };
            wire.unicast(&user, frame);
        }
        Ok(Session { config: cfg.clone(), message, key, pool, ledger, wire })
    }

    /// Whether any issued key's serialized form appears verbatim on the wire.
    pub fn raw_keys_on_wire(&self) -> bool {
        self.ledger.entries().iter().any(|e| self.wire.contains(&raw_key_frame(&e.key)))
    }

    fn user_key(&self, user: &str, registry: &SchemeRegistry) -> Result<EncryptionKey> {
        let frame = self
            .wire
            .received_by(user)
            .next()
            .ok_or_else(|| Error::Key(format!("no key frame for {user}")))?;
        if self.config.wrap {
            unwrap_key(&WrappedKey::from_blob(user, frame)?, user.as_bytes(), registry)
        } else {
            key_from_raw_frame(frame)
        }
    }
}

fn user_name(u: usize) -> String {
    format!("user-{u:04}")
}

#[derive(Clone, Debug, Serialize)]
pub struct UserOutcome {
    pub user: String,
    pub key: String,
    pub ciphertext_hash_ok: bool,
    pub decoded_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeOutcome {
    pub key: String,
    pub mismatches: usize,
    /// Up to the first 16 mismatching positions.
    pub first_mismatches: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteForceReport {
    pub keys_tried: usize,
    pub valid_count: usize,
    pub pool_size: usize,
    pub pool_contained: bool,
    pub valid: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceSummary {
    pub trials: usize,
    pub collude_k: usize,
    /// Leak attributed to the user who leaked it (or, for a mix, to a colluder).
    pub attributed_to_leaker: usize,
    /// Mix equal to an innocent user's issued key, so attributed to them.
    pub innocent_exact_match: usize,
    /// Attribution to a user whose key differs from the leak. Always 0.
    pub misattributed: usize,
    pub collusion_suspected: usize,
    pub unknown: usize,
    pub non_pool_trials: usize,
    pub non_pool_unknown: usize,
    pub raw_keys_on_wire: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub session: String,
    pub users: usize,
    pub n: usize,
    pub m: usize,
    pub p_num: u16,
    pub coder: Coder,
    pub wrapped: bool,
    pub session_key: String,
    pub ciphertext_bytes: usize,
    pub payload_bits: usize,
    pub rate: f64,
    pub length_bound: (u64, u64),
    pub ciphertext_sha256: String,
    pub identical_ciphertext: bool,
    pub successes: usize,
    pub user_outcomes: Vec<UserOutcome>,
    pub key_bits_per_user: usize,
    pub total_key_bits: usize,
    pub wire_key_bytes_per_user: usize,
    /// Wire bytes per user beyond the packed 3M-bit key.
    pub key_overhead_bytes_per_user: usize,
    pub pool_size: String,
    pub pool_guess_probability: String,
    pub probes: Vec<ProbeOutcome>,
    pub brute_force: Option<BruteForceReport>,
    pub tracing: TraceSummary,
}

impl SimReport {
    pub fn all_succeeded(&self) -> bool {
        self.successes == self.users && self.identical_ciphertext
    }
}

fn mismatch_positions(a: &[bool], b: &[bool]) -> Vec<usize> {
    (0..a.len().max(b.len())).filter(|&i| a.get(i) != b.get(i)).collect()
}

pub fn simulate_multicast(cfg: &SimConfig) -> Result<SimReport> {
    let session = Session::setup(cfg)?;
    let cw = cfg.coder.encode(&session.message, cfg.p, &session.key)?;
    let ct = cw.to_bytes();
    let sent_hash = Sha256::digest(&ct);
    let mut wire = session.wire.clone();
    wire.broadcast(ct.clone());

    let registry = SchemeRegistry::with_null_test();
    let user_outcomes = session
        .ledger
        .entries()
        .par_iter()
        .map(|entry| -> Result<UserOutcome> {
            let key = session.user_key(&entry.user, &registry)?;
            let received = wire
                .received_by(&entry.user)
                .last()
                .ok_or_else(|| Error::Format("no broadcast frame".into()))?;
            let hash_ok = Sha256::digest(received) == sent_hash;
            let decoded = cfg.coder.decode(&Codeword::from_bytes(received)?, &key)?;
            Ok(UserOutcome {
                user: entry.user.clone(),
                key: key.to_string(),
                ciphertext_hash_ok: hash_ok,
                decoded_ok: decoded == session.message,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let wire_key_bytes = session
        .wire
        .frames()
        .first()
        .map(|f| match f {
            Frame::Unicast { bytes, .. } | Frame::Broadcast(bytes) => bytes.len(),
        })
        .unwrap_or(0);
    let packed_bytes = (3 * cfg.m).div_ceil(8);

    let brute_force = if cfg.m <= MAX_BRUTE_FORCE_M {
        let valid = brute_force_valid_keys(&cw, &session.message, cfg.m, cfg.coder, session.key.tail())?;
        let set: HashSet<&EncryptionKey> = valid.iter().collect();
        let members = session.pool.enumerate()?;
        Some(BruteForceReport {
            keys_tried: 8usize.pow(cfg.m as u32),
            valid_count: valid.len(),
            pool_size: members.len(),
            pool_contained: members.iter().all(|k| set.contains(k)),
            valid: valid.iter().map(ToString::to_string).collect(),
        })
    } else {
        None
    };

    let probes = probe_non_pool_keys(&session, &cw)?;
    let tracing = trace_session(&session)?;
    let math = pool_math(cfg.m);

    Ok(SimReport {
        session: session.ledger.session().to_owned(),
        users: cfg.users,
        n: cfg.n,
        m: cfg.m,
        p_num: cfg.p.num(),
        coder: cfg.coder,
        wrapped: cfg.wrap,
        session_key: session.key.to_string(),
        ciphertext_bytes: ct.len(),
        payload_bits: cw.payload_len(),
        rate: if cfg.n == 0 { 0.0 } else { cw.payload_len() as f64 / cfg.n as f64 },
        length_bound: code_length_bound(&session.message, cfg.p),
        ciphertext_sha256: hex::encode(sent_hash),
        identical_ciphertext: user_outcomes.iter().all(|u| u.ciphertext_hash_ok),
        successes: user_outcomes.iter().filter(|u| u.decoded_ok).count(),
        user_outcomes,
        key_bits_per_user: 3 * cfg.m,
        total_key_bits: cfg.users * 3 * cfg.m,
        wire_key_bytes_per_user: wire_key_bytes,
        key_overhead_bytes_per_user: wire_key_bytes.saturating_sub(packed_bytes),
        pool_size: math.valid.to_string(),
        pool_guess_probability: match math.guess_bits() {
            Some(b) => format!("2^-{b}"),
            None => math.guess_prob.to_string(),
        },
        probes,
        brute_force,
        tracing,
    })
}

fn random_non_pool_key(pool: &KeyPoolSpec, seed: &Seed) -> Option<EncryptionKey> {
    if pool.is_empty() {
        return None;
    }
    (0..64u64)
        .map(|i| {
            let k = keygen(&derive_seed(seed, "non-pool", i), pool.len());
            EncryptionKey::new(k.modes().to_vec(), pool.tail())
        })
        .find(|k| !is_pool_member(pool, k))
}

fn probe_non_pool_keys(session: &Session, cw: &Codeword) -> Result<Vec<ProbeOutcome>> {
    let cfg = &session.config;
    (0..cfg.probes as u64)
        .filter_map(|i| random_non_pool_key(&session.pool, &derive_seed(&cfg.seed, "probe", i)))
        .map(|k| {
            let decoded = cfg.coder.decode(cw, &k)?;
            let diff = mismatch_positions(&decoded, &session.message);
            Ok(ProbeOutcome {
                key: k.to_string(),
                mismatches: diff.len(),
                first_mismatches: diff.into_iter().take(16).collect(),
            })
        })
        .collect()
}

/// Every key of length `m` (with tail `tail`) under which `cw` decodes to
/// `plaintext`, in digit order.
pub fn brute_force_valid_keys(
    cw: &Codeword,
    plaintext: &[bool],
    m: usize,
    coder: Coder,
    tail: MapMode,
) -> Result<Vec<EncryptionKey>> {
    if m > MAX_BRUTE_FORCE_M {
        return Err(Error::Capacity(format!("brute force limited to M <= {MAX_BRUTE_FORCE_M}, got {m}")));
    }
    let mut valid = (0..8u32.pow(m as u32))
        .into_par_iter()
        .map(|index| {
            let modes = (0..m)
                .rev()
                .map(|t| MapMode::new((index / 8u32.pow(t as u32) % 8) as u8 + 1).expect("1..=8"))
                .collect();
            let key = EncryptionKey::new(modes, tail);
            Ok(if coder.decode(cw, &key)? == plaintext { Some(key) } else { None })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    valid.sort();
    Ok(valid)
}

/// Builds a key by taking each position's digit from a randomly chosen colluder.
pub fn collude(keys: &[EncryptionKey], seed: &Seed) -> Result<EncryptionKey> {
    let first = match keys {
        [first, _, ..] => first,
        _ => return Err(Error::Key("collusion needs at least two keys".into())),
    };
    if keys.iter().any(|k| k.len() != first.len() || k.tail() != first.tail()) {
        return Err(Error::Key("colluding keys come from different sessions".into()));
    }
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let modes = (0..first.len()).map(|t| keys[rng.gen_range(0..keys.len())].modes()[t]).collect();
    Ok(EncryptionKey::new(modes, first.tail()))
}

fn trace_session(session: &Session) -> Result<TraceSummary> {
    let cfg = &session.config;
    let entries = session.ledger.entries();
    let mut summary = TraceSummary {
        trials: cfg.trials,
        collude_k: cfg.collude_k,
        raw_keys_on_wire: session.raw_keys_on_wire(),
        ..Default::default()
    };
    if entries.is_empty() {
        summary.trials = 0;
    }
    let mut rng = ChaCha20Rng::from_seed(derive_seed(&cfg.seed, "trace", 0));
    for trial in 0..summary.trials {
        let group: Vec<usize> = if cfg.collude_k < 2 {
            vec![rng.gen_range(0..entries.len())]
        } else {
            rand::seq::index::sample(&mut rng, entries.len(), cfg.collude_k).into_vec()
        };
        let leaked = if group.len() == 1 {
            entries[group[0]].key.clone()
        } else {
            let keys: Vec<EncryptionKey> = group.iter().map(|&i| entries[i].key.clone()).collect();
            collude(&keys, &derive_seed(&cfg.seed, "mix", trial as u64))?
        };
        match trace_key(&leaked, &session.ledger, &session.pool) {
            TraceOutcome::User { user } => {
                let holder_key = session.ledger.key_of(&user).expect("traced user is in the ledger");
                if holder_key != &leaked {
                    summary.misattributed += 1;
                } else if group.iter().any(|&i| entries[i].user == user) {
                    summary.attributed_to_leaker += 1;
                } else {
                    summary.innocent_exact_match += 1;
                }
            }
            TraceOutcome::CollusionSuspected => summary.collusion_suspected += 1,
            TraceOutcome::Unknown => summary.unknown += 1,
        }
    }
    for i in 0..cfg.trials as u64 {
        if let Some(k) = random_non_pool_key(&session.pool, &derive_seed(&cfg.seed, "leak", i)) {
            summary.non_pool_trials += 1;
            if trace_key(&k, &session.ledger, &session.pool) == TraceOutcome::Unknown {
                summary.non_pool_unknown += 1;
            }
        }
    }
    Ok(summary)
}

/// Issues keys and runs leak trials without encoding anything.
pub fn run_trace_experiment(cfg: &SimConfig) -> Result<TraceSummary> {
    trace_session(&Session::setup(cfg)?)
}
