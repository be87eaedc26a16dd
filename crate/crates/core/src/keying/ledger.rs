//! Per-session record of which user holds which pool key.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keying::pool::{KeyPoolSpec, Seed};
use crate::keying::EncryptionKey;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub session: String,
    pub user: String,
    pub key: EncryptionKey,
    /// Seconds since the Unix epoch.
    pub issued_at: u64,
}

impl LedgerEntry {
    /// Appends this entry as one JSON line.
    pub fn append_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(file, "{}", serde_json::to_string(self)?)?;
        Ok(())
    }
}

/// Issued keys for one session. Mutations go through `&mut self`, so a ledger
/// has a single writer.
#[derive(Clone, Debug, Default)]
pub struct KeyLedger {
    session: String,
    entries: Vec<LedgerEntry>,
    by_key: HashMap<EncryptionKey, usize>,
    by_user: HashMap<String, usize>,
}

impl KeyLedger {
    pub fn new(session: impl Into<String>) -> Self {
        KeyLedger { session: session.into(), ..Default::default() }
    }

    pub fn session(&self) -> &str {
        &self.session
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn holder_of(&self, key: &EncryptionKey) -> Option<&str> {
        self.by_key.get(key).map(|&i| self.entries[i].user.as_str())
    }

    pub fn key_of(&self, user: &str) -> Option<&EncryptionKey> {
        self.by_user.get(user).map(|&i| &self.entries[i].key)
    }

    pub fn contains_key(&self, key: &EncryptionKey) -> bool {
        self.by_key.contains_key(key)
    }

    /// Records `key` for `user`. Both must be new to the session.
    pub fn issue(&mut self, user: &str, key: EncryptionKey, issued_at: u64) -> Result<&LedgerEntry> {
        if self.by_user.contains_key(user) {
            return Err(Error::Key(format!("user {user:?} already holds a key")));
        }
        if let Some(holder) = self.holder_of(&key) {
            return Err(Error::Key(format!("key {key} already issued to {holder:?}")));
        }
        let i = self.entries.len();
        self.by_key.insert(key.clone(), i);
        self.by_user.insert(user.to_owned(), i);
        self.entries.push(LedgerEntry { session: self.session.clone(), user: user.to_owned(), key, issued_at });
        Ok(&self.entries[i])
    }

    /// Reads the entries of `session` from a JSON-lines file; a missing file
    /// is an empty ledger.
    pub fn load(path: impl AsRef<Path>, session: &str) -> Result<Self> {
        let mut ledger = KeyLedger::new(session);
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(ledger),
            Err(e) => return Err(e.into()),
        };
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LedgerEntry = serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("ledger line {line:?}: {e}")))?;
            if entry.session == session {
                ledger.issue(&entry.user, entry.key, entry.issued_at)?;
            }
        }
        Ok(ledger)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for entry in &self.entries {
            writeln!(out, "{}", serde_json::to_string(entry)?)?;
        }
        Ok(())
    }
}

pub(crate) fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Issues `user` a pool key not yet in the ledger.
///
/// A flip pattern is drawn from `seed` and probed linearly (mod `2^M`) until
/// an unissued member turns up, so the same seed and ledger state always give
/// the same key.
pub fn sample_user_key(
    pool: &KeyPoolSpec,
    user: &str,
    ledger: &mut KeyLedger,
    seed: &Seed,
) -> Result<EncryptionKey> {
    let size = pool.size();
    if BigUint::from(ledger.len()) >= size {
        return Err(Error::Capacity(format!("all {size} pool keys are issued")));
    }
    if ledger.key_of(user).is_some() {
        return Err(Error::Key(format!("user {user:?} already holds a key")));
    }
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let mut bytes = vec![0u8; pool.len().div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    let mut pattern = BigUint::from_bytes_le(&bytes) % &size;
    loop {
        let key = pool.member(&pattern);
        if !ledger.contains_key(&key) {
            ledger.issue(user, key.clone(), unix_now())?;
            return Ok(key);
        }
        pattern = (pattern + 1u32) % &size;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TraceOutcome {
    /// The leaked key is exactly the one issued to this user.
    User { user: String },
    /// A working key that nobody was issued: a mix of several users' keys.
    CollusionSuspected,
    /// Not a pool key at all.
    Unknown,
}

pub fn trace_key(leaked: &EncryptionKey, ledger: &KeyLedger, pool: &KeyPoolSpec) -> TraceOutcome {
    if let Some(user) = ledger.holder_of(leaked) {
        TraceOutcome::User { user: user.to_owned() }
    } else if pool.pattern_of(leaked).is_some() {
        TraceOutcome::CollusionSuspected
    } else {
        TraceOutcome::Unknown
    }
}
