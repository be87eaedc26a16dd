//! Keys, key pools, issuance ledgers and key wrapping.

mod key;
mod ledger;
mod pool;
pub mod wrap;

pub use key::EncryptionKey;
pub use ledger::{sample_user_key, trace_key, KeyLedger, LedgerEntry, TraceOutcome};
pub use pool::{
    derive_pool, is_pool_member, keygen, keygen_restricted, pool_math, restricted_pool_math,
    seed_from_u64, KeyPoolSpec, ModeSet, PoolMath, Seed, MAX_ENUMERATE,
};
