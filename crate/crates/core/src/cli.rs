//! `cac` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::codec::bits::{bit_string, bits_from_bytes, bits_to_bytes, parse_bit_str};
use crate::codec::{code_length_bound, Codeword, Coder, Probability, DEFAULT_PRECISION};
use crate::error::{Error, Result};
use crate::keying::wrap::{wrap_key, SchemeRegistry};
use crate::keying::{
    derive_pool, keygen_restricted, pool_math, sample_user_key, seed_from_u64, trace_key, EncryptionKey,
    KeyLedger, KeyPoolSpec, ModeSet, Seed, TraceOutcome,
};
use crate::sim::{self, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "cac", version, about = "Binary chaotic arithmetic coding with multicast key pools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress and encrypt a file into a codeword file.
    Encode(EncodeArgs),
    /// Recover the plaintext from a codeword file.
    Decode(DecodeArgs),
    /// Generate a key from a seed.
    Keygen(KeygenArgs),
    /// Show the key pool a key and plaintext prefix induce.
    Pool(PoolArgs),
    /// Issue a pool key to a user and record it in a ledger.
    Issue(IssueArgs),
    /// Run the multicast simulation and print its report.
    Sim(SimArgs),
    /// Attribute a leaked key using a ledger.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Treat the input as a text of '0'/'1' characters instead of raw bytes.
    #[arg(long)]
    pub text_bits: bool,
}

#[derive(Debug, Args)]
pub struct CoderArgs {
    /// Use the exact reference coder.
    #[arg(long, conflicts_with = "precision")]
    pub exact: bool,
    /// Register width of the streaming coder.
    #[arg(long)]
    pub precision: Option<u32>,
}

impl CoderArgs {
    fn coder(&self) -> Coder {
        if self.exact {
            Coder::Exact
        } else {
            Coder::Stream { precision: self.precision.unwrap_or(DEFAULT_PRECISION) }
        }
    }
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    /// Probability of '0' as a decimal, or `auto` for the input's measured frequency.
    #[arg(long, default_value = "auto", conflicts_with = "p_num")]
    pub p: String,
    /// Probability of '0' as a numerator over 65536.
    #[arg(long)]
    pub p_num: Option<u16>,
}

impl ProbArgs {
    fn resolve(&self, bits: &[bool]) -> Result<Probability> {
        if let Some(num) = self.p_num {
            return Probability::from_num(num);
        }
        if self.p == "auto" {
            return Ok(Probability::measured(bits));
        }
        let p: f64 = self.p.parse().map_err(|_| Error::Config(format!("bad --p {:?}", self.p)))?;
        Probability::from_f64(p)
    }
}

#[derive(Debug, Args)]
pub struct KeySource {
    /// Key file.
    #[arg(long, conflicts_with = "key_str")]
    pub key: Option<PathBuf>,
    /// Key as a digit string such as `136`, or `136/5` to set the tail mode.
    #[arg(long)]
    pub key_str: Option<String>,
}

impl KeySource {
    fn load(&self) -> Result<Option<EncryptionKey>> {
        match (&self.key, &self.key_str) {
            (Some(path), _) => read_key(path).map(Some),
            (None, Some(s)) => s.parse().map(Some),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<EncryptionKey> {
        self.load()?.ok_or_else(|| Error::Config("a key is required (--key or --key-str)".into()))
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub format: InputArgs,
    #[command(flatten)]
    pub prob: ProbArgs,
    #[command(flatten)]
    pub key: KeySource,
    /// Seed for a fresh key when no key is given: 64 hex digits or a decimal integer.
    #[arg(long)]
    pub seed: Option<String>,
    /// Encrypted prefix length for a fresh key.
    #[arg(long)]
    pub m: Option<usize>,
    /// Modes a fresh key may use, e.g. `1,5`.
    #[arg(long)]
    pub modes: Option<String>,
    /// Where to save a freshly generated key.
    #[arg(long)]
    pub key_out: Option<PathBuf>,
    #[command(flatten)]
    pub coder: CoderArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub key: KeySource,
    #[command(flatten)]
    pub format: InputArgs,
    #[command(flatten)]
    pub coder: CoderArgs,
    /// Compare against this original and fail if any bit differs.
    #[arg(long)]
    pub expect: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub seed: String,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub modes: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PrefixArgs {
    /// Plaintext prefix as '0'/'1' characters.
    #[arg(long, conflicts_with = "input")]
    pub prefix: Option<String>,
    /// Plaintext file; its first M bits are used.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub format: InputArgs,
}

impl PrefixArgs {
    fn prefix(&self, m: usize) -> Result<Vec<bool>> {
        let bits = match (&self.prefix, &self.input) {
            (Some(s), _) => parse_bit_str(s)?,
            (None, Some(path)) => read_bits(path, self.format.text_bits)?,
            (None, None) => return Err(Error::Config("a plaintext prefix is required (--prefix or --input)".into())),
        };
        if bits.len() < m {
            return Err(Error::Key(format!("key covers {m} positions, plaintext has {} bits", bits.len())));
        }
        Ok(bits[..m].to_vec())
    }

    fn pool(&self, key: &EncryptionKey) -> Result<KeyPoolSpec> {
        derive_pool(key, &self.prefix(key.len())?)
    }
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[command(flatten)]
    pub key: KeySource,
    #[command(flatten)]
    pub plaintext: PrefixArgs,
    /// List every member (M <= 16).
    #[arg(long)]
    pub enumerate: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct IssueArgs {
    /// Session key the stream was encoded with.
    #[command(flatten)]
    pub key: KeySource,
    #[command(flatten)]
    pub plaintext: PrefixArgs,
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long, default_value = "default")]
    pub session: String,
    #[arg(long)]
    pub seed: String,
    /// Write the issued key wrapped for the user to this file.
    #[arg(long)]
    pub wrap_out: Option<PathBuf>,
    /// Wrapping scheme name or id.
    #[arg(long, default_value = "NULL-TEST")]
    pub scheme: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 8)]
    pub users: usize,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub m: usize,
    #[arg(long, default_value = "0.9", conflicts_with = "p_num")]
    pub p: f64,
    #[arg(long)]
    pub p_num: Option<u16>,
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[arg(long)]
    pub modes: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub collude_k: usize,
    #[arg(long, default_value_t = sim::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Send keys unwrapped.
    #[arg(long)]
    pub no_wrap: bool,
    #[command(flatten)]
    pub coder: CoderArgs,
    /// Also write the JSON report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Session key the stream was encoded with.
    #[command(flatten)]
    pub key: KeySource,
    #[command(flatten)]
    pub plaintext: PrefixArgs,
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long, default_value = "default")]
    pub session: String,
    /// Leaked key file.
    #[arg(long, conflicts_with = "leaked_str")]
    pub leaked: Option<PathBuf>,
    /// Leaked key as a digit string.
    #[arg(long)]
    pub leaked_str: Option<String>,
    #[arg(long)]
    pub json: bool,
}

/// Seeds are 64 hex digits or a decimal `u64`.
pub fn parse_seed(s: &str) -> Result<Seed> {
    if s.len() == 64 {
        let bytes = hex::decode(s).map_err(|e| Error::Config(format!("bad hex seed: {e}")))?;
        return Ok(bytes.try_into().expect("32 bytes"));
    }
    s.parse::<u64>()
        .map(seed_from_u64)
        .map_err(|_| Error::Config(format!("seed {s:?} is neither 64 hex digits nor a decimal integer")))
}

fn read_bits(path: &Path, text: bool) -> Result<Vec<bool>> {
    if text {
        parse_bit_str(&std::fs::read_to_string(path)?)
    } else {
        Ok(bits_from_bytes(&std::fs::read(path)?))
    }
}

fn write_bits(path: &Path, bits: &[bool], text: bool) -> Result<()> {
    if text {
        std::fs::write(path, bit_string(bits))?;
    } else {
        std::fs::write(path, bits_to_bytes(bits))?;
    }
    Ok(())
}

/// A `CACKEY` file, or a bare digit string.
fn read_key(path: &Path) -> Result<EncryptionKey> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with("CACKEY") {
        EncryptionKey::from_key_file(&text)
    } else {
        text.trim().parse()
    }
}

fn mode_set(modes: &Option<String>) -> Result<ModeSet> {
    modes.as_deref().map(ModeSet::parse).unwrap_or(Ok(ModeSet::ALL))
}

fn emit(out: &mut dyn Write, json: bool, value: serde_json::Value, human: String) -> Result<()> {
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
    } else {
        write!(out, "{human}")?;
    }
    Ok(())
}

fn binary_entropy_bits(bits: &[bool], p: Probability) -> f64 {
    let zeros = bits.iter().filter(|&&b| !b).count() as f64;
    let ones = bits.len() as f64 - zeros;
    let p0 = p.to_f64();
    -(zeros * p0.log2() + ones * (1.0 - p0).log2())
}

fn cmd_encode(args: &EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let bits = read_bits(&args.input, args.format.text_bits)?;
    let p = args.prob.resolve(&bits)?;
    let key = match args.key.load()? {
        Some(k) => k,
        None => {
            let seed = args
                .seed
                .as_deref()
                .ok_or_else(|| Error::Config("give --key, --key-str, or --seed with --m".into()))?;
            let m = args.m.ok_or_else(|| Error::Config("--seed needs --m".into()))?;
            let key = keygen_restricted(&parse_seed(seed)?, m, &mode_set(&args.modes)?);
            if let Some(path) = &args.key_out {
                std::fs::write(path, key.to_key_file())?;
            }
            key
        }
    };
    let coder = args.coder.coder();
    let cw = coder.encode(&bits, p, &key)?;
    cw.write_to(&args.output)?;
    let bound = code_length_bound(&bits, p);
    let entropy = binary_entropy_bits(&bits, p);
    let math = pool_math(key.len());
    let human = format!(
        "encoded {} bits with p = {}/65536 under a {}-position key\n\
         payload {} bits (bound {}..={}, information content {:.1} bits)\n\
         key pool: {}\n",
        bits.len(),
        p.num(),
        key.len(),
        cw.payload_len(),
        bound.0,
        bound.1,
        entropy,
        math,
    );
    emit(
        out,
        args.json,
        json!({
            "n_bits": bits.len(),
            "p_num": p.num(),
            "m": key.len(),
            "coder": coder,
            "payload_bits": cw.payload_len(),
            "length_bound": [bound.0, bound.1],
            "information_bits": entropy,
            "pool_size": math.valid.to_string(),
            "keyspace": math.total.to_string(),
            "guess_probability": math.guess_prob.to_string(),
        }),
        human,
    )
}

fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let cw = Codeword::read_from(&args.input)?;
    let key = args.key.require()?;
    let bits = args.coder.coder().decode(&cw, &key)?;
    write_bits(&args.output, &bits, args.format.text_bits)?;
    let mismatches = match &args.expect {
        Some(path) => {
            let expected = read_bits(path, args.format.text_bits)?;
            let diff: Vec<usize> =
                (0..bits.len().max(expected.len())).filter(|&i| bits.get(i) != expected.get(i)).collect();
            Some(diff)
        }
        None => None,
    };
    let human = match &mismatches {
        Some(d) if !d.is_empty() => format!(
            "decoded {} bits; {} differ from the expected plaintext, first at position {}\n",
            bits.len(),
            d.len(),
            d[0]
        ),
        _ => format!("decoded {} bits\n", bits.len()),
    };
    emit(
        out,
        args.json,
        json!({
            "n_bits": bits.len(),
            "mismatches": mismatches.as_ref().map(Vec::len),
            "first_mismatches": mismatches.as_ref().map(|d| d.iter().take(16).collect::<Vec<_>>()),
        }),
        human,
    )?;
    match mismatches {
        Some(d) if !d.is_empty() => Err(Error::Key(format!("{} of {} bits differ under this key", d.len(), bits.len()))),
        _ => Ok(()),
    }
}

fn cmd_keygen(args: &KeygenArgs, out: &mut dyn Write) -> Result<()> {
    let key = keygen_restricted(&parse_seed(&args.seed)?, args.m, &mode_set(&args.modes)?);
    if let Some(path) = &args.output {
        std::fs::write(path, key.to_key_file())?;
    }
    emit(
        out,
        args.json,
        json!({ "m": key.len(), "tail": key.tail().digit(), "key": key.to_string() }),
        key.to_key_file(),
    )
}

fn cmd_pool(args: &PoolArgs, out: &mut dyn Write) -> Result<()> {
    let key = args.key.require()?;
    let pool = args.plaintext.pool(&key)?;
    let members = if args.enumerate { Some(pool.enumerate()?) } else { None };
    let math = pool_math(pool.len());
    let pairs: Vec<String> = pool.pairs().iter().map(|(a, b)| format!("{}{}", a.digit(), b.digit())).collect();
    let mut human = format!("pairs per position: {}\n{}\n", pairs.join(" "), math);
    if let Some(members) = &members {
        for k in members {
            human.push_str(&format!("{k}\n"));
        }
    }
    emit(
        out,
        args.json,
        json!({
            "m": pool.len(),
            "pairs": pairs,
            "pool_size": math.valid.to_string(),
            "keyspace": math.total.to_string(),
            "guess_probability": math.guess_prob.to_string(),
            "members": members.map(|ms| ms.iter().map(ToString::to_string).collect::<Vec<_>>()),
        }),
        human,
    )
}

fn scheme_id(registry: &SchemeRegistry, name: &str) -> Result<u8> {
    if let Some(s) = registry.by_name(name) {
        return Ok(s.id());
    }
    let id = name
        .strip_prefix("0x")
        .map(|h| u8::from_str_radix(h, 16))
        .unwrap_or_else(|| name.parse())
        .map_err(|_| Error::Config(format!("unknown scheme {name:?}")))?;
    registry.get(id).map(|s| s.id())
}

fn cmd_issue(args: &IssueArgs, out: &mut dyn Write) -> Result<()> {
    let key = args.key.require()?;
    let pool = args.plaintext.pool(&key)?;
    let mut ledger = KeyLedger::load(&args.ledger, &args.session)?;
    let issued = sample_user_key(&pool, &args.user, &mut ledger, &parse_seed(&args.seed)?)?;
    let entry = ledger.entries().last().expect("just issued");
    entry.append_to(&args.ledger)?;
    if let Some(path) = &args.wrap_out {
        let registry = SchemeRegistry::with_null_test();
        let scheme = registry.get(scheme_id(&registry, &args.scheme)?)?;
        let wrapped = wrap_key(&issued, &args.user, args.user.as_bytes(), scheme);
        std::fs::write(path, wrapped.to_blob())?;
    }
    emit(
        out,
        args.json,
        serde_json::to_value(entry)?,
        format!("issued {} to {} in session {}\n", issued, args.user, args.session),
    )
}

fn cmd_sim(args: &SimArgs, out: &mut dyn Write) -> Result<()> {
    let p = match args.p_num {
        Some(num) => Probability::from_num(num)?,
        None => Probability::from_f64(args.p)?,
    };
    let cfg = SimConfig {
        users: args.users,
        n: args.n,
        m: args.m,
        p,
        seed: parse_seed(&args.seed)?,
        modes: mode_set(&args.modes)?,
        collude_k: args.collude_k,
        coder: args.coder.coder(),
        wrap: !args.no_wrap,
        trials: args.trials,
        ..SimConfig::default()
    };
    let report = sim::simulate_multicast(&cfg)?;
    let value = serde_json::to_value(&report)?;
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&value)?)?;
    }
    let t = &report.tracing;
    let human = format!(
        "{} users, N={}, M={}: {}/{} decoded, ciphertext identical: {}\n\
         payload {} bits (rate {:.4}), key material {} bits per user + {} bytes framing\n\
         tracing over {} leaks (K={}): {} attributed, {} collusion suspected, {} unknown, {} misattributed\n",
        report.users,
        report.n,
        report.m,
        report.successes,
        report.users,
        report.identical_ciphertext,
        report.payload_bits,
        report.rate,
        report.key_bits_per_user,
        report.key_overhead_bytes_per_user,
        t.trials,
        t.collude_k,
        t.attributed_to_leaker,
        t.collusion_suspected,
        t.unknown,
        t.misattributed,
    );
    emit(out, args.json, value, human)?;
    if report.all_succeeded() {
        Ok(())
    } else {
        Err(Error::Key(format!("{} of {} users failed to decode", report.users - report.successes, report.users)))
    }
}

fn cmd_trace(args: &TraceArgs, out: &mut dyn Write) -> Result<()> {
    let key = args.key.require()?;
    let pool = args.plaintext.pool(&key)?;
    let ledger = KeyLedger::load(&args.ledger, &args.session)?;
    let leaked = match (&args.leaked, &args.leaked_str) {
        (Some(path), _) => read_key(path)?,
        (None, Some(s)) => s.parse()?,
        (None, None) => return Err(Error::Config("give --leaked or --leaked-str".into())),
    };
    let outcome = trace_key(&leaked, &ledger, &pool);
    let human = match &outcome {
        TraceOutcome::User { user } => format!("leaked key was issued to {user}\n"),
        TraceOutcome::CollusionSuspected => "valid pool key issued to nobody: collusion suspected\n".into(),
        TraceOutcome::Unknown => "not a key of this pool\n".into(),
    };
    emit(out, args.json, serde_json::to_value(&outcome)?, human)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out),
        Command::Keygen(a) => cmd_keygen(a, out),
        Command::Pool(a) => cmd_pool(a, out),
        Command::Issue(a) => cmd_issue(a, out),
        Command::Sim(a) => cmd_sim(a, out),
        Command::Trace(a) => cmd_trace(a, out),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cac: {e}");
            e.exit_code()
        }
    }
}
