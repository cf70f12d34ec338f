//! Shared plumbing for the client, server, and harness commands.

use std::io::{self, BufRead, Write};

use dhpake::group::GroupParams;
use dhpake::protocol::SessionKey;
use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// The demo's randomness source: the operating system by default, a
/// seeded stream cipher when a test asks for reproducible transcripts.
pub enum DemoRng {
    /// Operating-system entropy.
    Os(OsRng),
    /// Deterministic test stream. Boxed: the cipher state dwarfs the
    /// zero-sized OS handle.
    Seeded(Box<ChaCha20Rng>),
}

impl DemoRng {
    /// Seeded when a seed is given, OS-backed otherwise. Callers gate
    /// seeds on parameter size with [`check_seed`] first.
    pub fn new(seed: Option<u64>) -> DemoRng {
        match seed {
            Some(s) => DemoRng::Seeded(Box::new(ChaCha20Rng::seed_from_u64(s))),
            None => DemoRng::Os(OsRng),
        }
    }
}

impl RngCore for DemoRng {
    fn next_u32(&mut self) -> u32 {
        match self {
            DemoRng::Os(r) => r.next_u32(),
            DemoRng::Seeded(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            DemoRng::Os(r) => r.next_u64(),
            DemoRng::Seeded(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        match self {
            DemoRng::Os(r) => r.fill_bytes(dest),
            DemoRng::Seeded(r) => r.fill_bytes(dest),
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        match self {
            DemoRng::Os(r) => r.try_fill_bytes(dest),
            DemoRng::Seeded(r) => r.try_fill_bytes(dest),
        }
    }
}

// Both arms are cryptographically strong sources; ChaCha is only ever
// seeded deliberately, for tests.
impl CryptoRng for DemoRng {}

/// Resolves `--params`: a builtin set name first, else a parameter file.
pub fn load_params(arg: &str) -> Result<GroupParams, String> {
    if let Some(params) = GroupParams::builtin(arg) {
        return Ok(params);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| format!("`{arg}` is not a builtin parameter set and reading it as a file failed: {e}"))?;
    GroupParams::from_params_file(&text).map_err(|e| format!("parameter file `{arg}`: {e}"))
}

/// A deterministic seed is a test aid; only toy-scale groups accept one.
/// Full-size runs always draw from the operating system.
pub fn check_seed(seed: Option<u64>, params: &GroupParams) -> Result<(), String> {
    if seed.is_none() || dhpake::oracle::enumerable(params) {
        Ok(())
    } else {
        Err(format!(
            "--seed is a test aid for toy-scale parameter sets; `{}` must use the system RNG",
            params.name()
        ))
    }
}

/// Picks the password bytes: environment variable if named, else the
/// insecure flag (with a warning), else an interactive prompt.
pub fn resolve_password(
    env_var: &Option<String>,
    flag: &Option<String>,
) -> Result<Vec<u8>, String> {
    if let Some(var) = env_var {
        return std::env::var(var)
            .map(String::into_bytes)
            .map_err(|_| format!("environment variable `{var}` is not set"));
    }
    if let Some(password) = flag {
        eprintln!(
            "warning: a command-line password is visible to other processes; prefer --password-env"
        );
        return Ok(password.clone().into_bytes());
    }
    prompt_password()
}

fn prompt_password() -> Result<Vec<u8>, String> {
    eprint!("password: ");
    io::stderr().flush().ok();
    let mut line = String::new();
    io::stdin()
        .lock()
        .read_line(&mut line)
        .map_err(|e| format!("cannot read password from stdin: {e}"))?;
    while line.ends_with('\n') || line.ends_with('\r') {
        line.pop();
    }
    Ok(line.into_bytes())
}

/// First 8 hex characters of SHA-256 over the session key: enough to
/// compare by eye, not a substitute for the key.
pub fn fingerprint(key: &SessionKey) -> String {
    let digest = Sha256::digest(key.as_bytes());
    hex::encode(&digest[..4])
}
