//! Keyed hashing (HMAC-SHA-256) and constant-time tag comparison.
//!
//! Every verifier and session key in this crate is an HMAC-SHA-256 output,
//! and every tag check goes through [`ct_eq`] so that a mismatch is never
//! revealed early through timing.

use hmac::{Hmac, Mac};
use sha2::Sha256;

type HmacSha256 = Hmac<Sha256>;

/// HMAC-SHA-256 over the concatenation of `parts`, keyed with `key`.
///
/// Accepting the message in parts lets callers build `tag || transcript`
/// inputs without allocating an intermediate buffer.
pub fn hmac_sha256(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    for part in parts {
        mac.update(part);
    }
    mac.finalize().into_bytes().into()
}

/// Constant-time byte-slice equality.
///
/// Runs in time dependent only on the slice lengths, which are public for
/// every comparison in this protocol (tags are fixed 32-byte values).
/// Slices of different lengths compare unequal.
pub fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut acc = 0u8;
    for (x, y) in a.iter().zip(b.iter()) {
        acc |= x ^ y;
    }
    acc == 0
}
