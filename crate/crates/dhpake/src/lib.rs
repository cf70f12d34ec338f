#![forbid(unsafe_code)]
#![warn(rust_2018_idioms, unused_qualifications)]

//! Password-authenticated key exchange over prime-order subgroups of `F_p*`.
//!
//! Two parties that share nothing but a low-entropy password run a two-phase
//! handshake and come out with a strong 32-byte session key:
//!
//! 1. **Secrecy amplification.** Each side masks a Diffie-Hellman share with
//!    a power of a second generator derived from the password: the client
//!    sends `g^r1 * h^pass`, the server sends `g^r2 * h^pass`. Each side
//!    strips the mask off the peer's value and exponentiates, so both end up
//!    holding the keying material `g^(r1*r2)`. The two shares are
//!    independent of each other and can be precomputed and sent in either
//!    order.
//! 2. **Key confirmation.** Both sides exchange keyed-hash tags
//!    (HMAC-SHA-256 under the keying material, over a role tag and the
//!    transcript) proving they derived the same key. Only after checking the
//!    peer's tag is the session key released.
//!
//! A passive or active attacker who does not know the password learns
//! nothing that permits an offline dictionary attack; each active attempt
//! burns one online guess, which the server can observe and rate-limit.
//!
//! The group is a prime-order-`q` subgroup of `F_p*` with two generators
//! `g` and `h` whose discrete-log relation must be unknown to everyone;
//! `h` is either derived deterministically from `g` by hashing
//! ([`group::derive_second_generator`]) or negotiated per session with a
//! commit-reveal exchange ([`negotiate`]) so that neither side controls the
//! pair.
//!
//! # Example
//!
//! ```
//! use dhpake::group::GroupParams;
//! use dhpake::protocol::{PasswordExponent, Role, StartedSession};
//!
//! let params = GroupParams::toy23(); // 8-bit demo group, NOT secure
//! let pass = PasswordExponent::derive(b"hunter2", &params)?;
//!
//! let mut rng = rand::rngs::OsRng;
//! let (client, client_share) = StartedSession::start(Role::Client, &params, &pass, &mut rng)?;
//! let (server, server_share) = StartedSession::start(Role::Server, &params, &pass, &mut rng)?;
//!
//! // ... client_share / server_share travel over the network ...
//! let client = client.absorb(server_share.value())?;
//! let server = server.absorb(client_share.value())?;
//!
//! // server confirms first, then the client
//! let client = client.confirm(&server.verifier())?;
//! let server = server.confirm(&client.verifier())?;
//! assert_eq!(client.session_key(), server.session_key());
//! # Ok::<(), dhpake::protocol::ProtocolError>(())
//! ```
//!
//! The [`driver`] module wraps the same state machine in wire framing for
//! use over a byte stream, and the [`oracle`] module contains a desk-scale
//! harness that exhaustively proves the protocol algebra in the tiny
//! `toy23` group.

pub mod driver;
pub mod group;
pub mod mac;
pub mod negotiate;
pub mod oracle;
pub mod prime;
pub mod protocol;
pub mod wire;

// Group elements and scalars cross this API as `BigUint`; re-exported so
// callers need not track the underlying crate themselves.
pub use num_bigint::BigUint;

/// Domain-separation prefix for the password-to-exponent derivation.
pub const DS_PASSWORD: u8 = 0x70;
/// Domain-separation prefix for deriving the second generator from the first.
pub const DS_GENERATOR: u8 = 0x68;
/// Domain-separation prefix for generator commitments in negotiation.
pub const DS_COMMITMENT: u8 = 0x63;
