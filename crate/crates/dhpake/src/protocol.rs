//! The two-phase handshake: secrecy amplification, then key confirmation.
//!
//! Phase one turns the password into strong keying material. Each side
//! draws an ephemeral scalar `r` and sends the masked share
//! `g^r * h^pass`; on receiving the peer's share it strips its own mask
//! (multiplying by `h^(q-pass)`) and exponentiates with `r`. When the
//! passwords agree both sides hold `g^(r1*r2)`; when they disagree the two
//! results differ except on a negligible (and at toy scale, exactly
//! characterized) set of ephemeral pairs. The shares carry no offline
//! password signal: for any fixed password exponent the map from `r` to
//! the share is injective into the subgroup, so a transcript is consistent
//! with every candidate password.
//!
//! Phase two confirms the key. Each side MACs a role tag and the ordered
//! transcript under the keying material and checks the peer's tag in
//! constant time before releasing the session key. Role tags stop
//! reflection; checking before release stops key use with an
//! unauthenticated peer.
//!
//! Sessions move `Started -> Amplified -> ConfirmedPeer` through consuming
//! methods, one struct per phase, so out-of-phase calls (a verifier before
//! amplification, a session key before confirmation) do not compile. A
//! failing transition consumes the session: the failed state is simply
//! gone, and secrets are wiped as the structs drop.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::group::{GroupElement, GroupError, GroupParams, Scalar};
use crate::mac::{ct_eq, hmac_sha256};
use crate::DS_PASSWORD;

/// Verifier tag byte for the server's tag (`v1`).
pub const TAG_SERVER: u8 = 0x00;
/// Verifier tag byte for the client's tag (`v2`).
pub const TAG_CLIENT: u8 = 0x01;
/// Tag byte for session-key derivation; disjoint from the verifier tags.
pub const TAG_SESSION_KEY: u8 = 0x02;

/// Retry budget for the password-to-exponent derivation.
const PASSWORD_ATTEMPT_LIMIT: u16 = 256;

/// Which side of the handshake a session plays.
///
/// The client owns the first share and the `0x01`-tagged verifier; the
/// server owns the second share and the `0x00`-tagged verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Initiating side.
    Client,
    /// Responding side.
    Server,
}

impl Role {
    /// The tag byte this role puts in its own verifier.
    pub fn verifier_tag(self) -> u8 {
        match self {
            Role::Server => TAG_SERVER,
            Role::Client => TAG_CLIENT,
        }
    }

    /// The opposite role.
    pub fn peer(self) -> Role {
        match self {
            Role::Client => Role::Server,
            Role::Server => Role::Client,
        }
    }
}

/// Handshake errors. Group-level failures (element validation, RNG trouble)
/// pass through as [`ProtocolError::Group`].
#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    /// Underlying group or randomness failure.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Passwords must be at least one byte.
    #[error("password must not be empty")]
    EmptyPassword,
    /// The retry counter for exponent derivation ran out (probability
    /// about q^-256: diagnosable only with degenerate parameters).
    #[error("password exponent derivation exhausted its retry budget")]
    PasswordDerivationFailed,
    /// A password exponent derived for one parameter set was used with
    /// another.
    #[error("password exponent belongs to parameter set `{expected}`, not `{got}`")]
    ContextMismatch {
        /// Name the exponent was derived for.
        expected: String,
        /// Name of the set the session runs in.
        got: String,
    },
    /// The computed keying material was the identity element, which would
    /// hand an attacker a known key. The peer's share is to blame.
    #[error("keying material is the identity element")]
    IdentityKeyingMaterial,
    /// The peer's verifier did not match the expected transcript tag.
    /// Wrong password, tampering, or replay; indistinguishable by design.
    #[error("peer verifier does not match the transcript")]
    VerificationFailed,
}

/// A scalar that overwrites itself when dropped.
///
/// Clones wipe independently. This bounds how long secrets stay readable
/// in freed memory; it cannot reach copies the allocator or OS already
/// made elsewhere.
#[derive(Clone)]
struct SecretScalar(Scalar);

impl Drop for SecretScalar {
    fn drop(&mut self) {
        self.0.wipe();
    }
}

impl fmt::Debug for SecretScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretScalar(<redacted>)")
    }
}

/// The password mapped into the exponent range `[1, q-1]`, bound to the
/// parameter set (by name) it was derived for.
#[derive(Clone)]
pub struct PasswordExponent {
    secret: SecretScalar,
    context: String,
}

impl fmt::Debug for PasswordExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PasswordExponent(<redacted>, context={})", self.context)
    }
}

impl PasswordExponent {
    /// Deterministically maps a password to an exponent in `[1, q-1]`.
    ///
    /// Hashes `DS_PASSWORD || len(name) || name || password`, widening the
    /// digest (by counter-appended re-hashing) until it carries at least
    /// 64 bits more than `q`, then reduces mod `q`; the widening keeps the
    /// reduction bias below 2^-64. A zero residue re-derives with a retry
    /// byte appended. Binding the parameter-set name in makes the same
    /// password yield unrelated exponents in different groups.
    pub fn derive(password: &[u8], params: &GroupParams) -> Result<Self, ProtocolError> {
        if password.is_empty() {
            return Err(ProtocolError::EmptyPassword);
        }
        let name = params.name().as_bytes();
        debug_assert!(name.len() <= 255, "enforced at params construction");
        let mut base = Vec::with_capacity(2 + name.len() + password.len());
        base.push(DS_PASSWORD);
        base.push(name.len() as u8);
        base.extend_from_slice(name);
        base.extend_from_slice(password);

        let q = params.subgroup_order();
        let nblocks = (q.bits() + 64).div_ceil(256) as usize;
        for attempt in 0..PASSWORD_ATTEMPT_LIMIT {
            let mut message = base.clone();
            if attempt > 0 {
                message.push(attempt as u8);
            }
            let mut widened = Vec::with_capacity(nblocks * 32);
            widened.extend_from_slice(&Sha256::digest(&message));
            for block in 1..nblocks {
                let mut hasher = Sha256::new();
                hasher.update(&message);
                hasher.update([block as u8]);
                widened.extend_from_slice(&hasher.finalize());
            }
            let e = BigUint::from_bytes_be(&widened) % q;
            if !e.is_zero() {
                let scalar = params.scalar(e).expect("reduced mod q");
                return Ok(PasswordExponent {
                    secret: SecretScalar(scalar),
                    context: params.name().to_string(),
                });
            }
        }
        Err(ProtocolError::PasswordDerivationFailed)
    }

    /// Wraps an explicit nonzero exponent (test harnesses, enumeration).
    pub fn from_scalar(value: Scalar, params: &GroupParams) -> Result<Self, ProtocolError> {
        if value.is_zero() {
            return Err(GroupError::ZeroScalar.into());
        }
        Ok(PasswordExponent {
            secret: SecretScalar(value),
            context: params.name().to_string(),
        })
    }

    /// Name of the parameter set this exponent was derived for.
    pub fn context(&self) -> &str {
        &self.context
    }

    /// The raw exponent. Exposed for the desk-scale oracle harness;
    /// treat the value as a secret everywhere else.
    pub fn scalar(&self) -> &Scalar {
        &self.secret.0
    }
}

/// The shared group element both sides derive, `g^(r1*r2)` on matching
/// passwords. Keys every verifier and the session key.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyingMaterial {
    element: GroupElement,
}

impl fmt::Debug for KeyingMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("KeyingMaterial(<redacted>)")
    }
}

impl KeyingMaterial {
    /// The underlying element. Equality on `KeyingMaterial` is plain
    /// value equality for the enumeration harness; nothing on the
    /// authentication path compares keying material directly.
    pub fn element(&self) -> &GroupElement {
        &self.element
    }

    /// Fixed-width encoding used as the keyed-hash key.
    pub fn encoded(&self) -> Vec<u8> {
        self.element.encode()
    }
}

/// A 32-byte key-confirmation tag. Equality is constant-time.
#[derive(Clone, Eq)]
pub struct Verifier([u8; 32]);

impl PartialEq for Verifier {
    fn eq(&self, other: &Self) -> bool {
        ct_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for Verifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Verifier({})", hex_fmt(&self.0))
    }
}

impl Verifier {
    /// Wraps tag bytes received from the peer.
    pub fn from_bytes(bytes: [u8; 32]) -> Verifier {
        Verifier(bytes)
    }

    /// The tag bytes (these travel on the wire in the clear).
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

/// The 32-byte session key, released only after the peer is confirmed.
#[derive(Clone, Eq)]
pub struct SessionKey([u8; 32]);

impl PartialEq for SessionKey {
    fn eq(&self, other: &Self) -> bool {
        ct_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SessionKey(<redacted>)")
    }
}

impl SessionKey {
    /// The key bytes. Handle with care; this is the protocol's output
    /// secret.
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

fn hex_fmt(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Keyed tag over the canonical transcript: both sides always hash
/// `tag || encode(y1) || encode(y2)` with the client share first, whatever
/// order the shares actually traveled.
fn transcript_tag(
    km: &KeyingMaterial,
    tag: u8,
    client_share: &GroupElement,
    server_share: &GroupElement,
) -> [u8; 32] {
    hmac_sha256(
        &km.encoded(),
        &[&[tag], &client_share.encode(), &server_share.encode()],
    )
}

/// Phase-one session: ephemeral drawn, own share computed, peer share not
/// yet absorbed. No verifier or key can exist yet, by construction.
pub struct StartedSession {
    role: Role,
    params: GroupParams,
    pass: SecretScalar,
    ephemeral: SecretScalar,
    own_share: GroupElement,
}

impl fmt::Debug for StartedSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StartedSession")
            .field("role", &self.role)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl StartedSession {
    /// Opens a session: draws the ephemeral `r` and computes the masked
    /// share `g^r * h^pass`.
    ///
    /// Needs nothing from the peer, so either side may run it first and
    /// the share can be precomputed or sent eagerly.
    pub fn start<R: RngCore + CryptoRng>(
        role: Role,
        params: &GroupParams,
        pass: &PasswordExponent,
        rng: &mut R,
    ) -> Result<(StartedSession, GroupElement), ProtocolError> {
        let ephemeral = params.random_scalar(rng)?;
        StartedSession::start_with_ephemeral(role, params, pass, ephemeral)
    }

    /// [`StartedSession::start`] with a caller-chosen ephemeral, for
    /// deterministic tests and the oracle harness. Rejects zero.
    pub fn start_with_ephemeral(
        role: Role,
        params: &GroupParams,
        pass: &PasswordExponent,
        ephemeral: Scalar,
    ) -> Result<(StartedSession, GroupElement), ProtocolError> {
        if pass.context() != params.name() {
            return Err(ProtocolError::ContextMismatch {
                expected: pass.context().to_string(),
                got: params.name().to_string(),
            });
        }
        if ephemeral.is_zero() {
            return Err(GroupError::ZeroScalar.into());
        }
        let g_part = params.generator().pow(&ephemeral);
        let mask = params.second_generator().pow(pass.scalar());
        let own_share = g_part.mul(&mask).expect("same parameter set");
        let session = StartedSession {
            role,
            params: params.clone(),
            pass: pass.secret.clone(),
            ephemeral: SecretScalar(ephemeral),
            own_share: own_share.clone(),
        };
        Ok((session, own_share))
    }

    /// This session's role.
    pub fn role(&self) -> Role {
        self.role
    }

    /// The masked share to transmit.
    pub fn share(&self) -> &GroupElement {
        &self.own_share
    }

    /// Absorbs the peer's share and computes the keying material
    /// `(peer * h^(q-pass))^r`, consuming the session and erasing the
    /// ephemeral.
    ///
    /// The peer value is validated first (range, identity, subgroup), and
    /// identity keying material aborts: both reject attempts to confine
    /// the key to a known value. The negative mask exponent is realized as
    /// the complement `q - pass`, so no inversion runs under a secret.
    pub fn absorb(self, peer_raw: &BigUint) -> Result<AmplifiedSession, ProtocolError> {
        let peer = self.params.validate_element(peer_raw)?;
        let unmask_exp = self.pass.0.neg(&self.params);
        let mask_inverse = self.params.second_generator().pow(&unmask_exp);
        let unmasked = peer.mul(&mask_inverse).expect("same parameter set");
        let km_element = unmasked.pow(&self.ephemeral.0);
        if km_element.is_identity() {
            return Err(ProtocolError::IdentityKeyingMaterial);
        }
        let (client_share, server_share) = match self.role {
            Role::Client => (self.own_share.clone(), peer),
            Role::Server => (peer, self.own_share.clone()),
        };
        Ok(AmplifiedSession {
            role: self.role,
            km: KeyingMaterial { element: km_element },
            client_share,
            server_share,
        })
        // `self` drops here: ephemeral and password copies are wiped.
    }
}

/// Phase-two session: keying material computed, peer not yet confirmed.
#[derive(Debug)]
pub struct AmplifiedSession {
    role: Role,
    km: KeyingMaterial,
    client_share: GroupElement,
    server_share: GroupElement,
}

impl AmplifiedSession {
    /// This session's role.
    pub fn role(&self) -> Role {
        self.role
    }

    /// The keying material (for the oracle harness; not a session key).
    pub fn keying_material(&self) -> &KeyingMaterial {
        &self.km
    }

    /// Client share of the canonical transcript.
    pub fn client_share(&self) -> &GroupElement {
        &self.client_share
    }

    /// Server share of the canonical transcript.
    pub fn server_share(&self) -> &GroupElement {
        &self.server_share
    }

    /// This side's own key-confirmation tag.
    pub fn verifier(&self) -> Verifier {
        Verifier(transcript_tag(
            &self.km,
            self.role.verifier_tag(),
            &self.client_share,
            &self.server_share,
        ))
    }

    /// Checks the peer's tag (recomputed under the PEER's role byte) in
    /// constant time. On success the peer is confirmed; on failure the
    /// session is consumed and nothing can be derived from it.
    pub fn confirm(self, received: &Verifier) -> Result<ConfirmedSession, ProtocolError> {
        let expected = transcript_tag(
            &self.km,
            self.role.peer().verifier_tag(),
            &self.client_share,
            &self.server_share,
        );
        if !ct_eq(&expected, received.as_bytes()) {
            return Err(ProtocolError::VerificationFailed);
        }
        Ok(ConfirmedSession {
            role: self.role,
            km: self.km,
            client_share: self.client_share,
            server_share: self.server_share,
        })
    }
}

/// Final state: the peer proved it holds the same keying material.
#[derive(Debug)]
pub struct ConfirmedSession {
    role: Role,
    km: KeyingMaterial,
    client_share: GroupElement,
    server_share: GroupElement,
}

impl ConfirmedSession {
    /// This session's role.
    pub fn role(&self) -> Role {
        self.role
    }

    /// This side's own tag, still needed after confirmation by whichever
    /// side confirms first (the client checks `v1`, then must send `v2`).
    pub fn verifier(&self) -> Verifier {
        Verifier(transcript_tag(
            &self.km,
            self.role.verifier_tag(),
            &self.client_share,
            &self.server_share,
        ))
    }

    /// Derives the 32-byte session key, tag byte `0x02` over the same
    /// transcript. Only reachable after the peer is confirmed.
    pub fn session_key(&self) -> SessionKey {
        SessionKey(transcript_tag(
            &self.km,
            TAG_SESSION_KEY,
            &self.client_share,
            &self.server_share,
        ))
    }

    /// The keying material (oracle harness use).
    pub fn keying_material(&self) -> &KeyingMaterial {
        &self.km
    }
}
