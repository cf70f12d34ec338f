//! Commit-reveal negotiation of a fresh generator pair `(g, h)`.
//!
//! Both sides start from a shared base generator `g_b` (the parameter
//! set's own `g`). The client picks `g = g_b^s1` but sends only a hash
//! commitment to it; the server then contributes `h = g_b^s2`; finally the
//! client reveals `g` and the server checks it against the commitment.
//! The commitment binds the client to its choice *before* it sees `h`, and
//! the server never contributes before being bound to the client's choice,
//! so neither side can steer the pair toward a known `log_g(h)` relation.
//!
//! The commitment is hash-only: `g` is public moments later, so hiding is
//! not a goal; binding is. The exchange is one-sided as well (the server's
//! `h` needs no commitment, because the server moves after being bound and
//! the client's check is only that `h` is a valid, distinct generator);
//! the asymmetry is deliberate.
//!
//! Ordering is enforced structurally: [`ServerNegotiation`] can only be
//! built from a received commitment, and a reveal can only be checked
//! against a [`ServerNegotiation`] that already produced `h`.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::group::{encode_uint, GroupElement, GroupError, GroupParams, Scalar};
use crate::mac::ct_eq;
use crate::DS_COMMITMENT;

/// Negotiation failures. Group-level problems (invalid elements, RNG)
/// pass through as [`NegotiateError::Group`].
#[derive(Debug, thiserror::Error)]
pub enum NegotiateError {
    /// Underlying group or randomness failure.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// The revealed generator does not hash to the earlier commitment.
    #[error("revealed generator does not match the commitment")]
    CommitmentMismatch,
    /// Client and server contributions collided; accepting would make the
    /// generators' log relation trivially known.
    #[error("negotiated generators are equal")]
    GeneratorsEqual,
}

/// `SHA-256(DS_COMMITMENT || encode(g))`: the commitment sent for a
/// chosen generator.
pub fn generator_commitment(g: &GroupElement) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update([DS_COMMITMENT]);
    hasher.update(g.encode());
    hasher.finalize().into()
}

/// Client half of a negotiation: a chosen generator and its commitment,
/// waiting for the server's `h`.
#[derive(Debug)]
pub struct ClientNegotiation {
    params: GroupParams,
    chosen: GroupElement,
    commitment: [u8; 32],
}

impl ClientNegotiation {
    /// Draws `s1`, computes `g = g_b^s1`, and commits to it. `s1` is not
    /// needed after this call and is wiped before returning.
    pub fn start<R: RngCore + CryptoRng>(
        params: &GroupParams,
        rng: &mut R,
    ) -> Result<ClientNegotiation, NegotiateError> {
        let s1 = params.random_scalar(rng)?;
        ClientNegotiation::start_with_scalar(params, s1)
    }

    /// [`ClientNegotiation::start`] with a caller-chosen nonzero `s1`
    /// (deterministic tests).
    pub fn start_with_scalar(
        params: &GroupParams,
        mut s1: Scalar,
    ) -> Result<ClientNegotiation, NegotiateError> {
        if s1.is_zero() {
            return Err(GroupError::ZeroScalar.into());
        }
        let chosen = params.generator().pow(&s1);
        s1.wipe();
        let commitment = generator_commitment(&chosen);
        Ok(ClientNegotiation {
            params: params.clone(),
            chosen,
            commitment,
        })
    }

    /// The commitment to send first.
    pub fn commitment(&self) -> &[u8; 32] {
        &self.commitment
    }

    /// The chosen generator, revealed only after `h` arrives.
    pub fn chosen_generator(&self) -> &GroupElement {
        &self.chosen
    }

    /// Accepts the server's `h` and produces the negotiated parameter set
    /// (same `p`, `q`, and name; new generator pair).
    pub fn finish(self, server_h_raw: &BigUint) -> Result<GroupParams, NegotiateError> {
        let h = self.params.validate_element(server_h_raw)?;
        if h == self.chosen {
            return Err(NegotiateError::GeneratorsEqual);
        }
        Ok(self
            .params
            .with_generators(self.chosen.value().clone(), h.value().clone())?)
    }
}

/// Server half of a negotiation: holds the client's commitment and the
/// server's own `h`, waiting for the reveal.
///
/// Constructible only from a received commitment, which is what enforces
/// the protocol's ordering rule (no `h` before the client is bound).
#[derive(Debug)]
pub struct ServerNegotiation {
    params: GroupParams,
    commitment: [u8; 32],
    second_gen: GroupElement,
}

impl ServerNegotiation {
    /// Records the client's commitment, draws `s2`, and computes
    /// `h = g_b^s2`. `s2` is wiped before returning.
    pub fn respond<R: RngCore + CryptoRng>(
        params: &GroupParams,
        commitment: [u8; 32],
        rng: &mut R,
    ) -> Result<ServerNegotiation, NegotiateError> {
        let s2 = params.random_scalar(rng)?;
        ServerNegotiation::respond_with_scalar(params, commitment, s2)
    }

    /// [`ServerNegotiation::respond`] with a caller-chosen nonzero `s2`
    /// (deterministic tests).
    pub fn respond_with_scalar(
        params: &GroupParams,
        commitment: [u8; 32],
        mut s2: Scalar,
    ) -> Result<ServerNegotiation, NegotiateError> {
        if s2.is_zero() {
            return Err(GroupError::ZeroScalar.into());
        }
        let second_gen = params.generator().pow(&s2);
        s2.wipe();
        Ok(ServerNegotiation {
            params: params.clone(),
            commitment,
            second_gen,
        })
    }

    /// The server's contribution `h`, to send in reply to the commitment.
    pub fn second_generator(&self) -> &GroupElement {
        &self.second_gen
    }

    /// Checks the revealed `g` against the commitment (constant-time),
    /// validates it, rejects `g == h`, and produces the negotiated set.
    pub fn verify_reveal(self, revealed_raw: &BigUint) -> Result<GroupParams, NegotiateError> {
        let width = self.params.element_len();
        if revealed_raw.bits().div_ceil(8) as usize > width {
            // Cannot be the committed value and cannot encode; the element
            // check reports it as the range violation it is.
            return Err(GroupError::OutOfRange.into());
        }
        let recomputed = {
            let mut hasher = Sha256::new();
            hasher.update([DS_COMMITMENT]);
            hasher.update(encode_uint(revealed_raw, width));
            hasher.finalize()
        };
        if !ct_eq(&recomputed, &self.commitment) {
            return Err(NegotiateError::CommitmentMismatch);
        }
        let revealed = self.params.validate_element(revealed_raw)?;
        if revealed == self.second_gen {
            return Err(NegotiateError::GeneratorsEqual);
        }
        Ok(self
            .params
            .with_generators(revealed.value().clone(), self.second_gen.value().clone())?)
    }
}
