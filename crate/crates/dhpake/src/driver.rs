//! Session drivers: feed inbound frames in, get outbound frames out.
//!
//! A driver owns one side's session state and enforces the only message
//! order the handshake accepts:
//!
//! ```text
//! client -> server: PARAMSET
//! optional negotiation: COMMIT -> HGEN -> REVEAL
//! shares: CLIENT_SHARE / SERVER_SHARE, either direction first
//! server -> client: SERVER_VERIFIER (only after keying material exists)
//! client -> server: CLIENT_VERIFIER (only after the server's tag checks)
//! ```
//!
//! Anything else (wrong type for the phase, malformed payload, parameter
//! disagreement) fails the handshake; the caller is expected to send the
//! peer an abort frame built from [`abort_frame`] and close. A driver
//! never produces a verifier before its keying material exists and never
//! releases the session key before its peer is confirmed; those gates are
//! inherited from the typestate session underneath, surfacing here as
//! [`HandshakeError::WrongPhase`].
//!
//! Drivers are transport-agnostic: the caller moves bytes. See the CLI
//! crate for the TCP pairing.

use std::mem;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

use crate::group::{GroupError, GroupParams};
use crate::negotiate::{ClientNegotiation, NegotiateError, ServerNegotiation};
use crate::protocol::{
    AmplifiedSession, ConfirmedSession, PasswordExponent, ProtocolError, Role, SessionKey,
    StartedSession, Verifier,
};
use crate::wire::{MsgType, WireError, WireMessage};

/// Driver-level handshake failures.
#[derive(Debug, thiserror::Error)]
pub enum HandshakeError {
    /// Protocol-phase failure (bad peer element, verifier mismatch, ...).
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    /// Negotiation failure (commitment mismatch, bad generator, ...).
    #[error(transparent)]
    Negotiate(#[from] NegotiateError),
    /// Group-level failure outside a protocol op.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Frame construction failure; unreachable for protocol-sized
    /// payloads.
    #[error(transparent)]
    Wire(#[from] WireError),
    /// A frame type the current phase does not accept.
    #[error("unexpected {got:?} while {phase}")]
    UnexpectedMessage {
        /// Type actually received.
        got: MsgType,
        /// What the driver was doing.
        phase: &'static str,
    },
    /// Structurally invalid payload for the frame type.
    #[error("malformed {msg:?} payload: {reason}")]
    BadPayload {
        /// Frame type carrying the payload.
        msg: MsgType,
        /// What was wrong.
        reason: &'static str,
    },
    /// The peer announced a different parameter set.
    #[error("parameter set mismatch: ours `{ours}`, peer announced `{theirs}`")]
    ParamSetMismatch {
        /// Locally configured set name.
        ours: String,
        /// Name the peer announced.
        theirs: String,
    },
    /// The peer sent an abort frame; the string is its stated reason.
    #[error("peer aborted: {0}")]
    PeerAborted(String),
    /// An output was requested from the wrong phase (session key before
    /// the handshake finished, frames after it failed).
    #[error("wrong phase: {0}")]
    WrongPhase(&'static str),
}

/// Coarse driver state for callers that poll.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandshakeStatus {
    /// More frames are expected.
    InProgress,
    /// Mutual confirmation reached; the session key is available.
    Established,
    /// The handshake failed; the driver accepts nothing further.
    Failed,
}

/// Abort-reason string for an error, used as the abort frame payload and
/// in `REJECT <reason>` log lines.
pub fn abort_reason(err: &HandshakeError) -> &'static str {
    match err {
        HandshakeError::Protocol(ProtocolError::VerificationFailed) => "auth",
        HandshakeError::PeerAborted(_) => "peer-abort",
        HandshakeError::ParamSetMismatch { .. } => "params",
        HandshakeError::Negotiate(NegotiateError::CommitmentMismatch) => "commitment",
        HandshakeError::Negotiate(_) => "negotiate",
        HandshakeError::UnexpectedMessage { .. } => "order",
        HandshakeError::Protocol(_)
        | HandshakeError::Group(_)
        | HandshakeError::Wire(_)
        | HandshakeError::BadPayload { .. }
        | HandshakeError::WrongPhase(_) => "protocol",
    }
}

/// Builds the abort frame carrying a short reason string.
pub fn abort_frame(reason: &str) -> WireMessage {
    WireMessage::new(MsgType::Abort, reason.as_bytes().to_vec())
        .expect("abort reasons are far below the frame limit")
}

/// True when a failure means "the password check failed" rather than a
/// transport or protocol defect: a local verifier mismatch, or the peer
/// aborting with the auth reason after its own check failed.
pub fn is_auth_failure(err: &HandshakeError) -> bool {
    matches!(
        err,
        HandshakeError::Protocol(ProtocolError::VerificationFailed)
    ) || matches!(err, HandshakeError::PeerAborted(r) if r == "auth")
}

fn element_payload(msg: &WireMessage, width: usize) -> Result<BigUint, HandshakeError> {
    if msg.payload().len() != width {
        return Err(HandshakeError::BadPayload {
            msg: msg.msg_type(),
            reason: "wrong element width",
        });
    }
    Ok(BigUint::from_bytes_be(msg.payload()))
}

fn tag_payload(msg: &WireMessage) -> Result<[u8; 32], HandshakeError> {
    msg.payload()
        .try_into()
        .map_err(|_| HandshakeError::BadPayload {
            msg: msg.msg_type(),
            reason: "expected exactly 32 bytes",
        })
}

enum ClientState {
    AwaitSecondGen { neg: ClientNegotiation },
    AwaitServerShare { session: StartedSession },
    AwaitServerVerifier { session: AmplifiedSession },
    Done { session: ConfirmedSession },
    Failed,
}

/// Client-side driver.
///
/// Construction immediately yields the opening frames (parameter-set
/// announcement, then either the generator commitment or the client
/// share); each inbound frame may yield more. The share goes out before
/// anything is heard from the server: it depends only on local values.
pub struct ClientHandshake<R: RngCore + CryptoRng> {
    pass: PasswordExponent,
    rng: R,
    state: ClientState,
}

impl<R: RngCore + CryptoRng> ClientHandshake<R> {
    /// Opens a client handshake; returns the driver and the frames to
    /// send first.
    pub fn new(
        params: &GroupParams,
        pass: PasswordExponent,
        negotiate: bool,
        mut rng: R,
    ) -> Result<(Self, Vec<WireMessage>), HandshakeError> {
        let mut out = vec![WireMessage::new(
            MsgType::ParamSet,
            params.name().as_bytes().to_vec(),
        )?];
        let state = if negotiate {
            let neg = ClientNegotiation::start(params, &mut rng)?;
            out.push(WireMessage::new(
                MsgType::Commit,
                neg.commitment().to_vec(),
            )?);
            ClientState::AwaitSecondGen { neg }
        } else {
            let (session, share) = StartedSession::start(Role::Client, params, &pass, &mut rng)?;
            out.push(WireMessage::new(MsgType::ClientShare, share.encode())?);
            ClientState::AwaitServerShare { session }
        };
        Ok((ClientHandshake { pass, rng, state }, out))
    }

    /// Feeds one inbound frame; returns the frames to send in response.
    ///
    /// Any error leaves the driver failed: send the peer
    /// `abort_frame(abort_reason(&err))` and close.
    pub fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<WireMessage>, HandshakeError> {
        let state = mem::replace(&mut self.state, ClientState::Failed);
        if msg.msg_type() == MsgType::Abort {
            return Err(HandshakeError::PeerAborted(
                String::from_utf8_lossy(msg.payload()).into_owned(),
            ));
        }
        match (state, msg.msg_type()) {
            (ClientState::AwaitSecondGen { neg }, MsgType::HGen) => {
                let width = neg.chosen_generator().params().element_len();
                let h_raw = element_payload(msg, width)?;
                let reveal =
                    WireMessage::new(MsgType::Reveal, neg.chosen_generator().encode())?;
                let negotiated = neg.finish(&h_raw)?;
                let (session, share) =
                    StartedSession::start(Role::Client, &negotiated, &self.pass, &mut self.rng)?;
                let y1 = WireMessage::new(MsgType::ClientShare, share.encode())?;
                self.state = ClientState::AwaitServerShare { session };
                Ok(vec![reveal, y1])
            }
            (ClientState::AwaitServerShare { session }, MsgType::ServerShare) => {
                let width = session.share().params().element_len();
                let raw = element_payload(msg, width)?;
                let session = session.absorb(&raw)?;
                self.state = ClientState::AwaitServerVerifier { session };
                Ok(vec![])
            }
            (ClientState::AwaitServerVerifier { session }, MsgType::ServerVerifier) => {
                let v1 = Verifier::from_bytes(tag_payload(msg)?);
                // The server must prove itself first; only a verified v1
                // unlocks our own tag.
                let session = session.confirm(&v1)?;
                let v2 = WireMessage::new(
                    MsgType::ClientVerifier,
                    session.verifier().as_bytes().to_vec(),
                )?;
                self.state = ClientState::Done { session };
                Ok(vec![v2])
            }
            (state, got) => {
                let phase = match state {
                    ClientState::AwaitSecondGen { .. } => "awaiting second generator",
                    ClientState::AwaitServerShare { .. } => "awaiting server share",
                    ClientState::AwaitServerVerifier { .. } => "awaiting server verifier",
                    ClientState::Done { .. } => "already established",
                    ClientState::Failed => "already failed",
                };
                Err(HandshakeError::UnexpectedMessage { got, phase })
            }
        }
    }

    /// Current coarse status.
    pub fn status(&self) -> HandshakeStatus {
        match self.state {
            ClientState::Done { .. } => HandshakeStatus::Established,
            ClientState::Failed => HandshakeStatus::Failed,
            _ => HandshakeStatus::InProgress,
        }
    }

    /// The session key, available only once established.
    pub fn session_key(&self) -> Result<SessionKey, HandshakeError> {
        match &self.state {
            ClientState::Done { session } => Ok(session.session_key()),
            _ => Err(HandshakeError::WrongPhase(
                "session key requested before the handshake established",
            )),
        }
    }
}

/// Server behavior switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct ServerOptions {
    /// Require the commit-reveal generator negotiation.
    pub negotiate: bool,
    /// Send the server share as soon as the parameter set (and, when
    /// negotiating, the reveal) is settled, without waiting for the
    /// client share.
    pub eager: bool,
}

enum ServerState {
    AwaitParamSet,
    AwaitCommit,
    AwaitReveal { neg: ServerNegotiation },
    AwaitClientShare { session: StartedSession, share_sent: bool },
    AwaitClientVerifier { session: AmplifiedSession },
    Done { session: ConfirmedSession },
    Failed,
}

/// Server-side driver. Purely reactive: all output is a response to
/// inbound frames, starting with the client's parameter-set announcement.
pub struct ServerHandshake<R: RngCore + CryptoRng> {
    params: GroupParams,
    pass: PasswordExponent,
    rng: R,
    options: ServerOptions,
    state: ServerState,
}

impl<R: RngCore + CryptoRng> ServerHandshake<R> {
    /// Opens a server handshake for one connection.
    pub fn new(
        params: &GroupParams,
        pass: PasswordExponent,
        options: ServerOptions,
        rng: R,
    ) -> ServerHandshake<R> {
        ServerHandshake {
            params: params.clone(),
            pass,
            rng,
            options,
            state: ServerState::AwaitParamSet,
        }
    }

    fn start_session(
        &mut self,
        params: &GroupParams,
    ) -> Result<(StartedSession, WireMessage), HandshakeError> {
        let (session, share) = StartedSession::start(Role::Server, params, &self.pass, &mut self.rng)?;
        let frame = WireMessage::new(MsgType::ServerShare, share.encode())?;
        Ok((session, frame))
    }

    /// Feeds one inbound frame; returns the frames to send in response.
    /// Same failure contract as [`ClientHandshake::on_message`].
    pub fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<WireMessage>, HandshakeError> {
        let state = mem::replace(&mut self.state, ServerState::Failed);
        if msg.msg_type() == MsgType::Abort {
            return Err(HandshakeError::PeerAborted(
                String::from_utf8_lossy(msg.payload()).into_owned(),
            ));
        }
        match (state, msg.msg_type()) {
            (ServerState::AwaitParamSet, MsgType::ParamSet) => {
                let theirs = std::str::from_utf8(msg.payload()).map_err(|_| {
                    HandshakeError::BadPayload {
                        msg: MsgType::ParamSet,
                        reason: "set name is not UTF-8",
                    }
                })?;
                if theirs != self.params.name() {
                    return Err(HandshakeError::ParamSetMismatch {
                        ours: self.params.name().to_string(),
                        theirs: theirs.to_string(),
                    });
                }
                if self.options.negotiate {
                    self.state = ServerState::AwaitCommit;
                    return Ok(vec![]);
                }
                // The share depends only on local values, so the session
                // starts now; eager mode ships it immediately.
                let params = self.params.clone();
                let (session, share_frame) = self.start_session(&params)?;
                let out = if self.options.eager {
                    vec![share_frame]
                } else {
                    vec![]
                };
                self.state = ServerState::AwaitClientShare {
                    session,
                    share_sent: self.options.eager,
                };
                Ok(out)
            }
            (ServerState::AwaitCommit, MsgType::Commit) => {
                let commitment = tag_payload(msg)?;
                let neg = ServerNegotiation::respond(&self.params, commitment, &mut self.rng)?;
                let hgen =
                    WireMessage::new(MsgType::HGen, neg.second_generator().encode())?;
                self.state = ServerState::AwaitReveal { neg };
                Ok(vec![hgen])
            }
            (ServerState::AwaitReveal { neg }, MsgType::Reveal) => {
                let raw = element_payload(msg, self.params.element_len())?;
                let negotiated = neg.verify_reveal(&raw)?;
                let (session, share_frame) = self.start_session(&negotiated)?;
                let out = if self.options.eager {
                    vec![share_frame]
                } else {
                    vec![]
                };
                self.state = ServerState::AwaitClientShare {
                    session,
                    share_sent: self.options.eager,
                };
                Ok(out)
            }
            (ServerState::AwaitClientShare { session, share_sent }, MsgType::ClientShare) => {
                let width = session.share().params().element_len();
                let raw = element_payload(msg, width)?;
                let share_frame =
                    WireMessage::new(MsgType::ServerShare, session.share().encode())?;
                let session = session.absorb(&raw)?;
                let mut out = Vec::new();
                if !share_sent {
                    out.push(share_frame);
                }
                // km exists precisely here; v1 is never emitted earlier.
                out.push(WireMessage::new(
                    MsgType::ServerVerifier,
                    session.verifier().as_bytes().to_vec(),
                )?);
                self.state = ServerState::AwaitClientVerifier { session };
                Ok(out)
            }
            (ServerState::AwaitClientVerifier { session }, MsgType::ClientVerifier) => {
                let v2 = Verifier::from_bytes(tag_payload(msg)?);
                let session = session.confirm(&v2)?;
                self.state = ServerState::Done { session };
                Ok(vec![])
            }
            (state, got) => {
                let phase = match state {
                    ServerState::AwaitParamSet => "awaiting parameter-set announcement",
                    ServerState::AwaitCommit => "awaiting generator commitment",
                    ServerState::AwaitReveal { .. } => "awaiting generator reveal",
                    ServerState::AwaitClientShare { .. } => "awaiting client share",
                    ServerState::AwaitClientVerifier { .. } => "awaiting client verifier",
                    ServerState::Done { .. } => "already established",
                    ServerState::Failed => "already failed",
                };
                Err(HandshakeError::UnexpectedMessage { got, phase })
            }
        }
    }

    /// Current coarse status.
    pub fn status(&self) -> HandshakeStatus {
        match self.state {
            ServerState::Done { .. } => HandshakeStatus::Established,
            ServerState::Failed => HandshakeStatus::Failed,
            _ => HandshakeStatus::InProgress,
        }
    }

    /// The session key, available only once established.
    pub fn session_key(&self) -> Result<SessionKey, HandshakeError> {
        match &self.state {
            ServerState::Done { session } => Ok(session.session_key()),
            _ => Err(HandshakeError::WrongPhase(
                "session key requested before the handshake established",
            )),
        }
    }
}
