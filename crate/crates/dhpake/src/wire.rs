//! Byte-level message framing for the handshake.
//!
//! Every frame is `version(1) || msg_type(1) || length(2, big-endian) ||
//! payload`, carried over any reliable ordered byte stream. The layout is
//! the wire contract, bit-exact; a 2048-bit element (256 bytes) fits the
//! two-byte length field with room to spare, so there is no fragmentation.
//!
//! The handshake's share messages have distinct types rather than
//! positions so the two sides' shares can travel in either order.

use std::fmt;
use std::io::{self, Read, Write};

/// Protocol version byte carried by every frame.
pub const WIRE_VERSION: u8 = 0x01;

/// Maximum payload length representable by the length field.
pub const MAX_PAYLOAD: usize = 65_535;

/// Frame header length: version, type, two length bytes.
const HEADER_LEN: usize = 4;

/// Message types. The discriminants are the on-wire bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    /// Client's hash commitment to its negotiated generator.
    Commit = 0x01,
    /// Server's second-generator contribution.
    HGen = 0x02,
    /// Client's reveal of the committed generator.
    Reveal = 0x03,
    /// Client's masked share (`y1`).
    ClientShare = 0x10,
    /// Server's masked share (`y2`).
    ServerShare = 0x11,
    /// Server's key-confirmation tag (`v1`).
    ServerVerifier = 0x20,
    /// Client's key-confirmation tag (`v2`).
    ClientVerifier = 0x21,
    /// Parameter-set announcement (payload: the set name).
    ParamSet = 0x30,
    /// Session abort with a short reason string.
    Abort = 0xff,
}

impl MsgType {
    /// Parses a wire byte into a message type.
    pub fn from_byte(b: u8) -> Option<MsgType> {
        Some(match b {
            0x01 => MsgType::Commit,
            0x02 => MsgType::HGen,
            0x03 => MsgType::Reveal,
            0x10 => MsgType::ClientShare,
            0x11 => MsgType::ServerShare,
            0x20 => MsgType::ServerVerifier,
            0x21 => MsgType::ClientVerifier,
            0x30 => MsgType::ParamSet,
            0xff => MsgType::Abort,
            _ => return None,
        })
    }

    /// The on-wire byte for this type.
    pub fn byte(self) -> u8 {
        self as u8
    }
}

/// Framing errors.
#[derive(Debug, thiserror::Error)]
pub enum WireError {
    /// First byte was not [`WIRE_VERSION`].
    #[error("unsupported wire version {0:#04x}")]
    BadVersion(u8),
    /// Unrecognized message-type byte.
    #[error("unknown message type {0:#04x}")]
    UnknownType(u8),
    /// Input ended before the declared frame did.
    #[error("truncated frame")]
    Truncated,
    /// Input continued past the declared frame end.
    #[error("frame length mismatch: {trailing} trailing byte(s)")]
    LengthMismatch {
        /// Bytes present beyond the declared payload.
        trailing: usize,
    },
    /// Payload cannot be represented in the 2-byte length field.
    #[error("payload of {len} bytes exceeds the {MAX_PAYLOAD}-byte frame limit")]
    PayloadTooLong {
        /// Attempted payload length.
        len: usize,
    },
    /// Transport failure while reading or writing a frame.
    #[error("transport: {0}")]
    Io(#[from] io::Error),
}

/// One framed handshake message.
#[derive(Clone, PartialEq, Eq)]
pub struct WireMessage {
    msg_type: MsgType,
    payload: Vec<u8>,
}

impl fmt::Debug for WireMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "WireMessage({:?}, {} byte payload)",
            self.msg_type,
            self.payload.len()
        )
    }
}

impl WireMessage {
    /// Builds a frame, rejecting payloads the length field cannot carry.
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Result<WireMessage, WireError> {
        if payload.len() > MAX_PAYLOAD {
            return Err(WireError::PayloadTooLong { len: payload.len() });
        }
        Ok(WireMessage { msg_type, payload })
    }

    /// The message type.
    pub fn msg_type(&self) -> MsgType {
        self.msg_type
    }

    /// The payload bytes.
    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Serializes to `version || msg_type || length || payload`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.push(WIRE_VERSION);
        out.push(self.msg_type.byte());
        out.extend_from_slice(&(self.payload.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses one complete frame; trailing bytes are an error.
    pub fn decode(bytes: &[u8]) -> Result<WireMessage, WireError> {
        if bytes.len() < HEADER_LEN {
            return Err(WireError::Truncated);
        }
        if bytes[0] != WIRE_VERSION {
            return Err(WireError::BadVersion(bytes[0]));
        }
        let msg_type = MsgType::from_byte(bytes[1]).ok_or(WireError::UnknownType(bytes[1]))?;
        let declared = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
        let available = bytes.len() - HEADER_LEN;
        if available < declared {
            return Err(WireError::Truncated);
        }
        if available > declared {
            return Err(WireError::LengthMismatch {
                trailing: available - declared,
            });
        }
        Ok(WireMessage {
            msg_type,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }
}

/// Writes one frame to a stream.
pub fn write_message<W: Write>(w: &mut W, msg: &WireMessage) -> Result<(), WireError> {
    w.write_all(&msg.encode())?;
    Ok(())
}

/// Reads exactly one frame from a stream.
///
/// The header is validated before the payload is read, so oversized or
/// garbage input is rejected without buffering it.
pub fn read_message<R: Read>(r: &mut R) -> Result<WireMessage, WireError> {
    match read_message_or_eof(r)? {
        Some(msg) => Ok(msg),
        None => Err(WireError::Truncated),
    }
}

/// Like [`read_message`], but a clean end-of-stream before any header
/// byte yields `Ok(None)` instead of an error.
pub fn read_message_or_eof<R: Read>(r: &mut R) -> Result<Option<WireMessage>, WireError> {
    let mut header = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        let n = r.read(&mut header[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(None);
            }
            return Err(WireError::Truncated);
        }
        filled += n;
    }
    if header[0] != WIRE_VERSION {
        return Err(WireError::BadVersion(header[0]));
    }
    let msg_type = MsgType::from_byte(header[1]).ok_or(WireError::UnknownType(header[1]))?;
    let declared = u16::from_be_bytes([header[2], header[3]]) as usize;
    let mut payload = vec![0u8; declared];
    r.read_exact(&mut payload).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            WireError::Truncated
        } else {
            WireError::Io(e)
        }
    })?;
    Ok(Some(WireMessage { msg_type, payload }))
}
