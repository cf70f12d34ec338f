//! The listening side: one handshake per connection, one log line per
//! session.
//!
//! `ACCEPT <fingerprint>` and `REJECT <reason>` go to stdout; everything
//! else (the bound address, per-connection noise) goes to stderr, so the
//! session log stays machine-readable.

use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use dhpake::driver::{
    abort_frame, abort_reason, is_auth_failure, HandshakeStatus, ServerHandshake, ServerOptions,
};
use dhpake::group::GroupParams;
use dhpake::protocol::PasswordExponent;
use dhpake::wire::{read_message_or_eof, write_message, WireError};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::common::{fingerprint, DemoRng};

pub struct ServerConfig {
    pub addr: String,
    pub params: GroupParams,
    pub password: Vec<u8>,
    pub negotiate: bool,
    pub eager: bool,
    pub seed: Option<u64>,
}

pub fn run(cfg: ServerConfig) -> u8 {
    let pass = match PasswordExponent::derive(&cfg.password, &cfg.params) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let listener = match TcpListener::bind(&cfg.addr) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", cfg.addr);
            return 3;
        }
    };
    match listener.local_addr() {
        Ok(addr) => eprintln!("listening on {addr}"),
        Err(_) => eprintln!("listening on {}", cfg.addr),
    }
    let options = ServerOptions {
        negotiate: cfg.negotiate,
        eager: cfg.eager,
    };

    if let Some(seed) = cfg.seed {
        // Deterministic test mode: serve sequentially so the log order
        // and each connection's RNG stream depend only on the seed and
        // the connection index.
        for (index, conn) in listener.incoming().enumerate() {
            match conn {
                Ok(stream) => {
                    let rng = DemoRng::Seeded(Box::new(ChaCha20Rng::seed_from_u64(
                        seed.wrapping_add(index as u64),
                    )));
                    println!("{}", handle(stream, &cfg.params, pass.clone(), options, rng));
                }
                Err(e) => eprintln!("accept failed: {e}"),
            }
        }
    } else {
        for conn in listener.incoming() {
            match conn {
                Ok(stream) => {
                    let params = cfg.params.clone();
                    let pass = pass.clone();
                    std::thread::spawn(move || {
                        // println! takes the stdout lock, so session lines
                        // from parallel connections never interleave.
                        println!("{}", handle(stream, &params, pass, options, DemoRng::Os(rand::rngs::OsRng)));
                    });
                }
                Err(e) => eprintln!("accept failed: {e}"),
            }
        }
    }
    0
}

/// Runs one handshake to completion and renders its session log line.
fn handle(
    mut stream: TcpStream,
    params: &GroupParams,
    pass: PasswordExponent,
    options: ServerOptions,
    rng: DemoRng,
) -> String {
    let _ = stream.set_read_timeout(Some(Duration::from_secs(10)));
    let _ = stream.set_write_timeout(Some(Duration::from_secs(10)));
    let mut handshake = ServerHandshake::new(params, pass, options, rng);
    loop {
        let msg = match read_message_or_eof(&mut stream) {
            Ok(Some(msg)) => msg,
            Ok(None) => return "REJECT disconnect".to_string(),
            Err(WireError::Io(_)) => return "REJECT transport".to_string(),
            Err(_) => {
                let _ = write_message(&mut stream, &abort_frame("protocol"));
                return "REJECT frame".to_string();
            }
        };
        match handshake.on_message(&msg) {
            Ok(replies) => {
                for reply in &replies {
                    if write_message(&mut stream, reply).is_err() {
                        return "REJECT transport".to_string();
                    }
                }
                if handshake.status() == HandshakeStatus::Established {
                    let key = handshake.session_key().expect("established");
                    return format!("ACCEPT {}", fingerprint(&key));
                }
            }
            Err(err) => {
                let reason = if is_auth_failure(&err) {
                    "auth"
                } else {
                    abort_reason(&err)
                };
                let _ = write_message(&mut stream, &abort_frame(reason));
                return format!("REJECT {reason}");
            }
        }
    }
}
