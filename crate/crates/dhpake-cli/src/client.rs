//! The connecting side: one handshake, fingerprint to stdout on success.

use std::net::TcpStream;
use std::time::Duration;

use dhpake::driver::{
    abort_frame, abort_reason, is_auth_failure, ClientHandshake, HandshakeStatus,
};
use dhpake::group::GroupParams;
use dhpake::protocol::PasswordExponent;
use dhpake::wire::{read_message_or_eof, write_message};

use crate::common::{fingerprint, DemoRng};

pub struct ClientConfig {
    pub addr: String,
    pub params: GroupParams,
    pub password: Vec<u8>,
    pub negotiate: bool,
    pub seed: Option<u64>,
}

pub fn run(cfg: ClientConfig) -> u8 {
    let pass = match PasswordExponent::derive(&cfg.password, &cfg.params) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let mut stream = match TcpStream::connect(&cfg.addr) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot connect to {}: {e}", cfg.addr);
            return 3;
        }
    };
    let _ = stream.set_read_timeout(Some(Duration::from_secs(10)));
    let _ = stream.set_write_timeout(Some(Duration::from_secs(10)));

    let rng = DemoRng::new(cfg.seed);
    let (mut handshake, opening) =
        match ClientHandshake::new(&cfg.params, pass, cfg.negotiate, rng) {
            Ok(pair) => pair,
            Err(e) => {
                eprintln!("error: {e}");
                return 3;
            }
        };
    for frame in &opening {
        if let Err(e) = write_message(&mut stream, frame) {
            eprintln!("error: send failed: {e}");
            return 3;
        }
    }

    loop {
        let msg = match read_message_or_eof(&mut stream) {
            Ok(Some(msg)) => msg,
            Ok(None) => {
                eprintln!("error: server closed the connection mid-handshake");
                return 3;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 3;
            }
        };
        match handshake.on_message(&msg) {
            Ok(replies) => {
                for reply in &replies {
                    if let Err(e) = write_message(&mut stream, reply) {
                        eprintln!("error: send failed: {e}");
                        return 3;
                    }
                }
                if handshake.status() == HandshakeStatus::Established {
                    let key = handshake.session_key().expect("established");
                    println!("{}", fingerprint(&key));
                    return 0;
                }
            }
            Err(err) => {
                // Tell the peer why before hanging up; its log will show
                // the same reason this exit code reports.
                let _ = write_message(&mut stream, &abort_frame(abort_reason(&err)));
                if is_auth_failure(&err) {
                    eprintln!("authentication failed");
                    return 2;
                }
                eprintln!("error: {err}");
                return 3;
            }
        }
    }
}
