//! The acceptance gate: one test per shipping criterion, numbered, each
//! printing a `criterion N: PASS` line with the measured values when it
//! holds. Tolerances are pinned in the assertions, not in prose.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::process::{Child, ChildStdout, Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use dhpake::group::GroupParams;
use dhpake::mac::hmac_sha256;
use dhpake::oracle;
use dhpake::protocol::{PasswordExponent, Role, StartedSession};
use dhpake::wire::{read_message_or_eof, write_message, MsgType, WireError, WireMessage};
use dhpake::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const BIN: &str = env!("CARGO_BIN_EXE_dhpake");
const PW_VAR: &str = "DHPAKE_ACCEPTANCE_PW";

/// A spawned `dhpake --listen` process, killed on drop. The bound
/// address is parsed from its stderr, so tests always listen on port 0.
struct Server {
    child: Child,
    addr: String,
    stdout: BufReader<ChildStdout>,
}

impl Server {
    fn spawn(params: &str, password: &str, extra: &[&str]) -> Server {
        let mut child = Command::new(BIN)
            .args(["--listen", "127.0.0.1:0", "--params", params, "--password-env", PW_VAR])
            .args(extra)
            .env(PW_VAR, password)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .expect("spawn server");
        let mut stderr = BufReader::new(child.stderr.take().expect("stderr piped"));
        let mut line = String::new();
        let addr = loop {
            line.clear();
            if stderr.read_line(&mut line).expect("read server stderr") == 0 {
                panic!("server exited before announcing its address");
            }
            if let Some(rest) = line.trim().strip_prefix("listening on ") {
                break rest.to_string();
            }
        };
        // Keep draining stderr so the server never blocks on a full pipe.
        thread::spawn(move || {
            let mut sink = String::new();
            while stderr.read_line(&mut sink).map(|n| n > 0).unwrap_or(false) {
                sink.clear();
            }
        });
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Server { child, addr, stdout }
    }

    /// Next session log line (`ACCEPT <hex8>` or `REJECT <reason>`).
    fn next_line(&mut self) -> String {
        let mut line = String::new();
        let n = self.stdout.read_line(&mut line).expect("read server stdout");
        assert!(n > 0, "server stdout closed unexpectedly");
        line.trim().to_string()
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn client(addr: &str, params: &str, password: &str, extra: &[&str]) -> Output {
    Command::new(BIN)
        .args(["--connect", addr, "--params", params, "--password-env", PW_VAR])
        .args(extra)
        .env(PW_VAR, password)
        .output()
        .expect("run client")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

/// Copies one TCP direction to the peer while recording every byte.
fn record_pump(mut from: TcpStream, mut to: TcpStream) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut recorded = Vec::new();
        let mut buf = [0u8; 4096];
        loop {
            match from.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    recorded.extend_from_slice(&buf[..n]);
                    if to.write_all(&buf[..n]).is_err() {
                        break;
                    }
                }
            }
        }
        let _ = to.shutdown(Shutdown::Write);
        recorded
    })
}

/// Joins to the recorded (client-to-server, server-to-client) streams.
type TranscriptHandle = thread::JoinHandle<(Vec<u8>, Vec<u8>)>;

/// Accepts one connection and relays it to `target`, recording both
/// directions.
fn recording_proxy(target: String) -> (String, TranscriptHandle) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind proxy");
    let addr = listener.local_addr().unwrap().to_string();
    let handle = thread::spawn(move || {
        let (client_side, _) = listener.accept().expect("proxy accept");
        let server_side = TcpStream::connect(&target).expect("proxy connect");
        let c2s = record_pump(
            client_side.try_clone().expect("clone"),
            server_side.try_clone().expect("clone"),
        );
        let s2c = record_pump(server_side, client_side);
        (c2s.join().expect("c2s pump"), s2c.join().expect("s2c pump"))
    });
    (addr, handle)
}

#[test]
fn criterion_01_exhaustive_completeness() {
    let started = Instant::now();
    let out = Command::new(BIN)
        .args(["oracle", "run", "--params", "toy23", "--seed", "11"])
        .output()
        .expect("run oracle");
    let elapsed = started.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(
        stdout.contains("km-completeness: 1000/1000"),
        "stdout: {stdout}"
    );
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    // The closed form is asserted case-by-case inside the check; exit 0
    // plus the full count means zero tolerance was met.
    let report = oracle::exhaustive_km_check(&GroupParams::toy23()).expect("km check");
    assert_eq!((report.cases, report.expected), (1000, 1000));
    println!(
        "criterion 1: PASS - oracle run reported 1000/1000 matching-password cases in {elapsed:?}"
    );
}

#[test]
fn criterion_02_mismatch_census() {
    let report = oracle::mismatch_anomaly_census(&GroupParams::toy23()).expect("census");
    assert_eq!(report.cases, 9000);
    assert_eq!(report.collisions, 900);
    // The r1+r2 wraparound equivalence is asserted per case inside the
    // census (both directions); any violation would have errored.
    let out = Command::new(BIN)
        .args(["oracle", "run", "--params", "toy23", "--seed", "11"])
        .output()
        .expect("run oracle");
    assert!(
        String::from_utf8_lossy(&out.stdout).contains("mismatch-census: 900/9000"),
        "oracle run does not report the census"
    );
    println!("criterion 2: PASS - exactly 900 of 9000 mismatched cases collide, all at r1+r2 = 0 mod 11");
}

#[test]
fn criterion_03_masking_bijection() {
    let report = oracle::masking_bijection_check(&GroupParams::toy23()).expect("masking");
    assert_eq!(report.passwords, 10);
    assert_eq!(report.image_size, 10);
    // The excluded-element identity (exactly h^pass) is asserted per
    // password inside the check.
    println!("criterion 3: PASS - all 10 password exponents give share images of size 10 missing exactly h^pass");
}

#[test]
fn criterion_04_full_size_loopback_under_two_seconds() {
    let mut server = Server::spawn("modp2048", "correct horse battery staple", &[]);
    let started = Instant::now();
    let out = client(&server.addr, "modp2048", "correct horse battery staple", &[]);
    let elapsed = started.elapsed();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let fingerprint = stdout_of(&out);
    assert_eq!(fingerprint.len(), 8, "fingerprint: {fingerprint}");
    let log = server.next_line();
    assert_eq!(log, format!("ACCEPT {fingerprint}"));
    assert!(elapsed < Duration::from_secs(2), "took {elapsed:?}");
    println!(
        "criterion 4: PASS - modp2048 loopback handshake, mutual fingerprint {fingerprint}, {elapsed:?}"
    );
}

#[test]
fn criterion_05_wrong_password_hundred_trials() {
    let mut server = Server::spawn("modp2048", "the real password", &[]);
    for trial in 0..100 {
        let out = client(&server.addr, "modp2048", "not the real password", &[]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "trial {trial}: stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            out.stdout.is_empty(),
            "trial {trial}: client printed key material: {}",
            stdout_of(&out)
        );
        let log = server.next_line();
        assert_eq!(log, "REJECT auth", "trial {trial}");
    }
    println!("criterion 5: PASS - 100/100 wrong-password trials: client exit 2, server REJECT auth, no key output");
}

#[test]
fn criterion_06_replay_experiment() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let report = oracle::replay_experiment(&GroupParams::toy23(), 100, &mut rng).expect("replay");
    assert_eq!(report.trials, 100);
    assert_eq!(report.acceptances, 0);
    assert!(report.control_accepted, "identical-r2 control must accept");
    assert!(report.reflection_rejected);
    println!("criterion 6: PASS - 0/100 replays accepted; identical-r2 control accepted as predicted");
}

#[test]
fn criterion_07_single_bit_tamper_suite() {
    // Fixed toy handshake (pass exponent 3, r1=4, r2=7) whose untampered
    // run completes; every single-bit corruption of each protocol
    // message must abort it. W=1, so shares are single bytes.
    let params = GroupParams::toy23();
    let pass = PasswordExponent::from_scalar(params.scalar_from_u64(3).unwrap(), &params).unwrap();
    let start = |role, r: u64| {
        StartedSession::start_with_ephemeral(
            role,
            &params,
            &pass,
            params.scalar_from_u64(r).unwrap(),
        )
        .unwrap()
    };

    // Baseline sanity: the untampered handshake succeeds.
    {
        let (client, y1) = start(Role::Client, 4);
        let (server, y2) = start(Role::Server, 7);
        let server = server.absorb(y1.value()).unwrap();
        let client = client.absorb(y2.value()).unwrap();
        let client = client.confirm(&server.verifier()).unwrap();
        server.confirm(&client.verifier()).expect("honest run must succeed");
    }

    // A verifier corruption: (byte index, xor mask).
    type Flip = Option<(usize, u8)>;

    // Drives one handshake with optional per-message tampering; returns
    // true only on full mutual acceptance.
    let accepted = |ty1: Option<u8>, ty2: Option<u8>, tv1: Flip, tv2: Flip| -> bool {
        let (client, y1) = start(Role::Client, 4);
        let (server, y2) = start(Role::Server, 7);
        let y1_wire = ty1.map_or_else(|| y1.encode(), |m| vec![y1.encode()[0] ^ m]);
        let y2_wire = ty2.map_or_else(|| y2.encode(), |m| vec![y2.encode()[0] ^ m]);
        let server = match server.absorb(&BigUint::from_bytes_be(&y1_wire)) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let client = match client.absorb(&BigUint::from_bytes_be(&y2_wire)) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let mut v1 = *server.verifier().as_bytes();
        if let Some((i, m)) = tv1 {
            v1[i] ^= m;
        }
        let client = match client.confirm(&dhpake::protocol::Verifier::from_bytes(v1)) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let mut v2 = *client.verifier().as_bytes();
        if let Some((i, m)) = tv2 {
            v2[i] ^= m;
        }
        server
            .confirm(&dhpake::protocol::Verifier::from_bytes(v2))
            .is_ok()
    };

    let mut rejected = 0u32;
    for bit in 0..8 {
        assert!(!accepted(Some(1 << bit), None, None, None), "y1 bit {bit}");
        assert!(!accepted(None, Some(1 << bit), None, None), "y2 bit {bit}");
        rejected += 2;
    }
    for byte in 0..32 {
        for bit in 0..8 {
            assert!(
                !accepted(None, None, Some((byte, 1 << bit)), None),
                "v1 byte {byte} bit {bit}"
            );
            assert!(
                !accepted(None, None, None, Some((byte, 1 << bit))),
                "v2 byte {byte} bit {bit}"
            );
            rejected += 2;
        }
    }
    assert_eq!(rejected, 528);
    println!("criterion 7: PASS - all 528 single-bit corruptions of y1, y2, v1, v2 abort; zero acceptances");
}

#[test]
fn criterion_08_keyed_hash_conformance() {
    // Published conformance vectors for HMAC-SHA-256 (assorted key and
    // data lengths, truncated output, over-block-size keys).
    let cases: &[(&[u8], &[u8], &str)] = &[
        (
            &[0x0b; 20],
            b"Hi There",
            "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7",
        ),
        (
            b"Jefe",
            b"what do ya want for nothing?",
            "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843",
        ),
        (
            &[0xaa; 20],
            &[0xdd; 50],
            "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe",
        ),
        (
            &[
                0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x09, 0x0a, 0x0b, 0x0c, 0x0d,
                0x0e, 0x0f, 0x10, 0x11, 0x12, 0x13, 0x14, 0x15, 0x16, 0x17, 0x18, 0x19,
            ],
            &[0xcd; 50],
            "82558a389a443c0ea4cc819899f2083a85f0faa3e578f8077a2e3ff46729665b",
        ),
        (
            &[0xaa; 131],
            b"Test Using Larger Than Block-Size Key - Hash Key First",
            "60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54",
        ),
        (
            &[0xaa; 131],
            b"This is a test using a larger than block-size key and a larger than block-size data. The key needs to be hashed before being used by the HMAC algorithm.",
            "9b09ffa71b942fcb27635fbcd5b0e944bfdc63644f0713938a7f51535c3a35e2",
        ),
    ];
    for (i, (key, data, expected)) in cases.iter().enumerate() {
        let tag = hmac_sha256(key, &[data]);
        assert_eq!(hex::encode(tag), *expected, "vector {i}");
    }
    // Truncated-tag vector: first 128 bits compared.
    let tag = hmac_sha256(&[0x0c; 20], &[b"Test With Truncation"]);
    assert_eq!(hex::encode(&tag[..16]), "a3b6167473100ee06e0c796c2955552b");
    assert_eq!(7, cases.len() + 1);
    println!("criterion 8: PASS - all 7 published HMAC-SHA-256 vectors match bit-exactly");
}

/// One complete seeded toy run through the recording proxy. Fresh server
/// process per run so the connection index (and with it the per-session
/// RNG stream) restarts from the seed.
fn seeded_run(
    server_seed: u64,
    client_seed: u64,
    eager: bool,
) -> (Output, String, Vec<u8>, Vec<u8>) {
    let mut extra: Vec<String> = vec!["--seed".into(), server_seed.to_string()];
    if eager {
        extra.push("--eager".into());
    }
    let extra_refs: Vec<&str> = extra.iter().map(String::as_str).collect();
    let mut server = Server::spawn("toy23", "pw", &extra_refs);
    let (proxy_addr, recordings) = recording_proxy(server.addr.clone());
    let client_seed_str = client_seed.to_string();
    let out = client(&proxy_addr, "toy23", "pw", &["--seed", &client_seed_str]);
    let log = server.next_line();
    let (c2s, s2c) = recordings.join().expect("proxy");
    (out, log, c2s, s2c)
}

#[test]
fn criterion_09_seeded_determinism_and_eager_reordering() {
    // Scan for a seed pair whose draws complete the handshake (the toy
    // group aborts ~19% of random runs on identity shares, by design).
    let mut chosen = None;
    for base in 0..40u64 {
        let (server_seed, client_seed) = (1000 + base, 9000 + base);
        let (out, log, c2s, s2c) = seeded_run(server_seed, client_seed, false);
        if out.status.code() == Some(0) {
            assert!(log.starts_with("ACCEPT "), "log: {log}");
            chosen = Some((server_seed, client_seed, stdout_of(&out), c2s, s2c));
            break;
        }
    }
    let (server_seed, client_seed, fingerprint, c2s_1, s2c_1) =
        chosen.expect("no completing seed pair in 40 tries (p < 1e-30)");

    // Identical seeds, fresh processes: byte-identical wire transcripts.
    let (out2, log2, c2s_2, s2c_2) = seeded_run(server_seed, client_seed, false);
    assert_eq!(out2.status.code(), Some(0));
    assert_eq!(stdout_of(&out2), fingerprint);
    assert_eq!(log2, format!("ACCEPT {fingerprint}"));
    assert_eq!(c2s_1, c2s_2, "client-to-server transcripts differ across identical-seed runs");
    assert_eq!(s2c_1, s2c_2, "server-to-client transcripts differ across identical-seed runs");

    // Same seeds with --eager: the server share now precedes the client
    // share on the wire, yet keys, verifiers, and fingerprints are
    // untouched (per-direction bytes identical, only interleaving moves).
    let (out3, log3, c2s_3, s2c_3) = seeded_run(server_seed, client_seed, true);
    assert_eq!(out3.status.code(), Some(0));
    assert_eq!(stdout_of(&out3), fingerprint, "eager run changed the session key");
    assert_eq!(log3, format!("ACCEPT {fingerprint}"));
    assert_eq!(c2s_3, c2s_1, "eager run changed client bytes");
    assert_eq!(s2c_3, s2c_1, "eager run changed server bytes (keys or verifiers moved)");

    // Direct observation of the reorder: a bare parameter-set
    // announcement draws the server share from an eager server but
    // nothing from a reactive one.
    let probe = |eager: bool| -> Option<MsgType> {
        let extra: Vec<&str> = if eager {
            vec!["--seed", "77", "--eager"]
        } else {
            vec!["--seed", "77"]
        };
        let server = Server::spawn("toy23", "pw", &extra);
        let mut stream = TcpStream::connect(&server.addr).expect("connect probe");
        stream
            .set_read_timeout(Some(Duration::from_millis(500)))
            .unwrap();
        let announce = WireMessage::new(MsgType::ParamSet, b"toy23".to_vec()).unwrap();
        write_message(&mut stream, &announce).expect("send paramset");
        match read_message_or_eof(&mut stream) {
            Ok(Some(msg)) => Some(msg.msg_type()),
            Ok(None) => None,
            Err(WireError::Io(e))
                if e.kind() == std::io::ErrorKind::WouldBlock
                    || e.kind() == std::io::ErrorKind::TimedOut =>
            {
                None
            }
            Err(e) => panic!("probe transport error: {e}"),
        }
    };
    assert_eq!(probe(true), Some(MsgType::ServerShare), "eager server must lead with its share");
    assert_eq!(probe(false), None, "reactive server must wait for the client share");

    println!(
        "criterion 9: PASS - seeds ({server_seed},{client_seed}) reproduce byte-identical transcripts; --eager reorders messages, fingerprint {fingerprint} unchanged"
    );
}

#[test]
fn criterion_10_schedule_order_independence() {
    // 1000 seeded toy sessions, each driven under both share schedules:
    // client completes first (send-then-receive) vs server completes
    // first (receive-then-send). Keying material must be identical per
    // seed; degenerate draws must be degenerate under both schedules.
    let params = GroupParams::toy23();
    let mut completed = 0u32;
    for seed in 0..1000u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pass_value = params.random_scalar(&mut rng).unwrap().value().clone();
        let r1 = params.random_scalar(&mut rng).unwrap().value().clone();
        let r2 = params.random_scalar(&mut rng).unwrap().value().clone();
        let run = |client_first: bool| -> Result<(BigUint, BigUint), String> {
            let pass =
                PasswordExponent::from_scalar(params.scalar(pass_value.clone()).unwrap(), &params)
                    .unwrap();
            let (client, y1) = StartedSession::start_with_ephemeral(
                Role::Client,
                &params,
                &pass,
                params.scalar(r1.clone()).unwrap(),
            )
            .map_err(|e| e.to_string())?;
            let (server, y2) = StartedSession::start_with_ephemeral(
                Role::Server,
                &params,
                &pass,
                params.scalar(r2.clone()).unwrap(),
            )
            .map_err(|e| e.to_string())?;
            let (km_c, km_s) = if client_first {
                let c = client.absorb(y2.value()).map_err(|e| e.to_string())?;
                let s = server.absorb(y1.value()).map_err(|e| e.to_string())?;
                (
                    c.keying_material().element().value().clone(),
                    s.keying_material().element().value().clone(),
                )
            } else {
                let s = server.absorb(y1.value()).map_err(|e| e.to_string())?;
                let c = client.absorb(y2.value()).map_err(|e| e.to_string())?;
                (
                    c.keying_material().element().value().clone(),
                    s.keying_material().element().value().clone(),
                )
            };
            Ok((km_c, km_s))
        };
        match (run(true), run(false)) {
            (Ok((a_c, a_s)), Ok((b_c, b_s))) => {
                assert_eq!(a_c, a_s, "seed {seed}: sides disagree");
                assert_eq!(a_c, b_c, "seed {seed}: schedules disagree");
                assert_eq!(a_s, b_s, "seed {seed}: schedules disagree");
                completed += 1;
            }
            (Err(a), Err(b)) => assert_eq!(a, b, "seed {seed}: different failures per schedule"),
            (a, b) => panic!("seed {seed}: schedules diverged: {a:?} vs {b:?}"),
        }
    }
    assert!(completed >= 700, "only {completed}/1000 sessions completed");
    println!(
        "criterion 10: PASS - {completed}/1000 seeded sessions completed under both schedules with identical keying material (rest aborted identically)"
    );
}
