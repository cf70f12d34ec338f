//! Exit-code and argument-handling contract of the `dhpake` binary.

use std::io::Write;
use std::process::{Command, Output};

fn dhpake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhpake"))
        .args(args)
        .output()
        .expect("spawn dhpake")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn usage_errors_exit_3_not_2() {
    // Exit 2 is reserved for authentication failure, so misuse must not
    // produce it.
    let no_mode = dhpake(&["--params", "toy23", "--password", "pw"]);
    assert_eq!(exit_code(&no_mode), 3);

    let unknown_flag = dhpake(&["--frobnicate"]);
    assert_eq!(exit_code(&unknown_flag), 3);

    let both_modes = dhpake(&[
        "--listen", "127.0.0.1:0", "--connect", "127.0.0.1:1", "--params", "toy23",
    ]);
    assert_eq!(exit_code(&both_modes), 3);

    let eager_client = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "toy23", "--password", "pw", "--eager",
    ]);
    assert_eq!(exit_code(&eager_client), 3);

    let missing_params = dhpake(&["--connect", "127.0.0.1:1", "--password", "pw"]);
    assert_eq!(exit_code(&missing_params), 3);

    let both_password_sources = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "toy23",
        "--password", "pw", "--password-env", "X",
    ]);
    assert_eq!(exit_code(&both_password_sources), 3);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(exit_code(&dhpake(&["--help"])), 0);
    assert_eq!(exit_code(&dhpake(&["--version"])), 0);
    assert_eq!(exit_code(&dhpake(&["oracle", "run", "--help"])), 0);
}

#[test]
fn unreachable_server_exits_3() {
    // Port 1 on loopback is essentially never listening.
    let out = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "toy23", "--password", "pw",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn seed_rejected_for_full_size_params() {
    let out = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "modp2048",
        "--password", "pw", "--seed", "1",
    ]);
    assert_eq!(exit_code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("toy-scale"), "stderr: {stderr}");
}

#[test]
fn missing_password_env_exits_3() {
    let out = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "toy23",
        "--password-env", "DHPAKE_TEST_SURELY_UNSET_VARIABLE",
    ]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn command_line_password_warns() {
    let out = dhpake(&[
        "--connect", "127.0.0.1:1", "--params", "toy23", "--password", "pw",
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    assert!(stderr.contains("--password-env"), "stderr: {stderr}");
}

#[test]
fn params_file_accepted() {
    // A handwritten file describing the same toy set, via the file path.
    let mut file = tempfile::NamedTempFile::new().expect("tempfile");
    write!(file, "name=filetoy\np=17\nq=b\ng=2\nh=4\n").expect("write");
    let path = file.path().to_str().unwrap().to_string();
    let out = dhpake(&["oracle", "run", "--params", &path, "--trials", "5", "--seed", "3"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("km-completeness"), "stdout: {stdout}");
}

#[test]
fn bad_params_argument_exits_3() {
    let out = dhpake(&["oracle", "run", "--params", "/nonexistent/params.txt"]);
    assert_eq!(exit_code(&out), 3);

    let mut file = tempfile::NamedTempFile::new().expect("tempfile");
    write!(file, "name=broken\np=4\nq=2\ng=3\nh=5\n").expect("write");
    let path = file.path().to_str().unwrap().to_string();
    let out = dhpake(&["oracle", "run", "--params", &path]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn oracle_rejects_garbage_flags() {
    let out = dhpake(&["oracle", "run"]);
    // --params is required on the subcommand.
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn oracle_skips_enumerables_for_full_size_sets() {
    let out = dhpake(&["oracle", "run", "--params", "modp2048", "--trials", "2"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("km-completeness: skipped"), "stdout: {stdout}");
    assert!(stdout.contains("replay: 0/2"), "stdout: {stdout}");
}
