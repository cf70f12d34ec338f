//! `dhpake`: password-authenticated key exchange over TCP, plus a
//! desk-scale verification harness.
//!
//! One side listens, the other connects, both know a password; on
//! success each prints the same session-key fingerprint. Exit codes are
//! part of the contract: 0 is mutual authentication, 2 is an
//! authentication failure (wrong password), 3 is anything operational
//! (usage, transport, bind, malformed peer).

mod client;
mod common;
mod oracle_cmd;
mod server;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dhpake",
    version,
    about = "Password-authenticated key exchange demo (TCP client/server)",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args)]
struct NetArgs {
    /// Accept handshakes on HOST:PORT (server role).
    #[arg(long, value_name = "HOST:PORT", conflicts_with = "connect")]
    listen: Option<String>,

    /// Connect to a listening peer at HOST:PORT (client role).
    #[arg(long, value_name = "HOST:PORT")]
    connect: Option<String>,

    /// Builtin parameter-set name (`toy23`, `modp2048`) or a parameter
    /// file path.
    #[arg(long, value_name = "NAME|FILE")]
    params: Option<String>,

    /// Run the commit-reveal negotiation of fresh generators instead of
    /// using the set's fixed pair. Both sides must agree.
    #[arg(long)]
    negotiate: bool,

    /// Server only: send the server share as soon as parameters are
    /// settled, without waiting for the client share.
    #[arg(long, requires = "listen")]
    eager: bool,

    /// Read the password from this environment variable.
    #[arg(long, value_name = "VAR")]
    password_env: Option<String>,

    /// Password on the command line. Insecure (visible in process
    /// listings); for scripted tests only.
    #[arg(long, value_name = "STRING", conflicts_with = "password_env")]
    password: Option<String>,

    /// Deterministic RNG seed. Test aid; accepted only with toy-scale
    /// parameter sets.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive desk-scale checks of the exchange's algebra.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand)]
enum OracleAction {
    /// Run every check the parameter set admits and report one line each.
    Run(OracleArgs),
}

#[derive(Args)]
struct OracleArgs {
    /// Builtin parameter-set name or a parameter file path.
    #[arg(long, value_name = "NAME|FILE")]
    params: String,

    /// Replay trials to run.
    #[arg(long, value_name = "N", default_value_t = 100)]
    trials: u64,

    /// Deterministic RNG seed for the randomized checks.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn net_mode(net: NetArgs) -> u8 {
    let params_arg = match &net.params {
        Some(p) => p,
        None => {
            eprintln!("error: --params NAME|FILE is required");
            return 3;
        }
    };
    let params = match common::load_params(params_arg) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 3;
        }
    };
    let password = match common::resolve_password(&net.password_env, &net.password) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 3;
        }
    };
    if let Err(msg) = common::check_seed(net.seed, &params) {
        eprintln!("error: {msg}");
        return 3;
    }
    match (net.listen, net.connect) {
        (Some(addr), None) => server::run(server::ServerConfig {
            addr,
            params,
            password,
            negotiate: net.negotiate,
            eager: net.eager,
            seed: net.seed,
        }),
        (None, Some(addr)) => client::run(client::ClientConfig {
            addr,
            params,
            password,
            negotiate: net.negotiate,
            seed: net.seed,
        }),
        _ => {
            eprintln!("error: specify exactly one of --listen or --connect (or the `oracle` subcommand)");
            3
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are operational errors (exit 3); clap's
            // default of 2 would collide with "authentication failed".
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Some(Command::Oracle { action: OracleAction::Run(args) }) => oracle_cmd::run(&args),
        None => net_mode(cli.net),
    };
    ExitCode::from(code)
}
