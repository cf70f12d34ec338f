//! Desk-scale verification harness: exhaustive checks that only work in
//! groups small enough to enumerate.
//!
//! Everything here would be nonsense against production parameters, and
//! that is the point. In a group where the discrete log is easy, every
//! claim the protocol makes about its algebra can be checked by brute
//! force: that matching passwords always meet at `g^(r1*r2)`, that
//! mismatched passwords collide exactly when `r1 + r2` wraps to zero,
//! that the password mask `h^pass` makes every share equally likely, and
//! that a recorded transcript dies against a server that picked a fresh
//! ephemeral.
//!
//! A note on the toy group's second generator: the protocol's security
//! argument needs `log_g h` to be unknown, because anyone who knows
//! `h = g^a` can strip the password mask from a share (compute
//! `y / g^(a*guess)` for each candidate and test offline). In `toy23`
//! that log is not just knowable but tiny (`h = 4 = g^2`), so the toy
//! group offers no secrecy whatsoever. The harness does not care: it
//! checks that the arithmetic does what it should, not that the
//! arithmetic is hard to invert. [`dlog_bruteforce`] exists precisely to
//! exploit the smallness.
//!
//! Every operation is deterministic given its inputs (and seed, for
//! [`replay_experiment`]) and either returns a report of what it counted
//! or fails with a minimal counterexample.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{CryptoRng, RngCore};

use crate::group::{GroupElement, GroupError, GroupParams, Scalar};
use crate::protocol::{PasswordExponent, ProtocolError, Role, StartedSession};

/// Largest subgroup order the enumeration operations accept.
///
/// Purely a hang-guard: enumerating a full-size group would not finish,
/// so refuse it up front rather than spin.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

/// Harness failures.
#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    /// The subgroup order exceeds [`ENUMERATION_LIMIT`].
    #[error("subgroup order exceeds the enumeration guard (q > 2^20)")]
    GroupTooLarge,
    /// Discrete-log target is not a power of the base.
    #[error("target is not a power of the base")]
    NotFound,
    /// An exhaustive check found a counterexample.
    #[error("{check}: counterexample {counterexample}")]
    AssertionFailure {
        /// Which check failed.
        check: &'static str,
        /// The offending tuple, rendered for humans.
        counterexample: String,
    },
    /// Protocol operation failed while driving sessions.
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    /// Group operation failed.
    #[error(transparent)]
    Group(#[from] GroupError),
}

fn enumeration_guard(params: &GroupParams) -> Result<u64, OracleError> {
    params
        .subgroup_order()
        .to_u64()
        .filter(|&q| q <= ENUMERATION_LIMIT)
        .ok_or(OracleError::GroupTooLarge)
}

/// Whether the subgroup is small enough for the exhaustive checks (and
/// for test aids like deterministic seeds that only make sense at toy
/// scale).
pub fn enumerable(params: &GroupParams) -> bool {
    enumeration_guard(params).is_ok()
}

/// Successive powers `base^0 .. base^(q-1)`.
fn power_table(base: &GroupElement, q: u64) -> Result<Vec<GroupElement>, OracleError> {
    let mut table = Vec::with_capacity(q as usize);
    let mut acc = base.params().identity();
    for _ in 0..q {
        table.push(acc.clone());
        acc = acc.mul(base)?;
    }
    Ok(table)
}

/// Finds `a` with `base^a = target` by scanning all of `[0, q-1]`.
///
/// Linear scan, nothing cleverer: the point is an independent check on
/// the exponentiation code, so it deliberately shares no logic with it.
pub fn dlog_bruteforce(
    base: &GroupElement,
    target: &GroupElement,
) -> Result<Scalar, OracleError> {
    let params = base.params();
    if params != target.params() {
        return Err(GroupError::ParamsMismatch.into());
    }
    let q = enumeration_guard(params)?;
    let mut acc = params.identity();
    for a in 0..q {
        if acc.value() == target.value() {
            return Ok(params.scalar_from_u64(a)?);
        }
        acc = acc.mul(base)?;
    }
    Err(OracleError::NotFound)
}

/// Result of [`exhaustive_km_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmCheckReport {
    /// Cases checked: all `(pass, r1, r2)` over `[1, q-1]^3`.
    pub cases: u64,
    /// Cases expected from the subgroup order.
    pub expected: u64,
}

impl fmt::Display for KmCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "km-completeness: {}/{} matching-password cases agree and equal g^(r1*r2); 0 failures",
            self.cases, self.expected
        )
    }
}

/// Runs every matching-password exchange the group admits and checks
/// both sides of each against the closed form.
///
/// For all `(pass, r1, r2)` in `[1, q-1]^3`, both keying materials are
/// computed by the raw formula `(peer_share * h^(q-pass))^r` and checked
/// against `g^(r1*r2)` from plain exponentiation. Wherever neither share
/// happens to be the identity, the same case additionally runs through
/// real session objects (the code path the network driver uses) and
/// must agree; live sessions refuse identity shares outright, which in
/// a toy group with a known `log_g h` some enumerated corners do hit,
/// so only the formula can cover the full cube.
pub fn exhaustive_km_check(params: &GroupParams) -> Result<KmCheckReport, OracleError> {
    let q = enumeration_guard(params)?;
    let expected = (q - 1) * (q - 1) * (q - 1);
    let g_pow = power_table(&params.generator(), q)?;
    let h_pow = power_table(&params.second_generator(), q)?;
    let identity = params.identity();
    let mut cases = 0u64;
    for pass_e in 1..q {
        let pass = PasswordExponent::from_scalar(params.scalar_from_u64(pass_e)?, params)?;
        for r1 in 1..q {
            for r2 in 1..q {
                let y1 = g_pow[r1 as usize].mul(&h_pow[pass_e as usize])?;
                let y2 = g_pow[r2 as usize].mul(&h_pow[pass_e as usize])?;
                let unmask = &h_pow[(q - pass_e) as usize];
                let km_c = y2.mul(unmask)?.pow_vartime(&BigUint::from(r1));
                let km_s = y1.mul(unmask)?.pow_vartime(&BigUint::from(r2));
                let closed_form = g_pow[(r1 * r2 % q) as usize].value();
                if km_c.value() != km_s.value() || km_c.value() != closed_form {
                    return Err(OracleError::AssertionFailure {
                        check: "km-completeness",
                        counterexample: format!(
                            "pass={pass_e} r1={r1} r2={r2}: client {}, server {}, closed form {closed_form}",
                            km_c.value(),
                            km_s.value()
                        ),
                    });
                }
                if y1.value() != identity.value() && y2.value() != identity.value() {
                    let (client, live_y1) = StartedSession::start_with_ephemeral(
                        Role::Client,
                        params,
                        &pass,
                        params.scalar_from_u64(r1)?,
                    )?;
                    let (server, live_y2) = StartedSession::start_with_ephemeral(
                        Role::Server,
                        params,
                        &pass,
                        params.scalar_from_u64(r2)?,
                    )?;
                    let live_c = client.absorb(live_y2.value())?;
                    let live_s = server.absorb(live_y1.value())?;
                    if live_c.keying_material().element().value() != km_c.value()
                        || live_s.keying_material().element().value() != km_s.value()
                    {
                        return Err(OracleError::AssertionFailure {
                            check: "km-completeness",
                            counterexample: format!(
                                "pass={pass_e} r1={r1} r2={r2}: live sessions disagree with the formula"
                            ),
                        });
                    }
                }
                cases += 1;
            }
        }
    }
    debug_assert_eq!(cases, expected);
    Ok(KmCheckReport { cases, expected })
}

/// Result of [`mismatch_anomaly_census`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusReport {
    /// Mismatched-password cases examined.
    pub cases: u64,
    /// Cases where both sides still derived the same keying material.
    pub collisions: u64,
}

impl fmt::Display for CensusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mismatch-census: {}/{} mismatched-password cases collide; every collision has r1+r2 \u{2261} 0 (mod q)",
            self.collisions, self.cases
        )
    }
}

/// Characterizes exactly when mismatched passwords still collide.
///
/// With passwords differing by `d`, the two keying materials differ by
/// the factor `h^(d*(r1+r2))`, so they coincide precisely when
/// `r1 + r2 ≡ 0 (mod q)`. The census enumerates every mismatched case
/// and checks that equivalence in both directions.
///
/// Keying material is computed here by the raw formula
/// `(peer_share * h^(q-pass))^r` rather than through session objects:
/// some mismatched cases land on the identity, which live sessions
/// refuse outright (they abort instead of producing a key), but the
/// census is about the algebra underneath that refusal.
pub fn mismatch_anomaly_census(params: &GroupParams) -> Result<CensusReport, OracleError> {
    let q = enumeration_guard(params)?;
    let g_pow = power_table(&params.generator(), q)?;
    let h_pow = power_table(&params.second_generator(), q)?;
    let km = |own_r: u64, own_pass: u64, peer_r: u64, peer_pass: u64| {
        let peer_share = g_pow[peer_r as usize]
            .mul(&h_pow[peer_pass as usize])
            .expect("same parameter set");
        peer_share
            .mul(&h_pow[(q - own_pass) as usize])
            .expect("same parameter set")
            .pow_vartime(&BigUint::from(own_r))
    };
    let mut cases = 0u64;
    let mut collisions = 0u64;
    for pass_c in 1..q {
        for pass_s in 1..q {
            if pass_s == pass_c {
                continue;
            }
            for r1 in 1..q {
                for r2 in 1..q {
                    let km_c = km(r1, pass_c, r2, pass_s);
                    let km_s = km(r2, pass_s, r1, pass_c);
                    let collided = km_c.value() == km_s.value();
                    let wrapped = (r1 + r2) % q == 0;
                    if collided != wrapped {
                        return Err(OracleError::AssertionFailure {
                            check: "mismatch-census",
                            counterexample: format!(
                                "pass_c={pass_c} pass_s={pass_s} r1={r1} r2={r2}: collided={collided}, r1+r2\u{2261}0={wrapped}"
                            ),
                        });
                    }
                    cases += 1;
                    if collided {
                        collisions += 1;
                    }
                }
            }
        }
    }
    Ok(CensusReport { cases, collisions })
}

/// Result of [`masking_bijection_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskingReport {
    /// Password exponents examined (`q - 1`).
    pub passwords: u64,
    /// Share-image size observed for each (`q - 1`).
    pub image_size: u64,
}

impl fmt::Display for MaskingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "masking-bijection: {} password exponents, image size {} each, excluded element is exactly h^pass",
            self.passwords, self.image_size
        )
    }
}

/// Checks that a share reveals nothing about the password it masks.
///
/// For each password exponent, the set of possible shares
/// `{g^r * h^pass : r in [1, q-1]}` must contain `q - 1` distinct
/// elements: the whole subgroup except the single point `h^pass` that
/// the excluded ephemeral `r = 0` would have produced. Every password
/// therefore induces (almost) the same share distribution, which is what
/// denies an eavesdropper a password test.
pub fn masking_bijection_check(params: &GroupParams) -> Result<MaskingReport, OracleError> {
    let q = enumeration_guard(params)?;
    let g_pow = power_table(&params.generator(), q)?;
    let h_pow = power_table(&params.second_generator(), q)?;
    let subgroup: BTreeSet<BigUint> = g_pow.iter().map(|e| e.value().clone()).collect();
    if subgroup.len() as u64 != q {
        return Err(OracleError::AssertionFailure {
            check: "masking-bijection",
            counterexample: format!("generator produced {} distinct powers, wanted {q}", subgroup.len()),
        });
    }
    for pass in 1..q {
        let image: BTreeSet<BigUint> = (1..q)
            .map(|r| {
                g_pow[r as usize]
                    .mul(&h_pow[pass as usize])
                    .expect("same parameter set")
                    .value()
                    .clone()
            })
            .collect();
        if image.len() as u64 != q - 1 {
            return Err(OracleError::AssertionFailure {
                check: "masking-bijection",
                counterexample: format!("pass={pass}: image size {}, wanted {}", image.len(), q - 1),
            });
        }
        let mut excluded = subgroup.difference(&image);
        let missing = excluded.next();
        if missing != Some(h_pow[pass as usize].value()) || excluded.next().is_some() {
            return Err(OracleError::AssertionFailure {
                check: "masking-bijection",
                counterexample: format!("pass={pass}: excluded element is not h^pass"),
            });
        }
    }
    Ok(MaskingReport {
        passwords: q - 1,
        image_size: q - 1,
    })
}

/// Result of [`replay_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayReport {
    /// Replay trials run against fresh-ephemeral servers.
    pub trials: u64,
    /// Trials where the replayed tag was accepted (must be 0).
    pub acceptances: u64,
    /// Whether the identical-ephemeral control run accepted (must be
    /// true; it is why ephemerals have to be unique).
    pub control_accepted: bool,
    /// Whether feeding the server its own tag back was rejected (must be
    /// true; the tags are domain-separated by direction).
    pub reflection_rejected: bool,
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "replay: {}/{} replayed transcripts accepted; identical-r2 control accepted: {}; v1-as-v2 reflection rejected: {}",
            self.acceptances, self.trials, self.control_accepted, self.reflection_rejected
        )
    }
}

/// Replays a recorded transcript against servers that chose fresh
/// ephemerals, and shows both edges of the uniqueness requirement.
///
/// One honest session is recorded: the client share `y1` and the
/// client's confirmation tag `v2`. Then `trials` fresh server sessions
/// (same password, ephemeral drawn anew and constrained to differ from
/// the recorded one, mirroring the negligible repeat chance of a
/// full-size draw) each absorb the replayed `y1` and judge the replayed
/// `v2`. Every one must reject: the tag binds the transcript the
/// original server saw, not this one.
///
/// Two companion checks run once each: a control server forced onto the
/// recorded ephemeral accepts the replay (so uniqueness, not magic, is
/// what defeats it), and the server's own tag fed back as the client's
/// is rejected even with identical keying material (direction
/// separation).
///
/// Works on any parameter set, toy or full-size.
pub fn replay_experiment<R: RngCore + CryptoRng>(
    params: &GroupParams,
    trials: u64,
    rng: &mut R,
) -> Result<ReplayReport, OracleError> {
    // Record one honest session. In a toy group a draw occasionally
    // produces an identity share, which sessions refuse; redraw until
    // the recording completes (a few tries at worst, once at full size).
    let mut recording = None;
    for _ in 0..64 {
        let pass = PasswordExponent::from_scalar(params.random_scalar(rng)?, params)?;
        let r1 = params.random_scalar(rng)?;
        let r2 = params.random_scalar(rng)?;
        let recorded_r2 = r2.value().clone();
        let (client, y1) = StartedSession::start_with_ephemeral(Role::Client, params, &pass, r1)?;
        let (server, y2) = StartedSession::start_with_ephemeral(Role::Server, params, &pass, r2)?;
        let server_amp = match server.absorb(y1.value()) {
            Ok(amp) => amp,
            Err(ProtocolError::Group(GroupError::IdentityElement)) => continue,
            Err(e) => return Err(e.into()),
        };
        let client_amp = match client.absorb(y2.value()) {
            Ok(amp) => amp,
            Err(ProtocolError::Group(GroupError::IdentityElement)) => continue,
            Err(e) => return Err(e.into()),
        };
        let v1 = server_amp.verifier();
        let recorded_v2 = client_amp.confirm(&v1)?.verifier();
        recording = Some((pass, y1, recorded_r2, server_amp, v1, recorded_v2));
        break;
    }
    let (pass, y1, recorded_r2, server_amp, v1, recorded_v2) =
        recording.ok_or(OracleError::AssertionFailure {
            check: "replay-recording",
            counterexample: "64 consecutive degenerate draws while recording".to_string(),
        })?;

    // Replays against fresh servers. Any acceptance fails the whole
    // experiment, so a surviving report always records zero.
    let acceptances = 0u64;
    for trial in 0..trials {
        let fresh_r2 = loop {
            let candidate = params.random_scalar(rng)?;
            if candidate.value() != &recorded_r2 {
                break candidate;
            }
        };
        let (fresh, _) =
            StartedSession::start_with_ephemeral(Role::Server, params, &pass, fresh_r2)?;
        if fresh.absorb(y1.value())?.confirm(&recorded_v2).is_ok() {
            return Err(OracleError::AssertionFailure {
                check: "replay",
                counterexample: format!(
                    "trial {trial}: fresh-ephemeral server accepted a replayed tag"
                ),
            });
        }
    }

    // Control: the same ephemeral reproduces the transcript, so the
    // replay goes through.
    let (control, _) = StartedSession::start_with_ephemeral(
        Role::Server,
        params,
        &pass,
        params.scalar(recorded_r2)?,
    )?;
    let control_accepted = control.absorb(y1.value())?.confirm(&recorded_v2).is_ok();
    if !control_accepted {
        return Err(OracleError::AssertionFailure {
            check: "replay-control",
            counterexample: "identical-ephemeral control run was rejected".to_string(),
        });
    }

    // Reflection: the server's own tag must not pass as the client's.
    let reflection_rejected = server_amp.confirm(&v1).is_err();
    if !reflection_rejected {
        return Err(OracleError::AssertionFailure {
            check: "replay-reflection",
            counterexample: "server accepted its own tag as the client's".to_string(),
        });
    }

    Ok(ReplayReport {
        trials,
        acceptances,
        control_accepted,
        reflection_rejected,
    })
}
