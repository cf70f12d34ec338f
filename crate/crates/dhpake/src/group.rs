//! Prime-order subgroups of `F_p*`: parameters, elements, and scalars.
//!
//! All protocol arithmetic happens in the order-`q` subgroup of the
//! multiplicative group mod `p`, where `p` and `q` are primes with
//! `q | p - 1`. A parameter set carries two subgroup generators `g` and `h`;
//! the protocol's security rests on nobody knowing `log_g(h)`, so `h` is
//! never chosen freely: it is either derived from `g` by hashing
//! ([`derive_second_generator`]) or produced by the commit-reveal exchange
//! in [`crate::negotiate`].
//!
//! Every value that crosses a trust boundary is checked by
//! [`GroupParams::validate_element`] before use: membership in the subgroup
//! is what keeps a malicious peer from confining the keying material to a
//! small set. Exponentiation with secret exponents runs on a fixed
//! square-and-multiply schedule (a Montgomery ladder) so the operation
//! count does not depend on exponent bits; see [`GroupElement::pow`] for
//! the limits of that guarantee.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{Num, One, Zero};
use once_cell::sync::Lazy;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::prime::{is_probable_prime, VALIDATION_ROUNDS};
use crate::DS_GENERATOR;

/// Upper bound (exclusive) on the derivation counter tried by
/// [`derive_second_generator`] before giving up.
const DERIVE_COUNTER_LIMIT: u16 = 256;

/// A structural defect found while validating candidate group parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamViolation {
    /// The modulus `p` failed the primality test.
    PNotPrime,
    /// The subgroup order `q` failed the primality test.
    QNotPrime,
    /// `q` does not divide `p - 1`, so no order-`q` subgroup exists.
    OrderMismatch,
    /// `g` is not an order-`q` element of `[2, p-1]`.
    BadGeneratorG,
    /// `h` is not an order-`q` element of `[2, p-1]`.
    BadGeneratorH,
    /// `g == h`, which would make the password mask trivially strippable.
    GeneratorsEqual,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ParamViolation::PNotPrime => "p is not prime",
            ParamViolation::QNotPrime => "q is not prime",
            ParamViolation::OrderMismatch => "q does not divide p - 1",
            ParamViolation::BadGeneratorG => "g is not a valid subgroup generator",
            ParamViolation::BadGeneratorH => "h is not a valid subgroup generator",
            ParamViolation::GeneratorsEqual => "g and h must differ",
        };
        f.write_str(msg)
    }
}

/// Newtype so a violation list can render inside an error message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationList(pub Vec<ParamViolation>);

impl fmt::Display for ViolationList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Errors from group-parameter validation, element checks, and encoding.
#[derive(Debug, thiserror::Error)]
pub enum GroupError {
    /// Candidate parameters violate at least one structural invariant.
    /// Every violated invariant is listed, not just the first.
    #[error("invalid group parameters: {0}")]
    InvalidParams(ViolationList),
    /// Parameter-set name is empty, too long, or contains non-printable
    /// characters.
    #[error("invalid parameter-set name: {0}")]
    InvalidName(&'static str),
    /// Raw element value outside `[2, p-1]` (zero, or `>= p`).
    #[error("element out of range: must lie in [2, p-1]")]
    OutOfRange,
    /// Raw element value is 1, the subgroup identity. The identity is a
    /// valid group member but never a legal wire value.
    #[error("element is the group identity")]
    IdentityElement,
    /// Value is in range but not in the order-`q` subgroup.
    #[error("element is not in the prime-order subgroup")]
    NotInSubgroup,
    /// Encoded element has the wrong length for this parameter set.
    #[error("element encoding is {got} bytes, expected {expected}")]
    BadLength {
        /// Canonical encoded width for the parameter set.
        expected: usize,
        /// Length actually supplied.
        got: usize,
    },
    /// Two values from different parameter sets were combined.
    #[error("operands belong to different parameter sets")]
    ParamsMismatch,
    /// Scalar not in `[0, q-1]`.
    #[error("scalar out of range: must lie in [0, q-1]")]
    ScalarOutOfRange,
    /// A nonzero scalar was required.
    #[error("scalar must be nonzero")]
    ZeroScalar,
    /// No suitable second generator found within the counter budget.
    /// With an honest hash this has negligible probability for any real
    /// group; hitting it means the parameters themselves are degenerate.
    #[error("second-generator derivation exhausted its counter budget")]
    DerivationFailed,
    /// The operating system's randomness source failed.
    #[error("random source failed: {0}")]
    RngFailure(#[source] rand::Error),
    /// Parameter file is syntactically or structurally malformed.
    #[error("parameter file: {0}")]
    ParamsFile(String),
}

#[derive(Debug)]
struct ParamsInner {
    name: String,
    p: BigUint,
    q: BigUint,
    g: BigUint,
    h: BigUint,
    /// Canonical encoded element width in bytes: the minimal width that
    /// fits `p`.
    width: usize,
}

/// A validated parameter set: primes `p`, `q` and generators `g`, `h`.
///
/// Construction goes through [`GroupParams::new`] (full validation,
/// including primality testing) or a negotiation/builtin path that
/// preserves the invariants by design. Cloning is cheap; clones share one
/// immutable allocation.
#[derive(Clone)]
pub struct GroupParams {
    inner: Arc<ParamsInner>,
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("name", &self.inner.name)
            .field("p_bits", &self.inner.p.bits())
            .field("q_bits", &self.inner.q.bits())
            .finish()
    }
}

impl PartialEq for GroupParams {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.name == other.inner.name
                && self.inner.p == other.inner.p
                && self.inner.q == other.inner.q
                && self.inner.g == other.inner.g
                && self.inner.h == other.inner.h)
    }
}

impl Eq for GroupParams {}

fn check_name(name: &str) -> Result<(), GroupError> {
    if name.is_empty() {
        return Err(GroupError::InvalidName("must not be empty"));
    }
    if name.len() > 255 {
        return Err(GroupError::InvalidName("must be at most 255 bytes"));
    }
    if !name.bytes().all(|b| (0x21..=0x7e).contains(&b)) {
        return Err(GroupError::InvalidName(
            "must be printable ASCII without whitespace",
        ));
    }
    Ok(())
}

/// True iff `x` is a non-identity member of the order-`q` subgroup,
/// i.e. `1 < x < p` and `x^q == 1 (mod p)`.
fn is_subgroup_generator(x: &BigUint, p: &BigUint, q: &BigUint) -> bool {
    *x > BigUint::one() && x < p && x.modpow(q, p).is_one()
}

impl GroupParams {
    /// Validates a candidate parameter set and wraps it on success.
    ///
    /// Checks, collecting every violation rather than stopping at the
    /// first:
    /// - `p` and `q` pass [`is_probable_prime`] at [`VALIDATION_ROUNDS`];
    /// - `q | p - 1`;
    /// - `g` and `h` are order-`q` elements other than the identity;
    /// - `g != h`.
    ///
    /// Primality testing dominates the cost (hundreds of milliseconds for
    /// a 2048-bit set), so validate once and reuse the result.
    pub fn new(
        name: impl Into<String>,
        p: BigUint,
        q: BigUint,
        g: BigUint,
        h: BigUint,
    ) -> Result<GroupParams, GroupError> {
        let name = name.into();
        check_name(&name)?;

        let mut violations = Vec::new();
        let three = BigUint::from(3u32);
        // Below 3 the generator checks cannot even be expressed; treat the
        // modulus as hopeless and skip them.
        let p_usable = p >= three;
        if !is_probable_prime(&p, VALIDATION_ROUNDS) {
            violations.push(ParamViolation::PNotPrime);
        }
        if !is_probable_prime(&q, VALIDATION_ROUNDS) {
            violations.push(ParamViolation::QNotPrime);
        }
        if p.is_zero() || q.is_zero() || !((&p - BigUint::one()) % &q).is_zero() {
            violations.push(ParamViolation::OrderMismatch);
        }
        if p_usable {
            if !is_subgroup_generator(&g, &p, &q) {
                violations.push(ParamViolation::BadGeneratorG);
            }
            if !is_subgroup_generator(&h, &p, &q) {
                violations.push(ParamViolation::BadGeneratorH);
            }
        } else {
            violations.push(ParamViolation::BadGeneratorG);
            violations.push(ParamViolation::BadGeneratorH);
        }
        if g == h {
            violations.push(ParamViolation::GeneratorsEqual);
        }
        if !violations.is_empty() {
            return Err(GroupError::InvalidParams(ViolationList(violations)));
        }
        Ok(GroupParams::assemble(name, p, q, g, h))
    }

    /// Like [`GroupParams::new`] but derives `h` from `g` via
    /// [`derive_second_generator`] instead of taking it as input.
    pub fn with_derived_generator(
        name: impl Into<String>,
        p: BigUint,
        q: BigUint,
        g: BigUint,
    ) -> Result<GroupParams, GroupError> {
        let h = derive_second_generator(&g, &p, &q)?;
        GroupParams::new(name, p, q, g, h)
    }

    /// Builds a sibling parameter set with the same `p`, `q`, and name but
    /// replacement generators, as produced by negotiation.
    ///
    /// Skips the primality tests (those invariants are inherited from
    /// `self`) and checks only the generator conditions.
    pub fn with_generators(&self, g: BigUint, h: BigUint) -> Result<GroupParams, GroupError> {
        let inner = &self.inner;
        let mut violations = Vec::new();
        if !is_subgroup_generator(&g, &inner.p, &inner.q) {
            violations.push(ParamViolation::BadGeneratorG);
        }
        if !is_subgroup_generator(&h, &inner.p, &inner.q) {
            violations.push(ParamViolation::BadGeneratorH);
        }
        if g == h {
            violations.push(ParamViolation::GeneratorsEqual);
        }
        if !violations.is_empty() {
            return Err(GroupError::InvalidParams(ViolationList(violations)));
        }
        Ok(GroupParams::assemble(
            inner.name.clone(),
            inner.p.clone(),
            inner.q.clone(),
            g,
            h,
        ))
    }

    /// Wraps values whose invariants are established elsewhere (builtin
    /// constants proven by the test suite).
    fn assemble(name: String, p: BigUint, q: BigUint, g: BigUint, h: BigUint) -> GroupParams {
        let width = p.bits().div_ceil(8) as usize;
        debug_assert!(((&p - BigUint::one()) % &q).is_zero());
        debug_assert!(is_subgroup_generator(&g, &p, &q));
        debug_assert!(is_subgroup_generator(&h, &p, &q));
        debug_assert_ne!(g, h);
        GroupParams {
            inner: Arc::new(ParamsInner { name, p, q, g, h, width }),
        }
    }

    /// The builtin parameter set with the given name, if any.
    ///
    /// Currently `"toy23"` and `"modp2048"`.
    pub fn builtin(name: &str) -> Option<GroupParams> {
        match name {
            "toy23" => Some(GroupParams::toy23()),
            "modp2048" => Some(GroupParams::modp2048()),
            _ => None,
        }
    }

    /// An 8-bit demonstration group: `p = 23`, `q = 11`, `g = 2`, `h = 4`.
    ///
    /// Small enough that every protocol property can be checked by
    /// exhaustive enumeration (see [`crate::oracle`]). It offers **no
    /// security whatsoever**: discrete logs are readable by eye, and
    /// `h = g^2` makes the generators' log relation public, which breaks
    /// the core assumption outright. For functional tests and demos only.
    pub fn toy23() -> GroupParams {
        static TOY23: Lazy<GroupParams> = Lazy::new(|| {
            GroupParams::assemble(
                "toy23".into(),
                BigUint::from(23u32),
                BigUint::from(11u32),
                BigUint::from(2u32),
                BigUint::from(4u32),
            )
        });
        TOY23.clone()
    }

    /// A 2048-bit safe-prime group from a widely deployed key-exchange
    /// standard, with `q = (p - 1) / 2`, `g = 4`, and `h` derived from `g`.
    ///
    /// `g = 4` generates the order-`q` subgroup of quadratic residues.
    /// The constants are asserted structurally here; the test suite runs
    /// them through the full validator (primality included) so startup
    /// stays fast.
    pub fn modp2048() -> GroupParams {
        static MODP2048: Lazy<GroupParams> = Lazy::new(|| {
            let p = BigUint::from_str_radix(MODP2048_P_HEX, 16).expect("builtin constant");
            let q: BigUint = (&p - BigUint::one()) >> 1;
            let g = BigUint::from(4u32);
            let h = derive_second_generator(&g, &p, &q).expect("derivation succeeds for this set");
            GroupParams::assemble("modp2048".into(), p, q, g, h)
        });
        MODP2048.clone()
    }

    /// Parameter-set name (also the password-derivation context).
    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// The prime modulus `p`.
    pub fn modulus(&self) -> &BigUint {
        &self.inner.p
    }

    /// The prime subgroup order `q`.
    pub fn subgroup_order(&self) -> &BigUint {
        &self.inner.q
    }

    /// The primary generator `g`.
    pub fn generator(&self) -> GroupElement {
        GroupElement {
            value: self.inner.g.clone(),
            params: self.clone(),
        }
    }

    /// The second generator `h` (the password-mask base).
    pub fn second_generator(&self) -> GroupElement {
        GroupElement {
            value: self.inner.h.clone(),
            params: self.clone(),
        }
    }

    /// The subgroup identity, 1.
    pub fn identity(&self) -> GroupElement {
        GroupElement {
            value: BigUint::one(),
            params: self.clone(),
        }
    }

    /// Canonical encoded element width in bytes (the width of `p`).
    pub fn element_len(&self) -> usize {
        self.inner.width
    }

    /// Checks a raw integer received from outside and wraps it as an
    /// element.
    ///
    /// Accepts exactly the non-identity subgroup members: `1 < x < p` and
    /// `x^q == 1 (mod p)`. Anything else is rejected with the specific
    /// reason ([`GroupError::OutOfRange`], [`GroupError::IdentityElement`],
    /// or [`GroupError::NotInSubgroup`]).
    pub fn validate_element(&self, raw: &BigUint) -> Result<GroupElement, GroupError> {
        if raw.is_one() {
            return Err(GroupError::IdentityElement);
        }
        if raw.is_zero() || raw >= &self.inner.p {
            return Err(GroupError::OutOfRange);
        }
        if !raw.modpow(&self.inner.q, &self.inner.p).is_one() {
            return Err(GroupError::NotInSubgroup);
        }
        Ok(GroupElement {
            value: raw.clone(),
            params: self.clone(),
        })
    }

    /// Decodes the canonical fixed-width big-endian encoding, then applies
    /// [`GroupParams::validate_element`].
    pub fn decode_element(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        if bytes.len() != self.inner.width {
            return Err(GroupError::BadLength {
                expected: self.inner.width,
                got: bytes.len(),
            });
        }
        self.validate_element(&BigUint::from_bytes_be(bytes))
    }

    /// Wraps an integer already known to lie in `[0, q-1]`.
    pub fn scalar(&self, value: BigUint) -> Result<Scalar, GroupError> {
        if value >= self.inner.q {
            return Err(GroupError::ScalarOutOfRange);
        }
        Ok(Scalar { value })
    }

    /// Convenience constructor for small test scalars.
    pub fn scalar_from_u64(&self, value: u64) -> Result<Scalar, GroupError> {
        self.scalar(BigUint::from(value))
    }

    /// Draws a uniform scalar in `[1, q-1]` by rejection sampling.
    ///
    /// Samples `ceil(bits(q))`-bit candidates and rejects those outside
    /// the range, so no modular bias is introduced. Expected iterations
    /// are below 2.
    pub fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Result<Scalar, GroupError> {
        let q = &self.inner.q;
        let nbits = q.bits();
        let nbytes = nbits.div_ceil(8) as usize;
        let excess = (nbytes as u64) * 8 - nbits;
        let mut buf = vec![0u8; nbytes];
        loop {
            rng.try_fill_bytes(&mut buf).map_err(GroupError::RngFailure)?;
            buf[0] &= 0xffu8 >> excess;
            let candidate = BigUint::from_bytes_be(&buf);
            if !candidate.is_zero() && &candidate < q {
                return Ok(Scalar { value: candidate });
            }
        }
    }

    /// Parses the `key=value` parameter-file format.
    ///
    /// One entry per line: `name=<set name>` plus lowercase-hex `p=`, `q=`,
    /// `g=`, and optionally `h=`. When `h` is absent it is derived from
    /// `g`. Unknown or duplicate keys, blank interior lines, whitespace,
    /// and non-hex digits are all rejected. The assembled set then passes
    /// through the full validator.
    pub fn from_params_file(text: &str) -> Result<GroupParams, GroupError> {
        let bad = |line: usize, msg: &str| GroupError::ParamsFile(format!("line {line}: {msg}"));

        let mut name: Option<String> = None;
        let mut numbers: [Option<BigUint>; 4] = [None, None, None, None]; // p, q, g, h
        let lines: Vec<&str> = text.split('\n').collect();
        for (idx, raw_line) in lines.iter().enumerate() {
            let lineno = idx + 1;
            if raw_line.is_empty() {
                if idx == lines.len() - 1 {
                    continue; // trailing newline
                }
                return Err(bad(lineno, "blank line"));
            }
            let (key, value) = raw_line
                .split_once('=')
                .ok_or_else(|| bad(lineno, "expected key=value"))?;
            if value.is_empty() {
                return Err(bad(lineno, "empty value"));
            }
            if key == "name" {
                if name.is_some() {
                    return Err(bad(lineno, "duplicate key `name`"));
                }
                check_name(value).map_err(|e| bad(lineno, &e.to_string()))?;
                name = Some(value.to_string());
                continue;
            }
            let slot = match key {
                "p" => 0,
                "q" => 1,
                "g" => 2,
                "h" => 3,
                _ => return Err(bad(lineno, &format!("unknown key `{key}`"))),
            };
            if numbers[slot].is_some() {
                return Err(bad(lineno, &format!("duplicate key `{key}`")));
            }
            if !value.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
                return Err(bad(lineno, "value must be lowercase hex"));
            }
            numbers[slot] =
                Some(BigUint::from_str_radix(value, 16).expect("hex digits already checked"));
        }

        let name = name.ok_or_else(|| GroupError::ParamsFile("missing key `name`".into()))?;
        let missing = |k: &str| GroupError::ParamsFile(format!("missing key `{k}`"));
        let [p, q, g, h] = numbers;
        let p = p.ok_or_else(|| missing("p"))?;
        let q = q.ok_or_else(|| missing("q"))?;
        let g = g.ok_or_else(|| missing("g"))?;
        match h {
            Some(h) => GroupParams::new(name, p, q, g, h),
            None => GroupParams::with_derived_generator(name, p, q, g),
        }
    }

    /// Serializes to the format accepted by
    /// [`GroupParams::from_params_file`], always including `h`.
    pub fn to_params_file(&self) -> String {
        let i = &self.inner;
        format!(
            "name={}\np={:x}\nq={:x}\ng={:x}\nh={:x}\n",
            i.name, i.p, i.q, i.g, i.h
        )
    }
}

/// A member of the order-`q` subgroup, bound to its parameter set.
///
/// Instances exist only for validated or internally computed values, so
/// arithmetic never needs to re-check membership.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupElement {
    value: BigUint,
    params: GroupParams,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({:x} in {})", self.value, self.params.name())
    }
}

impl GroupElement {
    /// The raw integer value in `[1, p-1]`.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// The parameter set this element belongs to.
    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    /// True for the identity element 1.
    pub fn is_identity(&self) -> bool {
        self.value.is_one()
    }

    /// Fixed-width big-endian encoding, `element_len()` bytes.
    pub fn encode(&self) -> Vec<u8> {
        encode_uint(&self.value, self.params.inner.width)
    }

    /// `self^e mod p` on a fixed operation schedule.
    ///
    /// Runs a Montgomery ladder over exactly `bits(q)` iterations with one
    /// multiply and one square per iteration regardless of the exponent's
    /// bits, so secret exponents do not shape the sequence of big-integer
    /// operations. Value-dependent timing inside the multiplier itself
    /// (limb-level effects) is out of scope.
    pub fn pow(&self, e: &Scalar) -> GroupElement {
        let p = &self.params.inner.p;
        let mut r0 = BigUint::one();
        let mut r1 = self.value.clone();
        for i in (0..self.params.inner.q.bits()).rev() {
            if e.value.bit(i) {
                r0 = &r0 * &r1 % p;
                r1 = &r1 * &r1 % p;
            } else {
                r1 = &r0 * &r1 % p;
                r0 = &r0 * &r0 % p;
            }
        }
        GroupElement {
            value: r0,
            params: self.params.clone(),
        }
    }

    /// `self^e mod p` without the fixed schedule. Only for public
    /// exponents (membership checks, test oracles).
    pub fn pow_vartime(&self, e: &BigUint) -> GroupElement {
        GroupElement {
            value: self.value.modpow(e, &self.params.inner.p),
            params: self.params.clone(),
        }
    }

    /// Subgroup multiplication. Fails with [`GroupError::ParamsMismatch`]
    /// if the operands come from different parameter sets.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement, GroupError> {
        if self.params != other.params {
            return Err(GroupError::ParamsMismatch);
        }
        Ok(GroupElement {
            value: &self.value * &other.value % &self.params.inner.p,
            params: self.params.clone(),
        })
    }

    /// Multiplicative inverse via `self^(p-2)` (variable-time; the
    /// protocol never inverts a secret-dependent value, it masks with
    /// complement exponents instead).
    pub fn invert(&self) -> GroupElement {
        let p = &self.params.inner.p;
        let exp = p - BigUint::from(2u32);
        self.pow_vartime(&exp)
    }
}

/// An exponent reduced mod `q`.
///
/// Scalars are plain integers in `[0, q-1]`; whether one is secret is the
/// caller's business (the protocol wraps its secrets so they are wiped on
/// drop).
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    pub(crate) value: BigUint,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({:x})", self.value)
    }
}

impl Scalar {
    /// The raw integer in `[0, q-1]`.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// True for the zero scalar.
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Additive inverse mod `q`: the exponent `e` with
    /// `x^self * x^e == 1` for subgroup members `x`.
    pub fn neg(&self, params: &GroupParams) -> Scalar {
        if self.value.is_zero() {
            return Scalar {
                value: BigUint::zero(),
            };
        }
        Scalar {
            value: &params.inner.q - &self.value,
        }
    }

    /// `self + other mod q`.
    pub fn add_mod(&self, other: &Scalar, params: &GroupParams) -> Scalar {
        Scalar {
            value: (&self.value + &other.value) % &params.inner.q,
        }
    }

    /// `self * other mod q`.
    pub fn mul_mod(&self, other: &Scalar, params: &GroupParams) -> Scalar {
        Scalar {
            value: (&self.value * &other.value) % &params.inner.q,
        }
    }

    /// Best-effort erasure: forces the live limbs to be overwritten before
    /// releasing them. Heap reallocation history is beyond reach, so this
    /// shrinks, not eliminates, the window where secrets linger.
    pub(crate) fn wipe(&mut self) {
        let bits = self.value.bits();
        for i in 0..bits {
            self.value.set_bit(i, true);
        }
        self.value = BigUint::zero();
    }
}

/// Fixed-width big-endian encoding of `v` (left-padded with zeros).
///
/// Panics if `v` does not fit, which for protocol use cannot happen:
/// every encoded value is reduced mod `p` and `width` is the width of `p`.
pub fn encode_uint(v: &BigUint, width: usize) -> Vec<u8> {
    let bytes = v.to_bytes_be();
    assert!(bytes.len() <= width, "value wider than encoding width");
    let mut out = vec![0u8; width];
    out[width - bytes.len()..].copy_from_slice(&bytes);
    out
}

/// Derives the second generator `h` deterministically from `g`.
///
/// Hashes a domain-separation byte, the canonical encoding of `g`, and a
/// counter; interprets the digest as an integer mod `p`; and raises it to
/// `(p - 1) / q` to land in the order-`q` subgroup. The first counter in
/// `0..=255` whose result is neither 0, 1, nor `g` wins, so both sides
/// compute the same `h` and neither controls `log_g(h)`.
pub fn derive_second_generator(
    g: &BigUint,
    p: &BigUint,
    q: &BigUint,
) -> Result<BigUint, GroupError> {
    let width = p.bits().div_ceil(8) as usize;
    let g_bytes = encode_uint(g, width);
    let cofactor = (p - BigUint::one()) / q;
    for counter in 0..DERIVE_COUNTER_LIMIT {
        let mut hasher = Sha256::new();
        hasher.update([DS_GENERATOR]);
        hasher.update(&g_bytes);
        hasher.update([counter as u8]);
        let digest = hasher.finalize();
        let base = BigUint::from_bytes_be(&digest) % p;
        let h = base.modpow(&cofactor, p);
        if !h.is_zero() && !h.is_one() && &h != g {
            return Ok(h);
        }
    }
    Err(GroupError::DerivationFailed)
}

/// 2048-bit safe prime: `2^2048 - 2^1984 - 1 + 2^64 * (floor(2^1918 pi) + 124476)`.
const MODP2048_P_HEX: &str = concat!(
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74",
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437",
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed",
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05",
    "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb",
    "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b",
    "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718",
    "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff"
);
