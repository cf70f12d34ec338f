//! Probabilistic primality testing for group-parameter validation.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};

/// Number of Miller-Rabin rounds used when validating group parameters.
///
/// Each round with a random base has error probability at most 1/4, so 64
/// rounds bound the chance of accepting a composite by 2^-128.
pub const VALIDATION_ROUNDS: usize = 64;

/// Small primes used for cheap trial division before Miller-Rabin.
const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin test with `rounds` uniformly random bases in `[2, n-2]`.
///
/// Returns `false` for 0 and 1, and `true` for every prime. For an odd
/// composite `n` the probability of returning `true` is at most
/// `4^-rounds`.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for sp in SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }

    // n - 1 = d * 2^s with d odd
    let n_minus_1 = n - BigUint::one();
    let s = n_minus_1.trailing_zeros().expect("n > 1, so n - 1 > 0");
    let d = &n_minus_1 >> s;

    let mut rng = rand::thread_rng();
    let low = two.clone();
    let high = n - BigUint::one(); // gen range is exclusive at the top
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&low, &high);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Num;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn small_values() {
        let primes = [2u64, 3, 5, 7, 11, 13, 23, 97, 101, 65537];
        for p in primes {
            assert!(is_probable_prime(&big(p), 16), "{p} is prime");
        }
        let composites = [0u64, 1, 4, 6, 9, 15, 21, 25, 91, 561, 65535];
        for c in composites {
            assert!(!is_probable_prime(&big(c), 16), "{c} is composite");
        }
    }

    #[test]
    fn carmichael_numbers_rejected() {
        // Carmichael numbers fool Fermat tests for all coprime bases but
        // not Miller-Rabin.
        for c in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_probable_prime(&big(c), 16), "{c} is a Carmichael number");
        }
    }

    #[test]
    fn mersenne_exponent_boundary() {
        // 2^61 - 1 is prime; 2^67 - 1 = 193707721 * 761838257287 is not.
        let m61 = (BigUint::one() << 61u32) - BigUint::one();
        assert!(is_probable_prime(&m61, 32));
        let m67 = (BigUint::one() << 67u32) - BigUint::one();
        assert!(!is_probable_prime(&m67, 32));
    }

    #[test]
    fn rsa_style_semiprime_rejected() {
        // Product of two 32-bit primes: no small factors, clearly composite.
        let p = big(4_294_967_311); // 2^32 + 15
        let q = big(4_294_967_357); // 2^32 + 61
        assert!(is_probable_prime(&p, 32));
        assert!(is_probable_prime(&q, 32));
        assert!(!is_probable_prime(&(p * q), 32));
    }

    #[test]
    fn known_2048_bit_prime_accepted() {
        // 2048-bit prime from a widely deployed MODP group, together with
        // its Sophie Germain half (p - 1) / 2.
        let p = BigUint::from_str_radix(
            concat!(
                "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74",
                "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437",
                "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed",
                "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05",
                "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb",
                "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b",
                "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718",
                "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff"
            ),
            16,
        )
        .unwrap();
        assert!(is_probable_prime(&p, VALIDATION_ROUNDS));
        let q: BigUint = (&p - 1u32) >> 1;
        assert!(is_probable_prime(&q, VALIDATION_ROUNDS));
        assert!(!is_probable_prime(&(&p + 2u32), 8));
    }
}
