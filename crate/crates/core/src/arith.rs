//! Exact integer and modular arithmetic on 64-bit moduli.

use serde::{Deserialize, Serialize};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// A prime number below 2^64, checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct NatPrime(u64);

impl NatPrime {
    pub fn new(value: u64) -> Result<Self, ArithError> {
        if is_prime(value) {
            Ok(NatPrime(value))
        } else {
            Err(ArithError::NotPrime(value))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for NatPrime {
    type Error = ArithError;
    fn try_from(value: u64) -> Result<Self, Self::Error> {
        NatPrime::new(value)
    }
}

impl From<NatPrime> for u64 {
    fn from(p: NatPrime) -> u64 {
        p.0
    }
}

impl fmt::Display for NatPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Reduce a signed value into `[0, m)`.
#[inline]
pub fn reduce_i128(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Floor of the square root.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn isqrt_u64(n: u64) -> u64 {
    isqrt_u128(n as u128) as u64
}

pub fn is_square_u128(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

// Deterministic for all n < 2^64 (Sinclair/Jaeschke bound on the first 12 primes).
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in MR_BASES.iter() {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in MR_BASES.iter() {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Kronecker symbol `(a | n)`. Agrees with the Legendre symbol for odd prime `n`.
///
/// `n = 0` is accepted and gives `1` for `a = ±1`, `0` otherwise.
pub fn kronecker_symbol(a: i64, n: i64) -> i8 {
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut k: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // strip factors of two from n
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                k = -k;
            }
        }
    }
    // n is now odd and positive: Jacobi symbol
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                k = -k;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

/// Legendre symbol for an odd prime modulus, by Euler's criterion.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
///
/// Returns the smaller of the two roots, `Some(0)` for `a = 0`, and `None` for a
/// non-residue.
pub fn sqrt_mod_p(a: u64, p: NatPrime) -> Option<u64> {
    let p = p.get();
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let r = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        tonelli_shanks(a, p)
    };
    Some(r.min(p - r))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// The discriminant magnitudes accepted by [`cornacchia`]: the class-number-one
/// imaginary quadratic orders of maximal type.
pub const CLASS_NUMBER_ONE_MAGNITUDES: [u64; 9] = [3, 4, 7, 8, 11, 19, 43, 67, 163];

/// Solve `4p = u^2 + d v^2` with `u, v >= 0`.
///
/// Uses the modified Euclid descent on a square root of `-d` modulo `4p`. For
/// `d = 3` and `d = 4` the extra units give several representations; the one
/// with the smallest `u` is returned. Any other `d` outside
/// [`CLASS_NUMBER_ONE_MAGNITUDES`] yields `None`.
pub fn cornacchia(d: u64, p: NatPrime) -> Option<(u64, u64)> {
    if !CLASS_NUMBER_ONE_MAGNITUDES.contains(&d) {
        return None;
    }
    let pv = p.get();
    if pv == 2 {
        return None;
    }
    let disc = -(d as i128);
    let root = sqrt_mod_p(reduce_i128(disc, pv), p)?;
    // choose the root with the parity of the discriminant
    let mut b = root as u128;
    if (b % 2) as i128 != disc.rem_euclid(2) {
        b = pv as u128 - b;
    }
    let four_p = 4 * pv as u128;
    let mut a = 2 * pv as u128;
    let limit = isqrt_u128(four_p);
    while b > limit {
        let r = a % b;
        a = b;
        b = r;
    }
    let rest = four_p - b * b;
    if rest % d as u128 != 0 {
        return None;
    }
    let v = is_square_u128(rest / d as u128)?;
    let (u, v) = canonical_representation(d, b as u64, v as u64);
    debug_assert_eq!(u as u128 * u as u128 + d as u128 * v as u128 * v as u128, four_p);
    Some((u, v))
}

fn canonical_representation(d: u64, u: u64, v: u64) -> (u64, u64) {
    match d {
        3 => {
            // multiplication by the sixth roots of unity permutes |u| among
            // {u, (u+3v)/2, |u-3v|/2}
            let u = u as i128;
            let v = v as i128;
            let candidates = [
                (u, v),
                ((u + 3 * v) / 2, (u - v).abs() / 2),
                ((u - 3 * v).abs() / 2, (u + v) / 2),
            ];
            let best = candidates
                .iter()
                .filter(|(a, b)| a * a + 3 * b * b == u * u + 3 * v * v)
                .min()
                .copied()
                .unwrap_or((u, v));
            (best.0 as u64, best.1 as u64)
        }
        4 => {
            // 4p = u^2 + 4v^2 with u = 2a; the unit i swaps a and v
            let alt = (2 * v, u / 2);
            if alt.0 < u {
                alt
            } else {
                (u, v)
            }
        }
        _ => (u, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use proptest::test_runner::RngSeed;

    fn np(p: u64) -> NatPrime {
        NatPrime::new(p).unwrap()
    }

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(7));
        assert!(!is_prime(91));
        assert!(is_prime(223));
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(18446744073709551557)); // largest 64-bit prime
        assert!(!is_prime(3215031751)); // strong pseudoprime to 2, 3, 5, 7
    }

    #[test]
    fn primality_matches_trial_division_below_one_million() {
        // sieve as the reference
        let limit = 1_000_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < limit {
            if sieve[i] {
                let mut j = i * i;
                while j < limit {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        for n in 0..limit {
            assert_eq!(is_prime(n as u64), sieve[n], "n = {n}");
        }
        for n in [999_983u64, 999_979, 1_000_001, 104_729] {
            assert_eq!(is_prime(n), trial_division(n));
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker_symbol(-3, 7), 1);
        assert_eq!(kronecker_symbol(14, 7), 0);
        assert_eq!(kronecker_symbol(-11, 223), 1);
        assert_eq!(kronecker_symbol(-3, 5), -1);
        assert_eq!(kronecker_symbol(5, 8), -1);
        assert_eq!(kronecker_symbol(7, 8), 1);
        assert_eq!(kronecker_symbol(-1, -1), -1);
    }

    #[test]
    fn kronecker_is_legendre_for_odd_primes() {
        for p in [3u64, 5, 7, 11, 13, 97, 101] {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in -50i64..50 {
                let r = a.rem_euclid(p as i64) as u64;
                let expected = if r == 0 {
                    0
                } else if squares.contains(&r) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker_symbol(a, p as i64), expected, "({a}|{p})");
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_p(4, np(7)), Some(2));
        assert_eq!(sqrt_mod_p(5, np(7)), None);
        assert_eq!(sqrt_mod_p(2, np(7)), Some(3));
        assert_eq!(sqrt_mod_p(0, np(7)), Some(0));
        // p ≡ 1 mod 8 exercises the full Tonelli-Shanks loop
        let r = sqrt_mod_p(13, np(17)).unwrap();
        assert_eq!(r * r % 17, 13);
    }

    #[test]
    fn cornacchia_examples() {
        assert_eq!(cornacchia(3, np(7)), Some((1, 3)));
        assert_eq!(cornacchia(11, np(223)), Some((1, 9)));
        assert_eq!(cornacchia(19, np(43)), Some((1, 3)));
        // inert primes have no representation
        assert_eq!(cornacchia(3, np(5)), None);
        assert_eq!(cornacchia(11, np(13)), None);
        // unsupported discriminant
        assert_eq!(cornacchia(23, np(47)), None);
    }

    #[test]
    fn cornacchia_agrees_with_enumeration() {
        for &d in CLASS_NUMBER_ONE_MAGNITUDES.iter() {
            for p in (3u64..2000).filter(|&p| is_prime(p)) {
                let four_p = 4 * p;
                let mut brute = None;
                let mut u = 0;
                while u * u <= four_p {
                    let rest = four_p - u * u;
                    if rest % d == 0 {
                        if let Some(v) = is_square_u128((rest / d) as u128) {
                            brute = Some((u, v as u64));
                            break;
                        }
                    }
                    u += 1;
                }
                assert_eq!(cornacchia(d, np(p)), brute, "d = {d}, p = {p}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(3), ..ProptestConfig::default() })]
        #[test]
        fn sqrt_roundtrip(idx in 0usize..200, a in 0u64..1_000_000) {
            let primes: Vec<u64> = (3u64..2000).filter(|&p| is_prime(p)).collect();
            let p = primes[idx % primes.len()];
            let a = a % p;
            match sqrt_mod_p(a, np(p)) {
                Some(r) => {
                    prop_assert_eq!(r * r % p, a);
                    prop_assert!(r <= p - r || r == 0);
                }
                None => prop_assert_eq!(kronecker_symbol(a as i64, p as i64), -1),
            }
        }

        #[test]
        fn cornacchia_identity(idx in 0usize..9, p in 5u64..100_000) {
            let d = CLASS_NUMBER_ONE_MAGNITUDES[idx];
            if is_prime(p) {
                if let Some((u, v)) = cornacchia(d, np(p)) {
                    prop_assert_eq!(u as u128 * u as u128 + d as u128 * (v as u128 * v as u128), 4 * p as u128);
                }
            }
        }
    }
}
