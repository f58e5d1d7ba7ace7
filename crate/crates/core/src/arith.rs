//! Small integer and rational helpers shared across modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = 17u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in increasing order.
pub(crate) fn prime_factors(mut n: u64) -> alloc::vec::Vec<u64> {
    let mut out = alloc::vec::Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Exact `base^exp` for a possibly negative exponent.
pub(crate) fn rpow(base: &BigRational, exp: i64) -> BigRational {
    let mag = exp.unsigned_abs();
    let mut acc = BigRational::one();
    let mut b = base.clone();
    let mut e = mag;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

pub(crate) fn int_pow(base: u64, exp: i64) -> BigRational {
    rpow(&BigRational::from_integer(BigInt::from(base)), exp)
}

#[cfg(test)]
pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Residue of an integer-valued rational modulo `p`, in `[0, p)`.
pub(crate) fn mod_p(c: &BigRational, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let num = c.numer().mod_floor(&pb);
    let den = c.denom().mod_floor(&pb);
    let n = num.to_u64().unwrap_or(0);
    if den.is_one() {
        return n;
    }
    let d = den.to_u64().unwrap_or(0);
    // denominators coprime to p only
    let inv = modpow(d, p - 2, p);
    mulmod(n, inv, p)
}

pub(crate) fn modpow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}
