//! Small-integer helpers: primality, factorization, modular arithmetic.

use crate::error::{Error, Result};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
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

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let e = (a.rem_euclid(m)).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as sorted `(prime, exponent)` pairs.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n && p < 1000 {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            match out.iter_mut().find(|(q, _)| *q == m) {
                Some(entry) => entry.1 += 1,
                None => out.push((m, 1)),
            }
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out.sort();
    out
}

/// Prime factorization of |n| for a big integer that fits after small trial division.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mut m = n.abs();
    if m.is_zero() {
        return Err(Error::Parse("cannot factor zero".into()));
    }
    if let Some(v) = m.to_u64() {
        return Ok(factor_u64(v));
    }
    let mut out = Vec::new();
    let mut p = 2u64;
    while p < 1_000_000 {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if let Some(v) = m.to_u64() {
            for (q, k) in factor_u64(v) {
                out.push((q, k));
            }
            out.sort();
            return Ok(out);
        }
        p = next_prime(p);
    }
    Err(Error::FactorLimit(n.to_string()))
}

/// p-adic valuation of a nonzero big integer.
pub fn vp_bigint(n: &BigInt, p: u64) -> u32 {
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut e = 0;
    while !m.is_zero() && (&m % &bp).is_zero() {
        m /= &bp;
        e += 1;
    }
    e
}

/// Smallest divisor `d` of `multiple` with `holds(d)`, assuming `holds` is closed under multiples
/// among divisors and `holds(multiple)` is true.
pub fn order_from_multiple(multiple: u64, mut holds: impl FnMut(u64) -> bool) -> u64 {
    let mut m = multiple;
    for (p, _) in factor_u64(multiple) {
        while m % p == 0 && holds(m / p) {
            m /= p;
        }
    }
    m
}

/// Largest divisor of `n` coprime to `q`.
pub fn coprime_part(mut n: u64, q: u64) -> u64 {
    if q <= 1 {
        return n;
    }
    while n % q == 0 && n > 0 {
        n /= q;
    }
    n
}

/// Exact integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

pub fn is_one(n: &BigInt) -> bool {
    n.is_one()
}
