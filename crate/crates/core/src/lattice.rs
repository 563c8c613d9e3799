//! Primitive lattice vectors and integer points of `SL2(Z)` in norm balls.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};

/// `1 / zeta(2) = 6 / pi^2`.
pub const INV_ZETA_2: f64 = 6.0 / (PI * PI);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// `1 <= n, m <= N`.
    Quadrant,
    /// `|n|, |m| <= N`, all sign classes plus the four axis vectors.
    All,
}

pub fn is_primitive(n: i64, m: i64) -> Result<bool> {
    if n == 0 && m == 0 {
        return Err(Error::NotPrimitive(0, 0));
    }
    Ok(n.gcd(&m) == 1)
}

/// `(g, x, y)` with `n x + m y = g = gcd(n, m) >= 0`.
fn ext_gcd(n: i64, m: i64) -> (i64, i64, i64) {
    let e = n.extended_gcd(&m);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Second column `(a, b)` with `n b - m a = 1`, minimizing
/// `max(|a|, |b|)`, then `|a|`, then `a`, then `|b|`, then `b`.
///
/// All completions form the family `(a + k n, b + k m)`.
pub fn complete_primitive(n: i64, m: i64) -> Result<(i64, i64)> {
    if !is_primitive(n, m)? {
        return Err(Error::NotPrimitive(n, m));
    }
    // n x + m y = 1  =>  b = x, a = -y
    let (_, x, y) = ext_gcd(n, m);
    let (a0, b0) = (-y, x);
    debug_assert_eq!(n * b0 - m * a0, 1);

    // max(|a0 + k n|, |b0 + k m|) is convex in k; its minimizers sit
    // between the two breakpoints -a0/n and -b0/m.
    let mut breakpoints = Vec::new();
    if n != 0 {
        breakpoints.push(-(a0 as f64) / n as f64);
    }
    if m != 0 {
        breakpoints.push(-(b0 as f64) / m as f64);
    }
    let lo = breakpoints
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .floor() as i64
        - 2;
    let hi = breakpoints
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil() as i64
        + 2;
    let best = (lo..=hi)
        .map(|k| (a0 + k * n, b0 + k * m))
        .min_by_key(|&(a, b)| (a.abs().max(b.abs()), a.abs(), a, b.abs(), b))
        .expect("nonempty range");
    Ok(best)
}

/// Moebius function by trial division.
pub fn mobius(k: u64) -> i8 {
    assert!(k >= 1, "mobius is defined for k >= 1");
    let mut k = k;
    let mut sign = 1i8;
    let mut q = 2;
    while q * q <= k {
        if k.is_multiple_of(q) {
            k /= q;
            if k.is_multiple_of(q) {
                return 0;
            }
            sign = -sign;
        }
        q += 1;
    }
    if k > 1 {
        sign = -sign;
    }
    sign
}

/// Moebius values `mu(0..=n)` by a linear sieve; `mu[0]` is unused.
fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut is_composite = vec![false; n + 1];
    let mut primes = Vec::new();
    if n >= 1 {
        mu[0] = 0;
    }
    for i in 2..=n {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            if i * p > n {
                break;
            }
            is_composite[i * p] = true;
            if i % p == 0 {
                mu[i * p] = 0;
                break;
            }
            mu[i * p] = -mu[i];
        }
    }
    mu
}

/// Primes up to `n` inclusive.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Primitive vectors in the box of half-width `n`.
///
/// Quadrant mode uses `sum_d mu(d) floor(N/d)^2`.
pub fn prim_count(n: u64, mode: CountMode) -> u64 {
    let mu = mobius_table(n as usize);
    let quadrant: i64 = (1..=n)
        .map(|d| {
            let q = (n / d) as i64;
            mu[d as usize] as i64 * q * q
        })
        .sum();
    let quadrant = quadrant as u64;
    match mode {
        CountMode::Quadrant => quadrant,
        CountMode::All => 4 * quadrant + 4,
    }
}

/// Integers `k` with `|x0 + k step| <= r`, as an inclusive range; `None`
/// if empty, `Some((i64::MIN, i64::MAX))` if unconstrained.
fn k_range(x0: i64, step: i64, r: i64) -> Option<(i64, i64)> {
    if step == 0 {
        return (x0.abs() <= r).then_some((i64::MIN, i64::MAX));
    }
    let (lo, hi) = if step > 0 {
        (
            Integer::div_ceil(&(-r - x0), &step),
            Integer::div_floor(&(r - x0), &step),
        )
    } else {
        (
            Integer::div_ceil(&(r - x0), &step),
            Integer::div_floor(&(-r - x0), &step),
        )
    };
    (lo <= hi).then_some((lo, hi))
}

/// Number of integer matrices with determinant 1 and all entries in `[-r, r]`.
///
/// Each primitive first column contributes the members of its completion
/// family that fit in the box.
pub fn sl2_ball_count(r: u64) -> u64 {
    let r = r as i64;
    let mut total = 0u64;
    for a in -r..=r {
        for c in -r..=r {
            if a.gcd(&c) != 1 {
                continue;
            }
            let (b0, d0) = complete_primitive(a, c).expect("primitive");
            let (Some((l1, h1)), Some((l2, h2))) = (k_range(b0, a, r), k_range(d0, c, r)) else {
                continue;
            };
            let (lo, hi) = (l1.max(l2), h1.min(h2));
            if lo <= hi {
                total += (hi - lo + 1) as u64;
            }
        }
    }
    total
}

/// Exact `prod_{p <= x} (1 - 1/p^2)`.
pub fn euler_product_partial(x: u64) -> Result<BigRational> {
    if x < 2 {
        return Err(Error::Invalid("euler product needs x >= 2".into()));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for p in primes_up_to(x) {
        let p2 = BigInt::from(p) * p;
        num *= &p2 - 1u32;
        den *= p2;
    }
    Ok(BigRational::new(num, den))
}

/// Lossy conversion for reporting.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
