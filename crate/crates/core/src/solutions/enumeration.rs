//! A fixed bijection between positive integers and the rationals:
//! `r_1 = 0`, `r_(2i) = q_i`, `r_(2i+1) = -q_i`, where `q_i = fusc(i) / fusc(i+1)`
//! walks the Calkin-Wilf tree breadth first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Name recorded alongside `u2` results.
pub const ENUMERATION_NAME: &str = "calkin-wilf-interleaved";

/// Stern's diatomic sequence.
fn fusc(mut n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 0u64);
    while n > 0 {
        if n & 1 == 1 {
            b += a;
        } else {
            a += b;
        }
        n >>= 1;
    }
    b
}

/// `i`-th positive rational in Calkin-Wilf order, `i >= 1`.
fn calkin_wilf(i: u64) -> (u64, u64) {
    (fusc(i), fusc(i + 1))
}

/// The `k`-th rational, `k >= 1`.
pub fn enumerate_rational(k: u64) -> BigRational {
    assert!(k >= 1, "enumeration starts at 1");
    if k == 1 {
        return BigRational::zero();
    }
    let (p, q) = calkin_wilf(k / 2);
    let r = BigRational::new(BigInt::from(p), BigInt::from(q));
    if k % 2 == 0 {
        r
    } else {
        -r
    }
}

/// Inverse of [`enumerate_rational`]; `None` when the index overflows `u64`.
pub fn enumeration_index(q: &BigRational) -> Option<u64> {
    if q.is_zero() {
        return Some(1);
    }
    let (mut a, mut b) = (q.numer().abs(), q.denom().clone());
    let g = a.gcd(&b);
    a /= &g;
    b /= &g;
    // Walk up to the root 1/1: a/b is a left child when a < b.
    let mut bits: Vec<bool> = Vec::new();
    while !(a.is_one() && b.is_one()) {
        if a < b {
            // Whole runs of left moves at once.
            let steps = ((&b - BigInt::one()) / &a).to_u64().filter(|&s| s <= 62)?;
            b -= &a * BigInt::from(steps);
            bits.extend(std::iter::repeat_n(false, steps as usize));
        } else {
            let steps = ((&a - BigInt::one()) / &b).to_u64().filter(|&s| s <= 62)?;
            a -= &b * BigInt::from(steps);
            bits.extend(std::iter::repeat_n(true, steps as usize));
        }
        if bits.len() > 62 {
            return None;
        }
    }
    let mut i: u64 = 1;
    for bit in bits.iter().rev() {
        i = (i << 1) | *bit as u64;
    }
    let base = i.checked_mul(2)?;
    if q.is_negative() {
        base.checked_add(1)
    } else {
        Some(base)
    }
}
