//! Elementary functions on balls.
//!
//! Each function evaluates a truncated series at the exact midpoint using ball
//! operations, adds a rigorous bound for the discarded tail, and finally
//! widens by a Lipschitz-type bound for the input radius.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::ball::Ball;
use super::float::Float;
use super::mag::Mag;
use super::{NumericsError, Precision, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Constant {
    Pi,
    Ln2,
}

fn constant_cache() -> &'static Mutex<HashMap<(Constant, u32), Ball>> {
    static CACHE: OnceLock<Mutex<HashMap<(Constant, u32), Ball>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(c: Constant, prec: Precision, compute: fn(Precision) -> Ball) -> Ball {
    // Round requests up to a multiple of 64 bits so the cache stays small.
    let bits = prec.bits().div_ceil(64) * 64;
    if let Some(b) = constant_cache().lock().expect("constant cache poisoned").get(&(c, bits)) {
        return b.round(prec);
    }
    let value = compute(Precision(bits));
    constant_cache()
        .lock()
        .expect("constant cache poisoned")
        .entry((c, bits))
        .or_insert(value)
        .round(prec)
}

/// `atan(1/k)` for an integer `k >= 2` by its alternating series.
fn atan_recip(k: i64, prec: Precision) -> Ball {
    let wp = prec.guarded(16);
    let k2 = Ball::from_i64(k * k);
    let mut power = Ball::from_i64(k).recip(wp).expect("k != 0");
    let mut sum = Ball::zero();
    let mut j: i64 = 0;
    loop {
        let term = power.div_i64(2 * j + 1, wp).expect("odd denominator");
        sum = if j % 2 == 0 { sum.add(&term, wp) } else { sum.sub(&term, wp) };
        power = power.div(&k2, wp).expect("k^2 != 0");
        j += 1;
        if power.abs_upper().msb() < -(wp.bits() as i64) - 4 {
            break;
        }
    }
    // Alternating with decreasing terms: remainder below the next term.
    sum.add_error(power.abs_upper()).round(prec)
}

fn compute_pi(prec: Precision) -> Ball {
    let wp = prec.guarded(8);
    let a = atan_recip(5, wp).mul_2exp(4);
    let b = atan_recip(239, wp).mul_2exp(2);
    a.sub(&b, wp).round(prec)
}

/// `2 atanh(y)` for `|y| <= 1/3` from the odd power series.
fn two_atanh(y: &Ball, prec: Precision) -> Ball {
    let wp = prec.guarded(16);
    if y.is_exact_zero() {
        return Ball::zero();
    }
    let y2 = y.sqr(wp);
    let mut power = y.clone();
    let mut sum = Ball::zero();
    let mut j: i64 = 0;
    loop {
        sum = sum.add(&power.div_i64(2 * j + 1, wp).expect("odd"), wp);
        power = power.mul(&y2, wp);
        j += 1;
        if power.abs_upper().msb() < -(wp.bits() as i64) - 4 {
            break;
        }
    }
    // Tail: sum_{i>=j} |y|^(2i+1)/(2i+1) <= |y|^(2j+1) / (1 - y^2) <= 2 |y|^(2j+1).
    sum.add_error(power.abs_upper().mul_2exp(1)).mul_2exp(1).round(prec)
}

fn compute_ln2(prec: Precision) -> Ball {
    // ln 2 = 2 atanh(1/3)
    let wp = prec.guarded(8);
    two_atanh(&Ball::from_ratio(1, 3, wp), wp).round(prec)
}

/// Enclosure of pi at `prec` bits (cached).
pub fn pi(prec: Precision) -> Ball {
    cached(Constant::Pi, prec, compute_pi)
}

/// Enclosure of ln 2 at `prec` bits (cached).
pub fn ln2(prec: Precision) -> Ball {
    cached(Constant::Ln2, prec, compute_ln2)
}

/// Guard bits proportional to the magnitude of an argument.
fn magnitude_guard(x: &Float) -> u32 {
    x.msb().clamp(0, 1 << 20) as u32
}

impl Ball {
    /// Enclosure of `e^x`.
    pub fn exp(&self, prec: Precision) -> Result<Ball> {
        let point = exp_point(self.mid(), prec)?;
        if self.is_exact() {
            return Ok(point);
        }
        // |e^x - e^m| <= e^m (e^r - 1) for |x - m| <= r.
        let r = self.rad();
        let growth = expm1_upper(r, prec)?;
        Ok(point.add_error(point.abs_upper().mul(growth)))
    }

    /// Enclosure of `ln x`; the whole ball must be positive.
    pub fn ln(&self, prec: Precision) -> Result<Ball> {
        if !self.is_positive() {
            return Err(NumericsError::Domain("logarithm of a ball touching <= 0".into()));
        }
        let point = ln_point(self.mid(), prec)?;
        if self.is_exact() {
            return Ok(point);
        }
        // |ln x - ln m| <= r / (m - r).
        let lo = Mag::from_float_down(self.mid()).sub_down(self.rad());
        Ok(point.add_error(self.rad().div(lo)))
    }

    pub fn sin(&self, prec: Precision) -> Result<Ball> {
        Ok(self.sin_cos(prec)?.0)
    }

    pub fn cos(&self, prec: Precision) -> Result<Ball> {
        Ok(self.sin_cos(prec)?.1)
    }

    /// Simultaneous enclosures of `sin x` and `cos x`.
    pub fn sin_cos(&self, prec: Precision) -> Result<(Ball, Ball)> {
        let (s, c) = sin_cos_point(self.mid(), prec)?;
        if self.is_exact() {
            return Ok((s, c));
        }
        // Both are 1-Lipschitz and bounded by one.
        Ok((clamp_unit(s.add_error(self.rad()), prec), clamp_unit(c.add_error(self.rad()), prec)))
    }

    /// Enclosure of `sqrt x`; fails if the ball reaches below zero.
    pub fn sqrt(&self, prec: Precision) -> Result<Ball> {
        if self.is_exact_zero() {
            return Ok(Ball::zero());
        }
        if !self.is_positive() {
            return Err(NumericsError::Domain("square root of a ball touching <= 0".into()));
        }
        let (root, err) = self.mid().sqrt_round(prec.bits());
        let mut out = Ball::new(root.clone(), err);
        if !self.is_exact() {
            // |sqrt x - sqrt m| <= r / sqrt m.
            let lo = Mag::from_float_down(&root).sub_down(err);
            if lo.is_zero() {
                return Err(NumericsError::Domain("square root input too close to zero".into()));
            }
            out = out.add_error(self.rad().div(lo));
        }
        Ok(out)
    }

    /// Real power `x^q` for rational `q` and positive `x`, via `exp(q ln x)`.
    pub fn pow_rational(&self, q: &BigRational, prec: Precision) -> Result<Ball> {
        if q.is_integer() {
            let n = q.to_integer().to_i64().ok_or_else(|| NumericsError::Overflow("integer power".into()))?;
            return self.pow_int(n, prec);
        }
        let wp = prec.guarded(16 + magnitude_guard(self.mid()).min(64));
        let l = self.ln(wp)?;
        let e = l.mul(&Ball::from_rational(q, wp), wp);
        Ok(e.exp(wp)?.round(prec))
    }
}

fn clamp_unit(b: Ball, prec: Precision) -> Ball {
    if b.rad() > Mag::one() {
        let unit = Ball::new(Float::zero(), Mag::one());
        let lo = b.lower().max(Float::from_i64(-1));
        let hi = b.upper().min(Float::one());
        if lo >= hi {
            return unit;
        }
        return Ball::from_endpoints(&lo, &hi, prec);
    }
    b
}

/// Upper bound of `e^r - 1` for `r >= 0`.
fn expm1_upper(r: Mag, prec: Precision) -> Result<Mag> {
    if r <= Mag::one() {
        // e^r - 1 <= r + r^2 for 0 <= r <= 1.
        return Ok(r.add(r.mul(r)));
    }
    let e = exp_point(&r.to_float(), Precision(prec.bits().min(64)))?;
    Ok(e.abs_upper())
}

/// Largest argument magnitude accepted by `exp` (keeps exponents in `i64`).
const EXP_ARG_MSB_LIMIT: i64 = 60;

fn exp_point(m: &Float, prec: Precision) -> Result<Ball> {
    if m.is_zero() {
        return Ok(Ball::one());
    }
    if m.msb() > EXP_ARG_MSB_LIMIT {
        return Err(NumericsError::Overflow(format!("exp argument of magnitude 2^{}", m.msb())));
    }
    let wp0 = prec.bits() + 16;
    if m.msb() < -(wp0 as i64) {
        // e^m = 1 + m + O(m^2); |e^m - 1 - m| <= m^2 for |m| < 1.
        let one_plus = Ball::one().add(&Ball::exact(m.clone()), Precision(wp0));
        let err = Mag::pow2(2 * (m.msb() + 1));
        return Ok(one_plus.add_error(err).round(prec));
    }
    // Reduction: m = q ln2 + r with |r| <= ~ln2/2.
    let qbits = magnitude_guard(m) + 2;
    let wp = Precision(wp0 + qbits);
    let q = {
        let approx = Ball::exact(m.clone()).div(&ln2(Precision(64 + qbits)), Precision(64 + qbits))?;
        approx.mid().round_to_integer()
    };
    let q_i64 = q.to_i64().ok_or_else(|| NumericsError::Overflow("exp reduction".into()))?;
    let r = Ball::exact(m.clone()).sub(&ln2(wp).mul(&Ball::from_bigint(q), wp), wp);
    // Halve s times, sum the Taylor series, square back.
    let s: u32 = ((prec.bits() as f64).sqrt() / 2.0).ceil() as u32;
    let wp = Precision(wp0 + s + 8);
    let x = r.mul_2exp(-(s as i64)).round(wp);
    let mut sum = Ball::one();
    let mut term = Ball::one();
    let mut j: i64 = 1;
    loop {
        term = term.mul(&x, wp).div_i64(j, wp)?;
        sum = sum.add(&term, wp);
        if term.abs_upper().msb() < -(wp.bits() as i64) - 4 {
            break;
        }
        j += 1;
    }
    // |x| < 1 so the remainder is at most twice the next term, itself below |term|.
    sum = sum.add_error(term.abs_upper().mul(x.abs_upper()).mul_2exp(1));
    for _ in 0..s {
        sum = sum.sqr(wp);
    }
    Ok(sum.mul_2exp(q_i64).round(prec))
}

fn ln_point(m: &Float, prec: Precision) -> Result<Ball> {
    debug_assert!(m.is_positive());
    if *m == Float::one() {
        return Ok(Ball::zero());
    }
    // m = f * 2^e with f in [1/sqrt2, sqrt2).
    let mut e = m.msb();
    let mut f = m.mul_2exp(-e);
    // f in [1, 2); compare against sqrt2 ~ 1.41421356
    if f > Float::from_f64(std::f64::consts::SQRT_2).expect("finite") {
        f = f.mul_2exp(-1);
        e += 1;
    }
    let wp = prec.guarded(16 + (64 - e.unsigned_abs().leading_zeros()));
    let fb = Ball::exact(f);
    let y = fb.sub(&Ball::one(), wp).div(&fb.add(&Ball::one(), wp), wp)?;
    let mut out = two_atanh(&y, wp);
    if e != 0 {
        out = out.add(&ln2(wp).mul(&Ball::from_i64(e), wp), wp);
    }
    Ok(out.round(prec))
}

fn sin_cos_point(m: &Float, prec: Precision) -> Result<(Ball, Ball)> {
    if m.is_zero() {
        return Ok((Ball::zero(), Ball::one()));
    }
    let guard = magnitude_guard(m);
    let wp = prec.guarded(16 + guard);
    // q = round(m / (pi/2)), r = m - q pi/2.
    let half_pi = pi(wp).mul_2exp(-1);
    let (r, quadrant) = if m.msb() < 0 {
        (Ball::exact(m.clone()), 0u8)
    } else {
        let q = Ball::exact(m.clone()).div(&half_pi, Precision(64 + guard))?.mid().round_to_integer();
        let quadrant = (q.clone() % BigInt::from(4)).to_i64().unwrap_or(0).rem_euclid(4) as u8;
        let r = Ball::exact(m.clone()).sub(&half_pi.mul(&Ball::from_bigint(q), wp), wp);
        (r, quadrant)
    };
    let wp = prec.guarded(16);
    let r = r.round(wp);
    let r2 = r.sqr(wp);
    // sin r = sum (-1)^j r^(2j+1)/(2j+1)!, cos r = sum (-1)^j r^(2j)/(2j)!
    let mut s_term = r.clone();
    let mut c_term = Ball::one();
    let mut s = r.clone();
    let mut c = Ball::one();
    let mut j: i64 = 1;
    loop {
        c_term = c_term.mul(&r2, wp).div_i64((2 * j - 1) * (2 * j), wp)?.neg();
        s_term = s_term.mul(&r2, wp).div_i64((2 * j) * (2 * j + 1), wp)?.neg();
        c = c.add(&c_term, wp);
        s = s.add(&s_term, wp);
        if s_term.abs_upper().msb() < -(wp.bits() as i64) - 4 && c_term.abs_upper().msb() < -(wp.bits() as i64) - 4 {
            break;
        }
        j += 1;
    }
    // Lagrange remainder bounded by the next term in each series; |r| < 1 here.
    let next = s_term.abs_upper().max(c_term.abs_upper());
    s = s.add_error(next);
    c = c.add_error(next);
    let (s, c) = match quadrant {
        0 => (s, c),
        1 => (c, s.neg()),
        2 => (s.neg(), c.neg()),
        _ => (c.neg(), s),
    };
    Ok((clamp_unit(s.round(prec), prec), clamp_unit(c.round(prec), prec)))
}

/// Enclosure of `2^q` for rational `q`; exact when `q` is an integer.
pub fn pow2_rational(q: &BigRational, prec: Precision) -> Result<Ball> {
    if q.is_integer() {
        let e = q.to_integer().to_i64().ok_or_else(|| NumericsError::Overflow("2^q".into()))?;
        return Ok(Ball::pow2(e));
    }
    let whole = q.floor();
    let frac = q - &whole;
    let e = whole.to_integer().to_i64().ok_or_else(|| NumericsError::Overflow("2^q".into()))?;
    let wp = prec.guarded(8);
    let arg = ln2(wp).mul(&Ball::from_rational(&frac, wp), wp);
    Ok(arg.exp(wp)?.mul_2exp(e).round(prec))
}

/// `ln n!` as the exact sum of `ln i`, evaluated in blocks of exact integer
/// products so that only one logarithm per block is taken.
pub fn ln_factorial(n: u64, prec: Precision) -> Result<Ball> {
    if n <= 1 {
        return Ok(Ball::zero());
    }
    let wp = prec.guarded(24 + (64 - n.leading_zeros()));
    const BLOCK_BITS: u64 = 2048;
    let mut total = Ball::zero();
    let mut block = BigUint::one();
    for i in 2..=n {
        block *= i;
        if block.bits() >= BLOCK_BITS {
            total = total.add(&Ball::from_bigint(BigInt::from(std::mem::replace(&mut block, BigUint::one()))).ln(wp)?, wp);
        }
    }
    if !block.is_one() && !block.is_zero() {
        total = total.add(&Ball::from_bigint(BigInt::from(block)).round(wp).ln(wp)?, wp);
    }
    Ok(total.round(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    #[test]
    fn exp_of_exact_zero_is_one() {
        let e = Ball::zero().exp(p(128)).unwrap();
        assert_eq!(e, Ball::one());
    }

    #[test]
    fn constants_match_f64() {
        assert!(pi(p(128)).contains_f64(std::f64::consts::PI) || pi(p(128)).overlaps(&Ball::from_f64(std::f64::consts::PI).unwrap().add_error(Mag::pow2(-50))));
        let l = ln2(p(128));
        assert!((l.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(l.rad().msb() < -120);
    }

    #[test]
    fn exp_log_inverse() {
        let x = Ball::from_ratio(7, 3, p(192));
        let y = x.exp(p(192)).unwrap().ln(p(192)).unwrap();
        assert!(y.overlaps(&x));
        assert!(y.rad().msb() < -180);
    }

    #[test]
    fn sin_of_pi_contains_zero() {
        let s = pi(p(128)).sin(p(128)).unwrap();
        assert!(s.contains_zero());
        assert!(s.rad().msb() < -110);
    }

    #[test]
    fn sin_cos_large_argument() {
        // 2^40 + 0.5: reference from mpmath.
        let x = Ball::from_f64(1099511627776.5).unwrap();
        let (s, c) = x.sin_cos(p(128)).unwrap();
        assert!((s.to_f64() - (-0.7942365378937300)).abs() < 1e-12, "{s}");
        assert!((c.to_f64() - -0.6076086914080325).abs() < 1e-12, "{c}");
    }

    #[test]
    fn sqrt_and_pow_rational() {
        let two = Ball::from_i64(2);
        let r = two.sqrt(p(128)).unwrap();
        assert!(r.sqr(p(128)).contains_float(&Float::from_i64(2)));
        let half = BigRational::new(1.into(), 2.into());
        let r2 = two.pow_rational(&half, p(128)).unwrap();
        assert!(r.overlaps(&r2));
        assert!(pow2_rational(&half, p(128)).unwrap().overlaps(&r));
    }

    #[test]
    fn log_domain_errors() {
        assert!(Ball::zero().ln(p(64)).is_err());
        assert!(Ball::from_i64(-1).sqrt(p(64)).is_err());
        let straddle = Ball::new(Float::from_f64(0.1).unwrap(), Mag::from_f64_up(0.5));
        assert!(straddle.ln(p(64)).is_err());
    }

    #[test]
    fn ln_factorial_small_and_stirling() {
        let l10 = ln_factorial(10, p(128)).unwrap();
        assert!((l10.to_f64() - 3628800f64.ln()).abs() < 1e-12);
        let n = 100f64;
        let stirling = n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln();
        let l = ln_factorial(100, p(128)).unwrap().to_f64();
        assert!((l - stirling).abs() <= 1.0 / (12.0 * n - 1.0));
        assert!(l - stirling > 0.0);
    }

    #[test]
    fn exp_huge_negative_argument() {
        let e = Ball::from_i64(-1_000_000).exp(p(128)).unwrap();
        assert!(e.is_positive());
        let back = e.ln(p(128)).unwrap();
        assert!(back.contains_f64(-1_000_000.0));
    }
}
