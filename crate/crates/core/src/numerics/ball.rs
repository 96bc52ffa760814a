use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::float::Float;
use super::mag::Mag;
use super::{NumericsError, Precision, Result};

/// Midpoint-radius enclosure `[mid - rad, mid + rad]` of a real number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    mid: Float,
    rad: Mag,
}

impl Ball {
    pub fn new(mid: Float, rad: Mag) -> Ball {
        Ball { mid, rad }
    }

    pub fn exact(mid: Float) -> Ball {
        Ball { mid, rad: Mag::ZERO }
    }

    pub fn zero() -> Ball {
        Ball::exact(Float::zero())
    }

    pub fn one() -> Ball {
        Ball::exact(Float::one())
    }

    pub fn from_i64(v: i64) -> Ball {
        Ball::exact(Float::from_i64(v))
    }

    pub fn from_bigint(v: BigInt) -> Ball {
        Ball::exact(Float::from_bigint(v))
    }

    /// Exact ball around a finite `f64`.
    pub fn from_f64(v: f64) -> Result<Ball> {
        Float::from_f64(v)
            .map(Ball::exact)
            .ok_or_else(|| NumericsError::Domain(format!("non-finite input {v}")))
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64) -> Ball {
        Ball::exact(Float::pow2(e))
    }

    /// Enclosure of a rational; exact when the denominator is a power of two.
    pub fn from_rational(q: &BigRational, prec: Precision) -> Ball {
        let num = Float::from_bigint(q.numer().clone());
        let den = q.denom();
        if den.is_one() {
            return Ball::exact(num);
        }
        let tz = den.trailing_zeros().unwrap_or(0);
        if (den >> tz as usize).is_one() {
            return Ball::exact(num.mul_2exp(-(tz as i64)));
        }
        let (q, err) = num.div_round(&Float::from_bigint(den.clone()), prec.bits());
        Ball::new(q, err)
    }

    /// Smallest ball (at `prec` bits) containing `[lo, hi]`.
    pub fn from_endpoints(lo: &Float, hi: &Float, prec: Precision) -> Ball {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let (mid, err) = lo.add_round(hi, prec.bits() + 8);
        let mid = mid.mul_2exp(-1);
        let err = err.mul_2exp(-1);
        let width = hi.sub_exact(lo);
        let half = Mag::from_float_up(&width).mul_2exp(-1);
        Ball::new(mid, half.add(err)).round(prec)
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> Mag {
        self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.rad.is_zero() && self.mid.is_zero()
    }

    /// Widen by `err`.
    pub fn add_error(&self, err: Mag) -> Ball {
        Ball { mid: self.mid.clone(), rad: self.rad.add(err) }
    }

    /// Re-round the midpoint to `prec` bits, folding the error into the radius.
    pub fn round(&self, prec: Precision) -> Ball {
        let (mid, err) = self.mid.round(prec.bits());
        Ball { mid, rad: self.rad.add(err) }
    }

    fn bound_prec(&self) -> u32 {
        (self.mid.bits() as u32).max(32) + 32
    }

    /// A value `<=` every point of the ball.
    pub fn lower(&self) -> Float {
        directed_sum(&self.mid, &self.rad.to_float().neg(), self.bound_prec(), false)
    }

    /// A value `>=` every point of the ball.
    pub fn upper(&self) -> Float {
        directed_sum(&self.mid, &self.rad.to_float(), self.bound_prec(), true)
    }

    /// Upper bound on `|x|` over the ball.
    pub fn abs_upper(&self) -> Mag {
        Mag::from_float_up(&self.mid).add(self.rad)
    }

    /// Lower bound on `|x|` over the ball (zero when it straddles zero).
    pub fn abs_lower(&self) -> Mag {
        Mag::from_float_down(&self.mid).sub_down(self.rad)
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad.to_float()
    }

    /// Every point is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.mid.is_positive() && self.mid > self.rad.to_float()
    }

    pub fn is_negative(&self) -> bool {
        self.mid.is_negative() && self.mid.abs() > self.rad.to_float()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.mid.is_negative() && self.mid >= self.rad.to_float()
    }

    /// Exact membership test for a finite `f64`.
    pub fn contains_f64(&self, v: f64) -> bool {
        match Float::from_f64(v) {
            Some(f) => self.contains_float(&f),
            None => false,
        }
    }

    pub fn contains_float(&self, v: &Float) -> bool {
        v.sub_exact(&self.mid).abs() <= self.rad.to_float()
    }

    /// `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Ball) -> bool {
        let gap = other.mid.sub_exact(&self.mid).abs().add_exact(&other.rad.to_float());
        gap <= self.rad.to_float()
    }

    /// The two enclosures share at least one point.
    pub fn overlaps(&self, other: &Ball) -> bool {
        let gap = other.mid.sub_exact(&self.mid).abs();
        gap <= self.rad.to_float().add_exact(&other.rad.to_float())
    }

    /// Certified comparison: `Some(true)` if every point of `self` is below every
    /// point of `other`, `Some(false)` if every point is at or above, `None` otherwise.
    pub fn certified_lt(&self, other: &Ball) -> Option<bool> {
        if self.upper() < other.lower() {
            Some(true)
        } else if self.lower() >= other.upper() {
            Some(false)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: self.mid.neg(), rad: self.rad }
    }

    /// Enclosure of `|x|`.
    pub fn abs(&self) -> Ball {
        if !self.contains_zero() {
            return Ball { mid: self.mid.abs(), rad: self.rad };
        }
        let hi = self.abs_upper().to_float();
        Ball { mid: hi.mul_2exp(-1), rad: self.abs_upper().mul_2exp(-1) }
    }

    /// Exact scaling by `2^e`.
    pub fn mul_2exp(&self, e: i64) -> Ball {
        Ball { mid: self.mid.mul_2exp(e), rad: self.rad.mul_2exp(e) }
    }

    pub fn add(&self, other: &Ball, prec: Precision) -> Ball {
        let (mid, err) = self.mid.add_round(&other.mid, prec.bits());
        Ball { mid, rad: self.rad.add(other.rad).add(err) }
    }

    pub fn sub(&self, other: &Ball, prec: Precision) -> Ball {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Ball, prec: Precision) -> Ball {
        let (mid, err) = self.mid.mul_round(&other.mid, prec.bits());
        let a = Mag::from_float_up(&self.mid);
        let b = Mag::from_float_up(&other.mid);
        let rad = a.mul(other.rad).add(b.mul(self.rad)).add(self.rad.mul(other.rad)).add(err);
        Ball { mid, rad }
    }

    pub fn sqr(&self, prec: Precision) -> Ball {
        self.mul(self, prec)
    }

    pub fn mul_i64(&self, k: i64, prec: Precision) -> Ball {
        self.mul(&Ball::from_i64(k), prec)
    }

    /// Quotient; fails when the divisor ball contains zero.
    pub fn div(&self, other: &Ball, prec: Precision) -> Result<Ball> {
        if other.contains_zero() {
            return Err(NumericsError::Domain("division by a ball containing zero".into()));
        }
        let (q, err) = self.mid.div_round(&other.mid, prec.bits());
        if other.rad.is_zero() && self.rad.is_zero() {
            return Ok(Ball { mid: q, rad: err });
        }
        // |x/y - a/b| <= (ra + |a/b| rb) / (|b| - rb) for x in A, y in B.
        let q_abs = Mag::from_float_up(&q).add(err);
        let num = self.rad.add(q_abs.mul(other.rad));
        let den = Mag::from_float_down(&other.mid).sub_down(other.rad);
        Ok(Ball { mid: q, rad: num.div(den).add(err) })
    }

    pub fn div_i64(&self, k: i64, prec: Precision) -> Result<Ball> {
        self.div(&Ball::from_i64(k), prec)
    }

    pub fn recip(&self, prec: Precision) -> Result<Ball> {
        Ball::one().div(self, prec)
    }

    /// Integer power by repeated squaring; negative exponents divide.
    pub fn pow_int(&self, n: i64, prec: Precision) -> Result<Ball> {
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        let mut acc = Ball::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr(prec);
            }
        }
        if n < 0 {
            acc.recip(prec)
        } else {
            Ok(acc)
        }
    }

    /// Convex hull of two balls.
    pub fn union(&self, other: &Ball, prec: Precision) -> Ball {
        let lo = self.lower().min(other.lower());
        let hi = self.upper().max(other.upper());
        Ball::from_endpoints(&lo, &hi, prec)
    }

    /// Nearest `f64` to the midpoint.
    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Enclosure of `x` as an exact rational would be; used to seed balls from
    /// integers without loss.
    pub fn from_ratio(num: i64, den: i64, prec: Precision) -> Ball {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        Ball::from_rational(&q, prec)
    }

    pub fn signum_certified(&self) -> Option<i8> {
        if self.is_exact_zero() {
            Some(0)
        } else if self.is_positive() {
            Some(1)
        } else if self.is_negative() {
            Some(-1)
        } else {
            None
        }
    }
}

/// `a + b` rounded up (`up = true`) or down to about `prec` bits.
fn directed_sum(a: &Float, b: &Float, prec: u32, up: bool) -> Float {
    let (r, err) = a.add_round(b, prec);
    if err.is_zero() {
        return r;
    }
    let e = err.to_float();
    if up {
        r.add_exact(&e)
    } else {
        r.sub_exact(&e)
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e} +/- {}]", self.mid.to_f64(), self.rad)
    }
}

impl From<i64> for Ball {
    fn from(v: i64) -> Self {
        Ball::from_i64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::new(64).unwrap()
    }

    #[test]
    fn exact_integer_arithmetic_stays_exact() {
        let a = Ball::from_i64(12345);
        let b = Ball::from_i64(-678);
        assert_eq!(a.add(&b, p()), Ball::from_i64(11667));
        assert_eq!(a.mul(&b, p()), Ball::from_i64(-8369910));
        assert!(a.mul(&b, p()).is_exact());
    }

    #[test]
    fn division_by_zero_ball_rejected() {
        let z = Ball::new(Float::from_f64(0.1).unwrap(), Mag::from_f64_up(0.2));
        assert!(Ball::one().div(&z, p()).is_err());
    }

    #[test]
    fn third_contains_rational() {
        let third = Ball::from_ratio(1, 3, p());
        let back = third.mul_i64(3, p());
        assert!(back.contains_float(&Float::one()));
        assert!(!third.is_exact());
    }

    #[test]
    fn bounds_and_signs() {
        let b = Ball::new(Float::from_f64(1.0).unwrap(), Mag::from_f64_up(0.25));
        assert!(b.is_positive());
        assert!(b.lower() <= Float::from_f64(0.75).unwrap());
        assert!(b.upper() >= Float::from_f64(1.25).unwrap());
        let s = Ball::new(Float::from_f64(0.1).unwrap(), Mag::from_f64_up(0.25));
        assert!(s.contains_zero());
        assert_eq!(s.signum_certified(), None);
        assert!(s.abs().contains_f64(0.35) && s.abs().contains_f64(0.0));
    }

    #[test]
    fn pow_int_matches_repeated_product() {
        let x = Ball::from_ratio(7, 5, p());
        let a = x.pow_int(5, p()).unwrap();
        let mut b = Ball::one();
        for _ in 0..5 {
            b = b.mul(&x, p());
        }
        assert!(a.overlaps(&b));
        assert!(a.overlaps(&Ball::from_ratio(16807, 3125, p())));
        let inv = x.pow_int(-2, p()).unwrap();
        assert!(inv.contains_f64(1.0 / 1.96) || inv.overlaps(&Ball::from_ratio(25, 49, p())));
    }

    #[test]
    fn contains_and_overlaps() {
        let big = Ball::new(Float::zero(), Mag::one());
        let small = Ball::new(Float::from_f64(0.5).unwrap(), Mag::from_f64_up(0.25));
        assert!(big.contains(&small));
        assert!(!small.contains(&big));
        let far = Ball::new(Float::from_f64(3.0).unwrap(), Mag::one());
        assert!(!big.overlaps(&far));
        assert!(small.overlaps(&big));
    }
}
