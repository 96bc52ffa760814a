//! Binary floating-point midpoints: `man * 2^exp` with a big-integer mantissa.
//!
//! Values are kept canonical (odd mantissa, or zero with exponent zero), so
//! structural equality is numeric equality and output is bit-reproducible.
//! The exponent is an `i64`, which no reachable computation exhausts.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::mag::Mag;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Float {
    man: BigInt,
    exp: i64,
}

impl Float {
    pub fn new(man: BigInt, exp: i64) -> Float {
        let mut f = Float { man, exp };
        f.canonicalize();
        f
    }

    fn canonicalize(&mut self) {
        if self.man.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.man.trailing_zeros() {
            if tz > 0 {
                self.man >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn zero() -> Float {
        Float { man: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Float {
        Float { man: BigInt::one(), exp: 0 }
    }

    pub fn from_i64(v: i64) -> Float {
        Float::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Float {
        Float::new(v, 0)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Float> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Float::zero());
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (man, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let m = BigInt::from(man);
        Some(Float::new(if neg { -m } else { m }, exp))
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64) -> Float {
        Float { man: BigInt::one(), exp: e }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.man.is_positive()
    }

    pub fn signum(&self) -> i8 {
        match self.man.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Number of significant bits in the mantissa.
    pub fn bits(&self) -> u64 {
        self.man.bits()
    }

    /// `floor(log2 |self|)`; `i64::MIN` for zero.
    pub fn msb(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + self.man.bits() as i64 - 1
        }
    }

    pub fn neg(&self) -> Float {
        Float { man: -&self.man, exp: self.exp }
    }

    pub fn abs(&self) -> Float {
        Float { man: self.man.abs(), exp: self.exp }
    }

    pub fn mul_2exp(&self, e: i64) -> Float {
        if self.is_zero() {
            return Float::zero();
        }
        Float { man: self.man.clone(), exp: self.exp + e }
    }

    pub fn add_exact(&self, other: &Float) -> Float {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << (self.exp - e) as usize;
        let b = &other.man << (other.exp - e) as usize;
        Float::new(a + b, e)
    }

    pub fn sub_exact(&self, other: &Float) -> Float {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Float) -> Float {
        if self.is_zero() || other.is_zero() {
            return Float::zero();
        }
        Float { man: &self.man * &other.man, exp: self.exp + other.exp }
    }

    /// Truncate toward zero to at most `prec` significant bits. The second
    /// component bounds the discarded part.
    pub fn round(&self, prec: u32) -> (Float, Mag) {
        let bits = self.man.bits();
        if bits <= prec as u64 {
            return (self.clone(), Mag::ZERO);
        }
        let shift = bits - prec as u64;
        let mag = self.man.magnitude() >> shift;
        let kept = BigInt::from_biguint(self.man.sign(), mag);
        let exp = self.exp + shift as i64;
        // Canonical form has an odd mantissa, so dropped bits are nonzero.
        (Float::new(kept, exp), Mag::pow2(exp))
    }

    /// Rounded sum; skips the exact alignment when `other` lies far below
    /// the working precision of `self` (and vice versa).
    pub fn add_round(&self, other: &Float, prec: u32) -> (Float, Mag) {
        if self.is_zero() {
            return other.round(prec);
        }
        if other.is_zero() {
            return self.round(prec);
        }
        let (big, small) = if self.msb() >= other.msb() { (self, other) } else { (other, self) };
        if small.msb() < big.msb() - prec as i64 - 4 {
            let (r, err) = big.round(prec);
            let small_mag = Mag::pow2(small.msb() + 1);
            return (r, err.add(small_mag));
        }
        self.add_exact(other).round(prec)
    }

    pub fn mul_round(&self, other: &Float, prec: u32) -> (Float, Mag) {
        self.mul_exact(other).round(prec)
    }

    /// Truncated quotient with `prec` bits. Panics if `other` is zero.
    pub fn div_round(&self, other: &Float, prec: u32) -> (Float, Mag) {
        assert!(!other.is_zero(), "Float division by zero");
        if self.is_zero() {
            return (Float::zero(), Mag::ZERO);
        }
        // Shift so that the integer quotient carries >= prec + 1 bits.
        let shift = (prec as i64 + 2 + other.bits() as i64 - self.bits() as i64).max(0);
        let num = &self.man << shift as usize;
        let (q, r) = num.div_rem(&other.man);
        let exp = self.exp - other.exp - shift;
        let q = Float::new(q, exp);
        let (q, err) = q.round(prec);
        let err = if r.is_zero() { err } else { err.add(Mag::pow2(exp)) };
        (q, err)
    }

    /// `floor(sqrt(self))` to `prec` bits with error bound; `self >= 0`.
    pub fn sqrt_round(&self, prec: u32) -> (Float, Mag) {
        assert!(!self.is_negative(), "sqrt of negative Float");
        if self.is_zero() {
            return (Float::zero(), Mag::ZERO);
        }
        // man * 2^exp = (man << s) * 2^(exp - s) with exp - s even.
        let mut s = (2 * (prec as i64 + 2) - self.bits() as i64).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let n: BigUint = self.man.magnitude() << s as usize;
        let root = n.sqrt();
        let exact = &root * &root == n;
        let half = (self.exp - s) / 2;
        let r = Float::new(BigInt::from(root), half);
        let (r, err) = r.round(prec);
        let err = if exact { err } else { err.add(Mag::pow2(half)) };
        (r, err)
    }

    /// Nearest integer (ties away from zero).
    pub fn round_to_integer(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.man << self.exp as usize;
        }
        let shift = (-self.exp) as usize;
        let half = BigInt::one() << (shift - 1);
        if self.man.is_negative() {
            -((-&self.man + half) >> shift)
        } else {
            (&self.man + half) >> shift
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << self.exp as usize
        } else {
            // Arithmetic shift rounds toward -inf.
            &self.man >> (-self.exp) as usize
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    pub fn is_integer(&self) -> bool {
        self.exp >= 0 || self.is_zero()
    }

    /// Approximate `f64` (saturating); display and heuristics only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits();
        let (m, e) = if bits > 64 {
            let shift = bits - 64;
            ((&self.man >> shift as usize).to_f64().unwrap_or(0.0), self.exp + shift as i64)
        } else {
            (self.man.to_f64().unwrap_or(0.0), self.exp)
        };
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        // Split the scaling so intermediate powers stay finite.
        let half = (e / 2) as i32;
        m * 2f64.powi(half) * 2f64.powi(e as i32 - half)
    }
}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Float {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let mag_order = match self.msb().cmp(&other.msb()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let a = self.man.magnitude() << (self.exp - e) as usize;
                let b = other.man.magnitude() << (other.exp - e) as usize;
                a.cmp(&b)
            }
            o => o,
        };
        if sa > 0 {
            mag_order
        } else {
            mag_order.reverse()
        }
    }
}
