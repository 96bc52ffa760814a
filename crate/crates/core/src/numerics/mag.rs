//! Low-precision nonnegative magnitudes with directed rounding.
//!
//! A [`Mag`] stores `man * 2^exp` with a 32-bit normalized mantissa. Every
//! operation has an explicit rounding direction so that radii only ever grow
//! and lower bounds only ever shrink.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};

use super::float::Float;

const MAG_BITS: u32 = 32;
const MAN_MIN: u64 = 1 << (MAG_BITS - 1);
const MAN_MAX: u64 = 1 << MAG_BITS;

/// Nonnegative real `man * 2^exp`, `man` in `[2^31, 2^32)` or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mag {
    man: u64,
    exp: i64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Round {
    Up,
    Down,
}

fn normalize(mut man: u128, mut exp: i64, round: Round) -> Mag {
    if man == 0 {
        return Mag::ZERO;
    }
    let bits = 128 - man.leading_zeros();
    if bits > MAG_BITS {
        let shift = bits - MAG_BITS;
        let dropped = man & ((1u128 << shift) - 1);
        man >>= shift;
        exp += shift as i64;
        if round == Round::Up && dropped != 0 {
            man += 1;
            if man == MAN_MAX as u128 {
                man >>= 1;
                exp += 1;
            }
        }
    } else if bits < MAG_BITS {
        let shift = MAG_BITS - bits;
        man <<= shift;
        exp -= shift as i64;
    }
    Mag { man: man as u64, exp }
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };

    pub fn one() -> Mag {
        Mag::pow2(0)
    }

    /// Exactly `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag { man: MAN_MIN, exp: e - (MAG_BITS as i64 - 1) }
    }

    pub fn from_u64(v: u64) -> Mag {
        normalize(v as u128, 0, Round::Up)
    }

    /// Smallest `Mag` not below `|v|`; `v` must be finite.
    pub fn from_f64_up(v: f64) -> Mag {
        Self::from_f64(v, Round::Up)
    }

    /// Largest `Mag` not above `|v|`.
    pub fn from_f64_down(v: f64) -> Mag {
        Self::from_f64(v, Round::Down)
    }

    fn from_f64(v: f64, round: Round) -> Mag {
        assert!(v.is_finite(), "non-finite magnitude");
        let v = v.abs();
        if v == 0.0 {
            return Mag::ZERO;
        }
        let bits = v.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (man, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        normalize(man as u128, exp, round)
    }

    pub fn from_float_up(x: &Float) -> Mag {
        Self::from_float(x, Round::Up)
    }

    pub fn from_float_down(x: &Float) -> Mag {
        Self::from_float(x, Round::Down)
    }

    fn from_float(x: &Float, round: Round) -> Mag {
        if x.is_zero() {
            return Mag::ZERO;
        }
        let man = x.mantissa().magnitude();
        let bits = man.bits();
        if bits <= 64 {
            let digits = man.to_u64_digits();
            let v = digits.first().copied().unwrap_or(0);
            return normalize(v as u128, x.exponent(), round);
        }
        let shift = bits - 64;
        let top = man >> shift;
        let top = top.to_u64_digits()[0];
        let exact = man.trailing_zeros().is_none_or(|tz| tz >= shift);
        let mut m = normalize(top as u128, x.exponent() + shift as i64, round);
        if round == Round::Up && !exact {
            m = m.add_ulp();
        }
        m
    }

    fn add_ulp(self) -> Mag {
        normalize(self.man as u128 + 1, self.exp, Round::Up)
    }

    pub fn is_zero(&self) -> bool {
        self.man == 0
    }

    /// Exact conversion.
    pub fn to_float(&self) -> Float {
        if self.man == 0 {
            return Float::zero();
        }
        Float::new(BigInt::from_biguint(Sign::Plus, self.man.into()), self.exp)
    }

    /// Nearest `f64` (saturates to `inf` or `0`); for display only.
    pub fn to_f64(&self) -> f64 {
        if self.man == 0 || self.exp < -1200 {
            0.0
        } else if self.exp > 1100 {
            f64::INFINITY
        } else {
            (self.man as f64) * 2f64.powi(self.exp as i32)
        }
    }

    /// Position of the leading bit: `2^msb <= self < 2^(msb+1)`. Zero maps to `i64::MIN`.
    pub fn msb(&self) -> i64 {
        if self.man == 0 {
            i64::MIN
        } else {
            self.exp + MAG_BITS as i64 - 1
        }
    }

    pub fn add(self, other: Mag) -> Mag {
        self.add_rounded(other, Round::Up)
    }

    pub fn add_down(self, other: Mag) -> Mag {
        self.add_rounded(other, Round::Down)
    }

    fn add_rounded(self, other: Mag, round: Round) -> Mag {
        if self.man == 0 {
            return other;
        }
        if other.man == 0 {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let gap = hi.exp - lo.exp;
        if gap > 64 {
            return match round {
                Round::Up => hi.add_ulp(),
                Round::Down => hi,
            };
        }
        // Align on a 64-bit window below `hi`.
        let hi_man = (hi.man as u128) << 64;
        let shift = 64 - gap;
        let lo_man = (lo.man as u128) << shift;
        normalize(hi_man + lo_man, hi.exp - 64, round)
    }

    /// `self - other` rounded down, clamped at zero.
    pub fn sub_down(self, other: Mag) -> Mag {
        if other.man == 0 {
            return self;
        }
        if self <= other {
            return Mag::ZERO;
        }
        let gap = self.exp - other.exp;
        if gap > 64 {
            // other < 2^-31 ulp of self; drop one ulp.
            let m = self.man - 1;
            return normalize(m as u128, self.exp, Round::Down);
        }
        let a = (self.man as u128) << 64;
        let b_shifted = (other.man as u128) << (64 - gap);
        normalize(a - b_shifted, self.exp - 64, Round::Down)
    }

    pub fn mul(self, other: Mag) -> Mag {
        self.mul_rounded(other, Round::Up)
    }

    pub fn mul_down(self, other: Mag) -> Mag {
        self.mul_rounded(other, Round::Down)
    }

    fn mul_rounded(self, other: Mag, round: Round) -> Mag {
        if self.man == 0 || other.man == 0 {
            return Mag::ZERO;
        }
        normalize(self.man as u128 * other.man as u128, self.exp + other.exp, round)
    }

    /// `self / other` rounded up. Panics on division by zero.
    pub fn div(self, other: Mag) -> Mag {
        self.div_rounded(other, Round::Up)
    }

    pub fn div_down(self, other: Mag) -> Mag {
        self.div_rounded(other, Round::Down)
    }

    fn div_rounded(self, other: Mag, round: Round) -> Mag {
        assert!(other.man != 0, "Mag division by zero");
        if self.man == 0 {
            return Mag::ZERO;
        }
        let num = (self.man as u128) << 64;
        let q = num / other.man as u128;
        let r = num % other.man as u128;
        let mut m = normalize(q, self.exp - other.exp - 64, round);
        if round == Round::Up && r != 0 {
            m = m.add_ulp();
        }
        m
    }

    pub fn mul_2exp(self, e: i64) -> Mag {
        if self.man == 0 {
            self
        } else {
            Mag { man: self.man, exp: self.exp + e }
        }
    }

    pub fn max(self, other: Mag) -> Mag {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Mag) -> Mag {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.man == 0, other.man == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            // Both normalized to the same mantissa width.
            _ => self.exp.cmp(&other.exp).then(self.man.cmp(&other.man)),
        }
    }
}

impl fmt::Display for Mag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.man == 0 {
            return write!(f, "0");
        }
        // log10 estimate is enough for display.
        let l = (self.man as f64).log10() + self.exp as f64 * std::f64::consts::LOG10_2;
        let e = l.floor();
        let m = 10f64.powf(l - e);
        write!(f, "{:.3}e{}", m, e as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_small_integers() {
        for v in [1u64, 2, 3, 7, 1000, u32::MAX as u64, (1 << 40) + 1] {
            let m = Mag::from_u64(v);
            let f = m.to_float();
            assert!(f >= Float::from_i64(v as i64));
        }
        assert_eq!(Mag::from_u64(12).to_float(), Float::from_i64(12));
    }

    #[test]
    fn directed_rounding_brackets() {
        let third_up = Mag::one().div(Mag::from_u64(3));
        let third_down = Mag::one().div_down(Mag::from_u64(3));
        assert!(third_down < third_up);
        let three = Float::from_i64(3);
        assert!(third_up.to_float().mul_exact(&three) > Float::from_i64(1));
        assert!(third_down.to_float().mul_exact(&three) < Float::from_i64(1));
    }

    #[test]
    fn add_far_apart_rounds_outward() {
        let big = Mag::pow2(100);
        let tiny = Mag::pow2(-100);
        assert!(big.add(tiny) > big);
        assert_eq!(big.add_down(tiny), big);
        assert!(big.sub_down(tiny) < big);
    }

    #[test]
    fn from_f64_brackets_value() {
        let v = 0.1f64;
        let up = Mag::from_f64_up(v);
        let down = Mag::from_f64_down(v);
        assert!(down <= up);
        assert!((up.to_f64() - v).abs() < 1e-9);
    }

    #[test]
    fn sub_down_clamps() {
        assert!(Mag::from_u64(3).sub_down(Mag::from_u64(5)).is_zero());
        assert_eq!(Mag::from_u64(5).sub_down(Mag::from_u64(3)), Mag::from_u64(2));
    }
}
