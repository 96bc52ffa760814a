//! Exact real inputs: rationals and square roots of rationals.
//!
//! Evaluation points are kept exact so that each computation can request an
//! enclosure at whatever precision its phase amplification demands.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::ball::Ball;
use super::Precision;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    /// `sign * sqrt(q)` with `q >= 0`.
    Sqrt { radicand: BigRational, negative: bool },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {input:?} as a real number: {reason}")]
pub struct ScalarParseError {
    input: String,
    reason: &'static str,
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Rational(BigRational::zero())
    }

    pub fn from_i64(v: i64) -> Scalar {
        Scalar::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Scalar> {
        BigRational::from_float(v).map(Scalar::Rational)
    }

    /// `sqrt(q)`, collapsing to a rational when `q` is a perfect square.
    pub fn sqrt_of(q: BigRational) -> Option<Scalar> {
        if q.is_negative() {
            return None;
        }
        let (n, d) = (q.numer().clone(), q.denom().clone());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        if &rn * &rn == n && &rd * &rd == d {
            return Some(Scalar::Rational(BigRational::new(rn, rd)));
        }
        Some(Scalar::Sqrt { radicand: q, negative: false })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Sqrt { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_zero())
    }

    pub fn signum(&self) -> i8 {
        match self {
            Scalar::Rational(q) => {
                if q.is_zero() {
                    0
                } else if q.is_negative() {
                    -1
                } else {
                    1
                }
            }
            Scalar::Sqrt { negative, .. } => {
                if *negative {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Sqrt { radicand, negative } => Scalar::Sqrt { radicand: radicand.clone(), negative: !negative },
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.signum() < 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Enclosure at `prec` bits.
    pub fn to_ball(&self, prec: Precision) -> Ball {
        match self {
            Scalar::Rational(q) => Ball::from_rational(q, prec),
            Scalar::Sqrt { radicand, negative } => {
                let wp = prec.guarded(8);
                let r = Ball::from_rational(radicand, wp).sqrt(wp).expect("nonnegative radicand").round(prec);
                if *negative {
                    r.neg()
                } else {
                    r
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Sqrt { radicand, negative } => {
                let v = radicand.to_f64().unwrap_or(f64::NAN).sqrt();
                if *negative {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        match self {
            Scalar::Rational(a) => a.cmp(q),
            Scalar::Sqrt { radicand, negative } => {
                let q_neg = q.is_negative();
                match (*negative, q_neg) {
                    (false, true) => Ordering::Greater,
                    (true, false) => Ordering::Less,
                    // Same sign: compare squares, reversed when both negative.
                    (neg, _) => {
                        let by_square = radicand.cmp(&(q * q));
                        if neg {
                            by_square.reverse()
                        } else {
                            by_square
                        }
                    }
                }
            }
        }
    }

    /// Exact `self + q` when `self` is rational.
    pub fn add_rational(&self, q: &BigRational) -> Option<Scalar> {
        self.as_rational().map(|a| Scalar::Rational(a + q))
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let ten = BigInt::from(10);
    let scale = exp as i64 - frac_part.len() as i64;
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n.trim())?;
            let d = parse_decimal(d.trim())?;
            if d.is_zero() {
                None
            } else {
                Some(n / d)
            }
        }
        None => parse_decimal(s),
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts decimals (`2.5`, `-1e-3`), fractions (`1/3`) and square roots
    /// (`sqrt(2)`, `-sqrt(1/2)`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ScalarParseError { input: s.to_string(), reason };
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) if rest.trim_start().starts_with("sqrt") => (true, rest.trim_start()),
            _ => (false, t),
        };
        if let Some(inner) = body.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let q = parse_rational(inner.trim()).ok_or_else(|| err("bad radicand"))?;
            let root = Scalar::sqrt_of(q).ok_or_else(|| err("negative radicand"))?;
            return Ok(if negative { root.neg() } else { root });
        }
        parse_rational(t).map(Scalar::Rational).ok_or_else(|| err("expected a decimal, fraction or sqrt(q)"))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Sqrt { radicand, negative } => {
                let sign = if *negative { "-" } else { "" };
                if radicand.denom().is_one() {
                    write!(f, "{sign}sqrt({})", radicand.numer())
                } else {
                    write!(f, "{sign}sqrt({}/{})", radicand.numer(), radicand.denom())
                }
            }
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_i64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!("2.5".parse::<Scalar>().unwrap(), Scalar::ratio(5, 2));
        assert_eq!("-1e-3".parse::<Scalar>().unwrap(), Scalar::ratio(-1, 1000));
        assert_eq!("1/3".parse::<Scalar>().unwrap(), Scalar::ratio(1, 3));
        assert_eq!("sqrt(4)".parse::<Scalar>().unwrap(), Scalar::from_i64(2));
        let r2: Scalar = "sqrt(2)".parse().unwrap();
        assert!(matches!(r2, Scalar::Sqrt { .. }));
        assert_eq!(r2.to_string(), "sqrt(2)");
        assert_eq!("-sqrt(2)".parse::<Scalar>().unwrap().signum(), -1);
        assert!("abc".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("sqrt(-2)".parse::<Scalar>().is_err());
    }

    #[test]
    fn sqrt_ball_encloses() {
        let r2: Scalar = "sqrt(2)".parse().unwrap();
        let b = r2.to_ball(Precision(128));
        assert!(b.contains_f64(std::f64::consts::SQRT_2) || (b.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(b.rad().msb() < -120);
    }

    #[test]
    fn compares_with_rationals() {
        let r2: Scalar = "sqrt(2)".parse().unwrap();
        let q = |n, d| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(r2.cmp_rational(&q(7, 5)), Ordering::Greater);
        assert_eq!(r2.cmp_rational(&q(3, 2)), Ordering::Less);
        assert_eq!(r2.neg().cmp_rational(&q(-3, 2)), Ordering::Greater);
        assert_eq!(r2.neg().cmp_rational(&q(1, 2)), Ordering::Less);
        assert_eq!(Scalar::ratio(1, 2).cmp_rational(&q(1, 2)), Ordering::Equal);
    }

    #[test]
    fn f64_inputs_are_exact() {
        let s = Scalar::from_f64(0.1).unwrap();
        assert!(s.to_ball(Precision(64)).is_exact());
        assert_eq!(s.to_f64(), 0.1);
    }
}
