use std::cmp::Ordering;
use std::fmt;

use super::ball::Ball;
use super::float::Float;
use super::{NumericsError, Precision, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

/// A sign together with an enclosure of `ln |x|`.
///
/// Used for proof quantities whose magnitudes are only ever compared, such as
/// `2^(2m(2k+1))`-sized weights and high-order derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedLog {
    sign: Sign,
    logmag: Ball,
}

impl SignedLog {
    pub fn zero() -> SignedLog {
        SignedLog { sign: Sign::Zero, logmag: Ball::zero() }
    }

    /// Positive quantity with the given log-magnitude enclosure.
    pub fn positive(logmag: Ball) -> SignedLog {
        SignedLog { sign: Sign::Positive, logmag }
    }

    pub fn new(sign: Sign, logmag: Ball) -> SignedLog {
        if sign == Sign::Zero {
            return SignedLog::zero();
        }
        SignedLog { sign, logmag }
    }

    /// Exact conversion from a ball whose sign is decided.
    pub fn from_ball(b: &Ball, prec: Precision) -> Result<SignedLog> {
        match b.signum_certified() {
            Some(0) => Ok(SignedLog::zero()),
            Some(s) => {
                let sign = if s > 0 { Sign::Positive } else { Sign::Negative };
                Ok(SignedLog { sign, logmag: b.abs().ln(prec)? })
            }
            None => Err(NumericsError::SignIndeterminate),
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `ln |x|`; meaningless for zero.
    pub fn logmag(&self) -> &Ball {
        &self.logmag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Back to a ball; fails only if the magnitude leaves the exponent range.
    pub fn to_ball(&self, prec: Precision) -> Result<Ball> {
        match self.sign {
            Sign::Zero => Ok(Ball::zero()),
            Sign::Positive => self.logmag.exp(prec),
            Sign::Negative => Ok(self.logmag.exp(prec)?.neg()),
        }
    }

    pub fn abs(&self) -> SignedLog {
        match self.sign {
            Sign::Zero => SignedLog::zero(),
            _ => SignedLog { sign: Sign::Positive, logmag: self.logmag.clone() },
        }
    }

    pub fn neg(&self) -> SignedLog {
        SignedLog { sign: self.sign.flip(), logmag: self.logmag.clone() }
    }

    pub fn mul(&self, other: &SignedLog, prec: Precision) -> SignedLog {
        let sign = self.sign.times(other.sign);
        if sign == Sign::Zero {
            return SignedLog::zero();
        }
        SignedLog { sign, logmag: self.logmag.add(&other.logmag, prec) }
    }

    pub fn div(&self, other: &SignedLog, prec: Precision) -> Result<SignedLog> {
        if other.is_zero() {
            return Err(NumericsError::Domain("division by zero".into()));
        }
        let sign = self.sign.times(other.sign);
        if sign == Sign::Zero {
            return Ok(SignedLog::zero());
        }
        Ok(SignedLog { sign, logmag: self.logmag.sub(&other.logmag, prec) })
    }

    /// Multiply the log-magnitude by `factor` (a real power of `|x|`).
    pub fn scale_log(&self, factor: &Ball, prec: Precision) -> SignedLog {
        if self.is_zero() {
            return SignedLog::zero();
        }
        SignedLog { sign: Sign::Positive, logmag: self.logmag.mul(factor, prec) }
    }

    /// Certified comparison of magnitudes: `Some(Less)` when `|self| < |other|`
    /// holds for every point of both enclosures, `None` when the separating gap
    /// does not exceed the combined radii.
    pub fn cmp_abs(&self, other: &SignedLog) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            _ => match self.logmag.certified_lt(&other.logmag) {
                Some(true) => Some(Ordering::Less),
                Some(false) if other.logmag.certified_lt(&self.logmag) == Some(true) => Some(Ordering::Greater),
                _ => None,
            },
        }
    }

    /// Lower bound of `ln|self| - ln|other|` (the certified gap), as an `f64`
    /// rounded toward minus infinity by one ulp.
    pub fn log_gap_lower(&self, other: &SignedLog) -> f64 {
        let lo = self.logmag.lower().sub_exact(&other.logmag.upper());
        let v = lo.to_f64();
        v - v.abs() * f64::EPSILON - f64::MIN_POSITIVE
    }

    /// Midpoint of `log10 |x|` for display.
    pub fn log10_approx(&self) -> f64 {
        self.logmag.to_f64() / std::f64::consts::LN_10
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            s => write!(f, "{}exp({})", if s == Sign::Negative { "-" } else { "+" }, self.logmag),
        }
    }
}

/// Signed sum of log-represented terms, aligned to the largest magnitude.
///
/// Returns [`NumericsError::SignIndeterminate`] when the aligned sum straddles
/// zero without being exactly zero.
pub fn log_sum_exp(terms: &[SignedLog], prec: Precision) -> Result<SignedLog> {
    let live: Vec<&SignedLog> = terms.iter().filter(|t| !t.is_zero()).collect();
    if live.is_empty() {
        return Ok(SignedLog::zero());
    }
    let anchor = live
        .iter()
        .map(|t| t.logmag.mid().clone())
        .max()
        .unwrap_or_else(Float::zero);
    let anchor_ball = Ball::exact(anchor);
    let wp = prec.guarded(16);
    let mut sum = Ball::zero();
    for t in &live {
        let shifted = t.logmag.sub(&anchor_ball, wp).exp(wp)?;
        sum = match t.sign {
            Sign::Positive => sum.add(&shifted, wp),
            Sign::Negative => sum.sub(&shifted, wp),
            Sign::Zero => sum,
        };
    }
    let sign = match sum.signum_certified() {
        Some(0) => return Ok(SignedLog::zero()),
        Some(s) if s > 0 => Sign::Positive,
        Some(_) => Sign::Negative,
        None => return Err(NumericsError::SignIndeterminate),
    };
    let logmag = sum.abs().ln(wp)?.add(&anchor_ball, wp).round(prec);
    Ok(SignedLog { sign, logmag })
}
