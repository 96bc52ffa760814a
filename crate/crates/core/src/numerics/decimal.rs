//! Decimal rendering of balls that preserves containment: the printed
//! midpoint-radius pair always encloses the binary ball it came from.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::ball::Ball;
use super::float::Float;
use super::mag::Mag;
use super::Precision;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalBall {
    pub mid: String,
    pub rad: String,
}

fn decimal_exponent_estimate(x: &Float) -> i64 {
    // log10|x| from the leading 53 bits.
    let bits = x.bits() as i64;
    let top = if bits > 53 {
        x.mantissa().abs() >> (bits - 53) as usize
    } else {
        x.mantissa().abs()
    };
    let top_f = top.to_f64().unwrap_or(1.0);
    let shift = if bits > 53 { bits - 53 } else { 0 };
    let l2 = top_f.log2() + (x.exponent() + shift) as f64;
    (l2 * std::f64::consts::LOG10_2).floor() as i64
}

/// Enclosure of `10^e`.
fn pow10(e: i64, prec: Precision) -> Ball {
    if (0..=300).contains(&e) {
        return Ball::from_bigint(BigInt::from(10).pow(e as u32));
    }
    let wp = prec.guarded(16 + (64 - e.unsigned_abs().leading_zeros()));
    let ln10 = Ball::from_i64(10).ln(wp).expect("10 > 0");
    ln10.mul(&Ball::from_i64(e), wp).exp(wp).expect("decimal exponent in range").round(prec)
}

/// `(I, e10, err)` with `|x - I 10^e10| <= err`, `I` carrying about `digits` digits.
fn to_scientific(x: &Float, digits: u32) -> (BigInt, i64, Mag) {
    let d = decimal_exponent_estimate(x);
    let e10 = d - digits as i64 + 1;
    let wp = Precision((digits as f64 * 3.33) as u32 + 64);
    let scale = pow10(-e10, wp);
    let scaled = Ball::exact(x.clone()).mul(&scale, wp);
    let int = scaled.mid().round_to_integer();
    let gap = Ball::from_bigint(int.clone()).sub(&scaled, wp).abs_upper();
    let err = gap.mul(pow10(e10, wp).abs_upper());
    (int, e10, err)
}

fn render(int: &BigInt, e10: i64) -> String {
    if int.is_zero() {
        return "0".to_string();
    }
    let neg = int.is_negative();
    let digits = int.abs().to_string();
    let exp = e10 + digits.len() as i64 - 1;
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&digits[..1]);
    let rest = digits[1..].trim_end_matches('0');
    if !rest.is_empty() {
        s.push('.');
        s.push_str(rest);
    }
    if exp != 0 {
        s.push('e');
        s.push_str(&exp.to_string());
    }
    s
}

/// Decimal upper bound of a magnitude with three significant digits.
pub fn format_mag_up(m: Mag) -> String {
    if m.is_zero() {
        return "0".to_string();
    }
    let x = m.to_float();
    let (int, e10, err) = to_scientific(&x, 3);
    // Round the 3-digit mantissa up past every error source.
    let bump = {
        let unit = pow10(e10, Precision(96)).abs_lower();
        if err.is_zero() {
            1
        } else {
            err.div(unit).to_f64().ceil() as i64 + 1
        }
    };
    render(&(int + BigInt::from(bump)), e10)
}

/// Containment-preserving decimal form of a ball. The midpoint carries as
/// many digits as the radius leaves meaningful, capped at `max_digits`.
pub fn format_ball(b: &Ball, max_digits: u32) -> DecimalBall {
    let mid = b.mid();
    if mid.is_zero() {
        return DecimalBall { mid: "0".into(), rad: format_mag_up(b.rad()) };
    }
    if mid.is_integer() && mid.msb() < 60 {
        let v = mid.floor();
        return DecimalBall { mid: v.to_string(), rad: format_mag_up(b.rad()) };
    }
    let digits = if b.rad().is_zero() {
        max_digits
    } else {
        let rel = mid.msb() - b.rad().msb();
        ((rel as f64 * std::f64::consts::LOG10_2).ceil() as i64 + 2).clamp(1, max_digits as i64) as u32
    };
    let (int, e10, err) = to_scientific(mid, digits.max(1));
    DecimalBall { mid: render(&int, e10), rad: format_mag_up(b.rad().add(err)) }
}

/// Parse a decimal produced by [`format_ball`] back into an exact rational.
#[cfg(test)]
fn parse_decimal(s: &str) -> num_rational::BigRational {
    use num_rational::BigRational;
    use num_traits::One;
    let (m, e) = match s.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap()),
        None => (s, 0),
    };
    let (int_part, frac) = match m.split_once('.') {
        Some((a, b)) => (a.to_string(), b.to_string()),
        None => (m.to_string(), String::new()),
    };
    let digits: BigInt = format!("{int_part}{frac}").parse().unwrap();
    let exp = e - frac.len() as i64;
    let ten = BigInt::from(10);
    if exp >= 0 {
        BigRational::from_integer(digits * ten.pow(exp as u32))
    } else {
        BigRational::new(digits, ten.pow((-exp) as u32)) * BigRational::one()
    }
}
