//! Growth envelope `|w_eps(x, t)| <= A1 exp(A2 |x|^(1 + 1/eps))`.
//!
//! With `g_k(x) = exp(2^k (x - 2^(eps k)))`, `|w_eps(-x, t)| <= sum_k g_k(x)`.
//! For `x <= 100` the sum is at most its value at 100 (`B1`). Above 100 the
//! index `K` with `x / c <= 2^(eps K) < 2^eps x / c`, `c = 2^(1+eps) - 1`,
//! splits the sum into an increasing head bounded by `exp(B2 x^(1+1/eps))` and
//! a decreasing tail bounded by `(1 + B3) g_(K+1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::{ball_max, ceil_certified, DiagnosticsError, Result, Verdict};
use crate::numerics::{ln2, pow2_rational, Ball, Mag, Precision, Scalar};
use crate::parallel::{self, ExecMode};
use crate::solutions::lacunary::{Lacunary, Weight};
use crate::solutions::{evaluate_with_terms, minimal_terms, SolutionId};

/// Constants of the growth bound for one `eps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeCertificate {
    pub eps: BigRational,
    /// `sup_(0 <= x <= 100) sum_k g_k(x) = sum_k g_k(100)`.
    pub b1: Ball,
    /// `2 (2^eps / (2^(1+eps) - 1))^(1/eps)`.
    pub b2: Ball,
    /// `sum_(j>=1) exp(-(2^eps - 1)(2^j - 1))`.
    pub b3: Ball,
    /// `max(B1, 2 + B3)`.
    pub a1: Ball,
    /// Equal to `B2`.
    pub a2: Ball,
    /// Exponential order `2 + delta` with `eps = 1 / (1 + delta)`.
    pub delta: BigRational,
}

fn check_eps(eps: &BigRational) -> Result<()> {
    SolutionId::weps(eps.clone())?;
    Ok(())
}

fn window_constant(eps: &BigRational, prec: Precision) -> Result<Ball> {
    Ok(pow2_rational(&(eps + BigRational::one()), prec)?.sub(&Ball::one(), prec))
}

/// `log2(x / c) / eps`, the lower end of the `K` window.
fn k_lower(eps: &BigRational, x: &Scalar, prec: Precision) -> Result<Ball> {
    let wp = prec.guarded(16);
    let c = window_constant(eps, wp)?;
    let l = x.to_ball(wp).ln(wp)?.sub(&c.ln(wp)?, wp);
    let e = Ball::from_rational(eps, wp).mul(&ln2(wp), wp);
    Ok(l.div(&e, wp)?.round(prec))
}

/// The unique positive `K` with `log2(x / c) / eps <= K < 1 + log2(x / c) / eps`,
/// for `x > 100`.
pub fn choose_k(eps: &BigRational, x: &Scalar) -> Result<u32> {
    check_eps(eps)?;
    if x.cmp_rational(&BigRational::from_integer(BigInt::from(100))) != std::cmp::Ordering::Greater {
        return Err(DiagnosticsError::Precondition("choose_K needs x > 100".into()));
    }
    let k = ceil_certified("K window", |p| k_lower(eps, x, p))?;
    let k: u32 = k.try_into().map_err(|_| DiagnosticsError::Precondition("K out of range".into()))?;
    if BigRational::from_integer(BigInt::from(k)) * eps < BigRational::from_integer(BigInt::from(4)) {
        return Err(DiagnosticsError::Precondition(format!("K = {k} below 4/eps")));
    }
    let forms = k_window_forms(eps, x, k, Precision::new(256).expect("valid"))?;
    if forms != [Verdict::Pass, Verdict::Pass] {
        return Err(DiagnosticsError::Undecidable(format!("K = {k} window")));
    }
    Ok(k)
}

fn both(lo_ok: Option<bool>, hi_ok: Option<bool>) -> Verdict {
    match (lo_ok, hi_ok) {
        (Some(true), Some(true)) => Verdict::Pass,
        (Some(false), _) | (_, Some(false)) => Verdict::Fail,
        _ => Verdict::Inconclusive,
    }
}

/// Decide the two equivalent forms of the `K` window: the logarithmic one and
/// `x / c <= 2^(eps K) < 2^eps x / c`.
pub fn k_window_forms(eps: &BigRational, x: &Scalar, k: u32, prec: Precision) -> Result<[Verdict; 2]> {
    let kb = Ball::from_i64(k as i64);
    let v = k_lower(eps, x, prec)?;
    let v1 = v.add(&Ball::one(), prec);
    // `le(a, b)`: Some(true) when certainly a <= b, Some(false) when certainly a > b.
    let le = |a: &Ball, b: &Ball| -> Option<bool> {
        if a.upper() <= b.lower() {
            Some(true)
        } else if a.lower() > b.upper() {
            Some(false)
        } else {
            None
        }
    };
    let log_form = both(le(&v, &kb), kb.certified_lt(&v1));

    let wp = prec.guarded(16);
    let c = window_constant(eps, wp)?;
    let lo = x.to_ball(wp).div(&c, wp)?;
    let hi = lo.mul(&pow2_rational(eps, wp)?, wp);
    let mid = pow2_rational(&(eps * BigInt::from(k)), wp)?;
    let exp_form = both(le(&lo, &mid), mid.certified_lt(&hi));
    Ok([log_form, exp_form])
}

/// `sum_(j>=1) exp(-a (2^j - 1))` with `a = 2^eps - 1`.
fn b3(eps: &BigRational, prec: Precision) -> Result<Ball> {
    let wp = prec.guarded(16);
    let a = pow2_rational(eps, wp)?.sub(&Ball::one(), wp);
    let stop = Mag::pow2(-(prec.bits() as i64) - 20);
    let term = |j: u32| a.mul(&Ball::from_bigint((BigInt::one() << j) - 1), wp).neg().exp(wp);
    let mut sum = Ball::zero();
    let mut j = 1;
    loop {
        let t = term(j)?;
        sum = sum.add(&t, wp);
        j += 1;
        let next = term(j)?;
        if next.abs_upper() <= stop {
            // Ratios past `j` are at most exp(-a 2^j) <= 1/2 here.
            return Ok(sum.add_error(next.abs_upper().mul_2exp(1)).round(prec));
        }
    }
}

/// `sum_k g_k(100)`, read off the lacunary engine at `x = -100`.
fn b1(eps: &BigRational, prec: Precision) -> Result<Ball> {
    let wp = prec.guarded(16);
    let weight = Weight::Power(eps.clone());
    let x = Scalar::from_i64(-100);
    let t = Scalar::zero();
    let lac = Lacunary { weight: &weight, x: &x, t: &t };
    let big_k = lac.ratio_start(0, wp)? + 2;
    let mut sum = Ball::zero();
    for k in 1..=big_k {
        sum = sum.add(&lac.log_amplitude(k, 0, wp)?.exp(wp)?, wp);
    }
    Ok(sum.add_error(lac.tail_after(big_k, 0, wp)?).round(prec))
}

pub fn envelope_constants(eps: &BigRational, prec: Precision) -> Result<EnvelopeCertificate> {
    check_eps(eps)?;
    let wp = prec.guarded(16);
    let c = window_constant(eps, wp)?;
    let inv = BigRational::one() / eps;
    let b2 = pow2_rational(eps, wp)?.div(&c, wp)?.pow_rational(&inv, wp)?.mul_2exp(1).round(prec);
    let b3 = b3(eps, prec)?;
    let b1 = b1(eps, prec)?;
    let two_b3 = b3.add(&Ball::from_i64(2), prec);
    let a1 = ball_max([b1.clone(), two_b3]).expect("two items").round(prec);
    let delta = inv - BigRational::one();
    Ok(EnvelopeCertificate { eps: eps.clone(), b1, a2: b2.clone(), b2, b3, a1, delta })
}

/// One grid point of the envelope check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopePoint {
    pub x: Scalar,
    pub t: Scalar,
    /// Enclosure of `ln(|w_eps| exp(-A2 |x|^(1+1/eps)))` whose upper end is
    /// certified; `None` when `w_eps(x, t)` is exactly zero.
    pub log_ratio: Option<Ball>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeCheck {
    pub eps: BigRational,
    pub points: Vec<EnvelopePoint>,
    pub max_log_ratio: Option<Ball>,
    pub log_a1: Ball,
    pub verdict: Verdict,
}

fn mag_ln(m: Mag, prec: Precision) -> Result<Option<Ball>> {
    if m.is_zero() {
        return Ok(None);
    }
    Ok(Some(Ball::exact(m.to_float()).ln(prec)?))
}

fn envelope_point(id: &SolutionId, cert: &EnvelopeCertificate, log_a1: &Ball, x: &Scalar, t: &Scalar, prec: Precision) -> Result<EnvelopePoint> {
    let wp = prec.guarded(16);
    let terms = minimal_terms(id, x, t, wp)? + 2;
    let w = evaluate_with_terms(id, x, t, terms, wp)?.value;
    let penalty = if x.is_zero() {
        Ball::zero()
    } else {
        let q = BigRational::one() + BigRational::one() / &cert.eps;
        x.abs().to_ball(wp).pow_rational(&q, wp)?.mul(&cert.a2, wp)
    };
    let (Some(up), low) = (mag_ln(w.abs_upper(), wp)?, mag_ln(w.abs_lower(), wp)?) else {
        return Ok(EnvelopePoint { x: x.clone(), t: t.clone(), log_ratio: None, verdict: Verdict::Pass });
    };
    let upper = up.sub(&penalty, wp);
    let lower = low.map(|l| l.sub(&penalty, wp));
    let verdict = if upper.upper() <= log_a1.lower() {
        Verdict::Pass
    } else if lower.as_ref().is_some_and(|l| l.lower() > log_a1.upper()) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    let log_ratio = match lower {
        Some(l) => Ball::from_endpoints(&l.lower(), &upper.upper(), wp),
        None => Ball::from_endpoints(&upper.upper(), &upper.upper(), wp),
    };
    Ok(EnvelopePoint { x: x.clone(), t: t.clone(), log_ratio: Some(log_ratio.round(prec)), verdict })
}

/// Check `|w_eps(x, t)| exp(-A2 |x|^(1+1/eps)) <= A1` on the product grid.
pub fn envelope_check(
    cert: &EnvelopeCertificate,
    xs: &[Scalar],
    ts: &[Scalar],
    prec: Precision,
    mode: ExecMode,
) -> Result<EnvelopeCheck> {
    let id = SolutionId::weps(cert.eps.clone())?;
    let log_a1 = cert.a1.ln(prec.guarded(16))?;
    let grid: Vec<(&Scalar, &Scalar)> = xs.iter().flat_map(|x| ts.iter().map(move |t| (x, t))).collect();
    let points = parallel::map(mode, &grid, |(x, t)| envelope_point(&id, cert, &log_a1, x, t, prec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_log_ratio = ball_max(points.iter().filter_map(|p| p.log_ratio.clone()));
    let verdict = Verdict::all(points.iter().map(|p| p.verdict));
    Ok(EnvelopeCheck { eps: cert.eps.clone(), points, max_log_ratio, log_a1, verdict })
}

impl EnvelopeCheck {
    /// Upper end of the largest log-ratio, or `-inf` when every point vanished.
    pub fn max_log_ratio_upper(&self) -> f64 {
        self.max_log_ratio.as_ref().map_or(f64::NEG_INFINITY, |b| b.upper().to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::agrees;

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn constants_for_half() {
        let c = envelope_constants(&half(), p()).unwrap();
        assert!(agrees(&c.b2, "1.1964778979177450", 1e-15), "{}", c.b2);
        assert!(agrees(&c.b3, "1.0065373337223184", 1e-15), "{}", c.b3);
        assert_eq!(c.a2, c.b2);
        assert!(c.a1.lower() >= c.b1.lower());
        assert!(c.a1.lower() >= c.b3.add(&Ball::from_i64(2), p()).lower());
        assert_eq!(c.delta, BigRational::one());
    }

    #[test]
    fn k_for_200() {
        let x = Scalar::from_i64(200);
        assert_eq!(choose_k(&half(), &x).unwrap(), 14);
        assert_eq!(k_window_forms(&half(), &x, 14, p()).unwrap(), [Verdict::Pass; 2]);
        assert_eq!(k_window_forms(&half(), &x, 15, p()).unwrap()[1], Verdict::Fail);
        assert!(choose_k(&half(), &Scalar::from_i64(100)).is_err());
    }

    #[test]
    fn k_nondecreasing() {
        let mut prev = 0;
        for x in (101..2000).step_by(37) {
            let k = choose_k(&half(), &Scalar::from_i64(x)).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn small_grid_passes() {
        let c = envelope_constants(&half(), p()).unwrap();
        let xs: Vec<Scalar> = [-200, -50, 0, 3, 200].iter().map(|&v| Scalar::from_i64(v)).collect();
        let ts: Vec<Scalar> = [-1, 0, 2].iter().map(|&v| Scalar::from_i64(v)).collect();
        let r = envelope_check(&c, &xs, &ts, p(), ExecMode::Sequential).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.points.len(), 15);
        // The origin row is exactly zero.
        assert!(r.points.iter().any(|p| p.x.is_zero() && p.t.is_zero() && p.log_ratio.is_none()));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn g_ratio_law_and_k_window(xn in 101i64..5000, den in 1i64..4, e in 0usize..3) {
            let eps = [half(), BigRational::new(1.into(), 3.into()), BigRational::new(3.into(), 4.into())][e].clone();
            let x = Scalar::ratio(xn * den + 1, den);
            let big_k = choose_k(&eps, &x).unwrap();
            let w = Weight::Power(eps.clone());
            let neg = x.neg();
            let lac = Lacunary { weight: &w, x: &neg, t: &Scalar::zero() };
            let c = pow2_rational(&(&eps + BigRational::one()), p()).unwrap().sub(&Ball::one(), p());
            for k in 0..big_k + 4 {
                // ln g_(k+1) - ln g_k with g_k = exp(-w_k(-x))
                let lhs = lac.decay(k, p()).unwrap().sub(&lac.decay(k + 1, p()).unwrap(), p());
                let e_k = pow2_rational(&(&eps * BigInt::from(k)), p()).unwrap();
                let rhs = x.to_ball(p()).sub(&e_k.mul(&c, p()), p()).mul_2exp(k as i64);
                proptest::prop_assert!(lhs.overlaps(&rhs), "k = {}: {} vs {}", k, lhs, rhs);
                proptest::prop_assert_eq!(rhs.certified_lt(&Ball::zero()), Some(k >= big_k), "k = {}", k);
            }
        }
    }
}
