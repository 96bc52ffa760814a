//! Time derivatives of the solutions at a point, summed in closed form with a
//! certified truncation tail.
//!
//! For the lacunary series the tail after `K` terms is bounded by twice the
//! amplitude of term `K + 1` once consecutive amplitudes shrink by at least a
//! factor two; `K` keeps two terms of margin beyond that point and grows until
//! the tail is below the working precision relative to the partial sum. For `u2` the tail after
//! `K` terms is `2^-K sup_s |d_t^n Phi(x0 + 1, s)|`.

use thiserror::Error;

use crate::numerics::{ln_factorial, Ball, Mag, NumericsError, Precision, Scalar, SignedLog};
use crate::parallel::{self, ExecMode};
use crate::solutions::lacunary::{Lacunary, MAX_TERM};
use crate::solutions::{Condensation, SolutionError, SolutionId};

/// Largest order accepted for `u2`.
pub const U2_MAX_ORDER: u64 = 60;
/// Terms retained for `u2` before any extension.
pub const U2_DEFAULT_TERMS: u32 = 48;
const U2_MAX_TERMS: u32 = 1024;
/// Extra lacunary terms allowed beyond the ratio point.
const EXTRA_TERMS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivativeError {
    #[error("order {order} exceeds the certified range (max {max})")]
    OrderCap { order: u64, max: u64 },
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = DerivativeError> = std::result::Result<T, E>;

/// `d_t^n` of a solution at `(x0, t0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeDerivative {
    pub solution: SolutionId,
    pub order: u64,
    pub x0: Scalar,
    pub t0: Scalar,
    /// Enclosure including the tail bound.
    pub value: Ball,
    /// `None` when the sign stayed undecided up to the precision cap.
    pub signed: Option<SignedLog>,
    pub terms_used: u32,
    pub tail_bound: Mag,
    pub precision: Precision,
}

impl TimeDerivative {
    pub fn is_exact_zero(&self) -> bool {
        self.value.is_exact_zero()
    }

    pub fn sign_indeterminate(&self) -> bool {
        self.signed.is_none()
    }

    /// Certified lower bound of `|h^(n)(t0)|`.
    pub fn abs_lower(&self) -> Mag {
        self.value.abs_lower()
    }
}

fn zero_result(id: &SolutionId, n: u64, x0: &Scalar, t0: &Scalar, prec: Precision) -> TimeDerivative {
    TimeDerivative {
        solution: id.clone(),
        order: n,
        x0: x0.clone(),
        t0: t0.clone(),
        value: Ball::zero(),
        signed: Some(SignedLog::zero()),
        terms_used: 0,
        tail_bound: Mag::ZERO,
        precision: prec,
    }
}

fn hundredth(m: Mag) -> Mag {
    m.div(Mag::from_u64(100))
}

/// Run `attempt` at doubling precision until its value has a certified sign.
fn with_sign<F>(id: &SolutionId, n: u64, x0: &Scalar, t0: &Scalar, start: Precision, attempt: F) -> Result<TimeDerivative>
where
    F: Fn(Precision) -> Result<(Ball, Mag, u32)>,
{
    let mut prec = start;
    loop {
        let (partial, tail, terms) = attempt(prec)?;
        let value = partial.add_error(tail);
        let signed = match SignedLog::from_ball(&value, prec) {
            Ok(s) => Some(s),
            Err(NumericsError::SignIndeterminate) => None,
            Err(e) => return Err(e.into()),
        };
        let next = prec.doubled();
        if signed.is_some() || next.is_none() {
            return Ok(TimeDerivative {
                solution: id.clone(),
                order: n,
                x0: x0.clone(),
                t0: t0.clone(),
                value,
                signed,
                terms_used: terms,
                tail_bound: tail,
                precision: prec,
            });
        }
        prec = next.expect("checked above");
    }
}

fn lacunary_derivative(id: &SolutionId, n: u64, x0: &Scalar, t0: &Scalar, start: Precision) -> Result<TimeDerivative> {
    id.check_domain(x0)?;
    let weight = id.weight().expect("lacunary solution");
    let lac = Lacunary { weight: &weight, x: x0, t: t0 };
    if lac.phases_vanish() && n % 2 == 0 {
        return Ok(zero_result(id, n, x0, t0, start));
    }
    let k0 = lac.ratio_start(n, start)?;
    with_sign(id, n, x0, t0, start, |p| {
        let wp = p.guarded(16);
        let mut k = (k0 + 2).min(MAX_TERM);
        let mut sum = lac.partial(k, n, wp)?;
        let mut tail = lac.tail_after(k, n, wp)?;
        // Terms decay doubly exponentially here, so push the tail down to the
        // working precision rather than stopping at the 1% needed for the sign.
        let floor = |s: &Ball| s.abs_lower().mul_2exp(-(p.bits() as i64));
        while (tail > hundredth(sum.abs_lower()) || tail > floor(&sum)) && k < (k0 + EXTRA_TERMS).min(MAX_TERM) {
            k += 1;
            sum = sum.add(&lac.term(k, n, wp)?, wp);
            tail = lac.tail_after(k, n, wp)?;
        }
        Ok((sum.round(p), tail, k))
    })
}

/// `h^(n)(t0)` for `h(t) = u1(x0, t)`.
pub fn u1_time_derivative(n: u64, x0: &Scalar, t0: &Scalar, prec: Precision) -> Result<TimeDerivative> {
    lacunary_derivative(&SolutionId::U1, n, x0, t0, prec)
}

/// `h_eps^(n)(t0)` for `h_eps(t) = w_eps(x0, t)`.
pub fn weps_time_derivative(
    n: u64,
    eps: &num_rational::BigRational,
    x0: &Scalar,
    t0: &Scalar,
    prec: Precision,
) -> Result<TimeDerivative> {
    lacunary_derivative(&SolutionId::weps(eps.clone())?, n, x0, t0, prec)
}

/// `d_t^n u2(x0, t0)` for `n <= 60`.
pub fn u2_time_derivative(n: u64, x0: &Scalar, t0: &Scalar, prec: Precision) -> Result<TimeDerivative> {
    u2_time_derivative_with_terms(n, x0, t0, U2_DEFAULT_TERMS, prec)
}

/// As [`u2_time_derivative`], starting from `terms` retained terms.
pub fn u2_time_derivative_with_terms(n: u64, x0: &Scalar, t0: &Scalar, terms: u32, prec: Precision) -> Result<TimeDerivative> {
    let id = SolutionId::U2;
    id.check_domain(x0)?;
    if n > U2_MAX_ORDER {
        return Err(DerivativeError::OrderCap { order: n, max: U2_MAX_ORDER });
    }
    let n32 = n as u32;
    let c = Condensation { x: x0, t: t0 };
    with_sign(&id, n, x0, t0, prec, |p| {
        let wp = p.guarded(16);
        let mut k = terms.max(1);
        let mut sum = c.partial(k, n32, wp)?;
        let mut tail = c.tail_after(k, n32, wp)?;
        while tail > hundredth(sum.abs_lower()) && k < U2_MAX_TERMS {
            let next = (2 * k).min(U2_MAX_TERMS);
            for j in k + 1..=next {
                sum = sum.add(&c.term(j, n32, wp)?, wp);
            }
            k = next;
            tail = c.tail_after(k, n32, wp)?;
        }
        Ok((sum.round(p), tail, k))
    })
}

/// Dispatch on the solution.
pub fn time_derivative(id: &SolutionId, n: u64, x0: &Scalar, t0: &Scalar, prec: Precision) -> Result<TimeDerivative> {
    match id {
        SolutionId::U2 => u2_time_derivative(n, x0, t0, prec),
        _ => lacunary_derivative(id, n, x0, t0, prec),
    }
}

/// Derivatives for several orders; results come back in input order.
pub fn derivative_sweep(
    id: &SolutionId,
    orders: &[u64],
    x0: &Scalar,
    t0: &Scalar,
    prec: Precision,
    mode: ExecMode,
) -> Vec<Result<TimeDerivative>> {
    parallel::map(mode, orders, |&n| time_derivative(id, n, x0, t0, prec))
}

/// `(|h^(n)(t0)| / n!)^(1/n)` as a positive [`SignedLog`], i.e. with
/// log-magnitude `(ln |h^(n)| - ln n!) / n`. `None` for `n = 0`, a zero
/// derivative, or an undecided sign.
pub fn taylor_coefficient(d: &TimeDerivative, prec: Precision) -> Result<Option<SignedLog>> {
    let n = d.order;
    if n == 0 || d.value.contains_zero() {
        return Ok(None);
    }
    let wp = prec.guarded(32 + (64 - n.leading_zeros()));
    let ln_h = d.value.abs().ln(wp)?;
    let ln_fact = ln_factorial(n, wp)?;
    let root = ln_h.sub(&ln_fact, wp).div(&Ball::from_i64(n as i64), wp)?;
    Ok(Some(SignedLog::positive(root.round(prec))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Sign;
    use crate::testutil::agrees;
    use num_rational::BigRational;

    fn p() -> Precision {
        Precision::default()
    }

    fn origin() -> Scalar {
        Scalar::zero()
    }

    #[test]
    fn u1_origin_values() {
        let d1 = u1_time_derivative(1, &origin(), &origin(), p()).unwrap();
        assert!(agrees(&d1.value, "1.7117795447393092916", 1e-19), "{}", d1.value);
        assert!(d1.tail_bound <= hundredth(d1.abs_lower()));
        let d3 = u1_time_derivative(3, &origin(), &origin(), p()).unwrap();
        assert!(agrees(&d3.value, "-1388.0789654094515", 1e-16), "{}", d3.value);
        assert_eq!(d3.signed.as_ref().unwrap().sign(), Sign::Negative);
        for n in [0u64, 2, 4, 10, 1000] {
            assert!(u1_time_derivative(n, &origin(), &origin(), p()).unwrap().is_exact_zero());
        }
    }

    #[test]
    fn weps_origin_value() {
        let half = BigRational::new(1.into(), 2.into());
        let d = weps_time_derivative(1, &half, &origin(), &origin(), p()).unwrap();
        assert!(agrees(&d.value, "0.483580795654005", 1e-14), "{}", d.value);
        assert!(weps_time_derivative(6, &half, &origin(), &origin(), p()).unwrap().is_exact_zero());
    }

    #[test]
    fn taylor_root_examples() {
        let d1 = u1_time_derivative(1, &origin(), &origin(), p()).unwrap();
        let r1 = taylor_coefficient(&d1, p()).unwrap().unwrap();
        assert!(r1.logmag().overlaps(&d1.value.ln(p()).unwrap()));
        let d3 = u1_time_derivative(3, &origin(), &origin(), p()).unwrap();
        let r3 = taylor_coefficient(&d3, p()).unwrap().unwrap();
        assert!((r3.logmag().to_f64() - (1388.0789654094515f64 / 6.0).ln() / 3.0).abs() < 1e-12);
        let d0 = u1_time_derivative(2, &origin(), &origin(), p()).unwrap();
        assert!(taylor_coefficient(&d0, p()).unwrap().is_none());
    }

    #[test]
    fn u2_order_cap() {
        let err = u2_time_derivative(61, &origin(), &Scalar::ratio(1, 2), p()).unwrap_err();
        assert!(matches!(err, DerivativeError::OrderCap { .. }));
    }

    #[test]
    fn huge_orders_stay_representable() {
        // n = 2 m_N + 1 for N = 20 at x0 = 0.
        let d = u1_time_derivative(2 * (1 << 18) + 1, &origin(), &Scalar::from_i64(1), p()).unwrap();
        assert!(d.signed.is_some());
        assert!(d.value.abs_lower().msb() > 1 << 20);
    }
}
