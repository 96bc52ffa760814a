//! Certified pointwise evaluation of the three solutions.
//!
//! * `u1(x, t) = sum_k e^(-2^k) e^(-2^k x) sin(2^(2k+1) t - 2^k x)` for `x >= 0`;
//! * `u2(x, t) = sum_k 2^-k Phi(x + 1, t - r_k)` for `x >= 0`;
//! * `w_eps(x, t) = sum_k e^(-2^((1+eps)k)) e^(-2^k x) sin(2^(2k+1) t - 2^k x)` for all `x`.
//!
//! Every result carries its truncation index and a certified tail bound that
//! is already folded into the returned enclosure.

mod condensation;
mod enumeration;
pub(crate) mod lacunary;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::numerics::{refine_by, Ball, Mag, NumericsError, Precision, Scalar};
pub(crate) use condensation::Condensation;
pub use enumeration::{enumerate_rational, enumeration_index, ENUMERATION_NAME};
use lacunary::{Lacunary, Weight, MAX_TERM};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("at least {min} terms are needed for a certified tail, got {requested}")]
    TooFewTerms { requested: u32, min: u32 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = SolutionError> = std::result::Result<T, E>;

/// Which solution is addressed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SolutionId {
    U1,
    /// Always over the enumeration named by [`ENUMERATION_NAME`].
    U2,
    Weps { eps: BigRational },
}

impl SolutionId {
    /// `w_eps`, validating `0 < eps < 1`.
    pub fn weps(eps: BigRational) -> Result<SolutionId> {
        if !eps.is_positive() || eps >= BigRational::one() {
            return Err(SolutionError::Domain(format!("eps = {eps} outside (0, 1)")));
        }
        Ok(SolutionId::Weps { eps })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolutionId::U1 => "u1",
            SolutionId::U2 => "u2",
            SolutionId::Weps { .. } => "weps",
        }
    }

    pub fn eps(&self) -> Option<&BigRational> {
        match self {
            SolutionId::Weps { eps } => Some(eps),
            _ => None,
        }
    }

    /// `u1` and `u2` live on `x >= 0`; `w_eps` on the whole line.
    pub fn check_domain(&self, x: &Scalar) -> Result<()> {
        match self {
            SolutionId::Weps { .. } => Ok(()),
            _ if x.signum() < 0 => Err(SolutionError::Domain(format!("{} needs x >= 0, got {x}", self.name()))),
            _ => Ok(()),
        }
    }

    pub(crate) fn weight(&self) -> Option<Weight> {
        match self {
            SolutionId::U1 => Some(Weight::Unit),
            SolutionId::U2 => None,
            SolutionId::Weps { eps } => Some(Weight::Power(eps.clone())),
        }
    }
}

impl fmt::Display for SolutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionId::Weps { eps } => write!(f, "weps(eps={eps})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A certified evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    /// Partial sum widened by the tail bound.
    pub value: Ball,
    /// Sum of the retained terms only.
    pub partial: Ball,
    pub terms_used: u32,
    pub tail_bound: Mag,
    pub precision: Precision,
    /// Whether `value.rad() <= target`; always `true` for fixed-term runs.
    pub target_met: bool,
}

fn finish(partial: Ball, tail: Mag, terms_used: u32, precision: Precision) -> EvalResult {
    EvalResult { value: partial.add_error(tail), partial, terms_used, tail_bound: tail, precision, target_met: true }
}

/// Evaluate with `K` chosen so the tail is at most half of `target`, then
/// escalate precision until the enclosure radius is at most `target`.
pub fn evaluate(id: &SolutionId, x: &Scalar, t: &Scalar, target: Mag, start: Precision) -> Result<EvalResult> {
    id.check_domain(x)?;
    if target.is_zero() {
        return Err(SolutionError::Domain("target radius must be positive".into()));
    }
    let half = target.mul_2exp(-1);
    let big_k = match id.weight() {
        Some(w) => {
            let lac = Lacunary { weight: &w, x, t };
            if lac.phases_vanish() {
                return Ok(finish(Ball::zero(), Mag::ZERO, 0, start));
            }
            let mut k = lac.ratio_start(0, start)? + 2;
            while k < MAX_TERM && lac.tail_after(k, 0, start)? > half {
                k += 1;
            }
            k
        }
        None => Condensation { x, t }.terms_for(half, 0, start)?,
    };
    let run = |p: Precision| evaluate_with_terms(id, x, t, big_k, p);
    let (mut out, _, met) = refine_by(target, start, run, |r: &EvalResult| (r.value.rad(), r.tail_bound))?;
    out.target_met = met;
    Ok(out)
}

/// Evaluate with exactly `terms` retained terms at precision `prec`.
pub fn evaluate_with_terms(id: &SolutionId, x: &Scalar, t: &Scalar, terms: u32, prec: Precision) -> Result<EvalResult> {
    id.check_domain(x)?;
    match id.weight() {
        Some(w) => {
            let lac = Lacunary { weight: &w, x, t };
            if lac.phases_vanish() {
                return Ok(finish(Ball::zero(), Mag::ZERO, terms, prec));
            }
            let min = lac.ratio_start(0, prec)?;
            if terms < min {
                return Err(SolutionError::TooFewTerms { requested: terms, min });
            }
            let partial = lac.partial(terms, 0, prec)?;
            let tail = lac.tail_after(terms, 0, prec)?;
            Ok(finish(partial, tail, terms, prec))
        }
        None => {
            let c = Condensation { x, t };
            let partial = c.partial(terms, 0, prec)?;
            let tail = c.tail_after(terms, 0, prec)?;
            Ok(finish(partial, tail, terms, prec))
        }
    }
}

pub fn eval_u1(x: &Scalar, t: &Scalar, target: Mag, start: Precision) -> Result<EvalResult> {
    evaluate(&SolutionId::U1, x, t, target, start)
}

pub fn eval_u2(x: &Scalar, t: &Scalar, target: Mag, start: Precision) -> Result<EvalResult> {
    evaluate(&SolutionId::U2, x, t, target, start)
}

pub fn eval_weps(eps: &BigRational, x: &Scalar, t: &Scalar, target: Mag, start: Precision) -> Result<EvalResult> {
    evaluate(&SolutionId::weps(eps.clone())?, x, t, target, start)
}

/// Smallest truncation index with a certified geometric tail (`w_eps` only
/// forces it past the crossover when `x < 0`).
pub fn minimal_terms(id: &SolutionId, x: &Scalar, t: &Scalar, prec: Precision) -> Result<u32> {
    match id.weight() {
        Some(w) => Ok(Lacunary { weight: &w, x, t }.ratio_start(0, prec)?),
        None => Ok(1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::agrees;

    fn tgt() -> Mag {
        Mag::from_f64_up(1e-30)
    }

    fn p() -> Precision {
        Precision::default()
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn origin_is_exact_zero() {
        let z = Scalar::zero();
        assert!(eval_u1(&z, &z, tgt(), p()).unwrap().value.is_exact_zero());
        assert!(eval_weps(&half(), &z, &z, tgt(), p()).unwrap().value.is_exact_zero());
    }

    #[test]
    fn u1_far_field_is_tiny() {
        let r = eval_u1(&Scalar::from_i64(10), &Scalar::from_i64(1), tgt(), p()).unwrap();
        assert!(r.value.abs_upper().to_f64() <= 3.2e-10);
        assert!(r.target_met);
    }

    #[test]
    fn u1_value_against_direct_sum() {
        // sum_k e^(-2^k (1 + 1/2)) sin(2^(2k+1) / 3 - 2^(k-1)), 40 digits.
        let r = eval_u1(&Scalar::ratio(1, 2), &Scalar::ratio(1, 3), tgt(), p()).unwrap();
        assert!(agrees(&r.value, "0.05126777285829138095706979789476085317843751274095", 1e-28), "{}", r.value);
    }

    #[test]
    fn weps_crossover_enforced() {
        let id = SolutionId::weps(half()).unwrap();
        let k = minimal_terms(&id, &Scalar::from_i64(-50), &Scalar::from_i64(1), p()).unwrap();
        assert!(k >= 12);
        let err = evaluate_with_terms(&id, &Scalar::from_i64(-50), &Scalar::from_i64(1), 5, p()).unwrap_err();
        assert!(matches!(err, SolutionError::TooFewTerms { .. }));
    }

    #[test]
    fn u2_bounds_and_zero_terms() {
        let r = eval_u2(&Scalar::zero(), &Scalar::ratio(1, 2), Mag::from_f64_up(1e-20), p()).unwrap();
        assert!(r.value.abs_upper().to_f64() <= 0.2419708);
        // t = -10: only r_k < -10 contribute; the first such index is far out.
        let r = evaluate_with_terms(&SolutionId::U2, &Scalar::zero(), &Scalar::from_i64(-10), 20, p()).unwrap();
        assert!(r.partial.is_exact_zero());
        assert!(r.value.abs_upper() <= r.tail_bound);
    }

    #[test]
    fn u2_precisions_nest() {
        let x = Scalar::zero();
        let t = Scalar::ratio(1, 2);
        let a = evaluate_with_terms(&SolutionId::U2, &x, &t, 60, p()).unwrap();
        let b = evaluate_with_terms(&SolutionId::U2, &x, &t, 60, Precision::new(256).unwrap()).unwrap();
        assert!(a.partial.overlaps(&b.partial));
        assert!(b.partial.rad() <= a.partial.rad());
    }

    #[test]
    fn domain_checks() {
        assert!(SolutionId::weps(BigRational::one()).is_err());
        assert!(eval_u1(&Scalar::from_i64(-1), &Scalar::zero(), tgt(), p()).is_err());
        assert!(eval_weps(&half(), &Scalar::from_i64(-1), &Scalar::zero(), tgt(), p()).is_ok());
    }
}
