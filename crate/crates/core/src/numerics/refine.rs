use super::ball::Ball;
use super::mag::Mag;
use super::{Precision, Result};

/// Outcome of a precision-escalation run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refined {
    pub ball: Ball,
    pub precision: Precision,
    /// `false` when the cap was reached (or a precision-independent floor
    /// exceeds the target) before the radius dropped below the target.
    pub target_met: bool,
}

/// Re-run `compute` with doubling precision until its radius is at most
/// `target`. Returns the last ball with `target_met = false` at the cap.
pub fn refine<F>(target: Mag, start: Precision, compute: F) -> Result<Refined>
where
    F: Fn(Precision) -> Result<Ball>,
{
    refine_with_floor(target, start, |p| Ok((compute(p)?, Mag::ZERO)))
}

/// Like [`refine`], for computations whose radius contains a part that no
/// precision increase removes (a truncation tail). When that floor already
/// exceeds the target the run stops immediately with `target_met = false`.
pub fn refine_with_floor<F>(target: Mag, start: Precision, compute: F) -> Result<Refined>
where
    F: Fn(Precision) -> Result<(Ball, Mag)>,
{
    let (ball, precision, target_met) = refine_by(target, start, compute, |(b, floor)| (b.rad(), *floor))?;
    Ok(Refined { ball: ball.0, precision, target_met })
}

/// Generic driver: `measure` reports the current radius and its
/// precision-independent floor. Returns the last output, its precision, and
/// whether the target was met.
pub fn refine_by<T, E, F, M>(target: Mag, start: Precision, compute: F, measure: M) -> Result<(T, Precision, bool), E>
where
    F: Fn(Precision) -> Result<T, E>,
    M: Fn(&T) -> (Mag, Mag),
{
    let mut prec = start;
    loop {
        let out = compute(prec)?;
        let (rad, floor) = measure(&out);
        if rad <= target {
            return Ok((out, prec, true));
        }
        if floor > target {
            return Ok((out, prec, false));
        }
        match prec.doubled() {
            Some(next) => prec = next,
            None => return Ok((out, prec, false)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaches_tight_target() {
        let target = Mag::from_f64_up(1e-30);
        let r = refine(target, Precision::new(32).unwrap(), |p| Ball::one().exp(p)).unwrap();
        assert!(r.target_met);
        assert!(r.ball.rad() <= target);
        assert!(r.precision.bits() >= 128);
    }

    #[test]
    fn tail_floor_flags() {
        let target = Mag::from_f64_up(1e-10);
        let r = refine_with_floor(target, Precision::default(), |p| {
            let tail = Mag::from_f64_up(1e-5);
            Ok((Ball::one().exp(p)?.add_error(tail), tail))
        })
        .unwrap();
        assert!(!r.target_met);
        assert_eq!(r.precision, Precision::default());
    }

    #[test]
    fn deterministic() {
        let target = Mag::from_f64_up(1e-40);
        let a = refine(target, Precision::default(), |p| Ball::from_i64(3).ln(p)).unwrap();
        let b = refine(target, Precision::default(), |p| Ball::from_i64(3).ln(p)).unwrap();
        assert_eq!(a, b);
    }
}
