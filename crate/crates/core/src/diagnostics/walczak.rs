//! Observed bound for `sup_n |phi^(n)(t)| delta0^n / n!` over `|t| > A`, with
//! `phi(t) = Phi(x0 + 1, t)`.
//!
//! The result is evidence that the uniform bound holds on the sampled grid
//! and orders; it does not derive the constant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ball_max, DiagnosticsError, Result, Verdict};
use crate::heat_kernel::phi_dt;
use crate::numerics::{Ball, Float, Mag, Precision, Scalar};
use crate::parallel::{self, ExecMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalczakCheck {
    pub x0: Scalar,
    pub delta0: BigRational,
    pub a: BigRational,
    pub nmax: u32,
    /// Enclosure of the observed sup.
    pub sup_observed: Ball,
    /// Order and time at which the sup was attained.
    pub argmax: (u32, Scalar),
    /// Candidate constant: the upper end of `sup_observed` plus 1/1024 relative.
    pub l: Float,
    pub verdict: Verdict,
}

fn weighted_row(y: &Ball, t: &Scalar, delta0: &Ball, nmax: u32, prec: Precision) -> Result<Vec<Ball>> {
    let wp = prec.guarded(32);
    let tb = t.to_ball(wp);
    let mut scale = Ball::one();
    let mut row = Vec::with_capacity(nmax as usize + 1);
    for n in 0..=nmax {
        if n > 0 {
            scale = scale.mul(delta0, wp).div_i64(n as i64, wp)?;
        }
        let d = if t.signum() < 0 { Ball::zero() } else { phi_dt(n, y, &tb, wp)? };
        row.push(d.abs().mul(&scale, wp).round(prec));
    }
    Ok(row)
}

pub fn walczak_hypothesis_check(
    x0: &Scalar,
    delta0: &BigRational,
    a: &BigRational,
    nmax: u32,
    t_grid: &[Scalar],
    prec: Precision,
    mode: ExecMode,
) -> Result<WalczakCheck> {
    if !delta0.is_positive() || !a.is_positive() {
        return Err(DiagnosticsError::Precondition("delta0 and A must be positive".into()));
    }
    if x0.signum() < 0 {
        return Err(DiagnosticsError::Precondition("x0 must be >= 0".into()));
    }
    if t_grid.is_empty() {
        return Err(DiagnosticsError::Precondition("empty t grid".into()));
    }
    if let Some(bad) = t_grid.iter().find(|t| t.abs().cmp_rational(a) != std::cmp::Ordering::Greater) {
        return Err(DiagnosticsError::Precondition(format!("grid point t = {bad} has |t| <= A")));
    }
    let wp = prec.guarded(16);
    let y = x0.to_ball(wp).add(&Ball::one(), wp);
    let d = Ball::from_rational(delta0, wp);
    let rows = parallel::map(mode, t_grid, |t| weighted_row(&y, t, &d, nmax, prec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(Float, u32, usize)> = None;
    for (i, row) in rows.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            let up = v.upper();
            if best.as_ref().is_none_or(|(b, _, _)| up > *b) {
                best = Some((up, n as u32, i));
            }
        }
    }
    let (_, n_star, i_star) = best.expect("non-empty grid");
    let sup_observed = ball_max(rows.into_iter().flatten()).expect("non-empty grid");
    let up = Mag::from_float_up(&sup_observed.upper());
    let l = up.add(up.mul_2exp(-10)).to_float();
    let l = if l.is_zero() { Float::new(BigInt::one(), -64) } else { l };
    let verdict = if sup_observed.upper() < l { Verdict::Pass } else { Verdict::Inconclusive };
    Ok(WalczakCheck {
        x0: x0.clone(),
        delta0: delta0.clone(),
        a: a.clone(),
        nmax,
        sup_observed,
        argmax: (n_star, t_grid[i_star].clone()),
        l,
        verdict,
    })
}

/// `t` grid used by default: `k / 4` for `k` in `(4A, 4T]`, and the mirrored
/// negative points.
pub fn default_t_grid(a: &BigRational, t_max: u32) -> Vec<Scalar> {
    let mut out = Vec::new();
    let four_a = (a * BigInt::from(4)).floor().to_integer();
    let lo: i64 = four_a.try_into().unwrap_or(0);
    for k in lo + 1..=4 * t_max as i64 {
        let t = Scalar::ratio(k, 4);
        if t.abs().cmp_rational(a) == std::cmp::Ordering::Greater {
            out.push(t.neg());
            out.push(t);
        }
    }
    out.retain(|t| !t.as_rational().is_some_and(|q| q.is_zero()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::agrees;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn negative_times_vanish() {
        let grid = vec![Scalar::from_i64(-2), Scalar::from_i64(-50)];
        let r = walczak_hypothesis_check(&Scalar::zero(), &q(1, 2), &q(1, 1), 10, &grid, p(), ExecMode::Sequential).unwrap();
        assert!(r.sup_observed.is_exact_zero());
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn order_zero_at_one() {
        let d = Ball::one();
        let row = weighted_row(&Ball::one(), &Scalar::from_i64(1), &d, 0, p()).unwrap();
        assert!(agrees(&row[0], "0.21969564473386119852343098870", 1e-25));
    }

    #[test]
    fn halving_delta_does_not_increase() {
        let grid = default_t_grid(&q(1, 1), 10);
        let a = walczak_hypothesis_check(&Scalar::zero(), &q(1, 2), &q(1, 1), 20, &grid, p(), ExecMode::Sequential).unwrap();
        let b = walczak_hypothesis_check(&Scalar::zero(), &q(1, 4), &q(1, 1), 20, &grid, p(), ExecMode::Sequential).unwrap();
        assert!(b.sup_observed.upper() <= a.sup_observed.upper());
        assert!(a.sup_observed.upper() < a.l);
    }

    #[test]
    fn grid_must_avoid_window() {
        let grid = vec![Scalar::ratio(1, 2)];
        assert!(walczak_hypothesis_check(&Scalar::zero(), &q(1, 2), &q(1, 1), 3, &grid, p(), ExecMode::Sequential).is_err());
    }
}
