//! Central-difference heat residual `D_t u - D_xx u` on a grid.
//!
//! With step `h` the truncation error is at most
//! `h^2 (sup |u_ttt| / 6 + sup |u_xxxx| / 12)`, and `u_xxxx = u_tt`. The sups
//! are bounded over `x >= x_min - h` by summing term amplitudes (lacunary
//! series) or by the kernel sup (`u2`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::{ball_max, DiagnosticsError, Result};
use crate::numerics::{Ball, Mag, Precision, Scalar};
use crate::parallel::{self, ExecMode};
use crate::solutions::lacunary::Lacunary;
use crate::solutions::{enumerate_rational, evaluate, Condensation, SolutionId};

/// Evaluation radius requested for every stencil value.
const EVAL_TARGET_LOG2: i64 = -110;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualPoint {
    pub x: Scalar,
    pub t: Scalar,
    pub residual: Ball,
    /// Terms retained at the centre (relevant for the `u2` stencil flag).
    pub terms_used: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    pub solution: SolutionId,
    pub h: BigRational,
    pub points: Vec<ResidualPoint>,
    /// Enclosure of `max |residual|`.
    pub max_residual: Ball,
    /// A-priori truncation budget `h^2 (S3 / 6 + S2 / 12)`.
    pub budget: Mag,
    /// For `u2`: every stencil stays at least `10 h` away from every retained
    /// shift `r_k`. Always `true` for the lacunary solutions.
    pub stencil_clear: bool,
}

impl ResidualReport {
    pub fn max_upper_f64(&self) -> f64 {
        self.max_residual.abs_upper().to_f64()
    }
}

fn shifted(s: &Scalar, d: &BigRational) -> Result<Scalar> {
    s.add_rational(d).ok_or_else(|| DiagnosticsError::Precondition(format!("cannot shift {s} exactly")))
}

fn residual_at(id: &SolutionId, x: &Scalar, t: &Scalar, h: &BigRational, prec: Precision) -> Result<ResidualPoint> {
    let target = Mag::pow2(EVAL_TARGET_LOG2);
    let wp = prec.guarded(16);
    let eval = |x: &Scalar, t: &Scalar| evaluate(id, x, t, target, prec);
    let centre = eval(x, t)?;
    let mh = -h.clone();
    let tp = eval(x, &shifted(t, h)?)?.value;
    let tm = eval(x, &shifted(t, &mh)?)?.value;
    let xp = eval(&shifted(x, h)?, t)?.value;
    let xm = eval(&shifted(x, &mh)?, t)?.value;
    let hb = Ball::from_rational(h, wp);
    let dt = tp.sub(&tm, wp).div(&hb.mul_2exp(1), wp)?;
    let dxx = xp.add(&xm, wp).sub(&centre.value.mul_2exp(1), wp).div(&hb.sqr(wp), wp)?;
    Ok(ResidualPoint { x: x.clone(), t: t.clone(), residual: dt.sub(&dxx, wp).round(prec), terms_used: centre.terms_used })
}

/// Upper bound of `sup |d_t^n u|` over `x >= x_low`.
fn derivative_sup(id: &SolutionId, x_low: &Scalar, n: u32, prec: Precision) -> Result<Mag> {
    match id.weight() {
        Some(w) => {
            let zero = Scalar::zero();
            let lac = Lacunary { weight: &w, x: x_low, t: &zero };
            let big_k = lac.ratio_start(n as u64, prec)? + 2;
            let mut s = Mag::ZERO;
            for k in 1..=big_k {
                s = s.add(lac.log_amplitude(k, n as u64, prec)?.exp(prec)?.abs_upper());
            }
            let lac_tail = lac.log_amplitude(big_k + 1, n as u64, prec)?.exp(prec)?.abs_upper().mul_2exp(1);
            Ok(s.add(lac_tail))
        }
        // sum_k 2^-k <= 1
        None => Ok(Condensation { x: x_low, t: &Scalar::zero() }.kernel_sup(n, prec)?),
    }
}

fn stencil_clear(t: &Scalar, h: &BigRational, terms: u32) -> bool {
    let Some(t) = t.as_rational() else { return true };
    let gap = h * BigInt::from(10);
    (1..=terms as u64).all(|k| (t - enumerate_rational(k)).abs() >= gap)
}

/// Residuals on the product grid `xs x ts`.
pub fn residual_check(
    id: &SolutionId,
    xs: &[Scalar],
    ts: &[Scalar],
    h: &BigRational,
    prec: Precision,
    mode: ExecMode,
) -> Result<ResidualReport> {
    if !h.is_positive() {
        return Err(DiagnosticsError::Precondition("step must be positive".into()));
    }
    if xs.is_empty() || ts.is_empty() {
        return Err(DiagnosticsError::Precondition("empty grid".into()));
    }
    let grid: Vec<(&Scalar, &Scalar)> = xs.iter().flat_map(|x| ts.iter().map(move |t| (x, t))).collect();
    let points = parallel::map(mode, &grid, |(x, t)| residual_at(id, x, t, h, prec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_residual = ball_max(points.iter().map(|p| p.residual.abs())).expect("non-empty grid");

    let x_min = xs
        .iter()
        .min_by(|a, b| a.to_f64().partial_cmp(&b.to_f64()).expect("finite"))
        .expect("non-empty");
    let x_low = shifted(x_min, &-h.clone())?;
    let s3 = derivative_sup(id, &x_low, 3, prec)?;
    let s2 = derivative_sup(id, &x_low, 2, prec)?;
    let hm = Ball::from_rational(h, prec).abs_upper();
    let h2 = hm.mul(hm);
    let budget = h2.mul(s3.div(Mag::from_u64(6)).add(s2.div(Mag::from_u64(12))));

    let stencil_clear = match id {
        SolutionId::U2 => points.iter().all(|p| stencil_clear(&p.t, h, p.terms_used)),
        _ => true,
    };
    Ok(ResidualReport { solution: id.clone(), h: h.clone(), points, max_residual, budget, stencil_clear })
}
