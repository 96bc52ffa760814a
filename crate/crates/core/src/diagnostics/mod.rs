//! Numerical replay of the quantitative steps behind the non-analyticity
//! arguments, the growth envelope of `w_eps`, and heat-equation residuals.
//!
//! Every comparison is decided with enclosures: a check passes or fails only
//! when the gap between the two sides exceeds their combined radii, and is
//! reported [`Verdict::Inconclusive`] otherwise.

mod envelope;
mod replay;
mod residual;
mod walczak;

use num_bigint::BigInt;
use thiserror::Error;

use crate::derivatives::DerivativeError;
use crate::numerics::{Ball, Float, NumericsError, Precision, SignedLog};
use crate::solutions::SolutionError;

pub use envelope::{
    choose_k, envelope_check, envelope_constants, k_window_forms, EnvelopeCertificate, EnvelopeCheck, EnvelopePoint,
};
pub use replay::{
    choose_m, choose_m_n, choose_m_n_weps, dominance_check, find_n0, lower_bound_check, proof_replay, taylor_growth_scan,
    weight_f_n, DominanceCheck, GrowthRow, LowerBoundCheck, ProofReplayRecord, MAX_REPLAY_N,
};
pub use residual::{residual_check, ResidualPoint, ResidualReport};
pub use walczak::{default_t_grid, walczak_hypothesis_check, WalczakCheck};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("undecidable at the precision cap: {0}")]
    Undecidable(String),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error(transparent)]
    Derivative(#[from] DerivativeError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T, E = DiagnosticsError> = std::result::Result<T, E>;

/// Bits at which an undecided comparison gives up.
pub(crate) const ESCALATION_CAP: u32 = 4096;

/// `ceil(v)` for a real known through enclosures, escalating precision until
/// the enclosure avoids every integer.
pub(crate) fn ceil_certified<F>(what: &str, v: F) -> Result<BigInt>
where
    F: Fn(Precision) -> Result<Ball>,
{
    let mut prec = Precision::default();
    loop {
        let b = v(prec)?;
        let (lo, hi) = (b.lower().floor(), b.upper().floor());
        if lo == hi && !b.contains_float(&Float::from_bigint(lo.clone())) {
            return Ok(lo + 1);
        }
        if prec.bits() >= ESCALATION_CAP {
            return Err(DiagnosticsError::Undecidable(what.to_string()));
        }
        prec = prec.doubled().ok_or_else(|| DiagnosticsError::Undecidable(what.to_string()))?;
    }
}

/// Outcome of a certified comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// `Pass` only if every input passes; `Fail` if any fails.
    pub fn all<I: IntoIterator<Item = Verdict>>(items: I) -> Verdict {
        let mut out = Verdict::Pass;
        for v in items {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Pass => {}
            }
        }
        out
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Decide `a <= b` on log-magnitudes of positive quantities. `a_lower` may be
/// a smaller certified value used only to establish failure.
pub(crate) fn log_le(a_upper: &SignedLog, a_lower: &SignedLog, b: &SignedLog) -> Verdict {
    if a_upper.is_zero() {
        return Verdict::Pass;
    }
    if b.is_zero() {
        return if a_lower.is_zero() { Verdict::Inconclusive } else { Verdict::Fail };
    }
    if a_upper.logmag().upper() <= b.logmag().lower() {
        Verdict::Pass
    } else if !a_lower.is_zero() && a_lower.logmag().lower() > b.logmag().upper() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// Ball spanning the largest lower end and the largest upper end.
pub(crate) fn ball_max(items: impl IntoIterator<Item = Ball>) -> Option<Ball> {
    let mut lo = None;
    let mut hi = None;
    for b in items {
        let (l, u) = (b.lower(), b.upper());
        lo = Some(match lo {
            Some(prev) if prev >= l => prev,
            _ => l,
        });
        hi = Some(match hi {
            Some(prev) if prev >= u => prev,
            _ => u,
        });
    }
    let (lo, hi) = (lo?, hi?);
    Some(Ball::from_endpoints(&lo, &hi, Precision::new(256).expect("valid")))
}
