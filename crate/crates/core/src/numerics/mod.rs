//! Ball arithmetic over arbitrary-precision binary floats.
//!
//! A [`Ball`] is a midpoint-radius enclosure; every operation returns a ball
//! containing the exact image of every point of its inputs. [`SignedLog`]
//! carries quantities through their log-magnitude when only the size matters.

mod ball;
mod decimal;
mod elementary;
mod float;
mod mag;
mod refine;
mod scalar;
mod signed_log;

use std::sync::OnceLock;

use thiserror::Error;

pub use ball::Ball;
pub use decimal::{format_ball, format_mag_up, DecimalBall};
pub use elementary::{ln2, ln_factorial, pi, pow2_rational};
pub use float::Float;
pub use mag::Mag;
pub use refine::{refine, refine_by, refine_with_floor, Refined};
pub use scalar::{Scalar, ScalarParseError};
pub use signed_log::{log_sum_exp, Sign, SignedLog};

/// Default working precision in bits.
pub const DEFAULT_PREC_BITS: u32 = 128;
/// Default ceiling for precision escalation; `NWHEAT_PREC_CAP` overrides it.
pub const DEFAULT_PREC_CAP: u32 = 16384;
pub const MIN_PREC_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("precision {requested} bits outside [{min}, {cap}]")]
    PrecisionOutOfRange { requested: u32, min: u32, cap: u32 },
    #[error("sign indeterminate: cancellation exhausted the working precision")]
    SignIndeterminate,
    #[error("exponent overflow: {0}")]
    Overflow(String),
}

pub type Result<T, E = NumericsError> = std::result::Result<T, E>;

/// The active precision cap, read once from `NWHEAT_PREC_CAP`.
pub fn precision_cap() -> u32 {
    static CAP: OnceLock<u32> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("NWHEAT_PREC_CAP")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&v| v >= MIN_PREC_BITS)
            .unwrap_or(DEFAULT_PREC_CAP)
    })
}

/// Working mantissa size in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub fn new(bits: u32) -> Result<Precision> {
        let cap = precision_cap();
        if !(MIN_PREC_BITS..=cap).contains(&bits) {
            return Err(NumericsError::PrecisionOutOfRange { requested: bits, min: MIN_PREC_BITS, cap });
        }
        Ok(Precision(bits))
    }

    /// For internal constants; bypasses validation.
    pub(crate) const fn fixed(bits: u32) -> Precision {
        Precision(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Internal precision with extra guard bits; not subject to the cap.
    pub(crate) fn guarded(self, extra: u32) -> Precision {
        Precision(self.0.saturating_add(extra))
    }

    /// Twice the bits, or `None` once the cap would be exceeded.
    pub fn doubled(self) -> Option<Precision> {
        let next = self.0.checked_mul(2)?;
        (next <= precision_cap()).then_some(Precision(next))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_PREC_BITS)
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
