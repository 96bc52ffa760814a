//! Shared engine for the lacunary series
//! `sum_k exp(-w_k) sin(2^(2k+1) t - 2^k x)` and their time derivatives.
//!
//! The `n`-th time derivative of term `k` is
//! `exp(-w_k) 2^(n(2k+1)) trig_n(theta_k)` with `trig_n` cycling through
//! `sin, cos, -sin, -cos`. With `d_k = w_(k+1) - w_k`, consecutive amplitudes
//! have log-ratio `2n ln 2 - d_k`, which is decreasing once `d_k` is
//! increasing. Past the first index where it drops below `-ln 2`, the tail
//! after `K` terms is at most twice the amplitude of term `K + 1`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::numerics::{ln2, pow2_rational, Ball, Mag, NumericsError, Precision, Result, Scalar};

/// Largest term index the engine will touch; `w_k` then stays far inside the
/// exponential's argument range.
pub(crate) const MAX_TERM: u32 = 56;
const TAIL_PREC: Precision = Precision::fixed(96);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Weight {
    /// `w_k = 2^k (1 + x)`
    Unit,
    /// `w_k = 2^k (2^(eps k) + x)`
    Power(BigRational),
}

pub(crate) struct Lacunary<'a> {
    pub weight: &'a Weight,
    pub x: &'a Scalar,
    pub t: &'a Scalar,
}

/// Rough binary magnitude of a scalar, for guard-bit budgeting.
pub(crate) fn scalar_msb(s: &Scalar) -> u32 {
    if s.is_zero() {
        return 0;
    }
    s.to_ball(Precision::default()).mid().msb().max(0) as u32
}

impl Lacunary<'_> {
    /// Enclosure of `w_k` with absolute error about `2^-prec`.
    pub fn decay(&self, k: u32, prec: Precision) -> Result<Ball> {
        let wp = Precision::fixed(prec.bits() + k + scalar_msb(self.x) + 24 + self.eps_bits(k));
        let x = self.x.to_ball(wp);
        let inner = match self.weight {
            Weight::Unit => x.add(&Ball::one(), wp),
            Weight::Power(eps) => {
                let e = pow2_rational(&(eps * BigInt::from(k)), wp)?;
                e.add(&x, wp)
            }
        };
        Ok(inner.mul_2exp(k as i64))
    }

    fn eps_bits(&self, k: u32) -> u32 {
        match self.weight {
            Weight::Unit => 0,
            Weight::Power(_) => k,
        }
    }

    /// `ln` of the amplitude `exp(-w_k) 2^(n(2k+1))`.
    pub fn log_amplitude(&self, k: u32, n: u64, prec: Precision) -> Result<Ball> {
        let wp = Precision::fixed(prec.bits() + 72);
        let w = self.decay(k, wp)?;
        let e = n as i128 * (2 * k as i128 + 1);
        let e = i64::try_from(e).map_err(|_| NumericsError::Overflow("derivative order".into()))?;
        Ok(ln2(wp).mul_i64(e, wp).sub(&w, wp))
    }

    /// `theta_k = 2^(2k+1) t - 2^k x` to absolute accuracy about `2^-prec`.
    pub fn theta(&self, k: u32, prec: Precision) -> Ball {
        let scale = 2 * k + 1 + scalar_msb(self.t).max(scalar_msb(self.x));
        let wp = Precision::fixed(prec.bits() + scale + 24);
        match (self.t.as_rational(), self.x.as_rational()) {
            (Some(t), Some(x)) => {
                let two = BigInt::from(2);
                let q = t * BigRational::from_integer(two.pow(2 * k + 1)) - x * BigRational::from_integer(two.pow(k));
                Ball::from_rational(&q, wp)
            }
            _ => {
                let t = self.t.to_ball(wp).mul_2exp(2 * k as i64 + 1);
                let x = self.x.to_ball(wp).mul_2exp(k as i64);
                t.sub(&x, wp)
            }
        }
    }

    /// Whether every phase vanishes, i.e. `x = t = 0`.
    pub fn phases_vanish(&self) -> bool {
        self.x.is_zero() && self.t.is_zero()
    }

    /// Term `k` of the `n`-th time derivative.
    pub fn term(&self, k: u32, n: u64, prec: Precision) -> Result<Ball> {
        let wp = prec.guarded(16);
        let theta = self.theta(k, wp);
        let sine = n % 2 == 0;
        if sine && theta.is_exact_zero() {
            return Ok(Ball::zero());
        }
        let (s, c) = theta.sin_cos(wp)?;
        let trig = match n % 4 {
            0 => s,
            1 => c,
            2 => s.neg(),
            _ => c.neg(),
        };
        let w = self.decay(k, wp)?;
        let amp = w.neg().exp(wp)?;
        let e = i64::try_from(n as i128 * (2 * k as i128 + 1)).map_err(|_| NumericsError::Overflow("derivative order".into()))?;
        Ok(amp.mul(&trig, wp).mul_2exp(e).round(prec))
    }

    /// First index from which the gaps `d_k` increase.
    pub fn monotone_from(&self) -> u32 {
        match self.weight {
            Weight::Unit => 1,
            Weight::Power(eps) => {
                if self.x.signum() >= 0 {
                    return 1;
                }
                crossover(eps, self.x)
            }
        }
    }

    /// First `K0 >= monotone_from()` with a certified log-ratio `<= -ln 2`.
    pub fn ratio_start(&self, n: u64, prec: Precision) -> Result<u32> {
        let wp = prec.guarded(32);
        let l2 = ln2(wp);
        let mut k = self.monotone_from();
        let mut prev = self.log_amplitude(k, n, wp)?;
        loop {
            if k >= MAX_TERM {
                return Err(NumericsError::Overflow(format!("series needs more than {MAX_TERM} terms")));
            }
            let next = self.log_amplitude(k + 1, n, wp)?;
            let rho = next.sub(&prev, wp).add(&l2, wp);
            if rho.upper() <= crate::numerics::Float::zero() {
                return Ok(k);
            }
            prev = next;
            k += 1;
        }
    }

    /// Upper bound on the tail after `big_k` terms; needs `big_k >= ratio_start(n)`.
    /// The bound does not depend on `prec`, so enclosures at different
    /// precisions stay nested.
    pub fn tail_after(&self, big_k: u32, n: u64, _prec: Precision) -> Result<Mag> {
        if self.phases_vanish() && n % 2 == 0 {
            return Ok(Mag::ZERO);
        }
        let tp = TAIL_PREC;
        let a = self.log_amplitude(big_k + 1, n, tp)?.exp(tp)?;
        Ok(a.abs_upper().mul_2exp(1))
    }

    /// `sum_(k=1..=big_k)` of the `n`-th derivative terms.
    pub fn partial(&self, big_k: u32, n: u64, prec: Precision) -> Result<Ball> {
        let wp = prec.guarded(8 + (32 - big_k.leading_zeros()));
        let mut sum = Ball::zero();
        for k in 1..=big_k {
            sum = sum.add(&self.term(k, n, wp)?, wp);
        }
        Ok(sum.round(prec))
    }
}

/// Smallest `k` with `2^(eps k) >= |x| + 1`. Undecided comparisons move to
/// the next `k`, which keeps the result a valid monotonicity start.
pub(crate) fn crossover(eps: &BigRational, x: &Scalar) -> u32 {
    let p = Precision::fixed(256);
    let target = x.abs().to_ball(p).add(&Ball::one(), p);
    let guess = (target.to_f64().log2() / eps.to_f64().unwrap_or(1.0)).floor().max(2.0) as u32 - 1;
    let mut k = guess.clamp(1, MAX_TERM);
    // Step back while the condition already holds one index earlier.
    while k > 1 && holds(eps, k - 1, &target, p) {
        k -= 1;
    }
    while !holds(eps, k, &target, p) {
        k += 1;
    }
    k
}

fn holds(eps: &BigRational, k: u32, target: &Ball, p: Precision) -> bool {
    match pow2_rational(&(eps * BigInt::from(k)), p) {
        Ok(v) => v.lower().cmp(&target.upper()) != Ordering::Less,
        Err(_) => false,
    }
}
