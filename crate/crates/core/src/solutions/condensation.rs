//! `u2(x, t) = sum_k 2^-k Phi(x + 1, t - r_k)` over the fixed rational enumeration.

use std::cmp::Ordering;

use num_rational::BigRational;

use super::enumeration::enumerate_rational;
use crate::heat_kernel::{phi_dt, spatial_sup_upper};
use crate::numerics::{pi, Ball, Mag, Precision, Result, Scalar};

/// Hard cap on retained terms; beyond it the tail is below `2^-65536`.
pub(crate) const MAX_TERMS: u32 = 1 << 16;

pub(crate) struct Condensation<'a> {
    pub x: &'a Scalar,
    pub t: &'a Scalar,
}

impl Condensation<'_> {
    pub fn y(&self, prec: Precision) -> Ball {
        self.x.to_ball(prec).add(&Ball::one(), prec)
    }

    /// Upper bound of `sup_s |d_t^n Phi(x + 1, s)|`. For `n = 0` this is
    /// `(2 pi e)^(-1/2) / (x + 1)`.
    /// The bound does not depend on `prec`.
    pub fn kernel_sup(&self, n: u32, _prec: Precision) -> Result<Mag> {
        let wp = Precision::fixed(112);
        let y = self.y(wp);
        if n == 0 {
            let two_pi_e = pi(wp).mul(&Ball::one().exp(wp)?, wp).mul_2exp(1);
            return Ok(two_pi_e.sqrt(wp)?.mul(&y, wp).recip(wp)?.abs_upper());
        }
        spatial_sup_upper(2 * n, &y, wp)
    }

    pub fn tail_after(&self, big_k: u32, n: u32, prec: Precision) -> Result<Mag> {
        Ok(self.kernel_sup(n, prec)?.mul_2exp(-(big_k as i64)))
    }

    /// Smallest `K` whose tail is at most `target`.
    pub fn terms_for(&self, target: Mag, n: u32, prec: Precision) -> Result<u32> {
        let sup = self.kernel_sup(n, prec)?;
        if target.is_zero() {
            return Ok(MAX_TERMS);
        }
        let k = (sup.msb() - target.msb() + 2).clamp(1, MAX_TERMS as i64) as u32;
        Ok(k)
    }

    /// `t - r`, exact when `t` is rational.
    fn shift(&self, r: &BigRational, prec: Precision) -> Ball {
        match self.t.as_rational() {
            Some(t) => Ball::from_rational(&(t - r), prec),
            None => self.t.to_ball(prec.guarded(16)).sub(&Ball::from_rational(r, prec.guarded(16)), prec),
        }
    }

    pub fn term(&self, k: u32, n: u32, prec: Precision) -> Result<Ball> {
        let r = enumerate_rational(k as u64);
        if self.t.cmp_rational(&r) != Ordering::Greater {
            return Ok(Ball::zero());
        }
        let wp = prec.guarded(8);
        let s = self.shift(&r, wp);
        Ok(phi_dt(n, &self.y(wp), &s, wp)?.mul_2exp(-(k as i64)).round(prec))
    }

    pub fn partial(&self, big_k: u32, n: u32, prec: Precision) -> Result<Ball> {
        let wp = prec.guarded(8 + (32 - big_k.leading_zeros()));
        let mut sum = Ball::zero();
        for k in 1..=big_k {
            sum = sum.add(&self.term(k, n, wp)?, wp);
        }
        Ok(sum.round(prec))
    }
}
