//! Replay of the derivative lower bound for `u1` and `w_eps`.
//!
//! For `N >= 1` pick `m_N` in the window `c_N 2^N <= 4 m_N < c_N 2^N + 4`, where
//! `c_N = 1 + x0` for `u1` and `c_N = 2^(eps N) + x0` for `w_eps`, and set
//! `F_N(k) = exp(-w_k) 2^(2 m_N (2k+1))`. When
//! `sum_(k != N) 2^(2k) F_N(k) <= F_N(N) / 100`, the derivatives of orders
//! `2 m_N` and `2 m_N + 1` satisfy `|h^(2m)| + |h^(2m+1)| >= F_N(N) / 2`, and
//! therefore `(|h^(2m)| + |h^(2m+1)|) / (2m+1)! >= floor^(2m)` with
//! `floor = (m - 1)^2 / (c_N^2 (2m + 1))`.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{ceil_certified, log_le, DiagnosticsError, Result, Verdict, ESCALATION_CAP};
use crate::derivatives::{taylor_coefficient, time_derivative, TimeDerivative};
use crate::numerics::{ln2, ln_factorial, log_sum_exp, pow2_rational, Ball, Float, Mag, Precision, Scalar, SignedLog};
use crate::parallel::{self, ExecMode};
use crate::solutions::lacunary::{Lacunary, Weight, MAX_TERM};
use crate::solutions::SolutionId;

/// Largest `N` accepted by the scans.
pub const MAX_REPLAY_N: u32 = 30;

fn weight_of(id: &SolutionId) -> Result<Weight> {
    id.weight()
        .ok_or_else(|| DiagnosticsError::Precondition(format!("proof replay is defined for u1 and weps, not {}", id.name())))
}

fn to_u64(m: BigInt) -> Result<u64> {
    m.to_u64().ok_or_else(|| DiagnosticsError::Precondition("m_N exceeds 64 bits".into()))
}

fn rational_ceil(q: &BigRational) -> BigInt {
    let (d, r) = q.numer().div_mod_floor(q.denom());
    if r.is_zero() {
        d
    } else {
        d + 1
    }
}

/// The unique `m` with `2^N (1 + x0) <= 4m < 2^N (1 + x0) + 4`.
pub fn choose_m_n(x0: &Scalar, n: u32) -> Result<u64> {
    if x0.signum() < 0 {
        return Err(DiagnosticsError::Precondition("u1 replay needs x0 >= 0".into()));
    }
    if n == 0 || n > 60 {
        return Err(DiagnosticsError::Precondition(format!("N = {n} outside [1, 60]")));
    }
    let scale = BigRational::from_integer(BigInt::from(1u64 << n)) / BigInt::from(4);
    match x0.as_rational() {
        Some(q) => to_u64(rational_ceil(&((q + BigInt::from(1)) * &scale))),
        None => to_u64(ceil_certified("m_N window", |p| {
            Ok(x0.to_ball(p.guarded(8)).add(&Ball::one(), p).mul_2exp(n as i64 - 2))
        })?),
    }
}

/// Whether `2^(eps N) >= 2 + |x0|` holds (certified).
fn weps_precondition(eps: &BigRational, x0: &Scalar, n: u32) -> Result<bool> {
    let q = eps * BigInt::from(n);
    if let (true, Some(x)) = (q.is_integer(), x0.as_rational()) {
        let lhs = BigRational::from_integer(BigInt::from(2).pow(q.to_integer().to_u32().unwrap_or(u32::MAX)));
        return Ok(lhs >= BigRational::from_integer(BigInt::from(2)) + num_traits::Signed::abs(x));
    }
    let p = Precision::new(256).expect("valid");
    let lhs = pow2_rational(&q, p)?;
    let rhs = x0.abs().to_ball(p).add(&Ball::from_i64(2), p);
    match lhs.certified_lt(&rhs) {
        Some(true) => Ok(false),
        Some(false) if rhs.certified_lt(&lhs) == Some(true) => Ok(true),
        _ => Err(DiagnosticsError::Undecidable("2^(eps N) >= 2 + |x0|".into())),
    }
}

/// The unique `m` with `(2^(eps N) + x0) 2^N <= 4m < (2^(eps N) + x0) 2^N + 4`,
/// for `N` with `2^(eps N) >= 2 + |x0|`.
pub fn choose_m_n_weps(eps: &BigRational, x0: &Scalar, n: u32) -> Result<u64> {
    SolutionId::weps(eps.clone())?;
    if n == 0 || n > 60 {
        return Err(DiagnosticsError::Precondition(format!("N = {n} outside [1, 60]")));
    }
    if !weps_precondition(eps, x0, n)? {
        return Err(DiagnosticsError::Precondition(format!("2^(eps N) < 2 + |x0| at N = {n}")));
    }
    let q = eps * BigInt::from(n);
    if let (true, Some(x)) = (q.is_integer(), x0.as_rational()) {
        let e = q.to_integer().to_u32().expect("small exponent");
        let c = BigRational::from_integer(BigInt::from(2).pow(e)) + x;
        let v = c * BigRational::from_integer(BigInt::from(1u64 << n)) / BigInt::from(4);
        return to_u64(rational_ceil(&v));
    }
    to_u64(ceil_certified("m_N window", |p| {
        let wp = p.guarded(16 + n);
        Ok(pow2_rational(&q, wp)?.add(&x0.to_ball(wp), wp).mul_2exp(n as i64 - 2).round(p))
    })?)
}

/// `m_N` for either lacunary solution.
pub fn choose_m(id: &SolutionId, x0: &Scalar, n: u32) -> Result<u64> {
    match id {
        SolutionId::U1 => choose_m_n(x0, n),
        SolutionId::Weps { eps } => choose_m_n_weps(eps, x0, n),
        SolutionId::U2 => Err(DiagnosticsError::Precondition("u2 has no m_N".into())),
    }
}

/// `F_N(k) = exp(-w_k) 2^(2 m (2k+1))` as a positive log-magnitude.
pub fn weight_f_n(id: &SolutionId, x0: &Scalar, m: u64, k: u32, prec: Precision) -> Result<SignedLog> {
    let w = weight_of(id)?;
    let zero = Scalar::zero();
    let lac = Lacunary { weight: &w, x: x0, t: &zero };
    Ok(SignedLog::positive(lac.log_amplitude(k, 2 * m, prec)?))
}

/// Certified decision of `sum_(k != N) 2^(2k) F_N(k) <= F_N(N) / 100`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceCheck {
    pub n: u32,
    pub m: u64,
    /// `F_N(k)` for `k = 1..=table.len()`.
    pub table: Vec<SignedLog>,
    /// Upper bound of `sum_(k > table.len()) 2^(2k) F_N(k)`.
    pub tail: SignedLog,
    /// Upper bound of the full off-diagonal sum (tail included).
    pub off_sum: SignedLog,
    /// `F_N(N) / 100`.
    pub threshold: SignedLog,
    pub verdict: Verdict,
}

impl DominanceCheck {
    /// `off_sum / F_N(N)` as an `f64`, for display.
    pub fn ratio_f64(&self) -> f64 {
        if self.off_sum.is_zero() {
            return 0.0;
        }
        let l = self.off_sum.logmag().to_f64() - self.table[self.n as usize - 1].logmag().to_f64();
        l.exp()
    }
}

fn dominance_at(id: &SolutionId, x0: &Scalar, n: u32, m: u64, prec: Precision) -> Result<DominanceCheck> {
    let w = weight_of(id)?;
    let zero = Scalar::zero();
    let lac = Lacunary { weight: &w, x: x0, t: &zero };
    let wp = prec.guarded(16);
    let l2 = ln2(wp);
    let log_f = |k: u32| lac.log_amplitude(k, 2 * m, wp);
    let log_g = |k: u32| -> Result<Ball> { Ok(log_f(k)?.add(&l2.mul_i64(2 * k as i64, wp), wp)) };

    // Ratio of consecutive 2^(2k) F_N(k) decreases from the monotone point on.
    let mut k0 = (n + 1).max(lac.monotone_from());
    loop {
        if k0 >= MAX_TERM {
            return Err(DiagnosticsError::Precondition("F_N table does not decay".into()));
        }
        let rho = log_g(k0 + 1)?.sub(&log_g(k0)?, wp).add(&l2, wp);
        if rho.upper() <= Float::zero() {
            break;
        }
        k0 += 1;
    }
    let big_k = k0 + 2;
    let mut table = Vec::with_capacity(big_k as usize);
    let mut off = Vec::with_capacity(big_k as usize);
    for k in 1..=big_k {
        let f = log_f(k)?;
        if k != n {
            off.push(SignedLog::positive(f.add(&l2.mul_i64(2 * k as i64, wp), wp)));
        }
        table.push(SignedLog::positive(f.round(prec)));
    }
    let tail = SignedLog::positive(log_g(big_k + 1)?.add(&l2, wp));
    let off_lower = log_sum_exp(&off, wp)?;
    off.push(tail.clone());
    let off_sum = log_sum_exp(&off, wp)?;
    let hundred = Ball::from_i64(100).ln(wp)?;
    let threshold = SignedLog::positive(table[n as usize - 1].logmag().sub(&hundred, wp).round(prec));
    let verdict = log_le(&off_sum, &off_lower, &threshold);
    Ok(DominanceCheck { n, m, table, tail, off_sum, threshold, verdict })
}

/// Dominance of the `N`-th weight, escalating precision while undecided.
pub fn dominance_check(id: &SolutionId, x0: &Scalar, n: u32, prec: Precision) -> Result<DominanceCheck> {
    let m = choose_m(id, x0, n)?;
    let mut p = prec;
    loop {
        let d = dominance_at(id, x0, n, m, p)?;
        if d.verdict != Verdict::Inconclusive || p.bits() >= ESCALATION_CAP {
            return Ok(d);
        }
        match p.doubled() {
            Some(next) => p = next,
            None => return Ok(d),
        }
    }
}

/// Smallest `N0 <= nmax` such that dominance passes for every `N` in
/// `[N0, nmax]`. For `w_eps`, indices below its precondition never qualify.
pub fn find_n0(id: &SolutionId, x0: &Scalar, nmax: u32, prec: Precision, mode: ExecMode) -> Result<Option<u32>> {
    if nmax == 0 || nmax > MAX_REPLAY_N {
        return Err(DiagnosticsError::Precondition(format!("nmax = {nmax} outside [1, {MAX_REPLAY_N}]")));
    }
    weight_of(id)?;
    let ns: Vec<u32> = (1..=nmax).collect();
    let verdicts = parallel::map(mode, &ns, |&n| match dominance_check(id, x0, n, prec) {
        Ok(d) => Ok(d.verdict),
        Err(DiagnosticsError::Precondition(_)) => Ok(Verdict::Fail),
        Err(e) => Err(e),
    });
    let mut n0 = None;
    for (n, v) in ns.iter().zip(verdicts).rev() {
        if v? != Verdict::Pass {
            break;
        }
        n0 = Some(*n);
    }
    Ok(n0)
}

fn mag_log(m: Mag, prec: Precision) -> Result<SignedLog> {
    if m.is_zero() {
        return Ok(SignedLog::zero());
    }
    Ok(SignedLog::positive(Ball::exact(m.to_float()).ln(prec)?))
}

/// Certified decision of `|h^(2m_N)(t0)| + |h^(2m_N+1)(t0)| >= F_N(N) / 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundCheck {
    pub n: u32,
    pub m: u64,
    pub even: TimeDerivative,
    pub odd: TimeDerivative,
    /// Certified lower bound of the left side.
    pub left: SignedLog,
    /// `F_N(N) / 2`.
    pub right: SignedLog,
    pub verdict: Verdict,
}

pub fn lower_bound_check(id: &SolutionId, x0: &Scalar, t0: &Scalar, n: u32, prec: Precision) -> Result<LowerBoundCheck> {
    let m = choose_m(id, x0, n)?;
    let wp = prec.guarded(16);
    let even = time_derivative(id, 2 * m, x0, t0, prec)?;
    let odd = time_derivative(id, 2 * m + 1, x0, t0, prec)?;
    let left = mag_log(even.abs_lower().add_down(odd.abs_lower()), wp)?;
    let left_upper = mag_log(even.value.abs_upper().add(odd.value.abs_upper()), wp)?;
    let f = weight_f_n(id, x0, m, n, wp)?;
    let right = SignedLog::positive(f.logmag().sub(&ln2(wp), wp).round(prec));
    let verdict = if !left.is_zero() && right.logmag().upper() <= left.logmag().lower() {
        Verdict::Pass
    } else if left_upper.is_zero() || left_upper.logmag().upper() < right.logmag().lower() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(LowerBoundCheck { n, m, even, odd, left, right, verdict })
}

/// `c_N`: `1 + x0` or `2^(eps N) + x0`.
fn window_scale(id: &SolutionId, x0: &Scalar, n: u32, prec: Precision) -> Result<Ball> {
    let x = x0.to_ball(prec);
    match id {
        SolutionId::Weps { eps } => Ok(pow2_rational(&(eps * BigInt::from(n)), prec)?.add(&x, prec)),
        _ => Ok(x.add(&Ball::one(), prec)),
    }
}

/// `((|h^(2m)| + |h^(2m+1)|) / (2m+1)!)^(1/(2m))`.
fn pair_root(even: &TimeDerivative, odd: &TimeDerivative, m: u64, prec: Precision) -> Result<Option<SignedLog>> {
    let wp = prec.guarded(32 + (64 - m.leading_zeros()));
    let sum = even.value.abs().add(&odd.value.abs(), wp);
    if !sum.is_positive() {
        return Ok(None);
    }
    let l = sum.ln(wp)?.sub(&ln_factorial(2 * m + 1, wp)?, wp);
    let root = l.div(&Ball::from_i64(2 * m as i64), wp)?;
    Ok(Some(SignedLog::positive(root.round(prec))))
}

/// `(m - 1)^2 / (c_N^2 (2m + 1))` as a log-magnitude; zero for `m = 1`.
fn growth_floor(id: &SolutionId, x0: &Scalar, n: u32, m: u64, prec: Precision) -> Result<SignedLog> {
    if m <= 1 {
        return Ok(SignedLog::zero());
    }
    let wp = prec.guarded(16);
    let c = window_scale(id, x0, n, wp)?;
    let l = Ball::from_i64(m as i64 - 1)
        .ln(wp)?
        .sub(&c.ln(wp)?, wp)
        .mul_2exp(1)
        .sub(&Ball::from_i64(2 * m as i64 + 1).ln(wp)?, wp);
    Ok(SignedLog::positive(l.round(prec)))
}

/// Everything replayed at one `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofReplayRecord {
    pub solution: SolutionId,
    pub x0: Scalar,
    pub t0: Scalar,
    pub dominance: DominanceCheck,
    pub lower_bound: LowerBoundCheck,
    /// `((|h^(2m)| + |h^(2m+1)|) / (2m+1)!)^(1/(2m))`.
    pub coefficient_root: Option<SignedLog>,
    pub floor: SignedLog,
}

impl ProofReplayRecord {
    pub fn n(&self) -> u32 {
        self.dominance.n
    }

    pub fn m(&self) -> u64 {
        self.dominance.m
    }

    pub fn passes(&self) -> bool {
        self.dominance.verdict.is_pass() && self.lower_bound.verdict.is_pass()
    }
}

pub fn proof_replay(id: &SolutionId, x0: &Scalar, t0: &Scalar, n: u32, prec: Precision) -> Result<ProofReplayRecord> {
    let dominance = dominance_check(id, x0, n, prec)?;
    let lower_bound = lower_bound_check(id, x0, t0, n, prec)?;
    let m = dominance.m;
    let coefficient_root = pair_root(&lower_bound.even, &lower_bound.odd, m, prec)?;
    let floor = growth_floor(id, x0, n, m, prec)?;
    Ok(ProofReplayRecord { solution: id.clone(), x0: x0.clone(), t0: t0.clone(), dominance, lower_bound, coefficient_root, floor })
}

/// One row of the Taylor-coefficient growth scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub n: u32,
    pub m: u64,
    /// `(|h^(k)| / k!)^(1/k)` for `k = 2m` and `k = 2m + 1`; `None` when that
    /// derivative vanishes or its sign is undecided.
    pub roots: [Option<SignedLog>; 2],
    /// `floor^(2m/k)` for the same two orders.
    pub order_floors: [SignedLog; 2],
    /// Per-order comparison; only the pair comparison is implied by the
    /// lower bound, so these are informational.
    pub order_verdicts: [Option<Verdict>; 2],
    /// Root of the pair sum, compared against `floor`.
    pub pair_root: Option<SignedLog>,
    pub floor: SignedLog,
    /// `pair_root >= floor`.
    pub verdict: Verdict,
}

impl GrowthRow {
    /// Largest per-order root, for display.
    pub fn max_root_log(&self) -> Option<Ball> {
        self.roots.iter().flatten().map(|r| r.logmag().clone()).max_by(|a, b| a.mid().cmp(b.mid()))
    }
}

/// `root >= floor` on log-magnitudes; a zero floor always passes.
fn at_least(root: Option<&SignedLog>, floor: &SignedLog) -> Verdict {
    match root {
        _ if floor.is_zero() => Verdict::Pass,
        None => Verdict::Fail,
        Some(r) => {
            if floor.logmag().upper() <= r.logmag().lower() {
                Verdict::Pass
            } else if r.logmag().upper() < floor.logmag().lower() {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

fn growth_row(id: &SolutionId, x0: &Scalar, t0: &Scalar, n: u32, prec: Precision) -> Result<GrowthRow> {
    let m = choose_m(id, x0, n)?;
    let even = time_derivative(id, 2 * m, x0, t0, prec)?;
    let odd = time_derivative(id, 2 * m + 1, x0, t0, prec)?;
    let roots = [taylor_coefficient(&even, prec)?, taylor_coefficient(&odd, prec)?];
    let pair = pair_root(&even, &odd, m, prec)?;
    let floor = growth_floor(id, x0, n, m, prec)?;
    let wp = prec.guarded(16);
    let scaled = |k: u64| -> Result<SignedLog> {
        if floor.is_zero() {
            return Ok(SignedLog::zero());
        }
        let f = Ball::from_i64(2 * m as i64).div(&Ball::from_i64(k as i64), wp)?;
        Ok(SignedLog::positive(floor.logmag().mul(&f, wp).round(prec)))
    };
    let order_floors = [scaled(2 * m)?, scaled(2 * m + 1)?];
    let order_verdicts = [0, 1].map(|i| roots[i].as_ref().map(|r| at_least(Some(r), &order_floors[i])));
    let verdict = at_least(pair.as_ref(), &floor);
    Ok(GrowthRow { n, m, roots, order_floors, order_verdicts, pair_root: pair, floor, verdict })
}

/// Coefficient roots for `N` over `range`, alongside the analytic floor.
pub fn taylor_growth_scan(
    id: &SolutionId,
    x0: &Scalar,
    t0: &Scalar,
    range: RangeInclusive<u32>,
    prec: Precision,
    mode: ExecMode,
) -> Result<Vec<GrowthRow>> {
    if *range.end() > MAX_REPLAY_N {
        return Err(DiagnosticsError::Precondition(format!("N above {MAX_REPLAY_N}")));
    }
    let ns: Vec<u32> = range.collect();
    parallel::map(mode, &ns, |&n| growth_row(id, x0, t0, n, prec)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn m_n_examples() {
        assert_eq!(choose_m_n(&Scalar::zero(), 4).unwrap(), 4);
        assert_eq!(choose_m_n(&Scalar::zero(), 5).unwrap(), 8);
        assert_eq!(choose_m_n(&Scalar::from_i64(1), 3).unwrap(), 4);
        assert_eq!(choose_m_n_weps(&half(), &Scalar::zero(), 4).unwrap(), 16);
        assert_eq!(choose_m_n_weps(&half(), &Scalar::zero(), 2).unwrap(), 2);
        assert!(matches!(
            choose_m_n_weps(&half(), &Scalar::from_i64(3), 2),
            Err(DiagnosticsError::Precondition(_))
        ));
        // Irrational window: (2^(5/2) + 0) 2^5 / 4 = 45.25...
        assert_eq!(choose_m_n_weps(&half(), &Scalar::zero(), 5).unwrap(), 46);
        let r2: Scalar = "sqrt(2)".parse().unwrap();
        // 2^6 (1 + sqrt 2) / 4 = 38.62...
        assert_eq!(choose_m_n(&r2, 6).unwrap(), 39);
    }

    #[test]
    fn weight_example() {
        let f = weight_f_n(&SolutionId::U1, &Scalar::zero(), 4, 4, p()).unwrap();
        let expect = 72.0 * std::f64::consts::LN_2 - 16.0;
        assert!((f.logmag().to_f64() - expect).abs() < 1e-12);
    }

    #[test]
    fn dominance_small_and_large_n() {
        let d1 = dominance_check(&SolutionId::U1, &Scalar::zero(), 1, p()).unwrap();
        assert_eq!(d1.verdict, Verdict::Fail);
        let d = dominance_check(&SolutionId::U1, &Scalar::zero(), 12, p()).unwrap();
        assert_eq!(d.verdict, Verdict::Pass);
        let top = d.table[11].logmag().clone();
        for (k, f) in d.table.iter().enumerate() {
            if k != 11 {
                assert_eq!(f.logmag().certified_lt(&top), Some(true));
            }
        }
    }

    #[test]
    fn n0_values() {
        let mode = ExecMode::Sequential;
        let z = Scalar::zero();
        assert_eq!(find_n0(&SolutionId::U1, &z, 20, p(), mode).unwrap(), Some(6));
        assert_eq!(find_n0(&SolutionId::U1, &Scalar::from_i64(1), 20, p(), mode).unwrap(), Some(5));
        assert_eq!(find_n0(&SolutionId::U1, &Scalar::ratio(5, 2), 20, p(), mode).unwrap(), Some(4));
        let weps = SolutionId::weps(half()).unwrap();
        assert_eq!(find_n0(&weps, &z, 20, p(), mode).unwrap(), Some(5));
        assert_eq!(find_n0(&weps, &Scalar::from_i64(-1), 20, p(), mode).unwrap(), Some(6));
        assert_eq!(find_n0(&weps, &Scalar::from_i64(3), 20, p(), mode).unwrap(), Some(5));
    }

    #[test]
    fn lower_bound_at_origin() {
        let r = proof_replay(&SolutionId::U1, &Scalar::zero(), &Scalar::zero(), 7, p()).unwrap();
        assert!(r.passes());
        assert!(r.lower_bound.even.is_exact_zero());
        let root = r.coefficient_root.unwrap();
        assert!(r.floor.logmag().upper() <= root.logmag().lower());
    }
}
