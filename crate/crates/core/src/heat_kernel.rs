//! The Gaussian heat kernel `Phi(x, t) = (4 pi t)^(-1/2) exp(-x^2 / 4t)`,
//! extended by zero for `t <= 0`, and its derivatives of every order.
//!
//! Space derivatives use the closed form
//! `d_x^m Phi = (-1)^m (2 sqrt t)^(-m) H_m(x / 2 sqrt t) Phi` with physicists'
//! Hermite polynomials; time derivatives go through `d_t^n = d_x^(2n)`.
//!
//! Uniform bounds: with `z = y / (2 sqrt s)`,
//! `|d_x^m Phi(y, s)| = z^(m+1) |H_m(z)| e^(-z^2) / (sqrt(pi) y^(m+1))`, so
//! `sup_s |d_x^m Phi(y, s)| = G_m / y^(m+1)` with a constant `G_m` depending on
//! `m` alone. [`spatial_sup_constant`] encloses `G_m` by branch and bound over
//! `z`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::numerics::{pi, Ball, Float, Mag, NumericsError, Precision, Result};

/// Enclosure of `sup_{s>0} |d_t^n Phi(y, s)|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelDerivativeBound {
    pub order: u32,
    pub y: Ball,
    /// Lower end is an attained value, upper end a certified bound.
    pub bound: Ball,
}

/// `Phi(x, t)`. Exact zero for `t <= 0`.
pub fn phi(x: &Ball, t: &Ball, prec: Precision) -> Result<Ball> {
    phi_dx(0, x, t, prec)
}

/// Physicists' Hermite polynomial `H_n(z)` by the three-term recurrence.
pub fn hermite(n: u32, z: &Ball, prec: Precision) -> Ball {
    hermite_table(n, z, prec).pop().expect("table holds H_0..H_n")
}

/// `[H_0(z), ..., H_n(z)]`.
fn hermite_table(n: u32, z: &Ball, prec: Precision) -> Vec<Ball> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Ball::one());
    if n == 0 {
        return out;
    }
    let two_z = z.mul_2exp(1);
    out.push(two_z.clone());
    for k in 1..n as i64 {
        let next = two_z
            .mul(&out[k as usize], prec)
            .sub(&out[k as usize - 1].mul_i64(2 * k, prec), prec);
        out.push(next);
    }
    out
}

/// Integer coefficients of `H_m`, lowest degree first.
fn hermite_coefficients(m: u32) -> Vec<BigInt> {
    let mut prev: Vec<BigInt> = vec![BigInt::from(1)];
    if m == 0 {
        return prev;
    }
    let mut cur: Vec<BigInt> = vec![BigInt::from(0), BigInt::from(2)];
    for k in 1..m {
        let mut next = vec![BigInt::from(0); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c * 2;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c * (2 * k);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Where a time argument sits relative to zero.
enum TimeSign {
    NonPositive,
    Positive,
    Straddles,
}

fn classify(t: &Ball) -> TimeSign {
    if t.upper() <= Float::zero() {
        TimeSign::NonPositive
    } else if t.is_positive() {
        TimeSign::Positive
    } else {
        TimeSign::Straddles
    }
}

/// `d_x^m Phi(x, t)`. Exact zero for `t <= 0`. When `t` straddles zero the
/// result covers `[-sup, sup]` from the uniform bound.
pub fn phi_dx(m: u32, x: &Ball, t: &Ball, prec: Precision) -> Result<Ball> {
    match classify(t) {
        TimeSign::NonPositive => Ok(Ball::zero()),
        TimeSign::Straddles => {
            let y = x.abs();
            if !y.is_positive() {
                return Err(NumericsError::Domain("kernel at x = 0 with t straddling 0".into()));
            }
            let bound = spatial_sup_upper(m, &y, prec)?;
            Ok(Ball::new(Float::zero(), bound))
        }
        TimeSign::Positive => {
            let wp = prec.guarded(32 + m);
            let s2 = t.sqrt(wp)?.mul_2exp(1);
            let z = x.div(&s2, wp)?;
            let gauss = z.sqr(wp).neg().exp(wp)?;
            let norm = pi(wp).sqrt(wp)?.mul(&s2, wp);
            let base = gauss.div(&norm, wp)?;
            if m == 0 {
                return Ok(base.round(prec));
            }
            let h = hermite(m, &z, wp);
            let scale = s2.pow_int(m as i64, wp)?;
            let v = h.mul(&base, wp).div(&scale, wp)?;
            Ok(if m % 2 == 1 { v.neg() } else { v }.round(prec))
        }
    }
}

/// `d_t^n Phi(x, t)`, computed as `d_x^(2n) Phi(x, t)`.
pub fn phi_dt(n: u32, x: &Ball, t: &Ball, prec: Precision) -> Result<Ball> {
    phi_dx(2 * n, x, t, prec)
}

/// Certified enclosure of `sup_{s>0} |d_t^n Phi(y, s)|` for `y > 0`.
pub fn kernel_derivative_sup(n: u32, y: &Ball, prec: Precision) -> Result<KernelDerivativeBound> {
    if !y.is_positive() {
        return Err(NumericsError::Domain("kernel_derivative_sup needs y > 0".into()));
    }
    let m = 2 * n;
    let g = spatial_sup_constant(m);
    let wp = prec.guarded(16);
    let ypow = y.pow_int(m as i64 + 1, wp)?;
    let lo = Ball::exact(g.lower()).div(&ypow, wp)?.lower();
    let hi = Ball::exact(g.upper()).div(&ypow, wp)?.upper();
    Ok(KernelDerivativeBound { order: n, y: y.clone(), bound: Ball::from_endpoints(&lo, &hi, prec) })
}

/// Upper bound of `sup_s |d_x^m Phi(y, s)|`.
pub(crate) fn spatial_sup_upper(m: u32, y: &Ball, prec: Precision) -> Result<Mag> {
    let g = spatial_sup_constant(m);
    let ypow_lo = y.pow_int(m as i64 + 1, prec.guarded(16))?.abs_lower();
    if ypow_lo.is_zero() {
        return Err(NumericsError::Domain("sup bound at y = 0".into()));
    }
    Ok(g.abs_upper().div(ypow_lo))
}

/// Relative gap between the attained value and the certified bound.
const SUP_REL_TOL: i64 = 20;
const SUP_MAX_CELLS: usize = 200_000;

/// Enclosure of `G_m = sup_{z>0} z^(m+1) |H_m(z)| e^(-z^2) / sqrt(pi)`, cached per `m`.
pub fn spatial_sup_constant(m: u32) -> Ball {
    static CACHE: OnceLock<Mutex<HashMap<u32, Ball>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("sup cache poisoned").get(&m) {
        return b.clone();
    }
    let b = SupSearch::new(m).run();
    cache.lock().expect("sup cache poisoned").entry(m).or_insert(b).clone()
}

struct Cell {
    a: Float,
    b: Float,
    upper: Mag,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.cmp(&other.upper)
    }
}

struct SupSearch {
    m: u32,
    /// `C(j, i) 2^i` as upper magnitudes, for `j = m, m-1, m-2`.
    taylor_weights: [Vec<Mag>; 3],
    /// Sum of absolute Hermite coefficients, `|H_m(z)| <= abs_coeff * max(1, z^m)`.
    abs_coeff: Mag,
    inv_sqrt_pi: Mag,
    prec: Precision,
}

fn binomial_weights(j: u32) -> Vec<Mag> {
    let mut out = Vec::with_capacity(j as usize + 1);
    let mut binom = BigInt::from(1);
    for i in 0..=j {
        out.push(Mag::from_float_up(&Float::from_bigint(&binom << i as usize)));
        binom = binom * (j - i) / (i + 1);
    }
    out
}

fn mag_pow(x: Mag, k: u32) -> Mag {
    (0..k).fold(Mag::one(), |acc, _| acc.mul(x))
}

impl SupSearch {
    fn new(m: u32) -> SupSearch {
        let weights = |d: u32| if m >= d { binomial_weights(m - d) } else { Vec::new() };
        let taylor_weights = [weights(0), weights(1), weights(2)];
        let abs_sum: BigInt = hermite_coefficients(m).iter().map(|c| c.abs()).sum();
        let abs_coeff = Mag::from_float_up(&Float::from_bigint(abs_sum));
        // The recurrence cancels roughly one bit per step near the oscillatory region.
        let prec = Precision::fixed(96 + m);
        let inv_sqrt_pi = pi(prec).sqrt(prec).and_then(|s| s.recip(prec)).expect("pi > 0").abs_upper();
        SupSearch { m, taylor_weights, abs_coeff, inv_sqrt_pi, prec }
    }

    /// `g(z) = z^(m+1) H_m(z) e^(-z^2) / sqrt(pi)` and `g'(z)` at an exact point.
    fn value_and_slope(&self, z: &Float) -> (Ball, Ball, Vec<Ball>) {
        let p = self.prec;
        let m = self.m as i64;
        let zb = Ball::exact(z.clone());
        let table = hermite_table(self.m, &zb, p);
        let g = zb.sqr(p).neg().exp(p).expect("bounded argument");
        let root_pi = pi(p).sqrt(p).expect("pi > 0");
        let zm = zb.pow_int(m, p).expect("integer power");
        let common = zm.mul(&g, p).div(&root_pi, p).expect("pi > 0");
        let value = common.mul(&zb, p).mul(&table[m as usize], p);
        // g' = z^m e^(-z^2) [(m + 1 - 2 z^2) H_m + 2 m z H_(m-1)] / sqrt(pi)
        let mut q = Ball::from_i64(m + 1).sub(&zb.sqr(p).mul_2exp(1), p).mul(&table[m as usize], p);
        if m > 0 {
            q = q.add(&zb.mul(&table[m as usize - 1], p).mul_i64(2 * m, p), p);
        }
        let slope = common.mul(&q, p);
        (value, slope, table)
    }

    /// Certified lower bound of `f = |g|` at an exact point.
    fn value_lower(&self, z: &Float) -> Mag {
        self.value_and_slope(z).0.abs_lower()
    }

    /// Bound of `|H_(m-d)|` on `[c - r, c + r]` from the centered expansion
    /// `H_j(c + e) = sum_i C(j,i) 2^i H_(j-i)(c) e^i`.
    fn hermite_on_cell(&self, d: usize, table: &[Ball], r: Mag) -> Mag {
        if self.m < d as u32 {
            return Mag::ZERO;
        }
        let j = self.m as usize - d;
        let mut bound = Mag::ZERO;
        let mut rpow = Mag::one();
        for (i, w) in self.taylor_weights[d].iter().enumerate() {
            bound = bound.add(w.mul(table[j - i].abs_upper()).mul(rpow));
            rpow = rpow.mul(r);
        }
        bound
    }

    /// Upper bound of `f` on `[a, b]`, `0 < a < b`: the smaller of a
    /// first-order bound and `|g(c)| + |g'(c)| r + sup|g''| r^2 / 2`.
    fn cell_upper(&self, a: &Float, b: &Float) -> Mag {
        let m = self.m;
        let c = a.add_exact(b).mul_2exp(-1);
        let r = Mag::from_float_up(&b.sub_exact(a).mul_2exp(-1));
        let (value, slope, table) = self.value_and_slope(&c);
        let h0 = self.hermite_on_cell(0, &table, r);
        let h1 = self.hermite_on_cell(1, &table, r);
        let h2 = self.hermite_on_cell(2, &table, r);
        let bm = Mag::from_float_up(b);
        let ea = Ball::exact(a.mul_exact(a)).neg().exp(self.prec).expect("bounded argument").abs_upper();
        let decay = ea.mul(self.inv_sqrt_pi);
        let zk = |k: u32| mag_pow(bm, k);
        let first = zk(m + 1).mul(h0).mul(decay);

        // P = z^(m+1) H_m, g = P e^(-z^2) / sqrt(pi).
        let mm = Mag::from_u64(m as u64);
        let m1 = Mag::from_u64(m as u64 + 1);
        let p0 = zk(m + 1).mul(h0);
        let p1 = m1.mul(zk(m)).mul(h0).add(mm.mul_2exp(1).mul(zk(m + 1)).mul(h1));
        let mut p2 = mm.mul(m1).mul_2exp(2).mul(zk(m)).mul(h1);
        if m >= 1 {
            p2 = p2.add(mm.mul(m1).mul(zk(m - 1)).mul(h0));
        }
        if m >= 2 {
            p2 = p2.add(mm.mul(Mag::from_u64(m as u64 - 1)).mul_2exp(2).mul(zk(m + 1)).mul(h2));
        }
        let quad = bm.mul(bm).mul_2exp(2).add(Mag::from_u64(2));
        let g2 = p2.add(bm.mul_2exp(2).mul(p1)).add(quad.mul(p0)).mul(decay);
        let second = value
            .abs_upper()
            .add(slope.abs_upper().mul(r))
            .add(g2.mul(r).mul(r).mul_2exp(-1));
        first.min(second)
    }

    /// Bound of `f` on `(0, z]` for `z <= 1`.
    fn near_zero_upper(&self, z: &Float) -> Mag {
        let zm = Mag::from_float_up(z);
        let mut zpow = Mag::one();
        for _ in 0..=self.m {
            zpow = zpow.mul(zm);
        }
        zpow.mul(self.abs_coeff).mul(self.inv_sqrt_pi)
    }

    /// Bound of `f` on `[z, inf)`, valid when `z >= 1` and `z^2 >= m + 1/2`,
    /// where `z^(2m+1) e^(-z^2)` is decreasing.
    fn far_upper(&self, z: &Float) -> Mag {
        let zm = Mag::from_float_up(z);
        let mut zpow = Mag::one();
        for _ in 0..(2 * self.m + 1) {
            zpow = zpow.mul(zm);
        }
        let g = Ball::exact(z.mul_exact(z)).neg().exp(self.prec).expect("bounded argument").abs_upper();
        zpow.mul(g).mul(self.abs_coeff).mul(self.inv_sqrt_pi)
    }

    fn run(&self) -> Ball {
        // Coarse scan for a first attained value.
        let z_top = ((2 * self.m + 1) as f64).sqrt() + 4.0;
        let mut best = Mag::ZERO;
        let samples = 64 + 4 * self.m;
        for i in 1..=samples {
            let z = Float::from_f64(z_top * i as f64 / samples as f64).expect("finite");
            best = best.max(self.value_lower(&z));
        }
        let small = best.mul_2exp(-(SUP_REL_TOL + 8));

        let mut z_lo = Float::one();
        while self.near_zero_upper(&z_lo) > small {
            z_lo = z_lo.mul_2exp(-1);
        }
        // Any integer z with z^2 >= m + 1 is past the envelope maximum.
        let mut z_hi = Float::from_i64(2.max(((self.m + 1) as f64).sqrt().ceil() as i64 + 1));
        while self.far_upper(&z_hi) > small {
            z_hi = z_hi.mul_2exp(1);
        }
        let outer = self.near_zero_upper(&z_lo).max(self.far_upper(&z_hi));

        let mut heap = BinaryHeap::new();
        let pieces = 16 + 2 * self.m as i64;
        let width = z_hi.sub_exact(&z_lo);
        let mut a = z_lo.clone();
        for i in 1..=pieces {
            let b = if i == pieces {
                z_hi.clone()
            } else {
                let frac = Ball::exact(width.clone()).mul(&Ball::from_ratio(i, pieces, self.prec), self.prec);
                z_lo.add_exact(frac.mid())
            };
            let upper = self.cell_upper(&a, &b);
            heap.push(Cell { a: a.clone(), b: b.clone(), upper });
            a = b;
        }

        let mut cells = 0usize;
        while let Some(cell) = heap.pop() {
            let target = best.add(best.mul_2exp(-SUP_REL_TOL));
            if cell.upper <= target || cells >= SUP_MAX_CELLS {
                let upper = cell.upper.max(outer).max(best);
                return Ball::from_endpoints(&best.to_float(), &upper.to_float(), self.prec);
            }
            cells += 1;
            let c = cell.a.add_exact(&cell.b).mul_2exp(-1);
            best = best.max(self.value_lower(&c));
            let left = self.cell_upper(&cell.a, &c);
            let right = self.cell_upper(&c, &cell.b);
            heap.push(Cell { a: cell.a, b: c.clone(), upper: left });
            heap.push(Cell { a: c, b: cell.b, upper: right });
        }
        let upper = outer.max(best);
        Ball::from_endpoints(&best.to_float(), &upper.to_float(), self.prec)
    }
}

/// Empirical calibration of `|d_x^n Phi| <= C^n n^(n/2) t^(-(n+1)/2) e^(-x^2/8t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahaneCalibration {
    /// Smallest `C` satisfying the inequality on the grid (rounded up).
    pub constant: f64,
    /// Grid point and order attaining it.
    pub order: u32,
    pub x: f64,
    pub t: f64,
}

/// Smallest constant `C` for which the classical kernel estimate holds at
/// every grid point for `1 <= n <= nmax`. A diagnostic, not a proof.
pub fn verify_kahane_bound(nmax: u32, grid: &[(f64, f64)], prec: Precision) -> Result<KahaneCalibration> {
    let mut out = KahaneCalibration { constant: 0.0, order: 0, x: f64::NAN, t: f64::NAN };
    let wp = prec.guarded(16);
    for &(x, t) in grid {
        if !(t > 0.0) {
            return Err(NumericsError::Domain("Kahane calibration needs t > 0".into()));
        }
        let xb = Ball::from_f64(x)?;
        let tb = Ball::from_f64(t)?;
        let ln_t = tb.ln(wp)?;
        let decay = xb.sqr(wp).div(&tb.mul_2exp(3), wp)?;
        for n in 1..=nmax {
            let d = phi_dx(n, &xb, &tb, wp)?;
            if d.contains_zero() {
                continue;
            }
            // ln ratio = ln|d| + (n+1)/2 ln t + x^2/8t - (n/2) ln n
            let ln_n = Ball::from_i64(n as i64).ln(wp)?;
            let l = d
                .abs()
                .ln(wp)?
                .add(&ln_t.mul_i64(n as i64 + 1, wp).mul_2exp(-1), wp)
                .add(&decay, wp)
                .sub(&ln_n.mul_i64(n as i64, wp).mul_2exp(-1), wp);
            let c = (l.upper().to_f64() / n as f64).exp() * (1.0 + 4.0 * f64::EPSILON);
            if c > out.constant {
                out = KahaneCalibration { constant: c, order: n, x, t };
            }
        }
    }
    Ok(out)
}
