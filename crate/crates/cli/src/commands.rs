use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use nwheat::derivatives::{derivative_sweep, TimeDerivative};
use nwheat::diagnostics::{
    choose_k, choose_m, default_t_grid, dominance_check, envelope_check, envelope_constants, find_n0, lower_bound_check, residual_check,
    taylor_growth_scan, walczak_hypothesis_check, DiagnosticsError, Verdict,
};
use nwheat::numerics::{Mag, Precision, Scalar};
use nwheat::parallel::ExecMode;
use nwheat::solutions::{evaluate, SolutionId};

use crate::args::*;
use crate::error::CliError;
use crate::report::{ball, ball_fields, log10_str, mag, slog, Report};

pub struct Ctx {
    pub prec: Precision,
    pub mode: ExecMode,
    pub seed: u64,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn scalar(name: &str, s: &str) -> Result<Scalar, CliError> {
    s.parse().map_err(|e| usage(format!("--{name}: {e}")))
}

fn rational(name: &str, s: &str) -> Result<BigRational, CliError> {
    scalar(name, s)?.as_rational().cloned().ok_or_else(|| usage(format!("--{name} must be rational")))
}

fn scalars(name: &str, s: &str) -> Result<Vec<Scalar>, CliError> {
    s.split(',').map(|p| scalar(name, p.trim())).collect()
}

fn range(name: &str, s: &str) -> Result<(BigRational, BigRational), CliError> {
    let (a, b) = s.split_once(',').ok_or_else(|| usage(format!("--{name} expects `lo,hi`")))?;
    let (a, b) = (rational(name, a.trim())?, rational(name, b.trim())?);
    if a >= b {
        return Err(usage(format!("--{name}: empty range")));
    }
    Ok((a, b))
}

/// `n` points of `[a, b]`: cell centres, or both end points included.
fn grid(a: &BigRational, b: &BigRational, n: usize, vertices: bool) -> Result<Vec<Scalar>, CliError> {
    if n == 0 || (vertices && n < 2) {
        return Err(usage("grid needs more points"));
    }
    let w = b - a;
    Ok((0..n)
        .map(|i| {
            let f = if vertices {
                BigRational::new(i.into(), (n - 1).into())
            } else {
                BigRational::new((2 * i + 1).into(), (2 * n).into())
            };
            Scalar::Rational(a + &w * f)
        })
        .collect())
}

fn solution(sel: &SolutionSel) -> Result<SolutionId, CliError> {
    match (sel.solution, &sel.eps) {
        (SolutionArg::Weps, Some(e)) => Ok(SolutionId::weps(rational("eps", e)?)?),
        (SolutionArg::Weps, None) => Err(usage("--eps is required for weps")),
        (_, Some(_)) => Err(usage("--eps applies to weps only")),
        (SolutionArg::U1, None) => Ok(SolutionId::U1),
        (SolutionArg::U2, None) => Ok(SolutionId::U2),
    }
}

fn base_params(ctx: &Ctx) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("prec".into(), json!(ctx.prec.bits()));
    m
}

fn with_solution(ctx: &Ctx, id: &SolutionId) -> Map<String, Value> {
    let mut m = base_params(ctx);
    m.insert("solution".into(), json!(id.name()));
    if let Some(e) = id.eps() {
        m.insert("eps".into(), json!(e.to_string()));
    }
    m
}

fn parse_orders(s: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let num = |v: &str| v.trim().parse::<u64>().map_err(|_| usage(format!("--n: bad order `{v}`")));
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b || b - a > 100_000 {
                    return Err(usage(format!("--n: bad range `{part}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

pub fn eval(a: &EvalArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let id = solution(&a.sel)?;
    if !(a.target > 0.0 && a.target.is_finite()) {
        return Err(usage("--target must be positive"));
    }
    let target = Mag::from_f64_up(a.target);
    let points: Vec<(Scalar, Scalar)> = match (a.random, &a.x, &a.t) {
        (Some(count), _, _) => {
            let (xa, xb) = range("x-range", &a.x_range)?;
            let (ta, tb) = range("t-range", &a.t_range)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let den = 1u64 << 20;
            let mut pick = |lo: &BigRational, hi: &BigRational| {
                let u = BigRational::new(rng.gen_range(0..=den).into(), den.into());
                Scalar::Rational(lo + (hi - lo) * u)
            };
            (0..count).map(|_| (pick(&xa, &xb), pick(&ta, &tb))).collect()
        }
        (None, Some(x), Some(t)) => vec![(scalar("x", x)?, scalar("t", t)?)],
        _ => return Err(usage("give --x and --t, or --random")),
    };
    let mut params = with_solution(ctx, &id);
    params.insert("target".into(), mag(target));
    if let Some(c) = a.random {
        params.insert("random".into(), json!(c));
        params.insert("seed".into(), json!(ctx.seed));
        params.insert("x_range".into(), json!(a.x_range));
        params.insert("t_range".into(), json!(a.t_range));
    }
    let mut rep = Report::new("eval", params);
    rep.csv_header = vec!["x", "t", "mid", "rad", "terms", "tail", "target_met"];
    let results = nwheat::parallel::map(ctx.mode, &points, |(x, t)| evaluate(&id, x, t, target, ctx.prec));
    for ((x, t), r) in points.iter().zip(results) {
        let r = r?;
        rep.certified &= r.target_met;
        let [m, rd] = ball_fields(&r.value);
        rep.results.push(json!({
            "x": x.to_string(),
            "t": t.to_string(),
            "value": ball(&r.value),
            "terms": r.terms_used,
            "tail": mag(r.tail_bound),
            "precision": r.precision.bits(),
            "target_met": r.target_met,
        }));
        rep.csv_rows.push(vec![
            x.to_string(),
            t.to_string(),
            m,
            rd,
            r.terms_used.to_string(),
            nwheat::numerics::format_mag_up(r.tail_bound),
            r.target_met.to_string(),
        ]);
    }
    Ok(rep)
}

fn derivative_json(d: &TimeDerivative) -> Value {
    json!({
        "order": d.order,
        "value": ball(&d.value),
        "signed": d.signed.as_ref().map(slog),
        "exact_zero": d.is_exact_zero(),
        "terms": d.terms_used,
        "tail": mag(d.tail_bound),
        "precision": d.precision.bits(),
    })
}

pub fn derivative(a: &DerivativeArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let id = solution(&a.sel)?;
    let (x0, t0) = (scalar("x0", &a.x0)?, scalar("t0", &a.t0)?);
    let orders = parse_orders(&a.n)?;
    let mut params = with_solution(ctx, &id);
    params.insert("x0".into(), json!(x0.to_string()));
    params.insert("t0".into(), json!(t0.to_string()));
    params.insert("n".into(), json!(a.n));
    let mut rep = Report::new("derivative", params);
    rep.csv_header = vec!["order", "sign", "mid", "rad", "log10_abs", "terms", "tail"];
    for r in derivative_sweep(&id, &orders, &x0, &t0, ctx.prec, ctx.mode) {
        let d = r?;
        rep.certified &= d.signed.is_some();
        let [m, rd] = ball_fields(&d.value);
        let (sign, l10) = match &d.signed {
            Some(s) => (s.sign().as_i8().to_string(), log10_str(s)),
            None => ("?".into(), String::new()),
        };
        rep.csv_rows.push(vec![d.order.to_string(), sign, m, rd, l10, d.terms_used.to_string(), nwheat::numerics::format_mag_up(d.tail_bound)]);
        rep.results.push(derivative_json(&d));
    }
    Ok(rep)
}

pub fn taylor(a: &TaylorArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let id = solution(&a.sel)?;
    let (x0, t0) = (scalar("x0", &a.x0)?, scalar("t0", &a.t0)?);
    if a.nmin == 0 || a.nmin > a.nmax {
        return Err(usage("need 1 <= nmin <= nmax"));
    }
    let mut params = with_solution(ctx, &id);
    params.insert("x0".into(), json!(x0.to_string()));
    params.insert("t0".into(), json!(t0.to_string()));
    params.insert("nmin".into(), json!(a.nmin));
    params.insert("nmax".into(), json!(a.nmax));
    // weps needs 2^(eps N) >= 2 + |x0|; start from the first N where it holds.
    let mut nmin = a.nmin;
    while nmin <= a.nmax && matches!(choose_m(&id, &x0, nmin), Err(DiagnosticsError::Precondition(_))) {
        nmin += 1;
    }
    if nmin > a.nmax {
        return Err(CliError::Domain(format!("no N in {}..={} meets the precondition", a.nmin, a.nmax)));
    }
    params.insert("nmin_effective".into(), json!(nmin));
    let rows = taylor_growth_scan(&id, &x0, &t0, nmin..=a.nmax, ctx.prec, ctx.mode)?;
    let mut rep = Report::new("taylor", params);
    rep.csv_header = vec!["N", "m", "n", "log10_root", "log10_floor", "order_verdict", "pair_verdict"];
    for r in &rows {
        rep.certified &= r.verdict.is_pass();
        let orders: Vec<Value> = (0..2)
            .map(|i| {
                json!({
                    "n": 2 * r.m + i as u64,
                    "root": r.roots[i].as_ref().map(slog),
                    "floor": slog(&r.order_floors[i]),
                    "verdict": r.order_verdicts[i].map(Verdict::as_str),
                })
            })
            .collect();
        for i in 0..2 {
            rep.csv_rows.push(vec![
                r.n.to_string(),
                r.m.to_string(),
                (2 * r.m + i as u64).to_string(),
                r.roots[i].as_ref().map(log10_str).unwrap_or_default(),
                log10_str(&r.order_floors[i]),
                r.order_verdicts[i].map(Verdict::as_str).unwrap_or("none").to_string(),
                r.verdict.as_str().to_string(),
            ]);
        }
        rep.results.push(json!({
            "N": r.n,
            "m": r.m,
            "orders": orders,
            "pair_root": r.pair_root.as_ref().map(slog),
            "floor": slog(&r.floor),
            "verdict": r.verdict.as_str(),
        }));
    }
    Ok(rep)
}

pub fn proof_replay(a: &ReplayArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let id = solution(&a.sel)?;
    let x0 = scalar("x0", &a.x0)?;
    let t0s = scalars("t0", &a.t0)?;
    let mut params = with_solution(ctx, &id);
    params.insert("x0".into(), json!(x0.to_string()));
    params.insert("t0".into(), json!(t0s.iter().map(|t| t.to_string()).collect::<Vec<_>>()));
    params.insert("nmax".into(), json!(a.nmax));
    let mut rep = Report::new("proof-replay", params);
    rep.csv_header = vec!["N", "m", "t0", "dominance", "off_over_peak", "lower_bound", "log10_left", "log10_right"];
    let Some(n0) = find_n0(&id, &x0, a.nmax, ctx.prec, ctx.mode)? else {
        rep.certified = false;
        rep.results.push(json!({ "N0": null }));
        return Ok(rep);
    };
    let last = match a.rows {
        Some(r) => (n0 + r.max(1) - 1).min(a.nmax),
        None => a.nmax,
    };
    let ns: Vec<u32> = (n0..=last).collect();
    let rows = nwheat::parallel::map(ctx.mode, &ns, |&n| -> Result<_, CliError> {
        let d = dominance_check(&id, &x0, n, ctx.prec)?;
        let lbs = t0s.iter().map(|t0| lower_bound_check(&id, &x0, t0, n, ctx.prec)).collect::<Result<Vec<_>, _>>()?;
        Ok((d, lbs))
    });
    let mut table = Vec::new();
    for row in rows {
        let (d, lbs) = row?;
        rep.certified &= d.verdict.is_pass();
        let mut per_t = Vec::new();
        for (t0, lb) in t0s.iter().zip(&lbs) {
            rep.certified &= lb.verdict.is_pass();
            rep.csv_rows.push(vec![
                d.n.to_string(),
                d.m.to_string(),
                t0.to_string(),
                d.verdict.as_str().into(),
                format!("{:.6e}", d.ratio_f64()),
                lb.verdict.as_str().into(),
                log10_str(&lb.left),
                log10_str(&lb.right),
            ]);
            per_t.push(json!({
                "t0": t0.to_string(),
                "left": slog(&lb.left),
                "right": slog(&lb.right),
                "verdict": lb.verdict.as_str(),
            }));
        }
        table.push(json!({
            "N": d.n,
            "m": d.m,
            "dominance": {
                "verdict": d.verdict.as_str(),
                "off_sum": slog(&d.off_sum),
                "threshold": slog(&d.threshold),
                "tail": slog(&d.tail),
                "table_len": d.table.len(),
            },
            "lower_bound": per_t,
        }));
    }
    rep.results.push(json!({ "N0": n0, "rows": table }));
    Ok(rep)
}

pub fn envelope(a: &EnvelopeArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let eps = rational("eps", &a.eps)?;
    let cert = envelope_constants(&eps, ctx.prec)?;
    let mut params = base_params(ctx);
    params.insert("eps".into(), json!(eps.to_string()));
    params.insert("check".into(), json!(a.check));
    let mut rep = Report::new("envelope", params);
    rep.results.push(json!({
        "certificate": {
            "B1": ball(&cert.b1),
            "B2": ball(&cert.b2),
            "B3": ball(&cert.b3),
            "A1": ball(&cert.a1),
            "A2": ball(&cert.a2),
            "delta": cert.delta.to_string(),
        }
    }));
    if let Some(list) = &a.k_at {
        let mut ks = Vec::new();
        for x in scalars("k-at", list)? {
            ks.push(json!({ "x": x.to_string(), "K": choose_k(&eps, &x)? }));
        }
        rep.results.push(json!({ "K": ks }));
    }
    rep.csv_header = vec!["x", "t", "ln_ratio_upper", "verdict"];
    if a.check {
        let (xa, xb) = range("x-range", &a.x_range)?;
        let (ta, tb) = range("t-range", &a.t_range)?;
        let xs = grid(&xa, &xb, a.nx, true)?;
        let ts = grid(&ta, &tb, a.nt, true)?;
        rep.params.insert("x_range".into(), json!(a.x_range));
        rep.params.insert("t_range".into(), json!(a.t_range));
        rep.params.insert("nx".into(), json!(a.nx));
        rep.params.insert("nt".into(), json!(a.nt));
        let chk = envelope_check(&cert, &xs, &ts, ctx.prec, ctx.mode)?;
        rep.certified = chk.verdict.is_pass();
        for p in &chk.points {
            let up = p.log_ratio.as_ref().map(|b| format!("{:.6}", b.upper().to_f64())).unwrap_or_else(|| "-inf".into());
            rep.csv_rows.push(vec![p.x.to_string(), p.t.to_string(), up, p.verdict.as_str().into()]);
        }
        rep.results.push(json!({
            "check": {
                "points": chk.points.len(),
                "max_ln_ratio": chk.max_log_ratio.as_ref().map(ball),
                "ln_A1": ball(&chk.log_a1),
                "verdict": chk.verdict.as_str(),
            }
        }));
    }
    Ok(rep)
}

pub fn residual(a: &ResidualArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let id = solution(&a.sel)?;
    let h = rational("h", &a.h)?;
    let (xa, xb) = range("x-range", &a.x_range)?;
    let (ta, tb) = range("t-range", &a.t_range)?;
    let xs = grid(&xa, &xb, a.nx, a.vertices)?;
    let ts = grid(&ta, &tb, a.nt, a.vertices)?;
    let mut params = with_solution(ctx, &id);
    params.insert("h".into(), json!(h.to_string()));
    params.insert("x_range".into(), json!(a.x_range));
    params.insert("t_range".into(), json!(a.t_range));
    params.insert("nx".into(), json!(a.nx));
    params.insert("nt".into(), json!(a.nt));
    params.insert("grid".into(), json!(if a.vertices { "vertices" } else { "cell-centres" }));
    let r = residual_check(&id, &xs, &ts, &h, ctx.prec, ctx.mode)?;
    let max = r.max_residual.abs_upper();
    let tol = match a.tol {
        Some(t) if t > 0.0 => Mag::from_f64_up(t),
        Some(_) => return Err(usage("--tol must be positive")),
        None => r.budget,
    };
    let mut rep = Report::new("residual", params);
    rep.certified = max <= tol && r.stencil_clear;
    rep.csv_header = vec!["x", "t", "residual_mid", "residual_rad"];
    for p in &r.points {
        let [m, rd] = ball_fields(&p.residual);
        rep.csv_rows.push(vec![p.x.to_string(), p.t.to_string(), m, rd]);
    }
    rep.results.push(json!({
        "max_residual": ball(&r.max_residual),
        "budget": mag(r.budget),
        "tolerance": mag(tol),
        "stencil_clear": r.stencil_clear,
        "points": r.points.iter().map(|p| json!({ "x": p.x.to_string(), "t": p.t.to_string(), "residual": ball(&p.residual) })).collect::<Vec<_>>(),
    }));
    Ok(rep)
}

pub fn walczak(a: &WalczakArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let x0 = scalar("x0", &a.x0)?;
    let delta0 = rational("delta0", &a.delta0)?;
    let big_a = rational("a", &a.a)?;
    let mut grid = default_t_grid(&big_a, a.t_max);
    if !a.both_signs {
        grid.retain(|t| t.signum() > 0);
    }
    if grid.is_empty() {
        return Err(usage("empty t grid: need t-max > A"));
    }
    let mut params = base_params(ctx);
    params.insert("x0".into(), json!(x0.to_string()));
    params.insert("delta0".into(), json!(delta0.to_string()));
    params.insert("A".into(), json!(big_a.to_string()));
    params.insert("nmax".into(), json!(a.nmax));
    params.insert("t_max".into(), json!(a.t_max));
    params.insert("grid_points".into(), json!(grid.len()));
    let w = walczak_hypothesis_check(&x0, &delta0, &big_a, a.nmax, &grid, ctx.prec, ctx.mode)?;
    let mut rep = Report::new("walczak", params);
    rep.certified = w.verdict.is_pass();
    let l = nwheat::numerics::Ball::exact(w.l.clone());
    rep.csv_header = vec!["sup_mid", "sup_rad", "L", "argmax_n", "argmax_t"];
    let [m, rd] = ball_fields(&w.sup_observed);
    rep.csv_rows.push(vec![m, rd, ball_fields(&l)[0].clone(), w.argmax.0.to_string(), w.argmax.1.to_string()]);
    rep.results.push(json!({
        "sup_observed": ball(&w.sup_observed),
        "L": ball(&l)["mid"],
        "argmax": { "n": w.argmax.0, "t": w.argmax.1.to_string() },
        "verdict": w.verdict.as_str(),
        "note": "observed on the sampled grid and orders; the constant is not derived",
    }));
    Ok(rep)
}
