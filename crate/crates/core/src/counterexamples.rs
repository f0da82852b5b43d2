//! Growth diagnostics of weights and the constructions that separate the
//! weight classes: finite order, additive slow variation ψ(x+1) ~ ψ(x),
//! the bound on x·log(ψ(x+1)/ψ(x)), log-concavity, the piecewise-linear
//! weight's breakpoint ratios, boundedness of ψ(an+b)/ψ(n), and the
//! density of the set where ψ′/ψ exceeds ε.
//!
//! Everything is evaluated through `log ψ` so fast growers stay finite.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid;
use crate::weights::Weight;

/// Order-trace threshold past which the order is labelled
/// consistent-with-infinite.
pub const INFINITE_ORDER_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderVerdict {
    Finite,
    ConsistentWithInfiniteOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrowthVerdicts {
    pub finite_order: OrderVerdict,
    /// ψ(x+1)/ψ(x) → 1.
    pub asv: bool,
    pub cond2_bounded: bool,
    /// ψ′/ψ non-increasing over the grid.
    pub log_concave: bool,
    /// log ψ(x)/x → 0.
    pub hyper_growth_ok: bool,
}

/// Five traces on one geometric grid.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthDiagnostics {
    pub weight: String,
    pub x_max: f64,
    /// log ψ(x)/log x
    pub order_trace: Vec<(f64, f64)>,
    /// ψ(x+1)/ψ(x)
    pub asv_trace: Vec<(f64, f64)>,
    /// x·log(ψ(x+1)/ψ(x))
    pub cond2_trace: Vec<(f64, f64)>,
    /// ψ′(x)/ψ(x)
    pub logconcavity_trace: Vec<(f64, f64)>,
    /// `true` where the trace did not increase from the previous sample.
    pub logconcavity_flags: Vec<bool>,
    /// log ψ(x)/x
    pub hyper_trace: Vec<(f64, f64)>,
    pub verdicts: GrowthVerdicts,
}

/// Final value within `threshold` of `target`, and over the last quartile
/// the distance to `target` does not grow (or is already below
/// `threshold/10`). A single endpoint can alias an oscillation.
pub fn tends_to(trace: &[(f64, f64)], target: f64, threshold: f64) -> bool {
    let Some(&(_, last)) = trace.last() else {
        return false;
    };
    let d_last = (last - target).abs();
    if !(d_last < threshold) {
        return false;
    }
    if d_last < threshold / 10.0 {
        return true;
    }
    let q = trace.len() - trace.len() / 4 - 1;
    trace[q..]
        .windows(2)
        .all(|w| (w[1].1 - target).abs() <= (w[0].1 - target).abs() * (1.0 + 1e-9) + 1e-15)
}

/// Bounded on the grid: the largest value over the last quartile stays
/// within 10% of the largest value before it.
pub fn looks_bounded(trace: &[(f64, f64)]) -> bool {
    if trace.len() < 4 {
        return true;
    }
    let q = trace.len() - trace.len() / 4;
    let max = |s: &[(f64, f64)]| s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (head, tail) = (max(&trace[..q]), max(&trace[q..]));
    tail.is_finite() && tail <= head.abs() * 1.1 + 1e-12
}

fn grid_start(w: &Weight) -> Result<f64> {
    let s = w.domain_start().max(2.0);
    Ok(if w.log_value(s)?.is_finite() { s } else { s + 1.0 })
}

pub fn growth_diagnostics(w: &Weight, x_max: f64, grid_size: usize) -> Result<GrowthDiagnostics> {
    if !(x_max >= 1e3) || grid_size < 100 {
        return Err(invalid(format!(
            "growth diagnostics need X >= 1e3 and >= 100 grid points (got X = {x_max}, {grid_size} points)"
        )));
    }
    let start = grid_start(w)?;
    let xs = grid::geometric(start, x_max, grid_size, &[]);
    let mut d = GrowthDiagnostics {
        weight: w.name().to_string(),
        x_max,
        order_trace: Vec::with_capacity(xs.len()),
        asv_trace: Vec::with_capacity(xs.len()),
        cond2_trace: Vec::with_capacity(xs.len()),
        logconcavity_trace: Vec::with_capacity(xs.len()),
        logconcavity_flags: Vec::with_capacity(xs.len()),
        hyper_trace: Vec::with_capacity(xs.len()),
        verdicts: GrowthVerdicts {
            finite_order: OrderVerdict::Finite,
            asv: false,
            cond2_bounded: false,
            log_concave: false,
            hyper_growth_ok: false,
        },
    };
    for &x in &xs {
        let l = w.log_value(x)?;
        let step = w.log_value(x + 1.0)? - l;
        d.order_trace.push((x, l / x.ln()));
        d.asv_trace.push((x, step.exp()));
        d.cond2_trace.push((x, x * step));
        let ld = w.log_derivative(x)?;
        let flag = d
            .logconcavity_trace
            .last()
            .is_none_or(|&(_, prev): &(f64, f64)| ld <= prev * (1.0 + 1e-9));
        d.logconcavity_trace.push((x, ld));
        d.logconcavity_flags.push(flag);
        d.hyper_trace.push((x, l / x));
    }
    let order = d.order_trace.last().map_or(f64::NAN, |p| p.1);
    d.verdicts = GrowthVerdicts {
        finite_order: if order <= INFINITE_ORDER_THRESHOLD {
            OrderVerdict::Finite
        } else {
            OrderVerdict::ConsistentWithInfiniteOrder
        },
        asv: tends_to(&d.asv_trace, 1.0, 0.01),
        cond2_bounded: looks_bounded(&d.cond2_trace),
        log_concave: d.logconcavity_flags.iter().all(|&f| f),
        hyper_growth_ok: tends_to(&d.hyper_trace, 0.0, 0.01),
    };
    Ok(d)
}

/// The three limits of ψ(x_n + 1)/ψ(x_n) for the piecewise-linear weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PwlCase {
    /// 1 < p < 2: limit 1
    One,
    /// p = 2: limit 2
    Two,
    /// p > 2: limit ∞
    Infinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct PwlLimitTrace {
    pub p: f64,
    pub case: PwlCase,
    /// (n, ψ(x_n + 1)/ψ(x_n))
    pub ratio_trace: Vec<(u32, f64)>,
    /// (n, log ψ(y_n)/log y_n) at midpoints y_n = (x_n + x_{n+1})/2
    pub order_trace: Vec<(u32, f64)>,
    /// Last ratio matches the case: |r − 1| < 0.01, |r − 2| < 1e-3, r > 10.
    pub ratio_matches_case: bool,
    /// Last midpoint order within 0.05 of p.
    pub order_matches_p: bool,
}

/// Ratio and order traces of `pwl:p` for segments `1..=n_max` (clamped to
/// the largest segment whose breakpoints stay representable in log space).
pub fn pwl_limit_check(p: f64, n_max: Option<u32>) -> Result<PwlLimitTrace> {
    let w = Weight::piecewise_linear(p)?;
    let pwl = *w.as_piecewise_linear().expect("piecewise-linear weight");
    let feasible = pwl.max_feasible_segment();
    let n_max = n_max.unwrap_or(feasible).min(feasible).max(1);
    let ratio_trace: Vec<(u32, f64)> = (1..=n_max).map(|n| (n, pwl.breakpoint_ratio(n, 1.0))).collect();
    let order_trace: Vec<(u32, f64)> = (1..=n_max)
        .map(|n| {
            let (ly, lpsi) = pwl.log_midpoint(n);
            (n, lpsi / ly)
        })
        .collect();
    let case = if (p - 2.0).abs() < 1e-12 {
        PwlCase::Two
    } else if p < 2.0 {
        PwlCase::One
    } else {
        PwlCase::Infinite
    };
    let r = ratio_trace.last().map_or(f64::NAN, |t| t.1);
    let o = order_trace.last().map_or(f64::NAN, |t| t.1);
    Ok(PwlLimitTrace {
        p,
        case,
        ratio_matches_case: match case {
            PwlCase::One => (r - 1.0).abs() < 0.01,
            PwlCase::Two => (r - 2.0).abs() < 1e-3,
            PwlCase::Infinite => r > 10.0,
        },
        order_matches_p: (o - p).abs() < 0.05,
        ratio_trace,
        order_trace,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioBoundedness {
    pub weight: String,
    pub a: u64,
    pub b: u64,
    pub x_max: f64,
    /// (n, ψ(an+b)/ψ(n))
    pub trace: Vec<(f64, f64)>,
    /// sup of the ratio over every sample n ≤ X.
    pub c_hat: f64,
    /// sup over samples in [X/2, X].
    pub c_tail: f64,
    /// log Ĉ / log a
    pub order_bound: f64,
    /// log ψ(X)/log X
    pub measured_order: f64,
    pub bounded: bool,
    /// `measured_order ≤ order_bound + 0.05`; `None` when unbounded.
    pub order_cross_check: Option<bool>,
}

/// Samples ψ(an+b)/ψ(n) at 2000 geometric integers n ≤ X.
pub fn ratio_boundedness_check(w: &Weight, a: u64, b: u64, x_max: f64) -> Result<RatioBoundedness> {
    if a < 2 || !(x_max >= 1e3) {
        return Err(invalid(format!(
            "ratio check needs a >= 2 and X >= 1e3 (got a = {a}, X = {x_max})"
        )));
    }
    let start = grid_start(w)?.ceil();
    let mut ns: Vec<f64> = grid::geometric(start, x_max.floor(), 2000, &[])
        .into_iter()
        .map(f64::round)
        .collect();
    ns.dedup();
    let mut log_trace = Vec::with_capacity(ns.len());
    for &n in &ns {
        log_trace.push((n, w.log_value(a as f64 * n + b as f64)? - w.log_value(n)?));
    }
    let sup = |s: &[(f64, f64)]| s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let log_c = sup(&log_trace);
    let tail: Vec<(f64, f64)> = log_trace.iter().copied().filter(|p| 2.0 * p.0 >= x_max).collect();
    let bounded = looks_bounded(&log_trace);
    let order_bound = log_c / (a as f64).ln();
    let measured_order = w.log_value(x_max)? / x_max.ln();
    Ok(RatioBoundedness {
        weight: w.name().to_string(),
        a,
        b,
        x_max,
        c_hat: log_c.exp(),
        c_tail: sup(&tail).exp(),
        order_bound,
        measured_order,
        bounded,
        order_cross_check: bounded.then_some(measured_order <= order_bound + 0.05),
        trace: log_trace.into_iter().map(|(n, l)| (n, l.exp())).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceptionalVerdict {
    TendsToZero,
    DoesNotTendToZero,
    PreconditionFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalSetDensity {
    pub weight: String,
    pub eps: f64,
    pub x_max: f64,
    /// (x, |E ∩ (r0, x]| / x)
    pub trace: Vec<(f64, f64)>,
    /// |E ∩ (r0, X]|
    pub measure: f64,
    pub panels: usize,
    pub verdict: ExceptionalVerdict,
}

const PANELS: usize = 100_000;
const TRACE_POINTS: usize = 200;

/// Lebesgue measure of `E = {t : ψ′(t)/ψ(t) > ε}` inside `(r0, x]`, divided
/// by x, on geometric x up to X. Deterministic panels (geometric above 1,
/// uniform below, breakpoints of piecewise-linear weights as edges); each
/// panel is bisected wherever the indicator differs between its ends and
/// midpoint.
pub fn exceptional_set_density(w: &Weight, eps: f64, x_max: f64) -> Result<ExceptionalSetDensity> {
    if !(eps > 0.0) || !(x_max >= 1e3) {
        return Err(invalid(format!(
            "exceptional set needs eps > 0 and X >= 1e3 (got eps = {eps}, X = {x_max})"
        )));
    }
    let mut out = ExceptionalSetDensity {
        weight: w.name().to_string(),
        eps,
        x_max,
        trace: Vec::new(),
        measure: 0.0,
        panels: 0,
        verdict: ExceptionalVerdict::PreconditionFailed,
    };
    if !growth_diagnostics(w, x_max, 200)?.verdicts.hyper_growth_ok {
        return Ok(out);
    }
    let r0 = w.domain_start().max(0.0);
    let mut edges: Vec<f64> = Vec::with_capacity(PANELS + 200);
    if r0 < 1.0 {
        edges.extend((0..100).map(|i| r0 + (1.0 - r0) * i as f64 / 100.0));
    }
    edges.extend(grid::geometric(r0.max(1.0), x_max, PANELS, &[]));
    if let Some(pwl) = w.as_piecewise_linear() {
        edges.extend(pwl.breakpoints_up_to(x_max));
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let marks: Vec<f64> = grid::geometric(r0.max(1.0) * 10.0, x_max, TRACE_POINTS, &[]);
    let inside = |t: f64| -> Result<bool> {
        // at the left end of the domain ψ may vanish: nudge inside
        let t = if t <= r0 { r0 + 1e-12 * (1.0 + r0) } else { t };
        let v = w.log_derivative(t)?;
        Ok(v.is_nan() || v > eps)
    };
    let mut measure = 0.0;
    let mut next_mark = marks.iter().copied().peekable();
    let mut left = inside(edges[0])?;
    for pair in edges.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        let right = inside(r)?;
        measure += panel_measure(&inside, l, r, left, right, 0)?;
        left = right;
        while let Some(&m) = next_mark.peek() {
            if m > r {
                break;
            }
            next_mark.next();
            out.trace.push((r, measure / r));
        }
    }
    out.measure = measure;
    out.panels = edges.len() - 1;
    out.verdict = if tends_to(&out.trace, 0.0, 0.01) {
        ExceptionalVerdict::TendsToZero
    } else {
        ExceptionalVerdict::DoesNotTendToZero
    };
    Ok(out)
}

fn panel_measure(inside: &impl Fn(f64) -> Result<bool>, l: f64, r: f64, il: bool, ir: bool, depth: u32) -> Result<f64> {
    let m = 0.5 * (l + r);
    let im = inside(m)?;
    if il == im && im == ir {
        return Ok(if im { r - l } else { 0.0 });
    }
    if depth >= 40 || r - l <= 1e-12 * r.max(1.0) {
        // midpoint rule on the unresolved sliver
        return Ok(if im { r - l } else { 0.0 });
    }
    Ok(panel_measure(inside, l, m, il, im, depth + 1)? + panel_measure(inside, m, r, im, ir, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{catalog, exponential, WeightClass};

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn cubic_growth() {
        let d = growth_diagnostics(&w("pow:3"), 1e6, 200).unwrap();
        assert!(d.order_trace.iter().all(|p| (p.1 - 3.0).abs() < 1e-12));
        assert!(d.verdicts.asv && d.verdicts.cond2_bounded && d.verdicts.log_concave);
        let c = d.cond2_trace.last().unwrap().1;
        assert!((c - 3.0).abs() < 1e-5, "{c}");
        assert_eq!(d.verdicts.finite_order, OrderVerdict::Finite);
    }

    #[test]
    fn exp_power_cond2_unbounded() {
        let d = growth_diagnostics(&w("exppow:0.5"), 1e4, 200).unwrap();
        let last = d.cond2_trace.last().unwrap();
        assert_eq!(last.0, 1e4);
        assert!(last.1 > 40.0, "{}", last.1);
        assert!(!d.verdicts.cond2_bounded);
        assert!(d.verdicts.asv);
    }

    #[test]
    fn exponential_is_not_slowly_varying() {
        let d = growth_diagnostics(&exponential(), 1e4, 200).unwrap();
        assert!(d.asv_trace.iter().all(|p| (p.1 - std::f64::consts::E).abs() < 1e-9));
        assert!(d.hyper_trace.iter().all(|p| (p.1 - 1.0).abs() < 1e-12));
        assert!(!d.verdicts.asv && !d.verdicts.hyper_growth_ok);
        assert_eq!(d.verdicts.finite_order, OrderVerdict::ConsistentWithInfiniteOrder);
        assert!(d.order_trace.iter().chain(&d.cond2_trace).all(|p| p.1.is_finite()));
    }

    #[test]
    fn d2_catalog_weights_are_slowly_varying_and_not_hyper() {
        for wt in catalog().into_iter().filter(|w| w.declared_class() == WeightClass::D2) {
            let d = growth_diagnostics(&wt, 1e6, 300).unwrap();
            let r = d.asv_trace.last().unwrap().1;
            assert!(d.verdicts.asv && (r - 1.0).abs() < 0.01, "{} {r}", wt.name());
            assert!(d.hyper_trace.last().unwrap().1 < 0.01, "{}", wt.name());
        }
    }

    #[test]
    fn slow_variation_iff_small_log_derivative() {
        let eps_grid = [0.5, 0.1, 0.01, 1e-3];
        let mut ws: Vec<Weight> = ["pow:2", "pow:3", "xlogx", "expsqrt", "exppow:0.5", "exppow:0.3"]
            .iter()
            .map(|s| w(s))
            .collect();
        ws.push(exponential());
        for wt in ws {
            let d = growth_diagnostics(&wt, 1e6, 300).unwrap();
            let ld = d.logconcavity_trace.last().unwrap().1;
            for eps in eps_grid {
                assert_eq!(d.verdicts.asv, ld < eps, "{} eps {eps}: ψ′/ψ = {ld}", wt.name());
            }
        }
    }

    #[test]
    fn pwl_is_not_log_concave() {
        for p in [1.5, 2.0, 2.5] {
            let d = growth_diagnostics(&w(&format!("pwl:{p}")), 1e6, 400).unwrap();
            assert!(!d.verdicts.log_concave, "pwl:{p}");
            assert!(d.logconcavity_flags.iter().any(|f| !f));
        }
        for s in ["pow:2", "log", "expsqrt"] {
            assert!(growth_diagnostics(&w(s), 1e6, 200).unwrap().verdicts.log_concave, "{s}");
        }
    }

    #[test]
    fn pwl_three_case_table() {
        let t = pwl_limit_check(2.0, Some(4)).unwrap();
        assert_eq!(t.case, PwlCase::Two);
        assert!((t.ratio_trace[3].1 - 2.0).abs() < 1e-3);
        let t = pwl_limit_check(1.5, None).unwrap();
        assert!(t.ratio_matches_case && t.order_matches_p, "{t:?}");
        let t = pwl_limit_check(2.5, Some(3)).unwrap();
        assert!(t.ratio_trace[2].1 > 10.0);
        assert!(t.order_matches_p, "{:?}", t.order_trace);
        assert!((t.order_trace[2].1 - 2.5).abs() < 0.05);
        assert!(pwl_limit_check(1.0, None).is_err());
    }

    #[test]
    fn pwl_ratio_oracle_p2() {
        // x_n = 2^(2^n), ψ(x_n) = x_n², slope = x_n + x_{n+1}: ratio 1 + (x_n + x_n²)/x_n²
        let t = pwl_limit_check(2.0, Some(4)).unwrap();
        for &(n, r) in &t.ratio_trace {
            let x = 2f64.powf(2f64.powi(n as i32));
            let oracle = 1.0 + (x + x * x) / (x * x);
            assert!((r - oracle).abs() < 1e-12 * oracle, "n = {n}");
        }
    }

    #[test]
    fn ratio_examples() {
        let r = ratio_boundedness_check(&w("pow:2"), 2, 1, 1e4).unwrap();
        assert!((r.c_tail - 4.0).abs() < 1e-2);
        assert!(r.bounded && r.order_cross_check == Some(true));
        assert!((r.measured_order - 2.0).abs() < 1e-12);
        let r = ratio_boundedness_check(&w("exppow:0.5"), 2, 0, 1e4).unwrap();
        assert!(!r.bounded);
        assert!(r.trace.last().unwrap().1.ln() > 40.0);
        let r = ratio_boundedness_check(&w("id"), 3, 0, 1e4).unwrap();
        assert!(r.trace.iter().all(|p| (p.1 - 3.0).abs() < 1e-12));
        assert!(ratio_boundedness_check(&w("id"), 1, 0, 1e4).is_err());
    }

    #[test]
    fn exceptional_set_of_square() {
        let e = exceptional_set_density(&w("pow:2"), 0.1, 1e6).unwrap();
        assert!((e.measure - 20.0).abs() < 1e-6, "{}", e.measure);
        assert_eq!(e.verdict, ExceptionalVerdict::TendsToZero);
        let (x, v) = *e.trace.last().unwrap();
        assert!((v - 20.0 / x).abs() < 1e-9);
    }

    #[test]
    fn exceptional_set_of_log_and_pwl() {
        for (s, eps) in [("log", 0.5), ("pwl:2", 0.5)] {
            let e = exceptional_set_density(&w(s), eps, 1e6).unwrap();
            assert_eq!(e.verdict, ExceptionalVerdict::TendsToZero, "{s}");
            assert!(e.trace.last().unwrap().1 < 0.01);
        }
        // pwl:2 has a piece of E right after every breakpoint
        let e = exceptional_set_density(&w("pwl:2"), 0.5, 1e6).unwrap();
        assert!(e.measure > 3.0);
        let e = exceptional_set_density(&exponential(), 0.5, 1e4).unwrap();
        assert_eq!(e.verdict, ExceptionalVerdict::PreconditionFailed);
    }
}
