//! Weight functions ψ: positive, strictly increasing, differentiable and
//! unbounded on `(domain_start, ∞)`.
//!
//! The catalog covers powers, `log(1 + x)`, `x log x`, `e^√x`, `exp(x^σ)`
//! and a piecewise-linear weight whose breakpoints sit at `2^(p^n)`. Fast
//! growers carry log-space evaluators and are summed with [`crate::sum::LogSum`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::sum::{log_add_exp, CompensatedSum, LogSum};

/// The weight classes: 𝒟₁ (concave) and 𝒟₂ (convex with ψ(n+1) ~ ψ(n)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightClass {
    D1,
    D2,
    Neither,
}

impl fmt::Display for WeightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightClass::D1 => "D1",
            WeightClass::D2 => "D2",
            WeightClass::Neither => "neither",
        })
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Custom {
    value: RealFn,
    deriv: RealFn,
    log_value: Option<RealFn>,
    log_deriv: Option<RealFn>,
}

#[derive(Clone)]
enum Kind {
    Power(f64),
    Log,
    XLogX,
    ExpSqrt,
    ExpPower(f64),
    Pwl(Pwl),
    Custom(Custom),
}

struct Inner {
    name: String,
    kind: Kind,
    class: WeightClass,
    domain_start: f64,
    log_space: bool,
}

/// A weight function. Cheap to clone; immutable and shareable across threads.
#[derive(Clone)]
pub struct Weight(Arc<Inner>);

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.0.name)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

impl Weight {
    fn build(name: String, kind: Kind, class: WeightClass, domain_start: f64, log_space: bool) -> Self {
        Weight(Arc::new(Inner {
            name,
            kind,
            class,
            domain_start,
            log_space,
        }))
    }

    /// `x^q`. Tagged D1 for `q <= 1` (so `q = 1` is D1) and D2 above.
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(invalid(format!("power weight needs q > 0, got {q}")));
        }
        let class = if q <= 1.0 { WeightClass::D1 } else { WeightClass::D2 };
        Ok(Self::build(format!("pow:{q}"), Kind::Power(q), class, 0.0, false))
    }

    /// ψ(x) = x.
    pub fn identity() -> Self {
        Self::build("id".into(), Kind::Power(1.0), WeightClass::D1, 0.0, false)
    }

    /// `log(1 + x)`.
    pub fn log() -> Self {
        Self::build("log".into(), Kind::Log, WeightClass::D1, 0.0, false)
    }

    /// `x log x` on `[1, ∞)`, with ψ′(1) = 1.
    pub fn xlogx() -> Self {
        Self::build("xlogx".into(), Kind::XLogX, WeightClass::D2, 1.0, false)
    }

    /// `e^√x`, summed in log space.
    pub fn exp_sqrt() -> Self {
        Self::build("expsqrt".into(), Kind::ExpSqrt, WeightClass::D2, 0.0, true)
    }

    /// `exp(x^σ)` for `0 < σ < 1`, summed in log space.
    pub fn exp_power(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(invalid(format!("exp-power weight needs 0 < sigma < 1, got {sigma}")));
        }
        Ok(Self::build(
            format!("exppow:{sigma}"),
            Kind::ExpPower(sigma),
            WeightClass::D2,
            0.0,
            true,
        ))
    }

    /// Piecewise-linear weight through `(x_n, x_n^p)`, `x_n = 2^(p^n)`.
    /// It is convex; ψ(n+1)/ψ(n) → 1 only for `p < 2`, so it is tagged D2
    /// there and "neither" otherwise.
    pub fn piecewise_linear(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("piecewise-linear weight needs p > 1, got {p}")));
        }
        let pwl = Pwl { p };
        let class = if p < 2.0 { WeightClass::D2 } else { WeightClass::Neither };
        Ok(Self::build(
            format!("pwl:{p}"),
            Kind::Pwl(pwl),
            class,
            pwl.breakpoint(1),
            true,
        ))
    }

    /// Programmatic weight from closures; see [`CustomWeight`].
    pub fn custom<V, D>(name: impl Into<String>, value: V, deriv: D) -> CustomWeight
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CustomWeight {
            name: name.into(),
            custom: Custom {
                value: Arc::new(value),
                deriv: Arc::new(deriv),
                log_value: None,
                log_deriv: None,
            },
            class: WeightClass::Neither,
            domain_start: 0.0,
        }
    }

    /// Parses `pow:q`, `id`, `log`, `xlogx`, `expsqrt`, `exppow:σ`, `pwl:p`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (spec, None),
        };
        let number = |a: &str| -> Result<f64> {
            a.parse::<f64>()
                .map_err(|_| invalid(format!("`{spec}`: `{a}` is not a number")))
        };
        let tag = |e: Error| match e {
            Error::InvalidParameter(msg) => Error::InvalidParameter(format!("`{spec}`: {msg}")),
            other => other,
        };
        match (name, arg) {
            ("pow", Some(q)) => Self::power(number(q)?).map_err(tag),
            ("id", None) => Ok(Self::identity()),
            ("log", None) => Ok(Self::log()),
            ("xlogx", None) => Ok(Self::xlogx()),
            ("expsqrt", None) => Ok(Self::exp_sqrt()),
            ("exppow", Some(s)) => Self::exp_power(number(s)?).map_err(tag),
            ("pwl", Some(p)) => Self::piecewise_linear(number(p)?).map_err(tag),
            _ => Err(invalid(format!("unknown weight specification `{spec}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn declared_class(&self) -> WeightClass {
        self.0.class
    }

    pub fn domain_start(&self) -> f64 {
        self.0.domain_start
    }

    /// Whether sums of ψ′ should be accumulated in log space.
    pub fn prefers_log_space(&self) -> bool {
        self.0.log_space
    }

    /// First integer at which ψ′ is summed: max(1, ⌈domain_start⌉).
    pub fn first_index(&self) -> u64 {
        (self.0.domain_start.ceil() as u64).max(1)
    }

    /// The piecewise-linear structure, when this is a `pwl` weight.
    pub fn as_piecewise_linear(&self) -> Option<&Pwl> {
        match &self.0.kind {
            Kind::Pwl(p) => Some(p),
            _ => None,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < self.0.domain_start || x == f64::INFINITY {
            return Err(Error::OutOfDomain {
                weight: self.0.name.clone(),
                x,
            });
        }
        Ok(())
    }

    fn finite(&self, v: f64, what: &str, x: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NumericRange {
                weight: self.0.name.clone(),
                detail: format!("{what} at x = {x} is {v}"),
            })
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let v = match &self.0.kind {
            Kind::Power(q) => x.powf(*q),
            Kind::Log => x.ln_1p(),
            Kind::XLogX => x * x.ln(),
            Kind::ExpSqrt => x.sqrt().exp(),
            Kind::ExpPower(s) => x.powf(*s).exp(),
            Kind::Pwl(p) => p.log_value(x).exp(),
            Kind::Custom(c) => (c.value)(x),
        };
        self.finite(v, "ψ", x)
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let v = match &self.0.kind {
            Kind::Power(q) => {
                if *q == 1.0 {
                    1.0
                } else {
                    q * x.powf(q - 1.0)
                }
            }
            Kind::Log => 1.0 / (1.0 + x),
            Kind::XLogX => 1.0 + x.ln(),
            Kind::ExpSqrt => {
                let r = x.sqrt();
                r.exp() / (2.0 * r)
            }
            Kind::ExpPower(s) => {
                let t = x.powf(*s);
                s * t / x * t.exp()
            }
            Kind::Pwl(p) => p.log_slope(p.segment(x)).exp(),
            Kind::Custom(c) => (c.deriv)(x),
        };
        self.finite(v, "ψ′", x)
    }

    /// `log ψ(x)`; `-inf` where ψ vanishes (x log x at 1).
    pub fn log_value(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let v = match &self.0.kind {
            Kind::Power(q) => q * x.ln(),
            Kind::Log => x.ln_1p().ln(),
            Kind::XLogX => x.ln() + x.ln().ln(),
            Kind::ExpSqrt => x.sqrt(),
            Kind::ExpPower(s) => x.powf(*s),
            Kind::Pwl(p) => p.log_value(x),
            Kind::Custom(c) => match &c.log_value {
                Some(f) => f(x),
                None => (c.value)(x).ln(),
            },
        };
        if v.is_nan() || v == f64::INFINITY {
            return self.finite(v, "log ψ", x);
        }
        Ok(v)
    }

    pub fn log_deriv(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let v = match &self.0.kind {
            Kind::Power(q) => q.ln() + (q - 1.0) * x.ln(),
            Kind::Log => -x.ln_1p(),
            Kind::XLogX => x.ln().ln_1p(),
            Kind::ExpSqrt => {
                let r = x.sqrt();
                r - std::f64::consts::LN_2 - r.ln()
            }
            Kind::ExpPower(s) => s.ln() + (s - 1.0) * x.ln() + x.powf(*s),
            Kind::Pwl(p) => p.log_slope(p.segment(x)),
            Kind::Custom(c) => match &c.log_deriv {
                Some(f) => f(x),
                None => (c.deriv)(x).ln(),
            },
        };
        if v.is_nan() || v == f64::INFINITY {
            return self.finite(v, "log ψ′", x);
        }
        Ok(v)
    }

    /// ψ′(x)/ψ(x), computed as `exp(log ψ′ − log ψ)` for log-space weights.
    pub fn log_derivative(&self, x: f64) -> Result<f64> {
        if self.0.log_space {
            Ok((self.log_deriv(x)? - self.log_value(x)?).exp())
        } else {
            Ok(self.deriv(x)? / self.value(x)?)
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Builder for programmatic weights.
pub struct CustomWeight {
    name: String,
    custom: Custom,
    class: WeightClass,
    domain_start: f64,
}

impl CustomWeight {
    /// Log-space evaluators; the weight is then summed in log space.
    pub fn log_space<L, M>(mut self, log_value: L, log_deriv: M) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.custom.log_value = Some(Arc::new(log_value));
        self.custom.log_deriv = Some(Arc::new(log_deriv));
        self
    }

    pub fn class(mut self, class: WeightClass) -> Self {
        self.class = class;
        self
    }

    pub fn domain_start(mut self, r0: f64) -> Self {
        self.domain_start = r0;
        self
    }

    /// Validates positivity, growth and unboundedness on sample points.
    /// Bounded weights (whose partial sums of ψ′ converge) are rejected.
    pub fn build(self) -> Result<Weight> {
        if !(self.domain_start >= 0.0 && self.domain_start.is_finite()) {
            return Err(invalid(format!(
                "`{}`: domain start must be finite and >= 0",
                self.name
            )));
        }
        let log_space = self.custom.log_value.is_some();
        let w = Weight::build(
            self.name,
            Kind::Custom(self.custom),
            self.class,
            self.domain_start,
            log_space,
        );
        let name = w.name().to_string();
        let start = (w.domain_start() + 1.0).max(1.0);
        // Sample until the evaluators overflow (which already proves growth).
        let mut overflowed = false;
        for x in grid::geometric(start, 1e12, 64, &[1e6]) {
            match (w.log_value(x), w.log_deriv(x)) {
                (Ok(lv), Ok(ld)) if lv.is_finite() && ld.is_finite() => {}
                (Err(Error::NumericRange { .. }), _) | (_, Err(Error::NumericRange { .. })) => {
                    overflowed = true;
                    break;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
                _ => return Err(invalid(format!("`{name}`: ψ or ψ′ is not positive at x = {x}"))),
            }
        }
        if overflowed {
            return Ok(w);
        }
        let (lo, hi) = (w.log_value(1e6)?, w.log_value(1e12)?);
        let elasticity = 1e12f64.ln() + w.log_deriv(1e12)? - hi;
        if hi <= lo || elasticity < 1e-6f64.ln() {
            return Err(invalid(format!(
                "`{name}` looks bounded (ψ(1e6) = e^{lo:.6}, ψ(1e12) = e^{hi:.6}); weights must be unbounded"
            )));
        }
        Ok(w)
    }
}

/// Breakpoint structure of the piecewise-linear weight: `x_n = 2^(p^n)`,
/// `ψ(x_n) = x_n^p`, linear in between. All quantities are handled through
/// their logarithms since `x_n` leaves double range after a few segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pwl {
    p: f64,
}

fn log1m_exp(d: f64) -> f64 {
    // ln(1 - e^d) for d < 0
    if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

impl Pwl {
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `log2 x_n = p^n`.
    pub fn log2_breakpoint(&self, n: u32) -> f64 {
        self.p.powi(n as i32)
    }

    /// `ln x_n`.
    pub fn log_breakpoint(&self, n: u32) -> f64 {
        self.log2_breakpoint(n) * std::f64::consts::LN_2
    }

    /// `x_n` as a double (infinite once out of range).
    pub fn breakpoint(&self, n: u32) -> f64 {
        self.log2_breakpoint(n).exp2()
    }

    /// Breakpoints `x_n <= x`, n >= 1.
    pub fn breakpoints_up_to(&self, x: f64) -> Vec<f64> {
        (1..).map(|n| self.breakpoint(n)).take_while(|&b| b <= x).collect()
    }

    /// Segment index n with `x_n <= x < x_{n+1}` (x ≥ x_1).
    pub fn segment(&self, x: f64) -> u32 {
        let t = x.log2();
        let mut n = ((t.ln() / self.p.ln()).floor().max(1.0)) as u32;
        while self.log2_breakpoint(n + 1) <= t {
            n += 1;
        }
        while n > 1 && self.log2_breakpoint(n) > t {
            n -= 1;
        }
        n
    }

    /// `ln` of the slope `(x_{n+1}^p − x_n^p)/(x_{n+1} − x_n)` of segment n.
    pub fn log_slope(&self, n: u32) -> f64 {
        let (a, b) = (self.log_breakpoint(n), self.log_breakpoint(n + 1));
        self.p * b + log1m_exp(self.p * (a - b)) - b - log1m_exp(a - b)
    }

    /// `ln ψ(x)` for x in double range.
    pub fn log_value(&self, x: f64) -> f64 {
        let n = self.segment(x);
        let xn = self.breakpoint(n);
        let d = x - xn;
        let rise = if d > 0.0 {
            self.log_slope(n) + d.ln()
        } else {
            f64::NEG_INFINITY
        };
        log_add_exp(self.p * self.log_breakpoint(n), rise)
    }

    /// `ψ(x_n + h)/ψ(x_n) = 1 + h·slope_n/x_n^p`, exact in log space for
    /// breakpoints far outside double range.
    pub fn breakpoint_ratio(&self, n: u32, h: f64) -> f64 {
        1.0 + h * (self.log_slope(n) - self.p * self.log_breakpoint(n)).exp()
    }

    /// `(ln y_n, ln ψ(y_n))` at the midpoint `y_n = (x_n + x_{n+1})/2`, where
    /// `ψ(y_n) = (x_n^p + x_{n+1}^p)/2`.
    pub fn log_midpoint(&self, n: u32) -> (f64, f64) {
        let (a, b) = (self.log_breakpoint(n), self.log_breakpoint(n + 1));
        let ln2 = std::f64::consts::LN_2;
        (log_add_exp(a, b) - ln2, log_add_exp(self.p * a, self.p * b) - ln2)
    }

    /// Largest n with `p^(n+1) <= 700/ln 2`, i.e. every quantity of segment
    /// n stays representable through its logarithm.
    pub fn max_feasible_segment(&self) -> u32 {
        let cap = 700.0 / std::f64::consts::LN_2;
        let mut n = 1;
        while self.log2_breakpoint(n + 2) <= cap {
            n += 1;
        }
        n
    }
}

/// Evidence gathered by [`classify`].
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub weight: String,
    pub diagnosis: WeightClass,
    pub declared: WeightClass,
    /// ψ′ non-increasing over the grid.
    pub concave_evidence: bool,
    /// ψ′ non-decreasing over the grid.
    pub convex_evidence: bool,
    /// Largest |ψ(n+1)/ψ(n) − 1| over the last grid integers.
    pub step_ratio_deviation: f64,
    pub samples: usize,
}

impl Classification {
    pub fn agrees_with_declared(&self) -> bool {
        self.diagnosis == self.declared
    }
}

/// Diagnoses the class of `w` from ψ′ monotonicity on a geometric grid of
/// `points` samples up to `x_max`, and from ψ(n+1)/ψ(n) at the largest
/// grid integers (within `ratio_tol` of 1 for D2).
pub fn classify(w: &Weight, x_max: f64, points: usize, ratio_tol: f64) -> Result<Classification> {
    if points < 1000 || x_max < 1e4 {
        return Err(invalid(format!(
            "classification grid needs >= 1000 points up to X >= 1e4 (got {points} points, X = {x_max})"
        )));
    }
    let start = sample_start(w)?;
    let xs = grid::geometric(start, x_max, points, &[]);
    let mut derivs = Vec::with_capacity(xs.len());
    for &x in &xs {
        derivs.push(w.log_deriv(x)?);
    }
    let positive = derivs.iter().all(|d| d.is_finite());
    let slack = |a: f64| 1e-12 * a.abs().max(1.0);
    let concave = derivs.windows(2).all(|d| d[1] <= d[0] + slack(d[0]));
    let convex = derivs.windows(2).all(|d| d[1] >= d[0] - slack(d[0]));

    let top = x_max.floor();
    let mut deviation = 0.0f64;
    for i in 0..10 {
        let n = top - 1.0 - i as f64;
        if n < start {
            break;
        }
        let r = (w.log_value(n + 1.0)? - w.log_value(n)?).exp_m1().abs();
        deviation = deviation.max(r);
    }
    let diagnosis = if !positive {
        WeightClass::Neither
    } else if concave {
        WeightClass::D1
    } else if convex && deviation <= ratio_tol {
        WeightClass::D2
    } else {
        WeightClass::Neither
    };
    Ok(Classification {
        weight: w.name().to_string(),
        diagnosis,
        declared: w.declared_class(),
        concave_evidence: concave,
        convex_evidence: convex,
        step_ratio_deviation: deviation,
        samples: xs.len(),
    })
}

/// First sample point where ψ is positive.
fn sample_start(w: &Weight) -> Result<f64> {
    let s = w.domain_start().max(1.0);
    Ok(if w.log_value(s)?.is_finite() { s } else { s + 1.0 })
}

/// Σ_{k ≤ n} ψ′(k) / ψ(n) at powers of two.
#[derive(Debug, Clone, Serialize)]
pub struct AsymTrace {
    pub weight: String,
    pub points: Vec<(u64, f64)>,
    pub final_ratio: f64,
    pub tol: f64,
    pub converged: bool,
}

/// Traces Σ_{k=first}^{n} ψ′(k) / ψ(n) at n = 2^j ≤ N (and N itself);
/// `converged` when the final ratio is within `tol` of 1.
pub fn check_asym(w: &Weight, n_max: u64, tol: f64) -> Result<AsymTrace> {
    if n_max < 1000 {
        return Err(invalid(format!(
            "asymptotic-identity check needs N >= 1000, got {n_max}"
        )));
    }
    let first = w.first_index();
    let mut marks: Vec<u64> = (0..64).map(|j| 1u64 << j).take_while(|&n| n <= n_max).collect();
    if marks.last() != Some(&n_max) {
        marks.push(n_max);
    }
    let mut points = Vec::new();
    let mut next = marks.iter().copied().filter(|&m| m >= first).peekable();
    if w.prefers_log_space() {
        let mut acc = LogSum::new();
        for k in first..=n_max {
            acc.add_log(w.log_deriv(k as f64)?);
            if next.peek() == Some(&k) {
                next.next();
                points.push((k, (acc.log_value() - w.log_value(k as f64)?).exp()));
            }
        }
    } else {
        let mut acc = CompensatedSum::new();
        for k in first..=n_max {
            acc.add(w.deriv(k as f64)?);
            if next.peek() == Some(&k) {
                next.next();
                let v = acc.value();
                if !v.is_finite() {
                    return Err(Error::NumericRange {
                        weight: w.name().to_string(),
                        detail: format!("Σψ′ overflowed at n = {k}"),
                    });
                }
                points.push((k, v / w.value(k as f64)?));
            }
        }
    }
    let final_ratio = points.last().map_or(f64::NAN, |p| p.1);
    Ok(AsymTrace {
        weight: w.name().to_string(),
        points,
        final_ratio,
        tol,
        converged: (final_ratio - 1.0).abs() <= tol,
    })
}

/// Samples of ψ′/ψ over `[1, X]`.
#[derive(Debug, Clone, Serialize)]
pub struct LogDerivativeTrace {
    pub weight: String,
    pub samples: Vec<(f64, f64)>,
    /// sup of ψ′/ψ over the samples in `[X/2, X]`.
    pub tail_sup: f64,
}

pub fn log_derivative_trace(w: &Weight, x_max: f64, points: usize) -> Result<LogDerivativeTrace> {
    if x_max < 100.0 {
        return Err(invalid(format!("log-derivative trace needs X >= 100, got {x_max}")));
    }
    let start = sample_start(w)?;
    let xs = grid::geometric(start, x_max, points.max(2), &[x_max / 2.0]);
    let mut samples = Vec::with_capacity(xs.len());
    for x in xs {
        samples.push((x, w.log_derivative(x)?));
    }
    let tail_sup = samples
        .iter()
        .filter(|(x, _)| *x >= x_max / 2.0)
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LogDerivativeTrace {
        weight: w.name().to_string(),
        samples,
        tail_sup,
    })
}

/// The catalog weights used by the suites.
pub fn catalog() -> Vec<Weight> {
    vec![
        Weight::power(0.5).unwrap(),
        Weight::identity(),
        Weight::power(2.0).unwrap(),
        Weight::power(3.0).unwrap(),
        Weight::log(),
        Weight::xlogx(),
        Weight::exp_sqrt(),
        Weight::exp_power(0.5).unwrap(),
        Weight::piecewise_linear(1.5).unwrap(),
        Weight::piecewise_linear(2.0).unwrap(),
    ]
}

/// ψ(x) = e^x as a custom weight (with log-space evaluators). Not in 𝒟₁ or
/// 𝒟₂: ψ(n+1)/ψ(n) = e.
pub fn exponential() -> Weight {
    Weight::custom("exp", f64::exp, f64::exp)
        .log_space(|x| x, |x| x)
        .build()
        .expect("e^x is a valid weight")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn closed_forms() {
        let id = Weight::power(1.0).unwrap();
        assert_eq!(id.value(5.0).unwrap(), 5.0);
        assert_eq!(id.deriv(5.0).unwrap(), 1.0);
        let half = Weight::power(0.5).unwrap();
        assert_eq!(half.value(4.0).unwrap(), 2.0);
        assert_eq!(half.deriv(4.0).unwrap(), 0.25);
        assert_eq!(Weight::xlogx().deriv(1.0).unwrap(), 1.0);
        assert_eq!(Weight::xlogx().first_index(), 1);
        assert!(Weight::power(0.0).is_err());
        assert!(Weight::exp_power(1.0).is_err());
        assert!(Weight::piecewise_linear(1.0).is_err());
    }

    #[test]
    fn log_derivative_examples() {
        let r = Weight::log().log_derivative(1e6).unwrap();
        assert!(r < 1e-6 && close(r, 1.0 / ((1.0 + 1e6) * (1e6f64).ln_1p()), 1e-12));
        let w = Weight::xlogx();
        let n = 1e4;
        let r = w.deriv(2.0 * n).unwrap() / w.value(n).unwrap();
        assert!(r < 2e-3);
        let w = Weight::exp_power(0.5).unwrap();
        assert!(w.log_deriv(2.0 * n).unwrap() - w.log_value(n).unwrap() > 30.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(Weight::xlogx().value(0.5), Err(Error::OutOfDomain { .. })));
        let pwl = Weight::piecewise_linear(2.0).unwrap();
        assert!(matches!(pwl.value(3.9), Err(Error::OutOfDomain { .. })));
        assert_eq!(pwl.first_index(), 4);
        assert!(matches!(Weight::exp_sqrt().value(1e8), Err(Error::NumericRange { .. })));
        assert!(Weight::exp_sqrt().log_value(1e8).unwrap() == 1e4);
    }

    #[test]
    fn parse_specs() {
        for spec in ["pow:0.5", "id", "log", "xlogx", "expsqrt", "exppow:0.5", "pwl:2"] {
            assert_eq!(Weight::parse(spec).unwrap().name(), spec);
        }
        assert_eq!(Weight::parse("pow:1").unwrap().declared_class(), WeightClass::D1);
        let msg = Weight::parse("cosh").unwrap_err().to_string();
        assert!(msg.contains("`cosh`"));
        let msg = Weight::parse("pow:-1").unwrap_err().to_string();
        assert!(msg.contains("`pow:-1`"), "{msg}");
    }

    #[test]
    fn pwl_breakpoints_and_ratios() {
        let w = Weight::piecewise_linear(2.0).unwrap();
        let pwl = *w.as_piecewise_linear().unwrap();
        assert_eq!(pwl.breakpoints_up_to(70000.0), vec![4.0, 16.0, 256.0, 65536.0]);
        for n in 1..4 {
            let x = pwl.breakpoint(n);
            assert!(close(w.value(x).unwrap(), x * x, 1e-13));
        }
        assert!((pwl.breakpoint_ratio(4, 1.0) - 2.0).abs() < 1e-3);
        // right-continuous derivative at a breakpoint
        let right = (256f64.powi(2) - 16f64.powi(2)) / (256.0 - 16.0);
        assert!(close(w.deriv(16.0).unwrap(), right, 1e-12));

        let p15 = Weight::piecewise_linear(1.5).unwrap();
        let pw = *p15.as_piecewise_linear().unwrap();
        let n = pw.max_feasible_segment();
        assert!(pw.log2_breakpoint(n + 1) <= 700.0 / std::f64::consts::LN_2);
        assert!((pw.breakpoint_ratio(n, 1.0) - 1.0).abs() < 1e-2);

        let p3 = Weight::piecewise_linear(3.0).unwrap();
        assert!(p3.as_piecewise_linear().unwrap().breakpoint_ratio(2, 1.0) > 10.0);
    }

    #[test]
    fn pwl_ratio_agrees_with_direct_evaluation_in_range() {
        let w = Weight::piecewise_linear(1.5).unwrap();
        let pwl = *w.as_piecewise_linear().unwrap();
        for n in 1..8 {
            let x = pwl.breakpoint(n);
            let direct = w.value(x + 1.0).unwrap() / w.value(x).unwrap();
            assert!(close(direct, pwl.breakpoint_ratio(n, 1.0), 1e-9), "n = {n}");
        }
    }

    #[test]
    fn classify_catalog() {
        for q in [0.3, 0.7, 1.0] {
            let c = classify(&Weight::power(q).unwrap(), 1e6, 1000, 1e-2).unwrap();
            assert_eq!(c.diagnosis, WeightClass::D1, "q = {q}");
        }
        for q in [1.5, 2.0, 3.0] {
            let c = classify(&Weight::power(q).unwrap(), 1e6, 1000, 1e-2).unwrap();
            assert_eq!(c.diagnosis, WeightClass::D2, "q = {q}");
        }
        assert_eq!(
            classify(&Weight::log(), 1e6, 1000, 1e-2).unwrap().diagnosis,
            WeightClass::D1
        );
        let e = classify(&exponential(), 1e6, 1000, 1e-2).unwrap();
        assert_eq!(e.diagnosis, WeightClass::Neither);
        assert!((e.step_ratio_deviation - (std::f64::consts::E - 1.0)).abs() < 1e-9);
        assert!(classify(&Weight::log(), 1e3, 1000, 1e-2).is_err());
    }

    #[test]
    fn asym_examples() {
        let t = check_asym(&Weight::identity(), 1 << 12, 0.02).unwrap();
        assert!(t.points.iter().all(|&(_, r)| r == 1.0));
        let t = check_asym(&Weight::power(2.0).unwrap(), 10_000, 0.02).unwrap();
        assert!((t.final_ratio - 1.0).abs() <= 2e-4);
        assert!(close(t.final_ratio, 1.0 + 1e-4, 1e-12));
    }

    #[test]
    fn asym_for_log_matches_harmonic_oracle() {
        let n = 1_000_000u64;
        let t = check_asym(&Weight::log(), n, 0.02).unwrap();
        // independent oracle: H_{n+1} − 1 over log(1 + n), summed backwards
        let h: f64 = (2..=n + 1).rev().map(|k| 1.0 / k as f64).sum();
        assert!(close(t.final_ratio, h / (n as f64).ln_1p(), 1e-12));
        // slow convergence: 1 − ratio ≈ (1 − γ)/log n
        let gap = 1.0 - t.final_ratio;
        assert!((gap - (1.0 - 0.5772156649) / (n as f64).ln()).abs() < 1e-3);
    }

    #[test]
    fn asym_converges_for_catalog_except_log() {
        for w in catalog() {
            if w.declared_class() == WeightClass::Neither || w.name() == "log" {
                continue;
            }
            let t = check_asym(&w, 1 << 20, 0.02).unwrap();
            assert!(t.converged, "{}: final ratio {}", w.name(), t.final_ratio);
        }
    }

    #[test]
    fn log_derivative_traces() {
        let t = log_derivative_trace(&Weight::power(2.0).unwrap(), 1e4, 100).unwrap();
        assert!(close(t.tail_sup, 4e-4, 1e-12));
        let t = log_derivative_trace(&Weight::exp_sqrt(), 1e6, 100).unwrap();
        assert!(close(t.tail_sup, 1.0 / (2.0 * (5e5f64).sqrt()), 1e-9));
        let t = log_derivative_trace(&exponential(), 1e4, 50).unwrap();
        assert!(t.samples.iter().all(|s| (s.1 - 1.0).abs() < 1e-12));
    }

    #[test]
    fn bounded_custom_weight_rejected() {
        let c = 1.0 / (std::f64::consts::E - 1.0);
        let bounded = Weight::custom("bounded", move |x| c - (-x).exp(), |x| (-x).exp()).build();
        assert!(bounded.is_err());
        let ok = Weight::custom("sqrt-plus", |x| x.sqrt() + x, |x| 0.5 / x.sqrt() + 1.0).build();
        assert!(ok.is_ok());
    }

    fn near_breakpoint(w: &Weight, x: f64, h: f64) -> bool {
        w.as_piecewise_linear()
            .map(|p| (1..40).map(|n| p.breakpoint(n)).any(|b| (x - b).abs() <= 2.0 * h))
            .unwrap_or(false)
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_difference(idx in 0usize..10, u in 0.0f64..1.0) {
            let w = &catalog()[idx];
            let lo = (w.domain_start().max(1.0) * 1.01).ln();
            let x = (lo + u * (1e6f64.ln() - lo)).exp();
            let h = 1e-6 * x.max(1.0);
            prop_assume!(!near_breakpoint(w, x, h));
            let d = w.deriv(x);
            prop_assume!(d.is_ok() && w.value(x + h).is_ok());
            let d = d.unwrap();
            prop_assert!(d > 0.0);
            // forward quotient through logs, ψ(x)·(e^{Δlog ψ} − 1)/h, compared
            // with ψ′ at the middle of [x, x + h] where it is second-order
            // accurate (at x = h·10^6 the e^√x weights bend too much for a
            // first-order comparison at 10^-4).
            let dl = w.log_value(x + h).unwrap() - w.log_value(x).unwrap();
            let fd = (w.log_value(x).unwrap() + dl.exp_m1().ln() - h.ln()).exp();
            let mid = w.deriv(x + h / 2.0).unwrap();
            prop_assert!(close(fd, mid, 1e-4), "{}: x = {x}, fd = {fd}, deriv = {mid}", w.name());
        }

        #[test]
        fn log_evaluators_agree_with_direct(idx in 0usize..10, u in 0.0f64..1.0) {
            let w = &catalog()[idx];
            let lo = (w.domain_start() + 1.0).max(1.0).ln();
            let x = (lo + u * (1e8f64.ln() - lo)).exp();
            if let (Ok(v), Ok(d)) = (w.value(x), w.deriv(x)) {
                prop_assert!(close(w.log_value(x).unwrap().exp(), v, 1e-10));
                prop_assert!(close(w.log_deriv(x).unwrap().exp(), d, 1e-10));
            }
        }
    }
}
