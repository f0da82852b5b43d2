//! Streaming partial sums A_ψ(n) = Σ_{k ≤ n, k ∈ A} ψ′(k) and tail-window
//! brackets of the ratio A_ψ(n) / Σ_{k ≤ n} ψ′(k).
//!
//! The bracket `[lower, upper]` is the min/max of the checkpointed ratio over
//! `n ≥ window·N`. It is a finite-truncation stand-in for [liminf, limsup];
//! nothing is extrapolated here.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::sets::{IntegerSet, Membership};
use crate::sum::{CompensatedSum, LogSum};
use crate::weights::{Weight, WeightClass};

/// One checkpoint of a [`DensitySeries`]. In log space `numerator` and
/// `denominator` hold logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub n: u64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySeries {
    pub set: String,
    pub weight: String,
    pub log_space: bool,
    pub checkpoints: Vec<Checkpoint>,
}

impl DensitySeries {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }
}

/// Options for [`density_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateOptions {
    /// Tail window is `[window·N, N]`.
    pub window: f64,
    /// `converged` when `upper − lower <= tol`.
    pub tol: f64,
    /// Checkpoints per doubling of n (2 gives the `⌈2^(j/2)⌉` schedule).
    pub per_octave: u32,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            window: 0.5,
            tol: 0.02,
            per_octave: 2,
        }
    }
}

impl EstimateOptions {
    fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.window < 1.0) {
            return Err(invalid(format!(
                "window fraction must lie in (0, 1), got {}",
                self.window
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(invalid(format!("tolerance must be >= 0, got {}", self.tol)));
        }
        if self.per_octave == 0 {
            return Err(invalid("checkpoints per octave must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub set: String,
    pub weight: String,
    pub lower: f64,
    pub upper: f64,
    /// Ratio at the final checkpoint.
    pub point: f64,
    pub n: u64,
    pub window_start: u64,
    pub converged: bool,
    pub tol: f64,
    /// Bracket over the preceding window `[window²·N, window·N)` (disjoint
    /// from the tail window), used to measure how much the bracket still
    /// moves.
    pub prior_lower: f64,
    pub prior_upper: f64,
    pub warnings: Vec<String>,
}

impl DensityEstimate {
    /// Builds the tail-window bracket from checkpoints `(n, ratio)`.
    pub fn from_ratios(set: &str, weight: &str, points: &[(u64, f64)], window: f64, tol: f64) -> Result<Self> {
        let &(n, point) = points
            .last()
            .ok_or_else(|| invalid("no checkpoints to estimate from"))?;
        let start = (window * n as f64).ceil() as u64;
        let prior_start = (window * window * n as f64).ceil() as u64;
        let bracket = |lo: u64, hi: u64| {
            points
                .iter()
                .filter(|(m, _)| *m >= lo && *m <= hi)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, r)| {
                    (a.min(r), b.max(r))
                })
        };
        let (lower, upper) = bracket(start, n);
        let (mut prior_lower, mut prior_upper) = bracket(prior_start, start.saturating_sub(1));
        if !prior_lower.is_finite() {
            (prior_lower, prior_upper) = (lower, upper);
        }
        Ok(Self {
            set: set.to_string(),
            weight: weight.to_string(),
            lower,
            upper,
            point,
            n,
            window_start: start,
            converged: upper - lower <= tol,
            tol,
            prior_lower,
            prior_upper,
            warnings: Vec::new(),
        })
    }

    pub fn from_series(series: &DensitySeries, opts: &EstimateOptions) -> Result<Self> {
        let pts: Vec<(u64, f64)> = series.checkpoints.iter().map(|c| (c.n, c.ratio)).collect();
        Self::from_ratios(&series.set, &series.weight, &pts, opts.window, opts.tol)
    }

    /// Movement of the lower endpoint between the prior and the tail window.
    pub fn lower_drift(&self) -> f64 {
        (self.lower - self.prior_lower).abs()
    }

    pub fn upper_drift(&self) -> f64 {
        (self.upper - self.prior_upper).abs()
    }

    /// Remaining movement of the lower endpoint if it converges like
    /// `c/log N`: the window-to-window drift times `log2 N`.
    pub fn lower_uncertainty(&self) -> f64 {
        self.lower_drift() * (self.n as f64).log2()
    }

    pub fn upper_uncertainty(&self) -> f64 {
        self.upper_drift() * (self.n as f64).log2()
    }
}

/// Precomputed ψ′(k) (or log ψ′(k)) for `k = first..=n`, so that many sets
/// can be scanned against one weight without re-evaluating it.
#[derive(Debug, Clone)]
pub struct WeightTable {
    weight: Weight,
    first: u64,
    n: u64,
    log_space: bool,
    terms: Vec<f64>,
}

impl WeightTable {
    pub fn new(weight: &Weight, n: u64) -> Result<Self> {
        let first = weight.first_index();
        let log_space = weight.prefers_log_space();
        let len = n.saturating_sub(first - 1) as usize;
        let mut terms = Vec::with_capacity(len);
        for k in first..=n {
            let x = k as f64;
            terms.push(if log_space {
                weight.log_deriv(x)?
            } else {
                weight.deriv(x)?
            });
        }
        Ok(Self {
            weight: weight.clone(),
            first,
            n,
            log_space,
            terms,
        })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn bound(&self) -> u64 {
        self.n
    }

    pub fn log_space(&self) -> bool {
        self.log_space
    }

    /// ψ′(k), or log ψ′(k) in log space.
    #[inline]
    pub fn term(&self, k: u64) -> f64 {
        self.terms[(k - self.first) as usize]
    }

    /// The density series of the set given by `members` at `schedule`
    /// (increasing, last point at most the table bound).
    pub fn series(&self, set: &str, members: &Membership, schedule: &[u64]) -> Result<DensitySeries> {
        let n = *schedule.last().ok_or_else(|| invalid("empty checkpoint schedule"))?;
        if n > self.n || n > members.bound() {
            return Err(Error::OutOfRange {
                what: format!("density series of `{set}`"),
                requested: n,
                limit: self.n.min(members.bound()),
            });
        }
        let checkpoints = accumulate(
            &self.weight,
            self.first,
            self.log_space,
            schedule,
            |k| members.contains(k),
            |k| Ok(self.term(k)),
        )?;
        Ok(DensitySeries {
            set: set.to_string(),
            weight: self.weight.name().to_string(),
            log_space: self.log_space,
            checkpoints,
        })
    }
}

/// The single streaming pass behind every series: k = first..=N in order,
/// compensated (or log-sum-exp) accumulation of numerator and denominator.
fn accumulate(
    weight: &Weight,
    first: u64,
    log_space: bool,
    schedule: &[u64],
    member: impl Fn(u64) -> bool,
    mut term: impl FnMut(u64) -> Result<f64>,
) -> Result<Vec<Checkpoint>> {
    let n = schedule.last().copied().unwrap_or(0);
    let mut out = Vec::with_capacity(schedule.len());
    let mut marks = schedule.iter().copied().filter(|&m| m >= first).peekable();
    if log_space {
        let (mut num, mut den) = (LogSum::new(), LogSum::new());
        for k in first..=n {
            let t = term(k)?;
            den.add_log(t);
            if member(k) {
                num.add_log(t);
            }
            if marks.peek() == Some(&k) {
                marks.next();
                let (ln, ld) = (num.log_value(), den.log_value());
                out.push(Checkpoint {
                    n: k,
                    numerator: ln,
                    denominator: ld,
                    ratio: (ln - ld).exp(),
                });
            }
        }
    } else {
        let (mut num, mut den) = (CompensatedSum::new(), CompensatedSum::new());
        for k in first..=n {
            let t = term(k)?;
            den.add(t);
            if member(k) {
                num.add(t);
            }
            if marks.peek() == Some(&k) {
                marks.next();
                let (a, d) = (num.value(), den.value());
                if !d.is_finite() {
                    return Err(Error::NumericRange {
                        weight: weight.name().to_string(),
                        detail: format!("Σψ′ overflowed before n = {k}"),
                    });
                }
                out.push(Checkpoint {
                    n: k,
                    numerator: a,
                    denominator: d,
                    ratio: a / d,
                });
            }
        }
    }
    Ok(out)
}

/// Streams A_ψ(n) and Σψ′(k) up to `n`, emitting checkpoints at `schedule`
/// (default `⌈2^(j/2)⌉` plus `n`). Checkpoints below the weight's first
/// index are skipped.
pub fn partial_sums(set: &IntegerSet, weight: &Weight, n: u64, schedule: Option<&[u64]>) -> Result<DensitySeries> {
    if n == 0 {
        return Err(invalid("truncation N must be >= 1"));
    }
    let default;
    let schedule = match schedule {
        Some(s) => {
            if s.windows(2).any(|w| w[0] >= w[1]) || s.last() != Some(&n) {
                return Err(invalid("checkpoint schedule must be increasing and end at N"));
            }
            s
        }
        None => {
            default = grid::sqrt2_schedule(n);
            &default
        }
    };
    let members = set.membership(n)?;
    let log_space = weight.prefers_log_space();
    let checkpoints = accumulate(
        weight,
        weight.first_index(),
        log_space,
        schedule,
        |k| members.contains(k),
        |k| {
            let x = k as f64;
            if log_space {
                weight.log_deriv(x)
            } else {
                weight.deriv(x)
            }
        },
    )?;
    Ok(DensitySeries {
        set: set.label().to_string(),
        weight: weight.name().to_string(),
        log_space,
        checkpoints,
    })
}

/// Lower/upper bracket of the ψ-density ratio over the tail window.
pub fn density_estimate(set: &IntegerSet, weight: &Weight, n: u64, opts: &EstimateOptions) -> Result<DensityEstimate> {
    opts.validate()?;
    let schedule = grid::schedule(n, opts.per_octave);
    let series = partial_sums(set, weight, n, Some(&schedule))?;
    DensityEstimate::from_series(&series, opts)
}

fn check_sequence(v: &[u64]) -> Result<()> {
    if v.first() == Some(&0) {
        return Err(invalid("sequence terms must be positive integers"));
    }
    if let Some(i) = v.windows(2).position(|w| w[0] >= w[1]) {
        return Err(invalid(format!(
            "sequence must be strictly increasing, but v_{} = {} >= v_{} = {}",
            i + 1,
            v[i],
            i + 2,
            v[i + 1]
        )));
    }
    Ok(())
}

/// Estimates the ψ-density of `{v_n}` through `S_ψ(v_n)/ψ(v_n)` with
/// `S_ψ(v_n) = Σ_{k ≤ n} ψ′(v_k)`, using the first `m` terms.
///
/// For D2 weights the ratio ψ′(v_n)/ψ(n) should tend to 0; when the
/// measured trace does not, a warning is attached (the condition is
/// sufficient, not necessary).
pub fn density_via_subsequence(
    v: impl IntoIterator<Item = u64>,
    weight: &Weight,
    m: u64,
    opts: &EstimateOptions,
) -> Result<DensityEstimate> {
    opts.validate()?;
    let terms: Vec<u64> = v.into_iter().take(m as usize).collect();
    if (terms.len() as u64) < m || m == 0 {
        return Err(invalid(format!(
            "sequence supplied {} terms, {m} requested",
            terms.len()
        )));
    }
    check_sequence(&terms)?;
    if (terms[0] as f64) < weight.domain_start() {
        return Err(Error::OutOfDomain {
            weight: weight.name().to_string(),
            x: terms[0] as f64,
        });
    }
    let schedule = grid::schedule(m, opts.per_octave);
    let log_space = weight.prefers_log_space();
    let mut points = Vec::with_capacity(schedule.len());
    let mut hypothesis = Vec::new();
    let mut marks = schedule.iter().copied().peekable();
    let (mut lin, mut lg) = (CompensatedSum::new(), LogSum::new());
    for (i, &vk) in terms.iter().enumerate() {
        let n = i as u64 + 1;
        let x = vk as f64;
        if log_space {
            lg.add_log(weight.log_deriv(x)?);
        } else {
            lin.add(weight.deriv(x)?);
        }
        if marks.peek() == Some(&n) {
            marks.next();
            let ratio = if log_space {
                (lg.log_value() - weight.log_value(x)?).exp()
            } else {
                lin.value() / weight.value(x)?
            };
            points.push((n, ratio));
            let nf = n as f64;
            if nf >= weight.domain_start() && weight.log_value(nf)?.is_finite() {
                hypothesis.push((weight.log_deriv(x)? - weight.log_value(nf)?).exp());
            }
        }
    }
    let label = format!("v_n ({m} terms)");
    let mut est = DensityEstimate::from_ratios(&label, weight.name(), &points, opts.window, opts.tol)?;
    if weight.declared_class() == WeightClass::D2 {
        let q = hypothesis.len() - hypothesis.len() / 4;
        let tail = &hypothesis[q.saturating_sub(1)..];
        let last = hypothesis.last().copied().unwrap_or(f64::NAN);
        let decreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
        if !(last < 0.05 && decreasing) {
            est.warnings.push(format!(
                "ψ′(v_n)/ψ(n) does not appear to tend to 0 (last value {last:.3e}); \
                 the subsequence estimate is not guaranteed to match the ψ-density"
            ));
        }
    }
    Ok(est)
}

/// Bracket of `n / v_n` over the tail window: the asymptotic density of
/// `{v_n}` read off the sequence itself.
pub fn seq_density(v: impl IntoIterator<Item = u64>, m: u64, opts: &EstimateOptions) -> Result<DensityEstimate> {
    opts.validate()?;
    let terms: Vec<u64> = v.into_iter().take(m as usize).collect();
    if (terms.len() as u64) < m || m == 0 {
        return Err(invalid(format!(
            "sequence supplied {} terms, {m} requested",
            terms.len()
        )));
    }
    check_sequence(&terms)?;
    let points: Vec<(u64, f64)> = grid::schedule(m, opts.per_octave)
        .into_iter()
        .map(|n| (n, n as f64 / terms[(n - 1) as usize] as f64))
        .collect();
    DensityEstimate::from_ratios(&format!("v_n ({m} terms)"), "count", &points, opts.window, opts.tol)
}
