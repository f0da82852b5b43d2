//! Analytic density (Dirichlet series as p → 1⁺) and Abel density (power
//! series as x → 1⁻) from truncated sums.
//!
//! Analytic values carry a modelled tail: past the truncation N the set is
//! assumed to have the density d̂ it shows on `(N/2, N]`, so
//!
//! ```text
//!   (p−1)·Σ_{n ≤ N, n ∈ A} n^{−p}  +  d̂·N^{1−p}
//! ```
//!
//! and the reported `tail_bound` is `(|d̂ − d̂′| + 2/N)·N^{1−p}`, where d̂′ is
//! the density on `(N/4, N/2]`. For arithmetic progressions d̂ is exact up to
//! the `2/N` rounding term.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sets::{IntegerSet, Membership};
use crate::sum::CompensatedSum;

/// Default analytic grid.
pub const DEFAULT_P_GRID: [f64; 5] = [1.2, 1.1, 1.05, 1.02, 1.01];
/// Default Abel grid.
pub const DEFAULT_X_GRID: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Abel,
}

/// Normalisation of the Dirichlet series: `(p − 1)` or `1/ζ(p)`. Their
/// ratio `(p−1)ζ(p)` tends to 1 as p → 1⁺.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    PMinusOne,
    InverseZeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    /// p for analytic, x for Abel.
    pub param: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub value: f64,
    /// Normalised tail correction included in `value` (0 for Abel).
    pub tail_correction: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDensityEstimate {
    pub method: Method,
    pub set: String,
    pub grid: Vec<GridPoint>,
    pub extrapolated: f64,
    /// Uncertainty of `extrapolated` propagated from the grid tail bounds.
    pub extrapolated_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    pub flags: Vec<String>,
}

/// ζ(s) for real s > 1 by Euler–Maclaurin summation (20 terms plus six
/// Bernoulli corrections); relative error below 1e-15 on (1, 4].
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const N: f64 = 20.0;
    // B_{2k}/(2k)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut acc = CompensatedSum::new();
    for n in 1..20 {
        acc.add((n as f64).powf(-s));
    }
    acc.add(N.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * N.powf(-s));
    // rising factorial s(s+1)...(s+2k−2) times N^{−s−2k+1}
    let mut rising = s;
    let mut power = N.powf(-s - 1.0);
    for (k, b) in B.iter().enumerate() {
        acc.add(b * rising * power);
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= N * N;
    }
    acc.value()
}

fn check_p_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(invalid("analytic grid is empty"));
    }
    if let Some(p) = grid.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
        return Err(invalid(format!("analytic grid values must exceed 1, got {p}")));
    }
    let mut g = grid.to_vec();
    g.sort_by(|a, b| b.total_cmp(a));
    g.dedup();
    Ok(g)
}

fn check_x_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(invalid("Abel grid is empty"));
    }
    if let Some(x) = grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(invalid(format!("Abel grid values must lie in (0, 1), got {x}")));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Running Dirichlet sums Σ n^{−p} over the members seen so far, one per p.
struct DirichletSums {
    ps: Vec<f64>,
    sums: Vec<CompensatedSum>,
    upto: u64,
}

impl DirichletSums {
    fn new(ps: &[f64]) -> Self {
        Self {
            ps: ps.to_vec(),
            sums: vec![CompensatedSum::new(); ps.len()],
            upto: 0,
        }
    }

    fn extend(&mut self, members: &Membership, n: u64) {
        for m in members.iter_range(self.upto + 1, n) {
            let l = (m as f64).ln();
            for (s, p) in self.sums.iter_mut().zip(&self.ps) {
                s.add((-p * l).exp());
            }
        }
        self.upto = n;
    }
}

/// Empirical densities on `(N/2, N]` and `(N/4, N/2]`.
fn tail_densities(members: &Membership, n: u64) -> (f64, f64) {
    let (h, q) = (n / 2, n / 4);
    let c = |lo: u64, hi: u64| {
        if hi <= lo {
            0.0
        } else {
            (members.count_up_to(hi) - members.count_up_to(lo)) as f64 / (hi - lo) as f64
        }
    };
    (c(h, n), c(q, h))
}

fn analytic_point(sum: f64, p: f64, n: u64, d: f64, d_prior: f64, norm: Normalization) -> GridPoint {
    let nf = n as f64;
    let decay = nf.powf(1.0 - p);
    // (p − 1)-normalised pieces
    let tail = d * decay;
    let bound = ((d - d_prior).abs() + 2.0 / nf) * decay;
    let scale = match norm {
        Normalization::PMinusOne => 1.0,
        Normalization::InverseZeta => 1.0 / ((p - 1.0) * zeta(p)),
    };
    GridPoint {
        param: p,
        n,
        value: ((p - 1.0) * sum + tail) * scale,
        tail_correction: tail * scale,
        tail_bound: bound * scale,
    }
}

fn extrapolate_linear(grid: &[GridPoint]) -> (f64, f64) {
    // grid sorted with the limit point last
    match grid {
        [] => (f64::NAN, f64::NAN),
        [only] => (only.value, only.tail_bound),
        [.., b, a] => {
            // a is closest to p = 1
            let r = (a.param - 1.0) / (b.param - a.param);
            (
                a.value - r * (b.value - a.value),
                a.tail_bound * (1.0 + r) + b.tail_bound * r,
            )
        }
    }
}

fn drift_flag(d: f64, d_prior: f64, n: u64) -> Option<String> {
    ((d - d_prior).abs() > 0.05).then(|| {
        format!(
            "empirical density moved from {d_prior:.4} on (N/4, N/2] to {d:.4} on (N/2, N] at N = {n}; \
             the tail model is unreliable for this set"
        )
    })
}

/// Options for [`analytic_density`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOptions {
    pub grid: Vec<f64>,
    /// Target for each grid point's tail bound.
    pub tol: f64,
    pub normalization: Normalization,
    /// Largest truncation the search may use (also capped by the set's
    /// query limit).
    pub max_n: u64,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_P_GRID.to_vec(),
            tol: 1e-4,
            normalization: Normalization::PMinusOne,
            max_n: 1 << 26,
        }
    }
}

/// Analytic density with the truncation chosen per grid point: N doubles
/// from 2^12 until the tail bound is at most `tol`. Extrapolated linearly
/// in (p − 1) from the two grid points closest to 1.
pub fn analytic_density(set: &IntegerSet, opts: &AnalyticOptions) -> Result<SeriesDensityEstimate> {
    let grid = check_p_grid(&opts.grid)?;
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let cap = opts.max_n.min(set.query_limit());
    let mut sums = DirichletSums::new(&grid);
    let mut done: Vec<Option<GridPoint>> = vec![None; grid.len()];
    let mut flags = Vec::new();
    let mut n = 1u64 << 12;
    let mut last_seen: Vec<GridPoint> = Vec::new();
    loop {
        let members = set.membership(n)?;
        sums.extend(&members, n);
        let (d, dp) = tail_densities(&members, n);
        last_seen.clear();
        for (i, &p) in grid.iter().enumerate() {
            let pt = analytic_point(sums.sums[i].value(), p, n, d, dp, opts.normalization);
            if done[i].is_none() && pt.tail_bound <= opts.tol {
                if let Some(f) = drift_flag(d, dp, n) {
                    flags.push(f);
                }
                done[i] = Some(pt);
            }
            last_seen.push(pt);
        }
        if done.iter().all(Option::is_some) {
            break;
        }
        if n.saturating_mul(2) > cap {
            let (i, pt) = done
                .iter()
                .zip(&last_seen)
                .enumerate()
                .find_map(|(i, (d, pt))| d.is_none().then_some((i, *pt)))
                .expect("some grid point is unfinished");
            // bound ~ N^{−p} (or N^{1−p}): the truncation that would reach tol
            let exponent = (grid[i] - 1.0).max(1e-3);
            let wanted = n as f64 * (pt.tail_bound / opts.tol).powf(1.0 / exponent);
            return Err(Error::OutOfRange {
                what: format!(
                    "analytic density of `{}` at p = {} (tail bound {:.3e} at N = {n})",
                    set.label(),
                    grid[i],
                    pt.tail_bound
                ),
                requested: if wanted >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    wanted as u64
                },
                limit: cap,
            });
        }
        n *= 2;
    }
    let points: Vec<GridPoint> = done.into_iter().map(Option::unwrap).collect();
    let (extrapolated, extrapolated_bound) = extrapolate_linear(&points);
    flags.dedup();
    Ok(SeriesDensityEstimate {
        method: Method::Analytic,
        set: set.label().to_string(),
        grid: points,
        extrapolated,
        extrapolated_bound,
        normalization: Some(opts.normalization),
        flags,
    })
}

/// Analytic grid at one fixed truncation `n`, tail bounds reported as they
/// come out.
pub fn analytic_at(
    set: &IntegerSet,
    grid: &[f64],
    n: u64,
    normalization: Normalization,
) -> Result<SeriesDensityEstimate> {
    let grid = check_p_grid(grid)?;
    if n < 4 {
        return Err(invalid(format!("analytic truncation must be >= 4, got {n}")));
    }
    let members = set.membership(n)?;
    analytic_from_members(set.label(), &members, &grid, normalization)
}

pub(crate) fn analytic_from_members(
    label: &str,
    members: &Membership,
    grid: &[f64],
    normalization: Normalization,
) -> Result<SeriesDensityEstimate> {
    let grid = check_p_grid(grid)?;
    let n = members.bound();
    let mut sums = DirichletSums::new(&grid);
    sums.extend(members, n);
    let (d, dp) = tail_densities(members, n);
    let points: Vec<GridPoint> = grid
        .iter()
        .enumerate()
        .map(|(i, &p)| analytic_point(sums.sums[i].value(), p, n, d, dp, normalization))
        .collect();
    let (extrapolated, extrapolated_bound) = extrapolate_linear(&points);
    Ok(SeriesDensityEstimate {
        method: Method::Analytic,
        set: label.to_string(),
        grid: points,
        extrapolated,
        extrapolated_bound,
        normalization: Some(normalization),
        flags: drift_flag(d, dp, n).into_iter().collect(),
    })
}

/// Truncation used for Abel parameter x: the dropped tail x^{N+1} is at
/// most `rel_tail`.
pub fn abel_truncation(x: f64, rel_tail: f64) -> u64 {
    (rel_tail.ln() / x.ln()).ceil() as u64
}

/// Abel density: `(1 − x)·Σ_{n ≤ N} x^n χ_A(n)` on a grid of x → 1⁻; the
/// extrapolated value is the last grid value.
pub fn abel_density(set: &IntegerSet, grid: &[f64], rel_tail: f64) -> Result<SeriesDensityEstimate> {
    let grid = check_x_grid(grid)?;
    if !(rel_tail > 0.0 && rel_tail < 1.0) {
        return Err(invalid(format!("relative tail must lie in (0, 1), got {rel_tail}")));
    }
    let n_max = abel_truncation(grid[grid.len() - 1], rel_tail);
    if n_max > set.query_limit() {
        return Err(Error::OutOfRange {
            what: format!("Abel density of `{}`", set.label()),
            requested: n_max,
            limit: set.query_limit(),
        });
    }
    let members = set.membership(n_max)?;
    let points: Vec<GridPoint> = grid
        .iter()
        .map(|&x| {
            let n = abel_truncation(x, rel_tail);
            GridPoint {
                param: x,
                n,
                value: abel_partial(&members, x, n),
                tail_correction: 0.0,
                tail_bound: rel_tail,
            }
        })
        .collect();
    let last = points[points.len() - 1];
    Ok(SeriesDensityEstimate {
        method: Method::Abel,
        set: set.label().to_string(),
        grid: points,
        extrapolated: last.value,
        extrapolated_bound: last.tail_bound,
        normalization: None,
        flags: Vec::new(),
    })
}

/// `(1 − x)·Σ_{n ≤ N, n ∈ A} x^n`.
pub fn abel_partial(members: &Membership, x: f64, n: u64) -> f64 {
    let lx = x.ln();
    let mut acc = CompensatedSum::new();
    for m in members.iter_range(1, n) {
        acc.add((m as f64 * lx).exp());
    }
    (1.0 - x) * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn zeta_reference_values() {
        // mpmath.zeta at 30 digits
        let cases = [
            (2.0, 1.644934066848226436472415166646),
            (1.5, 2.612375348685488343348567567924),
            (1.2, 5.591582441177751883613671261500),
            (1.01, 100.5779433384967836730860573130),
            (3.0, 1.202056903159594285399738161511),
        ];
        for (s, z) in cases {
            assert!((zeta(s) - z).abs() <= 2e-15 * z, "zeta({s}) = {} vs {z}", zeta(s));
        }
    }

    #[test]
    fn naturals_analytic() {
        let e = analytic_density(&IntegerSet::naturals(), &AnalyticOptions::default()).unwrap();
        let last = e.grid.last().unwrap();
        assert_eq!(last.param, 1.01);
        assert!((last.value - 1.0058).abs() < 1e-2);
        assert!((last.value - 0.01 * zeta(1.01)).abs() < 1e-4);
        assert!(e.grid.windows(2).all(|w| w[0].param > w[1].param));
        assert!((e.extrapolated - 1.0).abs() < 1e-3);
    }

    #[test]
    fn evens_analytic() {
        let e = analytic_density(&IntegerSet::evens(), &AnalyticOptions::default()).unwrap();
        let last = e.grid.last().unwrap();
        let oracle = 2f64.powf(-1.01) * 0.01 * zeta(1.01);
        assert!((last.value - oracle).abs() < 1e-3);
        assert!((e.extrapolated - 0.5).abs() < 5e-3);
    }

    #[test]
    fn empty_set_is_zero() {
        let e = analytic_density(&IntegerSet::empty(), &AnalyticOptions::default()).unwrap();
        assert!(e.grid.iter().all(|g| g.value == 0.0));
        let a = abel_density(&IntegerSet::empty(), &DEFAULT_X_GRID, 1e-14).unwrap();
        assert!(a.grid.iter().all(|g| g.value == 0.0));
    }

    #[test]
    fn normalizations_agree_in_the_limit() {
        let z = AnalyticOptions {
            normalization: Normalization::InverseZeta,
            ..AnalyticOptions::default()
        };
        let a = analytic_density(&IntegerSet::ap(3, 1).unwrap(), &AnalyticOptions::default()).unwrap();
        let b = analytic_density(&IntegerSet::ap(3, 1).unwrap(), &z).unwrap();
        for (x, y) in a.grid.iter().zip(&b.grid) {
            let p = x.param;
            assert!((x.value / y.value - (p - 1.0) * zeta(p)).abs() < 1e-9);
        }
        assert!((a.extrapolated - b.extrapolated).abs() < 5e-3);
    }

    #[test]
    fn out_of_range_reports_wanted_truncation() {
        let primes = IntegerSet::primes(1 << 16).unwrap();
        match analytic_density(&primes, &AnalyticOptions::default()) {
            Err(Error::OutOfRange { requested, limit, .. }) => {
                assert_eq!(limit, 1 << 16);
                assert!(requested > limit);
            }
            other => panic!("expected out-of-range, got {other:?}"),
        }
        assert!(analytic_density(
            &IntegerSet::evens(),
            &AnalyticOptions {
                grid: vec![1.0],
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn abel_closed_forms() {
        let x = 0.999;
        let e = abel_density(&IntegerSet::evens(), &[x], 1e-14).unwrap();
        assert!((e.grid[0].value - x * x / (1.0 + x)).abs() < 1e-9);
        assert!((e.grid[0].value - 0.4992501250625313).abs() < 1e-9);
        let e = abel_density(&IntegerSet::naturals(), &[0.99], 1e-14).unwrap();
        assert!((e.grid[0].value - 0.99).abs() < 1e-12);
        let e = abel_density(&IntegerSet::ap(3, 0).unwrap(), &[x], 1e-14).unwrap();
        assert!((e.grid[0].value - (1.0 - x) * x.powi(3) / (1.0 - x.powi(3))).abs() < 1e-9);
        assert!(abel_density(&IntegerSet::evens(), &[1.0], 1e-14).is_err());
    }

    #[test]
    fn abel_is_monotone_in_truncation() {
        let set = IntegerSet::pow2_alternating();
        let members = set.membership(20_000).unwrap();
        let mut prev = 0.0;
        for n in (0..=20_000).step_by(250) {
            let v = abel_partial(&members, 0.999, n);
            assert!(v >= prev);
            prev = v;
        }
    }
}
