//! Sampling grids shared by the diagnostics.

/// `points` geometrically spaced samples from `start` to `end`, both
/// included. Extra points in `include` are merged in (sorted, deduplicated).
pub fn geometric(start: f64, end: f64, points: usize, include: &[f64]) -> Vec<f64> {
    debug_assert!(start > 0.0 && end >= start && points >= 2);
    let (ls, le) = (start.ln(), end.ln());
    let mut out: Vec<f64> = (0..points)
        .map(|i| {
            if i == 0 {
                start
            } else if i == points - 1 {
                end
            } else {
                (ls + (le - ls) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect();
    out.extend(include.iter().copied().filter(|&x| x >= start && x <= end));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Checkpoints `⌈2^(j/2)⌉`, j = 0, 1, ..., that do not exceed `n`, plus `n`
/// itself; distinct and increasing.
pub fn sqrt2_schedule(n: u64) -> Vec<u64> {
    schedule(n, 2)
}

/// Checkpoints `⌈2^(j/per_octave)⌉` up to `n`, plus `n`.
pub fn schedule(n: u64, per_octave: u32) -> Vec<u64> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for j in 0u32.. {
        let c = ceil_pow2_frac(j, per_octave);
        if c > n {
            break;
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// `⌈2^(j/d)⌉`, exact for d = 1, 2 and correct to within rounding otherwise.
fn ceil_pow2_frac(j: u32, d: u32) -> u64 {
    let (q, r) = (j / d, j % d);
    if q >= 64 {
        return u64::MAX;
    }
    if r == 0 {
        return 1u64 << q;
    }
    if d == 2 {
        // ⌈sqrt(2^j)⌉ for odd j: 2^j is never a perfect square
        return u64::try_from((1u128 << j).isqrt() + 1).unwrap_or(u64::MAX);
    }
    let v = (j as f64 / d as f64).exp2().ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}
