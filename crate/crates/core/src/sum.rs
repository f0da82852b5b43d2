//! Streaming accumulators used by every estimator in the crate.
//!
//! [`CompensatedSum`] is Neumaier's variant of Kahan summation: the running
//! error term also survives an addend that is larger than the partial sum,
//! which happens constantly for convex weights. [`LogSum`] accumulates terms
//! given by their logarithms, keeping a running maximum as the scale so the
//! scaled partial sum never overflows.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Multiplies the accumulated value by `factor`.
    #[inline]
    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Terms are allowed to exceed the current scale by this many nats before
/// the accumulator is rescaled. e^64 leaves plenty of headroom below
/// `f64::MAX` even after 10^12 additions.
const RESCALE_MARGIN: f64 = 64.0;

/// Sum of `exp(l_k)` for a stream of logarithms `l_k`, reported as a
/// logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSum {
    scale: f64,
    scaled: CompensatedSum,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub const fn new() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            scaled: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if self.scale == f64::NEG_INFINITY {
            self.scale = log_term;
        } else if log_term > self.scale + RESCALE_MARGIN {
            self.scaled.scale((self.scale - log_term).exp());
            self.scale = log_term;
        }
        self.scaled.add((log_term - self.scale).exp());
    }

    /// Logarithm of the accumulated sum; `-inf` when nothing was added.
    #[inline]
    pub fn log_value(&self) -> f64 {
        if self.scale == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.scaled.value().ln() + self.scale
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when equal.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b || a.is_nan() || b.is_nan());
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d > -std::f64::consts::LN_2 {
        a + (-d.exp_m1()).ln()
    } else {
        a + (-d.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-22);
    }

    #[test]
    fn neumaier_handles_large_addend() {
        let acc: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn log_sum_of_nothing_is_neg_infinity() {
        assert_eq!(LogSum::new().log_value(), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_survives_overflowing_terms() {
        let mut acc = LogSum::new();
        for k in 1..=1000 {
            acc.add_log(k as f64);
        }
        // sum e^k for k = 1..1000 = e^1000 * (1 - e^-1000) / (1 - e^-1)
        let expected = 1000.0 - (-(-1.0f64).exp()).ln_1p();
        assert!((acc.log_value() - expected).abs() < 1e-12);
    }

    #[test]
    fn log_sub_exp_near_cancellation() {
        let a: f64 = 5.0;
        let b: f64 = 5.0 - 1e-12;
        let direct = a.exp() - b.exp();
        assert!((log_sub_exp(a, b) - direct.ln()).abs() < 1e-3);
        assert_eq!(log_sub_exp(a, a), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn log_sum_matches_direct(terms in proptest::collection::vec(-30.0f64..30.0, 1..200)) {
            let mut acc = LogSum::new();
            let mut direct = CompensatedSum::new();
            for &t in &terms {
                acc.add_log(t);
                direct.add(t.exp());
            }
            prop_assert!((acc.log_value() - direct.value().ln()).abs() < 1e-12);
        }

        #[test]
        fn log_add_exp_is_symmetric(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let lhs = log_add_exp(a, b);
            prop_assert_eq!(lhs, log_add_exp(b, a));
            prop_assert!((lhs - (a.exp() + b.exp()).ln()).abs() < 1e-12);
        }
    }
}
