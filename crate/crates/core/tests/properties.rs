use proptest::prelude::*;

use psidensity::series::abel_density;
use psidensity::weights::catalog;
use psidensity::{density_estimate, partial_sums, EstimateOptions, IntegerSet, Weight};

fn ap_union() -> impl Strategy<Value = IntegerSet> {
    proptest::collection::vec((1u64..12, 0u64..12), 1..4).prop_map(|v| {
        v.into_iter()
            .map(|(a, b)| IntegerSet::ap(a, b).unwrap())
            .reduce(IntegerSet::union)
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ratios_stay_in_unit_interval(set in ap_union(), idx in 0usize..10) {
        let w = &catalog()[idx];
        let s = partial_sums(&set, w, 1 << 14, None).unwrap();
        for c in &s.checkpoints {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c.ratio), "{} at {}", c.ratio, c.n);
        }
    }

    #[test]
    fn complement_ratios_sum_to_one(set in ap_union(), idx in 0usize..10) {
        let w = &catalog()[idx];
        let a = partial_sums(&set, w, 1 << 14, None).unwrap();
        let b = partial_sums(&set.clone().complement(), w, 1 << 14, None).unwrap();
        for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
            prop_assert!((x.ratio + y.ratio - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn subsets_have_smaller_ratios(set in ap_union(), extra in ap_union(), idx in 0usize..10) {
        let w = &catalog()[idx];
        let small = partial_sums(&set, w, 1 << 13, None).unwrap();
        let big = partial_sums(&set.union(extra), w, 1 << 13, None).unwrap();
        for (x, y) in small.checkpoints.iter().zip(&big.checkpoints) {
            prop_assert!(x.ratio <= y.ratio * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn bracket_contains_point(a in 1u64..20, b in 0u64..20, q in 0.1f64..3.0) {
        let w = Weight::power(q).unwrap();
        let e = density_estimate(&IntegerSet::ap(a, b).unwrap(), &w, 1 << 14, &EstimateOptions::default()).unwrap();
        prop_assert!(e.lower <= e.point && e.point <= e.upper);
        prop_assert!(e.converged == (e.upper - e.lower <= e.tol));
    }

    #[test]
    fn abel_matches_geometric_series(a in 1u64..9, b in 0u64..9, x in 0.9f64..0.999) {
        let got = abel_density(&IntegerSet::ap(a, b).unwrap(), &[x], 1e-14).unwrap().grid[0].value;
        let want = (1.0 - x) * x.powi((a + b) as i32) / (1.0 - x.powi(a as i32));
        prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}
