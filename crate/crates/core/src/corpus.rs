//! The fixed set corpus the suites run over: progressions, primes, block
//! sets with seeded random octave patterns, and finite perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sets::IntegerSet;

/// Seeds of the random block sets in [`corpus`].
pub const BLOCK_SEEDS: std::ops::Range<u64> = 1..16;

/// Block set whose intervals span a random 0.3 to 2 octaves, separated by
/// random gaps of 0.3 to 2 octaves, starting between 2 and 8. Seeded, so
/// `random_block(s)` is the same set on every run.
pub fn random_block(seed: u64) -> IntegerSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: f64 = rng.gen_range(1.0..3.0);
    let mut intervals = Vec::new();
    let mut prev = 0u64;
    while e < 62.0 {
        let len: f64 = rng.gen_range(0.3..2.0);
        let gap: f64 = rng.gen_range(0.3..2.0);
        let lo = e.exp2().ceil() as u64;
        let hi = (e + len).min(63.0).exp2().ceil() as u64;
        if lo > prev && hi > lo {
            intervals.push((lo, hi));
            prev = hi;
        }
        e += len + gap;
    }
    IntegerSet::from_intervals(format!("block:random:{seed}"), intervals)
}

/// 100 elements below 10^4 drawn with a fixed seed.
pub fn perturbation(seed: u64) -> IntegerSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut v = Vec::with_capacity(100);
    while v.len() < 100 {
        let m = rng.gen_range(1..10_000u64);
        if !v.contains(&m) {
            v.push(m);
        }
    }
    IntegerSet::finite(v).expect("positive elements")
}

/// The 50-set corpus. `prime_limit` bounds the prime sieve and therefore
/// the largest N the corpus can be queried at.
pub fn corpus(prime_limit: u64) -> Result<Vec<IntegerSet>> {
    let mut sets = vec![IntegerSet::naturals()];
    for a in 2..=7u64 {
        for b in [0, 1, 3] {
            sets.push(IntegerSet::ap(a, b)?);
        }
    }
    let primes = IntegerSet::primes(prime_limit)?;
    sets.push(primes.clone());
    sets.push(IntegerSet::pow2_alternating());
    for seed in BLOCK_SEEDS {
        sets.push(random_block(seed));
    }
    // finite perturbations: add or remove 100 fixed elements
    let bases = [
        IntegerSet::evens(),
        IntegerSet::ap(3, 1)?,
        IntegerSet::ap(7, 3)?,
        primes,
        IntegerSet::pow2_alternating(),
        random_block(1),
        random_block(2),
    ];
    for (i, base) in bases.into_iter().enumerate() {
        let p = perturbation(i as u64);
        let added = format!("{}+p{i}", base.label());
        let removed = format!("{}-p{i}", base.label());
        sets.push(base.clone().union(p.clone()).relabel(added));
        sets.push(base.intersection(p.complement()).relabel(removed));
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let c = corpus(1 << 16).unwrap();
        assert_eq!(c.len(), 50);
        let mut labels: Vec<&str> = c.iter().map(IntegerSet::label).collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 50);
        for s in &c {
            s.membership(1 << 16).unwrap();
        }
    }

    #[test]
    fn random_blocks_are_reproducible_and_oscillate() {
        let a = random_block(3).membership(1 << 22).unwrap();
        let b = random_block(3).membership(1 << 22).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_block(4).membership(1 << 22).unwrap());
        // both members and non-members in every stretch of three octaves
        for j in 4..19 {
            let (lo, hi) = (1u64 << j, 1u64 << (j + 3));
            let c = a.count_up_to(hi) - a.count_up_to(lo);
            assert!(c > 0 && c < hi - lo, "octaves {j}..{}", j + 3);
        }
    }

    #[test]
    fn perturbations_change_at_most_100_elements() {
        let base = IntegerSet::evens();
        let p = perturbation(0);
        let plus = base.clone().union(p.clone()).membership(20_000).unwrap();
        let minus = base.clone().intersection(p.complement()).membership(20_000).unwrap();
        let b = base.membership(20_000).unwrap();
        assert!(plus.count() - b.count() <= 100 && plus.count() > b.count());
        assert!(b.count() - minus.count() <= 100 && minus.count() < b.count());
    }
}
