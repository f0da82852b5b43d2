//! Odd-only, bit-packed sieve of Eratosthenes with per-word prefix counts.
//!
//! Bit `i` stands for the odd number `2i + 1`. `prefix[w]` holds the number
//! of odd primes in words `0..w`, so a prime count up to any bound is one
//! table lookup plus one popcount.

use crate::error::{invalid, Error, Result};

/// Largest supported sieve limit (about 512 MiB of bits).
pub const MAX_LIMIT: u64 = 1 << 33;

#[derive(Debug, Clone)]
pub struct Sieve {
    limit: u64,
    words: Vec<u64>,
    prefix: Vec<u64>,
}

impl Sieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(invalid(format!("sieve limit must be at least 2, got {limit}")));
        }
        if limit > MAX_LIMIT {
            return Err(Error::OutOfRange {
                what: "sieve limit".into(),
                requested: limit,
                limit: MAX_LIMIT,
            });
        }
        let bits = (limit - 1) / 2 + 1;
        let nwords = bits.div_ceil(64) as usize;
        let mut words = vec![u64::MAX; nwords];
        // 1 is not prime; bits past the limit are cleared.
        words[0] &= !1;
        let tail = bits % 64;
        if tail != 0 {
            words[nwords - 1] &= (1u64 << tail) - 1;
        }

        let mut i = 1u64;
        loop {
            let p = 2 * i + 1;
            if p * p > limit {
                break;
            }
            if words[(i / 64) as usize] >> (i % 64) & 1 == 1 {
                let mut j = (p * p - 1) / 2;
                while j < bits {
                    words[(j / 64) as usize] &= !(1u64 << (j % 64));
                    j += p;
                }
            }
            i += 1;
        }

        let mut prefix = Vec::with_capacity(nwords + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for w in &words {
            acc += u64::from(w.count_ones());
            prefix.push(acc);
        }
        Ok(Self { limit, words, prefix })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check(&self, m: u64) -> Result<()> {
        if m > self.limit {
            return Err(Error::OutOfRange {
                what: "prime sieve query".into(),
                requested: m,
                limit: self.limit,
            });
        }
        Ok(())
    }

    pub fn is_prime(&self, m: u64) -> Result<bool> {
        self.check(m)?;
        Ok(self.is_prime_unchecked(m))
    }

    #[inline]
    pub(crate) fn is_prime_unchecked(&self, m: u64) -> bool {
        if m.is_multiple_of(2) {
            return m == 2;
        }
        let i = (m - 1) / 2;
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Number of primes `<= n`.
    pub fn count_up_to(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n < 2 {
            return Ok(0);
        }
        let i = (n - 1) / 2;
        let w = (i / 64) as usize;
        let mask = if i % 64 == 63 {
            u64::MAX
        } else {
            (1u64 << (i % 64 + 1)) - 1
        };
        Ok(1 + self.prefix[w] + u64::from((self.words[w] & mask).count_ones()))
    }

    /// All primes up to the sieve limit in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let odd = self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = u64::from(bits.trailing_zeros());
                bits &= bits - 1;
                Some(2 * (w as u64 * 64 + b) + 1)
            })
        });
        std::iter::once(2).chain(odd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(m: u64) -> bool {
        m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| !m.is_multiple_of(d))
    }

    #[test]
    fn small_counts() {
        assert_eq!(Sieve::new(30).unwrap().count_up_to(30).unwrap(), 10);
        assert_eq!(Sieve::new(2).unwrap().count_up_to(2).unwrap(), 1);
        assert_eq!(Sieve::new(2).unwrap().count_up_to(1).unwrap(), 0);
    }

    #[test]
    fn agrees_with_trial_division() {
        let s = Sieve::new(5000).unwrap();
        let mut count = 0;
        for m in 0..=5000 {
            let p = trial_division(m);
            assert_eq!(s.is_prime(m).unwrap(), p, "m = {m}");
            count += u64::from(p);
            assert_eq!(s.count_up_to(m).unwrap(), count, "m = {m}");
        }
        let listed: Vec<u64> = s.primes().collect();
        assert_eq!(listed.len() as u64, count);
        assert!(listed.iter().all(|&p| trial_division(p)));
    }

    #[test]
    fn word_boundaries() {
        // limits straddling 64-bit words of odd numbers (128 integers each)
        for limit in [127, 128, 129, 255, 256, 257, 1023] {
            let s = Sieve::new(limit).unwrap();
            let brute = (0..=limit).filter(|&m| trial_division(m)).count() as u64;
            assert_eq!(s.count_up_to(limit).unwrap(), brute, "limit {limit}");
            assert_eq!(s.primes().count() as u64, brute);
        }
    }

    #[test]
    fn rejects_bad_limits_and_queries() {
        assert!(matches!(Sieve::new(1), Err(Error::InvalidParameter(_))));
        let s = Sieve::new(100).unwrap();
        assert!(matches!(
            s.is_prime(101),
            Err(Error::OutOfRange {
                requested: 101,
                limit: 100,
                ..
            })
        ));
    }
}
