//! Prime sieving and prime-counting queries.
//!
//! Every other module takes a [`PrimeTable`] built once up to the largest
//! smoothness bound it will see. The table is immutable after construction
//! and safe to share across threads.

use crate::error::{Error, Result};
use crate::util::isqrt;

const SEGMENT_BYTES: usize = 1 << 18;

/// The primes up to a fixed bound, in ascending order, with counting queries.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Sieve all primes `<= bound` with a segmented sieve of Eratosthenes.
    ///
    /// Errors with `InvalidArgument` when `bound < 2`.
    pub fn build(bound: u64) -> Result<PrimeTable> {
        if bound < 2 {
            return Err(Error::InvalidArgument(format!(
                "prime table bound must be >= 2, got {bound}"
            )));
        }
        let root = isqrt(bound);
        let base = simple_sieve(root);

        let approx = if bound >= 17 {
            (bound as f64 / (bound as f64).ln() * 1.15) as usize
        } else {
            8
        };
        let mut primes = Vec::with_capacity(approx);
        primes.extend(base.iter().copied());

        let mut lo = root + 1;
        let mut segment = vec![false; SEGMENT_BYTES];
        while lo <= bound {
            let hi = (lo + SEGMENT_BYTES as u64 - 1).min(bound);
            let len = (hi - lo + 1) as usize;
            segment[..len].fill(false);
            for &p in &base {
                if p * p > hi {
                    break;
                }
                let mut start = lo.div_ceil(p) * p;
                if start < p * p {
                    start = p * p;
                }
                let mut j = start;
                while j <= hi {
                    segment[(j - lo) as usize] = true;
                    j += p;
                }
            }
            for (i, &composite) in segment[..len].iter().enumerate() {
                if !composite {
                    primes.push(lo + i as u64);
                }
            }
            lo = hi + 1;
        }

        Ok(PrimeTable { bound, primes })
    }

    /// The sieving limit this table was built with.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Ascending slice of all primes `<= bound`.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Count of primes `<= t`, by binary search on the prime list.
    ///
    /// Errors with `OutOfRange` when `t > bound`.
    pub fn pi(&self, t: u64) -> Result<u64> {
        if t > self.bound {
            return Err(Error::OutOfRange(format!(
                "pi({t}) queried beyond table bound {}",
                self.bound
            )));
        }
        Ok(self.primes.partition_point(|&p| p <= t) as u64)
    }

    /// Iterator over the primes `<= y`. `y` may exceed the bound; the caller
    /// checks range where the contract requires it.
    pub fn primes_to(&self, y: u64) -> &[u64] {
        let n = self.primes.partition_point(|&p| p <= y);
        &self.primes[..n]
    }
}

/// Plain sieve used for the base primes up to `sqrt(bound)`.
fn simple_sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for n in 2..=limit {
        if !composite[n] {
            primes.push(n as u64);
            let mut j = n * n;
            while j <= limit {
                composite[j] = true;
                j += n;
            }
        }
    }
    primes
}
