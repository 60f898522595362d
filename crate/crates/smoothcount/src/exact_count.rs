//! Exact smooth-number counts.
//!
//! `psi_exact` evaluates the Buchstab identity
//! `psi(x, y) = 1 + sum_{p <= y} psi(floor(x/p), p)` exactly. Every argument
//! that can appear while unwinding the identity is of the form
//! `(floor(x/d), p)`, and `floor(x/d)` takes at most `2*sqrt(x)` distinct
//! values, so instead of a recursive memo the evaluation runs bottom-up over
//! that quotient lattice: one `u64` row indexed by quotient value, updated in
//! place prime by prime. The row update
//! `psi(v, p) = psi(v, p_prev) + psi(floor(v/p), p)` is the same identity
//! regrouped by largest prime factor. This keeps both the running time and
//! the memory (one row of `2*sqrt(x)` words) predictable, which is what lets
//! counts at `x = 2^30..2^33` serve as baselines for the estimators.
//!
//! `psi_bruteforce` is a deliberately naive enumerator kept as an
//! independent oracle for tests; it shares no code with `psi_exact`.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::primes::PrimeTable;
use crate::util::isqrt;

/// Default work budget (row updates) for an exact count; roughly a couple of
/// minutes of wall clock at the high end.
pub const DEFAULT_WORK_BUDGET: u64 = 5_000_000_000;

/// Enumeration cap for the brute-force oracle.
pub const BRUTEFORCE_MAX_X: u64 = 100_000_000;

/// Exact `psi(x, y)` with the default work budget.
pub fn psi_exact(x: u64, y: u64, primes: &PrimeTable) -> Result<u64> {
    psi_exact_with_budget(x, y, primes, DEFAULT_WORK_BUDGET)
}

/// Exact `psi(x, y)`.
///
/// `1` is counted as smooth for every `y`. Errors with `BudgetExceeded`
/// when the estimated work passes `budget` (the caller should fall back to
/// an estimator), and `OutOfRange` when `y` exceeds the prime table bound.
pub fn psi_exact_with_budget(x: u64, y: u64, primes: &PrimeTable, budget: u64) -> Result<u64> {
    if y < 2 {
        return Err(Error::InvalidArgument(format!(
            "smoothness bound must be >= 2, got {y}"
        )));
    }
    if x == 0 {
        return Ok(0);
    }
    if y >= x {
        // Every n <= x is x-smooth.
        return Ok(x);
    }
    if y > primes.bound() {
        return Err(Error::OutOfRange(format!(
            "y = {y} exceeds prime table bound {}",
            primes.bound()
        )));
    }

    let work = estimated_work(x, y, primes);
    if work > budget {
        return Err(Error::BudgetExceeded(format!(
            "exact count at (x={x}, y={y}) needs ~{work} row updates, budget {budget}"
        )));
    }

    let lattice = QuotientLattice::new(x);
    let mut row: Vec<u64> = lattice.values().map(|v| log2_floor(v) + 1).collect();

    for &p in primes.primes_to(y) {
        if p == 2 {
            continue; // the row is initialized at psi(v, 2)
        }
        if p > x {
            break;
        }
        lattice.apply_prime(&mut row, p);
    }

    Ok(row[lattice.len() - 1])
}

/// Work estimate for `psi_exact` at `(x, y)`: the number of row updates the
/// quotient-lattice evaluation performs.
pub fn estimated_work(x: u64, y: u64, primes: &PrimeTable) -> u64 {
    if x == 0 || y >= x {
        return 1;
    }
    let s = isqrt(x);
    let jmax = x / (s + 1);
    let mut work = s + jmax; // row initialization
    for &p in primes.primes_to(y.min(x)) {
        if p == 2 {
            continue;
        }
        let bottom = if p <= s { s - p + 1 } else { 0 };
        let top = jmax.min(x / p);
        work = work.saturating_add(bottom + top);
    }
    work
}

/// `psi_exact` wrapped as an [`Estimate`] for uniform reporting.
pub fn estimate_buchstab(x: u64, y: u64, primes: &PrimeTable) -> Result<Estimate<f64>> {
    let count = psi_exact(x, y, primes)?;
    let value = count as f64;
    let mut est = Estimate::from_log(Method::Buchstab, value.ln());
    est.value = Some(value);
    Ok(est)
}

/// Brute-force count of y-smooth `n <= x` by trial division; an oracle kept
/// independent of `psi_exact`.
pub fn psi_bruteforce(x: u64, y: u64) -> Result<u64> {
    if y < 2 {
        return Err(Error::InvalidArgument(format!(
            "smoothness bound must be >= 2, got {y}"
        )));
    }
    if x > BRUTEFORCE_MAX_X {
        return Err(Error::BudgetExceeded(format!(
            "brute-force enumeration capped at x <= {BRUTEFORCE_MAX_X}, got {x}"
        )));
    }
    let mut count = 0u64;
    for n in 1..=x {
        let mut m = n;
        while m % 2 == 0 {
            m /= 2;
        }
        if y >= 3 {
            while m % 3 == 0 {
                m /= 3;
            }
        }
        let mut d = 5u64;
        let mut gap = 2u64; // alternate +2, +4 to skip multiples of 2 and 3
        while d <= y && d * d <= m {
            while m % d == 0 {
                m /= d;
            }
            d += gap;
            gap = 6 - gap;
        }
        if m == 1 || m <= y {
            count += 1;
        }
    }
    Ok(count)
}

/// The distinct values of `floor(x/k)`, ascending, with O(1) index lookup.
struct QuotientLattice {
    x: u64,
    s: u64,
    jmax: u64,
}

impl QuotientLattice {
    fn new(x: u64) -> QuotientLattice {
        let s = isqrt(x);
        QuotientLattice {
            x,
            s,
            jmax: x / (s + 1),
        }
    }

    fn len(&self) -> usize {
        (self.s + self.jmax) as usize
    }

    fn values(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.s).chain((1..=self.jmax).rev().map(move |j| self.x / j))
    }

    #[inline]
    fn index(&self, q: u64) -> usize {
        if q <= self.s {
            (q - 1) as usize
        } else {
            (self.s + self.jmax - self.x / q) as usize
        }
    }

    /// In-place update `row[v] += row[floor(v/p)]` over all lattice values
    /// `v >= p`, ascending, taking `row` from psi(., p_prev) to psi(., p).
    fn apply_prime(&self, row: &mut [u64], p: u64) {
        for v in p..=self.s {
            row[(v - 1) as usize] += row[(v / p - 1) as usize];
        }
        let hi_j = self.jmax.min(self.x / p);
        for j in (1..=hi_j).rev() {
            let q = self.x / (j * p);
            row[(self.s + self.jmax - j) as usize] += row[self.index(q)];
        }
    }
}

#[inline]
fn log2_floor(v: u64) -> u64 {
    63 - v.leading_zeros() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(bound: u64) -> PrimeTable {
        PrimeTable::build(bound).unwrap()
    }

    #[test]
    fn powers_of_two_base_case() {
        let t = table(16);
        // floor(log2 16) + 1 = 5: {1, 2, 4, 8, 16}
        assert_eq!(psi_exact(16, 2, &t).unwrap(), 5);
        assert_eq!(psi_exact(1, 2, &t).unwrap(), 1);
        assert_eq!(psi_exact(3, 2, &t).unwrap(), 2);
    }

    #[test]
    fn small_hand_counts() {
        let t = table(100);
        // {1, 2, 3, 4, 6, 8, 9}
        assert_eq!(psi_exact(10, 3, &t).unwrap(), 7);
        assert_eq!(psi_exact(100, 5, &t).unwrap(), 34);
    }

    #[test]
    fn smooth_bound_at_or_above_x() {
        let t = table(100);
        for x in [1u64, 2, 17, 99] {
            assert_eq!(psi_exact(x, x.max(2), &t).unwrap(), x);
            assert_eq!(psi_exact(x, 100, &t).unwrap(), x);
        }
    }

    #[test]
    fn bruteforce_hand_counts() {
        assert_eq!(psi_bruteforce(10, 3).unwrap(), 7);
        assert_eq!(psi_bruteforce(1, 2).unwrap(), 1);
        assert_eq!(psi_bruteforce(100, 5).unwrap(), 34);
        assert_eq!(psi_bruteforce(16, 2).unwrap(), 5);
    }

    #[test]
    fn bruteforce_cap() {
        assert!(matches!(
            psi_bruteforce(BRUTEFORCE_MAX_X + 1, 10),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn budget_error_reports_work() {
        let t = table(1 << 16);
        let err = psi_exact_with_budget(1 << 40, 1 << 16, &t, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn y_beyond_table_bound_errors() {
        let t = table(50);
        assert!(matches!(
            psi_exact(1 << 20, 100, &t),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn agrees_with_bruteforce_on_grid() {
        let t = table(2_000);
        for x in [50u64, 500, 1_000, 1_999] {
            for y in [2u64, 3, 7, 50, 1_000] {
                assert_eq!(
                    psi_exact(x, y, &t).unwrap(),
                    psi_bruteforce(x, y).unwrap(),
                    "mismatch at ({x}, {y})"
                );
            }
        }
    }

    #[test]
    fn buchstab_identity_self_consistency() {
        let t = table(200);
        for (x, y) in [(5_000u64, 50u64), (20_000, 100), (12_345, 37)] {
            let direct = psi_exact(x, y, &t).unwrap();
            let mut sum = 1u64;
            for &p in t.primes_to(y) {
                sum += psi_exact(x / p, p, &t).unwrap();
            }
            assert_eq!(direct, sum, "identity broken at ({x}, {y})");
        }
    }

    #[test]
    fn monotone_in_both_arguments() {
        let t = table(500);
        let psi = |x, y| psi_exact(x, y, &t).unwrap();
        for x in (100u64..2_000).step_by(333) {
            assert!(psi(x, 10) <= psi(x + 1, 10));
            assert!(psi(x, 10) <= psi(x, 11));
            assert!(psi(x, 499) <= psi(x, 500));
        }
    }

    #[test]
    fn matches_bruteforce_at_scale() {
        let t = table(1 << 10);
        assert_eq!(
            psi_exact(1 << 20, 1 << 10, &t).unwrap(),
            psi_bruteforce(1 << 20, 1 << 10).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn exact_equals_bruteforce(x in 1u64..3_000, y_seed in 0u64..3_000) {
            let y = 2 + y_seed % x.max(2);
            let t = table(3_000);
            prop_assert_eq!(
                psi_exact(x, y, &t).unwrap(),
                psi_bruteforce(x, y).unwrap()
            );
        }
    }
}
