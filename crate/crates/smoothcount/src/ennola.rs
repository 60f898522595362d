//! Truncated-series estimator for smooth-number counts.
//!
//! The estimate has the shape `T * R_m(1/log x)` with
//! `T = prod_{p <= y} log x / log p` and
//! `R_m(t) = sum_{n=0}^{m} d_n t^n / (pi(y) - n)!`,
//! where the `d_n` are the coefficients of the truncated power-series
//! product `prod_{p <= y} sum_k c_k (log p)^k s^k` and the `c_k` derive from
//! the even zeta values. The `d_n` depend only on `y`, so they are
//! precomputed once per smoothness bound into an [`EnnolaTable`]; building
//! the table for `y_max` yields the rows for every smaller prime bound along
//! the way.
//!
//! Evaluated naively, `T` and the powers of `log x` overflow fixed-precision
//! floats long before the inputs get interesting, so [`estimate_ennola`]
//! accumulates the descending-index recurrence
//! `f_n = f_{n+1} * log x / (pi(y) - n)` in log space and only exponentiates
//! at the end. [`direct_form_estimate`] keeps the naive product-then-sum
//! evaluation as a reference for small inputs.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::primes::PrimeTable;
use crate::{rf, ru, Real};

/// Default cap on the in-memory size of a coefficient table.
pub const DEFAULT_TABLE_MEM_CAP: u64 = 2 << 30;

/// Even zeta values `zeta(2k)` for `0 < 2k <= m`.
#[derive(Debug, Clone)]
pub struct ZetaEvenSeq<R> {
    values: Vec<R>, // values[i] = zeta(2(i+1))
}

impl<R: Real> ZetaEvenSeq<R> {
    /// `zeta(2k)`; panics if `k` is outside the computed range.
    pub fn zeta2k(&self, k: usize) -> R {
        self.values[k - 1]
    }

    pub fn max_k(&self) -> usize {
        self.values.len()
    }
}

/// Compute `zeta(2k)` for all `0 < 2k <= m`, from `zeta(2) = pi^2/6` and the
/// recurrence `zeta(2k) = (k + 1/2)^{-1} sum_{j=1}^{k-1} zeta(2j) zeta(2k-2j)`.
pub fn zeta_even<R: Real>(m: usize) -> Result<ZetaEvenSeq<R>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "zeta_even needs m >= 2, got {m}"
        )));
    }
    let kmax = m / 2;
    let mut values = Vec::with_capacity(kmax);
    values.push(R::PI() * R::PI() / rf(6.0));
    for k in 2..=kmax {
        let mut acc = R::zero();
        for j in 1..k {
            acc = acc + values[j - 1] * values[k - j - 1];
        }
        values.push(acc / (ru::<R>(k as u64) + rf(0.5)));
    }
    Ok(ZetaEvenSeq { values })
}

/// Series coefficients `c_0..c_m` of `t / (1 - e^{-t})`:
/// `c_0 = 1`, `c_1 = 1/2`, odd coefficients vanish from index 3 on, and
/// `c_{2k} = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}`.
#[derive(Debug, Clone)]
pub struct CSeq<R> {
    c: Vec<R>,
}

impl<R: Real> CSeq<R> {
    pub fn coeffs(&self) -> &[R] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Compute `c_0..c_m`. The powers of `2 pi` are accumulated incrementally
/// rather than via `powi`, which keeps the high-index terms accurate.
pub fn c_seq<R: Real>(m: usize, zeta: &ZetaEvenSeq<R>) -> CSeq<R> {
    let mut c = vec![R::zero(); m + 1];
    c[0] = R::one();
    if m >= 1 {
        c[1] = rf(0.5);
    }
    let two_pi = rf::<R>(2.0) * R::PI();
    let inv_two_pi_sq = R::one() / (two_pi * two_pi);
    let mut power = R::one(); // (2 pi)^{-2k}, updated per k
    let mut sign = R::one(); // (-1)^{k+1}
    for k in 1..=m / 2 {
        power = power * inv_two_pi_sq;
        c[2 * k] = sign * rf::<R>(2.0) * zeta.zeta2k(k) * power;
        sign = -sign;
    }
    CSeq { c }
}

/// One row of coefficients: the `d_n` for the prime bound equal to `prime`.
#[derive(Debug, Clone, PartialEq)]
pub struct DRow<R> {
    pub prime: u64,
    pub coeffs: Vec<R>,
}

/// Precomputed `d_n` rows for every prime bound `y' <= y_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnnolaTable<R> {
    pub y_max: u64,
    /// Truncation degree the running product was carried to.
    pub m: usize,
    /// Significant decimal digits of the scalar the table was built with.
    pub precision: u32,
    /// The `c_k` used to build the rows.
    pub cseq: Vec<R>,
    /// Ascending by prime; row `j` (1-based) holds `d_0..d_{min(j, m)}`.
    pub rows: Vec<DRow<R>>,
}

impl<R: Real> EnnolaTable<R> {
    /// Row for the largest prime `<= y`, or `NeedsPrecompute`.
    pub fn row_for(&self, y: u64) -> Result<&DRow<R>> {
        if y > self.y_max {
            return Err(Error::NeedsPrecompute(format!(
                "coefficient table covers y <= {}, requested {y}; run precompute",
                self.y_max
            )));
        }
        let n = self.rows.partition_point(|r| r.prime <= y);
        if n == 0 {
            return Err(Error::NeedsPrecompute(format!(
                "no coefficient row for y = {y}; run precompute"
            )));
        }
        Ok(&self.rows[n - 1])
    }
}

/// Build the coefficient table for all prime bounds up to `y_max`.
///
/// `m` defaults to `pi(y_max)`; a caller with a known `x` range may fix a
/// smaller truncation. The projected table size is checked against
/// `max_table_bytes` (default [`DEFAULT_TABLE_MEM_CAP`]) before any row is
/// allocated, failing with `ResourceLimit`.
pub fn precompute_dtable<R: Real>(
    primes: &PrimeTable,
    y_max: u64,
    m: Option<usize>,
    max_table_bytes: Option<u64>,
) -> Result<EnnolaTable<R>> {
    if y_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "y_max must be >= 2, got {y_max}"
        )));
    }
    let plist = primes.primes_to(y_max);
    if plist.is_empty() || y_max > primes.bound() {
        return Err(Error::OutOfRange(format!(
            "prime table bound {} does not cover y_max = {y_max}",
            primes.bound()
        )));
    }
    let pi_ymax = plist.len();
    let m = m.unwrap_or(pi_ymax);
    if m < 1 || m > pi_ymax {
        return Err(Error::InvalidArgument(format!(
            "truncation m = {m} outside 1..=pi(y_max) = {pi_ymax}"
        )));
    }

    let cap = max_table_bytes.unwrap_or(DEFAULT_TABLE_MEM_CAP);
    let word = std::mem::size_of::<R>() as u64;
    let mut projected = 0u64;
    for j in 1..=pi_ymax as u64 {
        projected += (j.min(m as u64) + 1) * word;
    }
    if projected > cap {
        return Err(Error::ResourceLimit(format!(
            "coefficient table would need {projected} bytes, cap {cap}"
        )));
    }

    let zeta = zeta_even::<R>(m.max(2))?;
    let cseq = c_seq(m, &zeta);
    let c = cseq.coeffs();

    // Indices with nonzero c_k: skipping the vanishing odd coefficients
    // halves the convolution work.
    let live: Vec<usize> = (0..=m).filter(|&k| k < 2 || k % 2 == 0).collect();

    let mut running = vec![R::zero(); m + 1];
    let mut factor = vec![R::zero(); m + 1];
    let mut next = vec![R::zero(); m + 1];
    let mut rows = Vec::with_capacity(pi_ymax);

    for (j, &p) in plist.iter().enumerate() {
        let log_p = ru::<R>(p).ln();
        let mut pw = R::one();
        for k in 0..=m {
            factor[k] = c[k] * pw;
            pw = pw * log_p;
        }
        if j == 0 {
            running.copy_from_slice(&factor);
        } else {
            next.iter_mut().for_each(|v| *v = R::zero());
            for &k in &live {
                let fk = factor[k];
                if fk == R::zero() {
                    continue;
                }
                for n in k..=m {
                    next[n] = next[n] + fk * running[n - k];
                }
            }
            std::mem::swap(&mut running, &mut next);
        }
        let keep = (j + 1).min(m);
        rows.push(DRow {
            prime: p,
            coeffs: running[..=keep].to_vec(),
        });
    }

    Ok(EnnolaTable {
        y_max,
        m,
        precision: R::DIGITS,
        cseq: c.to_vec(),
        rows,
    })
}

/// Truncation order for an estimate at `(x, y)`:
/// `floor(min(pi(y), max(log2 log x, e log y, e y^2 / (log x log y))))`.
pub fn choose_m<R: Real>(x_log: R, y: u64, primes: &PrimeTable) -> Result<usize> {
    if x_log <= R::zero() {
        return Err(Error::InvalidArgument("log x must be positive".into()));
    }
    let pi_y = primes.pi(y)? as f64;
    let x_log = x_log.to_f64().unwrap_or(f64::MAX);
    let ln_y = (y as f64).ln();
    let e = std::f64::consts::E;
    let inner = (x_log.ln() / std::f64::consts::LN_2)
        .max(e * ln_y)
        .max(e * (y as f64) * (y as f64) / (x_log * ln_y));
    Ok(pi_y.min(inner).floor().max(1.0) as usize)
}

/// Series estimate of `psi(x, y)`, evaluated stably in log space.
pub fn estimate_ennola<R: Real>(
    x_log: R,
    y: u64,
    table: &EnnolaTable<R>,
    primes: &PrimeTable,
) -> Result<Estimate<R>> {
    if y < 2 {
        return Err(Error::InvalidArgument(format!("y must be >= 2, got {y}")));
    }
    if y > primes.bound() {
        return Err(Error::OutOfRange(format!(
            "y = {y} exceeds prime table bound {}",
            primes.bound()
        )));
    }
    let row = table.row_for(y)?;
    let pi_y = primes.pi(y)? as usize;
    if row.coeffs.len() != pi_y.min(table.m) + 1 {
        return Err(Error::Internal(format!(
            "row for y = {y} has {} coefficients, expected {}",
            row.coeffs.len(),
            pi_y.min(table.m) + 1
        )));
    }
    let m = choose_m(x_log, y, primes)?.min(row.coeffs.len() - 1);

    let log_sum = log_series_sum(&row.coeffs, pi_y, m, x_log)?;
    let mut log_p_product = R::zero(); // sum of ln ln p
    for &p in primes.primes_to(y) {
        log_p_product = log_p_product + ru::<R>(p).ln().ln();
    }
    let mut est = Estimate::from_log(Method::Ennola, log_sum - log_p_product);
    est.diagnostics.m = Some(m);
    Ok(est)
}

/// `ln( sum_{n<=m} d_n (log x)^{pi(y)-n} / (pi(y)-n)! )` via the descending
/// recurrence `f_n = f_{n+1} log x / (pi(y)-n)`, carried in log space with a
/// signed scaled accumulation.
fn log_series_sum<R: Real>(coeffs: &[R], pi_y: usize, m: usize, x_log: R) -> Result<R> {
    let ln_ln_x = x_log.ln();
    let mut terms: Vec<(R, bool)> = Vec::with_capacity(m + 1);
    let mut ln_f = R::zero(); // ln f_n, starting at f_{pi(y)} = 1
    if m == pi_y {
        let d = coeffs[pi_y];
        if d != R::zero() {
            terms.push((d.abs().ln(), d < R::zero()));
        }
    }
    for n in (0..pi_y).rev() {
        ln_f = ln_f + ln_ln_x - ru::<R>((pi_y - n) as u64).ln();
        if n <= m {
            let d = coeffs[n];
            if d != R::zero() {
                terms.push((d.abs().ln() + ln_f, d < R::zero()));
            }
        }
    }
    let peak = terms
        .iter()
        .map(|&(t, _)| t)
        .fold(R::neg_infinity(), |a, b| a.max(b));
    let mut scaled = R::zero();
    for &(t, neg) in &terms {
        let e = (t - peak).exp();
        scaled = if neg { scaled - e } else { scaled + e };
    }
    if !(scaled > R::zero()) {
        return Err(Error::Internal(
            "series sum evaluated nonpositive".to_string(),
        ));
    }
    Ok(peak + scaled.ln())
}

/// Naive product-then-sum evaluation `T * R_m(1/log x)`.
///
/// Overflows for large inputs; kept as the reference the stable path is
/// checked against on small ones.
pub fn direct_form_estimate<R: Real>(
    x_log: R,
    y: u64,
    table: &EnnolaTable<R>,
    primes: &PrimeTable,
) -> Result<R> {
    let row = table.row_for(y)?;
    let pi_y = primes.pi(y)? as usize;
    let m = choose_m(x_log, y, primes)?.min(row.coeffs.len() - 1);
    let t = R::one() / x_log;
    let rm = truncated_series(&row.coeffs, pi_y, t, m);
    let mut big_t = R::one();
    for &p in primes.primes_to(y) {
        big_t = big_t * (x_log / ru::<R>(p).ln());
    }
    Ok(big_t * rm)
}

/// `R_m(t) = sum_{n=0}^{m} d_n t^n / (pi_y - n)!` evaluated directly.
pub fn truncated_series<R: Real>(coeffs: &[R], pi_y: usize, t: R, m: usize) -> R {
    let mut factorials = vec![R::one(); pi_y + 1];
    for k in 1..=pi_y {
        factorials[k] = factorials[k - 1] * ru::<R>(k as u64);
    }
    let mut acc = R::zero();
    let mut tn = R::one();
    for (n, &d) in coeffs.iter().enumerate().take(m + 1) {
        acc = acc + d * tn / factorials[pi_y - n];
        tn = tn * t;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(bound: u64) -> PrimeTable {
        PrimeTable::build(bound).unwrap()
    }

    #[test]
    fn zeta_2_4_6_closed_forms() {
        let z = zeta_even::<f64>(40).unwrap();
        let pi = std::f64::consts::PI;
        assert_relative_eq!(z.zeta2k(1), pi * pi / 6.0, max_relative = 1e-15);
        assert_relative_eq!(z.zeta2k(2), pi.powi(4) / 90.0, max_relative = 1e-15);
        assert_relative_eq!(z.zeta2k(3), pi.powi(6) / 945.0, max_relative = 1e-15);
    }

    #[test]
    fn zeta_decreases_toward_one() {
        let z = zeta_even::<f64>(40).unwrap();
        for k in 1..z.max_k() {
            assert!(z.zeta2k(k) > z.zeta2k(k + 1));
            assert!(z.zeta2k(k + 1) > 1.0);
        }
    }

    #[test]
    fn c_seq_known_values() {
        let z = zeta_even::<f64>(10).unwrap();
        let c = c_seq(10, &z);
        let c = c.coeffs();
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 0.5);
        assert_relative_eq!(c[2], 1.0 / 12.0, max_relative = 1e-14);
        assert_eq!(c[3], 0.0);
        assert_relative_eq!(c[4], -1.0 / 720.0, max_relative = 1e-13);
        assert_eq!(c[5], 0.0);
    }

    #[test]
    fn c_seq_sign_and_magnitude() {
        let z = zeta_even::<f64>(40).unwrap();
        let c = c_seq(40, &z);
        let c = c.coeffs();
        for k in 1..=20 {
            let expected_negative = k % 2 == 0;
            assert_eq!(c[2 * k] < 0.0, expected_negative, "sign at c_{}", 2 * k);
        }
        for (k, &ck) in c.iter().enumerate().skip(2) {
            assert!(ck.abs() <= 1.0, "|c_{k}| = {} > 1", ck.abs());
        }
    }

    /// The c_k are the series coefficients of t / (1 - e^{-t}); partial sums
    /// at generous truncation must land on that target.
    #[test]
    fn c_series_matches_generating_function() {
        let z = zeta_even::<f64>(40).unwrap();
        let c = c_seq(40, &z);
        for &t in &[0.1f64, 0.3, 0.5, 0.9] {
            let mut sum = 0.0;
            let mut tn = 1.0;
            for &ck in c.coeffs() {
                sum += ck * tn;
                tn *= t;
            }
            let target = t / (-(-t).exp_m1());
            assert!(
                (sum - target).abs() < 1e-10,
                "residual {} at t = {t}",
                (sum - target).abs()
            );
        }
    }

    #[test]
    fn dtable_single_prime_row() {
        let p = table(10);
        let t = precompute_dtable::<f64>(&p, 2, Some(1), None).unwrap();
        assert_eq!(t.rows.len(), 1);
        let row = &t.rows[0];
        assert_eq!(row.prime, 2);
        assert_eq!(row.coeffs.len(), 2);
        assert_eq!(row.coeffs[0], 1.0);
        assert_relative_eq!(
            row.coeffs[1],
            0.5 * std::f64::consts::LN_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn dtable_two_primes_hand_expansion() {
        let p = table(10);
        let t = precompute_dtable::<f64>(&p, 3, Some(2), None).unwrap();
        let row = t.row_for(3).unwrap();
        let l2 = std::f64::consts::LN_2;
        let l3 = 3.0f64.ln();
        // Product of the two degree-2 factors, truncated at degree 2.
        let expected_d2 = (l2 * l2 + l3 * l3) / 12.0 + (l2 * l3) / 4.0;
        assert_relative_eq!(row.coeffs[2], expected_d2, max_relative = 1e-12);
        assert_relative_eq!(row.coeffs[2], 0.3309916, max_relative = 1e-6);
    }

    #[test]
    fn dtable_row_invariants() {
        let p = table(100);
        let t = precompute_dtable::<f64>(&p, 100, None, None).unwrap();
        for (j, row) in t.rows.iter().enumerate() {
            assert_eq!(row.coeffs[0], 1.0, "d_0 at row {j}");
            let expected_d1: f64 =
                p.primes_to(row.prime).iter().map(|&q| (q as f64).ln()).sum::<f64>() / 2.0;
            assert_relative_eq!(row.coeffs[1], expected_d1, max_relative = 1e-13);
        }
    }

    #[test]
    fn dtable_rows_chain_by_factor_multiplication() {
        // Row for y' inside a larger table equals an independent build at y'.
        let p = table(100);
        let big = precompute_dtable::<f64>(&p, 60, None, None).unwrap();
        let small = precompute_dtable::<f64>(&p, 30, None, None).unwrap();
        for srow in &small.rows {
            let brow = big.row_for(srow.prime).unwrap();
            assert_eq!(brow.prime, srow.prime);
            for (a, b) in srow.coeffs.iter().zip(&brow.coeffs) {
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn memory_cap_enforced() {
        let p = table(10_000);
        let err = precompute_dtable::<f64>(&p, 10_000, None, Some(1024)).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn choose_m_small_y_regime() {
        // x = 2^33, y = 32: the work term dominates and pi(32) = 11 caps it.
        let p = table(100);
        let x_log = 33.0 * std::f64::consts::LN_2;
        assert_eq!(choose_m(x_log, 32, &p).unwrap(), 11);
    }

    #[test]
    fn choose_m_pi_cap_regimes() {
        let p = table(1000);
        // Tiny x relative to y: the y^2 term explodes, min picks pi(y).
        assert_eq!(
            choose_m(2.0f64.ln(), 1000, &p).unwrap(),
            p.pi(1000).unwrap() as usize
        );
        // Huge x, so the e*log(y) branch is the max and lies under pi(y).
        let m = choose_m(1e5f64, 1000, &p).unwrap();
        assert_eq!(m, (std::f64::consts::E * 1000.0f64.ln()).floor() as usize);
        // Even larger x: the doubly-logarithmic branch takes over.
        assert_eq!(choose_m(1e9f64, 1000, &p).unwrap(), 1e9f64.log2() as usize);
    }

    #[test]
    fn estimate_at_y2_collapses_to_closed_form() {
        let p = table(10);
        let t = precompute_dtable::<f64>(&p, 2, None, None).unwrap();
        for log2x in [10.0f64, 20.0, 100.0, 400.0] {
            let x_log = log2x * std::f64::consts::LN_2;
            let est = estimate_ennola(x_log, 2, &t, &p).unwrap();
            let expected = log2x + 0.5;
            assert_relative_eq!(est.value.unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn stable_matches_direct_on_small_inputs() {
        let p = table(64);
        let t = precompute_dtable::<f64>(&p, 50, None, None).unwrap();
        for &y in &[5u64, 20, 50] {
            for &log2x in &[10.0f64, 15.0, 20.0] {
                let x_log = log2x * std::f64::consts::LN_2;
                let stable = estimate_ennola(x_log, y, &t, &p).unwrap();
                let direct = direct_form_estimate(x_log, y, &t, &p).unwrap();
                assert_relative_eq!(
                    stable.value.unwrap(),
                    direct,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn missing_row_needs_precompute() {
        let p = table(100);
        let t = precompute_dtable::<f64>(&p, 50, None, None).unwrap();
        assert!(matches!(
            estimate_ennola(20.0f64, 97, &t, &p),
            Err(Error::NeedsPrecompute(_))
        ));
    }

    #[test]
    fn log_form_survives_overflow_range() {
        let p = table(1 << 13);
        let t = precompute_dtable::<f64>(&p, 1 << 13, None, None).unwrap();
        // x = 2^8192, y = 2^13: the count overflows f64 but the log form
        // holds (and the value field signals it by absence).
        let x_log = 8192.0 * std::f64::consts::LN_2;
        let est = estimate_ennola(x_log, 1 << 13, &t, &p).unwrap();
        assert!(est.value.is_none());
        assert!(est.log_value.is_finite() && est.log_value > 710.0);
    }

    /// Truncation-tail bound: |R - R_m| < 1 / (2^m pi(y)!) once m clears
    /// max{e log y, e y^2/(log x log y)}.
    #[test]
    fn truncation_tail_within_bound() {
        let p = table(128);
        let t = precompute_dtable::<f64>(&p, 50, None, None).unwrap();
        let pi_y = p.pi(50).unwrap() as usize;
        let row = t.row_for(50).unwrap();
        for &log2x in &[200.0f64, 500.0, 1024.0] {
            let x_log = log2x * std::f64::consts::LN_2;
            let ln_y = 50.0f64.ln();
            let e = std::f64::consts::E;
            let n0 = (e * ln_y).max(e * 2500.0 / (x_log * ln_y));
            let m = n0.ceil() as usize;
            assert!(m <= pi_y, "lemma applies only when n0 <= pi(y)");
            let tt = 1.0 / x_log;
            let full = truncated_series(&row.coeffs, pi_y, tt, pi_y);
            let cut = truncated_series(&row.coeffs, pi_y, tt, m);
            let mut fact = 1.0f64;
            for k in 1..=pi_y {
                fact *= k as f64;
            }
            let bound = 1.0 / (2.0f64.powi(m as i32) * fact);
            assert!(
                (full - cut).abs() < bound,
                "tail {} >= bound {} at x = 2^{log2x}",
                (full - cut).abs(),
                bound
            );
        }
    }

    #[test]
    fn f32_build_smoke() {
        let p = table(20);
        let t = precompute_dtable::<f32>(&p, 20, None, None).unwrap();
        assert_eq!(t.precision, 6);
        let est = estimate_ennola(14.0f32, 20, &t, &p).unwrap();
        assert!(est.log_value.is_finite());
    }
}
