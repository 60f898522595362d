//! Saddle-point estimators for smooth-number counts.
//!
//! The estimate is `HT(x, y, alpha) = x^alpha zeta(alpha, y) /
//! (alpha sqrt(2 pi phi2(alpha, y)))`, evaluated at the saddle point
//! `alpha`, the unique positive root of `phi1(s, y) + log x = 0`. Three
//! variants share that skeleton:
//!
//! * `ht` — Newton's method on the exact prime sums.
//! * `htfast` — the prime sums are evaluated exactly only up to a cutoff
//!   `z = min(y, max(1000, ceil(5 sqrt(y))))` and the tail over `(z, y]` is
//!   approximated by density-`1/log t` integrals, so each iteration costs
//!   about `sqrt(y)` instead of `y / log y`.
//! * `htalpha` — solve the cheap approximate equation first, then hand its
//!   root to Newton on the exact sums, which then needs only an iteration
//!   or two; same accuracy as `ht` at a fraction of the time.
//!
//! All values are computed as natural logs; the direct value is attached to
//! the [`Estimate`] only when it is representable.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::primes::PrimeTable;
use crate::util::adaptive_simpson;
use crate::{rf, ru, Real};

/// Newton iteration cap; both solves converge in single digits in practice.
const MAX_NEWTON_ITER: u32 = 200;

/// Relative tolerance for the quadrature backing the fast zeta tail.
const ZETA_TAIL_QUAD_TOL: f64 = 1e-9;

/// Parameters and results of one saddle-point solve.
#[derive(Debug, Clone)]
pub struct SaddleContext<R> {
    pub x_log: R,
    pub y: u64,
    /// min(log x / log y, y / log y); scales the Newton tolerances.
    pub u_bar: R,
    /// Newton starting point log(1 + y/(5 log x)) / log y.
    pub alpha0: R,
    /// Converged saddle point, once a solve has run.
    pub alpha: Option<R>,
    pub iterations_fast: u32,
    pub iterations_exact: u32,
    /// Exact-summation cutoff for the fast prime-sum approximations.
    pub z: u64,
    pub tolerance_fast: R,
    pub tolerance_exact: R,
}

impl<R: Real> SaddleContext<R> {
    pub fn new(x_log: R, y: u64) -> Result<SaddleContext<R>> {
        if x_log <= R::zero() {
            return Err(Error::InvalidArgument("log x must be positive".into()));
        }
        if y < 2 {
            return Err(Error::InvalidArgument(format!("y must be >= 2, got {y}")));
        }
        let yf = ru::<R>(y);
        let ln_y = yf.ln();
        let u_bar = (x_log / ln_y).min(yf / ln_y);
        let alpha0 = (R::one() + yf / (rf::<R>(5.0) * x_log)).ln() / ln_y;
        let five_sqrt_y = (5.0 * (y as f64).sqrt()).ceil() as u64;
        let z = y.min(five_sqrt_y.max(1000));
        let scale = R::one() / (u_bar * x_log);
        Ok(SaddleContext {
            x_log,
            y,
            u_bar,
            alpha0,
            alpha: None,
            iterations_fast: 0,
            iterations_exact: 0,
            z,
            tolerance_fast: rf::<R>(1e-6).min(scale),
            tolerance_exact: rf::<R>(1e-4).min(scale),
        })
    }
}

fn check_s<R: Real>(s: R) -> Result<()> {
    if s <= R::zero() {
        return Err(Error::InvalidArgument(format!(
            "prime sums have a pole at s = 0; got s = {s}"
        )));
    }
    Ok(())
}

fn check_y(y: u64, primes: &PrimeTable) -> Result<()> {
    if y > primes.bound() {
        return Err(Error::OutOfRange(format!(
            "y = {y} exceeds prime table bound {}",
            primes.bound()
        )));
    }
    Ok(())
}

/// `phi1(s, y) = -sum_{p <= y} log p / (p^s - 1)`; strictly increasing in
/// `s` and always negative.
pub fn phi1<R: Real>(s: R, y: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    check_y(y, primes)?;
    Ok(phi1_raw(s, primes.primes_to(y)))
}

/// `phi2(s, y) = sum_{p <= y} p^s (log p)^2 / (p^s - 1)^2`; the derivative
/// of `phi1` in `s`, always positive.
pub fn phi2<R: Real>(s: R, y: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    check_y(y, primes)?;
    Ok(phi2_raw(s, primes.primes_to(y)))
}

/// `log zeta(s, y)` for the partial Euler product
/// `zeta(s, y) = prod_{p <= y} (1 - p^{-s})^{-1}`.
pub fn zeta_partial_log<R: Real>(s: R, y: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    check_y(y, primes)?;
    Ok(zeta_log_raw(s, primes.primes_to(y)))
}

fn phi1_raw<R: Real>(s: R, plist: &[u64]) -> R {
    let mut acc = R::zero();
    for &p in plist {
        let lp = ru::<R>(p).ln();
        acc = acc + lp / (s * lp).exp_m1();
    }
    -acc
}

fn phi2_raw<R: Real>(s: R, plist: &[u64]) -> R {
    let mut acc = R::zero();
    for &p in plist {
        let lp = ru::<R>(p).ln();
        let e = (s * lp).exp_m1();
        acc = acc + (e + R::one()) * lp * lp / (e * e);
    }
    acc
}

fn zeta_log_raw<R: Real>(s: R, plist: &[u64]) -> R {
    let mut acc = R::zero();
    for &p in plist {
        let q = (-(s * ru::<R>(p).ln())).exp();
        acc = acc - (-q).ln_1p();
    }
    acc
}

/// Number of geometric-expansion terms kept in the `(z, y]` tails.
fn tail_kmax<R: Real>(s: R, y: u64) -> u32 {
    let k = (ru::<R>(y).ln() / s).to_f64().unwrap_or(0.0);
    if k < 1.0 {
        0
    } else {
        k.floor() as u32
    }
}

/// Closed-form approximation of `-phi1(s, y)`:
/// `B(s, y, z) = sum_{p <= z} log p/(p^s - 1)
///             + sum_{k=1}^{floor(log y / s)} (y^{1-ks} - z^{1-ks})/(1-ks)`.
///
/// At `ks = 1` the tail term is a removable singularity and evaluates to
/// `log(y/z)`. When `z = y` the tail vanishes and `B = -phi1` exactly.
pub fn b_approx<R: Real>(s: R, y: u64, z: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    if z > y {
        return Err(Error::InvalidArgument(format!(
            "cutoff z = {z} exceeds y = {y}"
        )));
    }
    check_y(z, primes)?;
    let mut acc = -phi1_raw(s, primes.primes_to(z));
    let ln_y = ru::<R>(y).ln();
    let ln_z = ru::<R>(z).ln();
    for k in 1..=tail_kmax(s, y) {
        let a = R::one() - ru::<R>(k as u64) * s;
        acc = acc + power_integral(a, ln_y, ln_z);
    }
    Ok(acc)
}

/// `int_z^y t^{-ks} dt = (y^a - z^a)/a` with `a = 1 - ks`, written through
/// `exp_m1` so the cancellation toward `a = 0` is benign; below the
/// singularity guard the limit `log(y/z)` is substituted.
fn power_integral<R: Real>(a: R, ln_y: R, ln_z: R) -> R {
    if a.abs() < rf(1e-9) {
        return ln_y - ln_z;
    }
    ((a * ln_y).exp_m1() - (a * ln_z).exp_m1()) / a
}

/// Approximation of `phi2(s, y)`: exact sum up to `z`, plus the tail
/// `sum_k k int_z^y t^{-ks} log t dt` in closed form.
pub fn fast_phi2<R: Real>(s: R, y: u64, z: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    if z > y {
        return Err(Error::InvalidArgument(format!(
            "cutoff z = {z} exceeds y = {y}"
        )));
    }
    check_y(z, primes)?;
    let mut acc = phi2_raw(s, primes.primes_to(z));
    let ln_y = ru::<R>(y).ln();
    let ln_z = ru::<R>(z).ln();
    for k in 1..=tail_kmax(s, y) {
        let a = R::one() - ru::<R>(k as u64) * s;
        acc = acc + ru::<R>(k as u64) * log_weight_integral(a, ln_y, ln_z);
    }
    Ok(acc)
}

/// `int_z^y t^{-ks} log t dt` with `a = 1 - ks`, via
/// `(g(log y) - g(log z))/a^2` where `g(u) = a u e^{a u} - (e^{a u} - 1)`;
/// the `g` form stays accurate arbitrarily close to the `a = 0` limit
/// `(log^2 y - log^2 z)/2`.
fn log_weight_integral<R: Real>(a: R, ln_y: R, ln_z: R) -> R {
    if a.abs() < rf(1e-9) {
        return (ln_y * ln_y - ln_z * ln_z) / rf(2.0);
    }
    let g = |u: R| a * u * (a * u).exp() - (a * u).exp_m1();
    (g(ln_y) - g(ln_z)) / (a * a)
}

/// Approximation of `log zeta(s, y)`: exact sum up to `z`, plus the tail
/// `sum_k (1/k) int_z^y t^{-ks}/log t dt` by adaptive quadrature on
/// `u = log t`.
pub fn fast_zeta_log<R: Real>(s: R, y: u64, z: u64, primes: &PrimeTable) -> Result<R> {
    check_s(s)?;
    if z > y {
        return Err(Error::InvalidArgument(format!(
            "cutoff z = {z} exceeds y = {y}"
        )));
    }
    check_y(z, primes)?;
    let mut acc = zeta_log_raw(s, primes.primes_to(z));
    let ln_y = ru::<R>(y).ln();
    let ln_z = ru::<R>(z).ln();
    for k in 1..=tail_kmax(s, y) {
        let a = R::one() - ru::<R>(k as u64) * s;
        let integrand = move |u: R| (a * u).exp() / u;
        let integral = adaptive_simpson(&integrand, ln_z, ln_y, rf(ZETA_TAIL_QUAD_TOL), 40);
        acc = acc + integral / ru::<R>(k as u64);
    }
    Ok(acc)
}

/// Safeguarded Newton iteration `s <- s - f(s)/f'(s)` for the root of an
/// increasing `f`, stopping when the step drops below `tol`.
///
/// Steps that would leave `(0, s_max]` are halved back toward the current
/// iterate. Returns the root and the number of iterations, or
/// `NoConvergence` after [`MAX_NEWTON_ITER`] rounds.
pub fn newton_alpha<R: Real>(
    f: impl Fn(R) -> R,
    fprime: impl Fn(R) -> R,
    start: R,
    tol: R,
    s_max: R,
) -> Result<(R, u32)> {
    if start <= R::zero() || tol <= R::zero() {
        return Err(Error::InvalidArgument(
            "newton start and tolerance must be positive".into(),
        ));
    }
    let mut s = start;
    let mut fs = f(s);
    for it in 1..=MAX_NEWTON_ITER {
        let d = fprime(s);
        if !d.is_finite() || d == R::zero() {
            return Err(Error::NoConvergence(format!(
                "derivative degenerate at s = {s}"
            )));
        }
        let newton_step = fs / d;
        let mut step = newton_step;
        let mut next = s - step;
        while next <= R::zero() || next > s_max {
            step = step / rf(2.0);
            next = s - step;
            if step.abs() < R::min_positive_value() {
                return Err(Error::NoConvergence(format!(
                    "iterate pinned at the domain edge near s = {s}"
                )));
            }
        }
        let f_next = f(next);
        // Convergence is judged on the unconstrained Newton step, so a
        // safeguard-shortened step never reads as converged.
        if newton_step.abs() < tol || f_next == R::zero() {
            return Ok((next, it));
        }
        s = next;
        fs = f_next;
    }
    Err(Error::NoConvergence(format!(
        "no root to tolerance {tol} within {MAX_NEWTON_ITER} iterations"
    )))
}

/// `log HT(x, y, alpha) = alpha log x + log zeta(alpha, y) - log alpha
///  - (1/2) log(2 pi phi2(alpha, y))`, with exact or fast prime sums.
pub fn ht_value_log<R: Real>(
    ctx: &SaddleContext<R>,
    alpha: R,
    primes: &PrimeTable,
    fast: bool,
) -> Result<R> {
    check_s(alpha)?;
    let (zeta_log, p2) = if fast {
        (
            fast_zeta_log(alpha, ctx.y, ctx.z, primes)?,
            fast_phi2(alpha, ctx.y, ctx.z, primes)?,
        )
    } else {
        check_y(ctx.y, primes)?;
        let plist = primes.primes_to(ctx.y);
        (zeta_log_raw(alpha, plist), phi2_raw(alpha, plist))
    };
    if !(p2 > R::zero()) {
        return Err(Error::Internal(format!(
            "phi2({alpha}, {}) evaluated nonpositive",
            ctx.y
        )));
    }
    let two_pi = rf::<R>(2.0) * R::PI();
    Ok(alpha * ctx.x_log + zeta_log - alpha.ln() - (two_pi * p2).ln() / rf(2.0))
}

/// Saddle-point estimate with exact prime sums.
pub fn estimate_ht<R: Real>(x_log: R, y: u64, primes: &PrimeTable) -> Result<Estimate<R>> {
    check_y(y, primes)?;
    let mut ctx = SaddleContext::new(x_log, y)?;
    let plist = primes.primes_to(y);
    let f = |s: R| phi1_raw(s, plist) + x_log;
    let fp = |s: R| phi2_raw(s, plist);
    let (alpha, its) = newton_alpha(f, fp, ctx.alpha0, ctx.tolerance_exact, R::one() + ctx.alpha0)?;
    ctx.alpha = Some(alpha);
    ctx.iterations_exact = its;
    let mut est = Estimate::from_log(Method::Ht, ht_value_log(&ctx, alpha, primes, false)?);
    est.diagnostics.alpha = Some(alpha);
    est.diagnostics.iterations = Some(its);
    Ok(est)
}

/// Saddle-point estimate with the approximate prime sums throughout; only
/// primes up to the cutoff `z` are needed.
pub fn estimate_htfast<R: Real>(x_log: R, y: u64, primes: &PrimeTable) -> Result<Estimate<R>> {
    let mut ctx = SaddleContext::new(x_log, y)?;
    check_y(ctx.z, primes)?;
    let (y_, z_) = (ctx.y, ctx.z);
    let f = |s: R| -b_approx(s, y_, z_, primes).expect("validated args") + x_log;
    let fp = |s: R| fast_phi2(s, y_, z_, primes).expect("validated args");
    let (alpha, its) = newton_alpha(f, fp, ctx.alpha0, ctx.tolerance_fast, R::one() + ctx.alpha0)?;
    ctx.alpha = Some(alpha);
    ctx.iterations_fast = its;
    let mut est = Estimate::from_log(Method::HtFast, ht_value_log(&ctx, alpha, primes, true)?);
    est.diagnostics.alpha = Some(alpha);
    est.diagnostics.iterations_fast = Some(its);
    Ok(est)
}

/// Two-stage saddle-point estimate: solve the approximate equation to the
/// tight tolerance, then polish on the exact sums from that start.
pub fn estimate_htalpha<R: Real>(x_log: R, y: u64, primes: &PrimeTable) -> Result<Estimate<R>> {
    check_y(y, primes)?;
    let mut ctx = SaddleContext::new(x_log, y)?;
    let (y_, z_) = (ctx.y, ctx.z);
    let s_max = R::one() + ctx.alpha0;

    let f1 = |s: R| -b_approx(s, y_, z_, primes).expect("validated args") + x_log;
    let f1p = |s: R| fast_phi2(s, y_, z_, primes).expect("validated args");
    let (alpha_f, its_fast) = newton_alpha(f1, f1p, ctx.alpha0, ctx.tolerance_fast, s_max)?;
    ctx.iterations_fast = its_fast;

    let plist = primes.primes_to(y);
    let f2 = |s: R| phi1_raw(s, plist) + x_log;
    let f2p = |s: R| phi2_raw(s, plist);
    let (alpha, its_exact) = newton_alpha(f2, f2p, alpha_f, ctx.tolerance_exact, s_max)?;
    ctx.alpha = Some(alpha);
    ctx.iterations_exact = its_exact;

    let mut est = Estimate::from_log(Method::HtAlpha, ht_value_log(&ctx, alpha, primes, false)?);
    est.diagnostics.alpha = Some(alpha);
    est.diagnostics.iterations = Some(its_exact);
    est.diagnostics.iterations_fast = Some(its_fast);
    Ok(est)
}
