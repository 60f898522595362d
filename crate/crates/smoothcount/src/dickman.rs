//! The Dickman rho function and the corrected rho estimate.
//!
//! `rho` solves `rho(u) = 1` on `[0, 1]` and `u rho'(u) = -rho(u-1)` beyond;
//! `x * rho(log x / log y)` approximates the smooth-number count, and adding
//! the correction term `(1 - gamma) * (x / log x) * rho(u - 1)` noticeably
//! improves it. A [`RhoTable`] holds `log rho` on a uniform grid so a single
//! build serves every later evaluation.
//!
//! The grid is advanced through the integral form
//! `rho(u) = rho(u - h) - int_{u-h}^{u} rho(t-1)/t dt`, one cell per step,
//! with a five-node Gauss-Legendre rule per cell and the delayed values
//! interpolated from points already computed (the stencil is kept inside
//! one unit interval, because `rho` loses a derivative at each small
//! integer). All stored values and the stepping itself are in log scale, so
//! the table can extend far past the point where `rho` underflows a double.
//!
//! The marching is ill-conditioned: `rho` shrinks by a factor near 30 per
//! unit of `u`, while an error injected at small `u` decays only
//! algebraically, so by `u = 10` any early absolute error is amplified a
//! billionfold relative to the true value. The build therefore runs in the
//! scalar's wide companion type ([`crate::Real::Wide`] — double-double when
//! the table is `f64`) and rounds once at the end; in plain doubles not
//! even the rounding floor would survive the amplification.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::{rf, ru, Real};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

/// `log rho` sampled on a uniform grid of spacing `h` over `[0, u_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoTable<R> {
    u_max: f64,
    inv_h: u32,
    log_values: Vec<R>,
}

/// Build a rho table on `[0, u_max]` with grid spacing `h`.
///
/// `h` must divide 1 evenly (so the delayed argument `u - 1` lands on the
/// grid) and be at most `1/64`; `u_max` must be at least 1.
pub fn build_rho<R: Real>(u_max: f64, h: f64) -> Result<RhoTable<R>> {
    if !(u_max >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "u_max must be >= 1, got {u_max}"
        )));
    }
    if !(h > 0.0) || h > 1.0 / 64.0 {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must lie in (0, 1/64], got {h}"
        )));
    }
    let inv_h_f = 1.0 / h;
    let inv_h = inv_h_f.round();
    if (inv_h_f - inv_h).abs() > 1e-9 * inv_h {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {h} does not divide 1 evenly"
        )));
    }
    let inv_h = inv_h as u32;
    let n = (u_max * inv_h as f64 - 1e-9).ceil() as usize;

    let wide = advance_grid::<R::Wide>(inv_h, n)?;
    Ok(RhoTable {
        u_max,
        inv_h,
        log_values: wide.into_iter().map(R::from_wide).collect(),
    })
}

/// Relative width of the guard band around the predicted per-step decrement
/// (see `advance_grid`); the true decrement drifts per step by parts in 1e5,
/// so the band only ever binds once the values sink into arithmetic noise.
const DECREMENT_BAND: f64 = 1e-3;

/// March the integral form across the grid in the wide scalar: one cell per
/// step, five-node Gauss-Legendre per cell.
///
/// The state is carried linearly (as `rho` times a power-of-two scale, so
/// deep tails never underflow), because the perturbation dynamics of the
/// delay equation are only stable in linear form: a log-space march feeds
/// noise back through exponentials of value differences and blows up.
/// Linear marching is stable but information-limited: an absolute error
/// seeded at small `u` decays like `1/u` while `rho` falls ~30x per unit,
/// so once `rho(u)` sinks under the arithmetic noise of the early values
/// (near u = 20 for double-double) nothing at this precision can track it.
/// Past that frontier the per-step decrement is clamped to the trend of the
/// reliably computed window, which continues the grid smoothly, positive
/// and strictly decreasing, but with no relative-accuracy claim.
fn advance_grid<W: Real>(inv_h: u32, n: usize) -> Result<Vec<W>> {
    let ih = inv_h as usize;
    let mut out = vec![W::zero(); n + 1]; // log rho; = 0 on [0, 1]
    let mut v = vec![W::one(); n + 1]; // rho times 2^(scale)
    let mut sigma = W::zero(); // -scale * ln 2
    let (nodes, weights) = gauss_legendre_5::<W>();
    let inv_h_w = ru::<W>(inv_h as u64);
    let half_h = (W::one() / inv_h_w) / rf(2.0);
    let band = rf::<W>(DECREMENT_BAND);
    let clamp_from = 3 * ih; // the first two units prime the trend
    let mut prev_delta = W::zero();
    let mut trend = W::zero();

    for k in ih + 1..=n {
        let u = ru::<W>(k as u64) / inv_h_w;
        let mid = u - half_h;
        let mut q = W::zero();
        for i in 0..5 {
            let t = mid + half_h * nodes[i];
            let s = t - W::one(); // delayed argument
            let scaled_rho_s = if s <= W::one() {
                (-sigma).exp()
            } else {
                (lagrange10(&out, inv_h, s) - sigma).exp()
            };
            q = q + weights[i] * scaled_rho_s / t;
        }
        q = q * half_h;

        let mut delta = q / v[k - 1];
        if k > clamp_from {
            let pred = prev_delta + trend;
            let lo = pred * (W::one() - band);
            let hi = pred * (W::one() + band);
            delta = delta.max(lo).min(hi);
        }
        if !(delta > W::zero() && delta < W::one()) {
            return Err(Error::Internal(format!(
                "rho step at grid index {k} lost positivity (delta = {delta})"
            )));
        }
        v[k] = v[k - 1] * (W::one() - delta);
        out[k] = v[k].ln() + sigma;
        trend = delta - prev_delta;
        prev_delta = delta;

        // Rescale the active window by an exact power of two well before
        // the linear values could underflow.
        if v[k] < rf(1e-180) {
            let factor = rf::<W>(2.0).powi(600);
            for slot in v[k.saturating_sub(ih + 16)..=k].iter_mut() {
                *slot = *slot * factor;
            }
            sigma = sigma - rf::<W>(600.0) * W::LN_2();
        }
    }
    Ok(out)
}

/// Nodes and weights of the five-point Gauss-Legendre rule on `[-1, 1]`,
/// refined to the working precision by Newton on the degree-5 Legendre
/// polynomial so no decimal constants limit the accuracy.
fn gauss_legendre_5<W: Real>() -> ([W; 5], [W; 5]) {
    let seeds = [
        -0.906179845938664,
        -0.5384693101056831,
        0.0,
        0.5384693101056831,
        0.906179845938664,
    ];
    let mut nodes = [W::zero(); 5];
    let mut weights = [W::zero(); 5];
    for (i, &seed) in seeds.iter().enumerate() {
        let mut x = rf::<W>(seed);
        if seed != 0.0 {
            for _ in 0..3 {
                let (p, dp) = legendre5(x);
                x = x - p / dp;
            }
        }
        let (_, dp) = legendre5(x);
        nodes[i] = x;
        weights[i] = rf::<W>(2.0) / ((W::one() - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `P_5(x)` and its derivative.
fn legendre5<W: Real>(x: W) -> (W, W) {
    let x2 = x * x;
    let p = x * (rf::<W>(63.0) * x2 * x2 - rf::<W>(70.0) * x2 + rf::<W>(15.0)) / rf(8.0);
    let dp = (rf::<W>(315.0) * x2 * x2 - rf::<W>(210.0) * x2 + rf::<W>(15.0)) / rf(8.0);
    (p, dp)
}

/// Ten-point Lagrange interpolation of the running `log rho` grid at `s`,
/// with the stencil clamped inside the unit interval containing `s` (the
/// curve loses a derivative at each small integer).
fn lagrange10<W: Real>(lv: &[W], inv_h: u32, s: W) -> W {
    const POINTS: usize = 10;
    let ih = inv_h as usize;
    let n = lv.len() - 1;
    let sf = s.to_f64().unwrap_or(0.0);
    let seg_lo = ((sf.floor() as usize) * ih).min(n);
    let seg_hi = (seg_lo + ih).min(n);
    let hi_cap = if seg_hi >= seg_lo + (POINTS - 1) {
        seg_hi - (POINTS - 1)
    } else {
        n.saturating_sub(POINTS - 1)
    };
    let lo_cap = seg_lo.min(hi_cap);
    let i0 = ((sf * inv_h as f64).floor() as usize)
        .saturating_sub(POINTS / 2 - 1)
        .clamp(lo_cap, hi_cap);
    // Stencil offset in grid units, carried at full precision.
    let t = s * ru::<W>(inv_h as u64) - ru::<W>(i0 as u64);
    let mut acc = W::zero();
    for i in 0..POINTS {
        let mut w = W::one();
        for j in 0..POINTS {
            if j != i {
                let denom = rf::<W>(i as f64 - j as f64);
                w = w * (t - ru::<W>(j as u64)) / denom;
            }
        }
        acc = acc + w * lv[i0 + i];
    }
    acc
}

/// Cubic interpolation of `log rho` at `s` over the stored grid, with the
/// four-point stencil clamped inside the unit interval containing `s` (rho
/// is not smooth across integers).
fn interp_log<R: Real>(log_values: &[R], inv_h: u32, n: usize, s: f64) -> R {
    if s <= 1.0 {
        return R::zero();
    }
    let ihf = inv_h as f64;
    let seg_lo = ((s.floor() as usize) * inv_h as usize).min(n);
    let seg_hi = (seg_lo + inv_h as usize).min(n);
    let si = s * ihf;
    let mut i0 = (si.floor() as usize).saturating_sub(1);
    let lo_cap = if seg_hi - seg_lo >= 3 { seg_lo } else { 0 };
    let hi_cap = if seg_hi >= 3 { seg_hi - 3 } else { 0 };
    i0 = i0.clamp(lo_cap.min(hi_cap), hi_cap);
    let t = si - i0 as f64;
    let w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    let w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    let w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    let w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    rf::<R>(w0) * log_values[i0]
        + rf::<R>(w1) * log_values[i0 + 1]
        + rf::<R>(w2) * log_values[i0 + 2]
        + rf::<R>(w3) * log_values[i0 + 3]
}

impl<R: Real> RhoTable<R> {
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn h(&self) -> f64 {
        1.0 / self.inv_h as f64
    }

    /// Raw grid of `log rho` values; index `k` holds `log rho(k h)`.
    pub fn log_values(&self) -> &[R] {
        &self.log_values
    }

    /// Rebuild a table from persisted parts (used by the store reader).
    pub(crate) fn from_parts(u_max: f64, inv_h: u32, log_values: Vec<R>) -> RhoTable<R> {
        RhoTable {
            u_max,
            inv_h,
            log_values,
        }
    }

    pub(crate) fn inv_h(&self) -> u32 {
        self.inv_h
    }

    /// `log rho(u)`; `-inf` for `u < 0`, exact 0 for `u <= 1`, error past
    /// `u_max`.
    pub fn rho_log(&self, u: f64) -> Result<R> {
        if u < 0.0 {
            return Ok(R::neg_infinity());
        }
        if u <= 1.0 {
            return Ok(R::zero());
        }
        if u > self.u_max {
            return Err(Error::OutOfRange(format!(
                "rho({u}) beyond table limit {}; extend the table",
                self.u_max
            )));
        }
        Ok(interp_log(
            &self.log_values,
            self.inv_h,
            self.log_values.len() - 1,
            u,
        ))
    }

    /// `rho(u)` by cubic interpolation of the stored logs; 0 for `u < 0` by
    /// convention, exactly 1 on `[0, 1]`.
    pub fn rho(&self, u: f64) -> Result<R> {
        Ok(self.rho_log(u)?.exp())
    }
}

/// Two-term estimate `x rho(u) + (1 - gamma) (x / log x) rho(u - 1)` with
/// `u = log x / log y`, assembled in log scale.
pub fn estimate_dickman<R: Real>(x_log: R, y: u64, table: &RhoTable<R>) -> Result<Estimate<R>> {
    estimate_dickman_with(x_log, y, table, true)
}

/// As [`estimate_dickman`], with the correction term optional so the plain
/// `x rho(u)` form can be compared against it.
pub fn estimate_dickman_with<R: Real>(
    x_log: R,
    y: u64,
    table: &RhoTable<R>,
    two_term: bool,
) -> Result<Estimate<R>> {
    if y < 2 {
        return Err(Error::InvalidArgument(format!("y must be >= 2, got {y}")));
    }
    if x_log <= R::zero() {
        return Err(Error::InvalidArgument("log x must be positive".into()));
    }
    let u = x_log.to_f64().unwrap_or(f64::INFINITY) / (y as f64).ln();
    let main_log = x_log + table.rho_log(u)?;
    let total = if two_term && u > 1.0 {
        let corr_log =
            rf::<R>(1.0 - EULER_GAMMA).ln() + x_log - x_log.ln() + table.rho_log(u - 1.0)?;
        // log(e^a + e^b) with the larger exponent factored out.
        let (hi, lo) = if main_log >= corr_log {
            (main_log, corr_log)
        } else {
            (corr_log, main_log)
        };
        hi + (lo - hi).exp().ln_1p()
    } else {
        main_log
    };
    Ok(Estimate::from_log(Method::Dickman, total))
}
