//! Small numeric helpers used across the estimators.

use crate::{rf, Real};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance
/// `rel_tol`.
///
/// Refinement stops when the Richardson estimate of the local error drops
/// below the local share of the tolerance, or at `max_depth` splits.
pub fn adaptive_simpson<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    rel_tol: R,
    max_depth: u32,
) -> R {
    if a == b {
        return R::zero();
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / rf(2.0);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // Error budget is scaled by the first whole-interval estimate so that
    // the tolerance stays relative to the full integral.
    let scale = whole.abs().max(R::min_positive_value());
    recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth)
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / rf(6.0) * (fa + rf::<R>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    eps: R,
    depth: u32,
) -> R {
    let m = (a + b) / rf(2.0);
    let lm = (a + m) / rf(2.0);
    let rm = (m + b) / rf(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= rf::<R>(15.0) * eps {
        return left + right + delta / rf(15.0);
    }
    let half_eps = eps / rf(2.0);
    recurse(f, a, m, fa, flm, fm, left, half_eps, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, half_eps, depth - 1)
}

/// Integer square root of `n` (largest `s` with `s*s <= n`).
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut s = (n as f64).sqrt() as u64;
    while s > 0 && s.checked_mul(s).map_or(true, |sq| sq > n) {
        s -= 1;
    }
    while (s + 1).checked_mul(s + 1).map_or(false, |sq| sq <= n) {
        s += 1;
    }
    s
}
