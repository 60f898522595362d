//! Empirical policy for picking an estimation method from `(x, y)`.
//!
//! The regions, in the order they are tested:
//!
//! 1. exact counting, when a cheap magnitude probe says the count itself is
//!    small enough to enumerate within the configured work budget (and `x`
//!    fits a machine word);
//! 2. the rho estimate, once `y >= (log x)^dickman_exponent` where it is
//!    trustworthy;
//! 3. the series estimator, for `y` below `(log x)^ennola_proven_exponent`,
//!    or up to `ennola_y_cap` when a coefficient table is already cached;
//! 4. the two-stage saddle point up to `ht_to_htfast_y`;
//! 5. the fast saddle point for everything else.
//!
//! Every boundary is configuration, not a constant: the thresholds behind
//! the regions involve unknown constants and small exponents that cannot be
//! written down exactly, so the defaults here are calibrated empirically
//! and meant to be retuned from comparison sweeps.
//!
//! `x` and `y` enter as natural logs so recommendations stay well-defined
//! far past the range of machine integers (or even doubles).

use crate::dickman::{build_rho, RhoTable};
use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::primes::PrimeTable;
use std::sync::OnceLock;

/// Thresholds steering [`recommend`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorPolicy {
    /// Exact counting is recommended while the probed count stays at or
    /// below this many units of work.
    pub buchstab_work_budget: u64,
    /// Exponent of the proven series-estimator region `y <= (log x)^e`.
    pub ennola_proven_exponent: f64,
    /// Largest `y` the series estimator is recommended for when its table
    /// is already cached; beyond this the precomputation gets slow.
    pub ennola_y_cap: u64,
    /// Switch from the two-stage saddle point to the fast one above this y.
    pub ht_to_htfast_y: u64,
    /// Exponent in the rho-validity threshold `y >= (log x)^e`.
    pub dickman_exponent: f64,
    /// Whether a coefficient table is already cached (widens the series
    /// estimator region to `ennola_y_cap`).
    pub ennola_table_cached: bool,
    /// Forced method bypassing the policy entirely.
    pub overrides: Option<Method>,
}

impl Default for SelectorPolicy {
    fn default() -> Self {
        SelectorPolicy {
            buchstab_work_budget: 10_000_000,
            ennola_proven_exponent: 0.75,
            ennola_y_cap: 1 << 16,
            ht_to_htfast_y: 1 << 18,
            dickman_exponent: 2.5,
            ennola_table_cached: false,
            overrides: None,
        }
    }
}

impl SelectorPolicy {
    /// Parse a `key = value` configuration; keys match the field names.
    /// Blank lines and `#` comments are ignored.
    pub fn from_config_str(text: &str) -> Result<SelectorPolicy> {
        let mut policy = SelectorPolicy::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::InvalidArgument(format!("line {}: bad {what}: `{value}`", lineno + 1))
            };
            match key {
                "buchstab_work_budget" => {
                    policy.buchstab_work_budget = value.parse().map_err(|_| bad("integer"))?
                }
                "ennola_proven_exponent" => {
                    policy.ennola_proven_exponent = value.parse().map_err(|_| bad("number"))?
                }
                "ennola_y_cap" => policy.ennola_y_cap = value.parse().map_err(|_| bad("integer"))?,
                "ht_to_htfast_y" => {
                    policy.ht_to_htfast_y = value.parse().map_err(|_| bad("integer"))?
                }
                "dickman_exponent" => {
                    policy.dickman_exponent = value.parse().map_err(|_| bad("number"))?
                }
                "ennola_table_cached" => {
                    policy.ennola_table_cached = value.parse().map_err(|_| bad("bool"))?
                }
                "overrides" => {
                    policy.overrides = match value {
                        "none" | "" => None,
                        m => Some(m.parse()?),
                    }
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "line {}: unknown policy key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        policy.validate()?;
        Ok(policy)
    }

    pub fn load(path: &std::path::Path) -> Result<SelectorPolicy> {
        SelectorPolicy::from_config_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.buchstab_work_budget == 0 || self.ennola_y_cap == 0 || self.ht_to_htfast_y == 0 {
            return Err(Error::InvalidArgument(
                "policy thresholds must be positive".into(),
            ));
        }
        if !(self.ennola_proven_exponent > 0.0 && self.ennola_proven_exponent < 1.0) {
            return Err(Error::InvalidArgument(
                "ennola_proven_exponent must lie in (0, 1)".into(),
            ));
        }
        if !(self.dickman_exponent > 2.0) {
            return Err(Error::InvalidArgument(
                "dickman_exponent must exceed 2".into(),
            ));
        }
        Ok(())
    }
}

/// Largest `log x` for which exact counting is even addressable (x must fit
/// a 64-bit integer).
const MAX_EXACT_X_LOG: f64 = 63.0 * std::f64::consts::LN_2;

fn probe_rho() -> &'static RhoTable<f64> {
    static TABLE: OnceLock<RhoTable<f64>> = OnceLock::new();
    TABLE.get_or_init(|| build_rho(64.0, 1.0 / 64.0).expect("probe rho table builds"))
}

/// Prefix sums over the primes up to 1e5, for the leading-term probe.
struct ProbePrimes {
    primes: Vec<u64>,
    lnln_prefix: Vec<f64>,    // lnln_prefix[j] = sum_{i<j} ln ln p_i
    lnfact_prefix: Vec<f64>,  // lnfact_prefix[j] = ln j!
}

fn probe_primes() -> &'static ProbePrimes {
    static DATA: OnceLock<ProbePrimes> = OnceLock::new();
    DATA.get_or_init(|| {
        let table = PrimeTable::build(100_000).expect("probe prime table builds");
        let primes = table.primes().to_vec();
        let mut lnln_prefix = Vec::with_capacity(primes.len() + 1);
        let mut lnfact_prefix = Vec::with_capacity(primes.len() + 1);
        lnln_prefix.push(0.0);
        lnfact_prefix.push(0.0);
        for (j, &p) in primes.iter().enumerate() {
            lnln_prefix.push(lnln_prefix[j] + (p as f64).ln().ln());
            lnfact_prefix.push(lnfact_prefix[j] + ((j + 1) as f64).ln());
        }
        ProbePrimes {
            primes,
            lnln_prefix,
            lnfact_prefix,
        }
    })
}

/// Natural log of a quick magnitude probe of `psi(x, y)`, used to decide
/// whether exact counting is affordable.
///
/// The probe is `min(x, max(rho-estimate, leading series term))`: the rho
/// estimate carries the large-y regimes, the leading term
/// `(log x)^pi(y) / (pi(y)! prod log p)` the small-y ones, and `x` bounds
/// everything. Both branches underestimate outside their home turf, hence
/// the max.
pub fn buchstab_probe_log(x_log: f64, y_log: f64) -> f64 {
    let u = x_log / y_log;
    if u <= 1.0 {
        return x_log;
    }
    let rho = probe_rho();
    let rho_log = if u <= rho.u_max() {
        rho.rho_log(u).expect("u within probe table")
    } else {
        // Extend with the last unit slope; this overestimates rho, which
        // only makes the probe more conservative.
        let top = rho.rho_log(rho.u_max()).expect("top of probe table");
        let slope = top - rho.rho_log(rho.u_max() - 1.0).expect("inside probe table");
        top + slope * (u - rho.u_max())
    };
    let dickman_term = x_log + rho_log;

    let y = y_log.exp();
    let data = probe_primes();
    let leading_term = if y <= *data.primes.last().expect("nonempty") as f64 {
        let j = data.primes.partition_point(|&p| (p as f64) <= y);
        j as f64 * x_log.ln() - data.lnln_prefix[j] - data.lnfact_prefix[j]
    } else {
        f64::NEG_INFINITY
    };

    x_log.min(dickman_term.max(leading_term))
}

/// Recommend a method for estimating `psi(x, y)`, from the natural logs of
/// `x` and `y`. Total and deterministic for a fixed policy.
pub fn recommend(x_log: f64, y_log: f64, policy: &SelectorPolicy) -> Method {
    if let Some(forced) = policy.overrides {
        return forced;
    }
    if x_log <= MAX_EXACT_X_LOG
        && buchstab_probe_log(x_log, y_log) <= (policy.buchstab_work_budget as f64).ln()
    {
        return Method::Buchstab;
    }
    if y_log >= policy.dickman_exponent * x_log.ln() {
        return Method::Dickman;
    }
    if y_log <= policy.ennola_proven_exponent * x_log.ln()
        || (policy.ennola_table_cached && y_log <= (policy.ennola_y_cap as f64).ln())
    {
        return Method::Ennola;
    }
    if y_log <= (policy.ht_to_htfast_y as f64).ln() {
        return Method::HtAlpha;
    }
    Method::HtFast
}

/// [`recommend`] for a machine-integer `y`.
pub fn recommend_xy(x_log: f64, y: u64, policy: &SelectorPolicy) -> Method {
    recommend(x_log, (y as f64).ln(), policy)
}
