//! Estimation results and method labels shared by all estimators.

use crate::error::{Error, Result};
use crate::Real;

/// The counting/estimation methods this crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Buchstab,
    Ennola,
    Ht,
    HtAlpha,
    HtFast,
    Dickman,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Buchstab,
        Method::Ennola,
        Method::Ht,
        Method::HtAlpha,
        Method::HtFast,
        Method::Dickman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Buchstab => "buchstab",
            Method::Ennola => "ennola",
            Method::Ht => "ht",
            Method::HtAlpha => "htalpha",
            Method::HtFast => "htfast",
            Method::Dickman => "dickman",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buchstab" => Ok(Method::Buchstab),
            "ennola" => Ok(Method::Ennola),
            "ht" => Ok(Method::Ht),
            "htalpha" => Ok(Method::HtAlpha),
            "htfast" => Ok(Method::HtFast),
            "dickman" => Ok(Method::Dickman),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Per-run diagnostics; fields are filled only where they apply.
#[derive(Debug, Clone)]
pub struct Diagnostics<R> {
    /// Converged saddle point (ht family).
    pub alpha: Option<R>,
    /// Newton iterations on the exact prime sums (ht, htalpha stage two on
    /// the approximate sums reports through `iterations_fast`).
    pub iterations: Option<u32>,
    /// Newton iterations on the approximate prime sums (htfast, htalpha).
    pub iterations_fast: Option<u32>,
    /// Series truncation order used (ennola).
    pub m: Option<usize>,
    /// Wall-clock seconds, when the caller timed the run.
    pub seconds: Option<f64>,
}

impl<R> Default for Diagnostics<R> {
    fn default() -> Self {
        Diagnostics {
            alpha: None,
            iterations: None,
            iterations_fast: None,
            m: None,
            seconds: None,
        }
    }
}

/// An estimate of `psi(x, y)`.
///
/// `log_value` (natural log) is always present; `value` is filled only when
/// the exponential is representable, so results survive ranges where the
/// count itself overflows.
#[derive(Debug, Clone)]
pub struct Estimate<R> {
    pub method: Method,
    pub log_value: R,
    pub value: Option<R>,
    pub diagnostics: Diagnostics<R>,
}

impl<R: Real> Estimate<R> {
    /// Assemble an estimate from its natural log, materializing the direct
    /// value when `exp` stays in range.
    pub fn from_log(method: Method, log_value: R) -> Self {
        let v = log_value.exp();
        Estimate {
            method,
            log_value,
            value: if v.is_finite() { Some(v) } else { None },
            diagnostics: Diagnostics::default(),
        }
    }
}
