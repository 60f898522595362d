//! Counting and estimating smooth numbers.
//!
//! A positive integer is *y-smooth* when none of its prime factors exceeds
//! `y`; `psi(x, y)` counts the y-smooth integers in `[1, x]`. This crate
//! provides one exact method and four estimators, plus the machinery to pick
//! between them:
//!
//! * [`exact_count`] — exact counts from the Buchstab identity, with an
//!   independent brute-force enumerator used as a test oracle.
//! * [`ennola`] — a truncated-series estimator driven by precomputed
//!   coefficient tables; extremely accurate, but the tables get expensive as
//!   `y` grows.
//! * [`saddlepoint`] — the saddle-point estimators `ht`, `htfast`, and the
//!   two-stage `htalpha` which warm-starts the exact Newton solve from the
//!   fast one.
//! * [`dickman`] — the classical `x·rho(u)` estimate with a first-order
//!   correction term.
//! * [`selector`] — an empirical policy mapping `(x, y)` to a recommended
//!   method.
//! * [`store`] — plain-text persistence for the coefficient and rho tables.
//!
//! The numeric core is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix `f64`, which is what the CLI and the test
//! suite use.

pub mod dd;
pub mod dickman;
pub mod ennola;
pub mod error;
pub mod estimate;
pub mod exact_count;
pub mod primes;
pub mod saddlepoint;
pub mod selector;
pub mod store;
pub mod util;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use estimate::Method;
pub use primes::PrimeTable;
pub use selector::SelectorPolicy;

/// Floating-point scalar the numeric core is generic over.
///
/// `f32`, `f64` and [`DoubleDouble`] are provided; a wider type can be
/// plugged in by implementing this trait. `DIGITS` is the number of
/// significant decimal digits the type guarantees, recorded in persisted
/// tables so a reader can refuse a table built at lower precision than it
/// needs. `Wide` names a higher-precision companion used internally where a
/// computation is ill-conditioned in the scalar itself.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + std::fmt::Display
    + std::fmt::Debug
    + std::fmt::LowerExp
    + std::str::FromStr
    + Send
    + Sync
    + 'static
{
    const DIGITS: u32;
    type Wide: Real;

    fn from_wide(w: Self::Wide) -> Self;
}

impl Real for f32 {
    const DIGITS: u32 = 6;
    type Wide = f64;

    fn from_wide(w: f64) -> f32 {
        w as f32
    }
}

impl Real for f64 {
    const DIGITS: u32 = 15;
    type Wide = DoubleDouble;

    fn from_wide(w: DoubleDouble) -> f64 {
        w.to_f64_value()
    }
}

impl Real for DoubleDouble {
    const DIGITS: u32 = 31;
    type Wide = DoubleDouble;

    fn from_wide(w: DoubleDouble) -> DoubleDouble {
        w
    }
}

/// Default scalar for the concrete aliases below.
pub type Scalar = f64;

pub type Estimate = estimate::Estimate<Scalar>;
pub type EnnolaTable = ennola::EnnolaTable<Scalar>;
pub type RhoTable = dickman::RhoTable<Scalar>;
pub type SaddleContext = saddlepoint::SaddleContext<Scalar>;

pub(crate) fn rf<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("f64 converts to scalar")
}

pub(crate) fn ru<R: Real>(v: u64) -> R {
    R::from_u64(v).expect("u64 converts to scalar")
}
