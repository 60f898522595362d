//! Double-double arithmetic: an unevaluated sum of two `f64`s giving about
//! 31 significant decimal digits.
//!
//! The rho-table build needs it: the delay equation amplifies any absolute
//! error made at small `u` by the ratio `rho(small)/rho(large)`, which
//! passes 1e9 by `u = 10`, so plain doubles cannot deliver the accuracy the
//! stored grid promises. The type implements enough of `num_traits::Float`
//! to slot into the generic numeric code as [`crate::Real`].
//!
//! Arithmetic (add, sub, mul, div, sqrt, exp, ln and friends) carries the
//! full double-double precision. The trigonometric group is delegated to
//! `f64` (nothing in this crate evaluates it); results there are only
//! double-accurate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn from_f64(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Round to the nearest `f64`.
    pub fn to_f64_value(self) -> f64 {
        self.hi + self.lo
    }

    const LN_2_DD: DoubleDouble =
        DoubleDouble::new(std::f64::consts::LN_2, 2.3190468138462995584e-17);
    const E_DD: DoubleDouble =
        DoubleDouble::new(std::f64::consts::E, 1.4456468917292502e-16);
    const PI_DD: DoubleDouble =
        DoubleDouble::new(std::f64::consts::PI, 1.2246467991473531772e-16);

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble::from_f64(v)
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() {
            return DoubleDouble::from_f64(q1);
        }
        let r = self - rhs * DoubleDouble::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * DoubleDouble::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        DoubleDouble { hi: s, lo: e } + DoubleDouble::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        use num_traits::Float;
        self - (self / rhs).trunc() * rhs
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64_value(), f)
    }
}

// Only double-accurate: used for diagnostics, never for persisted tables.
impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&self.to_f64_value(), f)
    }
}

impl std::str::FromStr for DoubleDouble {
    type Err = std::num::ParseFloatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(DoubleDouble::from_f64(s.parse::<f64>()?))
    }
}

impl num_traits::Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl num_traits::One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from_f64(1.0)
    }
}

impl num_traits::Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(str: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        assert_eq!(radix, 10, "only decimal parsing is supported");
        str.parse()
    }
}

impl num_traits::ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.to_f64_value().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_f64_value().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.to_f64_value())
    }
}

impl num_traits::FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let rem = n.wrapping_sub(hi as i64);
        Some(DoubleDouble::from_f64(hi) + DoubleDouble::from_f64(rem as f64))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        // hi rounds to within 2^11 of n, so the difference fits an i64.
        let rem = if hi >= n as f64 && hi as u64 >= n {
            -((hi as u64).wrapping_sub(n) as i64 as f64)
        } else {
            n.wrapping_sub(hi as u64) as i64 as f64
        };
        Some(DoubleDouble::from_f64(hi) + DoubleDouble::from_f64(rem))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(DoubleDouble::from_f64(n))
    }
}

impl num_traits::NumCast for DoubleDouble {
    fn from<T: num_traits::ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(DoubleDouble::from_f64)
    }
}

impl num_traits::Float for DoubleDouble {
    fn nan() -> Self {
        DoubleDouble::from_f64(f64::NAN)
    }
    fn infinity() -> Self {
        DoubleDouble::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        DoubleDouble::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        DoubleDouble::from_f64(-0.0)
    }
    fn min_value() -> Self {
        DoubleDouble::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Self {
        DoubleDouble::from_f64(f64::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        DoubleDouble::from_f64(f64::MAX)
    }
    fn epsilon() -> Self {
        DoubleDouble::from_f64(2f64.powi(-104))
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> std::num::FpCategory {
        self.hi.classify()
    }

    fn floor(self) -> Self {
        let f = self.hi.floor();
        if f == self.hi {
            let (hi, lo) = quick_two_sum(f, self.lo.floor());
            DoubleDouble { hi, lo }
        } else {
            DoubleDouble::from_f64(f)
        }
    }
    fn ceil(self) -> Self {
        -((-self).floor())
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn round(self) -> Self {
        (self + DoubleDouble::from_f64(0.5)).floor()
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        DoubleDouble::from_f64(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        DoubleDouble::from_f64(1.0) / self
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return DoubleDouble::from_f64(1.0);
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = DoubleDouble::from_f64(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi < 0.0 {
            return Self::nan();
        }
        if self.hi == 0.0 {
            return DoubleDouble::from_f64(0.0);
        }
        // One Newton step on a double-accurate seed reaches full precision.
        let y = DoubleDouble::from_f64(self.hi.sqrt());
        (y + self / y) * DoubleDouble::from_f64(0.5)
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::infinity();
        }
        if self.hi < -709.0 {
            return DoubleDouble::from_f64(0.0);
        }
        // exp(x) = 2^k exp(r), r = x - k ln 2, then exp(r) = exp(r/64)^64
        // with the reduced argument small enough for a short Taylor sum.
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - DoubleDouble::from_f64(k) * Self::LN_2_DD;
        let rs = r.ldexp(-6);
        let mut term = rs;
        let mut sum = DoubleDouble::from_f64(1.0) + rs;
        for i in 2..=14u32 {
            term = term * rs / DoubleDouble::from_f64(i as f64);
            sum = sum + term;
        }
        for _ in 0..6 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }
    fn exp2(self) -> Self {
        (self * Self::LN_2_DD).exp()
    }
    fn exp_m1(self) -> Self {
        self.exp() - DoubleDouble::from_f64(1.0)
    }

    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::from_f64(self.hi.ln());
        }
        // Newton on exp: each pass doubles the correct digits.
        let mut y = DoubleDouble::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DoubleDouble::from_f64(1.0);
        }
        y
    }
    fn ln_1p(self) -> Self {
        (DoubleDouble::from_f64(1.0) + self).ln()
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Self::LN_2_DD
    }
    fn log10(self) -> Self {
        self.ln() / DoubleDouble::from_f64(10.0).ln()
    }

    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            DoubleDouble::from_f64(0.0)
        }
    }
    fn cbrt(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().cbrt())
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }

    // Trigonometric group: double accuracy only (unused by the numerics
    // in this crate).
    fn sin(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().sin())
    }
    fn cos(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().cos())
    }
    fn tan(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().tan())
    }
    fn asin(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().asin())
    }
    fn acos(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().acos())
    }
    fn atan(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().atan())
    }
    fn atan2(self, other: Self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().atan2(other.to_f64_value()))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn sinh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().sinh())
    }
    fn cosh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().cosh())
    }
    fn tanh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().tanh())
    }
    fn asinh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().asinh())
    }
    fn acosh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().acosh())
    }
    fn atanh(self) -> Self {
        DoubleDouble::from_f64(self.to_f64_value().atanh())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.to_f64_value().integer_decode()
    }
}

impl num_traits::FloatConst for DoubleDouble {
    fn E() -> Self {
        Self::E_DD
    }
    fn FRAC_1_PI() -> Self {
        DoubleDouble::from_f64(1.0) / Self::PI_DD
    }
    fn FRAC_1_SQRT_2() -> Self {
        use num_traits::Float;
        DoubleDouble::from_f64(2.0).sqrt().recip()
    }
    fn FRAC_2_PI() -> Self {
        DoubleDouble::from_f64(2.0) / Self::PI_DD
    }
    fn FRAC_2_SQRT_PI() -> Self {
        use num_traits::Float;
        DoubleDouble::from_f64(2.0) / Self::PI_DD.sqrt()
    }
    fn FRAC_PI_2() -> Self {
        Self::PI_DD.ldexp(-1)
    }
    fn FRAC_PI_3() -> Self {
        Self::PI_DD / DoubleDouble::from_f64(3.0)
    }
    fn FRAC_PI_4() -> Self {
        Self::PI_DD.ldexp(-2)
    }
    fn FRAC_PI_6() -> Self {
        Self::PI_DD / DoubleDouble::from_f64(6.0)
    }
    fn FRAC_PI_8() -> Self {
        Self::PI_DD.ldexp(-3)
    }
    fn LN_10() -> Self {
        use num_traits::Float;
        DoubleDouble::from_f64(10.0).ln()
    }
    fn LN_2() -> Self {
        Self::LN_2_DD
    }
    fn LOG10_E() -> Self {
        use num_traits::Float;
        Self::E_DD.log10()
    }
    fn LOG2_E() -> Self {
        use num_traits::Float;
        Self::E_DD.log2()
    }
    fn PI() -> Self {
        Self::PI_DD
    }
    fn SQRT_2() -> Self {
        use num_traits::Float;
        DoubleDouble::from_f64(2.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Float, FloatConst, FromPrimitive};

    fn dd(v: f64) -> DoubleDouble {
        DoubleDouble::from_f64(v)
    }

    /// |a - b| as f64, for asserting double-double-level agreement.
    fn gap(a: DoubleDouble, b: DoubleDouble) -> f64 {
        (a - b).abs().to_f64_value()
    }

    #[test]
    fn addition_keeps_low_bits() {
        let big = dd(1e16);
        let sum = big + dd(1.0) - big;
        assert_eq!(sum.to_f64_value(), 1.0);
        // And far beyond f64: (1 + 1e-25) - 1 survives.
        let tiny = dd(1.0) + dd(1e-25) - dd(1.0);
        assert!((tiny.to_f64_value() - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn multiplication_error_term() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60 needs 61 mantissa bits: beyond
        // one double, comfortably inside a double-double.
        let x = dd(1.0 + 2f64.powi(-30));
        let sq = x * x;
        let expected = dd(1.0) + dd(2f64.powi(-29)) + dd(2f64.powi(-60));
        assert!(gap(sq, expected) < 1e-40);
    }

    #[test]
    fn division_round_trip() {
        for &(a, b) in &[(3.0, 7.0), (1e10, 3.1415), (2.5e-7, 1.7)] {
            let q = dd(a) / dd(b);
            assert!(gap(q * dd(b), dd(a)) < 1e-28 * a.abs());
        }
    }

    #[test]
    fn exp_and_ln_invert_each_other() {
        for &x in &[0.3, 1.0, 2.5, 10.0, 100.0, 1e-8] {
            let y = dd(x).ln().exp();
            assert!(gap(y, dd(x)) < 1e-27 * x.abs(), "round trip at {x}");
            let z = dd(x).exp().ln();
            assert!(gap(z, dd(x)) < 1e-27 * x.abs().max(1.0), "other way at {x}");
        }
    }

    #[test]
    fn ln_two_matches_reference() {
        let computed = dd(2.0).ln();
        assert!(gap(computed, DoubleDouble::LN_2()) < 1e-30);
    }

    #[test]
    fn exp_one_is_e() {
        assert!(gap(dd(1.0).exp(), DoubleDouble::E()) < 1e-29);
    }

    #[test]
    fn exp_additivity() {
        let a = dd(0.7);
        let b = dd(1.9);
        // Values near e^2.6 ~ 13.5 with ~1e-30 relative arithmetic error.
        assert!(gap((a + b).exp(), a.exp() * b.exp()) < 1e-27);
    }

    #[test]
    fn ln_1p_accurate_for_tiny_arguments() {
        let x = dd(1e-20);
        let r = x.ln_1p();
        // ln(1+x) = x - x^2/2 + ...; x^2 ~ 1e-40 is below dd resolution here.
        assert!(gap(r, x) < 1e-39);
        // And a moderately small value against the series.
        let x = dd(1e-8);
        let expected = x - x * x / dd(2.0) + x * x * x / dd(3.0);
        assert!(gap(x.ln_1p(), expected) < 1e-30);
    }

    #[test]
    fn sqrt_squares_back() {
        for &x in &[2.0, 10.0, 1e-12, 12345.6789] {
            let s = dd(x).sqrt();
            assert!(gap(s * s, dd(x)) < 1e-28 * x);
        }
    }

    #[test]
    fn rounding_family() {
        assert_eq!(dd(2.7).floor().to_f64_value(), 2.0);
        assert_eq!(dd(-2.7).floor().to_f64_value(), -3.0);
        assert_eq!(dd(-2.7).trunc().to_f64_value(), -2.0);
        assert_eq!(dd(2.5).round().to_f64_value(), 3.0);
        // An integral hi with a negative lo floors down.
        let x = dd(3.0) + dd(-1e-20);
        assert_eq!(x.floor().to_f64_value(), 2.0);
    }

    #[test]
    fn from_u64_is_exact() {
        let n = (1u64 << 63) + 12345;
        let x = DoubleDouble::from_u64(n).unwrap();
        // hi alone cannot represent n; hi + lo must.
        let back = x.hi() as i128 + x.lo() as i128;
        assert_eq!(back, n as i128);
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let x = dd(1.1);
        let mut acc = dd(1.0);
        for _ in 0..7 {
            acc = acc * x;
        }
        assert!(gap(x.powi(7), acc) < 1e-30);
        assert!(gap(x.powi(-2) * x * x, dd(1.0)) < 1e-30);
    }

    #[test]
    fn comparisons_see_the_low_word() {
        let a = dd(1.0);
        let b = dd(1.0) + dd(1e-25);
        assert!(b > a);
        assert!(a < b);
        assert_eq!(a.max(b), b);
    }
}
