//! Closed intervals of `f64` with outward rounding.
//!
//! Endpoints are rounded in the required direction by recovering the exact
//! rounding error of each round-to-nearest result (TwoSum for sums, `fma`
//! residuals for products, quotients and square roots) and stepping one ulp
//! only when that error points the wrong way. Exact operations therefore
//! stay exact. Near the underflow range, where the residuals are no longer
//! exact, results are widened by one ulp unconditionally.
//!
//! `sin` is evaluated by an alternating Taylor series in interval arithmetic
//! with an explicit remainder term, so it does not rely on the accuracy of
//! the platform `libm`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval: lo = {lo}, hi = {hi}")]
    Invalid { lo: f64, hi: f64 },
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByZero { lo: f64, hi: f64 },
    #[error("sqrt of an interval with negative part: [{lo}, {hi}]")]
    NegativeSqrt { lo: f64, hi: f64 },
    #[error("sin enclosure requires an argument inside [0, pi/2], got [{lo}, {hi}]")]
    SinDomain { lo: f64, hi: f64 },
}

/// A closed interval `[lo, hi]` with `lo <= hi`, both finite.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

/// Below this magnitude `fma` residuals may be inexact.
const TINY: f64 = 1.0e-289;

/// Round-to-nearest result `r` and the sign of `exact - r`.
fn adjust(r: f64, err_sign: f64, tiny: bool) -> (f64, f64) {
    if tiny {
        return (down(r), up(r));
    }
    let lo = if err_sign < 0.0 { down(r) } else { r };
    let hi = if err_sign > 0.0 { up(r) } else { r };
    (lo, hi)
}

fn add_round(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    adjust(s, e, false)
}

fn mul_round(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return (p, p);
    }
    let e = a.mul_add(b, -p);
    adjust(p, e, p.abs() < TINY || a.abs() < TINY || b.abs() < TINY)
}

fn div_round(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    if a == 0.0 {
        return (q, q);
    }
    // a/b - q = r/b with r = a - q b exact.
    let r = (-q).mul_add(b, a);
    let sign = if r == 0.0 { 0.0 } else { r.signum() * b.signum() };
    adjust(q, sign, q.abs() < TINY || a.abs() < TINY)
}

fn sqrt_round(x: f64) -> (f64, f64) {
    let r = x.sqrt();
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let e = (-r).mul_add(r, x);
    let (lo, hi) = adjust(r, e, x < TINY);
    (lo.max(0.0), hi)
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::Invalid { lo, hi })
        }
    }

    /// The degenerate interval `[x, x]`; `x` is taken as exact.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval from non-finite value {x}");
        Self { lo: x, hi: x }
    }

    /// An enclosure of a decimal quantity whose `f64` rendering may be
    /// inexact (`0.324`, `1.333`, ...). Widens the nearest double by one ulp.
    pub fn around(x: f64) -> Self {
        assert!(x.is_finite(), "interval around non-finite value {x}");
        Self {
            lo: down(x),
            hi: up(x),
        }
    }

    /// Enclosure of pi. `std::f64::consts::PI` is the double just below pi.
    pub fn pi() -> Self {
        Self {
            lo: std::f64::consts::PI,
            hi: up(std::f64::consts::PI),
        }
    }

    /// Enclosure of the square root of three.
    pub fn sqrt3() -> Self {
        Self::point(3.0).sqrt().expect("3 is positive")
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when `x` lies within `tol` of the interval.
    pub fn near(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// `{|x| : x in self}`.
    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval {
                lo: 0.0,
                hi: (-self.lo).max(self.hi),
            }
        }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: mul_round(a.lo, a.lo).0.max(0.0),
            hi: mul_round(a.hi, a.hi).1,
        }
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::NegativeSqrt {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(Interval {
            lo: sqrt_round(self.lo).0,
            hi: sqrt_round(self.hi).1,
        })
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::point(1.0).checked_div(self)
    }

    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(IntervalError::DivisionByZero {
                lo: rhs.lo,
                hi: rhs.hi,
            });
        }
        Ok(outward(&[
            div_round(self.lo, rhs.lo),
            div_round(self.lo, rhs.hi),
            div_round(self.hi, rhs.lo),
            div_round(self.hi, rhs.hi),
        ]))
    }

    /// Enclosure of `sin` over an argument interval inside `[0, pi/2]`,
    /// where `sin` is increasing.
    pub fn sin(&self) -> Result<Interval, IntervalError> {
        let half_pi = Interval::pi() * Interval::point(0.5);
        if self.lo < 0.0 || self.hi > half_pi.lo {
            return Err(IntervalError::SinDomain {
                lo: self.lo,
                hi: self.hi,
            });
        }
        let lo = sin_point(self.lo).lo.max(0.0);
        let hi = sin_point(self.hi).hi.min(1.0);
        Ok(Interval { lo, hi })
    }
}

fn outward(values: &[(f64, f64)]) -> Interval {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(l, h) in values {
        lo = lo.min(l);
        hi = hi.max(h);
    }
    Interval { lo, hi }
}

/// Rigorous enclosure of `sin(x)` for `0 <= x <= pi/2`.
///
/// Terms `x^(2k+1)/(2k+1)!` decrease monotonically for `x < 2`, so the
/// truncation error of the alternating series is bounded by the first
/// omitted term.
fn sin_point(x: f64) -> Interval {
    const TERMS: usize = 14;
    let xi = Interval::point(x);
    let x2 = xi.sqr();
    let mut term = xi;
    let mut sum = xi;
    for k in 1..=TERMS {
        let denom = Interval::point(((2 * k) * (2 * k + 1)) as f64);
        term = (term * x2).checked_div(&denom).expect("positive denominator");
        if k % 2 == 1 {
            sum = sum - term;
        } else {
            sum = sum + term;
        }
    }
    let denom = Interval::point(((2 * TERMS + 2) * (2 * TERMS + 3)) as f64);
    let next = (term * x2).checked_div(&denom).expect("positive denominator");
    let r = next.abs().hi;
    Interval {
        lo: down(sum.lo - r),
        hi: up(sum.hi + r),
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_round(self.lo, rhs.lo).0,
            hi: add_round(self.hi, rhs.hi).1,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_round(self.lo, -rhs.hi).0,
            hi: add_round(self.hi, -rhs.lo).1,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        outward(&[
            mul_round(self.lo, rhs.lo),
            mul_round(self.lo, rhs.hi),
            mul_round(self.hi, rhs.lo),
            mul_round(self.hi, rhs.hi),
        ])
    }
}

/// Panics when the divisor contains zero; use [`Interval::checked_div`] on
/// untrusted input.
impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(&rhs).expect("interval division by zero")
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_enclose() {
        let pi = Interval::pi();
        assert!(pi.lo() < pi.hi());
        // 3.14159265358979323846... lies strictly above the nearest double.
        assert!(pi.lo() == std::f64::consts::PI);
        let s3 = Interval::sqrt3();
        assert!(s3.contains(1.7320508075688772));
        assert!(s3.width() < 1e-15);
    }

    #[test]
    fn sin_known_values() {
        let s = Interval::point(0.0).sin().unwrap();
        assert_eq!(s.lo(), 0.0);
        assert!(s.hi() < 1e-300);
        let s = Interval::point(std::f64::consts::FRAC_PI_6).sin().unwrap();
        assert!(s.near(0.5, 1e-15));
        assert!(s.width() <= 1e-12);
        let s = Interval::point(std::f64::consts::FRAC_PI_2.next_down())
            .sin()
            .unwrap();
        assert!(s.hi() <= 1.0 && s.lo() > 0.999_999_999);
    }

    #[test]
    fn sin_domain() {
        assert!(matches!(
            Interval::point(-0.1).sin(),
            Err(IntervalError::SinDomain { .. })
        ));
        assert!(matches!(
            Interval::point(1.6).sin(),
            Err(IntervalError::SinDomain { .. })
        ));
    }

    #[test]
    fn division_by_zero_interval() {
        let a = Interval::point(1.0);
        let b = Interval::new(-1.0, 1.0).unwrap();
        assert!(a.checked_div(&b).is_err());
    }

    #[test]
    fn sqrt_rejects_negative() {
        assert!(Interval::new(-1.0, 4.0).unwrap().sqrt().is_err());
        let r = Interval::point(4.0).sqrt().unwrap();
        assert!(r.contains(2.0));
    }

    #[test]
    fn exact_operations_stay_exact() {
        let r = Interval::point(4.0).sqrt().unwrap();
        assert_eq!((r.lo(), r.hi()), (2.0, 2.0));
        let q = Interval::point(1.0).recip().unwrap();
        assert_eq!((q.lo(), q.hi()), (1.0, 1.0));
        let p = Interval::point(1.5) * Interval::point(-2.0) + Interval::point(0.25);
        assert_eq!((p.lo(), p.hi()), (-2.75, -2.75));
    }

    #[test]
    fn inexact_operations_are_tight() {
        let t = Interval::point(1.0) / Interval::point(3.0);
        assert!(t.lo() < t.hi());
        assert_eq!(t.lo().next_up(), t.hi());
        let s = Interval::point(0.1) + Interval::point(0.2);
        assert!(s.lo() <= 0.30000000000000004 && s.width() <= 6e-17);
    }

    #[test]
    fn new_rejects_reversed() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn around_contains_decimal() {
        // 0.1 is not representable; the enclosure straddles the double.
        let i = Interval::around(0.1);
        assert!(i.lo() < 0.1 && 0.1 < i.hi());
    }
}
