//! Closed real intervals with outward rounding.
//!
//! Every arithmetic operation returns an interval that contains the exact
//! real result. Rounding is emulated with error-free transformations: a
//! bound is only nudged by one ulp when the floating-point operation was
//! inexact, so exact operations (adding zero, multiplying by one, small
//! integers) keep their bounds untouched.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// A non-empty closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const SYMMETRIC_UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Builds `[lo, hi]`, returning `None` for inverted or NaN bounds.
    pub fn new(lo: f64, hi: f64) -> Option<Interval> {
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn point(v: f64) -> Interval {
        assert!(!v.is_nan(), "interval endpoint is NaN");
        Interval { lo: v, hi: v }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn width(self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Midpoint rounded to nearest; always inside the interval.
    pub fn mid(self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Largest absolute value attained.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(self, other: Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Integer power with the tight even-power rule.
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ => {
                if n.is_multiple_of(2) && self.lo < 0.0 && self.hi > 0.0 {
                    let m = Interval::point(self.mag()).pow_nonneg(n);
                    Interval { lo: 0.0, hi: m.hi }
                } else if n.is_multiple_of(2) && self.hi <= 0.0 {
                    (-self).pow_nonneg(n)
                } else if self.lo >= 0.0 {
                    self.pow_nonneg(n)
                } else {
                    // odd power is monotone; the lower end is negative here
                    let lo = -Interval::point(-self.lo).pow_nonneg(n).hi;
                    let hi = if self.hi >= 0.0 {
                        Interval::point(self.hi).pow_nonneg(n).hi
                    } else {
                        -Interval::point(-self.hi).pow_nonneg(n).lo
                    };
                    Interval { lo, hi }
                }
            }
        }
    }

    fn pow_nonneg(self, n: u32) -> Interval {
        let mut lo = 1.0;
        let mut hi = 1.0;
        for _ in 0..n {
            lo = mul_down(lo, self.lo);
            hi = mul_up(hi, self.hi);
        }
        Interval { lo: lo.max(0.0), hi }
    }

    /// Widens the interval about its midpoint: radius * factor + eps.
    pub fn inflate(self, factor: f64, eps: f64) -> Interval {
        let m = self.mid();
        let r_lo = mul_up(sub_up(m, self.lo), factor);
        let r_hi = mul_up(sub_up(self.hi, m), factor);
        Interval {
            lo: sub_down(sub_down(m, r_lo), eps),
            hi: add_up(add_up(m, r_hi), eps),
        }
    }

    /// `1 / self`, or `None` when the interval contains zero.
    pub fn recip(self) -> Option<Interval> {
        if self.contains(0.0) {
            return None;
        }
        Some(Interval {
            lo: div_down(1.0, self.hi),
            hi: div_up(1.0, self.lo),
        })
    }

    /// Distance between two intervals (zero when they meet).
    pub fn gap(self, other: Interval) -> f64 {
        if self.hi < other.lo {
            other.lo - self.hi
        } else if other.hi < self.lo {
            self.lo - other.hi
        } else {
            0.0
        }
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{:?}", self.lo)
        } else {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        }
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

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        normalize(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        normalize(sub_down(self.lo, rhs.hi), sub_up(self.hi, rhs.lo))
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self == Interval::ZERO || rhs == Interval::ZERO {
            return Interval::ZERO;
        }
        let (a1, a2, b1, b2) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let (lo, hi) = if a1 >= 0.0 {
            if b1 >= 0.0 {
                (mul_down(a1, b1), mul_up(a2, b2))
            } else if b2 <= 0.0 {
                (mul_down(a2, b1), mul_up(a1, b2))
            } else {
                (mul_down(a2, b1), mul_up(a2, b2))
            }
        } else if a2 <= 0.0 {
            if b1 >= 0.0 {
                (mul_down(a1, b2), mul_up(a2, b1))
            } else if b2 <= 0.0 {
                (mul_down(a2, b2), mul_up(a1, b1))
            } else {
                (mul_down(a1, b2), mul_up(a1, b1))
            }
        } else if b1 >= 0.0 {
            (mul_down(a1, b2), mul_up(a2, b2))
        } else if b2 <= 0.0 {
            (mul_down(a2, b1), mul_up(a1, b1))
        } else {
            (
                mul_down(a1, b2).min(mul_down(a2, b1)),
                mul_up(a1, b1).max(mul_up(a2, b2)),
            )
        };
        normalize(lo, hi)
    }
}

fn normalize(lo: f64, hi: f64) -> Interval {
    if lo.is_nan() || hi.is_nan() {
        Interval::ENTIRE
    } else {
        Interval { lo, hi }
    }
}

// --- directed rounding -----------------------------------------------------

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
const SPLIT_LIMIT: f64 = 6.69692879491417e+299; // 2^996

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Product and its exact error term, or `None` when the error-free
/// transformation is not valid (overflow or underflow range).
#[inline]
fn two_prod(a: f64, b: f64) -> Option<(f64, f64)> {
    let p = a * b;
    if !p.is_finite() || a.abs() > SPLIT_LIMIT || b.abs() > SPLIT_LIMIT {
        return None;
    }
    if p != 0.0 && p.abs() < 1e-290 {
        return None;
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    Some((p, err))
}

#[inline]
fn round_down(s: f64, err: f64) -> f64 {
    if !s.is_finite() {
        if s == f64::INFINITY {
            f64::MAX
        } else {
            s
        }
    } else if err < 0.0 || err.is_nan() {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn round_up(s: f64, err: f64) -> f64 {
    if !s.is_finite() {
        if s == f64::NEG_INFINITY {
            f64::MIN
        } else {
            s
        }
    } else if err > 0.0 || err.is_nan() {
        s.next_up()
    } else {
        s
    }
}

/// `a + b` rounded toward negative infinity.
pub fn add_down(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        return a + b;
    }
    let (s, e) = two_sum(a, b);
    round_down(s, e)
}

/// `a + b` rounded toward positive infinity.
pub fn add_up(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        return a + b;
    }
    let (s, e) = two_sum(a, b);
    round_up(s, e)
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// `a * b` rounded toward negative infinity.
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if a.is_infinite() || b.is_infinite() {
        return a * b;
    }
    match two_prod(a, b) {
        Some((p, e)) => round_down(p, e),
        None => {
            let p = a * b;
            if p.is_finite() {
                p.next_down()
            } else {
                round_down(p, f64::NAN)
            }
        }
    }
}

/// `a * b` rounded toward positive infinity.
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    if a.is_infinite() || b.is_infinite() {
        return a * b;
    }
    match two_prod(a, b) {
        Some((p, e)) => round_up(p, e),
        None => {
            let p = a * b;
            if p.is_finite() {
                p.next_up()
            } else {
                round_up(p, f64::NAN)
            }
        }
    }
}

/// `a / b` rounded down; always widened by one ulp unless exact zero.
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == 0.0 && a == 0.0 {
        0.0
    } else if q.is_finite() {
        q.next_down()
    } else {
        q
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q == 0.0 && a == 0.0 {
        0.0
    } else if q.is_finite() {
        q.next_up()
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn reciprocal() {
        let r = Interval::new(2.0, 4.0).unwrap().recip().unwrap();
        assert!(iv(0.25, 0.5).subset_of(r) && r.width() < 0.25 + 1e-15);
        let r = Interval::new(-3.0, -1.0).unwrap().recip().unwrap();
        assert!(r.contains(-1.0) && r.contains(-1.0 / 3.0) && r.hi() <= -0.333);
        assert!(Interval::new(-1.0, 1.0).unwrap().recip().is_none());
    }

    #[test]
    fn inverted_bounds_rejected() {
        assert!(Interval::new(1.0, 0.0).is_none());
        assert!(Interval::new(f64::NAN, 0.0).is_none());
    }

    #[test]
    fn exact_operations_stay_exact() {
        let c = iv(0.1, 0.3);
        assert_eq!(c * Interval::ONE, c);
        assert_eq!(c + Interval::ZERO, c);
        assert_eq!(Interval::ONE - iv(0.5, 0.6), iv(1.0 - 0.6, 1.0 - 0.5));
        assert_eq!(iv(2.0, 3.0) * iv(4.0, 5.0), iv(8.0, 15.0));
    }

    #[test]
    fn inexact_sum_is_widened() {
        let s = Interval::point(0.1) + Interval::point(0.2);
        assert!(s.lo() < s.hi());
        assert!(s.lo() <= 0.30000000000000004 && s.hi() >= 0.3);
    }

    #[test]
    fn even_power_straddling_zero() {
        assert_eq!(iv(-1.0, 0.5).powi(2), iv(0.0, 1.0));
        assert_eq!(iv(-2.0, -1.0).powi(2), iv(1.0, 4.0));
        assert_eq!(iv(-2.0, 1.0).powi(3), iv(-8.0, 1.0));
    }

    #[test]
    fn inflate_grows_radius() {
        let b = iv(0.0, 0.2).inflate(1.1, 1e-12);
        assert!(b.lo() <= -0.01 - 1e-12 + 1e-15);
        assert!(b.hi() >= 0.21 + 1e-12 - 1e-15);
    }

    #[test]
    fn gap_between_intervals() {
        assert_eq!(iv(0.0, 0.1).gap(iv(0.2, 0.3)), 0.2 - 0.1);
        assert_eq!(iv(0.0, 0.5).gap(iv(0.2, 0.3)), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn sign_cases_match_corner_products(
            a in -4.0f64..4.0, wa in 0.0f64..3.0,
            b in -4.0f64..4.0, wb in 0.0f64..3.0,
        ) {
            let (x, y) = (iv(a, a + wa), iv(b, b + wb));
            let corners = [(x.lo, y.lo), (x.lo, y.hi), (x.hi, y.lo), (x.hi, y.hi)];
            let lo = corners.iter().map(|&(p, q)| mul_down(p, q)).fold(f64::INFINITY, f64::min);
            let hi = corners.iter().map(|&(p, q)| mul_up(p, q)).fold(f64::NEG_INFINITY, f64::max);
            let z = x * y;
            proptest::prop_assert!(z.lo == lo && z.hi == hi, "{z:?} vs [{lo}, {hi}]");
        }
    }
}
