//! Double-double arithmetic from error-free transformations.
//!
//! Only what the residual refinement needs: sums, products and integer powers.
//! Values carry about 106 bits; `hi` is always the rounded value of `hi + lo`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
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

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Dd::from(1.0);
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bits_lost_in_f64() {
        let tiny = 2f64.powi(-70);
        let x = Dd::from(1.0) + Dd::from(tiny);
        assert_eq!(x.hi, 1.0);
        assert_eq!(x.lo, tiny);
        let back = x - Dd::from(1.0);
        assert_eq!(back.to_f64(), tiny);
    }

    #[test]
    fn products_are_exact_to_double_double() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60 exactly
        let a = Dd::from(1.0 + 2f64.powi(-30));
        let sq = a * a;
        let rest = sq - Dd::from(1.0 + 2f64.powi(-29));
        assert_eq!(rest.to_f64(), 2f64.powi(-60));
        let third = Dd::from(3.0).powi(5);
        assert_eq!(third.to_f64(), 243.0);
    }

    #[test]
    fn scaled_sum_cancels_cleanly() {
        let x = Dd::from(0.1).mul_f64(3.0) - Dd::from(0.3);
        // 3·fl(0.1) − fl(0.3) evaluated without rounding
        assert_eq!(x.to_f64(), 2f64.powi(-55));
    }
}
