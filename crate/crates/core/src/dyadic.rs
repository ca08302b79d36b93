//! Exact dyadic rationals `n / 2^e` used for the oracle series.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `mantissa * 2^(-exp)`, kept normalized (odd mantissa, or zero with exp 0).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self {
            mantissa: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigInt::from(n), 0)
    }

    /// `sign * 2^(-e)`.
    pub fn pow2_neg(e: u32) -> Self {
        Self::new(BigInt::one(), e)
    }

    pub fn new(mantissa: BigInt, exp: u32) -> Self {
        let mut d = Self { mantissa, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64) as u32;
        if shift > 0 {
            self.mantissa >>= shift as usize;
            self.exp -= shift;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Multiplies by `2^(-e)`.
    pub fn scale_pow2_neg(mut self, e: u32) -> Self {
        if !self.mantissa.is_zero() {
            self.exp += e;
        }
        self
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exp: self.exp,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.exp as usize)
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        // keep 64 significant bits so the final conversion rounds once
        let bits = self.mantissa.bits();
        let drop = bits.saturating_sub(64);
        let top = (&self.mantissa >> drop as usize).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(drop as i32 - self.exp as i32)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let a = &self.mantissa << (exp - self.exp) as usize;
        let b = &rhs.mantissa << (exp - rhs.exp) as usize;
        Dyadic::new(a + b, exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = &*self + &rhs;
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exp: self.exp,
        }
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs.clone())
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.mantissa << (exp - self.exp) as usize;
        let b = &other.mantissa << (exp - other.exp) as usize;
        a.cmp(&b)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Rational `2^(-e)` as a `BigRational`.
pub fn rational_pow2_neg(e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e as usize)
}

/// Converts a rational to the nearest `f64` by scaled integer division.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    // scale so the quotient carries ~64 significant bits
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = Dyadic::pow2_neg(3); // 1/8
        let b = Dyadic::pow2_neg(5); // 1/32
        let s = &a + &b;
        assert_eq!(s.to_rational(), BigRational::new(5.into(), 32.into()));
        assert_eq!((&a - &a), Dyadic::zero());
        assert_eq!((&a * &b).to_rational(), rational_pow2_neg(8));
        assert!(b < a);
        assert_eq!(s.to_f64(), 5.0 / 32.0);
    }

    #[test]
    fn tiny_values_convert() {
        let d = Dyadic::pow2_neg(600) + Dyadic::pow2_neg(601);
        assert_eq!(d.to_f64(), 1.5 * 2f64.powi(-600));
        let r = Dyadic::pow2_neg(200) + Dyadic::pow2_neg(260);
        let expect = 2f64.powi(-200) * (1.0 + 2f64.powi(-60));
        assert_eq!(r.to_f64(), expect);
        assert_eq!(rational_to_f64(&r.to_rational()), expect);
    }

    #[test]
    fn rational_conversion_rounds_sensibly() {
        let third = BigRational::new(1.into(), 3.into());
        assert!((rational_to_f64(&third) - 1.0 / 3.0).abs() < 1e-17);
        let neg = BigRational::new((-7).into(), 45.into());
        assert!((rational_to_f64(&neg) + 7.0 / 45.0).abs() < 1e-17);
    }
}
