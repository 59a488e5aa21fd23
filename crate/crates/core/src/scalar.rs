use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::gaussian::GaussianRational;

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Exact coefficient field for series, germs and linear algebra.
///
/// Implemented for [`Rational`] and [`GaussianRational`]. Division by zero
/// panics, as for the underlying big rationals; callers check divisors.
pub trait Scalar:
    Clone
    + Eq
    + Hash
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + Send
    + Sync
    + 'static
{
    fn from_rational(r: Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(v)))
    }

    fn mul_ref(&self, other: &Self) -> Self;

    fn div_ref(&self, other: &Self) -> Self;

    /// Complex conjugate; the identity on rationals.
    fn conj(&self) -> Self;

    fn to_gaussian(&self) -> GaussianRational;

    /// Converts back from a Gaussian rational, failing when the value does
    /// not lie in this field.
    fn from_gaussian(z: &GaussianRational) -> Result<Self>;

    fn inv(&self) -> Self {
        Self::one().div_ref(self)
    }

    fn pow_u32(&self, e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    /// Integer power; negative exponents invert. Panics on `0^(-k)`.
    fn pow_i64(&self, e: i64) -> Self {
        let p = self.pow_u32(u32::try_from(e.unsigned_abs()).expect("exponent too large"));
        if e < 0 {
            p.inv()
        } else {
            p
        }
    }
}

impl Scalar for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn to_gaussian(&self) -> GaussianRational {
        GaussianRational::from_rational(self.clone())
    }

    fn from_gaussian(z: &GaussianRational) -> Result<Self> {
        if z.im.is_zero() {
            Ok(z.re.clone())
        } else {
            Err(Error::Domain(format!("coefficient {z} is not real")))
        }
    }
}

impl Scalar for GaussianRational {
    fn from_rational(r: Rational) -> Self {
        GaussianRational::new(r, Rational::zero())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        GaussianRational::mul_ref(self, other)
    }

    fn div_ref(&self, other: &Self) -> Self {
        GaussianRational::div_ref(self, other)
    }

    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }

    fn to_gaussian(&self) -> GaussianRational {
        self.clone()
    }

    fn from_gaussian(z: &GaussianRational) -> Result<Self> {
        Ok(z.clone())
    }
}

/// Parses a rational written as `a` or `a/b`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if num.is_empty() || den.is_empty() || den.starts_with(['+', '-']) {
        return Err(bad());
    }
    let valid_int = |t: &str| {
        let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(num) || !valid_int(den) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(n, d))
}

/// Rational with small numerator and denominator, for tests and fixtures.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("-6/4").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn integer_powers() {
        let h = rat(1, 2);
        assert_eq!(h.pow_i64(3), rat(1, 8));
        assert_eq!(h.pow_i64(-2), rat(4, 1));
        assert_eq!(h.pow_i64(0), rat(1, 1));
    }
}
