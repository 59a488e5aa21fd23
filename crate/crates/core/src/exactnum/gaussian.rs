//! Elements of Q(i).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// Exact Gaussian rational `re + im·i`.
///
/// The textual form is `re`, or `re±|im|*i` when the imaginary part is
/// nonzero, e.g. `-2`, `1/2`, `0+1*i`, `1/2-3/4*i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        GaussianRational {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        GaussianRational {
            re: Rational::from_integer(BigInt::from(re)),
            im: Rational::from_integer(BigInt::from(im)),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::from_integers(0, 1)
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// `re² + im²`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        if self.im.is_zero() && other.im.is_zero() {
            return Self::from_rational(&self.re * &other.re);
        }
        if self.im.is_zero() {
            return GaussianRational {
                re: &self.re * &other.re,
                im: &self.re * &other.im,
            };
        }
        if other.im.is_zero() {
            return GaussianRational {
                re: &self.re * &other.re,
                im: &self.im * &other.re,
            };
        }
        GaussianRational {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    /// Panics if `other` is zero.
    pub fn div_ref(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero Gaussian rational");
        if other.im.is_zero() {
            return GaussianRational {
                re: &self.re / &other.re,
                im: &self.im / &other.re,
            };
        }
        let n = other.norm();
        let p = self.mul_ref(&other.conj());
        GaussianRational {
            re: p.re / &n,
            im: p.im / n,
        }
    }

    /// Multiplicative inverse, or a domain error for zero.
    pub fn checked_inv(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::Domain("zero has no inverse".into()))
        } else {
            Ok(Self::one().div_ref(self))
        }
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 && self.is_zero() {
            return Err(Error::Domain("negative power of zero".into()));
        }
        Ok(crate::scalar::Scalar::pow_i64(self, e))
    }

    /// Least common denominator of both parts.
    pub fn common_denominator(&self) -> BigInt {
        num_integer::Integer::lcm(self.re.denom(), self.im.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            if self.im.is_one() {
                write!(f, "i")
            } else if (-&self.im).is_one() {
                write!(f, "-i")
            } else {
                write!(f, "{}*i", self.im)
            }
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}*i", self.re, sign, self.im.abs())
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for GaussianRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty Gaussian rational".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::from_rational(parse_rational(&t)?));
        };
        let body = body.strip_suffix('*').unwrap_or(body);
        // The imaginary part starts at the last sign that is not leading.
        let split = body
            .char_indices()
            .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k)
            .next_back();
        let (re_txt, im_txt) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_txt.is_empty() {
            Rational::zero()
        } else {
            parse_rational(re_txt)?
        };
        let im = match im_txt {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other)
                .map_err(|_| Error::Parse(format!("invalid Gaussian rational `{s}`")))?,
        };
        Ok(GaussianRational { re, im })
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational {
            re: Rational::zero(),
            im: Rational::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_rational(Rational::one())
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussianRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl<'a> AddAssign<&'a GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &'a GaussianRational) {
        self.re += &rhs.re;
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl<'a> SubAssign<&'a GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &'a GaussianRational) {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
    }
}

impl<'a> MulAssign<&'a GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, rhs: &'a GaussianRational) {
        *self = self.mul_ref(rhs);
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: GaussianRational) -> GaussianRational {
                $body(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: &'a GaussianRational) -> GaussianRational {
                $body(&self, rhs)
            }
        }
        impl<'a> $tr<GaussianRational> for &'a GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: GaussianRational) -> GaussianRational {
                $body(self, &rhs)
            }
        }
        impl<'a, 'b> $tr<&'b GaussianRational> for &'a GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: &'b GaussianRational) -> GaussianRational {
                $body(self, rhs)
            }
        }
    };
}

fn add_impl(a: &GaussianRational, b: &GaussianRational) -> GaussianRational {
    GaussianRational {
        re: &a.re + &b.re,
        im: &a.im + &b.im,
    }
}

fn sub_impl(a: &GaussianRational, b: &GaussianRational) -> GaussianRational {
    GaussianRational {
        re: &a.re - &b.re,
        im: &a.im - &b.im,
    }
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, GaussianRational::mul_ref);
forward_binop!(Div, div, GaussianRational::div_ref);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn g(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    #[test]
    fn text_forms() {
        assert_eq!(g("-2"), GaussianRational::from_integers(-2, 0));
        assert_eq!(g("1/2"), GaussianRational::from_rational(rat(1, 2)));
        assert_eq!(g("0+1*i"), GaussianRational::i());
        assert_eq!(g("i"), GaussianRational::i());
        assert_eq!(g("-i"), -GaussianRational::i());
        assert_eq!(g("1+i"), GaussianRational::from_integers(1, 1));
        assert_eq!(g("3/4*i"), GaussianRational::new(rat(0, 1), rat(3, 4)));
        assert_eq!(
            g("-1/2-3/4*i"),
            GaussianRational::new(rat(-1, 2), rat(-3, 4))
        );
        for s in ["-2", "1/2", "i", "-i", "-5/2*i", "1/2-3/4*i", "-7/3+5*i", "0"] {
            assert_eq!(g(s).to_string(), s);
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "abc", "1++2*i", "2*j", "1/2/3"] {
            assert!(s.parse::<GaussianRational>().is_err(), "{s}");
        }
    }

    #[test]
    fn field_operations() {
        let a = g("1+2*i");
        let b = g("3-1/2*i");
        assert_eq!(&a * &b, g("4+11/2*i"));
        assert_eq!((&a * &b) / &b, a);
        assert_eq!(a.norm(), rat(5, 1));
        assert_eq!(GaussianRational::i().pow(4).unwrap(), GaussianRational::one());
        assert_eq!(g("2").pow(-3).unwrap(), g("1/8"));
        assert!(GaussianRational::zero().checked_inv().is_err());
    }
}
