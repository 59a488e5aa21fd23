//! Logarithms of moduli as exact vectors over the rational primes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::factor::factor_integer;
use crate::exactnum::gaussian::GaussianRational;
use crate::exactnum::interval::{ln_prime, Interval};
use crate::exactnum::symbolic::{SymPoly, Symbol};
use crate::scalar::Rational;

/// `ln|μ| = Σ coords[p]·ln p` over rational primes `p`.
///
/// Coordinates are half the prime-exponent vector of the norm `|μ|²`, so
/// `ln|−2|` is `{2: 1}` and `ln|1+i|` is `{2: 1/2}`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LogModulusVector {
    pub coords: BTreeMap<BigInt, Rational>,
}

/// Exact log-modulus coordinates of a nonzero Gaussian rational.
pub fn log_modulus(z: &GaussianRational) -> Result<LogModulusVector> {
    if z.is_zero() {
        return Err(Error::Domain("log-modulus of zero".into()));
    }
    let n = z.norm();
    let mut coords = BTreeMap::new();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for (p, e) in factor_integer(n.numer())? {
        coords.insert(p, Rational::from_integer(BigInt::from(e)) * &half);
    }
    for (p, e) in factor_integer(n.denom())? {
        coords.insert(p, -Rational::from_integer(BigInt::from(e)) * &half);
    }
    Ok(LogModulusVector { coords })
}

impl LogModulusVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, p: &BigInt) -> Rational {
        self.coords.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert_nonzero(&mut self, p: BigInt, v: Rational) {
        if v.is_zero() {
            self.coords.remove(&p);
        } else {
            self.coords.insert(p, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, v) in &other.coords {
            let s = out.get(p) + v;
            out.insert_nonzero(p.clone(), s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        LogModulusVector {
            coords: self
                .coords
                .iter()
                .map(|(p, v)| (p.clone(), v * r))
                .collect(),
        }
    }

    /// Exact sign of `Σ coords[p]·ln p`.
    ///
    /// Small exponents compare two integer products. Otherwise the value is
    /// refined by intervals, which terminates since logarithms of distinct
    /// primes are linearly independent over the rationals.
    pub fn sign(&self) -> Ordering {
        if self.coords.is_empty() {
            return Ordering::Equal;
        }
        if let Some(s) = self.sign_by_products() {
            return s;
        }
        let mut bits = 64;
        loop {
            if let Some(s) = self.to_interval(bits).sign() {
                return s;
            }
            bits *= 2;
        }
    }

    fn sign_by_products(&self) -> Option<Ordering> {
        let den = self
            .coords
            .values()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let mut pos = BigInt::one();
        let mut neg = BigInt::one();
        for (p, v) in &self.coords {
            let e = (v * Rational::from_integer(den.clone())).to_integer();
            let k = e.abs().to_u32().filter(|&k| k <= 4096)?;
            if e.is_positive() {
                pos *= p.pow(k);
            } else {
                neg *= p.pow(k);
            }
        }
        Some(pos.cmp(&neg))
    }

    /// Certified enclosure of the represented real number.
    pub fn to_interval(&self, bits: u32) -> Interval {
        let mut acc = Interval::zero(bits);
        for (p, v) in &self.coords {
            acc = acc.add(&ln_prime(p, bits).mul(&Interval::from_rational(v, bits)));
        }
        acc
    }

    /// The same value as a linear polynomial in the symbols `ln p`.
    pub fn to_symbolic(&self) -> SymPoly<Rational> {
        let mut out = SymPoly::zero();
        for (p, v) in &self.coords {
            out = out.add(&SymPoly::symbol(Symbol::LnPrime(p.clone())).scale(v));
        }
        out
    }

    /// If `other = r·self` for a rational `r`, returns `r`.
    pub fn ratio_from(&self, other: &Self) -> Option<Rational> {
        let (p0, v0) = self.coords.iter().next()?;
        let r = other.get(p0) / v0;
        if self.scale(&r) == *other {
            Some(r)
        } else {
            None
        }
    }
}

impl fmt::Display for LogModulusVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|(p, v)| format!("{v}*ln{p}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for LogModulusVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogModulus({self})")
    }
}

impl serde::Serialize for LogModulusVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.coords.len()))?;
        for (p, v) in &self.coords {
            m.serialize_entry(&p.to_string(), &v.to_string())?;
        }
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn g(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    fn lm(s: &str) -> LogModulusVector {
        log_modulus(&g(s)).unwrap()
    }

    #[test]
    fn examples() {
        let two = BigInt::from(2);
        assert_eq!(lm("-2").coords, BTreeMap::from([(two.clone(), rat(1, 1))]));
        assert!(lm("0+1*i").is_zero());
        assert_eq!(lm("1+i").coords, BTreeMap::from([(two, rat(1, 2))]));
        assert!(log_modulus(&g("0")).is_err());
    }

    #[test]
    fn norm_is_reproduced() {
        for s in ["3/5+4/5*i", "7-2*i", "-9/8", "1/3+1/3*i"] {
            let v = lm(s);
            let mut norm = Rational::one();
            for (p, c) in &v.coords {
                let e = (c * rat(2, 1)).to_integer().to_i32().unwrap();
                norm *= Rational::from_integer(p.clone()).pow(e);
            }
            assert_eq!(norm, g(s).norm(), "{s}");
        }
    }

    #[test]
    fn additive_under_products() {
        let pairs = [("2+i", "3/7-i"), ("-5", "1/10"), ("i", "4+4*i")];
        for (a, b) in pairs {
            let prod = &g(a) * &g(b);
            assert_eq!(log_modulus(&prod).unwrap(), lm(a).add(&lm(b)));
        }
    }

    #[test]
    fn exact_signs() {
        assert_eq!(lm("2").sign(), Ordering::Greater);
        assert_eq!(lm("1/2").sign(), Ordering::Less);
        assert_eq!(lm("3/5+4/5*i").sign(), Ordering::Equal);
        // ln 3 − (3/2) ln 2 = ln(3/2^{3/2}) > 0 since 9 > 8.
        assert_eq!(lm("3").sub(&lm("2").scale(&rat(3, 2))).sign(), Ordering::Greater);
        assert_eq!(lm("3").sub(&lm("2").scale(&rat(8, 5))).sign(), Ordering::Less);
        let iv = lm("6").to_interval(64);
        assert!(iv.lo_f64() < 1.79176 && iv.hi_f64() > 1.79175);
    }
}
