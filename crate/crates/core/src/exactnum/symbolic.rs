//! Polynomials in formal logarithm symbols.
//!
//! A polynomial that simplifies to zero is exactly zero as a real or complex
//! number. The converse is not available, so nonzero polynomials are
//! certified numerically by [`SymPoly::evaluate`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::exactnum::factor::GaussianPrime;
use crate::exactnum::interval::{arg, ln_prime, pi, ComplexInterval, Interval};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// `ln p` for a rational prime `p`.
    LnPrime(BigInt),
    /// Principal logarithm of a canonical Gaussian prime.
    LogGaussPrime(GaussianPrime),
    /// `iπ`.
    IPi,
}

impl Symbol {
    pub fn evaluate(&self, bits: u32) -> ComplexInterval {
        match self {
            Symbol::LnPrime(p) => ComplexInterval::real(ln_prime(p, bits)),
            Symbol::LogGaussPrime(q) => {
                // ln|π| = ½·ln N(π); N(π) is p or p².
                let half = Interval::from_rational(&Rational::new(1.into(), 2.into()), bits);
                let n = q.norm();
                let re = crate::exactnum::interval::ln_rational(&Rational::from_integer(n), bits)
                    .mul(&half);
                ComplexInterval {
                    re,
                    im: arg(&q.to_gaussian(), bits),
                }
            }
            Symbol::IPi => ComplexInterval {
                re: Interval::zero(bits),
                im: pi(bits),
            },
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::LnPrime(p) => write!(f, "ln{p}"),
            Symbol::LogGaussPrime(q) => write!(f, "Log({q})"),
            Symbol::IPi => write!(f, "iπ"),
        }
    }
}

/// Sparse polynomial; monomials are sorted symbol multisets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPoly<C: Scalar> {
    terms: BTreeMap<Vec<Symbol>, C>,
}

impl<C: Scalar> Default for SymPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> SymPoly<C> {
    pub fn zero() -> Self {
        SymPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        SymPoly { terms }
    }

    pub fn symbol(s: Symbol) -> Self {
        SymPoly {
            terms: BTreeMap::from([(vec![s], C::one())]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Symbol>, &C)> {
        self.terms.iter()
    }

    fn accumulate(&mut self, mono: Vec<Symbol>, c: &C) {
        let entry = self.terms.entry(mono.clone()).or_insert_with(C::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SymPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        SymPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul_ref(s)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().cloned());
                m.sort();
                out.accumulate(m, &ca.mul_ref(cb));
            }
        }
        out
    }

    /// Maps coefficients into another field.
    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SymPoly<D> {
        let mut out = SymPoly::zero();
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), &f(c));
        }
        out
    }

    /// Certified enclosure of the value.
    pub fn evaluate(&self, bits: u32) -> ComplexInterval {
        let mut cache: BTreeMap<&Symbol, ComplexInterval> = BTreeMap::new();
        let mut acc = ComplexInterval::zero(bits);
        for (m, c) in &self.terms {
            let mut v = ComplexInterval::from_gaussian(&c.to_gaussian(), bits);
            for s in m {
                let sv = cache.entry(s).or_insert_with(|| s.evaluate(bits));
                v = v.mul(sv);
            }
            acc = acc.add(&v);
        }
        acc
    }
}

impl<C: Scalar> fmt::Display for SymPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let syms: Vec<String> = m.iter().map(|s| s.to_string()).collect();
                if syms.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", syms.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Determinant by cofactor expansion; intended for the small matrices
/// arising from p-subsets.
pub fn determinant<C: Scalar>(m: &[Vec<SymPoly<C>>]) -> SymPoly<C> {
    let n = m.len();
    match n {
        0 => SymPoly::constant(C::one()),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = SymPoly::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<SymPoly<C>>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][j].mul(&determinant(&minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ln(p: i64) -> SymPoly<Rational> {
        SymPoly::symbol(Symbol::LnPrime(BigInt::from(p)))
    }

    #[test]
    fn proportional_rows_give_symbolic_zero() {
        let two = SymPoly::constant(rat(2, 1));
        let m = vec![
            vec![ln(2), two.mul(&ln(2))],
            vec![ln(3), two.mul(&ln(3))],
        ];
        assert!(determinant(&m).is_zero());
    }

    #[test]
    fn nonzero_minor_is_certified() {
        let m = vec![vec![ln(2), ln(3)], vec![ln(3), ln(2)]];
        let d = determinant(&m);
        assert!(!d.is_zero());
        let v = d.evaluate(64);
        assert_eq!(v.re.sign(), Some(std::cmp::Ordering::Less));
    }

    #[test]
    fn three_by_three_matches_expansion() {
        let c = |k| SymPoly::<Rational>::constant(rat(k, 1));
        let m = vec![
            vec![c(2), c(0), c(1)],
            vec![c(1), c(3), c(2)],
            vec![c(1), c(1), c(2)],
        ];
        assert_eq!(determinant(&m), c(6));
    }
}
