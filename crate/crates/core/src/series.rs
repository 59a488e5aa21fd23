//! Truncated multivariate power series.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::exactnum::gaussian::GaussianRational;
use crate::scalar::{Rational, Scalar};

/// Exponent vector `γ ∈ N^n`.
///
/// Ordered by total degree, then with heavier early variables first, so
/// that `(2,0) < (1,1) < (0,2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new(exponents: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(exponents))
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    /// `e_m`, 0-based.
    pub fn unit(n: usize, m: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[m] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.0.to_vec()
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn scale(&self, k: u32) -> Self {
        MultiIndex(self.0.iter().map(|e| e * k).collect())
    }

    /// Applies a coordinate permutation: entry `k` moves to `sigma[k]`.
    pub fn permute(&self, sigma: &[usize]) -> Self {
        let mut out = Self::zeros(self.len());
        for (k, &e) in self.0.iter().enumerate() {
            out.0[sigma[k]] = e;
        }
        out
    }

    /// Signed exponent vector.
    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&e| i64::from(e)).collect()
    }

    /// From a signed vector with no negative entry.
    pub fn from_i64(v: &[i64]) -> Option<Self> {
        let mut out = SmallVec::with_capacity(v.len());
        for &e in v {
            out.push(u32::try_from(e).ok()?);
        }
        Some(MultiIndex(out))
    }

    /// All exponent vectors of exact degree `d` in `n` variables, ascending.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if k + 1 == n {
                cur.push(left);
                out.push(MultiIndex::new(cur));
                cur.pop();
                return;
            }
            for e in (0..=left).rev() {
                cur.push(e);
                rec(n, k + 1, left - e, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex::zeros(0));
            }
            return out;
        }
        rec(n, 0, d, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All exponent vectors with degree in `lo..=hi`, ascending.
    pub fn all_up_to(n: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        (lo..=hi).flat_map(|d| Self::all_of_degree(n, d)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Name of variable `k` (0-based) in dimension `n`.
pub fn variable_name(k: usize, n: usize) -> String {
    if n <= 3 {
        ["x", "y", "z"][k].to_string()
    } else {
        format!("x{}", k + 1)
    }
}

impl MultiIndex {
    /// Monomial in human notation, e.g. `x^2*y`; `1` for the zero index.
    pub fn monomial_string(&self) -> String {
        let n = self.len();
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                if e == 1 {
                    variable_name(k, n)
                } else {
                    format!("{}^{e}", variable_name(k, n))
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

/// One serialized term: `{"exponents": [...], "coeff": "a/b+c/d*i"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

/// Jet of a function of `n` variables modulo degree `> D`.
///
/// Only nonzero coefficients are stored. Binary operators panic on
/// mismatched `n` or `D`; the `checked_*` methods return a usage error.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries<C: Scalar> {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Scalar> TruncatedSeries<C> {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        TruncatedSeries {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, degree: u32, c: C) -> Self {
        let mut s = Self::zero(nvars, degree);
        s.add_term(MultiIndex::zeros(nvars), &c);
        s
    }

    pub fn one(nvars: usize, degree: u32) -> Self {
        Self::constant(nvars, degree, C::one())
    }

    /// The coordinate function `x_m`, 0-based.
    pub fn variable(nvars: usize, degree: u32, m: usize) -> Self {
        Self::monomial(nvars, degree, MultiIndex::unit(nvars, m), C::one())
    }

    /// `c·x^γ`, or zero when `|γ| > D`.
    pub fn monomial(nvars: usize, degree: u32, gamma: MultiIndex, c: C) -> Self {
        assert_eq!(gamma.len(), nvars, "exponent length mismatch");
        let mut s = Self::zero(nvars, degree);
        s.add_term(gamma, &c);
        s
    }

    /// Builds a series from distinct terms of degree at most `D`.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (MultiIndex, C)>,
    ) -> Result<Self> {
        let mut s = Self::zero(nvars, degree);
        for (g, c) in terms {
            if g.len() != nvars {
                return Err(Error::Usage(format!(
                    "exponent vector {g} has length {}, expected {nvars}",
                    g.len()
                )));
            }
            if g.degree() > degree {
                return Err(Error::Usage(format!(
                    "monomial {g} has degree {} above truncation degree {degree}",
                    g.degree()
                )));
            }
            if s.terms.contains_key(&g) {
                return Err(Error::Usage(format!("duplicate monomial {g}")));
            }
            if !c.is_zero() {
                s.terms.insert(g, c);
            }
        }
        Ok(s)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, gamma: &MultiIndex) -> Option<&C> {
        self.terms.get(gamma)
    }

    pub fn coefficient(&self, gamma: &MultiIndex) -> C {
        self.terms.get(gamma).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&MultiIndex::zeros(self.nvars))
    }

    /// Lowest degree carrying a nonzero term.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    /// Adds `c·x^γ` in place; terms above the truncation degree vanish.
    pub fn add_term(&mut self, gamma: MultiIndex, c: &C) {
        if gamma.degree() > self.degree || c.is_zero() {
            return;
        }
        match self.terms.entry(gamma) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn set_coefficient(&mut self, gamma: MultiIndex, c: C) {
        if c.is_zero() {
            self.terms.remove(&gamma);
        } else if gamma.degree() <= self.degree {
            self.terms.insert(gamma, c);
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.degree != other.degree {
            return Err(Error::Usage(format!(
                "series shape mismatch: (n={}, D={}) vs (n={}, D={})",
                self.nvars, self.degree, other.nvars, other.degree
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c);
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), &-c.clone());
        }
        Ok(out)
    }

    /// Product modulo degree `> D`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.degree;
        let mut acc: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (a, ca) in &self.terms {
            let da = a.degree();
            for (b, cb) in &other.terms {
                // Terms are sorted by degree, so the rest is truncated away.
                if da + b.degree() > d {
                    break;
                }
                let p = ca.mul_ref(cb);
                match acc.entry(a.add(b)) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += &p;
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(TruncatedSeries {
            nvars: self.nvars,
            degree: d,
            terms: acc,
        })
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars, self.degree);
        }
        TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), c.mul_ref(s)))
                .collect(),
        }
    }

    /// Multiplies by `c·x^γ`.
    pub fn mul_monomial(&self, gamma: &MultiIndex, c: &C) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        if c.is_zero() {
            return out;
        }
        for (g, v) in &self.terms {
            let h = g.add(gamma);
            if h.degree() <= self.degree {
                out.terms.insert(h, v.mul_ref(c));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.degree);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Degree-`d` homogeneous part.
    pub fn homogeneous_part(&self, d: u32) -> Result<Self> {
        if d > self.degree {
            return Err(Error::Usage(format!(
                "degree {d} exceeds truncation degree {}",
                self.degree
            )));
        }
        Ok(self.filter_terms(|g| g.degree() == d))
    }

    /// Keeps the terms whose exponent satisfies `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(g, _)| keep(g))
                .map(|(g, c)| (g.clone(), c.clone()))
                .collect(),
        }
    }

    /// Reinterprets at a lower truncation degree.
    pub fn truncate(&self, degree: u32) -> Result<Self> {
        if degree > self.degree {
            return Err(Error::Usage(format!(
                "cannot raise truncation degree from {} to {degree}",
                self.degree
            )));
        }
        let mut out = self.filter_terms(|g| g.degree() <= degree);
        out.degree = degree;
        Ok(out)
    }

    /// Reinterprets at a higher truncation degree. The missing terms are
    /// taken to be zero, so this is only meaningful for polynomials.
    pub fn extend_degree(&self, degree: u32) -> Self {
        let mut out = self.clone();
        out.degree = degree.max(self.degree);
        out
    }

    /// Partial derivative with respect to `x_k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (g, c) in &self.terms {
            let e = g.get(k);
            if e == 0 {
                continue;
            }
            let mut h = g.clone();
            h.0[k] -= 1;
            out.terms.insert(h, c.mul_ref(&C::from_i64(i64::from(e))));
        }
        out
    }

    /// Exact division by `x_m`; on failure returns the first term with
    /// zero `m`-th exponent.
    pub fn divide_by_variable(&self, m: usize) -> std::result::Result<Self, MultiIndex> {
        let mut out = Self::zero(self.nvars, self.degree);
        for (g, c) in &self.terms {
            if g.get(m) == 0 {
                return Err(g.clone());
            }
            let mut h = g.clone();
            h.0[m] -= 1;
            out.terms.insert(h, c.clone());
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn try_map_coefficients<D: Scalar>(
        &self,
        f: impl Fn(&C) -> Result<D>,
    ) -> Result<TruncatedSeries<D>> {
        let mut terms = BTreeMap::new();
        for (g, c) in &self.terms {
            let v = f(c)?;
            if !v.is_zero() {
                terms.insert(g.clone(), v);
            }
        }
        Ok(TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms,
        })
    }

    /// Coefficientwise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map_coefficients(|c| c.conj())
    }

    /// Renames variables: `x_k ↦ x_{sigma[k]}`.
    pub fn permute_variables(&self, sigma: &[usize]) -> Self {
        TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.permute(sigma), c.clone()))
                .collect(),
        }
    }

    fn require_no_constant(&self, what: &str) -> Result<()> {
        if !self.constant_term().is_zero() {
            return Err(Error::Domain(format!("{what} requires a zero constant term")));
        }
        Ok(())
    }

    /// `log(1 + u) = Σ_{t≥1} (−1)^{t+1} u^t / t`.
    pub fn log1p(&self) -> Result<Self> {
        self.require_no_constant("log1p")?;
        let mut acc = Self::zero(self.nvars, self.degree);
        let mut power = self.clone();
        for t in 1..=self.degree.max(1) {
            if power.is_zero() {
                break;
            }
            let c = C::from_rational(Rational::new(
                (if t % 2 == 1 { 1 } else { -1 }).into(),
                i64::from(t).into(),
            ));
            acc = &acc + &power.scale(&c);
            power = &power * self;
        }
        Ok(acc)
    }

    /// `exp(w) = Σ_{t≥0} w^t / t!`.
    pub fn exp0(&self) -> Result<Self> {
        self.require_no_constant("exp0")?;
        let mut acc = Self::one(self.nvars, self.degree);
        let mut term = Self::one(self.nvars, self.degree);
        for t in 1..=self.degree {
            term = (&term * self).scale(&C::from_i64(i64::from(t)).inv());
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Jet of `self ∘ g` where `g` has one component per variable.
    pub fn compose(&self, g: &[TruncatedSeries<C>]) -> Result<Self> {
        Composer::new(g)?.compose(self)
    }

    /// Serialized term list in ascending graded order.
    pub fn to_term_list(&self) -> Vec<TermEntry> {
        self.terms
            .iter()
            .map(|(g, c)| TermEntry {
                exponents: g.to_vec(),
                coeff: c.to_string(),
            })
            .collect()
    }

    pub fn from_term_list(nvars: usize, degree: u32, list: &[TermEntry]) -> Result<Self> {
        let mut terms = Vec::with_capacity(list.len());
        for t in list {
            let z: GaussianRational = t.coeff.parse()?;
            terms.push((MultiIndex::new(&t.exponents), C::from_gaussian(&z)?));
        }
        Self::from_terms(nvars, degree, terms)
    }
}

impl<C: Scalar> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in &self.terms {
            let cs = c.to_string();
            let mono = g.monomial_string();
            let (neg, body) = match cs.strip_prefix('-') {
                // A leading minus on a complex value belongs to the real part only.
                Some(rest) if !rest.contains(['+', '-']) => (true, rest.to_string()),
                _ => (false, cs.clone()),
            };
            let complex = body.contains(['+', '-']);
            let coeff = if complex { format!("({body})") } else { body };
            let term = match (coeff.as_str(), g.is_zero()) {
                (_, true) => coeff.clone(),
                ("1", false) => mono,
                _ => format!("{coeff}*{mono}"),
            };
            if first {
                write!(f, "{}{term}", if neg { "-" } else { "" })?;
            } else {
                write!(f, " {} {term}", if neg { '-' } else { '+' })?;
            }
            first = false;
        }
        Ok(())
    }
}

impl<C: Scalar> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[n={} D={}] {}", self.nvars, self.degree, self)
    }
}

impl<C: Scalar> Add for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn add(self, rhs: Self) -> TruncatedSeries<C> {
        self.checked_add(rhs).expect("series addition")
    }
}

impl<C: Scalar> Sub for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn sub(self, rhs: Self) -> TruncatedSeries<C> {
        self.checked_sub(rhs).expect("series subtraction")
    }
}

impl<C: Scalar> Mul for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn mul(self, rhs: Self) -> TruncatedSeries<C> {
        self.checked_mul(rhs).expect("series multiplication")
    }
}

impl<C: Scalar> Neg for &TruncatedSeries<C> {
    type Output = TruncatedSeries<C>;
    fn neg(self) -> TruncatedSeries<C> {
        self.scale(&-C::one())
    }
}

/// Memoizes the powers `g^γ` of a fixed inner map so that several series can
/// be composed with it cheaply.
pub struct Composer<'g, C: Scalar> {
    inner: &'g [TruncatedSeries<C>],
    nvars: usize,
    degree: u32,
    cache: HashMap<MultiIndex, TruncatedSeries<C>>,
}

impl<'g, C: Scalar> Composer<'g, C> {
    /// `inner` must have nonzero length, a common shape and no constant terms.
    pub fn new(inner: &'g [TruncatedSeries<C>]) -> Result<Self> {
        let first = inner
            .first()
            .ok_or_else(|| Error::Usage("composition with an empty map".into()))?;
        let (nvars, degree) = (first.nvars, first.degree);
        for (k, g) in inner.iter().enumerate() {
            if g.nvars != nvars || g.degree != degree {
                return Err(Error::Usage(format!(
                    "component {} has shape (n={}, D={}), expected (n={nvars}, D={degree})",
                    k + 1,
                    g.nvars,
                    g.degree
                )));
            }
            if !g.constant_term().is_zero() {
                return Err(Error::Domain(format!(
                    "inner map component {} has a nonzero constant term",
                    k + 1
                )));
            }
        }
        Ok(Composer {
            inner,
            nvars,
            degree,
            cache: HashMap::new(),
        })
    }

    /// `g^γ`; the caller guarantees `|γ| ≤ D`.
    pub fn power(&mut self, gamma: &MultiIndex) -> &TruncatedSeries<C> {
        if !self.cache.contains_key(gamma) {
            let value = if gamma.is_zero() {
                TruncatedSeries::one(self.nvars, self.degree)
            } else {
                let k = gamma.as_slice().iter().position(|&e| e > 0).unwrap();
                let mut prev = gamma.clone();
                prev.0[k] -= 1;
                let base = self.power(&prev).clone();
                &base * &self.inner[k]
            };
            self.cache.insert(gamma.clone(), value);
        }
        &self.cache[gamma]
    }

    /// `f ∘ inner`.
    pub fn compose(&mut self, f: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>> {
        if f.nvars != self.inner.len() {
            return Err(Error::Usage(format!(
                "outer series has {} variables but inner map has {} components",
                f.nvars,
                self.inner.len()
            )));
        }
        if f.degree != self.degree {
            return Err(Error::Usage(format!(
                "truncation degrees differ: {} vs {}",
                f.degree, self.degree
            )));
        }
        let mut acc: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (g, c) in &f.terms {
            if g.degree() > self.degree {
                continue;
            }
            for (h, v) in self.power(g).terms.iter() {
                let p = v.mul_ref(c);
                match acc.entry(h.clone()) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() += &p;
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(TruncatedSeries {
            nvars: self.nvars,
            degree: self.degree,
            terms: acc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    type S = TruncatedSeries<Rational>;

    fn x(n: usize, d: u32, m: usize) -> S {
        S::variable(n, d, m)
    }

    fn c(n: usize, d: u32, v: Rational) -> S {
        S::constant(n, d, v)
    }

    #[test]
    fn graded_order() {
        let mut v = [MultiIndex::new(&[0, 2]),
            MultiIndex::new(&[1, 1]),
            MultiIndex::new(&[2, 0]),
            MultiIndex::new(&[0, 1])];
        v.sort();
        let got: Vec<_> = v.iter().map(|m| m.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(MultiIndex::all_of_degree(2, 2), vec![
            MultiIndex::new(&[2, 0]),
            MultiIndex::new(&[1, 1]),
            MultiIndex::new(&[0, 2])
        ]);
        assert_eq!(MultiIndex::all_up_to(3, 0, 3).len(), 20);
    }

    #[test]
    fn ring_examples() {
        let (xx, yy) = (x(2, 2, 0), x(2, 2, 1));
        let want = &(&xx * &xx) - &(&yy * &yy);
        assert_eq!(&(&xx + &yy) * &(&xx - &yy), want);

        let (xx, yy) = (x(2, 3, 0), x(2, 3, 1));
        assert!((&(&xx * &xx) * &(&yy * &yy)).is_zero());

        let one = S::one(1, 3);
        let t = x(1, 3, 0);
        let geo = &(&(&one - &t) + &(&t * &t)) - &t.pow(3);
        assert_eq!(&(&one + &t) * &geo, one);
    }

    #[test]
    fn shape_mismatch_is_a_usage_error() {
        let a = S::one(2, 3);
        assert!(a.checked_add(&S::one(2, 4)).is_err());
        assert!(a.checked_mul(&S::one(3, 3)).is_err());
        assert!(a.homogeneous_part(4).is_err());
    }

    #[test]
    fn compose_examples() {
        let d = 4;
        let xy = &x(2, d, 0) * &x(2, d, 1);
        let g = vec![
            x(2, d, 0).scale(&rat(-2, 1)),
            x(2, d, 1).scale(&rat(1, 2)),
        ];
        assert_eq!(xy.compose(&g).unwrap(), xy.scale(&rat(-1, 1)));
        let x2y2 = &xy * &xy;
        assert_eq!(x2y2.compose(&g).unwrap(), x2y2);
        let f = &(&x(2, d, 0) + &xy) + &c(2, d, rat(3, 1));
        let id = vec![x(2, d, 0), x(2, d, 1)];
        assert_eq!(f.compose(&id).unwrap(), f);
        let bad = vec![&x(2, d, 0) + &c(2, d, rat(1, 1)), x(2, d, 1)];
        assert!(matches!(f.compose(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn log_and_exp_examples() {
        assert!(S::zero(1, 3).log1p().unwrap().is_zero());
        let t = x(1, 3, 0);
        let want = &(&t - &t.pow(2).scale(&rat(1, 2))) + &t.pow(3).scale(&rat(1, 3));
        assert_eq!(t.log1p().unwrap(), want);
        assert_eq!(S::zero(1, 2).exp0().unwrap(), S::one(1, 2));
        let t = x(1, 2, 0);
        let want = &(&S::one(1, 2) + &t) + &t.pow(2).scale(&rat(1, 2));
        assert_eq!(t.exp0().unwrap(), want);
        assert!(S::one(1, 2).log1p().is_err());
    }

    #[test]
    fn homogeneous_parts() {
        let d = 3;
        let f = &(&S::one(2, d) + &x(2, d, 0)) + &(&x(2, d, 0) * &x(2, d, 1));
        assert_eq!(f.homogeneous_part(0).unwrap(), S::one(2, d));
        assert_eq!(f.homogeneous_part(2).unwrap(), &x(2, d, 0) * &x(2, d, 1));
        assert!(f.homogeneous_part(3).unwrap().is_zero());
    }

    #[test]
    fn display() {
        let d = 3;
        let f = &(&x(2, d, 0).scale(&rat(2, 1)) - &(&x(2, d, 1) * &x(2, d, 1)))
            + &(&x(2, d, 0) * &x(2, d, 1)).scale(&rat(1, 3));
        assert_eq!(f.to_string(), "2*x + 1/3*x*y - y^2");
        let z = TruncatedSeries::<GaussianRational>::monomial(
            1,
            2,
            MultiIndex::new(&[1]),
            "1-2*i".parse().unwrap(),
        );
        assert_eq!(z.to_string(), "(1-2*i)*x");
    }

    #[test]
    fn term_list_round_trip() {
        let f = &x(2, 3, 0).scale(&rat(-5, 3)) + &x(2, 3, 1).pow(2);
        let list = f.to_term_list();
        assert_eq!(list[0].exponents, vec![1, 0]);
        assert_eq!(list[0].coeff, "-5/3");
        assert_eq!(S::from_term_list(2, 3, &list).unwrap(), f);
    }

    fn arb_series(n: usize, d: u32, nonconst: bool) -> impl Strategy<Value = S> {
        let lo = u32::from(nonconst);
        let idx = MultiIndex::all_up_to(n, lo, d);
        proptest::collection::vec((0..idx.len(), -4i64..=4, 1i64..=3), 0..6).prop_map(
            move |ts| {
                let mut s = S::zero(n, d);
                for (k, a, b) in ts {
                    s.add_term(idx[k].clone(), &rat(a, b));
                }
                s
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in arb_series(3, 5, false), b in arb_series(3, 5, false),
                       c2 in arb_series(3, 5, false)) {
            prop_assert_eq!(&(&a * &b) * &c2, &a * &(&b * &c2));
            prop_assert_eq!(&a * &(&b + &c2), &(&a * &b) + &(&a * &c2));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn composition_is_associative(f in arb_series(2, 4, false),
                                      g1 in arb_series(2, 4, true), g2 in arb_series(2, 4, true),
                                      h1 in arb_series(2, 4, true), h2 in arb_series(2, 4, true)) {
            let g = vec![g1, g2];
            let h = vec![h1, h2];
            let gh: Vec<S> = g.iter().map(|gi| gi.compose(&h).unwrap()).collect();
            prop_assert_eq!(f.compose(&g).unwrap().compose(&h).unwrap(), f.compose(&gh).unwrap());
        }

        #[test]
        fn truncation_coherence(a in arb_series(2, 6, false), b in arb_series(2, 6, false)) {
            let lhs = (&a * &b).truncate(3).unwrap();
            let rhs = &a.truncate(3).unwrap() * &b.truncate(3).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn exp_log_round_trip(u in arb_series(2, 6, true)) {
            let back = &u.log1p().unwrap().exp0().unwrap() - &S::one(2, 6);
            prop_assert_eq!(&back, &u);
            let w = u;
            let e = &w.exp0().unwrap() - &S::one(2, 6);
            prop_assert_eq!(e.log1p().unwrap(), w);
        }
    }
}
