//! Germs of maps fixing the origin, and commuting families of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::gaussian::GaussianRational;
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::series::{Composer, MultiIndex, TruncatedSeries};

/// An `n`-component map jet `Φ(x) = Ax + …` with `Φ(0) = 0` and `A`
/// invertible.
#[derive(Clone, PartialEq, Eq)]
pub struct Germ<C: Scalar> {
    n: usize,
    degree: u32,
    components: Vec<TruncatedSeries<C>>,
}

/// Lowest term of `f∘g − g∘f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutativityDefect<C: Scalar> {
    pub degree: u32,
    /// 1-based component index.
    pub component: usize,
    pub exponents: MultiIndex,
    /// Coefficient of the monomial in `f∘g − g∘f`.
    pub coefficient: C,
}

impl<C: Scalar> Germ<C> {
    /// Validates shape, zero constant terms and an invertible linear part.
    pub fn from_components(components: Vec<TruncatedSeries<C>>) -> Result<Self> {
        let g = Self::from_components_unchecked(components)?;
        linalg::invert(&g.linear_matrix())?;
        Ok(g)
    }

    /// As [`Germ::from_components`] but allows a singular linear part; used
    /// for intermediate maps such as `id + H` corrections.
    pub(crate) fn from_components_unchecked(components: Vec<TruncatedSeries<C>>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Usage("a germ needs at least one component".into()));
        }
        let degree = components[0].degree();
        for (m, c) in components.iter().enumerate() {
            if c.nvars() != n || c.degree() != degree {
                return Err(Error::Usage(format!(
                    "component {} has shape (n={}, D={}), expected (n={n}, D={degree})",
                    m + 1,
                    c.nvars(),
                    c.degree()
                )));
            }
            if !c.constant_term().is_zero() {
                return Err(Error::Domain(format!(
                    "component {} has a nonzero constant term",
                    m + 1
                )));
            }
        }
        Ok(Germ {
            n,
            degree,
            components,
        })
    }

    pub fn identity(n: usize, degree: u32) -> Self {
        Germ {
            n,
            degree,
            components: (0..n)
                .map(|m| TruncatedSeries::variable(n, degree, m))
                .collect(),
        }
    }

    pub fn linear_diagonal(diag: &[C], degree: u32) -> Result<Self> {
        if let Some(k) = diag.iter().position(|v| v.is_zero()) {
            return Err(Error::Domain(format!(
                "diagonal entry {} is zero; the linear part must be invertible",
                k + 1
            )));
        }
        let n = diag.len();
        Self::from_components(
            diag.iter()
                .enumerate()
                .map(|(m, v)| TruncatedSeries::variable(n, degree, m).scale(v))
                .collect(),
        )
    }

    /// Linear germ `x ↦ Mx`.
    pub fn linear(matrix: &Matrix<C>, degree: u32) -> Result<Self> {
        let n = matrix.len();
        let comps = matrix
            .iter()
            .map(|row| {
                let mut s = TruncatedSeries::zero(n, degree);
                for (k, v) in row.iter().enumerate() {
                    s.add_term(MultiIndex::unit(n, k), v);
                }
                s
            })
            .collect();
        Self::from_components(comps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[TruncatedSeries<C>] {
        &self.components
    }

    /// Component `m`, 0-based.
    pub fn component(&self, m: usize) -> &TruncatedSeries<C> {
        &self.components[m]
    }

    pub fn into_components(self) -> Vec<TruncatedSeries<C>> {
        self.components
    }

    /// `A[m][k]` = coefficient of `x_k` in component `m`.
    pub fn linear_matrix(&self) -> Matrix<C> {
        self.components
            .iter()
            .map(|c| {
                (0..self.n)
                    .map(|k| c.coefficient(&MultiIndex::unit(self.n, k)))
                    .collect()
            })
            .collect()
    }

    /// Diagonal of the linear part when it is diagonal.
    pub fn diagonal(&self) -> Option<Vec<C>> {
        let a = self.linear_matrix();
        for (m, row) in a.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if m != k && !v.is_zero() {
                    return None;
                }
            }
        }
        Some(a.into_iter().enumerate().map(|(m, row)| row[m].clone()).collect())
    }

    /// The terms of degree at least two.
    pub fn nonlinear_part(&self) -> Vec<TruncatedSeries<C>> {
        self.components
            .iter()
            .map(|c| c.filter_terms(|g| g.degree() >= 2))
            .collect()
    }

    pub fn is_linear(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.terms().all(|(g, _)| g.degree() == 1))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.degree != other.degree {
            return Err(Error::Usage(format!(
                "germ shape mismatch: (n={}, D={}) vs (n={}, D={})",
                self.n, self.degree, other.n, other.degree
            )));
        }
        Ok(())
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_shape(g)?;
        let mut comp = Composer::new(&g.components)?;
        let components = self
            .components
            .iter()
            .map(|f| comp.compose(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Germ {
            n: self.n,
            degree: self.degree,
            components,
        })
    }

    /// Applies a constant matrix on the left: `x ↦ M·Φ(x)`.
    pub fn apply_matrix(&self, m: &Matrix<C>) -> Self {
        let components = m
            .iter()
            .map(|row| {
                let mut acc = TruncatedSeries::zero(self.n, self.degree);
                for (k, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        acc = &acc + &self.components[k].scale(v);
                    }
                }
                acc
            })
            .collect();
        Germ {
            n: self.n,
            degree: self.degree,
            components,
        }
    }

    /// Two-sided inverse modulo degree `> D`, solved degree by degree.
    pub fn invert(&self) -> Result<Self> {
        let a_inv = linalg::invert(&self.linear_matrix())?;
        let nonlinear = self.nonlinear_part();
        let mut g = Germ::linear(&a_inv, self.degree)?;
        for d in 2..=self.degree {
            // The degree-d part of N∘g only involves g below degree d.
            let gt: Vec<TruncatedSeries<C>> = g
                .components
                .iter()
                .map(|c| c.truncate(d))
                .collect::<Result<_>>()?;
            let mut comp = Composer::new(&gt)?;
            let mut parts = Vec::with_capacity(self.n);
            for nm in &nonlinear {
                let v = comp.compose(&nm.truncate(d)?)?.homogeneous_part(d)?;
                parts.push(v.extend_degree(self.degree));
            }
            let part_germ = Germ {
                n: self.n,
                degree: self.degree,
                components: parts,
            };
            let correction = part_germ.apply_matrix(&a_inv);
            for (gc, cc) in g.components.iter_mut().zip(correction.components) {
                *gc = &*gc - &cc;
            }
        }
        Ok(g)
    }

    /// `ψ⁻¹ ∘ self ∘ ψ`.
    pub fn conjugate(&self, psi: &Self) -> Result<Self> {
        self.check_shape(psi)?;
        psi.invert()?.compose(&self.compose(psi)?)
    }

    /// Reinterprets at a lower truncation degree.
    pub fn truncate(&self, degree: u32) -> Result<Self> {
        Ok(Germ {
            n: self.n,
            degree,
            components: self
                .components
                .iter()
                .map(|c| c.truncate(degree))
                .collect::<Result<_>>()?,
        })
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy) -> Germ<D> {
        Germ {
            n: self.n,
            degree: self.degree,
            components: self
                .components
                .iter()
                .map(|c| c.map_coefficients(f))
                .collect(),
        }
    }

    pub fn try_map_coefficients<D: Scalar>(
        &self,
        f: impl Fn(&C) -> Result<D> + Copy,
    ) -> Result<Germ<D>> {
        Ok(Germ {
            n: self.n,
            degree: self.degree,
            components: self
                .components
                .iter()
                .map(|c| c.try_map_coefficients(f))
                .collect::<Result<_>>()?,
        })
    }

    /// Human notation, e.g. `(2*x + y^2, 3*y)`.
    pub fn display_string(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

impl<C: Scalar> Germ<C> {
    /// Lowest graded term of `f∘g − g∘f`, ordered by degree, then component,
    /// then monomial; `None` when the germs commute up to `D`.
    pub fn commutativity_defect(&self, g: &Self) -> Result<Option<CommutativityDefect<C>>> {
        let fg = self.compose(g)?;
        let gf = g.compose(self)?;
        let mut best: Option<CommutativityDefect<C>> = None;
        for m in 0..self.n {
            let diff = &fg.components[m] - &gf.components[m];
            let lowest = diff.terms().next().map(|(g, c)| (g.clone(), c.clone()));
            if let Some((gamma, c)) = lowest {
                let cand = CommutativityDefect {
                    degree: gamma.degree(),
                    component: m + 1,
                    exponents: gamma,
                    coefficient: c,
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (cand.degree, cand.component, &cand.exponents)
                            < (b.degree, b.component, &b.exponents)
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        Ok(best)
    }
}

impl<C: Scalar> fmt::Display for Germ<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_string())
    }
}

impl<C: Scalar> fmt::Debug for Germ<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Germ[n={} D={}]{}", self.n, self.degree, self.display_string())
    }
}

/// `p` germs on a common `(n, D)` with `p ≤ n`; declared type `(p, n − p)`.
///
/// Commutativity is checked on demand, never assumed.
#[derive(Clone, PartialEq, Eq)]
pub struct Family<C: Scalar> {
    n: usize,
    degree: u32,
    germs: Vec<Germ<C>>,
}

impl<C: Scalar> Family<C> {
    pub fn new(germs: Vec<Germ<C>>) -> Result<Self> {
        let first = germs
            .first()
            .ok_or_else(|| Error::Usage("a family needs at least one germ".into()))?;
        let (n, degree) = (first.n, first.degree);
        for (i, g) in germs.iter().enumerate() {
            if g.n != n || g.degree != degree {
                return Err(Error::Usage(format!(
                    "germ {} has shape (n={}, D={}), expected (n={n}, D={degree})",
                    i + 1,
                    g.n,
                    g.degree
                )));
            }
        }
        if germs.len() > n {
            return Err(Error::Usage(format!(
                "family has p={} germs but dimension n={n}; need p ≤ n",
                germs.len()
            )));
        }
        Ok(Family { n, degree, germs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.germs.len()
    }

    pub fn q(&self) -> usize {
        self.n - self.germs.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn declared_type(&self) -> (usize, usize) {
        (self.p(), self.q())
    }

    pub fn germs(&self) -> &[Germ<C>] {
        &self.germs
    }

    /// Germ `i`, 0-based.
    pub fn germ(&self, i: usize) -> &Germ<C> {
        &self.germs[i]
    }

    /// Diagonals of all linear parts; precondition error otherwise.
    pub fn diagonals(&self) -> Result<Vec<Vec<C>>> {
        self.germs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.diagonal().ok_or_else(|| {
                    Error::Precondition(format!("germ {} has a non-diagonal linear part", i + 1))
                })
            })
            .collect()
    }

    /// Conjugates every germ by `ψ`.
    pub fn conjugate(&self, psi: &Germ<C>) -> Result<Self> {
        let inv = psi.invert()?;
        let germs = self
            .germs
            .iter()
            .map(|g| inv.compose(&g.compose(psi)?))
            .collect::<Result<Vec<_>>>()?;
        Family::new(germs)
    }

    pub fn truncate(&self, degree: u32) -> Result<Self> {
        Family::new(
            self.germs
                .iter()
                .map(|g| g.truncate(degree))
                .collect::<Result<_>>()?,
        )
    }

    pub fn map_coefficients<D: Scalar>(&self, f: impl Fn(&C) -> D + Copy) -> Family<D> {
        Family {
            n: self.n,
            degree: self.degree,
            germs: self.germs.iter().map(|g| g.map_coefficients(f)).collect(),
        }
    }

    pub fn try_map_coefficients<D: Scalar>(
        &self,
        f: impl Fn(&C) -> Result<D> + Copy,
    ) -> Result<Family<D>> {
        Ok(Family {
            n: self.n,
            degree: self.degree,
            germs: self
                .germs
                .iter()
                .map(|g| g.try_map_coefficients(f))
                .collect::<Result<_>>()?,
        })
    }

    /// Parses the JSON family schema.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("family JSON: {e}")))?;
        file.to_family()
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile::from_family(self)
    }

    /// Canonical JSON (graded term order).
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("family serializes")
    }
}

impl<C: Scalar> Family<C> {
    /// First pair `(i, j)` (1-based) that fails to commute, with its defect.
    pub fn first_commutativity_defect(
        &self,
    ) -> Result<Option<(usize, usize, CommutativityDefect<C>)>> {
        for i in 0..self.p() {
            for j in i + 1..self.p() {
                if let Some(d) = self.germs[i].commutativity_defect(&self.germs[j])? {
                    return Ok(Some((i + 1, j + 1, d)));
                }
            }
        }
        Ok(None)
    }

    /// Error unless all pairs commute up to `D`.
    pub fn check_commuting(&self) -> Result<()> {
        match self.first_commutativity_defect()? {
            None => Ok(()),
            Some((i, j, d)) => Err(Error::NotCommuting {
                first: i,
                second: j,
                detail: format!(
                    "component {} monomial {} has coefficient {} in Φ{i}∘Φ{j} − Φ{j}∘Φ{i}",
                    d.component,
                    d.exponents.monomial_string(),
                    d.coefficient
                ),
            }),
        }
    }
}

impl<C: Scalar> fmt::Debug for Family<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Family[n={} p={} D={}]", self.n, self.p(), self.degree)?;
        for (i, g) in self.germs.iter().enumerate() {
            writeln!(f, "  Φ{} = {}", i + 1, g.display_string())?;
        }
        Ok(())
    }
}

/// One serialized term of a map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// 1-based component index.
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coeff: String,
}

/// One serialized germ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_diag: Option<Vec<String>>,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

/// The versioned family file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub schema: u32,
    pub n: usize,
    pub p: usize,
    pub degree: u32,
    pub maps: Vec<MapSpec>,
}

pub const FAMILY_SCHEMA_VERSION: u32 = 1;

impl FamilyFile {
    pub fn to_family<C: Scalar>(&self) -> Result<Family<C>> {
        if self.schema != FAMILY_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema: unsupported version {}, expected {FAMILY_SCHEMA_VERSION}",
                self.schema
            )));
        }
        let (n, d) = (self.n, self.degree);
        if n == 0 {
            return Err(Error::Parse("n: dimension must be positive".into()));
        }
        if d == 0 {
            return Err(Error::Parse("degree: must be positive".into()));
        }
        if self.p != self.maps.len() {
            return Err(Error::Parse(format!(
                "p: declares {} germs but maps has {} entries",
                self.p,
                self.maps.len()
            )));
        }
        let mut germs = Vec::with_capacity(self.maps.len());
        for (i, map) in self.maps.iter().enumerate() {
            let at = |what: &str| format!("maps[{i}].{what}");
            let mut comps: Vec<TruncatedSeries<C>> =
                (0..n).map(|_| TruncatedSeries::zero(n, d)).collect();
            let mut seen = std::collections::BTreeSet::new();
            if let Some(diag) = &map.linear_diag {
                if diag.len() != n {
                    return Err(Error::Parse(format!(
                        "{}: has {} entries, expected {n}",
                        at("linear_diag"),
                        diag.len()
                    )));
                }
                for (m, s) in diag.iter().enumerate() {
                    let z: GaussianRational = s
                        .parse()
                        .map_err(|e| Error::Parse(format!("{}[{m}]: {e}", at("linear_diag"))))?;
                    if num_traits::Zero::is_zero(&z) {
                        return Err(Error::Parse(format!(
                            "{}[{m}]: eigenvalue must be nonzero",
                            at("linear_diag")
                        )));
                    }
                    let c = C::from_gaussian(&z)
                        .map_err(|e| Error::Parse(format!("{}[{m}]: {e}", at("linear_diag"))))?;
                    comps[m].add_term(MultiIndex::unit(n, m), &c);
                    seen.insert((m, MultiIndex::unit(n, m)));
                }
            }
            for (t, term) in map.terms.iter().enumerate() {
                let here = at(&format!("terms[{t}]"));
                if term.component == 0 || term.component > n {
                    return Err(Error::Parse(format!(
                        "{here}.component: {} is outside 1..={n}",
                        term.component
                    )));
                }
                if term.exponents.len() != n {
                    return Err(Error::Parse(format!(
                        "{here}.exponents: has length {}, expected {n}",
                        term.exponents.len()
                    )));
                }
                let gamma = MultiIndex::new(&term.exponents);
                if gamma.degree() == 0 {
                    return Err(Error::Parse(format!(
                        "{here}: constant terms are not allowed (germs fix the origin)"
                    )));
                }
                if gamma.degree() > d {
                    return Err(Error::Parse(format!(
                        "{here}: monomial degree {} exceeds degree {d}",
                        gamma.degree()
                    )));
                }
                let m = term.component - 1;
                if !seen.insert((m, gamma.clone())) {
                    return Err(Error::Parse(format!(
                        "{here}: duplicate monomial {gamma} in component {}",
                        term.component
                    )));
                }
                let z: GaussianRational = term
                    .coeff
                    .parse()
                    .map_err(|e| Error::Parse(format!("{here}.coeff: {e}")))?;
                let c = C::from_gaussian(&z)
                    .map_err(|e| Error::Parse(format!("{here}.coeff: {e}")))?;
                comps[m].add_term(gamma, &c);
            }
            let germ = Germ::from_components(comps).map_err(|e| match e {
                Error::Domain(msg) => Error::Parse(format!("maps[{i}]: {msg}")),
                other => other,
            })?;
            germs.push(germ);
        }
        Family::new(germs).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_family<C: Scalar>(fam: &Family<C>) -> Self {
        let maps = fam
            .germs()
            .iter()
            .map(|g| {
                let diag = g.diagonal();
                let mut terms = Vec::new();
                for (m, comp) in g.components().iter().enumerate() {
                    for (gamma, c) in comp.terms() {
                        if diag.is_some() && gamma.degree() == 1 {
                            continue;
                        }
                        terms.push(TermSpec {
                            component: m + 1,
                            exponents: gamma.to_vec(),
                            coeff: c.to_string(),
                        });
                    }
                }
                MapSpec {
                    linear_diag: diag.map(|d| d.iter().map(|v| v.to_string()).collect()),
                    terms,
                }
            })
            .collect();
        FamilyFile {
            schema: FAMILY_SCHEMA_VERSION,
            n: fam.n(),
            p: fam.p(),
            degree: fam.degree(),
            maps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    type G = Germ<Rational>;
    type S = TruncatedSeries<Rational>;

    fn var(n: usize, d: u32, m: usize) -> S {
        S::variable(n, d, m)
    }

    /// Builds a 2D germ from two closures over (x, y).
    fn germ2(d: u32, f: impl Fn(&S, &S) -> (S, S)) -> G {
        let (x, y) = (var(2, d, 0), var(2, d, 1));
        let (a, b) = f(&x, &y);
        G::from_components(vec![a, b]).unwrap()
    }

    fn k(v: i64) -> Rational {
        rat(v, 1)
    }

    #[test]
    fn compose_examples() {
        let d = 4;
        let f = germ2(d, |x, y| (&x.scale(&k(2)) + &(y * y), y.scale(&k(3))));
        assert_eq!(f.compose(&G::identity(2, d)).unwrap(), f);

        let phi1 = germ2(d, |x, y| (x.scale(&k(2)), &y.scale(&k(4)) + &(x * x)));
        let phi2 = germ2(d, |x, y| (x.scale(&k(-3)), y.scale(&k(9))));
        let want = germ2(d, |x, y| {
            (x.scale(&k(-6)), &y.scale(&k(36)) + &(x * x).scale(&k(9)))
        });
        assert_eq!(phi1.compose(&phi2).unwrap(), want);
        assert_eq!(phi2.compose(&phi1).unwrap(), want);
    }

    #[test]
    fn inversion_examples() {
        let g = G::linear_diagonal(&[k(2)], 3).unwrap();
        assert_eq!(g.invert().unwrap(), G::linear_diagonal(&[rat(1, 2)], 3).unwrap());
        let x = var(1, 3, 0);
        let f = G::from_components(vec![&x + &(&x * &x)]).unwrap();
        let want = &(&x - &(&x * &x)) + &x.pow(3).scale(&k(2));
        assert_eq!(f.invert().unwrap().components()[0], want);
        let f = germ2(5, |x, y| (&x.scale(&k(2)) + &(y * y), &y.scale(&rat(1, 3)) + &(x * y)));
        let inv = f.invert().unwrap();
        assert_eq!(f.compose(&inv).unwrap(), G::identity(2, 5));
        assert_eq!(inv.compose(&f).unwrap(), G::identity(2, 5));
        assert!(G::from_components(vec![&x * &x]).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let d = 3;
        let lin = germ2(d, |x, y| (x.scale(&k(2)), y.scale(&k(3))));
        let f = germ2(d, |x, y| (&x.scale(&k(2)) + &(y * y), y.scale(&k(3))));
        assert_eq!(f.conjugate(&G::identity(2, d)).unwrap(), f);
        // ψ = (x + y²/7, y) removes y² from the first component of f ...
        let psi = germ2(d, |x, y| (x + &(y * y).scale(&rat(1, 7)), y.clone()));
        assert_eq!(f.conjugate(&psi).unwrap(), lin);
        // ... and its inverse puts it back.
        let psi_inv = germ2(d, |x, y| (x - &(y * y).scale(&rat(1, 7)), y.clone()));
        assert_eq!(lin.conjugate(&psi_inv).unwrap(), f);
        let there = f.conjugate(&psi).unwrap();
        assert_eq!(there.conjugate(&psi.invert().unwrap()).unwrap(), f);
    }

    #[test]
    fn commutativity_defects() {
        let d = 3;
        let phi1 = germ2(d, |x, y| (x.scale(&k(2)), &y.scale(&k(4)) + &(x * x)));
        let phi2 = germ2(d, |x, y| (x.scale(&k(-3)), y.scale(&k(9))));
        assert_eq!(phi1.commutativity_defect(&phi2).unwrap(), None);
        let f = germ2(d, |x, y| (x.scale(&k(2)), y + &(x * x)));
        let g = germ2(d, |x, y| (x.scale(&k(3)), y.clone()));
        let def = f.commutativity_defect(&g).unwrap().unwrap();
        assert_eq!(def.degree, 2);
        assert_eq!(def.component, 2);
        assert_eq!(def.exponents, MultiIndex::new(&[2, 0]));
        // f∘g has 9x², g∘f has x².
        assert_eq!(def.coefficient, k(8));
        assert_eq!(f.commutativity_defect(&f).unwrap(), None);
    }

    #[test]
    fn family_json_round_trip() {
        let text = r#"{"schema":1,"n":2,"p":2,"degree":3,"maps":[
            {"linear_diag":["2","4"],"terms":[{"component":2,"exponents":[2,0],"coeff":"1"}]},
            {"linear_diag":["-3","9"]}]}"#;
        let fam: Family<GaussianRational> = Family::from_json_str(text).unwrap();
        assert_eq!(fam.declared_type(), (2, 0));
        fam.check_commuting().unwrap();
        let again: Family<GaussianRational> = Family::from_json_str(&fam.to_json_string()).unwrap();
        assert_eq!(again, fam);
        let real: Family<Rational> = Family::from_json_str(text).unwrap();
        assert_eq!(real.germ(0).diagonal().unwrap(), vec![k(2), k(4)]);
    }

    #[test]
    fn family_json_errors_name_the_field() {
        let cases = [
            (r#"{"schema":2,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"]}]}"#, "schema"),
            (r#"{"schema":1,"n":1,"p":2,"degree":2,"maps":[{"linear_diag":["2"]}]}"#, "p:"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["0"]}]}"#, "linear_diag[0]"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"],"terms":[{"component":1,"exponents":[3],"coeff":"1"}]}]}"#, "exceeds degree"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"],"terms":[{"component":1,"exponents":[0],"coeff":"1"}]}]}"#, "constant"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"],"terms":[{"component":2,"exponents":[2],"coeff":"1"}]}]}"#, "component"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"],"terms":[{"component":1,"exponents":[2],"coeff":"1"},{"component":1,"exponents":[2],"coeff":"3"}]}]}"#, "duplicate"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"]}],"extra":1}"#, "unknown field"),
            (r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["2"],"terms":[{"component":1,"exponents":[2],"coeff":"1/0"}]}]}"#, "coeff"),
        ];
        for (text, needle) in cases {
            let err = Family::<GaussianRational>::from_json_str(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err} should mention {needle}");
        }
        let complex = r#"{"schema":1,"n":1,"p":1,"degree":2,"maps":[{"linear_diag":["0+1*i"]}]}"#;
        assert!(Family::<Rational>::from_json_str(complex).is_err());
    }

    #[test]
    fn non_diagonal_linear_parts() {
        let text = r#"{"schema":1,"n":2,"p":1,"degree":2,"maps":[{"terms":[
            {"component":1,"exponents":[1,0],"coeff":"1"},{"component":1,"exponents":[0,1],"coeff":"-1"},
            {"component":2,"exponents":[1,0],"coeff":"1"},{"component":2,"exponents":[0,1],"coeff":"1"}]}]}"#;
        let fam: Family<Rational> = Family::from_json_str(text).unwrap();
        assert!(fam.germ(0).diagonal().is_none());
        assert!(fam.diagonals().is_err());
        let again: Family<Rational> = Family::from_json_str(&fam.to_json_string()).unwrap();
        assert_eq!(again, fam);
    }
}
