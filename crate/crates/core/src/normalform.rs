//! Simultaneous Poincaré–Dulac normalization, first integrals, the
//! integrable normal form certificate and the real-case transforms.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::gaussian::GaussianRational;
use crate::germ::{Family, FamilyFile, Germ, MapSpec};
use crate::linalg::{self, Matrix};
use crate::resonance::{enumerate_omega_in, EigenData, RelationLattice};
use crate::scalar::{Rational, Scalar};
use crate::series::{Composer, MultiIndex, TermEntry, TruncatedSeries};

/// `μ^γ` for one row of eigenvalues.
fn monomial_value<C: Scalar>(mu: &[C], gamma: &MultiIndex) -> C {
    mu.iter()
        .zip(gamma.as_slice())
        .fold(C::one(), |acc, (z, &e)| acc.mul_ref(&z.pow_u32(e)))
}

fn is_resonant<C: Scalar>(diag: &[Vec<C>], m: usize, gamma: &MultiIndex) -> bool {
    diag.iter().all(|mu| monomial_value(mu, gamma) == mu[m])
}

fn require_diagonal<C: Scalar>(fam: &Family<C>) -> Result<Vec<Vec<C>>> {
    fam.diagonals().map_err(|_| {
        Error::Precondition("normalization needs diagonal linear parts".into())
    })
}

/// Validates an involutive pairing of coordinates.
pub fn check_pairing(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n || sigma.iter().enumerate().any(|(k, &s)| s >= n || sigma[s] != k) {
        return Err(Error::Usage(format!(
            "pairing {sigma:?} is not an involution of 1..={n}"
        )));
    }
    Ok(())
}

/// One eliminated monomial. Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination<C: Scalar> {
    pub degree: u32,
    pub component: usize,
    pub exponents: MultiIndex,
    /// Coefficient of the monomial in germ `i_star` before elimination.
    pub coefficient: C,
    /// `μ_{i*}^γ − μ_{i*,m}`.
    pub divisor: C,
    pub i_star: usize,
    /// Coefficient of `x^γ` in component `m` of the conjugating map.
    pub h: C,
}

impl<C: Scalar> Elimination<C> {
    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "component": self.component,
            "exponents": self.exponents.to_vec(),
            "coefficient": self.coefficient.to_string(),
            "divisor": self.divisor.to_string(),
            "i_star": self.i_star,
            "h": self.h.to_string(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Pairing `σ` (0-based involution) for ρ-equivariant normalization.
    pub rho_pairing: Option<Vec<usize>>,
    /// One conjugation per degree instead of one per monomial.
    pub batched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationResult<C: Scalar> {
    pub normalized: Family<C>,
    /// Tangent to the identity with `ψ⁻¹∘Φ_i∘ψ = normalized_i`.
    pub psi: Germ<C>,
    pub elimination_log: Vec<Elimination<C>>,
}

pub fn germ_to_map_spec<C: Scalar>(g: &Germ<C>) -> MapSpec {
    let fam = Family::new(vec![g.clone()]).expect("a single germ forms a family");
    FamilyFile::from_family(&fam).maps.remove(0)
}

impl<C: Scalar> NormalizationResult<C> {
    pub fn to_json(&self) -> Value {
        json!({
            "normalized": serde_json::to_value(FamilyFile::from_family(&self.normalized)).expect("serializable"),
            "psi": serde_json::to_value(germ_to_map_spec(&self.psi)).expect("serializable"),
            "elimination_log": self.elimination_log.iter().map(Elimination::to_json).collect::<Vec<_>>(),
        })
    }
}

/// A sparse near-identity map `x + Σ h·x^γ·e_m`.
struct SparseShift<C: Scalar> {
    terms: Vec<(usize, MultiIndex, C)>,
}

impl<C: Scalar> SparseShift<C> {
    fn components(&self, n: usize, d: u32) -> Vec<TruncatedSeries<C>> {
        let mut comps: Vec<TruncatedSeries<C>> =
            (0..n).map(|k| TruncatedSeries::variable(n, d, k)).collect();
        for (m, g, h) in &self.terms {
            comps[*m].add_term(g.clone(), h);
        }
        comps
    }

    /// `ψ⁻¹∘Φ∘ψ`, solving `ψ∘Φ′ = Φ∘ψ` by fixed-point iteration.
    fn conjugate(&self, germ: &Germ<C>) -> Result<Germ<C>> {
        let (n, d) = (germ.n(), germ.degree());
        let psi = self.components(n, d);
        let mut comp = Composer::new(&psi)?;
        let target: Vec<TruncatedSeries<C>> = germ
            .components()
            .iter()
            .map(|f| comp.compose(f))
            .collect::<Result<_>>()?;
        let mut cur = target.clone();
        // Each pass fixes at least one more degree.
        for _ in 0..=d {
            let mut next = target.clone();
            {
                let mut pc = Composer::new(&cur)?;
                for (m, g, h) in &self.terms {
                    let prod = pc.power(g).scale(h);
                    next[*m] = &next[*m] - &prod;
                }
            }
            if next == cur {
                return Germ::from_components_unchecked(cur);
            }
            cur = next;
        }
        Err(Error::Internal("near-identity inversion did not stabilize".into()))
    }

    /// `outer ∘ ψ`.
    fn right_compose(&self, outer: &Germ<C>) -> Result<Germ<C>> {
        let psi = self.components(outer.n(), outer.degree());
        let mut comp = Composer::new(&psi)?;
        let comps = outer
            .components()
            .iter()
            .map(|f| comp.compose(f))
            .collect::<Result<Vec<_>>>()?;
        Germ::from_components_unchecked(comps)
    }
}

struct Normalizer<C: Scalar> {
    germs: Vec<Germ<C>>,
    psi: Germ<C>,
    diag: Vec<Vec<C>>,
    log: Vec<Elimination<C>>,
    pairing: Option<Vec<usize>>,
}

impl<C: Scalar> Normalizer<C> {
    /// The elimination data for `(m, γ)`, or `None` when resonant or absent.
    fn plan(&self, m: usize, gamma: &MultiIndex) -> Result<Option<Elimination<C>>> {
        let Some(istar) = (0..self.diag.len())
            .find(|&i| monomial_value(&self.diag[i], gamma) != self.diag[i][m])
        else {
            return Ok(None);
        };
        let c = self.germs[istar].component(m).coefficient(gamma);
        if c.is_zero() {
            if let Some(i) = (0..self.germs.len())
                .find(|&i| !self.germs[i].component(m).coefficient(gamma).is_zero())
            {
                return Err(Error::Internal(format!(
                    "term survived elimination: germ {}, component {}, monomial {gamma}",
                    i + 1,
                    m + 1
                )));
            }
            return Ok(None);
        }
        let divisor = monomial_value(&self.diag[istar], gamma) - self.diag[istar][m].clone();
        let h = c.div_ref(&divisor);
        Ok(Some(Elimination {
            degree: gamma.degree(),
            component: m + 1,
            exponents: gamma.clone(),
            coefficient: c,
            divisor,
            i_star: istar + 1,
            h,
        }))
    }

    /// Adds the σ-paired term when normalizing ρ-equivariantly.
    fn shift_terms(&self, e: &Elimination<C>) -> Result<Vec<(usize, MultiIndex, C)>> {
        let m = e.component - 1;
        let mut terms = vec![(m, e.exponents.clone(), e.h.clone())];
        if let Some(sigma) = &self.pairing {
            let pm = sigma[m];
            let pg = e.exponents.permute(sigma);
            if (pm, &pg) == (m, &e.exponents) {
                if e.h.conj() != e.h {
                    return Err(Error::RhoViolation {
                        germ: e.i_star,
                        component: e.component,
                        exponents: e.exponents.to_vec(),
                    });
                }
            } else {
                terms.push((pm, pg, e.h.conj()));
            }
        }
        Ok(terms)
    }

    fn apply(&mut self, terms: Vec<(usize, MultiIndex, C)>) -> Result<()> {
        let shift = SparseShift { terms };
        self.germs = self
            .germs
            .iter()
            .map(|g| shift.conjugate(g))
            .collect::<Result<_>>()?;
        self.psi = shift.right_compose(&self.psi)?;
        for (m, g, _) in &shift.terms {
            for (i, germ) in self.germs.iter().enumerate() {
                if !germ.component(*m).coefficient(g).is_zero() {
                    return Err(Error::Internal(format!(
                        "term survived elimination: germ {}, component {}, monomial {g}",
                        i + 1,
                        m + 1
                    )));
                }
            }
        }
        Ok(())
    }

    fn monomials_of_degree(&self, m: usize, ell: u32) -> BTreeSet<MultiIndex> {
        self.germs
            .iter()
            .flat_map(|g| {
                g.component(m)
                    .terms()
                    .filter(|(gamma, _)| gamma.degree() == ell)
                    .map(|(gamma, _)| gamma.clone())
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    fn run(&mut self, n: usize, d: u32, batched: bool) -> Result<()> {
        for ell in 2..=d {
            let mut batch = Vec::new();
            for m in 0..n {
                for gamma in self.monomials_of_degree(m, ell) {
                    let Some(e) = self.plan(m, &gamma)? else { continue };
                    if batched {
                        batch.push((m, gamma, e.h.clone()));
                        self.log.push(e);
                    } else {
                        let terms = self.shift_terms(&e)?;
                        self.log.push(e);
                        self.apply(terms)?;
                    }
                }
            }
            if !batch.is_empty() {
                self.apply(batch)?;
            }
        }
        Ok(())
    }
}

/// Simultaneous normalization of a commuting family with diagonal linear
/// parts. Degrees ascend, then components, then graded-lex monomials; the
/// divisor comes from the smallest germ index for which the monomial is
/// non-resonant.
pub fn poincare_dulac_normalize<C: Scalar>(
    fam: &Family<C>,
    opts: &NormalizeOptions,
) -> Result<NormalizationResult<C>> {
    let diag = require_diagonal(fam)?;
    fam.check_commuting()?;
    let (n, d) = (fam.n(), fam.degree());
    if let Some(sigma) = &opts.rho_pairing {
        check_pairing(sigma, n)?;
        check_rho_equivariant(fam, sigma)?;
    }
    let mut nz = Normalizer {
        germs: fam.germs().to_vec(),
        psi: Germ::identity(n, d),
        diag,
        log: Vec::new(),
        pairing: opts.rho_pairing.clone(),
    };
    nz.run(n, d, opts.batched)?;
    let normalized = Family::new(nz.germs)?;
    if let Some((i, m, g)) = verify_pd_nf(&normalized)? {
        return Err(Error::Internal(format!(
            "normalized germ {i} keeps non-resonant monomial {g} in component {m}"
        )));
    }
    Ok(NormalizationResult {
        normalized,
        psi: nz.psi,
        elimination_log: nz.log,
    })
}

/// First non-resonant nonlinear monomial as 1-based `(germ, component, γ)`.
pub fn verify_pd_nf<C: Scalar>(fam: &Family<C>) -> Result<Option<(usize, usize, MultiIndex)>> {
    let diag = require_diagonal(fam)?;
    for (i, g) in fam.germs().iter().enumerate() {
        for (m, comp) in g.components().iter().enumerate() {
            for (gamma, _) in comp.terms() {
                if gamma.degree() >= 2 && !is_resonant(&diag, m, gamma) {
                    return Ok(Some((i + 1, m + 1, gamma.clone())));
                }
            }
        }
    }
    Ok(None)
}

/// Basis of the polynomial first integrals of degree `1..=D` common to all
/// germs, in reduced echelon form with graded-lex pivots.
pub fn first_integrals<C: Scalar>(fam: &Family<C>) -> Result<Vec<TruncatedSeries<C>>> {
    let (n, d) = (fam.n(), fam.degree());
    let monos = MultiIndex::all_up_to(n, 1, d);
    let index: std::collections::HashMap<&MultiIndex, usize> =
        monos.iter().enumerate().map(|(k, g)| (g, k)).collect();
    let mut rows: Matrix<C> = Vec::new();
    for g in fam.germs() {
        let mut comp = Composer::new(g.components())?;
        // block[row][col] = coefficient of monomial `row` in x^{col}∘Φ − x^{col}.
        let mut block = vec![vec![C::zero(); monos.len()]; monos.len()];
        for (col, gamma) in monos.iter().enumerate() {
            for (h, c) in comp.power(gamma).terms() {
                if let Some(&row) = index.get(h) {
                    block[row][col] += c;
                }
            }
            block[col][col] -= &C::one();
        }
        rows.extend(block.into_iter().filter(|r| r.iter().any(|v| !v.is_zero())));
    }
    let kern = if rows.is_empty() {
        (0..monos.len())
            .map(|k| (0..monos.len()).map(|j| if j == k { C::one() } else { C::zero() }).collect())
            .collect()
    } else {
        linalg::kernel(&rows, monos.len())
    };
    if kern.is_empty() {
        return Ok(Vec::new());
    }
    let (ech, pivots) = linalg::rref(kern);
    Ok(ech
        .into_iter()
        .take(pivots.len())
        .map(|v| {
            let mut f = TruncatedSeries::zero(n, d);
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    f.add_term(monos[k].clone(), c);
                }
            }
            f
        })
        .collect())
}

/// First monomial of `f` whose exponent is not in Ω.
pub fn verify_first_integral_support<C: Scalar>(
    fam: &Family<C>,
    f: &TruncatedSeries<C>,
) -> Result<Option<MultiIndex>> {
    let diag = require_diagonal(fam)?;
    Ok(f
        .terms()
        .find(|(g, _)| !g.is_zero() && diag.iter().any(|mu| !monomial_value(mu, g).is_one()))
        .map(|(g, _)| g.clone()))
}

/// Divisibility of component `m` by `x_m`, for one germ component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisionVerdict {
    pub germ: usize,
    pub component: usize,
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending: Option<MultiIndex>,
}

/// Checks that every monomial of component `m` contains `x_m`.
pub fn division_check<C: Scalar>(fam: &Family<C>) -> Vec<DivisionVerdict> {
    let mut out = Vec::new();
    for (i, g) in fam.germs().iter().enumerate() {
        for (m, comp) in g.components().iter().enumerate() {
            let offending = comp.terms().find(|(gamma, _)| gamma.get(m) == 0).map(|(g, _)| g.clone());
            out.push(DivisionVerdict {
                germ: i + 1,
                component: m + 1,
                passes: offending.is_none(),
                offending,
            });
        }
    }
    out
}

/// `φ_im = Φ_im/(μ_im·x_m) − 1`, determined up to degree `D − 1`.
pub fn divided_parts<C: Scalar>(fam: &Family<C>) -> Result<Vec<Vec<TruncatedSeries<C>>>> {
    let diag = require_diagonal(fam)?;
    let d = fam.degree();
    let keep = d.saturating_sub(1).max(1);
    fam.germs()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.components()
                .iter()
                .enumerate()
                .map(|(m, comp)| {
                    let q = comp.divide_by_variable(m).map_err(|gamma| Error::DivisionFailure {
                        germ: i + 1,
                        component: m + 1,
                        exponents: gamma.to_vec(),
                    })?;
                    let one = TruncatedSeries::one(fam.n(), d);
                    let phi = &q.scale(&diag[i][m].inv()) - &one;
                    phi.truncate(keep)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportViolation {
    pub germ: usize,
    pub component: usize,
    pub exponents: MultiIndex,
}

/// `Π_{γ_k>0}(1+φ_ik)^{γ_k} − Π_{γ_k<0}(1+φ_ik)^{−γ_k}` for one germ and generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductResidual {
    pub germ: usize,
    pub generator: Vec<i64>,
    /// Lowest nonzero term of the residual, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lowest_term: Option<TermEntry>,
}

/// The integrable normal form certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrableNFCertificate<C: Scalar> {
    /// `phi[i][m] = φ_im`, truncated at degree `D − 1`.
    pub phi: Vec<Vec<TruncatedSeries<C>>>,
    pub omega_generators: Vec<Vec<i64>>,
    pub support_violations: Vec<SupportViolation>,
    pub product_residuals: Vec<ProductResidual>,
}

impl<C: Scalar> IntegrableNFCertificate<C> {
    /// All residuals vanish exactly.
    pub fn is_valid(&self) -> bool {
        self.support_violations.is_empty()
            && self.product_residuals.iter().all(|r| r.lowest_term.is_none())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "phi": self.phi.iter().map(|row| row.iter().map(|s| serde_json::to_value(s.to_term_list()).expect("serializable")).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "omega_generators": self.omega_generators,
            "support_violations": serde_json::to_value(&self.support_violations).expect("serializable"),
            "product_residuals": serde_json::to_value(&self.product_residuals).expect("serializable"),
            "valid": self.is_valid(),
        })
    }
}

/// Extracts `φ_im` and checks the support and product conditions.
///
/// The product condition is checked in cleared-denominator form modulo
/// degree `> D − 1`, the precision to which `φ` is known.
pub fn extract_integrable_certificate<C: Scalar>(
    fam: &Family<C>,
    lat: &RelationLattice,
) -> Result<IntegrableNFCertificate<C>> {
    let phi = divided_parts(fam)?;
    let diag = require_diagonal(fam)?;
    let mut support_violations = Vec::new();
    for (i, row) in phi.iter().enumerate() {
        for (m, s) in row.iter().enumerate() {
            for (g, _) in s.terms() {
                if diag.iter().any(|mu| !monomial_value(mu, g).is_one()) {
                    support_violations.push(SupportViolation {
                        germ: i + 1,
                        component: m + 1,
                        exponents: g.clone(),
                    });
                }
            }
        }
    }
    let generators = lat.basis_i64()?;
    let mut product_residuals = Vec::new();
    for (i, row) in phi.iter().enumerate() {
        let n = fam.n();
        let keep = row[0].degree();
        let one = TruncatedSeries::one(n, keep);
        for gamma in &generators {
            let mut lhs = one.clone();
            let mut rhs = one.clone();
            for (k, &e) in gamma.iter().enumerate() {
                let base = &one + &row[k];
                let pw = base.pow(u32::try_from(e.unsigned_abs()).map_err(|_| {
                    Error::Usage("lattice generator entry too large".into())
                })?);
                if e > 0 {
                    lhs = &lhs * &pw;
                } else if e < 0 {
                    rhs = &rhs * &pw;
                }
            }
            let diff = &lhs - &rhs;
            product_residuals.push(ProductResidual {
                germ: i + 1,
                generator: gamma.clone(),
                lowest_term: diff.terms().next().map(|(g, c)| TermEntry {
                    exponents: g.to_vec(),
                    coeff: c.to_string(),
                }),
            });
        }
    }
    Ok(IntegrableNFCertificate {
        phi,
        omega_generators: generators,
        support_violations,
        product_residuals,
    })
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-16..=16);
    let den: i64 = rng.gen_range(1..=16);
    Rational::new(num.into(), den.into())
}

/// Builds a family in integrable normal form:
/// `Φ_im = μ_im·x_m·exp(w_im)` with `w_im` supported on Ω and
/// `Σ_k γ_k·w_ik = 0` for every lattice vector `γ`.
///
/// Coefficients have numerator and denominator at most 16. Seed `0` gives
/// the linear family.
pub fn generate_integrable_nf(
    e: &EigenData,
    lat: &RelationLattice,
    degree: u32,
    seed: u64,
) -> Result<Family<GaussianRational>> {
    if degree < 2 {
        return Err(Error::Usage("degree must be at least 2".into()));
    }
    let (p, n) = (e.p(), e.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis: Matrix<Rational> = lat
        .basis
        .iter()
        .map(|r| r.iter().map(|v| Rational::from_integer(v.clone())).collect())
        .collect();
    let kern = if basis.is_empty() {
        (0..n)
            .map(|k| (0..n).map(|j| Rational::from_integer(i64::from(j == k).into())).collect())
            .collect()
    } else {
        linalg::kernel(&basis, n)
    };
    let omega = enumerate_omega_in(e, lat, degree - 1)?;
    let mut germs = Vec::with_capacity(p);
    for i in 0..p {
        let mut w: Vec<TruncatedSeries<GaussianRational>> =
            (0..n).map(|_| TruncatedSeries::zero(n, degree)).collect();
        if seed != 0 {
            for g in &omega.points {
                if !rng.gen_bool(0.5) {
                    continue;
                }
                let mut v = vec![Rational::zero(); n];
                for kv in &kern {
                    let r = random_rational(&mut rng);
                    for (a, b) in v.iter_mut().zip(kv) {
                        *a += &r * b;
                    }
                }
                for (m, c) in v.into_iter().enumerate() {
                    if !c.is_zero() {
                        w[m].add_term(g.clone(), &GaussianRational::from_rational(c));
                    }
                }
            }
        }
        let comps = w
            .iter()
            .enumerate()
            .map(|(m, wm)| {
                Ok(wm
                    .exp0()?
                    .mul_monomial(&MultiIndex::unit(n, m), e.get(i, m)))
            })
            .collect::<Result<Vec<_>>>()?;
        germs.push(Germ::from_components(comps)?);
    }
    Family::new(germs)
}

/// A random germ `x + (terms of degree 2..=D)` with small rational coefficients.
pub fn random_near_identity<C: Scalar>(n: usize, degree: u32, terms: usize, seed: u64) -> Result<Germ<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monos = MultiIndex::all_up_to(n, 2, degree);
    let mut comps: Vec<TruncatedSeries<C>> =
        (0..n).map(|k| TruncatedSeries::variable(n, degree, k)).collect();
    if !monos.is_empty() {
        for _ in 0..terms {
            let m = rng.gen_range(0..n);
            let g = &monos[rng.gen_range(0..monos.len())];
            comps[m].add_term(g.clone(), &C::from_rational(random_rational(&mut rng)));
        }
    }
    Germ::from_components(comps)
}

/// Leading term of the pushforward of an Ω-monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushforward<C: Scalar> {
    /// `|ℓ| + s`, where `s` is the lowest degree present in the `φ_k`.
    pub degree: u32,
    pub part: TruncatedSeries<C>,
}

/// Degree-`(|ℓ|+s)` part of `x^ℓ∘f` from the closed formula
/// `μ^ℓ·x^ℓ·Σ_k ℓ_k·φ_k^{(s)}` with `φ_k = f_k/(μ_k x_k) − 1` and `s` the
/// lowest degree of any `φ_k`. For linear `f` this is zero at `|ℓ|+1`.
pub fn pushforward_leading<C: Scalar>(ell: &MultiIndex, f: &Germ<C>) -> Result<Pushforward<C>> {
    let (n, d) = (f.n(), f.degree());
    if ell.len() != n {
        return Err(Error::Usage(format!("monomial has {} exponents, expected {n}", ell.len())));
    }
    let fam = Family::new(vec![f.clone()])?;
    let mu = require_diagonal(&fam)?.remove(0);
    let mut phi = Vec::with_capacity(n);
    for (m, comp) in f.components().iter().enumerate() {
        let q = comp.divide_by_variable(m).map_err(|gamma| Error::DivisionFailure {
            germ: 1,
            component: m + 1,
            exponents: gamma.to_vec(),
        })?;
        phi.push(&q.scale(&mu[m].inv()) - &TruncatedSeries::one(n, d));
    }
    let s = phi.iter().filter_map(|p| p.min_degree()).min();
    let Some(s) = s else {
        return Ok(Pushforward {
            degree: ell.degree() + 1,
            part: TruncatedSeries::zero(n, d),
        });
    };
    let degree = ell.degree() + s;
    if degree > d {
        return Err(Error::Usage(format!(
            "leading pushforward has degree {degree} above the truncation degree {d}"
        )));
    }
    let mut sum = TruncatedSeries::zero(n, d);
    for (k, p) in phi.iter().enumerate() {
        if ell.get(k) > 0 {
            sum = &sum + &p.homogeneous_part(s)?.scale(&C::from_i64(i64::from(ell.get(k))));
        }
    }
    Ok(Pushforward {
        degree,
        part: sum.mul_monomial(ell, &monomial_value(&mu, ell)),
    })
}

/// Checks `coeff(F_m, γ) = conj(coeff(F_{σm}, γσ))` for every germ.
pub fn check_rho_equivariant<C: Scalar>(fam: &Family<C>, sigma: &[usize]) -> Result<()> {
    check_pairing(sigma, fam.n())?;
    for (i, g) in fam.germs().iter().enumerate() {
        if let Some((m, gamma)) = rho_offending(g, sigma) {
            return Err(Error::RhoViolation {
                germ: i + 1,
                component: m + 1,
                exponents: gamma.to_vec(),
            });
        }
    }
    Ok(())
}

/// First `(component, γ)` (0-based component) breaking ρ-equivariance.
pub fn rho_offending<C: Scalar>(g: &Germ<C>, sigma: &[usize]) -> Option<(usize, MultiIndex)> {
    for (m, comp) in g.components().iter().enumerate() {
        let partner = g.component(sigma[m]);
        for (gamma, c) in comp.terms() {
            if partner.coefficient(&gamma.permute(sigma)).conj() != *c {
                return Some((m, gamma.clone()));
            }
        }
        for (gamma, _) in partner.terms() {
            if comp.get(&gamma.permute(sigma)).is_none() {
                return Some((m, gamma.permute(sigma)));
            }
        }
    }
    None
}

/// Pairs coordinate `m` with the first later coordinate whose eigenvalues
/// are the conjugates of those of `m` in every germ; real coordinates are
/// fixed.
pub fn pairing_from_eigenvalues(fam: &Family<GaussianRational>) -> Result<Vec<usize>> {
    let diag = require_diagonal(fam)?;
    let n = fam.n();
    let col = |m: usize| diag.iter().map(|row| row[m].clone()).collect::<Vec<_>>();
    let mut sigma: Vec<Option<usize>> = vec![None; n];
    for m in 0..n {
        if sigma[m].is_some() {
            continue;
        }
        let c = col(m);
        if c.iter().all(GaussianRational::is_real) {
            sigma[m] = Some(m);
            continue;
        }
        let conj: Vec<GaussianRational> = c.iter().map(GaussianRational::conj).collect();
        let partner = (m + 1..n).find(|&k| sigma[k].is_none() && col(k) == conj).ok_or_else(|| {
            Error::Precondition(format!("coordinate {} has no conjugate partner", m + 1))
        })?;
        sigma[m] = Some(partner);
        sigma[partner] = Some(m);
    }
    Ok(sigma.into_iter().map(|s| s.expect("assigned")).collect())
}

/// Output of [`complexify_real_family`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complexified {
    pub family: Family<GaussianRational>,
    /// `x = P·z`.
    pub p_matrix: Matrix<GaussianRational>,
    /// `z = P⁻¹·x`.
    pub p_inverse: Matrix<GaussianRational>,
    /// 0-based involution swapping the coordinates of each block.
    pub pairing: Vec<usize>,
}

/// `P` and `P⁻¹` for a pairing: on a block `(k, k+1)`, `z_k = x_k + i·x_{k+1}`
/// and `z_{k+1} = x_k − i·x_{k+1}`.
pub fn pairing_matrices(sigma: &[usize]) -> (Matrix<GaussianRational>, Matrix<GaussianRational>) {
    let n = sigma.len();
    let z = GaussianRational::zero;
    let half = || GaussianRational::from_rational(Rational::new(1.into(), 2.into()));
    let ihalf = || GaussianRational::new(Rational::zero(), Rational::new(1.into(), 2.into()));
    let mut p = vec![vec![z(); n]; n];
    let mut q = vec![vec![z(); n]; n];
    for k in 0..n {
        let s = sigma[k];
        if s == k {
            p[k][k] = GaussianRational::one();
            q[k][k] = GaussianRational::one();
        } else if k < s {
            // z_k = x_k + i x_s, z_s = x_k − i x_s.
            q[k][k] = GaussianRational::one();
            q[k][s] = GaussianRational::i();
            q[s][k] = GaussianRational::one();
            q[s][s] = -GaussianRational::i();
            // x_k = (z_k + z_s)/2, x_s = (z_k − z_s)/(2i).
            p[k][k] = half();
            p[k][s] = half();
            p[s][k] = -ihalf();
            p[s][s] = ihalf();
        }
    }
    (p, q)
}

/// Detects rotation-scaling blocks `((u, −v), (v, u))` on consecutive
/// coordinates and a real diagonal tail.
pub fn detect_pairing(fam: &Family<Rational>) -> Result<Vec<usize>> {
    let n = fam.n();
    let mats: Vec<Matrix<Rational>> = fam.germs().iter().map(Germ::linear_matrix).collect();
    let off = |r: usize, c: usize| mats.iter().any(|a| !a[r][c].is_zero());
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut k = 0;
    while k < n {
        if k + 1 < n && (off(k, k + 1) || off(k + 1, k)) {
            sigma[k] = k + 1;
            sigma[k + 1] = k;
            k += 2;
        } else {
            k += 1;
        }
    }
    for (i, a) in mats.iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let in_block = r == c || sigma[r] == c;
                if !in_block && !a[r][c].is_zero() {
                    return Err(Error::Domain(format!(
                        "germ {}: linear entry ({}, {}) lies outside the block structure",
                        i + 1,
                        r + 1,
                        c + 1
                    )));
                }
            }
            let s = sigma[r];
            if s > r && (a[r][r] != a[s][s] || a[r][s] != -a[s][r].clone()) {
                return Err(Error::Domain(format!(
                    "germ {}: block at ({}, {}) is not of the form ((u, −v), (v, u))",
                    i + 1,
                    r + 1,
                    s + 1
                )));
            }
        }
    }
    Ok(sigma)
}

fn conjugate_linear(
    g: &Germ<GaussianRational>,
    left: &Matrix<GaussianRational>,
    right: &Matrix<GaussianRational>,
) -> Result<Germ<GaussianRational>> {
    let r = Germ::linear(right, g.degree())?;
    Ok(g.compose(&r)?.apply_matrix(left))
}

/// `P⁻¹∘Φ_i∘P` with diagonal linear parts `u ± i·v` on each block.
pub fn complexify_real_family(fam: &Family<Rational>) -> Result<Complexified> {
    let pairing = detect_pairing(fam)?;
    let (p, q) = pairing_matrices(&pairing);
    let germs = fam
        .germs()
        .iter()
        .map(|g| conjugate_linear(&g.map_coefficients(|c| c.to_gaussian()), &q, &p))
        .collect::<Result<Vec<_>>>()?;
    let family = Family::new(germs)?;
    if family.diagonals().is_err() {
        return Err(Error::Internal("complexified linear parts are not diagonal".into()));
    }
    Ok(Complexified {
        family,
        p_matrix: p,
        p_inverse: q,
        pairing,
    })
}

fn to_real(g: &Germ<GaussianRational>, what: &str) -> Result<Germ<Rational>> {
    g.try_map_coefficients(|c| {
        Rational::from_gaussian(c)
            .map_err(|_| Error::Internal(format!("{what} has a coefficient with nonzero imaginary part: {c}")))
    })
}

/// `P∘F_i∘P⁻¹` for a ρ-equivariant complex family; every coefficient is
/// checked to be real.
pub fn realify_normal_form(nf: &Family<GaussianRational>, sigma: &[usize]) -> Result<Family<Rational>> {
    check_rho_equivariant(nf, sigma)?;
    let (p, q) = pairing_matrices(sigma);
    let germs = nf
        .germs()
        .iter()
        .map(|g| to_real(&conjugate_linear(g, &p, &q)?, "realified germ"))
        .collect::<Result<Vec<_>>>()?;
    Family::new(germs)
}

/// `P∘ψ∘P⁻¹`, checked to have real coefficients.
pub fn real_conjugator(psi: &Germ<GaussianRational>, sigma: &[usize]) -> Result<Germ<Rational>> {
    check_pairing(sigma, psi.n())?;
    let (p, q) = pairing_matrices(sigma);
    to_real(&conjugate_linear(psi, &p, &q)?, "real conjugator")
}

/// Real normal form with its real conjugator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealNormalization {
    pub complexified: Complexified,
    pub complex_result: NormalizationResult<GaussianRational>,
    pub real_normal_form: Family<Rational>,
    /// `T = P∘ψ∘P⁻¹` with `T⁻¹∘Φ_i∘T = real_normal_form_i`.
    pub real_conjugator: Germ<Rational>,
}

impl RealNormalization {
    pub fn to_json(&self) -> Value {
        json!({
            "pairing": self.complexified.pairing.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "complexified": serde_json::to_value(FamilyFile::from_family(&self.complexified.family)).expect("serializable"),
            "complex_normalization": self.complex_result.to_json(),
            "real_normal_form": serde_json::to_value(FamilyFile::from_family(&self.real_normal_form)).expect("serializable"),
            "real_conjugator": serde_json::to_value(germ_to_map_spec(&self.real_conjugator)).expect("serializable"),
        })
    }
}

/// Complexify, normalize ρ-equivariantly and return to real coordinates.
pub fn normalize_real_family(fam: &Family<Rational>, batched: bool) -> Result<RealNormalization> {
    let complexified = complexify_real_family(fam)?;
    let opts = NormalizeOptions {
        rho_pairing: Some(complexified.pairing.clone()),
        batched,
    };
    let complex_result = poincare_dulac_normalize(&complexified.family, &opts)?;
    let real_normal_form = realify_normal_form(&complex_result.normalized, &complexified.pairing)?;
    let real_conjugator = real_conjugator(&complex_result.psi, &complexified.pairing)?;
    Ok(RealNormalization {
        complexified,
        complex_result,
        real_normal_form,
        real_conjugator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{enumerate_omega, relation_lattice};
    use crate::scalar::rat;
    use proptest::prelude::*;

    type G = GaussianRational;

    fn gz(s: &str) -> G {
        s.parse().unwrap()
    }

    fn series(n: usize, d: u32, terms: &[(&[u32], &str)]) -> TruncatedSeries<G> {
        let mut f = TruncatedSeries::zero(n, d);
        for (e, c) in terms {
            f.add_term(MultiIndex::new(e), &gz(c));
        }
        f
    }

    fn germ(n: usize, d: u32, comps: &[&[(&[u32], &str)]]) -> Germ<G> {
        Germ::from_components(comps.iter().map(|c| series(n, d, c)).collect()).unwrap()
    }

    fn fam(germs: Vec<Germ<G>>) -> Family<G> {
        Family::new(germs).unwrap()
    }

    fn saddle_pair(d: u32) -> Family<G> {
        fam(vec![germ(
            2,
            d,
            &[&[(&[1, 0], "-2"), (&[3, 2], "-2/3")], &[(&[0, 1], "1/2")]],
        )])
    }

    fn degenerate_pair(d: u32) -> Family<G> {
        fam(vec![
            germ(2, d, &[&[(&[1, 0], "2")], &[(&[0, 1], "4"), (&[2, 0], "1")]]),
            germ(2, d, &[&[(&[1, 0], "-3")], &[(&[0, 1], "9")]]),
        ])
    }

    #[test]
    fn normalizes_single_term() {
        let f = fam(vec![germ(2, 3, &[&[(&[1, 0], "2"), (&[0, 2], "1")], &[(&[0, 1], "3")]])]);
        for batched in [false, true] {
            let r = poincare_dulac_normalize(&f, &NormalizeOptions { batched, ..Default::default() }).unwrap();
            assert_eq!(r.normalized, fam(vec![germ(2, 3, &[&[(&[1, 0], "2")], &[(&[0, 1], "3")]])]));
            assert_eq!(r.psi, germ(2, 3, &[&[(&[1, 0], "1"), (&[0, 2], "1/7")], &[(&[0, 1], "1")]]));
            assert_eq!(r.elimination_log.len(), 1);
            let e = &r.elimination_log[0];
            assert_eq!(e.h.mul_ref(&e.divisor), e.coefficient);
            assert_eq!(f.conjugate(&r.psi).unwrap(), r.normalized);
        }
    }

    #[test]
    fn normal_forms_are_fixed_points() {
        let f = degenerate_pair(4);
        let r = poincare_dulac_normalize(&f, &NormalizeOptions::default()).unwrap();
        assert_eq!(r.normalized, f);
        assert_eq!(r.psi, Germ::identity(2, 4));
        let id = fam(vec![Germ::identity(2, 4)]);
        let r = poincare_dulac_normalize(&id, &NormalizeOptions::default()).unwrap();
        assert_eq!(r.normalized, id);
        assert!(r.elimination_log.is_empty());
    }

    #[test]
    fn rejects_non_commuting_and_non_diagonal() {
        let f = fam(vec![
            germ(2, 3, &[&[(&[1, 0], "2"), (&[0, 2], "1")], &[(&[0, 1], "3")]]),
            germ(2, 3, &[&[(&[1, 0], "2")], &[(&[0, 1], "3")]]),
        ]);
        assert!(matches!(
            poincare_dulac_normalize(&f, &NormalizeOptions::default()),
            Err(Error::NotCommuting { .. })
        ));
        let f = fam(vec![germ(2, 3, &[&[(&[1, 0], "2"), (&[0, 1], "1")], &[(&[0, 1], "2")]])]);
        assert!(matches!(
            poincare_dulac_normalize(&f, &NormalizeOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pd_nf_verification() {
        assert_eq!(verify_pd_nf(&degenerate_pair(3)).unwrap(), None);
        let f = fam(vec![germ(2, 3, &[&[(&[1, 0], "2"), (&[0, 2], "1")], &[(&[0, 1], "3")]])]);
        assert_eq!(verify_pd_nf(&f).unwrap(), Some((1, 1, MultiIndex::new(&[0, 2]))));
    }

    #[test]
    fn first_integral_examples() {
        let basis = first_integrals(&saddle_pair(4)).unwrap();
        assert_eq!(basis, vec![series(2, 4, &[(&[2, 2], "1")])]);
        assert_eq!(verify_first_integral_support(&saddle_pair(4), &basis[0]).unwrap(), None);
        let rot = fam(vec![germ(2, 2, &[&[(&[1, 0], "i")], &[(&[0, 1], "-i")]])]);
        assert_eq!(first_integrals(&rot).unwrap(), vec![series(2, 2, &[(&[1, 1], "1")])]);
        let lin = fam(vec![germ(2, 5, &[&[(&[1, 0], "2")], &[(&[0, 1], "3")]])]);
        assert!(first_integrals(&lin).unwrap().is_empty());
        let bad = series(2, 4, &[(&[1, 0], "1"), (&[2, 2], "1")]);
        assert_eq!(
            verify_first_integral_support(&saddle_pair(4), &bad).unwrap(),
            Some(MultiIndex::new(&[1, 0]))
        );
    }

    #[test]
    fn division_examples() {
        let v = division_check(&degenerate_pair(3));
        let fail: Vec<_> = v.iter().filter(|d| !d.passes).collect();
        assert_eq!(fail.len(), 1);
        assert_eq!((fail[0].germ, fail[0].component), (1, 2));
        assert_eq!(fail[0].offending, Some(MultiIndex::new(&[2, 0])));
        let e = EigenData::parse(&[&["2", "4"], &["-3", "9"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        assert!(matches!(
            extract_integrable_certificate(&degenerate_pair(3), &lat),
            Err(Error::DivisionFailure { germ: 1, component: 2, .. })
        ));
        let lin = fam(vec![germ(2, 4, &[&[(&[1, 0], "2")], &[(&[0, 1], "3")]])]);
        let lat = relation_lattice(&EigenData::from_family(&lin).unwrap()).unwrap();
        let c = extract_integrable_certificate(&lin, &lat).unwrap();
        assert!(c.is_valid());
        assert!(c.phi.iter().flatten().all(TruncatedSeries::is_zero));
    }

    #[test]
    fn generated_families_are_certified() {
        let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        assert!(generate_integrable_nf(&e, &lat, 6, 0).unwrap().germs()[0].is_linear());
        for seed in 1..6 {
            let f = generate_integrable_nf(&e, &lat, 6, seed).unwrap();
            let c = extract_integrable_certificate(&f, &lat).unwrap();
            assert!(c.is_valid());
            let g = series(2, 6, &[(&[2, 2], "1")]);
            let mut comp = Composer::new(f.germs()[0].components()).unwrap();
            assert_eq!(comp.compose(&g).unwrap(), g);
            // φ_1 + φ_2 = 0 at first order since w lies in the kernel of (2, 2).
            let w1 = c.phi[0][0].homogeneous_part(4).unwrap();
            let w2 = c.phi[0][1].homogeneous_part(4).unwrap();
            assert!((&w1 + &w2).is_zero());
        }
        let e = EigenData::parse(&[&["2", "1/2"], &["3", "1/3"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        for seed in 1..4 {
            let f = generate_integrable_nf(&e, &lat, 5, seed).unwrap();
            assert_eq!(f.first_commutativity_defect().unwrap(), None);
            assert!(extract_integrable_certificate(&f, &lat).unwrap().is_valid());
        }
    }

    #[test]
    fn round_trip_after_conjugation() {
        let e = EigenData::parse(&[&["2", "1/2"], &["3", "1/3"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        let f = generate_integrable_nf(&e, &lat, 5, 7).unwrap();
        let psi0: Germ<G> = random_near_identity(2, 5, 4, 11).unwrap();
        let g = f.conjugate(&psi0).unwrap();
        for batched in [false, true] {
            let r = poincare_dulac_normalize(&g, &NormalizeOptions { batched, ..Default::default() }).unwrap();
            assert_eq!(g.conjugate(&r.psi).unwrap(), r.normalized);
            assert!(extract_integrable_certificate(&r.normalized, &lat).unwrap().is_valid());
        }
    }

    #[test]
    fn pushforward_examples() {
        let f = germ(2, 5, &[&[(&[1, 0], "2"), (&[2, 1], "2")], &[(&[0, 1], "1/2")]]);
        let p = pushforward_leading(&MultiIndex::new(&[1, 1]), &f).unwrap();
        assert_eq!(p.degree, 4);
        assert_eq!(p.part, series(2, 5, &[(&[2, 2], "1")]));
        let mut comp = Composer::new(f.components()).unwrap();
        let direct = comp.compose(&series(2, 5, &[(&[1, 1], "1")])).unwrap();
        assert_eq!(direct.homogeneous_part(4).unwrap(), p.part);
        let lin = germ(2, 4, &[&[(&[1, 0], "2")], &[(&[0, 1], "1/2")]]);
        let p = pushforward_leading(&MultiIndex::new(&[1, 1]), &lin).unwrap();
        assert!(p.part.is_zero());
    }

    #[test]
    fn complexify_examples() {
        let rot = Family::new(vec![Germ::linear(&vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(1, 1), rat(0, 1)]], 3).unwrap()]).unwrap();
        let c = complexify_real_family(&rot).unwrap();
        assert_eq!(c.family.diagonals().unwrap(), vec![vec![G::i(), -G::i()]]);
        assert_eq!(c.pairing, vec![1, 0]);
        let back = realify_normal_form(&c.family, &c.pairing).unwrap();
        assert_eq!(back, rot);
        let m = vec![
            vec![rat(1, 1), rat(-1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(2, 1)],
        ];
        let c = complexify_real_family(&Family::new(vec![Germ::linear(&m, 3).unwrap()]).unwrap()).unwrap();
        assert_eq!(c.family.diagonals().unwrap(), vec![vec![gz("1+i"), gz("1-i"), gz("2")]]);
        let bad = vec![vec![rat(1, 1), rat(-1, 1)], vec![rat(2, 1), rat(1, 1)]];
        assert!(complexify_real_family(&Family::new(vec![Germ::linear(&bad, 2).unwrap()]).unwrap()).is_err());
    }

    #[test]
    fn rho_violation_is_reported() {
        let f = fam(vec![germ(2, 3, &[&[(&[1, 0], "i"), (&[2, 0], "1")], &[(&[0, 1], "-i"), (&[0, 2], "2")]])]);
        assert!(matches!(
            realify_normal_form(&f, &[1, 0]),
            Err(Error::RhoViolation { germ: 1, component: 1, .. })
        ));
    }

    #[test]
    fn real_round_trip() {
        // Rotation-scaling by 1 + 2i with quadratic terms and a real tail.
        let mut comps: Vec<TruncatedSeries<Rational>> = (0..3).map(|_| TruncatedSeries::zero(3, 4)).collect();
        let add = |c: &mut TruncatedSeries<Rational>, e: &[u32], v: Rational| c.add_term(MultiIndex::new(e), &v);
        add(&mut comps[0], &[1, 0, 0], rat(1, 1));
        add(&mut comps[0], &[0, 1, 0], rat(-2, 1));
        add(&mut comps[1], &[1, 0, 0], rat(2, 1));
        add(&mut comps[1], &[0, 1, 0], rat(1, 1));
        add(&mut comps[2], &[0, 0, 1], rat(3, 1));
        add(&mut comps[0], &[2, 0, 0], rat(1, 3));
        add(&mut comps[1], &[1, 0, 1], rat(-1, 2));
        add(&mut comps[2], &[0, 2, 0], rat(5, 1));
        let g = Germ::from_components(comps).unwrap();
        let f = Family::new(vec![g.clone(), g.compose(&g).unwrap()]).unwrap();
        let r = normalize_real_family(&f, false).unwrap();
        assert_eq!(f.conjugate(&r.real_conjugator).unwrap(), r.real_normal_form);
        assert!(rho_offending(&r.complex_result.psi, &r.complexified.pairing).is_none());
    }

    #[test]
    fn omega_monomials_are_invariant() {
        let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        let f = generate_integrable_nf(&e, &lat, 6, 3).unwrap();
        let om = enumerate_omega(&e, 3).unwrap();
        let mut comp = Composer::new(f.germs()[0].components()).unwrap();
        for g in om.points {
            let m = TruncatedSeries::monomial(2, 6, g, G::one());
            assert_eq!(comp.compose(&m).unwrap(), m);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn pushforward_matches_composition(seed in 1u64..10_000, a in 0u32..3, b in 0u32..3) {
            prop_assume!(a + b >= 1);
            let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
            let lat = relation_lattice(&e).unwrap();
            let f = generate_integrable_nf(&e, &lat, 6, seed).unwrap();
            let ell = MultiIndex::new(&[a, b]);
            if let Ok(p) = pushforward_leading(&ell, &f.germs()[0]) {
                let mut comp = Composer::new(f.germs()[0].components()).unwrap();
                let direct = comp.compose(&TruncatedSeries::monomial(2, 6, ell.clone(), G::one())).unwrap();
                // Everything strictly between |ℓ| and the leading degree vanishes beyond μ^ℓ x^ℓ.
                prop_assert_eq!(direct.homogeneous_part(p.degree).unwrap(), p.part);
            }
        }

        #[test]
        fn normalization_is_sound(seed in 0u64..1000) {
            let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
            let lat = relation_lattice(&e).unwrap();
            let f = generate_integrable_nf(&e, &lat, 5, seed).unwrap();
            let g = f.conjugate(&random_near_identity(2, 5, 3, seed).unwrap()).unwrap();
            let r = poincare_dulac_normalize(&g, &NormalizeOptions::default()).unwrap();
            prop_assert_eq!(g.conjugate(&r.psi).unwrap(), r.normalized.clone());
            for entry in &r.elimination_log {
                prop_assert_eq!(entry.h.mul_ref(&entry.divisor), entry.coefficient.clone());
            }
        }
    }
}
