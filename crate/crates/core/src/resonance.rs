//! Multiplicative relation lattices, Ω and resonant sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::factor::{factor_gaussian, GaussianPrime};
use crate::exactnum::gaussian::GaussianRational;
use crate::germ::Family;
use crate::lattice::{hnf_last_pivot, integer_kernel, IntMatrix};
use crate::linalg;
use crate::scalar::{Rational, Scalar};
use crate::series::MultiIndex;

/// Eigenvalues `μ_im` of `p` diagonal linear parts in dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenData {
    mu: Vec<Vec<GaussianRational>>,
    n: usize,
}

impl EigenData {
    pub fn new(mu: Vec<Vec<GaussianRational>>) -> Result<Self> {
        let n = mu.first().map_or(0, Vec::len);
        if mu.is_empty() || n == 0 {
            return Err(Error::Usage("eigendata needs p ≥ 1 rows and n ≥ 1 columns".into()));
        }
        for (i, row) in mu.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Usage(format!(
                    "eigenvalue row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(m) = row.iter().position(|z| z.is_zero()) {
                return Err(Error::Domain(format!("eigenvalue μ[{}][{}] is zero", i + 1, m + 1)));
            }
        }
        Ok(EigenData { mu, n })
    }

    /// Parses rows of strings such as `[["-2", "1/2"]]`.
    pub fn parse(rows: &[&[&str]]) -> Result<Self> {
        let mu = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.parse::<GaussianRational>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mu)
    }

    /// Eigendata of a family with diagonal linear parts.
    pub fn from_family<C: Scalar>(fam: &Family<C>) -> Result<Self> {
        let diags = fam.diagonals()?;
        Self::new(
            diags
                .iter()
                .map(|d| d.iter().map(Scalar::to_gaussian).collect())
                .collect(),
        )
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &[Vec<GaussianRational>] {
        &self.mu
    }

    pub fn get(&self, i: usize, m: usize) -> &GaussianRational {
        &self.mu[i][m]
    }

    /// `Π_m μ_im^{k_m}` for an integer exponent vector.
    pub fn monomial_value(&self, i: usize, k: &[i64]) -> GaussianRational {
        let mut acc = GaussianRational::one();
        for (m, &e) in k.iter().enumerate() {
            if e != 0 {
                acc = acc.mul_ref(&self.mu[i][m].pow(e).expect("nonzero eigenvalue"));
            }
        }
        acc
    }

    /// Whether `Π μ_im^{k_m} = 1` for every `i`.
    pub fn is_relation(&self, k: &[i64]) -> bool {
        (0..self.p()).all(|i| self.monomial_value(i, k).is_one())
    }

    /// Whether `μ_i^γ = μ_im` for every `i` (resonance in component `m`).
    pub fn is_resonant(&self, m: usize, gamma: &MultiIndex) -> bool {
        let g = gamma.to_i64();
        (0..self.p()).all(|i| self.monomial_value(i, &g) == self.mu[i][m])
    }

    /// Transposed rows: the `p`-vector of eigenvalues of coordinate `m`.
    pub fn column(&self, m: usize) -> Vec<GaussianRational> {
        self.mu.iter().map(|r| r[m].clone()).collect()
    }

    /// Eigendata with the coordinates permuted by `sigma` (new `m` is old `sigma[m]`).
    pub fn permute(&self, sigma: &[usize]) -> Self {
        EigenData {
            mu: self
                .mu
                .iter()
                .map(|r| sigma.iter().map(|&s| r[s].clone()).collect())
                .collect(),
            n: self.n,
        }
    }

    /// Restricts to a single row.
    pub fn row(&self, i: usize) -> Self {
        EigenData {
            mu: vec![self.mu[i].clone()],
            n: self.n,
        }
    }
}

/// `{k ∈ Zⁿ : Π_m μ_im^{k_m} = 1 for all i}` in last-pivot Hermite form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationLattice {
    pub n: usize,
    #[serde(serialize_with = "ser_int_rows")]
    pub basis: Vec<Vec<BigInt>>,
}

pub(crate) fn ser_int_rows<S: serde::Serializer>(
    rows: &[Vec<BigInt>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in rows {
        let v: Vec<serde_json::Value> = r.iter().map(bigint_json).collect();
        seq.serialize_element(&v)?;
    }
    seq.end()
}

/// Small integers as JSON numbers, large ones as strings.
pub(crate) fn bigint_json(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    }
}

impl RelationLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Basis vectors as machine integers (lattices here have small entries).
    pub fn basis_i64(&self) -> Result<Vec<Vec<i64>>> {
        self.basis
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        v.to_i64()
                            .ok_or_else(|| Error::Internal("lattice entry overflows i64".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// Re-verifies every basis vector by exact exponentiation.
    pub fn verify(&self, e: &EigenData) -> bool {
        match self.basis_i64() {
            Ok(b) => b.iter().all(|k| e.is_relation(k)),
            Err(_) => false,
        }
    }

    /// Whether an integer vector lies in the lattice (rational solve plus
    /// integrality of the coordinates).
    pub fn contains(&self, k: &[i64]) -> bool {
        if k.iter().all(|&v| v == 0) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let a: linalg::Matrix<Rational> = (0..self.n)
            .map(|c| {
                self.basis
                    .iter()
                    .map(|r| Rational::from_integer(r[c].clone()))
                    .collect()
            })
            .collect();
        let b: Vec<Rational> = k.iter().map(|&v| Rational::from_integer(v.into())).collect();
        match linalg::solve(&a, &b) {
            None => false,
            Some(c) => {
                c.iter().all(|v| v.is_integer()) && {
                    let back: Vec<Rational> = (0..self.n)
                        .map(|col| a[col].iter().zip(&c).map(|(x, y)| x * y).sum())
                        .collect();
                    back == b
                }
            }
        }
    }

    /// Lattice points `x` with `x ≥ lower` componentwise and `Σx ≤ sum_bound`.
    ///
    /// Walks the Hermite basis pivot by pivot, so only lattice points are
    /// visited. Output is sorted in graded order.
    pub fn points_in_simplex(&self, lower: &[i64], sum_bound: i64) -> Vec<Vec<i64>> {
        let n = self.n;
        let Ok(basis) = self.basis_i64() else {
            return Vec::new();
        };
        let pivots: Vec<usize> = basis
            .iter()
            .map(|r| r.iter().rposition(|&v| v != 0).expect("nonzero basis row"))
            .collect();
        let lower_total: i64 = lower.iter().sum();
        let mut out = Vec::new();
        let mut x = vec![0i64; n];
        #[allow(clippy::too_many_arguments)]
        fn walk(
            j: usize,
            basis: &[Vec<i64>],
            pivots: &[usize],
            lower: &[i64],
            lower_total: i64,
            sum_bound: i64,
            x: &mut Vec<i64>,
            out: &mut Vec<Vec<i64>>,
        ) {
            let n = x.len();
            // Columns at or above this threshold are already determined.
            let fixed_from = if j == 0 { n } else { pivots[j - 1] };
            let fixed_sum: i64 = x[fixed_from..].iter().sum();
            let free_lower: i64 = lower_total - lower[fixed_from..].iter().sum::<i64>();
            if x[fixed_from..]
                .iter()
                .zip(&lower[fixed_from..])
                .any(|(v, l)| v < l)
                || fixed_sum + free_lower > sum_bound
            {
                return;
            }
            if j == basis.len() {
                if x.iter().zip(lower).all(|(v, l)| v >= l) && x.iter().sum::<i64>() <= sum_bound {
                    out.push(x.clone());
                }
                return;
            }
            let pc = pivots[j];
            let p = basis[j][pc];
            let base = x[pc];
            let hi = sum_bound - (lower_total - lower[pc]);
            let lo = lower[pc];
            // c·p + base ∈ [lo, hi].
            let cmin = (lo - base).div_euclid(p) + i64::from((lo - base).rem_euclid(p) != 0);
            let cmax = (hi - base).div_euclid(p);
            for c in cmin..=cmax {
                for (xv, bv) in x.iter_mut().zip(&basis[j]) {
                    *xv += c * bv;
                }
                walk(j + 1, basis, pivots, lower, lower_total, sum_bound, x, out);
                for (xv, bv) in x.iter_mut().zip(&basis[j]) {
                    *xv -= c * bv;
                }
            }
        }
        walk(0, &basis, &pivots, lower, lower_total, sum_bound, &mut x, &mut out);
        out.sort_by(|a, b| {
            let (sa, sb): (i64, i64) = (a.iter().sum(), b.iter().sum());
            sa.cmp(&sb).then_with(|| b.cmp(a))
        });
        out
    }
}

/// Computes the relation lattice from Gaussian factorizations.
///
/// `k` is a relation iff, for each `i`, the exponent of every Gaussian prime
/// in `Π μ_im^{k_m}` vanishes and the unit exponent is `0 mod 4`. The mod-4
/// condition is encoded with one auxiliary column `−4` per row.
pub fn relation_lattice(e: &EigenData) -> Result<RelationLattice> {
    let (p, n) = (e.p(), e.n());
    let facts = e
        .mu
        .iter()
        .map(|r| r.iter().map(factor_gaussian).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let primes: BTreeSet<GaussianPrime> = facts
        .iter()
        .flatten()
        .flat_map(|f| f.factors.iter().map(|(q, _)| q.clone()))
        .collect();
    let width = n + p;
    let mut a: IntMatrix = Vec::new();
    for i in 0..p {
        for q in &primes {
            let mut row = vec![BigInt::zero(); width];
            for m in 0..n {
                row[m] = BigInt::from(facts[i][m].exponent_of(q));
            }
            if row.iter().any(|v| !v.is_zero()) {
                a.push(row);
            }
        }
        let mut row = vec![BigInt::zero(); width];
        for m in 0..n {
            row[m] = BigInt::from(facts[i][m].unit_exp);
        }
        row[n + i] = BigInt::from(-4);
        a.push(row);
    }
    let kernel = integer_kernel(&a, width);
    let projected: Vec<Vec<BigInt>> = kernel.iter().map(|v| v[..n].to_vec()).collect();
    let basis = hnf_last_pivot(&projected, n);
    let lat = RelationLattice { n, basis };
    if !lat.verify(e) {
        return Err(Error::Internal("relation lattice failed exact re-verification".into()));
    }
    Ok(lat)
}

/// Nonzero points of Ω up to a degree bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaEnumeration {
    pub degree_bound: u32,
    pub points: Vec<MultiIndex>,
}

/// Enumerates Ω through the lattice; every point is re-verified exactly.
pub fn enumerate_omega(e: &EigenData, bound: u32) -> Result<OmegaEnumeration> {
    let lat = relation_lattice(e)?;
    enumerate_omega_in(e, &lat, bound)
}

pub fn enumerate_omega_in(
    e: &EigenData,
    lat: &RelationLattice,
    bound: u32,
) -> Result<OmegaEnumeration> {
    if bound == 0 {
        return Err(Error::Usage("Ω enumeration bound must be at least 1".into()));
    }
    let lower = vec![0i64; e.n()];
    let mut points = Vec::new();
    for x in lat.points_in_simplex(&lower, i64::from(bound)) {
        if x.iter().all(|&v| v == 0) {
            continue;
        }
        if !e.is_relation(&x) {
            return Err(Error::Internal(format!("Ω point {x:?} failed re-verification")));
        }
        points.push(MultiIndex::from_i64(&x).expect("nonnegative"));
    }
    Ok(OmegaEnumeration {
        degree_bound: bound,
        points,
    })
}

/// Resonant monomials of component `m` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResonantSet {
    pub component: usize,
    pub degree_bound: u32,
    pub points: Vec<MultiIndex>,
}

/// All `γ` with `2 ≤ |γ| ≤ bound` and `μ_i^γ = μ_im` for every `i`, found as
/// `e_m + ℓ` for lattice points `ℓ`.
pub fn resonant_set(e: &EigenData, m: usize, bound: u32) -> Result<ResonantSet> {
    let lat = relation_lattice(e)?;
    resonant_set_in(e, &lat, m, bound)
}

pub fn resonant_set_in(
    e: &EigenData,
    lat: &RelationLattice,
    m: usize,
    bound: u32,
) -> Result<ResonantSet> {
    if m >= e.n() {
        return Err(Error::Usage(format!(
            "component {} is outside 1..={}",
            m + 1,
            e.n()
        )));
    }
    let mut lower = vec![0i64; e.n()];
    lower[m] = -1;
    let mut points = Vec::new();
    if bound >= 2 {
        for mut x in lat.points_in_simplex(&lower, i64::from(bound) - 1) {
            x[m] += 1;
            if x.iter().sum::<i64>() < 2 {
                continue;
            }
            let gamma = MultiIndex::from_i64(&x).expect("nonnegative");
            if !e.is_resonant(m, &gamma) {
                return Err(Error::Internal(format!(
                    "resonant monomial {gamma} failed re-verification"
                )));
            }
            points.push(gamma);
        }
    }
    points.sort();
    Ok(ResonantSet {
        component: m,
        degree_bound: bound,
        points,
    })
}

/// `(rank over Q of the enumerated Ω points, rank of the full lattice)`.
pub fn vect_omega_rank(omega: &OmegaEnumeration, lat: &RelationLattice) -> (usize, usize) {
    let rows: linalg::Matrix<Rational> = omega
        .points
        .iter()
        .map(|g| {
            g.as_slice()
                .iter()
                .map(|&v| Rational::from_integer(v.into()))
                .collect()
        })
        .collect();
    (linalg::rank(&rows), lat.rank())
}

/// Picks `count` linearly independent points greedily in enumeration order.
pub fn independent_points(points: &[MultiIndex], count: usize) -> Vec<MultiIndex> {
    let mut chosen: Vec<MultiIndex> = Vec::new();
    let mut rows: linalg::Matrix<Rational> = Vec::new();
    for g in points {
        if chosen.len() == count {
            break;
        }
        let row: Vec<Rational> = g
            .as_slice()
            .iter()
            .map(|&v| Rational::from_integer(v.into()))
            .collect();
        rows.push(row);
        if linalg::rank(&rows) == rows.len() {
            chosen.push(g.clone());
        } else {
            rows.pop();
        }
    }
    chosen
}

/// Lattice report for the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeReport {
    #[serde(serialize_with = "ser_int_rows")]
    pub basis: Vec<Vec<BigInt>>,
    pub omega_points: Vec<MultiIndex>,
    pub bound: u32,
    pub rank_enumerated: usize,
    pub rank_lattice: usize,
    pub resonant_sets: Vec<ResonantSet>,
}

pub fn lattice_report(e: &EigenData, bound: u32) -> Result<LatticeReport> {
    let lat = relation_lattice(e)?;
    let omega = enumerate_omega_in(e, &lat, bound)?;
    let (re, rl) = vect_omega_rank(&omega, &lat);
    let resonant_sets = (0..e.n())
        .map(|m| resonant_set_in(e, &lat, m, bound))
        .collect::<Result<_>>()?;
    Ok(LatticeReport {
        basis: lat.basis,
        omega_points: omega.points,
        bound,
        rank_enumerated: re,
        rank_lattice: rl,
        resonant_sets,
    })
}

/// Whether any entry has modulus different from 1.
pub fn has_non_unit_modulus(e: &EigenData) -> bool {
    e.mu.iter().flatten().any(|z| !z.norm().is_one())
}

/// Brute-force Ω membership test used by oracles: all `ℓ ∈ Nⁿ` up to `bound`.
pub fn brute_force_omega(e: &EigenData, bound: u32) -> Vec<MultiIndex> {
    MultiIndex::all_up_to(e.n(), 1, bound)
        .into_iter()
        .filter(|g| e.is_relation(&g.to_i64()))
        .collect()
}

/// Sign of each coordinate's modulus relative to 1, for the single-map case.
pub fn modulus_signs(row: &[GaussianRational]) -> Vec<std::cmp::Ordering> {
    row.iter().map(|z| z.norm().cmp(&Rational::one())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::int_rows;
    use proptest::prelude::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v)
    }

    #[test]
    fn lattice_examples() {
        let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
        assert_eq!(relation_lattice(&e).unwrap().basis, int_rows(&[&[2, 2]]));
        let e = EigenData::parse(&[&["2", "3"]]).unwrap();
        assert!(relation_lattice(&e).unwrap().is_trivial());
        let e = EigenData::parse(&[&["i", "-i"]]).unwrap();
        assert_eq!(relation_lattice(&e).unwrap().basis, int_rows(&[&[1, 1], &[4, 0]]));
        let e = EigenData::parse(&[&["2", "4"], &["-3", "9"]]).unwrap();
        let lat = relation_lattice(&e).unwrap();
        assert_eq!(lat.rank(), 1);
        assert!(lat.contains(&[-2, 1]));
    }

    #[test]
    fn omega_examples() {
        let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
        assert_eq!(enumerate_omega(&e, 4).unwrap().points, vec![mi(&[2, 2])]);
        let e = EigenData::parse(&[&["i", "-i"]]).unwrap();
        let pts = enumerate_omega(&e, 4).unwrap().points;
        let want: BTreeSet<_> = [mi(&[1, 1]), mi(&[2, 2]), mi(&[4, 0]), mi(&[0, 4])].into();
        assert_eq!(pts.iter().cloned().collect::<BTreeSet<_>>(), want);
        assert_eq!(pts.len(), 4);
        let e = EigenData::parse(&[&["2", "3"]]).unwrap();
        assert!(enumerate_omega(&e, 9).unwrap().points.is_empty());
    }

    #[test]
    fn resonant_examples() {
        let e = EigenData::parse(&[&["2", "4"], &["-3", "9"]]).unwrap();
        assert_eq!(resonant_set(&e, 1, 3).unwrap().points, vec![mi(&[2, 0])]);
        let e = EigenData::parse(&[&["2", "3"]]).unwrap();
        assert!(resonant_set(&e, 0, 6).unwrap().points.is_empty());
        let e = EigenData::parse(&[&["-2", "1/2"]]).unwrap();
        assert_eq!(resonant_set(&e, 0, 5).unwrap().points, vec![mi(&[3, 2])]);
        assert!(resonant_set(&e, 2, 5).is_err());
    }

    #[test]
    fn rank_examples() {
        for (rows, want) in [
            (vec![vec!["-2", "1/2"]], (1, 1)),
            (vec![vec!["i", "-i"]], (2, 2)),
            (vec![vec!["2", "3"]], (0, 0)),
        ] {
            let r: Vec<&[&str]> = rows.iter().map(|v| v.as_slice()).collect();
            let e = EigenData::parse(&r).unwrap();
            let lat = relation_lattice(&e).unwrap();
            let om = enumerate_omega_in(&e, &lat, 8).unwrap();
            assert_eq!(vect_omega_rank(&om, &lat), want);
        }
    }

    fn small_gaussian() -> impl Strategy<Value = GaussianRational> {
        let units = prop_oneof![Just("1"), Just("-1"), Just("i"), Just("-i")];
        let mags = prop_oneof![
            Just("1"), Just("2"), Just("1/2"), Just("3"), Just("1/3"), Just("4"),
            Just("1+i"), Just("2+i"), Just("1-2*i"), Just("1/4"), Just("9"), Just("3/2")
        ];
        (units, mags).prop_map(|(u, m)| {
            u.parse::<GaussianRational>().unwrap() * m.parse::<GaussianRational>().unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn omega_and_resonances_match_brute_force(
            p in 1usize..3,
            n in 1usize..4,
            entries in proptest::collection::vec(small_gaussian(), 6),
        ) {
            let mu: Vec<Vec<GaussianRational>> =
                (0..p).map(|i| entries[i * 3..i * 3 + n].to_vec()).collect();
            let e = EigenData::new(mu).unwrap();
            let lat = relation_lattice(&e).unwrap();
            prop_assert!(lat.verify(&e));
            let bound = 5;
            let om = enumerate_omega_in(&e, &lat, bound).unwrap();
            let mut brute = brute_force_omega(&e, bound);
            let mut got = om.points.clone();
            brute.sort();
            got.sort();
            prop_assert_eq!(got, brute);
            for m in 0..n {
                let rs = resonant_set_in(&e, &lat, m, bound).unwrap();
                let brute: Vec<MultiIndex> = MultiIndex::all_up_to(n, 2, bound)
                    .into_iter()
                    .filter(|g| e.is_resonant(m, g))
                    .collect();
                let mut brute = brute;
                brute.sort();
                prop_assert_eq!(rs.points, brute);
            }
        }
    }
}
