//! Integer lattices: kernels, Hermite normal forms and integer solving.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::scalar::Rational;

pub type IntMatrix = Vec<Vec<BigInt>>;

/// Extended gcd with `a·x + b·y = g ≥ 0`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column echelon form `A·U = H` with `U` unimodular.
///
/// Returns `(H, U, rank)`; the first `rank` columns of `H` are nonzero and
/// the remaining columns of `U` span the integer kernel of `A`.
pub fn column_echelon(a: &IntMatrix, ncols: usize) -> (IntMatrix, IntMatrix, usize) {
    let mut h = a.clone();
    let mut u: IntMatrix = (0..ncols)
        .map(|i| {
            (0..ncols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    // Column op on both H (rows of A) and U: (cj, ck) ← (x·cj + y·ck, s·cj + t·ck).
    fn col_combine(m: &mut IntMatrix, j: usize, k: usize, c: [&BigInt; 4]) {
        for row in m.iter_mut() {
            let (vj, vk) = (row[j].clone(), row[k].clone());
            row[j] = c[0] * &vj + c[1] * &vk;
            row[k] = c[2] * &vj + c[3] * &vk;
        }
    }
    let mut c = 0;
    for r in 0..h.len() {
        if c == ncols {
            break;
        }
        for k in c + 1..ncols {
            if h[r][k].is_zero() {
                continue;
            }
            let (p, q) = (h[r][c].clone(), h[r][k].clone());
            let (g, x, y) = ext_gcd(&p, &q);
            let s = -(&q / &g);
            let t = &p / &g;
            col_combine(&mut h, c, k, [&x, &y, &s, &t]);
            col_combine(&mut u, c, k, [&x, &y, &s, &t]);
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            for m in [&mut h, &mut u] {
                for row in m.iter_mut() {
                    row[c] = -row[c].clone();
                }
            }
        }
        c += 1;
    }
    (h, u, c)
}

/// Basis of `{k ∈ Zⁿ : A·k = 0}`.
pub fn integer_kernel(a: &IntMatrix, ncols: usize) -> Vec<Vec<BigInt>> {
    let (_, u, rank) = column_echelon(a, ncols);
    (rank..ncols)
        .map(|j| u.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Row Hermite normal form, pivots at the first nonzero entry, positive,
/// with entries above each pivot reduced into `[0, pivot)`. Zero rows are
/// dropped.
pub fn hnf(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m: IntMatrix = rows.to_vec();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        // gcd-combine rows r.. in column c into row r.
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let (p, q) = (m[r][c].clone(), m[i][c].clone());
            let (g, x, y) = ext_gcd(&p, &q);
            let (s, t) = (-(&q / &g), &p / &g);
            let (rr, ri) = (m[r].clone(), m[i].clone());
            m[r] = rr.iter().zip(&ri).map(|(a, b)| &x * a + &y * b).collect();
            m[i] = rr.iter().zip(&ri).map(|(a, b)| &s * a + &t * b).collect();
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for v in m[r].iter_mut() {
                *v = -v.clone();
            }
        }
        let piv = m[r][c].clone();
        for i in 0..r {
            let f = m[i][c].div_floor(&piv);
            if !f.is_zero() {
                let pr = m[r].clone();
                for (v, pv) in m[i].iter_mut().zip(&pr) {
                    *v -= &f * pv;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Row Hermite normal form with each pivot at the last nonzero entry of its
/// row. Rows are ordered by decreasing pivot column.
///
/// This is [`hnf`] applied to the column-reversed matrix.
pub fn hnf_last_pivot(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let rev: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().rev().cloned().collect())
        .collect();
    hnf(&rev, ncols)
        .into_iter()
        .map(|r| r.into_iter().rev().collect())
        .collect()
}

/// Certificate that `A·x = b` has no integer solution: `w·A` is integral
/// while `w·b` is not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerInfeasibility {
    #[serde(serialize_with = "ser_rationals")]
    pub w: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&r.to_string())?;
    }
    seq.end()
}

impl IntegerInfeasibility {
    /// Re-checks the certificate against `A`, `b`.
    pub fn verify(&self, a: &IntMatrix, b: &[BigInt]) -> bool {
        let ncols = a.first().map_or(0, Vec::len);
        if self.w.len() != a.len() || b.len() != a.len() {
            return false;
        }
        for j in 0..ncols {
            let s: Rational = self
                .w
                .iter()
                .zip(a)
                .map(|(w, row)| w * Rational::from_integer(row[j].clone()))
                .sum();
            if !s.is_integer() {
                return false;
            }
        }
        let wb: Rational = self
            .w
            .iter()
            .zip(b)
            .map(|(w, bi)| w * Rational::from_integer(bi.clone()))
            .sum();
        !wb.is_integer()
    }
}

/// An integer solution of `A·x = b` plus the kernel lattice, or a certificate
/// of infeasibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerSolution {
    Solution {
        particular: Vec<BigInt>,
        kernel: Vec<Vec<BigInt>>,
    },
    Infeasible(IntegerInfeasibility),
}

/// Solves `A·x = b` over the integers.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt], ncols: usize) -> IntegerSolution {
    let m = a.len();
    let (h, u, rank) = column_echelon(a, ncols);
    // Pivot rows of the echelon form: the first row where each column starts.
    let mut pivot_rows = Vec::with_capacity(rank);
    let mut r = 0;
    for c in 0..rank {
        while h[r][c].is_zero() {
            r += 1;
        }
        pivot_rows.push(r);
        r += 1;
    }
    // Forward substitution H·y = b on the pivot rows.
    let mut y: Vec<Rational> = Vec::with_capacity(rank);
    let hq = |i: usize, j: usize| Rational::from_integer(h[i][j].clone());
    for (c, &pr) in pivot_rows.iter().enumerate() {
        let mut s = Rational::from_integer(b[pr].clone());
        for (j, yj) in y.iter().enumerate() {
            s -= hq(pr, j) * yj;
        }
        y.push(s / hq(pr, c));
    }
    // Left inverse rows of the pivot block give rational certificates.
    let certificate_for = |c: usize| -> Vec<Rational> {
        // w restricted to pivot rows solves wᵀ·H_piv = e_cᵀ (H_piv lower triangular).
        let mut w = vec![Rational::zero(); rank];
        for j in (0..rank).rev() {
            let target = if j == c { Rational::one() } else { Rational::zero() };
            let mut s = target;
            for (k, wk) in w.iter().enumerate().skip(j + 1) {
                s -= wk * hq(pivot_rows[k], j);
            }
            w[j] = s / hq(pivot_rows[j], j);
        }
        let mut full = vec![Rational::zero(); m];
        for (k, &pr) in pivot_rows.iter().enumerate() {
            full[pr] = w[k].clone();
        }
        full
    };
    if let Some(c) = y.iter().position(|v| !v.is_integer()) {
        return IntegerSolution::Infeasible(IntegerInfeasibility {
            w: certificate_for(c),
        });
    }
    // Consistency of the remaining rows.
    for i in 0..m {
        let s: Rational = y.iter().enumerate().map(|(j, yj)| hq(i, j) * yj).sum();
        let bi = Rational::from_integer(b[i].clone());
        if s != bi {
            // Row i minus its expression in the pivot rows kills H; scale the
            // nonzero residual to 1/2.
            let mut w = vec![Rational::zero(); m];
            w[i] = Rational::one();
            for c in 0..rank {
                let coef = hq(i, c);
                if coef.is_zero() {
                    continue;
                }
                let wc = certificate_for(c);
                for (wk, v) in w.iter_mut().zip(&wc) {
                    *wk -= &coef * v;
                }
            }
            let residual: Rational = w
                .iter()
                .zip(b)
                .map(|(wk, bk)| wk * Rational::from_integer(bk.clone()))
                .sum();
            let scale = Rational::new(1.into(), 2.into()) / residual;
            for wk in w.iter_mut() {
                *wk *= &scale;
            }
            return IntegerSolution::Infeasible(IntegerInfeasibility { w });
        }
    }
    let yi: Vec<BigInt> = y.iter().map(|v| v.to_integer()).collect();
    let particular = (0..ncols)
        .map(|row| {
            yi.iter()
                .enumerate()
                .fold(BigInt::zero(), |acc, (j, v)| acc + &u[row][j] * v)
        })
        .collect();
    let kernel = (rank..ncols)
        .map(|j| u.iter().map(|row| row[j].clone()).collect())
        .collect();
    IntegerSolution::Solution { particular, kernel }
}

pub fn int_rows(rows: &[&[i64]]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}
