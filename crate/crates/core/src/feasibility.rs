//! Exact rational feasibility of `{x ≥ 0, A·x = b}`.
//!
//! Phase-one simplex with Bland's rule. Both outcomes carry a certificate
//! that is re-checked before it is returned.

use num_traits::{One, Signed, Zero};

use crate::linalg::{self, Matrix};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// A nonnegative solution.
    Feasible(Vec<Rational>),
    /// Farkas vector `w` with `wᵀA ≥ 0` and `wᵀb < 0`.
    Infeasible(Vec<Rational>),
}

pub fn check_solution(a: &Matrix<Rational>, b: &[Rational], x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, bi)| {
            row.iter().zip(x).map(|(p, q)| p * q).sum::<Rational>() == *bi
        })
}

pub fn check_farkas(a: &Matrix<Rational>, b: &[Rational], w: &[Rational]) -> bool {
    let ncols = a.first().map_or(0, Vec::len);
    let wb: Rational = w.iter().zip(b).map(|(p, q)| p * q).sum();
    wb.is_negative()
        && (0..ncols).all(|j| {
            let s: Rational = w.iter().zip(a).map(|(wi, row)| wi * &row[j]).sum();
            !s.is_negative()
        })
}

/// Decides feasibility of `{x ≥ 0, A·x = b}` exactly.
pub fn feasible(a: &Matrix<Rational>, b: &[Rational]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    // Make b ≥ 0 by flipping rows.
    let flip: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let sign = |i: usize| if flip[i] { -Rational::one() } else { Rational::one() };
    // Tableau over columns [x (n) | artificials (m) | rhs].
    let mut t: Matrix<Rational> = (0..m)
        .map(|i| {
            let s = sign(i);
            let mut row: Vec<Rational> = a[i].iter().map(|v| v * &s).collect();
            row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            row.push(&b[i] * &s);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let width = n + m;
    // Phase-one cost: minimize the sum of artificials.
    let cost = |j: usize| if j >= n { Rational::one() } else { Rational::zero() };
    loop {
        // Reduced costs d_j = c_j − c_Bᵀ·column_j.
        let entering = (0..width).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut d = cost(j);
            for (i, &bi) in basis.iter().enumerate() {
                d -= cost(bi) * &t[i][j];
            }
            d.is_negative()
        });
        let Some(j) = entering else { break };
        // Ratio test with Bland's tie-break on the basis index.
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let ratio = &t[i][width] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // Unbounded is impossible for phase one (objective ≥ 0).
            unreachable!("phase-one objective is bounded below");
        };
        let piv = t[r][j].clone();
        for v in t[r].iter_mut() {
            *v /= &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &(p * &f);
                }
            }
        }
        basis[r] = j;
    }
    let objective: Rational = basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| t[i][width].clone())
        .sum();
    if objective.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                x[bj] = t[i][width].clone();
            }
        }
        debug_assert!(check_solution(a, b, &x));
        return Feasibility::Feasible(x);
    }
    // Dual y of the flipped system: y solves B_basisᵀ·y = c_B.
    let full = |i: usize, j: usize| -> Rational {
        if j < n {
            &a[i][j] * &sign(i)
        } else if j - n == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    };
    let bt: Matrix<Rational> = (0..m)
        .map(|k| (0..m).map(|i| full(i, basis[k])).collect())
        .collect();
    let cb: Vec<Rational> = basis.iter().map(|&j| cost(j)).collect();
    let y = linalg::solve(&bt, &cb).expect("basis matrix is invertible");
    // yᵀA' ≤ 0 and yᵀb' > 0 for the flipped system; undo the flips and negate.
    let w: Vec<Rational> = y.iter().enumerate().map(|(i, v)| -(v * &sign(i))).collect();
    debug_assert!(check_farkas(a, b, &w));
    Feasibility::Infeasible(w)
}

/// Is the origin in the convex hull of the given rational points?
///
/// `Feasible(λ)` gives convex weights; `Infeasible(w)` yields a separating
/// functional `y = w[..dim]` with `y·v > 0` for every point `v`.
pub fn origin_in_hull(points: &[Vec<Rational>]) -> Feasibility {
    let dim = points.first().map_or(0, Vec::len);
    let mut a: Matrix<Rational> = (0..dim)
        .map(|r| points.iter().map(|p| p[r].clone()).collect())
        .collect();
    a.push(vec![Rational::one(); points.len()]);
    let mut b = vec![Rational::zero(); dim];
    b.push(Rational::one());
    feasible(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter().map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect()
    }

    #[test]
    fn hull_examples() {
        // Same open ray: origin excluded.
        let pts = q(&[&[1, 3], &[2, 6]]);
        match origin_in_hull(&pts) {
            Feasibility::Infeasible(w) => {
                for p in &pts {
                    let s: Rational = w.iter().zip(p).map(|(a, b)| a * b).sum();
                    assert!(s.is_positive());
                }
            }
            other => panic!("{other:?}"),
        }
        // Opposite rays: origin included.
        match origin_in_hull(&q(&[&[1, 3], &[-2, -6]])) {
            Feasibility::Feasible(l) => assert_eq!(l, vec![rat(2, 3), rat(1, 3)]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(origin_in_hull(&q(&[&[0, 0]])), Feasibility::Feasible(_)));
    }

    proptest! {
        #[test]
        fn certificates_always_check(
            entries in proptest::collection::vec(-4i64..5, 8),
            rhs in proptest::collection::vec(-4i64..5, 2),
        ) {
            let a: Matrix<Rational> = entries.chunks(4).map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect();
            let b: Vec<Rational> = rhs.iter().map(|&v| rat(v, 1)).collect();
            match feasible(&a, &b) {
                Feasibility::Feasible(x) => prop_assert!(check_solution(&a, &b, &x)),
                Feasibility::Infeasible(w) => prop_assert!(check_farkas(&a, &b, &w)),
            }
        }
    }
}
