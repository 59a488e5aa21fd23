//! Dense linear algebra over an exact field.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix<C> = Vec<Vec<C>>;

/// Reduced row echelon form and pivot columns.
pub fn rref<C: Scalar>(mut m: Matrix<C>) -> (Matrix<C>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv();
        for v in m[r].iter_mut() {
            *v = v.mul_ref(&inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &pv.mul_ref(&f);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank<C: Scalar>(m: &Matrix<C>) -> usize {
    rref(m.clone()).1.len()
}

/// Basis of the right kernel `{v : m·v = 0}`, one vector per free column.
pub fn kernel<C: Scalar>(m: &Matrix<C>, cols: usize) -> Vec<Vec<C>> {
    let (r, pivots) = rref(m.clone());
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![C::zero(); cols];
            v[f] = C::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix.
pub fn invert<C: Scalar>(m: &Matrix<C>) -> Result<Matrix<C>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut aug: Matrix<C> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { C::one() } else { C::zero() }));
            r
        })
        .collect();
    let (red, pivots) = rref(std::mem::take(&mut aug));
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::Domain("singular linear part".into()));
    }
    Ok(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m·x = b`; `None` when inconsistent. Free variables are zero.
pub fn solve<C: Scalar>(m: &Matrix<C>, b: &[C]) -> Option<Vec<C>> {
    let cols = m.first().map_or(0, Vec::len);
    let aug: Matrix<C> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (red, pivots) = rref(aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![C::zero(); cols];
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = red[i][cols].clone();
    }
    Some(x)
}

/// Determinant by elimination.
pub fn determinant<C: Scalar>(m: &Matrix<C>) -> C {
    let n = m.len();
    let mut a = m.clone();
    let mut det = C::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return C::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = det.mul_ref(&a[c][c]);
        let inv = a[c][c].inv();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].mul_ref(&inv);
            for j in c..n {
                let s = a[c][j].mul_ref(&f);
                a[i][j] -= &s;
            }
        }
    }
    det
}

pub fn mat_mul<C: Scalar>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = C::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k].mul_ref(&b[k][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v, 1)).collect())
            .collect()
    }

    #[test]
    fn kernel_and_rank() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(rank(&a), 1);
        let k = kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &a {
                let s: Rational = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert_eq!(s, rat(0, 1));
            }
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m(&[&[2, 1], &[7, 4]]);
        let inv = invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), m(&[&[1, 0], &[0, 1]]));
        assert_eq!(determinant(&a), rat(1, 1));
        assert!(invert(&m(&[&[1, 2], &[2, 4]])).is_err());
        assert_eq!(determinant(&m(&[&[0, 1], &[1, 0]])), rat(-1, 1));
    }

    #[test]
    fn solving() {
        let a = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &[rat(3, 1), rat(1, 1)]), Some(vec![rat(2, 1), rat(1, 1)]));
        let s = m(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&s, &[rat(1, 1), rat(3, 1)]), None);
    }
}
