//! Dense matrices over the rationals and over truncated series.
//!
//! Series matrices are treated as matrices over the local ring k[[ħ]]: ranks
//! are ranks of the constant parts, and a matrix is invertible exactly when
//! its constant part is.

use num_traits::{One, Zero};

use crate::series::{Rational, TruncLaurent};

pub type QMat = Vec<Vec<Rational>>;
pub type SMat = Vec<Vec<TruncLaurent>>;
pub type SVec = Vec<TruncLaurent>;

pub fn q_zero(rows: usize, cols: usize) -> QMat {
    vec![vec![Rational::zero(); cols]; rows]
}

/// Row echelon form in place; returns the pivot columns.
pub fn q_echelon(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn q_rank(m: &QMat) -> usize {
    let mut w = m.clone();
    q_echelon(&mut w).len()
}

pub fn q_inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let piv = q_echelon(&mut aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Constant parts of a series matrix.
pub fn const_part(m: &SMat) -> QMat {
    m.iter().map(|r| r.iter().map(|x| x.constant_term()).collect()).collect()
}

/// Rank modulo ħ.
pub fn s_rank(m: &SMat) -> usize {
    q_rank(&const_part(m))
}

pub fn s_zero(rows: usize, cols: usize, order: i32) -> SMat {
    vec![vec![TruncLaurent::zero(order); cols]; rows]
}

pub fn s_identity(n: usize, order: i32) -> SMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { TruncLaurent::one(order) } else { TruncLaurent::zero(order) })
                .collect()
        })
        .collect()
}

pub fn s_from_q(m: &QMat, order: i32) -> SMat {
    m.iter().map(|r| r.iter().map(|x| TruncLaurent::constant(x.clone(), order)).collect()).collect()
}

pub fn s_transpose(m: &SMat) -> SMat {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn s_mul(a: &SMat, b: &SMat) -> SMat {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = &row[0] * &b[0][j];
                    for k in 1..inner {
                        acc += &(&row[k] * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn s_add(a: &SMat, b: &SMat) -> SMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn s_sub(a: &SMat, b: &SMat) -> SMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn s_neg(a: &SMat) -> SMat {
    a.iter().map(|x| x.iter().map(|p| -p).collect()).collect()
}

pub fn s_scale(a: &SMat, r: &Rational) -> SMat {
    a.iter().map(|x| x.iter().map(|p| p.scale(r)).collect()).collect()
}

pub fn s_mat_vec(a: &SMat, v: &SVec) -> SVec {
    a.iter()
        .map(|row| {
            row.iter().zip(v).fold(TruncLaurent::zero(v.first().map_or(0, |x| x.order())), |acc, (x, y)| {
                &acc + &(x * y)
            })
        })
        .collect()
}

pub fn s_dot(u: &SVec, v: &SVec) -> TruncLaurent {
    u.iter()
        .zip(v)
        .fold(TruncLaurent::zero(u.first().map_or(0, |x| x.order())), |acc, (x, y)| &acc + &(x * y))
}

/// Entrywise agreement to order `n`.
pub fn s_agrees(a: &SMat, b: &SMat, n: i32) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.agrees_to(q, n)))
}

pub fn s_is_antisymmetric(a: &SMat) -> bool {
    let n = a.len();
    a.iter().all(|r| r.len() == n)
        && (0..n).all(|i| (0..n).all(|j| (&a[i][j] + &a[j][i]).is_zero()))
}

/// Inverse over k[[ħ]] by Gauss–Jordan elimination with unit pivots.
pub fn s_inverse(m: &SMat) -> Option<SMat> {
    let n = m.len();
    let order = m.iter().flatten().map(|x| x.order()).min().unwrap_or(0);
    let mut a = m.clone();
    let mut inv = s_identity(n, order);
    for c in 0..n {
        let p = (c..n).find(|&i| a[i][c].is_unit())?;
        a.swap(c, p);
        inv.swap(c, p);
        let u = a[c][c].inverse().ok()?;
        for j in 0..n {
            a[c][j] = &a[c][j] * &u;
            inv[c][j] = &inv[c][j] * &u;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..n {
                    let d1 = &f * &a[c][j];
                    a[i][j] = &a[i][j] - &d1;
                    let d2 = &f * &inv[c][j];
                    inv[i][j] = &inv[i][j] - &d2;
                }
            }
        }
    }
    Some(inv)
}

/// Solves `x · M = b` for a row vector `x`, when `M` is square and invertible.
pub fn s_solve_row(m: &SMat, b: &SVec) -> Option<SVec> {
    let inv = s_inverse(m)?;
    let bt: SMat = vec![b.clone()];
    Some(s_mul(&bt, &inv).remove(0))
}

/// Indices of unit vectors that complete the given vectors (rows) to a basis
/// of k[[ħ]]^t modulo ħ. The input rows must be independent mod ħ.
pub fn complete_to_basis(rows: &[SVec], t: usize) -> Vec<usize> {
    let mut current: QMat = rows.iter().map(|r| r.iter().map(|x| x.constant_term()).collect()).collect();
    let mut rank = q_rank(&current);
    let mut extra = Vec::new();
    for g in 0..t {
        if rank == t {
            break;
        }
        let mut e = vec![Rational::zero(); t];
        e[g] = Rational::one();
        current.push(e);
        let r = q_rank(&current);
        if r > rank {
            rank = r;
            extra.push(g);
        } else {
            current.pop();
        }
    }
    extra
}

pub fn unit_vector(t: usize, g: usize, order: i32) -> SVec {
    (0..t)
        .map(|k| if k == g { TruncLaurent::one(order) } else { TruncLaurent::zero(order) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rat, ratio};

    #[test]
    fn rational_rank_and_inverse() {
        let m = vec![vec![rat(2), rat(-1)], vec![rat(-1), rat(2)]];
        assert_eq!(q_rank(&m), 2);
        let inv = q_inverse(&m).unwrap();
        assert_eq!(inv[0][0], ratio(2, 3));
        let sing = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert_eq!(q_rank(&sing), 1);
        assert!(q_inverse(&sing).is_none());
    }

    #[test]
    fn series_inverse_uses_unit_pivots() {
        let n = 4;
        let h = TruncLaurent::hbar(n);
        let one = TruncLaurent::one(n);
        // [[h, 1], [1, 1+h]] has unit determinant -1 + h^2 - ... and a non-unit corner.
        let m = vec![vec![h.clone(), one.clone()], vec![one.clone(), &one + &h]];
        let inv = s_inverse(&m).unwrap();
        assert!(s_agrees(&s_mul(&m, &inv), &s_identity(2, n), n));
        let bad = vec![vec![h.clone(), h.clone()], vec![one.clone(), one.clone()]];
        assert!(s_inverse(&bad).is_none());
        assert_eq!(s_rank(&bad), 1);
    }

    #[test]
    fn basis_completion() {
        let n = 3;
        let v = vec![TruncLaurent::one(n), TruncLaurent::one(n), TruncLaurent::zero(n)];
        assert_eq!(complete_to_basis(&[v], 3), vec![0, 2]);
    }
}
