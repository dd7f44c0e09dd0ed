//! Small exact linear algebra over `Z` and `Q`.
//!
//! Matrices are row-major `Vec<Vec<_>>`. Sizes here are tiny (the fan
//! dimension, or a cohomology degree piece), so plain Gaussian elimination
//! over `BigRational` is fast enough and keeps everything exact.

use crate::rational::{q_int, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn to_q_matrix(m: &[Vec<i64>]) -> Vec<Vec<Q>> {
    m.iter()
        .map(|row| row.iter().map(|&x| q_int(x)).collect())
        .collect()
}

/// Determinant of a square integer matrix (fraction-free Bareiss elimination).
pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Inverse of a square rational matrix, `None` if singular.
pub fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Inverse of a unimodular integer matrix, `None` when singular or when the
/// inverse is not integral.
pub fn inverse_unimodular(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let inv = inverse(&to_q_matrix(m))?;
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    if x.is_integer() {
                        x.to_integer().to_i64()
                    } else {
                        None
                    }
                })
                .collect::<Option<Vec<i64>>>()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(Q::zero(), |acc, k| acc + &row[k] * &b[k][j])
                })
                .collect()
        })
        .collect()
}

pub fn is_identity(m: &[Vec<Q>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.len() == m.len()
            && row
                .iter()
                .enumerate()
                .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
    })
}

/// Greedy selection of linearly independent rows, in order of appearance.
pub fn independent_rows(rows: &[Vec<Q>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<Q>)> = Vec::new(); // (pivot column, reduced row)
    let mut picked = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let mut r = row.clone();
        for (pc, b) in &basis {
            if !r[*pc].is_zero() {
                let f = r[*pc].clone();
                for (x, y) in r.iter_mut().zip(b.iter()) {
                    *x -= y * &f;
                }
            }
        }
        if let Some(pc) = r.iter().position(|x| !x.is_zero()) {
            let inv = r[pc].recip();
            for x in r.iter_mut() {
                *x *= &inv;
            }
            basis.push((pc, r));
            picked.push(idx);
        }
    }
    picked
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    independent_rows(rows).len()
}

/// Integer basis of `{x in Z^n : sum_i x_i * cols[i] = 0}` where `cols` are
/// `n` vectors in `Z^d`. Each basis vector is primitive. Rational rank of the
/// result equals `n - rank(cols)`.
pub fn integer_kernel(cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cols.len();
    if n == 0 {
        return Vec::new();
    }
    let d = cols[0].len();
    // Matrix M (d x n) with M[r][i] = cols[i][r]; reduce to RREF.
    let mut m: Vec<Vec<Q>> = (0..d)
        .map(|r| (0..n).map(|i| q_int(cols[i][r])).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == d {
            break;
        }
        let Some(p) = (row..d).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..d {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let v = &m[row][c] * &f;
                    m[r][c] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            let lcm = v
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
            let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            ints.iter()
                .map(|x| (x / &g).to_i64().expect("kernel entry fits in i64"))
                .collect()
        })
        .collect()
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn abs_det_is_one(m: &[Vec<i64>]) -> bool {
    det_i64(m).abs().is_one()
}
