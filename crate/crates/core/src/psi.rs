//! Intersection numbers of cotangent-line classes on `M̄_{0,m}`.
//!
//! Besides the top intersections `∫ ψ_1^{d_1} ⋯ ψ_m^{d_m}` this module
//! computes the fiber integrals needed at the stable vertex of a simple
//! graph: `∫_{M̄_{0,m+k}} f^*[pt] · Π ψ_j^{a_j}`, where `f` forgets the last
//! `k` points.

use crate::rational::{factorial, q_big, Q};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PsiError {
    #[error("need at least 3 marked points, got {0}")]
    TooFewPoints(usize),
    #[error("psi vector has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("psi exponents sum to {found}, expected {expected}")]
    Rank { expected: usize, found: usize },
}

fn check(m: usize, d: &[u32]) -> Result<(), PsiError> {
    if m < 3 {
        return Err(PsiError::TooFewPoints(m));
    }
    if d.len() != m {
        return Err(PsiError::Length {
            expected: m,
            found: d.len(),
        });
    }
    let s: usize = d.iter().map(|&x| x as usize).sum();
    if s != m - 3 {
        return Err(PsiError::Rank {
            expected: m - 3,
            found: s,
        });
    }
    Ok(())
}

/// `(m-3)! / (d_1! ⋯ d_m!)`.
pub fn psi_intersection(m: usize, d: &[u32]) -> Result<Q, PsiError> {
    check(m, d)?;
    let den = d
        .iter()
        .fold(BigInt::one(), |acc, &x| acc * factorial(u64::from(x)));
    Ok(Q::new(factorial(m as u64 - 3), den))
}

/// The same number by the string equation, recursing down to `M̄_{0,3}`.
pub fn psi_intersection_by_string(m: usize, d: &[u32]) -> Result<Q, PsiError> {
    check(m, d)?;
    Ok(q_big(string_recursion(d)))
}

fn string_recursion(d: &[u32]) -> BigInt {
    if d.len() == 3 {
        return if d.iter().all(|&x| x == 0) {
            BigInt::one()
        } else {
            BigInt::zero()
        };
    }
    let Some(z) = d.iter().position(|&x| x == 0) else {
        // all exponents positive: impossible in top degree
        return BigInt::zero();
    };
    let rest: Vec<u32> = d
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != z)
        .map(|(_, &x)| x)
        .collect();
    let mut total = BigInt::zero();
    for j in 0..rest.len() {
        if rest[j] > 0 {
            let mut r = rest.clone();
            r[j] -= 1;
            total += string_recursion(&r);
        }
    }
    total
}

/// Every `d ∈ N^m` with `Σ d = m - 3`, in lexicographic order.
pub fn all_psi_vectors(m: usize) -> Vec<Vec<u32>> {
    if m < 3 {
        return Vec::new();
    }
    compositions(m - 3, m)
}

/// All `a ∈ N^parts` with `Σ a = total`, lexicographically decreasing in
/// the first coordinate.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<u32>> {
    fn go(total: usize, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(total as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=total).rev() {
            cur.push(first as u32);
            go(total - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(total, parts, &mut Vec::new(), &mut out);
    out
}

type FiberKey = (Vec<u32>, Vec<u32>);

static FIBER_MEMO: Mutex<Option<HashMap<FiberKey, BigInt>>> = Mutex::new(None);

/// `∫_{M̄_{0,m+k}} f^*[pt] · Π_j ψ_j^{a_j}` where `old` holds the exponents
/// at the `m >= 3` points kept by the forgetful map `f` and `extra` those at
/// the `k` forgotten points. Zero unless `Σ a = k`.
pub fn fiber_point_integral(old: &[u32], extra: &[u32]) -> BigInt {
    assert!(old.len() >= 3, "the base must be stable");
    let total: usize = old.iter().chain(extra).map(|&x| x as usize).sum();
    if total != extra.len() {
        return BigInt::zero();
    }
    fiber_rec(old.to_vec(), extra.to_vec())
}

fn fiber_rec(mut old: Vec<u32>, mut extra: Vec<u32>) -> BigInt {
    if extra.is_empty() {
        return if old.iter().all(|&x| x == 0) {
            BigInt::one()
        } else {
            BigInt::zero()
        };
    }
    old.sort_unstable();
    extra.sort_unstable();
    let key = (old.clone(), extra.clone());
    if let Some(v) = FIBER_MEMO
        .lock()
        .expect("memo lock")
        .get_or_insert_with(HashMap::new)
        .get(&key)
    {
        return v.clone();
    }
    let value = if extra[0] == 0 {
        // string equation for a forgotten point carrying no ψ
        let rest_extra = extra[1..].to_vec();
        let mut acc = BigInt::zero();
        for j in 0..old.len() {
            if old[j] > 0 {
                let mut o = old.clone();
                o[j] -= 1;
                acc += fiber_rec(o, rest_extra.clone());
            }
        }
        for j in 0..rest_extra.len() {
            if rest_extra[j] > 0 {
                let mut e = rest_extra.clone();
                e[j] -= 1;
                acc += fiber_rec(old.clone(), e);
            }
        }
        acc
    } else if extra[0] == 1 {
        // dilaton equation: forgetting it leaves old.len() + extra.len() - 1 points
        let n = old.len() + extra.len() - 1;
        BigInt::from(n as i64 - 2) * fiber_rec(old.clone(), extra[1..].to_vec())
    } else {
        BigInt::zero()
    };
    FIBER_MEMO
        .lock()
        .expect("memo lock")
        .get_or_insert_with(HashMap::new)
        .insert(key, value.clone());
    value
}
