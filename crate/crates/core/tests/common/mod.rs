//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::path::PathBuf;
use toricgw::fan::{CohomClass, CohomMonomial, CurveClass, Fan};
use toricgw::gw::{gw_invariant, pd_point_invariant, GwError, InvariantRequest, Twist};
use toricgw::moment_graph::build_moment_graph;
use toricgw::psi::compositions;
use toricgw::rational::{q_frac, Q};
use toricgw::{standard, MomentGraph};

pub fn mono(n: usize, rays: &[usize]) -> CohomClass {
    CohomClass::monomial(CohomMonomial::product_of(n, rays))
}

pub fn fans_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fans")
}

/// The fans shipped under `fans/`, with the builtin each must equal.
pub fn shipped_fans() -> Vec<(&'static str, Fan)> {
    vec![
        ("p1", standard::projective_space(1)),
        ("p2", standard::projective_space(2)),
        ("p1xp1", standard::p1_x_p1()),
        ("f1", standard::hirzebruch(1)),
        ("scroll_r3", standard::pp1_bundle(3)),
        ("scroll_r4", standard::pp1_bundle(4)),
    ]
}

pub fn load_fan(name: &str) -> Fan {
    let text = std::fs::read_to_string(fans_dir().join(format!("{name}.json"))).unwrap();
    toricgw::parse_fan(&text).unwrap()
}

/// `λ_1` and `λ_2` of the projective bundle over `P¹` with `r + 2` rays.
pub fn scroll_classes(r: usize) -> (CurveClass, CurveClass) {
    let n = r + 2;
    let mut l1 = vec![0i64; n];
    l1[0] = 1;
    l1[1] = 1;
    l1[r - 1] = -1;
    l1[r] = -1;
    let mut l2 = vec![0i64; n];
    for x in l2.iter_mut().skip(2) {
        *x = 1;
    }
    (CurveClass(l1), CurveClass(l2))
}

/// The top-degree class through one fixed point: rays 1 and 3..=r, r+2
/// (1-based).
pub fn scroll_top(r: usize) -> CohomClass {
    let mut top = vec![0];
    top.extend(2..r);
    top.push(r + 1);
    mono(r + 2, &top)
}

/// Divisor insertions `Z_3, …, Z_{r-1}, Z_{r+1}, Z_{r+1}, Z_{r+2}` (1-based).
pub fn point_shape_divisors(r: usize) -> Vec<CohomClass> {
    let n = r + 2;
    let mut ins: Vec<CohomClass> = (3..r).map(|k| mono(n, &[k - 1])).collect();
    ins.push(mono(n, &[r]));
    ins.push(mono(n, &[r]));
    ins.push(mono(n, &[r + 1]));
    ins
}

/// Fiber divisors `Z_3, …, Z_{r+2}` (1-based).
pub fn fiber_divisors(r: usize) -> Vec<CohomClass> {
    (2..r + 2).map(|k| mono(r + 2, &[k])).collect()
}

/// Number of rational plane curves of degree `d` through `3d - 1` general
/// points, from the associativity recursion.
pub fn kontsevich(d: usize) -> BigInt {
    let mut n = vec![BigInt::zero(); d + 1];
    if d >= 1 {
        n[1] = BigInt::one();
    }
    let binom = |a: usize, b: usize| -> BigInt {
        let mut r = BigInt::one();
        for i in 0..b {
            r = r * BigInt::from(a - i) / BigInt::from(i + 1);
        }
        r
    };
    for e in 2..=d {
        let mut acc = BigInt::zero();
        for a in 1..e {
            let b = e - a;
            let (ai, bi) = (BigInt::from(a), BigInt::from(b));
            let w = &ai * &ai * &bi * (&bi * binom(3 * e - 4, 3 * a - 2) - &ai * binom(3 * e - 4, 3 * a - 1));
            acc += &n[a] * &n[b] * w;
        }
        n[e] = acc;
    }
    n[d].clone()
}

/// Brute-force `∫ Π_i ψ_i^{d_i}` over `M̄_{0,m}` by the string equation alone,
/// written independently of the library's oracle.
pub fn psi_by_string(d: &[u32]) -> BigInt {
    let m = d.len();
    if m == 3 {
        return if d.iter().all(|&x| x == 0) { BigInt::one() } else { BigInt::zero() };
    }
    if d.iter().map(|&x| x as usize).sum::<usize>() != m - 3 {
        return BigInt::zero();
    }
    let z = d.iter().position(|&x| x == 0).expect("some exponent vanishes");
    let rest: Vec<u32> = d.iter().enumerate().filter(|&(i, _)| i != z).map(|(_, &x)| x).collect();
    let mut acc = BigInt::zero();
    for j in 0..rest.len() {
        if rest[j] > 0 {
            let mut e = rest.clone();
            e[j] -= 1;
            acc += psi_by_string(&e);
        }
    }
    acc
}

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn value(mg: &MomentGraph, a: &CurveClass, ins: Vec<CohomClass>, twist: Twist, seed: u64) -> Result<Q, GwError> {
    let mut req = InvariantRequest::new(a.clone(), ins, twist);
    req.seed = seed;
    gw_invariant(mg, &req).map(|r| r.value)
}

/// `H^a` on `P²` as a monomial in distinct rays where possible.
pub fn p2_power(a: u32) -> CohomClass {
    match a {
        0 => CohomClass::one(3),
        1 => mono(3, &[0]),
        _ => mono(3, &[0, 1]),
    }
}

/// The small quantum ring of `P²` is `Q[H, q]/(H³ - q)`, so every
/// `Φ^{dL}(P.D.(pt); H^{a_1}, …, H^{a_m})` is 1 when `Σ a_i = 3d + 2`.
pub fn p2_ring_oracle(d: i64, a: &[u32]) -> Q {
    let s: i64 = a.iter().map(|&x| i64::from(x)).sum();
    q(i64::from(s == 3 * d + 2))
}

/// On `P¹×P¹`, `H_1² = q_1`, `H_2² = q_2`; insertions are `H_1^α H_2^β` with
/// `α, β ∈ {0, 1}`.
pub fn p1xp1_ring_oracle(a: i64, b: i64, ab: &[(u32, u32)]) -> Q {
    let sa: i64 = ab.iter().map(|&(x, _)| i64::from(x)).sum();
    let sb: i64 = ab.iter().map(|&(_, y)| i64::from(y)).sum();
    q(i64::from(sa == 2 * a + 1 && sb == 2 * b + 1))
}

pub fn p1xp1_insertion(alpha: u32, beta: u32) -> CohomClass {
    let mut rays = Vec::new();
    if alpha == 1 {
        rays.push(0);
    }
    if beta == 1 {
        rays.push(2);
    }
    mono(4, &rays)
}

/// A small invariant with a known value, for the randomized suites.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: &'static str,
    pub fan: usize,
    pub class: CurveClass,
    pub insertions: Vec<CohomClass>,
    pub point_class: bool,
    pub expect: Q,
}

pub fn scroll_case(r: usize) -> Case {
    let mut ins = point_shape_divisors(r);
    ins.push(scroll_top(r));
    Case {
        name: "scroll",
        fan: if r == 3 { 4 } else { 5 },
        class: scroll_classes(r).1,
        insertions: ins,
        point_class: true,
        expect: q(1),
    }
}

/// `total` spread over `m` slots of capacity `cap`, in an order shuffled by
/// `salt`.
pub fn spread(total: u32, m: usize, cap: u32, salt: u64) -> Vec<u32> {
    let mut order: Vec<usize> = (0..m).collect();
    let mut s = salt;
    for i in (1..m).rev() {
        order.swap(i, (s % (i as u64 + 1)) as usize);
        s = s.rotate_left(9) ^ 0x2545_F491;
    }
    let mut a = vec![0u32; m];
    let mut left = total;
    'fill: for _ in 0..cap {
        for &i in &order {
            if left == 0 {
                break 'fill;
            }
            a[i] += 1;
            left -= 1;
        }
    }
    assert_eq!(left, 0, "slots too small");
    a
}

pub fn case_strategy() -> impl Strategy<Value = Case> {
    let p2_case = (0i64..=2, 3usize..=5, any::<u64>()).prop_filter_map("no insertion degrees", |(d, m, salt)| {
        // spread Σ a = 3d + 2 over m slots with entries ≤ 2
        let total = 3 * d + 2;
        if total > 2 * m as i64 {
            return None;
        }
        let a = spread(total as u32, m, 2, salt);
        Some(Case {
            name: "p2",
            fan: 1,
            class: CurveClass(vec![d; 3]),
            insertions: a.iter().map(|&x| p2_power(x)).collect(),
            point_class: m > 3,
            expect: p2_ring_oracle(d, &a),
        })
    });
    let pp_case = (0i64..=1, 0i64..=1, 3usize..=5, any::<u64>()).prop_filter_map("no insertion degrees", |(a, b, m, salt)| {
        let (ta, tb) = (2 * a + 1, 2 * b + 1);
        if ta > m as i64 || tb > m as i64 {
            return None;
        }
        let alpha = spread(ta as u32, m, 1, salt);
        let beta = spread(tb as u32, m, 1, salt.rotate_left(17));
        let ab: Vec<(u32, u32)> = alpha.into_iter().zip(beta).collect();
        Some(Case {
            name: "p1xp1",
            fan: 2,
            class: CurveClass(vec![a, a, b, b]),
            insertions: ab.iter().map(|&(x, y)| p1xp1_insertion(x, y)).collect(),
            point_class: m > 3,
            expect: p1xp1_ring_oracle(a, b, &ab),
        })
    });
    prop_oneof![
        4 => p2_case,
        4 => pp_case,
        1 => Just(scroll_case(3)),
    ]
}

pub fn moment_graph_of(fan: usize) -> MomentGraph {
    build_moment_graph(&shipped_fans().swap_remove(fan).1).unwrap()
}

pub fn evaluate_case(mg: &MomentGraph, c: &Case, dvec: Option<Vec<u32>>, seed: u64) -> Q {
    if c.point_class {
        pd_point_invariant(mg, &c.class, &c.insertions, dvec, seed).unwrap()
    } else {
        value(mg, &c.class, c.insertions.clone(), Twist::Classical, seed).unwrap()
    }
}

pub fn random_dvec(m: usize, salt: u64) -> Vec<u32> {
    let all = compositions(m - 3, m);
    all[(salt % all.len() as u64) as usize].clone()
}

pub fn small_rational() -> impl Strategy<Value = Q> {
    (-5i64..=5, 1i64..=4).prop_map(|(p, d)| q_frac(p, d))
}

