mod common;

use common::*;
use proptest::prelude::*;
use std::collections::BTreeMap;
use toricgw::fan::{is_curve_class, parse_fan_unvalidated, CurveClass, Fan};
use toricgw::moment_graph::{build_moment_graph, edge_class, WeightVector};
use toricgw::{standard, validate};

fn det(m: &[Vec<i64>]) -> i64 {
    // Laplace expansion, fine for d <= 4
    let d = m.len();
    if d == 1 {
        return m[0][0];
    }
    (0..d)
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                .collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * det(&minor)
        })
        .sum()
}

#[test]
fn shipped_fans_match_builtins() {
    for (name, fan) in shipped_fans() {
        let loaded = load_fan(name);
        assert_eq!(loaded.content_hash(), fan.content_hash(), "{name}");
        assert!(validate(&loaded).passed, "{name}");
    }
}

#[test]
fn facets_pair_and_cones_are_unimodular() {
    for (name, fan) in shipped_fans() {
        let mut facets: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for cone in fan.max_cones() {
            let m: Vec<Vec<i64>> = cone.iter().map(|&i| fan.ray(i).to_vec()).collect();
            assert_eq!(det(&m).abs(), 1, "{name} cone {cone:?}");
            for skip in 0..cone.len() {
                let mut f = cone.clone();
                f.remove(skip);
                *facets.entry(f).or_default() += 1;
            }
        }
        assert!(facets.values().all(|&c| c == 2), "{name}");
        assert_eq!(validate(&fan).facet_pairings, facets.len(), "{name}");
    }
}

#[test]
fn scroll_r3_report() {
    let r = validate(&standard::pp1_bundle(3));
    assert!(r.passed);
    assert_eq!(r.cones, 6);
    // six cones with three facets each, every facet shared by two
    assert_eq!(r.facet_pairings, 9);
}

#[test]
fn broken_fans_fail_validation() {
    // P² with one cone missing
    let missing = r#"{"dim": 2, "rays": [[1,0],[0,1],[-1,-1]], "max_cones": [[0,1],[1,2]]}"#;
    let f = parse_fan_unvalidated(missing).unwrap();
    let rep = validate(&f);
    assert!(!rep.passed);
    assert!(rep.checks.iter().any(|c| c.name == "facet_pairing" && !c.passed));
    assert!(toricgw::parse_fan(missing).is_err());

    // weighted projective plane P(1,1,2): singular cone
    let singular = r#"{"dim": 2, "rays": [[1,0],[0,1],[-1,-2]], "max_cones": [[0,1],[1,2],[0,2]]}"#;
    let rep = validate(&parse_fan_unvalidated(singular).unwrap());
    assert!(rep.checks.iter().any(|c| c.name == "smooth_cones" && !c.passed));
}

#[test]
fn curve_lattice_has_rank_n_minus_d() {
    for (name, fan) in shipped_fans() {
        let basis = fan.curve_lattice_basis();
        assert_eq!(basis.len(), fan.n() - fan.dim(), "{name}");
        for b in &basis {
            assert!(is_curve_class(&fan, &b.0).unwrap());
        }
        let rows: Vec<Vec<toricgw::Q>> = basis
            .iter()
            .map(|b| b.0.iter().map(|&x| q(x)).collect())
            .collect();
        assert_eq!(toricgw::linalg::rank(&rows), basis.len(), "{name}");
    }
}

fn relation_holds(fan: &Fan, v: &[i64]) -> bool {
    (0..fan.dim()).all(|c| (0..fan.n()).map(|i| v[i] * fan.ray(i)[c]).sum::<i64>() == 0)
}

fn fan_by_index(i: usize) -> Fan {
    shipped_fans().swap_remove(i).1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn curve_classes_form_a_sublattice(fi in 0usize..6, coeffs in prop::collection::vec(-3i64..=3, 8), noise in prop::collection::vec(-2i64..=2, 6)) {
        let fan = fan_by_index(fi);
        let n = fan.n();
        let basis = fan.curve_lattice_basis();
        let mut a = vec![0i64; n];
        let mut b = vec![0i64; n];
        for (k, bv) in basis.iter().enumerate() {
            for i in 0..n {
                a[i] += coeffs[k % coeffs.len()] * bv.0[i];
                b[i] += coeffs[(k + 3) % coeffs.len()] * bv.0[i];
            }
        }
        prop_assert!(is_curve_class(&fan, &a).unwrap());
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(is_curve_class(&fan, &sum).unwrap());
        let neg: Vec<i64> = a.iter().map(|x| -x).collect();
        prop_assert!(is_curve_class(&fan, &neg).unwrap());
        // an arbitrary vector is a class exactly when the linear relation holds
        let raw: Vec<i64> = (0..n).map(|i| a[i] + noise[i % noise.len()]).collect();
        prop_assert_eq!(is_curve_class(&fan, &raw).unwrap(), relation_holds(&fan, &raw));
    }
}

#[test]
fn wrong_length_is_an_error() {
    let fan = standard::projective_space(2);
    assert!(is_curve_class(&fan, &[1, 1]).is_err());
}

/// Brute-force `λ` on the wall rays with `v_a + v_b + Σ λ_i v_i = 0`.
fn wall_class_by_search(fan: &Fan, a: usize, b: usize, wall: &[usize]) -> Vec<i64> {
    let mut lam = vec![-3i64; wall.len()];
    loop {
        let ok = (0..fan.dim()).all(|c| {
            fan.ray(a)[c] + fan.ray(b)[c] + wall.iter().zip(&lam).map(|(&i, &l)| l * fan.ray(i)[c]).sum::<i64>() == 0
        });
        if ok {
            let mut out = vec![0i64; fan.n()];
            out[a] = 1;
            out[b] = 1;
            for (&i, &l) in wall.iter().zip(&lam) {
                out[i] = l;
            }
            return out;
        }
        let mut k = 0;
        loop {
            if k == lam.len() {
                panic!("no wall relation in the search box");
            }
            lam[k] += 1;
            if lam[k] <= 3 {
                break;
            }
            lam[k] = -3;
            k += 1;
        }
    }
}

#[test]
fn edge_classes_agree_with_search() {
    for (name, fan) in shipped_fans() {
        let mg = build_moment_graph(&fan).unwrap();
        for e in mg.edges() {
            let expect = wall_class_by_search(&fan, e.transverse[0], e.transverse[1], &e.wall);
            assert_eq!(e.class.0, expect, "{name} wall {:?}", e.wall);
            assert_eq!(edge_class(&fan, &e.wall).unwrap(), e.class);
            assert_eq!(e.class.0[e.transverse[0]], 1);
            assert_eq!(e.class.0[e.transverse[1]], 1);
        }
        assert!(mg.check_edge_classes().is_ok());
    }
}

#[test]
fn small_moment_graphs() {
    let mg = build_moment_graph(&standard::projective_space(2)).unwrap();
    assert_eq!(mg.fixed_points().len(), 3);
    assert_eq!(mg.edges().len(), 3);
    assert!(mg.edges().iter().all(|e| e.class == CurveClass(vec![1, 1, 1])));

    let mg = build_moment_graph(&standard::p1_x_p1()).unwrap();
    for e in mg.edges() {
        // one ruling is met once by both transverse divisors, the other not at all
        let c = &e.class.0;
        assert_eq!(c.iter().filter(|&&x| x == 1).count(), 2);
        assert_eq!(c.iter().filter(|&&x| x == 0).count(), 2);
        assert!(relation_holds(mg.fan(), c));
    }

    let mg = build_moment_graph(&standard::pp1_bundle(3)).unwrap();
    let (l1, l2) = scroll_classes(3);
    let mut classes = mg.distinct_edge_classes();
    classes.sort();
    let mut expect = vec![l1.clone(), l2.clone(), l1.plus(&l2)];
    expect.sort();
    assert_eq!(classes, expect);
}

fn neg(w: &WeightVector) -> WeightVector {
    WeightVector(w.0.iter().map(|x| -x).collect())
}

/// Tries every bijection between the two weight lists.
fn gkm_by_permutation(left: &[WeightVector], right: &[WeightVector], w: &WeightVector) -> bool {
    let d = left.len();
    let mut perm: Vec<usize> = (0..d).collect();
    let multiple = |a: &WeightVector, b: &WeightVector| -> bool {
        let diff: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
        let pivot = w.0.iter().position(|&x| x != 0).expect("nonzero edge weight");
        if diff[pivot] % w.0[pivot] != 0 {
            return false;
        }
        let k = diff[pivot] / w.0[pivot];
        diff.iter().zip(&w.0).all(|(x, y)| *x == k * y)
    };
    fn next(p: &mut [usize]) -> bool {
        let n = p.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }
    loop {
        if (0..d).all(|i| multiple(&left[i], &right[perm[i]])) {
            return true;
        }
        if !next(&mut perm) {
            return false;
        }
    }
}

#[test]
fn antisymmetry_and_gkm_on_shipped_fans() {
    for (name, _) in shipped_fans() {
        let fan = load_fan(name);
        let mg = build_moment_graph(&fan).unwrap();
        assert!(mg.check_gkm().is_ok(), "{name}");
        for e in mg.edges() {
            assert_eq!(e.weight_at[0], neg(&e.weight_at[1]), "{name}");
            let left = &mg.fixed_point(e.endpoints[0]).dual_basis;
            let right = &mg.fixed_point(e.endpoints[1]).dual_basis;
            assert!(gkm_by_permutation(left, right, &e.weight_at[0]), "{name}");
        }
    }
}

#[test]
fn dual_basis_is_dual() {
    for (name, fan) in shipped_fans() {
        let mg = build_moment_graph(&fan).unwrap();
        for fp in mg.fixed_points() {
            for (j, &ray) in fp.ray_indices.iter().enumerate() {
                let u = mg.ev_weight(fp.cone_index, ray).unwrap();
                for (k, &other) in fp.ray_indices.iter().enumerate() {
                    assert_eq!(u.pair(fan.ray(other)), i64::from(j == k), "{name}");
                }
            }
            for k in 0..fan.n() {
                if fp.position_of(k).is_none() {
                    assert!(mg.ev_weight(fp.cone_index, k).is_none());
                }
            }
            // the weight along each edge is the dual vector of the ray it drops
            for (j, &e) in fp.edges.iter().enumerate() {
                assert_eq!(mg.edge_weight_at(e, fp.cone_index), &fp.dual_basis[j]);
            }
        }
    }
}

#[test]
fn p2_weight_toward_neighbour() {
    let mg = build_moment_graph(&standard::projective_space(2)).unwrap();
    let c01 = mg.fan().cone_index(&[0, 1]).unwrap();
    let c12 = mg.fan().cone_index(&[1, 2]).unwrap();
    let e = mg.edge_between(c01, c12).unwrap();
    // rays (1,0), (0,1): the dual vector of ray 0 is (1,0)
    assert_eq!(mg.edge_weight_at(e, c01), &WeightVector(vec![1, 0]));
    assert_eq!(mg.ev_weight(c01, 0).unwrap(), &WeightVector(vec![1, 0]));
}
