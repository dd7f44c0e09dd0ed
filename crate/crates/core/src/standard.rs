//! Built-in fans used by the tests, the acceptance suite and the shipped
//! `fans/*.json` files.

use crate::fan::Fan;

/// `P^d`: rays `e_1, …, e_d, -(e_1 + … + e_d)`; every d-subset is a cone.
pub fn projective_space(d: usize) -> Fan {
    let mut rays: Vec<Vec<i64>> = (0..d)
        .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
        .collect();
    rays.push(vec![-1; d]);
    let cones = (0..=d)
        .map(|skip| (0..=d).filter(|&i| i != skip).collect())
        .collect();
    Fan::new(d, rays, cones, None).expect("projective space fan")
}

/// Product fan; rays of `a` come first, then rays of `b`.
pub fn product(a: &Fan, b: &Fan) -> Fan {
    let (da, db) = (a.dim(), b.dim());
    let mut rays = Vec::new();
    for r in a.rays() {
        let mut v = r.clone();
        v.extend(std::iter::repeat(0).take(db));
        rays.push(v);
    }
    for r in b.rays() {
        let mut v = vec![0; da];
        v.extend_from_slice(r);
        rays.push(v);
    }
    let mut cones = Vec::new();
    for ca in a.max_cones() {
        for cb in b.max_cones() {
            let mut c = ca.clone();
            c.extend(cb.iter().map(|&i| i + a.n()));
            cones.push(c);
        }
    }
    Fan::new(da + db, rays, cones, None).expect("product fan")
}

pub fn p1_x_p1() -> Fan {
    product(&projective_space(1), &projective_space(1))
}

/// Hirzebruch surface `F_a`: rays `(1,0), (0,1), (-1,a), (0,-1)`.
pub fn hirzebruch(a: i64) -> Fan {
    Fan::new(
        2,
        vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
        vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        None,
    )
    .expect("Hirzebruch fan")
}

/// The `r`-dimensional projective bundle `P(O^{r-2} ⊕ O(1) ⊕ O(1))` over
/// `P^1`, `r >= 3`.
///
/// Rays (0-based): `0 = e_1`, `1 = -e_1 + e_{r-1} + e_r`, `2..=r` are
/// `e_2, …, e_r`, and `r+1 = -(e_2 + … + e_r)`. The primitive collections
/// are `{0, 1}` and `{2, …, r+1}`, so the maximal cones are
/// `{i} ∪ ({2, …, r+1} \ {t})` for `i ∈ {0, 1}`; cone index `(i, t)` is
/// `i * r + (t - 2)`. Ray names are the 1-based labels `Z1, …, Z{r+2}`.
pub fn pp1_bundle(r: usize) -> Fan {
    assert!(r >= 3, "the projective bundle family needs r >= 3");
    let e = |k: usize| -> Vec<i64> { (1..=r).map(|j| i64::from(j == k)).collect() };
    let mut rays = vec![e(1)];
    let mut v2: Vec<i64> = e(1).iter().map(|x| -x).collect();
    v2[r - 2] += 1;
    v2[r - 1] += 1;
    rays.push(v2);
    for k in 2..=r {
        rays.push(e(k));
    }
    let mut last = vec![0i64; r];
    for x in last.iter_mut().skip(1) {
        *x = -1;
    }
    rays.push(last);
    let fiber: Vec<usize> = (2..=r + 1).collect();
    let mut cones = Vec::new();
    for i in 0..2 {
        for &t in &fiber {
            let mut c = vec![i];
            c.extend(fiber.iter().copied().filter(|&s| s != t));
            cones.push(c);
        }
    }
    let names = (1..=r + 2).map(|k| format!("Z{k}")).collect();
    Fan::new(r, rays, cones, Some(names)).expect("projective bundle fan")
}

/// Cone index of `σ_{i,t}` in [`pp1_bundle`], with the 1-based labels
/// `i ∈ {1, 2}` and `t ∈ {3, …, r+2}` (the fiber ray left out).
pub fn pp1_bundle_cone(r: usize, i: usize, t: usize) -> usize {
    assert!((1..=2).contains(&i) && (3..=r + 2).contains(&t));
    (i - 1) * r + (t - 3)
}
