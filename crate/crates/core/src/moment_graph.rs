//! The GKM skeleton of a smooth complete toric variety: torus fixed points
//! (maximal cones), their tangent weights, and the invariant `P^1`s (walls)
//! joining them.
//!
//! Convention: at a fixed point with ordered rays `(v_{i_1}, …, v_{i_d})`
//! and dual basis `u_1, …, u_d` (`⟨u_j, v_{i_k}⟩ = δ_{jk}`), the tangent
//! weight toward the neighbour across the facet omitting `v_{i_j}` is `u_j`.
//! The opposite global sign would only flip `ξ ↦ -ξ`, which leaves every
//! dimensionally admissible invariant unchanged.

use crate::fan::{facet_map, validate, CurveClass, Fan, FanError};
use crate::linalg::{dot_i64, inverse_unimodular};
use crate::rational::{q_int, Q};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MomentGraphError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("wall {0:?} is not shared by exactly two maximal cones")]
    NotAWall(Vec<usize>),
    #[error("wall {0:?} has a singular relation matrix")]
    SingularWall(Vec<usize>),
    #[error("no generic evaluation point found after {0} seeds")]
    NoGenericPoint(u64),
}

/// A character of the torus, as an integer vector in the dual lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn neg(&self) -> Self {
        WeightVector(self.0.iter().map(|x| -x).collect())
    }

    pub fn minus(&self, other: &Self) -> Self {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn pair(&self, v: &[i64]) -> i64 {
        dot_i64(&self.0, v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub cone_index: usize,
    /// Ray indices of the cone, ascending; position `j` below refers to this order.
    pub ray_indices: Vec<usize>,
    pub dual_basis: Vec<WeightVector>,
    /// `neighbors[j]`: cone across the facet omitting `ray_indices[j]`.
    pub neighbors: Vec<usize>,
    /// `edges[j]`: moment edge toward `neighbors[j]`.
    pub edges: Vec<usize>,
}

impl FixedPoint {
    pub fn position_of(&self, ray: usize) -> Option<usize> {
        self.ray_indices.iter().position(|&r| r == ray)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentEdge {
    pub endpoints: [usize; 2],
    pub wall: Vec<usize>,
    /// Ray of each endpoint cone not contained in the wall.
    pub transverse: [usize; 2],
    pub class: CurveClass,
    /// Tangent weight along the edge at each endpoint.
    pub weight_at: [WeightVector; 2],
}

impl MomentEdge {
    pub fn side_of(&self, cone: usize) -> Option<usize> {
        self.endpoints.iter().position(|&c| c == cone)
    }

    pub fn other(&self, cone: usize) -> usize {
        if self.endpoints[0] == cone {
            self.endpoints[1]
        } else {
            self.endpoints[0]
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentGraph {
    fan: Fan,
    fixed_points: Vec<FixedPoint>,
    edges: Vec<MomentEdge>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

/// Builds the skeleton of a validated fan.
pub fn build_moment_graph(fan: &Fan) -> Result<MomentGraph, MomentGraphError> {
    let report = validate(fan);
    if !report.passed {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        return Err(FanError::Invalid(failed.join("; ")).into());
    }
    let mut fixed_points = Vec::with_capacity(fan.max_cones().len());
    for (ci, cone) in fan.max_cones().iter().enumerate() {
        let m: Vec<Vec<i64>> = cone.iter().map(|&i| fan.ray(i).to_vec()).collect();
        let inv = inverse_unimodular(&m).ok_or_else(|| MomentGraphError::SingularWall(cone.clone()))?;
        let d = fan.dim();
        let dual_basis = (0..d)
            .map(|j| WeightVector((0..d).map(|c| inv[c][j]).collect()))
            .collect();
        fixed_points.push(FixedPoint {
            cone_index: ci,
            ray_indices: cone.clone(),
            dual_basis,
            neighbors: vec![usize::MAX; d],
            edges: vec![usize::MAX; d],
        });
    }
    let mut edges = Vec::new();
    let mut edge_lookup = HashMap::new();
    for (wall, cones) in facet_map(fan) {
        let [a, b] = cones[..] else {
            return Err(MomentGraphError::NotAWall(wall));
        };
        let class = wall_class(fan, &fixed_points[a], &fixed_points[b], &wall)?;
        let ta = transverse_ray(&fixed_points[a], &wall);
        let tb = transverse_ray(&fixed_points[b], &wall);
        let pa = fixed_points[a].position_of(ta).expect("transverse ray");
        let pb = fixed_points[b].position_of(tb).expect("transverse ray");
        let wa = fixed_points[a].dual_basis[pa].clone();
        let wb = fixed_points[b].dual_basis[pb].clone();
        let idx = edges.len();
        fixed_points[a].neighbors[pa] = b;
        fixed_points[a].edges[pa] = idx;
        fixed_points[b].neighbors[pb] = a;
        fixed_points[b].edges[pb] = idx;
        edge_lookup.insert((a.min(b), a.max(b)), idx);
        edges.push(MomentEdge {
            endpoints: [a, b],
            wall,
            transverse: [ta, tb],
            class,
            weight_at: [wa, wb],
        });
    }
    Ok(MomentGraph {
        fan: fan.clone(),
        fixed_points,
        edges,
        edge_lookup,
    })
}

fn transverse_ray(fp: &FixedPoint, wall: &[usize]) -> usize {
    *fp.ray_indices
        .iter()
        .find(|r| !wall.contains(r))
        .expect("cone has one ray outside its facet")
}

/// `v_a + v_b + Σ_{i ∈ wall} c_i v_i = 0` solved with the dual basis of the
/// cone containing `v_a`: `c_i = -⟨u_i, v_b⟩`.
fn wall_class(
    fan: &Fan,
    fa: &FixedPoint,
    fb: &FixedPoint,
    wall: &[usize],
) -> Result<CurveClass, MomentGraphError> {
    let a = transverse_ray(fa, wall);
    let b = transverse_ray(fb, wall);
    let vb = fan.ray(b);
    let mut lambda = vec![0i64; fan.n()];
    lambda[a] = 1;
    lambda[b] = 1;
    for (pos, &ray) in fa.ray_indices.iter().enumerate() {
        let c = -fa.dual_basis[pos].pair(vb);
        if ray == a {
            if c != 1 {
                return Err(MomentGraphError::SingularWall(wall.to_vec()));
            }
        } else {
            lambda[ray] = c;
        }
    }
    Ok(CurveClass(lambda))
}

/// Class of the invariant curve of a wall (a facet shared by two cones).
pub fn edge_class(fan: &Fan, wall: &[usize]) -> Result<CurveClass, MomentGraphError> {
    let mut key = wall.to_vec();
    key.sort_unstable();
    let fm = facet_map(fan);
    let cones = fm
        .get(&key)
        .filter(|c| c.len() == 2)
        .ok_or_else(|| MomentGraphError::NotAWall(key.clone()))?;
    let fp = |ci: usize| -> Result<FixedPoint, MomentGraphError> {
        let cone = &fan.max_cones()[ci];
        let m: Vec<Vec<i64>> = cone.iter().map(|&i| fan.ray(i).to_vec()).collect();
        let inv = inverse_unimodular(&m).ok_or_else(|| MomentGraphError::SingularWall(key.clone()))?;
        let d = fan.dim();
        Ok(FixedPoint {
            cone_index: ci,
            ray_indices: cone.clone(),
            dual_basis: (0..d).map(|j| WeightVector((0..d).map(|c| inv[c][j]).collect())).collect(),
            neighbors: Vec::new(),
            edges: Vec::new(),
        })
    };
    wall_class(fan, &fp(cones[0])?, &fp(cones[1])?, &key)
}

impl MomentGraph {
    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn fixed_points(&self) -> &[FixedPoint] {
        &self.fixed_points
    }

    pub fn fixed_point(&self, cone: usize) -> &FixedPoint {
        &self.fixed_points[cone]
    }

    pub fn edges(&self) -> &[MomentEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &MomentEdge {
        &self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Tangent weight at `cone` along moment edge `e`.
    pub fn edge_weight_at(&self, e: usize, cone: usize) -> &WeightVector {
        let edge = &self.edges[e];
        let side = edge.side_of(cone).expect("cone is an endpoint of the edge");
        &edge.weight_at[side]
    }

    /// Weight of `Z_k` restricted to the fixed point `cone`: zero (`None`)
    /// when `k` is not a ray of the cone, otherwise the tangent weight
    /// toward the neighbour across the facet omitting `k`.
    pub fn ev_weight(&self, cone: usize, k: usize) -> Option<&WeightVector> {
        let fp = &self.fixed_points[cone];
        fp.position_of(k).map(|p| &fp.dual_basis[p])
    }

    /// Distinct edge classes, sorted.
    pub fn distinct_edge_classes(&self) -> Vec<CurveClass> {
        let mut v: Vec<CurveClass> = self.edges.iter().map(|e| e.class.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Checks that at both ends of every edge the tangent weights can be
    /// matched so that paired weights differ by integer multiples of the
    /// edge weight. Returns the first offending edge.
    pub fn check_gkm(&self) -> Result<(), usize> {
        for (ei, e) in self.edges.iter().enumerate() {
            let w = &e.weight_at[0];
            let at = |c: usize| self.fixed_points[c].dual_basis.clone();
            let left = at(e.endpoints[0]);
            let right = at(e.endpoints[1]);
            let mut used = vec![false; right.len()];
            if !match_weights(&left, &right, w, 0, &mut used) {
                return Err(ei);
            }
        }
        Ok(())
    }

    /// `Σ_i λ_i v_i = 0` and unit pairing with both transverse divisors.
    pub fn check_edge_classes(&self) -> Result<(), usize> {
        for (ei, e) in self.edges.iter().enumerate() {
            let ok = crate::fan::is_curve_class(&self.fan, &e.class.0).unwrap_or(false)
                && e.class.0[e.transverse[0]] == 1
                && e.class.0[e.transverse[1]] == 1
                && e.weight_at[0] == e.weight_at[1].neg();
            if !ok {
                return Err(ei);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim(),
            "fixed_points": self.fixed_points,
            "edges": self.edges,
        })
    }
}

fn is_multiple_of(diff: &WeightVector, w: &WeightVector) -> bool {
    let Some(i) = w.0.iter().position(|&x| x != 0) else {
        return diff.is_zero();
    };
    if diff.0[i] % w.0[i] != 0 {
        return false;
    }
    let c = diff.0[i] / w.0[i];
    diff.0.iter().zip(&w.0).all(|(a, b)| *a == c * b)
}

fn match_weights(
    left: &[WeightVector],
    right: &[WeightVector],
    w: &WeightVector,
    i: usize,
    used: &mut [bool],
) -> bool {
    if i == left.len() {
        return true;
    }
    for j in 0..right.len() {
        if !used[j] && is_multiple_of(&left[i].minus(&right[j]), w) {
            used[j] = true;
            if match_weights(left, right, w, i + 1, used) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

/// An integer cocharacter `ξ` at which symbolic weights are evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalPoint {
    pub xi: Vec<i64>,
    pub seed: u64,
}

pub const EVAL_RANGE: i64 = 1_000_000;

impl EvalPoint {
    /// Deterministic coordinates in `[-10^6, 10^6]` drawn from `seed`.
    pub fn from_seed(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = (0..dim).map(|_| rng.gen_range(-EVAL_RANGE..=EVAL_RANGE)).collect();
        EvalPoint { xi, seed }
    }

    /// First point at `seed, seed+1, …` that is generic for `mg`: every
    /// tangent weight and every difference of two tangent weights at a
    /// common fixed point is nonzero.
    pub fn generic(mg: &MomentGraph, seed: u64) -> Result<Self, MomentGraphError> {
        const MAX_TRIES: u64 = 1000;
        for k in 0..MAX_TRIES {
            let p = EvalPoint::from_seed(mg.dim(), seed.wrapping_add(k));
            if p.is_generic(mg) {
                return Ok(p);
            }
        }
        Err(MomentGraphError::NoGenericPoint(MAX_TRIES))
    }

    pub fn is_generic(&self, mg: &MomentGraph) -> bool {
        mg.fixed_points().iter().all(|fp| {
            let vals: Vec<i64> = fp.dual_basis.iter().map(|w| w.pair(&self.xi)).collect();
            vals.iter().all(|&v| v != 0)
                && (0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| vals[i] != vals[j]))
        })
    }
}

/// `⟨w, ξ⟩` as an exact rational; `None` stands for the zero weight.
pub fn evaluate(w: Option<&WeightVector>, p: &EvalPoint) -> Q {
    match w {
        None => Q::zero(),
        Some(w) => q_int(w.pair(&p.xi)),
    }
}
