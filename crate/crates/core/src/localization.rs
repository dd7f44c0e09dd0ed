//! Closed-form fixed-point contributions, evaluated at an [`EvalPoint`].
//!
//! A decorated graph contributes
//! `(1/|A_Γ|) · Π(insertion weights) · Π_e Λ(e) · Π_v ω(v)`, where the vertex
//! factors come from integrating the inverse normal Euler class over the
//! Deligne–Mumford factors of `M_Γ`. For `β = P.D.(pt)` the stable vertex of
//! a simple graph also carries the pulled-back point class.

use crate::fan::{CohomClass, CohomMonomial};
use crate::graph_enum::{automorphism_order, is_simple, DecoratedGraph, GraphEdge};
use crate::moment_graph::{EvalPoint, MomentGraph};
use crate::psi::{compositions, fiber_point_integral};
use crate::rational::{factorial, pow_i, q_big, q_int, Q};
use num_traits::{One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LocalizationError {
    /// A denominator vanished at the evaluation point; retry with another.
    #[error("evaluation point is degenerate for this graph")]
    Degenerate,
    #[error("graph has no unique stable vertex with singly-marked branches")]
    NotSimple,
}

/// How the stable vertex of a simple graph is integrated against the
/// pulled-back point class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootIntegral {
    /// Exact fiber integral of the forgetful map, by string and dilaton
    /// recursion.
    #[default]
    Fiber,
    /// The multinomial closed form that treats pulled-back cotangent lines
    /// as cotangent lines upstairs.
    ClosedForm,
}

/// Which class enters the exponents `λ_{i_j}` of the edge factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeClassConvention {
    /// `h` times the primitive edge class.
    #[default]
    Total,
    /// The primitive edge class; kept only to show it is wrong.
    Primitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    pub root_integral: RootIntegral,
    pub edge_class: EdgeClassConvention,
    /// Evaluate every edge factor from its higher-indexed endpoint instead
    /// of the lower one.
    pub flip_edges: bool,
}

/// Which class is integrated over the Deligne–Mumford space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `β = 1`: sum over all graphs.
    Classical,
    /// `β = P.D.(pt)`: sum over simple graphs, `m >= 3`.
    PointClass,
}

/// Tangent weights of a moment graph evaluated at one point.
#[derive(Debug, Clone)]
pub struct Weights {
    point: EvalPoint,
    tangent: Vec<Vec<Q>>,
    total: Vec<Q>,
}

impl Weights {
    pub fn new(mg: &MomentGraph, point: &EvalPoint) -> Self {
        let tangent: Vec<Vec<Q>> = mg
            .fixed_points()
            .iter()
            .map(|fp| fp.dual_basis.iter().map(|w| q_int(w.pair(&point.xi))).collect())
            .collect();
        let total = tangent
            .iter()
            .map(|ws| ws.iter().fold(Q::one(), |acc, w| acc * w))
            .collect();
        Weights {
            point: point.clone(),
            tangent,
            total,
        }
    }

    pub fn point(&self) -> &EvalPoint {
        &self.point
    }

    /// Evaluated tangent weights at a fixed point, in ray-position order.
    pub fn tangent(&self, cone: usize) -> &[Q] {
        &self.tangent[cone]
    }

    /// `ω_total^σ`: product of the tangent weights at `σ`.
    pub fn total(&self, cone: usize) -> &Q {
        &self.total[cone]
    }

    /// Tangent weight at `cone` along moment edge `e`.
    pub fn along(&self, mg: &MomentGraph, e: usize, cone: usize) -> Q {
        let edge = mg.edge(e);
        let side = edge.side_of(cone).expect("cone is an endpoint");
        let pos = mg
            .fixed_point(cone)
            .position_of(edge.transverse[side])
            .expect("transverse ray lies in the cone");
        self.tangent[cone][pos].clone()
    }

    /// Restriction of `Z^l` to the fixed point `cone`.
    pub fn monomial_at(&self, mg: &MomentGraph, m: &CohomMonomial, cone: usize) -> Q {
        let fp = mg.fixed_point(cone);
        let mut acc = Q::one();
        for (k, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            match fp.position_of(k) {
                None => return Q::zero(),
                Some(p) => acc *= num_traits::pow(self.tangent[cone][p].clone(), e as usize),
            }
        }
        acc
    }

    pub fn class_at(&self, mg: &MomentGraph, c: &CohomClass, cone: usize) -> Q {
        c.terms()
            .fold(Q::zero(), |acc, (m, x)| acc + x * self.monomial_at(mg, m, cone))
    }
}

/// Atiyah–Bott sum `Σ_σ c|_σ / ω_total^σ`, which is `∫_X c` when `c` has
/// top degree.
pub fn integrate(mg: &MomentGraph, w: &Weights, c: &CohomClass) -> Q {
    (0..mg.fixed_points().len()).fold(Q::zero(), |acc, s| {
        acc + w.class_at(mg, c, s) / w.total(s)
    })
}

/// Edge factor `Λ(e)` evaluated from the endpoint `sigma`.
pub fn lambda_edge(
    mg: &MomentGraph,
    w: &Weights,
    ge: &GraphEdge,
    sigma: usize,
    convention: EdgeClassConvention,
) -> Result<Q, LocalizationError> {
    let edge = mg.edge(ge.moment_edge);
    let side = edge.side_of(sigma).expect("sigma is an endpoint");
    let h = i64::from(ge.multiplicity);
    let hq = q_int(h);
    let wd = w.along(mg, ge.moment_edge, sigma);
    if wd.is_zero() {
        return Err(LocalizationError::Degenerate);
    }
    let hf = q_big(factorial(h as u64));
    let sign = if h % 2 == 0 { Q::one() } else { -Q::one() };
    let mut value = sign * pow_i(&hq, 2 * h).expect("h > 0")
        / (&hf * &hf * pow_i(&wd, 2 * h).expect("nonzero"));
    let fp = mg.fixed_point(sigma);
    let step = &wd / &hq;
    for (p, &ray) in fp.ray_indices.iter().enumerate() {
        if ray == edge.transverse[side] {
            continue;
        }
        let omega = &w.tangent(sigma)[p];
        let lam = match convention {
            EdgeClassConvention::Total => h * edge.class.0[ray],
            EdgeClassConvention::Primitive => edge.class.0[ray],
        };
        let factor = |k: i64| omega - &step * q_int(k);
        if lam >= 0 {
            for k in 0..=lam {
                let f = factor(k);
                if f.is_zero() {
                    return Err(LocalizationError::Degenerate);
                }
                value /= f;
            }
        } else {
            for k in lam + 1..=-1 {
                value *= factor(k);
            }
        }
    }
    Ok(value)
}

/// `(ω_total^σ)^{t-1} · (Σ_i 1/ω_{F_i})^{t+s-r-3} / Π_i ω_{F_i}`.
pub fn vertex_factor(total_sigma: &Q, flags: &[Q], s: usize, r: usize) -> Result<Q, LocalizationError> {
    let t = flags.len();
    let mut prod = Q::one();
    let mut inv_sum = Q::zero();
    for f in flags {
        if f.is_zero() {
            return Err(LocalizationError::Degenerate);
        }
        prod *= f;
        inv_sum += f.recip();
    }
    let e = t as i64 + s as i64 - r as i64 - 3;
    let sigma_part = pow_i(total_sigma, t as i64 - 1).ok_or(LocalizationError::Degenerate)?;
    let f_part = pow_i(&inv_sum, e).ok_or(LocalizationError::Degenerate)?;
    Ok(sigma_part * f_part / prod)
}

/// Flag at the stable vertex: its weight and whether its branch holds a
/// mark.
#[derive(Debug, Clone)]
pub struct RootFlag {
    pub weight: Q,
    pub marked: bool,
}

/// Vertex factor of the stable vertex against the pulled-back point class of
/// `M̄_{0,m}`; `s` marks sit on the vertex itself.
pub fn root_factor(
    total_sigma: &Q,
    flags: &[RootFlag],
    s: usize,
    m: usize,
    method: RootIntegral,
) -> Result<Q, LocalizationError> {
    let t = flags.len();
    let mt = t + s;
    assert!(mt >= m && m >= 3, "stable vertex must see every mark");
    let k = mt - m;
    if flags.iter().any(|f| f.weight.is_zero()) {
        return Err(LocalizationError::Degenerate);
    }
    let sigma_part = pow_i(total_sigma, t as i64 - 1).ok_or(LocalizationError::Degenerate)?;
    let integral = match method {
        RootIntegral::Fiber => {
            let mut acc = Q::zero();
            for a in compositions(k, t) {
                let mut old = vec![0u32; s];
                let mut extra = Vec::new();
                let mut term = Q::one();
                for (f, &ai) in flags.iter().zip(&a) {
                    if f.marked {
                        old.push(ai);
                    } else {
                        extra.push(ai);
                    }
                    term /= pow_i(&f.weight, 1 + i64::from(ai)).expect("nonzero");
                }
                let g = fiber_point_integral(&old, &extra);
                if !g.is_zero() {
                    acc += q_big(g) * term;
                }
            }
            acc
        }
        RootIntegral::ClosedForm => {
            let coeff = Q::new(
                factorial(mt as u64 - 3),
                factorial(m as u64 - 3) * factorial(k as u64),
            );
            let weights: Vec<Q> = flags.iter().map(|f| f.weight.clone()).collect();
            coeff * vertex_factor(&Q::one(), &weights, s, m - 3)?
        }
    };
    Ok(sigma_part * integral)
}

/// Contribution of one decorated graph with one insertion class per mark.
pub fn graph_contribution(
    mg: &MomentGraph,
    w: &Weights,
    g: &DecoratedGraph,
    insertions: &[CohomClass],
    mode: Mode,
    opts: &EngineOptions,
) -> Result<Q, LocalizationError> {
    assert_eq!(insertions.len(), g.mark_count(), "one insertion per mark");
    let mut value = Q::one();
    for (vi, v) in g.vertices.iter().enumerate() {
        for &mk in &v.marks {
            let x = w.class_at(mg, &insertions[mk], g.vertices[vi].fixed_point);
            if x.is_zero() {
                return Ok(Q::zero());
            }
            value *= x;
        }
    }
    for ge in &g.edges {
        let ends = ge.ends.map(|i| g.vertices[i].fixed_point);
        let sigma = if opts.flip_edges {
            ends[0].max(ends[1])
        } else {
            ends[0].min(ends[1])
        };
        value *= lambda_edge(mg, w, ge, sigma, opts.edge_class)?;
    }
    let root = match mode {
        Mode::Classical => None,
        Mode::PointClass => {
            let view = is_simple(g).ok_or(LocalizationError::NotSimple)?;
            Some(view)
        }
    };
    for (vi, v) in g.vertices.iter().enumerate() {
        let sigma = v.fixed_point;
        let inc = g.incident(vi);
        let flag_weight = |e: usize| {
            let ge = &g.edges[e];
            w.along(mg, ge.moment_edge, sigma) / q_int(i64::from(ge.multiplicity))
        };
        let factor = match &root {
            Some(view) if view.root == vi => {
                let flags: Vec<RootFlag> = view
                    .branches
                    .iter()
                    .map(|b| RootFlag {
                        weight: flag_weight(b.edge),
                        marked: b.marks == 1,
                    })
                    .collect();
                root_factor(w.total(sigma), &flags, v.marks.len(), g.mark_count(), opts.root_integral)?
            }
            _ => {
                let flags: Vec<Q> = inc.iter().map(|&e| flag_weight(e)).collect();
                vertex_factor(w.total(sigma), &flags, v.marks.len(), 0)?
            }
        };
        value *= factor;
    }
    Ok(value / q_big(automorphism_order(g)))
}
