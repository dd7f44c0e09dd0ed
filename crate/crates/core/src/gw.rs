//! Genus-zero invariants `Φ^{A}_{0,m}(β; γ_1, …, γ_m)` as exact rationals.
//!
//! `β` is `1`, a top monomial `e(E) = Π ψ_i^{d_i}` pulled back from
//! `M̄_{0,m}`, or the point class. Every graph sum is evaluated at two
//! independent generic points and the results must agree exactly.

use crate::fan::{is_curve_class, CohomClass, CurveClass, Fan};
use crate::graph_enum::{enumerate_trees, markings, DecoratedGraph, EnumError, EnumOptions};
use crate::localization::{graph_contribution, integrate, EngineOptions, LocalizationError, Mode, Weights};
use crate::moment_graph::{EvalPoint, MomentGraph, MomentGraphError};
use crate::psi::{psi_intersection, PsiError};
use crate::rational::Q;
use num_traits::Zero;
use rayon::prelude::*;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GwError {
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error(transparent)]
    Psi(#[from] PsiError),
    #[error(transparent)]
    MomentGraph(#[from] MomentGraphError),
    #[error("class has length {found}, expected {expected}")]
    ClassLength { expected: usize, found: usize },
    #[error("vector is not a curve class: Σ λ_i v_i ≠ 0")]
    NotACurveClass,
    #[error("insertion {0} is not homogeneous")]
    Inhomogeneous(usize),
    #[error("insertion {index} is written in {found} divisors, expected {expected}")]
    InsertionWidth { index: usize, expected: usize, found: usize },
    #[error("no usable evaluation point after {0} attempts")]
    Degenerate(u32),
    #[error("evaluation points disagree: {first} vs {second}")]
    Mismatch { first: String, second: String },
}

/// The class `β` on `M̄_{0,m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Twist {
    Classical,
    /// `Π ψ_i^{d_i}` with `Σ d_i = m - 3`.
    Psi(Vec<u32>),
    /// The Poincaré dual of a point.
    PointClass,
}

#[derive(Debug, Clone)]
pub struct InvariantRequest {
    pub class: CurveClass,
    pub insertions: Vec<CohomClass>,
    pub twist: Twist,
    pub seed: u64,
    pub check_independence: bool,
    pub trace: bool,
    /// Run the graph sum even when the dimension count says it vanishes.
    /// Below the expected dimension the sum is exactly 0; above it the
    /// equivariant sum is a nonzero polynomial in the cocharacter, which the
    /// two-point check reports as a mismatch.
    pub force_graph_sum: bool,
    pub enumeration: EnumOptions,
    pub engine: EngineOptions,
}

impl InvariantRequest {
    pub fn new(class: CurveClass, insertions: Vec<CohomClass>, twist: Twist) -> Self {
        InvariantRequest {
            class,
            insertions,
            twist,
            seed: 0,
            check_independence: true,
            trace: false,
            force_graph_sum: false,
            enumeration: EnumOptions::default(),
            engine: EngineOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvariantResult {
    pub value: Q,
    /// Graphs in the sum (after dimension and support filtering).
    pub graph_count: usize,
    pub eval_points: Vec<EvalPoint>,
    pub dimension_ok: bool,
    pub elapsed: Duration,
    /// `(graph key, contribution)` at the first point, when requested.
    pub trace: Vec<(String, Q)>,
}

/// `Σ codim γ_j + Σ d_i = dim X + ⟨c_1, A⟩ + m - 3`.
pub fn virtual_dim_ok(fan: &Fan, a: &CurveClass, insertions: &[CohomClass], psi_rank: usize) -> Result<bool, GwError> {
    let mut codim = 0usize;
    for (i, c) in insertions.iter().enumerate() {
        codim += c.homogeneous_degree().ok_or(GwError::Inhomogeneous(i))? as usize;
    }
    let lhs = (codim + psi_rank) as i64;
    let rhs = fan.dim() as i64 + a.c1_degree() + insertions.len() as i64 - 3;
    Ok(lhs == rhs)
}

fn check_request(mg: &MomentGraph, req: &InvariantRequest) -> Result<(), GwError> {
    let fan = mg.fan();
    if req.class.len() != fan.n() {
        return Err(GwError::ClassLength {
            expected: fan.n(),
            found: req.class.len(),
        });
    }
    if !is_curve_class(fan, &req.class.0).unwrap_or(false) {
        return Err(GwError::NotACurveClass);
    }
    for (i, c) in req.insertions.iter().enumerate() {
        if let Some(w) = c.width() {
            if w != fan.n() {
                return Err(GwError::InsertionWidth {
                    index: i,
                    expected: fan.n(),
                    found: w,
                });
            }
        }
        c.homogeneous_degree().ok_or(GwError::Inhomogeneous(i))?;
    }
    let m = req.insertions.len();
    match &req.twist {
        Twist::Classical => {}
        Twist::Psi(d) => {
            psi_intersection(m, d)?;
        }
        Twist::PointClass => {
            if m < 3 {
                return Err(PsiError::TooFewPoints(m).into());
            }
        }
    }
    Ok(())
}

/// Seed of the second, independent evaluation point.
fn second_seed(seed: u64) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const MAX_RESTARTS: u32 = 64;

/// Runs `f` at the first generic point from `seed` on that does not hit a
/// zero denominator; a degenerate point restarts the whole computation at
/// the next seed.
pub fn at_generic_point<T>(
    mg: &MomentGraph,
    seed: u64,
    avoid: Option<&EvalPoint>,
    mut f: impl FnMut(&Weights) -> Result<T, LocalizationError>,
) -> Result<(T, EvalPoint), GwError> {
    let mut s = seed;
    for _ in 0..MAX_RESTARTS {
        let p = EvalPoint::generic(mg, s)?;
        s = p.seed.wrapping_add(1);
        if avoid.is_some_and(|q| q.xi == p.xi) {
            continue;
        }
        match f(&Weights::new(mg, &p)) {
            Ok(v) => return Ok((v, p)),
            Err(LocalizationError::Degenerate) => continue,
            Err(LocalizationError::NotSimple) => unreachable!("only simple graphs are summed"),
        }
    }
    Err(GwError::Degenerate(MAX_RESTARTS))
}

/// Evaluates a rational-valued computation at two independent points and
/// insists on equality.
fn twice(
    mg: &MomentGraph,
    seed: u64,
    check: bool,
    f: impl Fn(&Weights) -> Result<Q, LocalizationError>,
) -> Result<(Q, Vec<EvalPoint>), GwError> {
    let (v1, p1) = at_generic_point(mg, seed, None, &f)?;
    if !check {
        return Ok((v1, vec![p1]));
    }
    let (v2, p2) = at_generic_point(mg, second_seed(seed), Some(&p1), &f)?;
    if v1 != v2 {
        return Err(GwError::Mismatch {
            first: crate::rational::format_q(&v1),
            second: crate::rational::format_q(&v2),
        });
    }
    Ok((v1, vec![p1, p2]))
}

/// `∫_X Π γ_j`, zero unless the product has top degree.
pub fn integrate_product(mg: &MomentGraph, classes: &[CohomClass], seed: u64, check: bool) -> Result<Q, GwError> {
    let prod = classes
        .iter()
        .fold(CohomClass::one(mg.fan().n()), |acc, c| acc.times(c));
    if prod.homogeneous_degree() != Some(mg.dim() as u32) || prod.is_zero() {
        return Ok(Q::zero());
    }
    Ok(twice(mg, seed, check, |w| Ok(integrate(mg, w, &prod)))?.0)
}

/// Support of each insertion: fixed points where its restriction can be
/// nonzero.
pub fn insertion_support(mg: &MomentGraph, insertions: &[CohomClass]) -> Vec<Vec<bool>> {
    insertions
        .iter()
        .map(|c| {
            mg.fixed_points()
                .iter()
                .map(|fp| {
                    c.terms().any(|(mono, _)| {
                        mono.0
                            .iter()
                            .enumerate()
                            .all(|(k, &e)| e == 0 || fp.position_of(k).is_some())
                    })
                })
                .collect()
        })
        .collect()
}

/// Every decorated graph that can contribute to the request, sorted by key.
pub fn contributing_graphs(mg: &MomentGraph, req: &InvariantRequest) -> Result<Vec<DecoratedGraph>, GwError> {
    let m = req.insertions.len();
    let simple_only = effective_mode(req) == Mode::PointClass;
    let mut opts = req.enumeration.clone();
    opts.mark_support = Some(insertion_support(mg, &req.insertions));
    let trees = enumerate_trees(mg, &req.class, &opts)?;
    let per_tree: Vec<Vec<DecoratedGraph>> = trees
        .par_iter()
        .map(|t| markings(t, m, simple_only, &opts))
        .collect::<Result<_, _>>()?;
    let mut graphs: Vec<DecoratedGraph> = per_tree.into_iter().flatten().collect();
    if graphs.len() > opts.max_graphs {
        return Err(EnumError::Budget {
            what: "decorated graphs",
            limit: opts.max_graphs,
        }
        .into());
    }
    graphs.sort_by(|a, b| a.key().cmp(b.key()));
    Ok(graphs)
}

/// At three marks the point class of `M̄_{0,3}` is the fundamental class.
fn effective_mode(req: &InvariantRequest) -> Mode {
    match req.twist {
        Twist::Classical => Mode::Classical,
        _ if req.insertions.len() == 3 => Mode::Classical,
        _ => Mode::PointClass,
    }
}

fn psi_rank(req: &InvariantRequest) -> usize {
    match req.twist {
        Twist::Classical => 0,
        _ => req.insertions.len().saturating_sub(3),
    }
}

pub fn gw_invariant(mg: &MomentGraph, req: &InvariantRequest) -> Result<InvariantResult, GwError> {
    let start = Instant::now();
    check_request(mg, req)?;
    let m = req.insertions.len();
    let scale = match &req.twist {
        Twist::Psi(d) => psi_intersection(m, d)?,
        _ => Q::from_integer(1.into()),
    };
    let dimension_ok = virtual_dim_ok(mg.fan(), &req.class, &req.insertions, psi_rank(req))?;
    let mut result = InvariantResult {
        value: Q::zero(),
        graph_count: 0,
        eval_points: Vec::new(),
        dimension_ok,
        elapsed: Duration::ZERO,
        trace: Vec::new(),
    };
    if (!dimension_ok && !req.force_graph_sum) || req.insertions.iter().any(|c| c.is_zero()) {
        result.elapsed = start.elapsed();
        return Ok(result);
    }
    if req.class.is_zero() {
        // constant maps: M̄_{0,m}(X, 0) = M̄_{0,m} × X
        let value = match effective_mode(req) {
            Mode::Classical if m != 3 => Q::zero(),
            _ => integrate_product(mg, &req.insertions, req.seed, req.check_independence)?,
        };
        result.value = value * scale;
        result.elapsed = start.elapsed();
        return Ok(result);
    }
    let graphs = contributing_graphs(mg, req)?;
    let mode = effective_mode(req);
    let sum = |w: &Weights| -> Result<Q, LocalizationError> {
        graphs
            .par_iter()
            .map(|g| graph_contribution(mg, w, g, &req.insertions, mode, &req.engine))
            .try_reduce(Q::zero, |a, b| Ok(a + b))
    };
    let (value, points) = twice(mg, req.seed, req.check_independence, sum)?;
    if req.trace {
        let w = Weights::new(mg, &points[0]);
        result.trace = graphs
            .iter()
            .map(|g| {
                let c = graph_contribution(mg, &w, g, &req.insertions, mode, &req.engine)
                    .expect("point already used successfully");
                (g.key().to_string(), c)
            })
            .collect();
    }
    result.value = value * scale;
    result.graph_count = graphs.len();
    result.eval_points = points;
    result.elapsed = start.elapsed();
    Ok(result)
}

/// `Φ(P.D.(pt); γ_1, …, γ_m)`, computed with the twist `Π ψ_i^{d_i}` and
/// divided by `∫ Π ψ_i^{d_i}`. The default twist is `ψ_1^{m-3}`.
pub fn pd_point_invariant(
    mg: &MomentGraph,
    class: &CurveClass,
    insertions: &[CohomClass],
    dvec: Option<Vec<u32>>,
    seed: u64,
) -> Result<Q, GwError> {
    let m = insertions.len();
    if m < 3 {
        return Err(PsiError::TooFewPoints(m).into());
    }
    let d = dvec.unwrap_or_else(|| {
        let mut d = vec![0; m];
        d[0] = (m - 3) as u32;
        d
    });
    let norm = psi_intersection(m, &d)?;
    let mut req = InvariantRequest::new(class.clone(), insertions.to_vec(), Twist::Psi(d));
    req.seed = seed;
    Ok(gw_invariant(mg, &req)?.value / norm)
}
