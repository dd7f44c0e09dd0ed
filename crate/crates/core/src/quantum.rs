//! Multiple quantum products
//! `γ_1 ⋆ ⋯ ⋆ γ_r = Σ_A Σ_i Φ^A(P.D.(pt); γ_1, …, γ_r, δ_i) δ_i^∨ q^A`,
//! truncated to a box of curve classes, and coefficientwise relation checks.

use crate::cache::InvariantCache;
use crate::fan::{CohomClass, CohomMonomial, CurveClass};
use crate::graph_enum::{EnumError, EnumOptions, Effectivity};
use crate::gw::{at_generic_point, gw_invariant, GwError, InvariantRequest, Twist};
use crate::linalg::{independent_rows, inverse, is_identity, mat_mul};
use crate::localization::{integrate, EngineOptions};
use crate::moment_graph::MomentGraph;
use crate::rational::{format_q, Q};
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum QuantumError {
    #[error(transparent)]
    Gw(#[from] GwError),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("pairing is inconsistent: {0}")]
    Pairing(String),
    #[error("factor {0} is not homogeneous")]
    Inhomogeneous(usize),
    #[error("a product needs at least two factors")]
    TooFewFactors,
    #[error("{found} caps given for {expected} generators")]
    Caps { expected: usize, found: usize },
    #[error("generator {0} has the wrong length")]
    GeneratorLength(usize),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// Degree-`p` part of the pairing. `gram[i][j] = ∫ basis[i] · complement[j]`
/// where `complement` is the basis in degree `dim - p`.
#[derive(Debug, Clone)]
pub struct DegreePiece {
    pub degree: u32,
    pub basis: Vec<CohomMonomial>,
    pub gram: Vec<Vec<Q>>,
    pub gram_inverse: Vec<Vec<Q>>,
    /// `dual[i]`, written in the complementary basis, with `∫ basis[i] · dual[j] = δ_ij`.
    pub dual: Vec<CohomClass>,
}

#[derive(Debug, Clone)]
pub struct PairingTable {
    dim: u32,
    pieces: Vec<DegreePiece>,
    top: HashMap<CohomMonomial, Q>,
}

impl PairingTable {
    pub fn pieces(&self) -> &[DegreePiece] {
        &self.pieces
    }

    pub fn piece(&self, degree: u32) -> Option<&DegreePiece> {
        self.pieces.get(degree as usize)
    }

    pub fn total_rank(&self) -> usize {
        self.pieces.iter().map(|p| p.basis.len()).sum()
    }

    /// `∫_X c`; zero outside top degree.
    pub fn integral(&self, c: &CohomClass) -> Q {
        c.terms().fold(Q::zero(), |acc, (m, x)| {
            if m.degree() == self.dim {
                acc + x * self.top.get(m).expect("all top monomials are tabulated")
            } else {
                acc
            }
        })
    }

    /// Coordinates of a homogeneous class in the basis of its degree.
    pub fn coordinates(&self, c: &CohomClass) -> Option<(u32, Vec<Q>)> {
        let p = c.homogeneous_degree()?;
        let piece = self.piece(p)?;
        Some((p, piece.dual.iter().map(|d| self.integral(&c.times(d))).collect()))
    }

    /// Normal form: the class rewritten in the basis monomials.
    pub fn reduce(&self, c: &CohomClass) -> Option<CohomClass> {
        if c.is_zero() {
            return Some(CohomClass::zero());
        }
        let (p, coords) = self.coordinates(c)?;
        let mut out = CohomClass::zero();
        for (m, x) in self.piece(p)?.basis.iter().zip(coords) {
            out.add_term(m.clone(), x);
        }
        Some(out)
    }

    pub fn check_inverses(&self) -> bool {
        self.pieces
            .iter()
            .all(|p| is_identity(&mat_mul(&p.gram, &p.gram_inverse)))
    }
}

/// `∫_X Z^l`, checked at two evaluation points.
pub fn intersection_number(mg: &MomentGraph, monomial: &CohomMonomial, seed: u64) -> Result<Q, GwError> {
    crate::gw::integrate_product(mg, &[CohomClass::monomial(monomial.clone())], seed, true)
}

fn top_integrals(mg: &MomentGraph, seed: u64) -> Result<HashMap<CohomMonomial, Q>, QuantumError> {
    let monos = CohomMonomial::all_of_degree(mg.fan().n(), mg.dim() as u32);
    let eval = |w: &crate::localization::Weights| {
        Ok(monos
            .iter()
            .map(|m| integrate(mg, w, &CohomClass::monomial(m.clone())))
            .collect::<Vec<Q>>())
    };
    let (v1, p1) = at_generic_point(mg, seed, None, eval)?;
    let (v2, _) = at_generic_point(mg, seed.wrapping_add(0x5151_5151), Some(&p1), eval)?;
    if v1 != v2 {
        return Err(QuantumError::Pairing("intersection numbers depend on the evaluation point".into()));
    }
    Ok(monos.into_iter().zip(v1).collect())
}

pub fn build_pairing(mg: &MomentGraph, seed: u64) -> Result<PairingTable, QuantumError> {
    let n = mg.fan().n();
    let d = mg.dim() as u32;
    let top = top_integrals(mg, seed)?;
    let pair = |a: &CohomMonomial, b: &CohomMonomial| top[&a.times(b)].clone();
    let mut bases: Vec<Vec<CohomMonomial>> = Vec::new();
    for p in 0..=d {
        let rows_m = CohomMonomial::all_of_degree(n, p);
        let cols_m = CohomMonomial::all_of_degree(n, d - p);
        let rows: Vec<Vec<Q>> = rows_m
            .iter()
            .map(|a| cols_m.iter().map(|b| pair(a, b)).collect())
            .collect();
        let picked = independent_rows(&rows);
        bases.push(picked.into_iter().map(|i| rows_m[i].clone()).collect());
    }
    let mut pieces = Vec::new();
    for p in 0..=d {
        let basis = bases[p as usize].clone();
        let comp = &bases[(d - p) as usize];
        if basis.len() != comp.len() {
            return Err(QuantumError::Pairing(format!(
                "degree {p} has rank {} but degree {} has rank {}",
                basis.len(),
                d - p,
                comp.len()
            )));
        }
        let gram: Vec<Vec<Q>> = basis
            .iter()
            .map(|a| comp.iter().map(|b| pair(a, b)).collect())
            .collect();
        let gram_inverse = inverse(&gram)
            .ok_or_else(|| QuantumError::Pairing(format!("singular Gram matrix in degree {p}")))?;
        let dual = (0..basis.len())
            .map(|j| {
                let mut c = CohomClass::zero();
                for (k, b) in comp.iter().enumerate() {
                    c.add_term(b.clone(), gram_inverse[k][j].clone());
                }
                c
            })
            .collect();
        pieces.push(DegreePiece {
            degree: p,
            basis,
            gram,
            gram_inverse,
            dual,
        });
    }
    let table = PairingTable { dim: d, pieces, top };
    let euler = mg.fixed_points().len();
    if table.total_rank() != euler {
        return Err(QuantumError::Pairing(format!(
            "total rank {} differs from the Euler characteristic {euler}",
            table.total_rank()
        )));
    }
    Ok(table)
}

/// Edge classes that are not sums of two or more edge classes, ordered by
/// `⟨c_1, ·⟩` and then lexicographically.
pub fn default_generators(mg: &MomentGraph) -> Result<Vec<CurveClass>, EnumError> {
    let mut eff = Effectivity::new(mg)?;
    let mut gens: Vec<CurveClass> = eff
        .classes()
        .to_vec()
        .into_iter()
        .filter(|c| !eff.is_reducible(c))
        .collect();
    gens.sort_by(|a, b| (a.c1_degree(), &a.0).cmp(&(b.c1_degree(), &b.0)));
    Ok(gens)
}

/// All `Σ a_i g_i` with `0 <= a_i <= caps[i]`, deduplicated and sorted.
pub fn enumerate_effective(generators: &[CurveClass], caps: &[u32], n: usize) -> Result<Vec<CurveClass>, QuantumError> {
    if caps.len() != generators.len() {
        return Err(QuantumError::Caps {
            expected: generators.len(),
            found: caps.len(),
        });
    }
    if let Some(i) = generators.iter().position(|g| g.len() != n) {
        return Err(QuantumError::GeneratorLength(i));
    }
    let mut out = BTreeSet::new();
    let mut choice = vec![0u32; caps.len()];
    loop {
        let mut c = CurveClass::zero(n);
        for (g, &a) in generators.iter().zip(&choice) {
            c = c.plus(&g.scaled(i64::from(a)));
        }
        out.insert(c);
        let mut i = 0;
        while i < caps.len() {
            choice[i] += 1;
            if choice[i] <= caps[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == caps.len() {
            break;
        }
    }
    Ok(out.into_iter().collect())
}

/// `Σ c · δ · q^A` keyed by `(A, δ)` with `δ` a basis monomial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantumPoly {
    terms: BTreeMap<(CurveClass, CohomMonomial), Q>,
}

impl QuantumPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, a: CurveClass, m: CohomMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (a, m);
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_class(&mut self, a: &CurveClass, c: &CohomClass, scale: &Q) {
        for (m, x) in c.terms() {
            self.add(a.clone(), m.clone(), x * scale);
        }
    }

    pub fn get(&self, a: &CurveClass, m: &CohomMonomial) -> Q {
        self.terms.get(&(a.clone(), m.clone())).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(CurveClass, CohomMonomial), &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Part supported on class `a`, as a cohomology class.
    pub fn coefficient_of(&self, a: &CurveClass) -> CohomClass {
        let mut c = CohomClass::zero();
        for ((b, m), x) in &self.terms {
            if b == a {
                c.add_term(m.clone(), x.clone());
            }
        }
        c
    }

    pub fn classes(&self) -> BTreeSet<CurveClass> {
        self.terms.keys().map(|(a, _)| a.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|((a, m), x)| {
                    serde_json::json!({
                        "class": a.0,
                        "monomial": m.0,
                        "coefficient": format_q(x),
                    })
                })
                .collect(),
        )
    }
}

impl fmt::Display for QuantumPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, m), x)| format!("{}*{}*q^{}", format_q(x), m, a))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One summand `coeff · q^shift · (γ_1 ⋆ ⋯ ⋆ γ_k)`. With one factor the
/// summand is the class itself; with none it is the unit.
#[derive(Debug, Clone)]
pub struct RelationTerm {
    pub coeff: Q,
    pub shift: CurveClass,
    pub factors: Vec<CohomClass>,
}

#[derive(Debug, Clone)]
pub struct Relation {
    pub lhs: Vec<RelationTerm>,
    pub rhs: Vec<RelationTerm>,
}

#[derive(Debug, Clone)]
pub struct CoefficientMismatch {
    pub class: CurveClass,
    pub monomial: CohomMonomial,
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Debug, Clone)]
pub struct RelationReport {
    pub passed: bool,
    pub classes: Vec<CurveClass>,
    pub compared: usize,
    pub mismatches: Vec<CoefficientMismatch>,
    pub lhs: QuantumPoly,
    pub rhs: QuantumPoly,
}

impl RelationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "passed": self.passed,
            "classes": self.classes.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
            "compared": self.compared,
            "mismatches": self.mismatches.iter().map(|m| serde_json::json!({
                "class": m.class.0,
                "monomial": m.monomial.0,
                "lhs": format_q(&m.lhs),
                "rhs": format_q(&m.rhs),
            })).collect::<Vec<_>>(),
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
        })
    }
}

/// Everything needed to assemble products on one variety.
pub struct QuantumContext<'a> {
    mg: &'a MomentGraph,
    pairing: PairingTable,
    generators: Vec<CurveClass>,
    effectivity: std::sync::Mutex<Effectivity>,
    cache: InvariantCache,
    fan_hash: String,
    pub seed: u64,
    pub check_independence: bool,
    pub engine: EngineOptions,
    pub enumeration: EnumOptions,
}

impl<'a> QuantumContext<'a> {
    pub fn new(mg: &'a MomentGraph, seed: u64) -> Result<Self, QuantumError> {
        let pairing = build_pairing(mg, seed)?;
        let generators = default_generators(mg)?;
        Ok(QuantumContext {
            mg,
            pairing,
            generators,
            effectivity: std::sync::Mutex::new(Effectivity::new(mg)?),
            cache: InvariantCache::in_memory(),
            fan_hash: mg.fan().content_hash(),
            seed,
            check_independence: true,
            engine: EngineOptions::default(),
            enumeration: EnumOptions::default(),
        })
    }

    pub fn with_generators(mut self, generators: Vec<CurveClass>) -> Result<Self, QuantumError> {
        let n = self.mg.fan().n();
        if let Some(i) = generators.iter().position(|g| g.len() != n) {
            return Err(QuantumError::GeneratorLength(i));
        }
        self.generators = generators;
        Ok(self)
    }

    pub fn with_cache(mut self, cache: InvariantCache) -> Self {
        self.cache = cache;
        self
    }

    pub fn moment_graph(&self) -> &MomentGraph {
        self.mg
    }

    pub fn pairing(&self) -> &PairingTable {
        &self.pairing
    }

    pub fn generators(&self) -> &[CurveClass] {
        &self.generators
    }

    pub fn cache(&self) -> &InvariantCache {
        &self.cache
    }

    pub fn effective_classes(&self, caps: &[u32]) -> Result<Vec<CurveClass>, QuantumError> {
        enumerate_effective(&self.generators, caps, self.mg.fan().n())
    }

    fn is_effective(&self, c: &CurveClass) -> bool {
        self.effectivity.lock().expect("effectivity lock").is_effective(c)
    }

    /// `Φ^A(P.D.(pt); γ_1, …, γ_m)`, or the plain invariant at `m = 3`,
    /// through the cache.
    pub fn point_invariant(&self, a: &CurveClass, insertions: &[CohomClass]) -> Result<Q, QuantumError> {
        let mut names: Vec<String> = insertions.iter().map(|c| c.to_string()).collect();
        names.sort();
        let key = format!(
            "{}|A={:?}|pd|{}|{:?}|{:?}",
            self.fan_hash,
            a.0,
            names.join(";"),
            self.engine.root_integral,
            self.engine.edge_class
        );
        if let Some(v) = self.cache.get(&key) {
            return Ok(v);
        }
        let twist = if insertions.len() == 3 {
            Twist::Classical
        } else {
            Twist::PointClass
        };
        let mut req = InvariantRequest::new(a.clone(), insertions.to_vec(), twist);
        req.seed = self.seed;
        req.check_independence = self.check_independence;
        req.engine = self.engine;
        req.enumeration = self.enumeration.clone();
        let v = gw_invariant(self.mg, &req)?.value;
        self.cache.put(&key, &v)?;
        Ok(v)
    }

    /// The product restricted to the listed classes.
    pub fn product_at(&self, factors: &[CohomClass], classes: &[CurveClass]) -> Result<QuantumPoly, QuantumError> {
        if factors.len() < 2 {
            return Err(QuantumError::TooFewFactors);
        }
        let mut s = 0i64;
        for (i, f) in factors.iter().enumerate() {
            s += i64::from(f.homogeneous_degree().ok_or(QuantumError::Inhomogeneous(i))?);
        }
        let d = self.mg.dim() as i64;
        let mut jobs = Vec::new();
        for a in classes {
            let p = d + a.c1_degree() - s;
            if p < 0 || p > d {
                continue;
            }
            let piece = self.pairing.piece(p as u32).expect("degree in range");
            for i in 0..piece.basis.len() {
                jobs.push((a.clone(), p as u32, i));
            }
        }
        let values: Vec<(CurveClass, u32, usize, Q)> = jobs
            .into_par_iter()
            .map(|(a, p, i)| {
                let piece = self.pairing.piece(p).expect("degree in range");
                let mut ins = factors.to_vec();
                ins.push(CohomClass::monomial(piece.basis[i].clone()));
                self.point_invariant(&a, &ins).map(|v| (a, p, i, v))
            })
            .collect::<Result<_, _>>()?;
        let mut out = QuantumPoly::new();
        for (a, p, i, v) in values {
            if v.is_zero() {
                continue;
            }
            let piece = self.pairing.piece(p).expect("degree in range");
            out.add_class(&a, &piece.dual[i], &v);
        }
        Ok(out)
    }

    pub fn quantum_multi_product(&self, factors: &[CohomClass], caps: &[u32]) -> Result<QuantumPoly, QuantumError> {
        let classes = self.effective_classes(caps)?;
        self.product_at(factors, &classes)
    }

    /// Quantum product of two quantum polynomials, truncated to `classes`.
    pub fn multiply(&self, x: &QuantumPoly, y: &QuantumPoly, classes: &[CurveClass]) -> Result<QuantumPoly, QuantumError> {
        let allowed: BTreeSet<&CurveClass> = classes.iter().collect();
        let mut out = QuantumPoly::new();
        let xs = x.classes();
        let ys = y.classes();
        for a in &xs {
            for b in &ys {
                let ab = a.plus(b);
                let needed: Vec<CurveClass> = classes
                    .iter()
                    .map(|c| c.minus(&ab))
                    .filter(|c| self.is_effective(c))
                    .collect();
                if needed.is_empty() {
                    continue;
                }
                let (ca, cb) = (x.coefficient_of(a), y.coefficient_of(b));
                for (ma, xa) in ca.terms() {
                    for (mb, yb) in cb.terms() {
                        let prod = self.product_at(
                            &[CohomClass::monomial(ma.clone()), CohomClass::monomial(mb.clone())],
                            &needed,
                        )?;
                        let k = xa * yb;
                        for ((c, m), v) in prod.terms() {
                            let total = c.plus(&ab);
                            if allowed.contains(&total) {
                                out.add(total, m.clone(), v * &k);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn side(&self, terms: &[RelationTerm], classes: &[CurveClass]) -> Result<QuantumPoly, QuantumError> {
        let allowed: BTreeSet<&CurveClass> = classes.iter().collect();
        let n = self.mg.fan().n();
        let mut out = QuantumPoly::new();
        for t in terms {
            let needed: Vec<CurveClass> = classes
                .iter()
                .map(|c| c.minus(&t.shift))
                .filter(|c| self.is_effective(c))
                .collect();
            let poly = match t.factors.len() {
                0 | 1 => {
                    let mut p = QuantumPoly::new();
                    let zero = CurveClass::zero(n);
                    if needed.contains(&zero) {
                        let c = t.factors.first().cloned().unwrap_or_else(|| CohomClass::one(n));
                        let red = self
                            .pairing
                            .reduce(&c)
                            .ok_or(QuantumError::Inhomogeneous(0))?;
                        p.add_class(&zero, &red, &Q::one());
                    }
                    p
                }
                _ => self.product_at(&t.factors, &needed)?,
            };
            for ((a, m), v) in poly.terms() {
                let total = a.plus(&t.shift);
                if allowed.contains(&total) {
                    out.add(total, m.clone(), v * &t.coeff);
                }
            }
        }
        Ok(out)
    }

    pub fn check_relation(&self, rel: &Relation, caps: &[u32]) -> Result<RelationReport, QuantumError> {
        let classes = self.effective_classes(caps)?;
        let lhs = self.side(&rel.lhs, &classes)?;
        let rhs = self.side(&rel.rhs, &classes)?;
        let keys: BTreeSet<(CurveClass, CohomMonomial)> = lhs
            .terms()
            .chain(rhs.terms())
            .map(|(k, _)| k.clone())
            .collect();
        let mut mismatches = Vec::new();
        for (a, m) in &keys {
            let (l, r) = (lhs.get(a, m), rhs.get(a, m));
            if l != r {
                mismatches.push(CoefficientMismatch {
                    class: a.clone(),
                    monomial: m.clone(),
                    lhs: l,
                    rhs: r,
                });
            }
        }
        Ok(RelationReport {
            passed: mismatches.is_empty(),
            compared: keys.len(),
            classes,
            mismatches,
            lhs,
            rhs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_graph::build_moment_graph;
    use crate::rational::q_int;
    use crate::standard;

    #[test]
    fn p2_pairing() {
        let mg = build_moment_graph(&standard::projective_space(2)).unwrap();
        let t = build_pairing(&mg, 0).unwrap();
        assert_eq!(t.pieces().iter().map(|p| p.basis.len()).collect::<Vec<_>>(), vec![1, 1, 1]);
        for p in t.pieces() {
            assert_eq!(p.gram, vec![vec![q_int(1)]]);
        }
        assert!(t.check_inverses());
    }

    #[test]
    fn p1xp1_pairing() {
        let mg = build_moment_graph(&standard::p1_x_p1()).unwrap();
        let t = build_pairing(&mg, 0).unwrap();
        let g = &t.piece(1).unwrap().gram;
        assert_eq!(g.len(), 2);
        // the two rulings pair to 1 with each other and 0 with themselves
        assert_eq!(g[0][0], q_int(0));
        assert_eq!(g[0][1], q_int(1));
        assert_eq!(g[1][0], q_int(1));
        assert_eq!(g[1][1], q_int(0));
    }

    #[test]
    fn effective_boxes() {
        let mg = build_moment_graph(&standard::projective_space(2)).unwrap();
        let gens = default_generators(&mg).unwrap();
        assert_eq!(gens, vec![CurveClass(vec![1, 1, 1])]);
        assert_eq!(enumerate_effective(&gens, &[2], 3).unwrap().len(), 3);
        assert_eq!(enumerate_effective(&gens, &[0], 3).unwrap(), vec![CurveClass(vec![0, 0, 0])]);
        assert!(enumerate_effective(&gens, &[1, 1], 3).is_err());
    }

    #[test]
    fn scroll_generators() {
        let mg = build_moment_graph(&standard::pp1_bundle(3)).unwrap();
        let gens = default_generators(&mg).unwrap();
        assert_eq!(gens, vec![CurveClass(vec![1, 1, -1, -1, 0]), CurveClass(vec![0, 0, 1, 1, 1])]);
        assert_eq!(enumerate_effective(&gens, &[2, 1], 5).unwrap().len(), 6);
    }
}
