//! Fans of smooth complete toric varieties and the divisor/curve bookkeeping
//! built on them.
//!
//! Ray order is divisor order: ray `i` is the torus-invariant divisor `Z_i`.
//! Degree-2 homology classes are stored by their intersection numbers with
//! the `Z_i`; degree-2k cohomology is spanned by divisor monomials.

use crate::linalg::{abs_det_is_one, integer_kernel};
use crate::rational::Q;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("malformed fan document: {0}")]
    Malformed(String),
    #[error("fan dimension must be positive")]
    ZeroDimension,
    #[error("ray {ray} has {found} coordinates, expected {expected}")]
    RayLength {
        ray: usize,
        expected: usize,
        found: usize,
    },
    #[error("ray {0} is not primitive")]
    NonPrimitiveRay(usize),
    #[error("rays {0} and {1} coincide")]
    DuplicateRay(usize, usize),
    #[error("cone {cone} refers to ray {index}, but there are only {rays} rays")]
    ConeIndexOutOfRange {
        cone: usize,
        index: usize,
        rays: usize,
    },
    #[error("cone {cone} has {found} distinct rays, expected {expected}")]
    WrongConeSize {
        cone: usize,
        expected: usize,
        found: usize,
    },
    #[error("{given} ray names for {rays} rays")]
    NameCount { given: usize, rays: usize },
    #[error("vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fan failed validation: {0}")]
    Invalid(String),
}

/// On-disk JSON shape of a fan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanFile {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

/// A simplicial fan with structurally sane rays and cones. Whether it is
/// smooth and complete is a separate question answered by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
    names: Option<Vec<String>>,
}

impl Fan {
    /// Structural construction: ray lengths, primitivity, distinctness, cone
    /// sizes and index ranges. Cone ray lists are stored sorted.
    pub fn new(
        dim: usize,
        rays: Vec<Vec<i64>>,
        max_cones: Vec<Vec<usize>>,
        names: Option<Vec<String>>,
    ) -> Result<Self, FanError> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayLength {
                    ray: i,
                    expected: dim,
                    found: r.len(),
                });
            }
            if !is_primitive(r) {
                return Err(FanError::NonPrimitiveRay(i));
            }
        }
        let mut seen: HashMap<&[i64], usize> = HashMap::new();
        for (i, r) in rays.iter().enumerate() {
            if let Some(&j) = seen.get(r.as_slice()) {
                return Err(FanError::DuplicateRay(j, i));
            }
            seen.insert(r, i);
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for (c, cone) in max_cones.into_iter().enumerate() {
            for &idx in &cone {
                if idx >= rays.len() {
                    return Err(FanError::ConeIndexOutOfRange {
                        cone: c,
                        index: idx,
                        rays: rays.len(),
                    });
                }
            }
            let set: BTreeSet<usize> = cone.iter().copied().collect();
            if set.len() != dim {
                return Err(FanError::WrongConeSize {
                    cone: c,
                    expected: dim,
                    found: set.len(),
                });
            }
            cones.push(set.into_iter().collect());
        }
        if let Some(n) = &names {
            if n.len() != rays.len() {
                return Err(FanError::NameCount {
                    given: n.len(),
                    rays: rays.len(),
                });
            }
        }
        Ok(Fan {
            dim,
            rays,
            max_cones: cones,
            names,
        })
    }

    pub fn from_file(file: FanFile) -> Result<Self, FanError> {
        Fan::new(file.dim, file.rays, file.max_cones, file.names)
    }

    pub fn to_file(&self) -> FanFile {
        FanFile {
            dim: self.dim,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
            names: self.names.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rays, i.e. of torus-invariant divisors.
    pub fn n(&self) -> usize {
        self.rays.len()
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn ray_name(&self, i: usize) -> String {
        match &self.names {
            Some(n) => n[i].clone(),
            None => format!("Z{i}"),
        }
    }

    /// Index of the maximal cone with exactly this ray set.
    pub fn cone_index(&self, rays: &[usize]) -> Option<usize> {
        let mut key = rays.to_vec();
        key.sort_unstable();
        self.max_cones.iter().position(|c| *c == key)
    }

    /// Stable content hash (hex sha256 of dim, rays and sorted cones).
    pub fn content_hash(&self) -> String {
        let mut cones = self.max_cones.clone();
        cones.sort();
        let canon = serde_json::json!({ "dim": self.dim, "rays": self.rays, "max_cones": cones });
        hex::encode(Sha256::digest(canon.to_string().as_bytes()))
    }

    /// Integer basis of the curve-class lattice `{λ : Σ λ_i v_i = 0}`.
    pub fn curve_lattice_basis(&self) -> Vec<CurveClass> {
        integer_kernel(&self.rays)
            .into_iter()
            .map(CurveClass)
            .collect()
    }
}

fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x)) == 1
}

/// Parses a fan document and requires it to pass [`validate`].
pub fn parse_fan(text: &str) -> Result<Fan, FanError> {
    let fan = parse_fan_unvalidated(text)?;
    let report = validate(&fan);
    if !report.passed {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        return Err(FanError::Invalid(failed.join("; ")));
    }
    Ok(fan)
}

/// Parses and performs only the structural checks of [`Fan::new`].
pub fn parse_fan_unvalidated(text: &str) -> Result<Fan, FanError> {
    let file: FanFile =
        serde_json::from_str(text).map_err(|e| FanError::Malformed(e.to_string()))?;
    Fan::from_file(file)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub rays: usize,
    pub cones: usize,
    pub facet_pairings: usize,
    pub checks: Vec<CheckResult>,
}

/// Checks smoothness, facet pairing and connectedness. Failures are reported,
/// never returned as errors.
pub fn validate(fan: &Fan) -> ValidationReport {
    let mut checks = Vec::new();

    let bad_prim: Vec<usize> = (0..fan.n()).filter(|&i| !is_primitive(fan.ray(i))).collect();
    checks.push(CheckResult {
        name: "primitive_rays",
        passed: bad_prim.is_empty(),
        detail: if bad_prim.is_empty() {
            format!("{} rays primitive", fan.n())
        } else {
            format!("non-primitive rays {bad_prim:?}")
        },
    });

    let distinct: BTreeSet<&Vec<i64>> = fan.rays.iter().collect();
    checks.push(CheckResult {
        name: "distinct_rays",
        passed: distinct.len() == fan.n(),
        detail: format!("{} distinct of {}", distinct.len(), fan.n()),
    });

    let singular: Vec<usize> = fan
        .max_cones
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let m: Vec<Vec<i64>> = c.iter().map(|&i| fan.rays[i].clone()).collect();
            !abs_det_is_one(&m)
        })
        .map(|(i, _)| i)
        .collect();
    checks.push(CheckResult {
        name: "smooth_cones",
        passed: singular.is_empty(),
        detail: if singular.is_empty() {
            format!("{} cones unimodular", fan.max_cones.len())
        } else {
            format!("cones {singular:?} have determinant other than ±1")
        },
    });

    let cone_set: BTreeSet<&Vec<usize>> = fan.max_cones.iter().collect();
    checks.push(CheckResult {
        name: "distinct_cones",
        passed: cone_set.len() == fan.max_cones.len(),
        detail: format!("{} distinct of {}", cone_set.len(), fan.max_cones.len()),
    });

    let facets = facet_map(fan);
    let pairings = facets.values().filter(|v| v.len() == 2).count();
    let unpaired: Vec<String> = facets
        .iter()
        .filter(|(_, v)| v.len() != 2)
        .map(|(f, v)| format!("facet {f:?} covered {} time(s)", v.len()))
        .collect();
    checks.push(CheckResult {
        name: "facet_pairing",
        passed: unpaired.is_empty() && !fan.max_cones.is_empty(),
        detail: if fan.max_cones.is_empty() {
            "no maximal cones".to_string()
        } else if unpaired.is_empty() {
            format!("{pairings} facets each shared by exactly two cones")
        } else {
            unpaired.join(", ")
        },
    });

    let connected = cones_connected(fan, &facets);
    checks.push(CheckResult {
        name: "connected",
        passed: connected,
        detail: if connected {
            "cone adjacency graph connected".to_string()
        } else {
            "cone adjacency graph disconnected".to_string()
        },
    });

    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        rays: fan.n(),
        cones: fan.max_cones.len(),
        facet_pairings: pairings,
        checks,
    }
}

/// Facet (sorted ray set of size d-1) -> maximal cones containing it.
pub(crate) fn facet_map(fan: &Fan) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (ci, cone) in fan.max_cones.iter().enumerate() {
        for skip in 0..cone.len() {
            let facet: Vec<usize> = cone
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != skip)
                .map(|(_, &r)| r)
                .collect();
            map.entry(facet).or_default().push(ci);
        }
    }
    map
}

fn cones_connected(fan: &Fan, facets: &BTreeMap<Vec<usize>, Vec<usize>>) -> bool {
    let k = fan.max_cones.len();
    if k == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); k];
    for cones in facets.values() {
        for &a in cones {
            for &b in cones {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    let mut seen = vec![false; k];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(c) = queue.pop_front() {
        for &nb in &adj[c] {
            if !seen[nb] {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A degree-2 homology class as its intersection vector `(⟨Z_i, A⟩)_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurveClass(pub Vec<i64>);

impl CurveClass {
    pub fn zero(n: usize) -> Self {
        CurveClass(vec![0; n])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `⟨c_1(X), A⟩ = Σ λ_i`, since `c_1 = Σ Z_i`.
    pub fn c1_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: i64) -> Self {
        CurveClass(self.0.iter().map(|x| x * k).collect())
    }

    pub fn plus(&self, other: &Self) -> Self {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &Self) -> Self {
        CurveClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn dot(&self, w: &[i64]) -> i64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// True iff `Σ λ_i v_i = 0`.
pub fn is_curve_class(fan: &Fan, vec: &[i64]) -> Result<bool, FanError> {
    if vec.len() != fan.n() {
        return Err(FanError::LengthMismatch {
            expected: fan.n(),
            found: vec.len(),
        });
    }
    Ok((0..fan.dim).all(|c| {
        vec.iter()
            .zip(&fan.rays)
            .map(|(l, v)| l * v[c])
            .sum::<i64>()
            == 0
    }))
}

/// `Z^l = Z_1^{l_1} ⋯ Z_n^{l_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohomMonomial(pub Vec<u32>);

impl CohomMonomial {
    pub fn one(n: usize) -> Self {
        CohomMonomial(vec![0; n])
    }

    pub fn divisor(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        CohomMonomial(e)
    }

    /// Product of the listed divisors (repeats allowed).
    pub fn product_of(n: usize, divisors: &[usize]) -> Self {
        let mut e = vec![0; n];
        for &k in divisors {
            e[k] += 1;
        }
        CohomMonomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn times(&self, other: &Self) -> Self {
        CohomMonomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All exponent vectors of length `n` and total degree `deg`, in
    /// lexicographically decreasing order.
    pub fn all_of_degree(n: usize, deg: u32) -> Vec<CohomMonomial> {
        fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<CohomMonomial>) {
            if cur.len() + 1 == n {
                cur.push(left);
                out.push(CohomMonomial(cur.clone()));
                cur.pop();
                return;
            }
            for e in (0..=left).rev() {
                cur.push(e);
                rec(n, left - e, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if deg == 0 {
                out.push(CohomMonomial(Vec::new()));
            }
            return out;
        }
        rec(n, deg, &mut Vec::with_capacity(n), &mut out);
        out
    }
}

impl fmt::Display for CohomMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return f.write_str("1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "Z{i}")?;
            } else {
                write!(f, "Z{i}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Formal `Q`-combination of divisor monomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CohomClass {
    terms: BTreeMap<CohomMonomial, Q>,
}

impl CohomClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: CohomMonomial) -> Self {
        Self::term(m, Q::one())
    }

    pub fn term(m: CohomMonomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        CohomClass { terms }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(CohomMonomial::one(n))
    }

    pub fn divisor(n: usize, k: usize) -> Self {
        Self::monomial(CohomMonomial::divisor(n, k))
    }

    pub fn add_term(&mut self, m: CohomMonomial, c: Q) {
        let entry = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, k: &Q) -> Self {
        let mut out = CohomClass::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = CohomClass::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CohomMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common degree of all monomials; `Some(0)` for the zero class.
    /// `None` when inhomogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|m| m.degree());
        let first = degs.next().unwrap_or(0);
        degs.all(|d| d == first).then_some(first)
    }

    /// Number of divisors the class is written in, if it has any term.
    pub fn width(&self) -> Option<usize> {
        self.terms.keys().next().map(|m| m.len())
    }
}

impl From<CohomMonomial> for CohomClass {
    fn from(m: CohomMonomial) -> Self {
        CohomClass::monomial(m)
    }
}

impl fmt::Display for CohomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}*{}", crate::rational::format_q(c), m))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
