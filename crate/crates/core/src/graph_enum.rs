//! Fixed-point components of `M_{0,m}(X, A)`: decorated trees on the
//! moment graph.
//!
//! A tree maps each vertex to a fixed point and each edge to a moment edge
//! (with a covering multiplicity `h`); marks sit on vertices. Two trees are
//! identified when a label-preserving isomorphism carries one to the other.
//! Enumeration first grows the unmarked trees of total class `A` level by
//! level (deduplicated by canonical form), then distributes marks.

use crate::fan::CurveClass;
use crate::moment_graph::MomentGraph;
use num_bigint::BigInt;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("enumeration budget exceeded: more than {limit} {what}")]
    Budget { what: &'static str, limit: usize },
    #[error("no positive functional on the edge classes (is the fan projective?)")]
    NoPositiveFunctional,
    #[error("class has length {found}, expected {expected}")]
    ClassLength { expected: usize, found: usize },
    #[error("mark support table has {found} rows for {expected} marks")]
    SupportShape { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphVertex {
    pub fixed_point: usize,
    pub marks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub ends: [usize; 2],
    pub moment_edge: usize,
    pub multiplicity: u32,
}

/// One fixed-point component: a tree on the moment graph with edge
/// multiplicities and a placement of the marks `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecoratedGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
    key: String,
    #[serde(skip)]
    aut: u128,
}

impl DecoratedGraph {
    /// Builds a graph and computes its canonical key. Panics if the edges
    /// do not form a tree on the vertices.
    pub fn new(vertices: Vec<GraphVertex>, edges: Vec<GraphEdge>) -> Self {
        let mut g = DecoratedGraph {
            vertices,
            edges,
            key: String::new(),
            aut: 1,
        };
        assert!(g.is_tree(), "decorated graph must be a tree");
        for v in &mut g.vertices {
            v.marks.sort_unstable();
        }
        let (key, aut) = canonical_form(&g, true);
        g.key = key;
        g.aut = aut;
        g
    }

    /// Canonical key; equal iff the graphs are isomorphic.
    pub fn key(&self) -> &str {
        &self.key
    }

    /// Order of the group of label-, mark- and multiplicity-preserving
    /// automorphisms of the tree.
    pub fn tree_automorphisms(&self) -> u128 {
        self.aut
    }

    pub fn mark_count(&self) -> usize {
        self.vertices.iter().map(|v| v.marks.len()).sum()
    }

    /// Incident graph-edge indices of `v`.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.ends.contains(&v))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.ends.contains(&v)).count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.valence(v) + self.vertices[v].marks.len()
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let ends = self.edges[e].ends;
        if ends[0] == v {
            ends[1]
        } else {
            ends[0]
        }
    }

    pub fn total_class(&self, mg: &MomentGraph) -> CurveClass {
        let mut acc = CurveClass::zero(mg.fan().n());
        for e in &self.edges {
            acc = acc.plus(&mg.edge(e.moment_edge).class.scaled(i64::from(e.multiplicity)));
        }
        acc
    }

    /// Vertex of each mark.
    pub fn mark_positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.mark_count()];
        for (vi, v) in self.vertices.iter().enumerate() {
            for &mk in &v.marks {
                pos[mk] = vi;
            }
        }
        pos
    }

    fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 || self.edges.len() + 1 != n {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let [a, b] = e.ends;
            if a >= n || b >= n {
                return false;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// Mark count of the branch hanging off `v` through graph edge `e`.
    pub fn branch_marks(&self, v: usize, e: usize) -> usize {
        let start = self.other_end(e, v);
        let mut stack = vec![(start, v)];
        let mut total = 0;
        while let Some((x, from)) = stack.pop() {
            total += self.vertices[x].marks.len();
            for ei in self.incident(x) {
                let y = self.other_end(ei, x);
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        total
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "key": self.key,
            "vertices": self.vertices,
            "edges": self.edges,
        })
    }
}

/// `|A_Γ| = |Aut(Γ)| · Π_e h_e`.
pub fn automorphism_order(g: &DecoratedGraph) -> BigInt {
    let hprod = g
        .edges
        .iter()
        .fold(BigInt::from(1), |acc, e| acc * BigInt::from(e.multiplicity));
    BigInt::from(g.aut) * hprod
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub edge: usize,
    pub neighbor: usize,
    pub marks: usize,
}

/// A graph with a unique stable vertex whose branches each carry at most
/// one mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraphView<'a> {
    pub graph: &'a DecoratedGraph,
    pub root: usize,
    pub branches: Vec<Branch>,
}

impl SimpleGraphView<'_> {
    /// `deg(v_Γ)`, the number of special points on the stable component.
    pub fn root_degree(&self) -> usize {
        self.graph.degree(self.root)
    }
}

pub fn is_simple(g: &DecoratedGraph) -> Option<SimpleGraphView<'_>> {
    if g.mark_count() < 3 {
        return None;
    }
    let mut found = None;
    for v in 0..g.vertices.len() {
        if g.degree(v) < 3 {
            continue;
        }
        let branches: Vec<Branch> = g
            .incident(v)
            .into_iter()
            .map(|e| Branch {
                edge: e,
                neighbor: g.other_end(e, v),
                marks: g.branch_marks(v, e),
            })
            .collect();
        if branches.iter().all(|b| b.marks <= 1) {
            if found.is_some() {
                return None;
            }
            found = Some(SimpleGraphView {
                graph: g,
                root: v,
                branches,
            });
        }
    }
    found
}

#[derive(Debug, Clone)]
pub struct EnumOptions {
    /// Maximum number of decorated graphs produced.
    pub max_graphs: usize,
    /// Maximum number of unmarked trees kept at any growth level.
    pub max_trees: usize,
    /// Hard cap on edge multiplicities, on top of the functional bound.
    pub max_multiplicity: Option<u32>,
    /// `support[mark][fixed_point]`: whether the mark may sit there.
    pub mark_support: Option<Vec<Vec<bool>>>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_graphs: 20_000_000,
            max_trees: 2_000_000,
            max_multiplicity: None,
            mark_support: None,
        }
    }
}

/// Decides membership in the monoid generated by the moment-graph edge
/// classes, with a positive linear functional bounding the search.
#[derive(Debug, Clone)]
pub struct Effectivity {
    classes: Vec<CurveClass>,
    functional: Vec<i64>,
    memo: HashMap<CurveClass, bool>,
}

impl Effectivity {
    pub fn new(mg: &MomentGraph) -> Result<Self, EnumError> {
        let classes = mg.distinct_edge_classes();
        let functional = positive_functional(&classes).ok_or(EnumError::NoPositiveFunctional)?;
        Ok(Effectivity {
            classes,
            functional,
            memo: HashMap::new(),
        })
    }

    /// Integer vector `φ` with `φ · c >= 1` for every edge class `c`.
    pub fn functional(&self) -> &[i64] {
        &self.functional
    }

    pub fn weight(&self, c: &CurveClass) -> i64 {
        c.dot(&self.functional)
    }

    pub fn classes(&self) -> &[CurveClass] {
        &self.classes
    }

    /// Whether `c` is a non-negative integer combination of edge classes.
    pub fn is_effective(&mut self, c: &CurveClass) -> bool {
        if c.is_zero() {
            return true;
        }
        if self.weight(c) <= 0 {
            return false;
        }
        if let Some(&b) = self.memo.get(c) {
            return b;
        }
        let classes = self.classes.clone();
        let ans = classes.iter().any(|e| {
            let rest = c.minus(e);
            self.is_effective(&rest)
        });
        self.memo.insert(c.clone(), ans);
        ans
    }

    /// Whether `c` is a sum of at least two edge classes.
    pub fn is_reducible(&mut self, c: &CurveClass) -> bool {
        let classes = self.classes.clone();
        classes.iter().any(|e| {
            let rest = c.minus(e);
            !rest.is_zero() && self.is_effective(&rest)
        })
    }
}

/// Perceptron search for `φ` with `φ · c > 0` for all `c`; it terminates
/// exactly when the cone spanned by the classes is strictly convex.
fn positive_functional(classes: &[CurveClass]) -> Option<Vec<i64>> {
    let n = classes.first()?.len();
    let mut w = vec![0i64; n];
    for _ in 0..1_000_000 {
        let Some(bad) = classes.iter().find(|c| c.dot(&w) <= 0) else {
            return Some(w);
        };
        for (x, y) in w.iter_mut().zip(&bad.0) {
            *x += y;
        }
    }
    None
}

/// Unmarked tree in construction: vertex labels and `(parent, moment edge,
/// h)` attachments.
#[derive(Debug, Clone)]
struct MapTree {
    labels: Vec<usize>,
    edges: Vec<GraphEdge>,
    used: CurveClass,
}

impl MapTree {
    fn as_graph(&self) -> DecoratedGraph {
        DecoratedGraph {
            vertices: self
                .labels
                .iter()
                .map(|&l| GraphVertex {
                    fixed_point: l,
                    marks: Vec::new(),
                })
                .collect(),
            edges: self.edges.clone(),
            key: String::new(),
            aut: 1,
        }
    }
}

/// All unmarked trees of total class `a`, as mark-free decorated graphs.
pub fn enumerate_trees(
    mg: &MomentGraph,
    a: &CurveClass,
    opts: &EnumOptions,
) -> Result<Vec<DecoratedGraph>, EnumError> {
    let n = mg.fan().n();
    if a.len() != n {
        return Err(EnumError::ClassLength {
            expected: n,
            found: a.len(),
        });
    }
    if a.is_zero() {
        return Ok(Vec::new());
    }
    let mut eff = Effectivity::new(mg)?;
    if !eff.is_effective(a) {
        return Ok(Vec::new());
    }
    let mut level: Vec<MapTree> = (0..mg.fixed_points().len())
        .map(|s| MapTree {
            labels: vec![s],
            edges: Vec::new(),
            used: CurveClass::zero(n),
        })
        .collect();
    let mut done: BTreeMap<String, DecoratedGraph> = BTreeMap::new();
    while !level.is_empty() {
        let mut next: HashMap<String, MapTree> = HashMap::new();
        for t in &level {
            let remaining = a.minus(&t.used);
            for (vi, &sigma) in t.labels.iter().enumerate() {
                for &me in &mg.fixed_point(sigma).edges {
                    let class = &mg.edge(me).class;
                    let step = eff.weight(class);
                    let mut h: u32 = 1;
                    loop {
                        if opts.max_multiplicity.is_some_and(|cap| h > cap) {
                            break;
                        }
                        let hc = class.scaled(i64::from(h));
                        if step * i64::from(h) > eff.weight(&remaining) {
                            break;
                        }
                        let rest = remaining.minus(&hc);
                        if eff.is_effective(&rest) {
                            let mut nt = t.clone();
                            nt.labels.push(mg.edge(me).other(sigma));
                            nt.edges.push(GraphEdge {
                                ends: [vi, nt.labels.len() - 1],
                                moment_edge: me,
                                multiplicity: h,
                            });
                            nt.used = t.used.plus(&hc);
                            let (key, _) = canonical_form(&nt.as_graph(), false);
                            if rest.is_zero() {
                                if !done.contains_key(&key) {
                                    let mut g = nt.as_graph();
                                    let (k, aut) = canonical_form(&g, true);
                                    g.key = k;
                                    g.aut = aut;
                                    done.insert(key, g);
                                }
                            } else {
                                next.entry(key).or_insert(nt);
                                if next.len() > opts.max_trees {
                                    return Err(EnumError::Budget {
                                        what: "partial trees",
                                        limit: opts.max_trees,
                                    });
                                }
                            }
                        }
                        h += 1;
                    }
                }
            }
        }
        let mut keys: Vec<(String, MapTree)> = next.into_iter().collect();
        keys.sort_by(|x, y| x.0.cmp(&y.0));
        level = keys.into_iter().map(|(_, t)| t).collect();
    }
    Ok(done.into_values().collect())
}

/// Every decorated tree of class `a` with `m` marks, once per isomorphism
/// class, sorted by canonical key. With `simple_only`, only graphs with a
/// [`SimpleGraphView`].
pub fn enumerate_graphs(
    mg: &MomentGraph,
    a: &CurveClass,
    m: usize,
    simple_only: bool,
) -> Result<Vec<DecoratedGraph>, EnumError> {
    enumerate_graphs_with(mg, a, m, simple_only, &EnumOptions::default())
}

pub fn enumerate_graphs_with(
    mg: &MomentGraph,
    a: &CurveClass,
    m: usize,
    simple_only: bool,
    opts: &EnumOptions,
) -> Result<Vec<DecoratedGraph>, EnumError> {
    if let Some(s) = &opts.mark_support {
        if s.len() != m {
            return Err(EnumError::SupportShape {
                expected: m,
                found: s.len(),
            });
        }
    }
    let trees = enumerate_trees(mg, a, opts)?;
    let mut out = Vec::new();
    for t in &trees {
        out.extend(markings(t, m, simple_only, opts)?);
        if out.len() > opts.max_graphs {
            return Err(EnumError::Budget {
                what: "decorated graphs",
                limit: opts.max_graphs,
            });
        }
    }
    out.sort_by(|x, y| x.key.cmp(&y.key));
    Ok(out)
}

/// All placements of the marks `0..m` on the unmarked tree `t`, one per
/// isomorphism class, in generation order.
pub fn markings(
    t: &DecoratedGraph,
    m: usize,
    simple_only: bool,
    opts: &EnumOptions,
) -> Result<Vec<DecoratedGraph>, EnumError> {
    if let Some(s) = &opts.mark_support {
        if s.len() != m {
            return Err(EnumError::SupportShape {
                expected: m,
                found: s.len(),
            });
        }
    }
    let slots: Vec<Vec<usize>> = (0..m)
        .map(|mk| {
            (0..t.vertices.len())
                .filter(|&v| {
                    opts.mark_support
                        .as_ref()
                        .is_none_or(|s| s[mk][t.vertices[v].fixed_point])
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    if slots.iter().any(|s| s.is_empty()) {
        return Ok(out);
    }
    let rigid = t.aut == 1;
    let mut seen: HashSet<String> = HashSet::new();
    let mut choice = vec![0usize; m];
    loop {
        let mut g = t.clone();
        for v in &mut g.vertices {
            v.marks.clear();
        }
        for (mk, &c) in choice.iter().enumerate() {
            g.vertices[slots[mk][c]].marks.push(mk);
        }
        let keep = !simple_only || is_simple(&g).is_some();
        if keep {
            let (key, aut) = canonical_form(&g, true);
            g.key = key;
            g.aut = aut;
            if rigid || seen.insert(g.key.clone()) {
                out.push(g);
                if out.len() > opts.max_graphs {
                    return Err(EnumError::Budget {
                        what: "decorated graphs",
                        limit: opts.max_graphs,
                    });
                }
            }
        }
        // odometer over mark placements
        let mut i = 0;
        while i < m {
            choice[i] += 1;
            if choice[i] < slots[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
    }
    Ok(out)
}

/// Canonical string of the (optionally marked) tree, plus the order of its
/// automorphism group. Rooted at the center; a bicentral tree is encoded
/// from its central edge with the two halves in sorted order.
fn canonical_form(g: &DecoratedGraph, with_marks: bool) -> (String, u128) {
    let n = g.vertices.len();
    let mut adj: Vec<Vec<(usize, String)>> = vec![Vec::new(); n];
    for e in &g.edges {
        let lab = format!("<e{}h{}>", e.moment_edge, e.multiplicity);
        adj[e.ends[0]].push((e.ends[1], lab.clone()));
        adj[e.ends[1]].push((e.ends[0], lab));
    }
    let label = |v: usize| -> String {
        let mut s = format!("v{}", g.vertices[v].fixed_point);
        if with_marks && !g.vertices[v].marks.is_empty() {
            s.push('m');
            for (i, mk) in g.vertices[v].marks.iter().enumerate() {
                if i > 0 {
                    s.push('.');
                }
                let _ = write!(s, "{mk}");
            }
        }
        s
    };
    fn encode(
        v: usize,
        parent: Option<usize>,
        adj: &[Vec<(usize, String)>],
        label: &dyn Fn(usize) -> String,
    ) -> (String, u128) {
        let mut kids: Vec<(String, u128)> = adj[v]
            .iter()
            .filter(|(w, _)| Some(*w) != parent)
            .map(|(w, lab)| {
                let (s, a) = encode(*w, Some(v), adj, label);
                (format!("{lab}{s}"), a)
            })
            .collect();
        kids.sort();
        let mut aut: u128 = kids.iter().map(|k| k.1).product();
        let mut i = 0;
        while i < kids.len() {
            let mut j = i;
            while j < kids.len() && kids[j].0 == kids[i].0 {
                j += 1;
            }
            aut *= (1..=(j - i) as u128).product::<u128>();
            i = j;
        }
        let mut s = format!("({}", label(v));
        for k in &kids {
            s.push_str(&k.0);
        }
        s.push(')');
        (s, aut)
    }
    // centers by leaf peeling
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut remaining = n;
    let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut removed = vec![false; n];
    while remaining > 2 {
        let mut next = Vec::new();
        for &l in &leaves {
            removed[l] = true;
            remaining -= 1;
            for (w, _) in &adj[l] {
                if !removed[*w] {
                    deg[*w] -= 1;
                    if deg[*w] == 1 {
                        next.push(*w);
                    }
                }
            }
        }
        leaves = next;
    }
    let centers: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    if centers.len() == 1 {
        let (s, a) = encode(centers[0], None, &adj, &label);
        (format!("U{s}"), a)
    } else {
        let (c1, c2) = (centers[0], centers[1]);
        let lab = &adj[c1].iter().find(|(w, _)| *w == c2).expect("centers adjacent").1;
        let (s1, a1) = encode(c1, Some(c2), &adj, &label);
        let (s2, a2) = encode(c2, Some(c1), &adj, &label);
        let swap = if s1 == s2 { 2 } else { 1 };
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        (format!("B{lab}{lo}{hi}"), a1 * a2 * swap)
    }
}
