//! Ordered partitions of `1..=n` into consecutive blocks and the graphs they
//! generate.
//!
//! A composition `s = (s_1, …, s_r)` of `n` splits the vertices into
//! consecutive blocks `S_1, …, S_r`. Its graph has an edge `u → v` for every
//! `u ≠ v` with `block(u) ≤ block(v)`: everyone nominates their own block and
//! all later blocks. A vertex in block `i` has indegree `s_1 + … + s_i − 1`,
//! so the maximum indegree is always `n − 1`.
//!
//! The module covers multiplicities `λ = n!/Π s_i!` (the number of labelled
//! graphs isomorphic to a composition graph), their sum (the Fubini number),
//! `j`-transitions, the signed certificate showing that no symmetric,
//! impartial and weakly unanimous randomized mechanism exists on these
//! graphs, and two padding constructions that move graphs into larger
//! classes.
//!
//! Block indices in this API are 1-based, as are compositions; vertices are
//! 0-based like everywhere else in the crate.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Vertex};
use crate::linear::{check_infeasibility, LinearInequality};

/// Default largest `n` for composition enumeration (`2^{n−1}` items).
pub const DEFAULT_COMPOSITION_CAP: usize = 24;

/// Default largest `n` for certificate construction, which materialises one
/// graph per composition.
pub const DEFAULT_CERTIFICATE_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedPartition {
    parts: Vec<usize>,
}

impl OrderedPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "composition {parts:?} needs at least one part and only positive parts"
            )));
        }
        Ok(OrderedPartition { parts })
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Size of block `i` (1-based).
    pub fn part(&self, i: usize) -> usize {
        self.parts[i - 1]
    }

    /// First block whose vertices have positive indegree: 2 when the first
    /// block is a singleton, otherwise 1.
    pub fn first_positive_block(&self) -> usize {
        if self.parts[0] == 1 {
            2
        } else {
            1
        }
    }

    /// Vertices of block `i` (1-based).
    pub fn block(&self, i: usize) -> Range<Vertex> {
        let start: usize = self.parts[..i - 1].iter().sum();
        start..start + self.parts[i - 1]
    }

    /// Block (1-based) containing vertex `v`.
    pub fn block_of(&self, v: Vertex) -> usize {
        let mut end = 0;
        for (i, &s) in self.parts.iter().enumerate() {
            end += s;
            if v < end {
                return i + 1;
            }
        }
        panic!("vertex {v} outside a composition of {}", self.n())
    }

    pub fn is_palindrome(&self) -> bool {
        self.parts.iter().eq(self.parts.iter().rev())
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for OrderedPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

fn check_cap(n: usize, cap: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what: what.into(),
            size: format!("n = {n}"),
            cap: cap as u64,
        });
    }
    Ok(())
}

/// Compositions of `n` in lexicographic order of the part tuples, e.g.
/// `(1,1,1), (1,2), (2,1), (3)`.
///
/// Bit `n − 1 − p` of the cut mask says whether a block ends after vertex
/// `p` (1-based); walking the mask downward from all-ones yields exactly the
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct Compositions {
    n: usize,
    next_mask: Option<u64>,
}

impl Iterator for Compositions {
    type Item = OrderedPartition;

    fn next(&mut self) -> Option<OrderedPartition> {
        let mask = self.next_mask?;
        self.next_mask = mask.checked_sub(1);
        let mut parts = Vec::new();
        let mut run = 1;
        for p in 1..self.n {
            if mask >> (self.n - 1 - p) & 1 == 1 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        Some(OrderedPartition { parts })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.next_mask.map_or(0, |m| m as usize + 1);
        (left, Some(left))
    }
}

impl ExactSizeIterator for Compositions {}

pub fn enumerate_compositions(n: usize, cap: usize) -> Result<Compositions> {
    check_cap(n, cap.min(64), "composition enumeration")?;
    Ok(Compositions {
        n,
        next_mask: Some((1u64 << (n - 1)) - 1),
    })
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `n! / Π s_i!`.
pub fn lambda_of(p: &OrderedPartition) -> BigUint {
    let denominator = p.parts.iter().fold(BigUint::one(), |acc, &s| acc * factorial(s));
    factorial(p.n()) / denominator
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fubini {
    #[serde(serialize_with = "text")]
    pub value: BigUint,
    pub odd: bool,
}

/// Number of weak orders on `n` elements, as the sum of `λ` over all
/// compositions of `n`.
pub fn fubini(n: usize, cap: usize) -> Result<Fubini> {
    let value: BigUint = enumerate_compositions(n, cap)?.map(|p| lambda_of(&p)).sum();
    let odd = value.bit(0);
    Ok(Fubini { value, odd })
}

pub fn graph_of_composition(p: &OrderedPartition) -> DirectedGraph {
    let n = p.n();
    let mut out = Vec::with_capacity(n);
    for i in 1..=p.r() {
        let from = p.block(i).start;
        for u in p.block(i) {
            out.push((from..n).filter(|&v| v != u).collect());
        }
    }
    DirectedGraph::from_sorted_unchecked(out)
}

/// The composition generating `g`, if `g` is a composition graph.
pub fn composition_of_graph(g: &DirectedGraph) -> Option<OrderedPartition> {
    // a block ends at v exactly when δ⁻(v) = v
    let indegree = g.indegrees();
    let mut parts = Vec::new();
    let mut run = 0;
    for (v, &d) in indegree.iter().enumerate() {
        run += 1;
        if d == v {
            parts.push(run);
            run = 0;
        }
    }
    if run != 0 {
        return None;
    }
    let p = OrderedPartition { parts };
    (graph_of_composition(&p) == *g).then_some(p)
}

/// A `j`-transition: the singleton block `j ≥ 2` of `source` merges into
/// block `j − 1`. Graph-wise, the singleton's vertex additionally nominates
/// block `j − 1` and nothing else changes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionEdge {
    pub source: OrderedPartition,
    pub target: OrderedPartition,
    pub j: usize,
}

impl TransitionEdge {
    /// The vertex whose out-set differs between the two graphs.
    pub fn deviator(&self) -> Vertex {
        self.source.block(self.j).start
    }
}

pub fn j_transition(p: &OrderedPartition, j: usize) -> Option<OrderedPartition> {
    if j < 2 || j > p.r() || p.part(j) != 1 {
        return None;
    }
    let mut parts = p.parts.clone();
    parts[j - 2] += 1;
    parts.remove(j - 1);
    Some(OrderedPartition { parts })
}

/// The composition `G'` with a `(j+1)`-transition into `p`, when block `j`
/// of `p` has at least two vertices: block `j` splits off its last vertex.
fn split_last(p: &OrderedPartition, j: usize) -> Option<OrderedPartition> {
    if j == 0 || j > p.r() || p.part(j) < 2 {
        return None;
    }
    let mut parts = p.parts.clone();
    parts[j - 1] -= 1;
    parts.insert(j, 1);
    Some(OrderedPartition { parts })
}

pub fn transitions(n: usize, cap: usize) -> Result<Vec<TransitionEdge>> {
    Ok(enumerate_compositions(n, cap)?
        .flat_map(|p| {
            (2..=p.r())
                .filter_map(|j| {
                    j_transition(&p, j).map(|target| TransitionEdge {
                        source: p.clone(),
                        target,
                        j,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    pub n: usize,
    pub compositions: usize,
    pub edges: usize,
    /// Every (G, j) with `j ≥ i(G)` has exactly one transition partner.
    pub partners_unique: bool,
    /// Every edge joins compositions whose lengths differ by one.
    pub bipartite: bool,
    /// `λ_{G'} · s'_{j−1} = λ_G · s_j` on every edge.
    pub coefficient_identity: bool,
    /// The two graphs of every edge differ exactly in the deviator's out-set.
    pub single_vertex_deviations: bool,
    /// No pair of compositions has transitions both ways or under two labels.
    pub antisymmetric: bool,
    pub failures: Vec<String>,
}

impl TransitionReport {
    pub fn passed(&self) -> bool {
        self.partners_unique
            && self.bipartite
            && self.coefficient_identity
            && self.single_vertex_deviations
            && self.antisymmetric
    }
}

pub fn verify_transition_structure(n: usize, cap: usize) -> Result<TransitionReport> {
    let compositions: Vec<OrderedPartition> = enumerate_compositions(n, cap)?.collect();
    let edges = transitions(n, cap)?;
    let mut failures = Vec::new();

    let mut outgoing: HashMap<(&OrderedPartition, usize), usize> = HashMap::new();
    let mut incoming: HashMap<(&OrderedPartition, usize), usize> = HashMap::new();
    let mut pairs: HashMap<(&OrderedPartition, &OrderedPartition), usize> = HashMap::new();
    for e in &edges {
        *outgoing.entry((&e.source, e.j)).or_default() += 1;
        *incoming.entry((&e.target, e.j)).or_default() += 1;
        *pairs.entry((&e.source, &e.target)).or_default() += 1;
    }

    let mut partners_unique = true;
    for p in &compositions {
        for j in p.first_positive_block()..=p.r() {
            let count = if p.part(j) == 1 {
                outgoing.get(&(p, j)).copied().unwrap_or(0)
            } else {
                incoming.get(&(p, j + 1)).copied().unwrap_or(0)
            };
            if count != 1 {
                partners_unique = false;
                failures.push(format!("{p}, block {j}: {count} transition partners"));
            }
        }
    }

    let mut bipartite = true;
    let mut coefficient_identity = true;
    let mut single_vertex_deviations = true;
    for e in &edges {
        if e.source.r() != e.target.r() + 1 {
            bipartite = false;
            failures.push(format!("{} → {}: lengths do not differ by one", e.source, e.target));
        }
        let lhs = lambda_of(&e.target) * e.target.part(e.j - 1);
        let rhs = lambda_of(&e.source) * e.source.part(e.j);
        if lhs != rhs {
            coefficient_identity = false;
            failures.push(format!("{} → {} (j={}): {lhs} ≠ {rhs}", e.source, e.target, e.j));
        }
        let (g, h) = (graph_of_composition(&e.source), graph_of_composition(&e.target));
        if g.differing_vertices(&h) != vec![e.deviator()] {
            single_vertex_deviations = false;
            failures.push(format!("{} → {}: not a deviation of vertex {}", e.source, e.target, e.deviator() + 1));
        }
    }

    let mut antisymmetric = true;
    for (&(a, b), &count) in &pairs {
        if count > 1 || pairs.contains_key(&(b, a)) {
            antisymmetric = false;
            failures.push(format!("{a} and {b}: transitions in both directions or under two labels"));
        }
    }
    failures.sort();

    Ok(TransitionReport {
        n,
        compositions: compositions.len(),
        edges: edges.len(),
        partners_unique,
        bipartite,
        coefficient_identity,
        single_vertex_deviations,
        antisymmetric,
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintSense {
    /// `Σ_v p_v ≤ 1`: a mechanism selects at most one vertex.
    AtMostOne,
    /// `Σ_{v : δ⁻(v) > 0} p_v ≥ 1`: weak unanimity.
    AtLeastOne,
}

fn text<T: fmt::Display, S: Serializer>(x: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateRow {
    pub composition: OrderedPartition,
    pub r: usize,
    #[serde(serialize_with = "text")]
    pub lambda: BigUint,
    pub sign: i8,
    pub sense: ConstraintSense,
    /// `sign · λ`.
    #[serde(serialize_with = "text")]
    pub multiplier: BigInt,
}

/// Signed, `λ`-weighted combination of per-composition constraints.
///
/// Variables are `p(G, i)`, the probability that a symmetric mechanism
/// selects a given vertex of block `i` of `G` (equal across a block by
/// symmetry). Impartiality identifies variables of graphs that differ in a
/// single vertex's out-set. Compositions with sign `+1` contribute their
/// at-most-one constraint and those with sign `−1` their weak-unanimity
/// constraint. When the `λ`-weighted combination cancels every variable and
/// the constants sum to a negative number, the system is infeasible.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub rows: Vec<CertificateRow>,
    #[serde(serialize_with = "text")]
    pub rhs_total: BigInt,
    /// Total for the opposite orientation.
    #[serde(serialize_with = "text")]
    pub alternate_rhs_total: BigInt,
    pub rhs_odd: bool,
    /// The generic exact row combination leaves no variable behind.
    pub cancellation_ok: bool,
    /// Every variable's coefficient is cancelled by its transition partner
    /// with the opposite sign.
    pub pairing_ok: bool,
}

impl Certificate {
    pub fn proves_infeasible(&self) -> bool {
        self.cancellation_ok && self.pairing_ok && self.rhs_total.is_negative()
    }

    pub fn multipliers(&self) -> Vec<BigInt> {
        self.rows.iter().map(|r| r.multiplier.clone()).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut x = x;
        while self.0[x] != root {
            let next = self.0[x];
            self.0[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

pub fn build_certificate(n: usize, cap: usize) -> Result<Certificate> {
    if n < 2 {
        return Err(Error::InvalidParameter("certificates need n ≥ 2".into()));
    }
    let compositions: Vec<OrderedPartition> = enumerate_compositions(n, cap.min(DEFAULT_COMPOSITION_CAP))?.collect();
    let lambdas: Vec<BigUint> = compositions.iter().map(lambda_of).collect();
    let index: HashMap<&OrderedPartition, usize> = compositions.iter().enumerate().map(|(c, p)| (p, c)).collect();

    // variable (c, i) has id offset[c] + i − 1
    let mut offset = Vec::with_capacity(compositions.len());
    let mut total = 0;
    for p in &compositions {
        offset.push(total);
        total += p.r();
    }
    let var = |c: usize, i: usize| offset[c] + i - 1;

    // Impartiality: a vertex's selection probability cannot depend on its own
    // out-set, so graphs that agree outside v share v's variable.
    let mut classes = UnionFind((0..total).collect());
    let mut by_rest: HashMap<(Vertex, DirectedGraph), usize> = HashMap::new();
    for (c, p) in compositions.iter().enumerate() {
        let g = graph_of_composition(p);
        for v in 0..n {
            let rest = g.with_out_set(v, Vec::new()).expect("empty out-set is valid");
            let id = var(c, p.block_of(v));
            match by_rest.get(&(v, rest.clone())) {
                Some(&other) => classes.union(id, other),
                None => {
                    by_rest.insert((v, rest), id);
                }
            }
        }
    }

    let alternating = |odd_sign: i8| -> BigInt {
        compositions
            .iter()
            .zip(&lambdas)
            .map(|(p, l)| {
                let sign = if p.r() % 2 == 1 { odd_sign } else { -odd_sign };
                BigInt::from(sign) * BigInt::from(l.clone())
            })
            .sum()
    };
    let (odd_plus, odd_minus) = (alternating(1), alternating(-1));
    let (odd_sign, rhs_total, alternate_rhs_total) = if odd_plus.is_negative() {
        (1i8, odd_plus, odd_minus)
    } else {
        (-1i8, odd_minus, odd_plus)
    };
    let sign_of = |p: &OrderedPartition| if p.r() % 2 == 1 { odd_sign } else { -odd_sign };

    let q = |x: &BigUint| BigRational::from_integer(BigInt::from(x.clone()));
    let one = BigRational::one();
    let mut system = Vec::new();
    let mut multipliers = Vec::new();
    let mut rows = Vec::new();
    for (c, p) in compositions.iter().enumerate() {
        let sign = sign_of(p);
        let lambda = &lambdas[c];
        let first = p.first_positive_block();
        let sense = if sign > 0 { ConstraintSense::AtMostOne } else { ConstraintSense::AtLeastOne };
        match sense {
            ConstraintSense::AtMostOne => {
                let mut row = LinearInequality::new(one.clone());
                for i in 1..=p.r() {
                    row.add_term(classes.find(var(c, i)), BigRational::from_integer(p.part(i).into()));
                }
                system.push(row);
                multipliers.push(q(lambda));
                if first == 2 {
                    // p(G, 1) ≥ 0 removes the indegree-0 singleton from the row
                    let mut nonneg = LinearInequality::new(BigRational::zero());
                    nonneg.add_term(classes.find(var(c, 1)), -one.clone());
                    system.push(nonneg);
                    multipliers.push(q(lambda));
                }
            }
            ConstraintSense::AtLeastOne => {
                let mut row = LinearInequality::new(-one.clone());
                for i in first..=p.r() {
                    row.add_term(classes.find(var(c, i)), -BigRational::from_integer(p.part(i).into()));
                }
                system.push(row);
                multipliers.push(q(lambda));
            }
        }
        rows.push(CertificateRow {
            composition: p.clone(),
            r: p.r(),
            lambda: lambda.clone(),
            sign,
            sense,
            multiplier: BigInt::from(sign) * BigInt::from(lambda.clone()),
        });
    }
    let check = check_infeasibility(&system, &multipliers)?;
    let cancellation_ok = check.residual.is_empty()
        && check.negative_multipliers.is_empty()
        && check.combined_rhs == BigRational::from_integer(rhs_total.clone());

    // The same cancellation, edge by edge: each variable (G, i) with
    // i ≥ i(G) meets its transition partner with opposite sign and equal
    // weight, and the partner is identified with it by impartiality.
    let mut pairing_ok = true;
    for (c, p) in compositions.iter().enumerate() {
        for i in p.first_positive_block()..=p.r() {
            let (partner, block) = if p.part(i) == 1 {
                (j_transition(p, i), i - 1)
            } else {
                (split_last(p, i), i + 1)
            };
            let Some(partner) = partner else {
                pairing_ok = false;
                continue;
            };
            let d = index[&partner];
            let same_weight = &lambdas[c] * p.part(i) == &lambdas[d] * partner.part(block);
            let opposite = sign_of(p) != sign_of(&partner);
            let identified = classes.find(var(c, i)) == classes.find(var(d, block));
            let in_range = block >= partner.first_positive_block();
            pairing_ok &= same_weight && opposite && identified && in_range;
        }
    }

    let rhs_odd = rhs_total.bit(0);
    Ok(Certificate {
        n,
        rows,
        rhs_total,
        alternate_rhs_total,
        rhs_odd,
        cancellation_ok,
        pairing_ok,
    })
}

/// Pads `g` (on `k + 1 ≥ 2` vertices) with isolated vertices up to
/// `n_target`.
pub fn reduce_add_isolated(g: &DirectedGraph, n_target: usize) -> Result<DirectedGraph> {
    if g.n() < 2 {
        return Err(Error::Precondition("the input needs at least two vertices".into()));
    }
    if n_target < g.n() {
        return Err(Error::Precondition(format!(
            "target size {n_target} is below the input size {}",
            g.n()
        )));
    }
    Ok(g.with_isolated_vertices(n_target - g.n()))
}

/// Adds vertices `u_1, …, u_{n_target − k}` to a composition graph on `k`
/// vertices. Every `u_j` nominates all original vertices, and every original
/// vertex without out-edges nominates `u_1`.
///
/// Originals gain `n_target − k` in-edges each; `u_1` receives at most one
/// nomination (a composition graph has at most one vertex of outdegree 0)
/// and the other added vertices none.
pub fn reduce_add_inneighbors(g: &DirectedGraph, n_target: usize) -> Result<DirectedGraph> {
    let k = g.n();
    if k < 2 {
        return Err(Error::Precondition("the input needs at least two vertices".into()));
    }
    if composition_of_graph(g).is_none() {
        return Err(Error::Precondition("the input is not generated by a composition".into()));
    }
    if n_target < k + 1 {
        return Err(Error::Precondition(format!(
            "target size {n_target} must be at least {}",
            k + 1
        )));
    }
    let mut out: Vec<Vec<Vertex>> = g.out_sets().to_vec();
    for set in &mut out {
        if set.is_empty() {
            set.push(k);
        }
    }
    out.extend((k..n_target).map(|_| (0..k).collect()));
    Ok(DirectedGraph::from_sorted_unchecked(out))
}
