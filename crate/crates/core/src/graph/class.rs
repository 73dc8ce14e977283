//! The graph classes G_n, G⁺_n, G_n(k) and G⁺_n(k): membership, exhaustive
//! enumeration, uniform sampling and single-vertex deviations.
//!
//! Every class here is a product over vertices of "admissible out-sets", so
//! all three operations reduce to ranking subsets of the `n - 1` other
//! vertices. Out-sets are ordered lexicographically by their sorted member
//! lists with a proper prefix first, which puts abstention (the empty set)
//! at rank 0:
//!
//! ```text
//! {} < {1} < {1,2} < {1,2,3} < {1,3} < {2} < {2,3} < {3}
//! ```
//!
//! Graphs are enumerated as a mixed-radix odometer over these ranks with
//! vertex 0 as the most significant digit.
//!
//! Sampling uses ChaCha20 (`rand_chacha::ChaCha20Rng`), keyed with
//! `seed_from_u64(seed)` and stream id `stream`. Each vertex draws one
//! 64-bit word per attempt and keeps it when it is below the largest
//! multiple of the out-set count (rejection sampling), then reduces modulo
//! the count. Vertices draw in increasing order.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};

use super::{DirectedGraph, Vertex};

/// Default ceiling on the number of graphs an exhaustive pass may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Largest vertex count for which classes can be enumerated or sampled.
pub const MAX_CLASS_VERTICES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GraphClassSpec {
    n: usize,
    max_outdegree: Option<usize>,
    positive_outdegree: bool,
}

impl GraphClassSpec {
    /// `max_outdegree = None` means unbounded (k = n - 1).
    pub fn new(n: usize, max_outdegree: Option<usize>, positive_outdegree: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidClass("n must be at least 1".into()));
        }
        if n > MAX_CLASS_VERTICES {
            return Err(Error::InvalidClass(format!(
                "n = {n} exceeds the supported maximum of {MAX_CLASS_VERTICES}"
            )));
        }
        if let Some(k) = max_outdegree {
            if k == 0 || k > n - 1 {
                return Err(Error::InvalidClass(format!(
                    "outdegree bound k = {k} must lie in 1..={}",
                    n - 1
                )));
            }
        }
        Ok(GraphClassSpec {
            n,
            max_outdegree,
            positive_outdegree,
        })
    }

    /// G_n(k).
    pub fn bounded(n: usize, k: usize) -> Result<Self> {
        Self::new(n, Some(k), false)
    }

    /// G_n.
    pub fn unbounded(n: usize) -> Result<Self> {
        Self::new(n, None, false)
    }

    /// The same class restricted to strictly positive outdegrees.
    pub fn positive(self) -> Self {
        GraphClassSpec {
            positive_outdegree: true,
            ..self
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_outdegree(&self) -> Option<usize> {
        self.max_outdegree
    }

    /// The outdegree bound in force, `n - 1` when unbounded.
    pub fn effective_max_outdegree(&self) -> usize {
        self.max_outdegree.unwrap_or(self.n - 1)
    }

    pub fn positive_outdegree(&self) -> bool {
        self.positive_outdegree
    }

    pub fn contains(&self, g: &DirectedGraph) -> bool {
        g.n() == self.n
            && (0..self.n).all(|v| {
                let d = g.outdegree(v);
                d <= self.effective_max_outdegree() && (!self.positive_outdegree || d >= 1)
            })
    }

    pub fn out_set_order(&self) -> OutSetOrder {
        OutSetOrder::new(
            self.n - 1,
            usize::from(self.positive_outdegree),
            self.effective_max_outdegree(),
        )
    }

    /// Number of admissible out-sets of a single vertex.
    pub fn out_set_count(&self) -> u64 {
        self.out_set_order().count()
    }

    /// Number of graphs in the class, `None` when it does not fit in `u128`.
    pub fn class_size(&self) -> Option<u128> {
        let per_vertex = u128::from(self.out_set_count());
        (0..self.n).try_fold(1u128, |acc, _| acc.checked_mul(per_vertex))
    }

    /// An indexed enumeration of the whole class, refused above `cap` graphs.
    pub fn enumerate(&self, cap: u64) -> Result<ClassEnumerator> {
        match self.class_size() {
            Some(size) if size <= u128::from(cap) => Ok(ClassEnumerator::new(*self, size as u64)),
            size => Err(Error::CapExceeded {
                what: format!("graph class {self}"),
                size: size.map_or_else(|| "more than 2^128".to_string(), |s| s.to_string()),
                cap,
            }),
        }
    }

    /// A uniform member of the class drawn from stream 0 of `seed`.
    pub fn sample(&self, seed: u64) -> Result<DirectedGraph> {
        self.sample_stream(seed, 0)
    }

    /// A uniform member of the class drawn from the given ChaCha20 stream.
    pub fn sample_stream(&self, seed: u64, stream: u64) -> Result<DirectedGraph> {
        let order = self.out_set_order();
        let count = order.count();
        if count == 0 {
            return Err(Error::InvalidClass(format!("{self} is empty")));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let out = (0..self.n)
            .map(|v| {
                let rank = uniform_below(&mut rng, count);
                slots_to_vertices(v, order.unrank(rank))
            })
            .collect();
        Ok(DirectedGraph::from_sorted_unchecked(out))
    }

    /// Every graph of the class that agrees with `g` outside `{v} × N`,
    /// `g` included, in out-set order.
    pub fn deviations<'a>(
        &self,
        g: &'a DirectedGraph,
        v: Vertex,
    ) -> Result<impl Iterator<Item = DirectedGraph> + 'a> {
        if !self.contains(g) {
            return Err(Error::Precondition(format!("graph is not a member of {self}")));
        }
        if v >= self.n {
            return Err(Error::Precondition(format!("vertex {v} out of range")));
        }
        let order = self.out_set_order();
        Ok((0..order.count()).map(move |rank| {
            let mut out = g.out_sets().to_vec();
            out[v] = slots_to_vertices(v, order.unrank(rank));
            DirectedGraph::from_sorted_unchecked(out)
        }))
    }
}

impl std::fmt::Display for GraphClassSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let plus = if self.positive_outdegree { "+" } else { "" };
        match self.max_outdegree {
            Some(k) => write!(f, "G{plus}_{}({k})", self.n),
            None => write!(f, "G{plus}_{}", self.n),
        }
    }
}

/// Maps a subset of the `n - 1` "other vertex" slots of `v` to vertex ids.
fn slots_to_vertices(v: Vertex, slots: Vec<usize>) -> Vec<Vertex> {
    slots
        .into_iter()
        .map(|s| if s < v { s } else { s + 1 })
        .collect()
}

fn vertices_to_slots(v: Vertex, set: &[Vertex]) -> Vec<usize> {
    set.iter().map(|&u| if u < v { u } else { u - 1 }).collect()
}

/// Uniform integer in `0..bound` by rejection on 64-bit words.
fn uniform_below(rng: &mut ChaCha20Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    // 2^64 mod bound values at the top of the range are rejected.
    let reject = (u64::MAX % bound + 1) % bound;
    let limit = u64::MAX - reject;
    loop {
        let x = rng.next_u64();
        if x <= limit {
            return x % bound;
        }
    }
}

/// Lexicographic ranking of subsets of `0..m` whose size lies in
/// `min_size..=max_size`, with `min_size <= 1`.
#[derive(Clone, Debug)]
pub struct OutSetOrder {
    m: usize,
    min_size: usize,
    max_size: usize,
    /// `extensions[a][b]` = number of subsets of an `a`-set with at most `b`
    /// elements.
    extensions: Vec<Vec<u64>>,
}

impl OutSetOrder {
    pub fn new(m: usize, min_size: usize, max_size: usize) -> Self {
        assert!(min_size <= 1, "only abstention can be excluded");
        assert!(m < 64, "subset counts must fit in u64");
        let max_size = max_size.min(m);
        let mut binom = vec![vec![0u64; m + 1]; m + 1];
        for a in 0..=m {
            binom[a][0] = 1;
            for j in 1..=a {
                binom[a][j] = binom[a - 1][j - 1] + if j < a { binom[a - 1][j] } else { 0 };
            }
        }
        let extensions = (0..=m)
            .map(|a| {
                let mut row = Vec::with_capacity(max_size + 1);
                let mut acc = 0u64;
                for (b, &c) in binom[a].iter().enumerate().take(max_size + 1) {
                    if b <= a {
                        acc += c;
                    }
                    row.push(acc);
                }
                row
            })
            .collect();
        OutSetOrder {
            m,
            min_size,
            max_size,
            extensions,
        }
    }

    /// Subsets of `0..a` with at most `budget` elements.
    fn ext(&self, a: usize, budget: usize) -> u64 {
        self.extensions[a][budget.min(self.max_size)]
    }

    pub fn count(&self) -> u64 {
        if self.m == 0 || self.max_size == 0 {
            return u64::from(self.min_size == 0);
        }
        self.ext(self.m, self.max_size) - u64::from(self.min_size == 1)
    }

    /// The subset of rank `rank`, as a sorted list.
    pub fn unrank(&self, mut rank: u64) -> Vec<usize> {
        assert!(rank < self.count(), "rank {rank} out of range");
        let mut set = Vec::new();
        if self.min_size == 0 {
            if rank == 0 {
                return set;
            }
            rank -= 1;
        }
        let mut start = 0;
        let mut budget = self.max_size;
        loop {
            let mut chosen = None;
            for x in start..self.m {
                let block = self.ext(self.m - 1 - x, budget - 1);
                if rank < block {
                    chosen = Some(x);
                    break;
                }
                rank -= block;
            }
            let x = chosen.expect("rank within count");
            set.push(x);
            if rank == 0 {
                return set;
            }
            rank -= 1;
            start = x + 1;
            budget -= 1;
        }
    }

    /// Inverse of [`unrank`](Self::unrank); `None` for inadmissible sets.
    pub fn rank(&self, set: &[usize]) -> Option<u64> {
        if set.len() < self.min_size
            || set.len() > self.max_size
            || set.windows(2).any(|w| w[0] >= w[1])
            || set.last().is_some_and(|&x| x >= self.m)
        {
            return None;
        }
        let mut rank = 0u64;
        if self.min_size == 0 {
            if set.is_empty() {
                return Some(0);
            }
            rank += 1;
        }
        let mut start = 0;
        let mut budget = self.max_size;
        for (pos, &x) in set.iter().enumerate() {
            if pos > 0 {
                // the prefix itself precedes its extensions
                rank += 1;
            }
            for y in start..x {
                rank += self.ext(self.m - 1 - y, budget - 1);
            }
            start = x + 1;
            budget -= 1;
        }
        Some(rank)
    }
}

/// Indexed access to every graph of a class.
///
/// Index `i` decodes to per-vertex out-set ranks in mixed radix with vertex 0
/// most significant, so `0..len()` is the documented enumeration order and
/// disjoint index ranges can be handed to different workers.
#[derive(Clone, Debug)]
pub struct ClassEnumerator {
    spec: GraphClassSpec,
    order: OutSetOrder,
    choices: Vec<Vec<usize>>,
    len: u64,
}

impl ClassEnumerator {
    fn new(spec: GraphClassSpec, len: u64) -> Self {
        let order = spec.out_set_order();
        let choices = (0..order.count()).map(|r| order.unrank(r)).collect();
        ClassEnumerator {
            spec,
            order,
            choices,
            len,
        }
    }

    pub fn spec(&self) -> &GraphClassSpec {
        &self.spec
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of out-set choices per vertex (the radix).
    pub fn radix(&self) -> u64 {
        self.choices.len() as u64
    }

    /// Index weight of vertex `v`'s digit.
    pub fn weight(&self, v: Vertex) -> u64 {
        let n = self.spec.n();
        (0..n - 1 - v).fold(1u64, |acc, _| acc * self.radix())
    }

    pub fn graph_at(&self, mut index: u64) -> DirectedGraph {
        assert!(index < self.len, "index {index} out of range");
        let n = self.spec.n();
        let radix = self.radix();
        let mut out = vec![Vec::new(); n];
        for v in (0..n).rev() {
            let digit = (index % radix) as usize;
            index /= radix;
            out[v] = slots_to_vertices(v, self.choices[digit].clone());
        }
        DirectedGraph::from_sorted_unchecked(out)
    }

    pub fn index_of(&self, g: &DirectedGraph) -> Option<u64> {
        if g.n() != self.spec.n() {
            return None;
        }
        let radix = self.radix();
        (0..g.n()).try_fold(0u64, |acc, v| {
            let rank = self
                .order
                .rank(&vertices_to_slots(v, g.out_neighbors(v)))?;
            Some(acc * radix + rank)
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = DirectedGraph> + '_ {
        (0..self.len).map(move |i| self.graph_at(i))
    }
}
