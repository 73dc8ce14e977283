//! Loop-free directed graphs on a fixed vertex set.
//!
//! Vertices are `0..n` inside the library. The text format and every
//! human-facing report use `1..=n`; conversion happens only in [`io`] and
//! in the CLI. Both numberings have the same order, so "ties go to the
//! greater index" means the same thing in either.

mod class;
mod io;
mod permutation;

pub use class::{ClassEnumerator, GraphClassSpec, OutSetOrder, DEFAULT_ENUMERATION_CAP};
pub use io::{parse_graph, serialize_graph};
pub use permutation::{Permutation, Permutations};

use serde::Serialize;

use crate::error::{Error, Result};

/// Vertex index, 0-based.
pub type Vertex = usize;

/// A directed graph on vertices `0..n` without self-loops or parallel edges.
///
/// Out-neighbour lists are kept sorted, so two graphs are equal exactly when
/// their edge sets are.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedGraph {
    n: usize,
    out: Vec<Vec<Vertex>>,
}

impl DirectedGraph {
    /// The graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        DirectedGraph {
            n,
            out: vec![Vec::new(); n],
        }
    }

    /// Complete directed graph: every ordered pair of distinct vertices.
    pub fn complete(n: usize) -> Self {
        let out = (0..n)
            .map(|u| (0..n).filter(|&v| v != u).collect())
            .collect();
        DirectedGraph { n, out }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) leaves the vertex range 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {u}")));
            }
            out[u].push(v);
        }
        Self::from_out_sets(out)
    }

    /// Builds a graph from one out-neighbour list per vertex.
    pub fn from_out_sets(mut out: Vec<Vec<Vertex>>) -> Result<Self> {
        let n = out.len();
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge out of vertex {u}"
                )));
            }
            if let Some(&v) = list.iter().find(|&&v| v >= n || v == u) {
                return Err(Error::InvalidGraph(format!("invalid edge ({u}, {v})")));
            }
        }
        Ok(DirectedGraph { n, out })
    }

    /// Internal constructor for lists already known to be valid and sorted.
    pub(crate) fn from_sorted_unchecked(out: Vec<Vec<Vertex>>) -> Self {
        debug_assert!(out.iter().enumerate().all(|(u, l)| {
            l.windows(2).all(|w| w[0] < w[1]) && l.iter().all(|&v| v != u && v < out.len())
        }));
        DirectedGraph { n: out.len(), out }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted out-neighbours N⁺(v).
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out[v]
    }

    pub fn out_sets(&self) -> &[Vec<Vertex>] {
        &self.out
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// All edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn outdegree(&self, v: Vertex) -> usize {
        self.out[v].len()
    }

    pub fn indegrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for list in &self.out {
            for &v in list {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn indegree(&self, v: Vertex) -> usize {
        self.out.iter().filter(|l| l.binary_search(&v).is_ok()).count()
    }

    /// Sorted in-neighbour lists N⁻(v) for every vertex.
    pub fn in_neighbors(&self) -> Vec<Vec<Vertex>> {
        let mut inn = vec![Vec::new(); self.n];
        for (u, list) in self.out.iter().enumerate() {
            for &v in list {
                inn[v].push(u);
            }
        }
        inn
    }

    /// Δ(G), the maximum indegree (0 for the empty vertex set).
    pub fn max_indegree(&self) -> usize {
        self.indegrees().into_iter().max().unwrap_or(0)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let indegrees = self.indegrees();
        let outdegrees: Vec<usize> = self.out.iter().map(Vec::len).collect();
        let max_indegree = indegrees.iter().copied().max().unwrap_or(0);
        let argmax = indegrees.iter().rposition(|&d| d == max_indegree);
        DegreeProfile {
            indegrees,
            outdegrees,
            max_indegree,
            argmax,
        }
    }

    /// Copy of the graph with the out-set of `v` replaced.
    pub fn with_out_set(&self, v: Vertex, mut set: Vec<Vertex>) -> Result<Self> {
        set.sort_unstable();
        set.dedup();
        if set.iter().any(|&u| u == v || u >= self.n) {
            return Err(Error::InvalidGraph(format!(
                "out-set of vertex {v} contains an invalid target"
            )));
        }
        let mut out = self.out.clone();
        out[v] = set;
        Ok(DirectedGraph { n: self.n, out })
    }

    /// True when both graphs have the same edges outside `{v} × N`.
    pub fn agrees_outside(&self, other: &DirectedGraph, v: Vertex) -> bool {
        self.n == other.n
            && self
                .out
                .iter()
                .zip(&other.out)
                .enumerate()
                .all(|(u, (a, b))| u == v || a == b)
    }

    /// The vertices whose out-sets differ between two graphs on the same
    /// vertex set.
    pub fn differing_vertices(&self, other: &DirectedGraph) -> Vec<Vertex> {
        assert_eq!(self.n, other.n, "graphs on different vertex sets");
        (0..self.n).filter(|&u| self.out[u] != other.out[u]).collect()
    }

    /// G_π with E_π = {(π(u), π(v)) : (u, v) ∈ E}.
    pub fn relabel(&self, pi: &Permutation) -> Result<Self> {
        if pi.len() != self.n {
            return Err(Error::InvalidPermutation(format!(
                "permutation on {} points applied to a graph on {} vertices",
                pi.len(),
                self.n
            )));
        }
        let mut out = vec![Vec::new(); self.n];
        for (u, list) in self.out.iter().enumerate() {
            let pu = pi.apply(u);
            out[pu] = list.iter().map(|&v| pi.apply(v)).collect();
            out[pu].sort_unstable();
        }
        Ok(DirectedGraph { n: self.n, out })
    }

    /// A copy with `extra` isolated vertices appended.
    pub fn with_isolated_vertices(&self, extra: usize) -> Self {
        let mut out = self.out.clone();
        out.resize(self.n + extra, Vec::new());
        DirectedGraph {
            n: self.n + extra,
            out,
        }
    }
}

/// Per-vertex degrees with Δ(G) and the greatest vertex attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub indegrees: Vec<usize>,
    pub outdegrees: Vec<usize>,
    pub max_indegree: usize,
    /// `None` only for the graph on zero vertices.
    pub argmax: Option<Vertex>,
}
