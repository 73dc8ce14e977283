//! Deterministic selection mechanisms used as baselines and controls.
//!
//! Names follow the CLI syntax: `never`, `max-naive`, `follow:ANCHOR`,
//! `majority`, `naive-iter:t`, `naive-sim:t` and `twin:T,t`. Anchors in the
//! CLI syntax are 1-based like the graph file format.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Vertex};
use crate::twin_threshold::{iterated_deletion, run_twin_threshold, select_top, ThresholdPair};

/// The result of a selection: at most one vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Outcome {
    pub selected: Option<Vertex>,
    /// Indegree of the selected vertex in the input graph, 0 if none.
    pub selected_indegree: usize,
}

impl Outcome {
    pub fn none() -> Self {
        Outcome::default()
    }

    pub fn selected(g: &DirectedGraph, v: Vertex) -> Self {
        Outcome {
            selected: Some(v),
            selected_indegree: g.indegree(v),
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.selected == Some(v)
    }
}

/// Anything that maps a graph to at most one vertex.
pub trait SelectionMechanism: Sync {
    fn select(&self, g: &DirectedGraph) -> Outcome;
}

impl<F> SelectionMechanism for F
where
    F: Fn(&DirectedGraph) -> Outcome + Sync,
{
    fn select(&self, g: &DirectedGraph) -> Outcome {
        self(g)
    }
}

pub fn select_never(_g: &DirectedGraph) -> Outcome {
    Outcome::none()
}

/// Greatest vertex among those of maximum indegree. Not impartial.
pub fn select_max_indegree_naive(g: &DirectedGraph) -> Outcome {
    match g.degree_profile().argmax {
        Some(v) => Outcome::selected(g, v),
        None => Outcome::none(),
    }
}

/// Greatest out-neighbour of `anchor`, nothing if the anchor abstains.
pub fn select_follow_fixed(g: &DirectedGraph, anchor: Vertex) -> Outcome {
    match g.out_neighbors(anchor).last() {
        Some(&v) => Outcome::selected(g, v),
        None => Outcome::none(),
    }
}

/// Greatest vertex with indegree at least `⌊n/2⌋ + 1`, if any.
pub fn select_majority_threshold(g: &DirectedGraph) -> Outcome {
    let threshold = g.n() / 2 + 1;
    let indegrees = g.indegrees();
    match indegrees.iter().rposition(|&d| d >= threshold) {
        Some(v) => Outcome::selected(g, v),
        None => Outcome::none(),
    }
}

/// Iterated deletion with a single threshold `t` for both deletion and
/// selection.
pub fn select_naive_iterated(g: &DirectedGraph, t: usize) -> Outcome {
    let trace = iterated_deletion(g, t);
    match select_top(&trace.final_degrees, t) {
        Some(v) => Outcome::selected(g, v),
        None => Outcome::none(),
    }
}

/// Deletes the outgoing edges of every vertex with indegree at least `t` in
/// one step, then selects the greatest vertex of maximum remaining indegree
/// if it is at least `t + 1`.
pub fn select_naive_simultaneous(g: &DirectedGraph, t: usize) -> Outcome {
    let original = g.indegrees();
    let mut remaining = vec![0; g.n()];
    for (u, &d) in original.iter().enumerate() {
        if d < t {
            for &v in g.out_neighbors(u) {
                remaining[v] += 1;
            }
        }
    }
    match select_top(&remaining, t + 1) {
        Some(v) => Outcome::selected(g, v),
        None => Outcome::none(),
    }
}

/// A registry entry with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MechanismId {
    Never,
    MaxIndegreeNaive,
    FollowFixed { anchor: Vertex },
    MajorityThreshold,
    NaiveIterated { t: usize },
    NaiveSimultaneous { t: usize },
    TwinThreshold(ThresholdPair),
}

impl MechanismId {
    /// Checks the parameters against a vertex count.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            MechanismId::FollowFixed { anchor } if anchor >= n => Err(Error::InvalidMechanism(
                format!("anchor {} is not a vertex of a {n}-vertex graph", anchor + 1),
            )),
            MechanismId::NaiveIterated { t } | MechanismId::NaiveSimultaneous { t }
                if t == 0 || t + 1 > n =>
            {
                Err(Error::InvalidMechanism(format!(
                    "threshold t = {t} must lie in 1..={}",
                    n.saturating_sub(1)
                )))
            }
            MechanismId::TwinThreshold(p) => p.validate_for(n),
            _ => Ok(()),
        }
    }

    /// Applies the mechanism. Parameters are assumed valid for `g.n()`; use
    /// [`validate`](Self::validate) first on untrusted input.
    pub fn apply(&self, g: &DirectedGraph) -> Outcome {
        match *self {
            MechanismId::Never => select_never(g),
            MechanismId::MaxIndegreeNaive => select_max_indegree_naive(g),
            MechanismId::FollowFixed { anchor } => select_follow_fixed(g, anchor),
            MechanismId::MajorityThreshold => select_majority_threshold(g),
            MechanismId::NaiveIterated { t } => select_naive_iterated(g, t),
            MechanismId::NaiveSimultaneous { t } => select_naive_simultaneous(g, t),
            MechanismId::TwinThreshold(p) => {
                run_twin_threshold(g, p)
                    .expect("thresholds validated for this n")
                    .0
            }
        }
    }
}

impl SelectionMechanism for MechanismId {
    fn select(&self, g: &DirectedGraph) -> Outcome {
        self.apply(g)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismId::Never => write!(f, "never"),
            MechanismId::MaxIndegreeNaive => write!(f, "max-naive"),
            MechanismId::FollowFixed { anchor } => write!(f, "follow:{}", anchor + 1),
            MechanismId::MajorityThreshold => write!(f, "majority"),
            MechanismId::NaiveIterated { t } => write!(f, "naive-iter:{t}"),
            MechanismId::NaiveSimultaneous { t } => write!(f, "naive-sim:{t}"),
            MechanismId::TwinThreshold(p) => write!(f, "twin:{},{}", p.upper(), p.lower()),
        }
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidMechanism(format!("cannot parse mechanism `{s}`"));
        let int = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let (name, args) = match s.split_once(':') {
            Some((name, args)) => (name, Some(args)),
            None => (s, None),
        };
        match (name, args) {
            ("never", None) => Ok(MechanismId::Never),
            ("max-naive", None) => Ok(MechanismId::MaxIndegreeNaive),
            ("majority", None) => Ok(MechanismId::MajorityThreshold),
            ("follow", None) => Ok(MechanismId::FollowFixed { anchor: 0 }),
            ("follow", Some(a)) => match int(a)? {
                0 => Err(Error::InvalidMechanism("anchors are 1-based".into())),
                anchor => Ok(MechanismId::FollowFixed { anchor: anchor - 1 }),
            },
            ("naive-iter", Some(t)) => Ok(MechanismId::NaiveIterated { t: int(t)? }),
            ("naive-sim", Some(t)) => Ok(MechanismId::NaiveSimultaneous { t: int(t)? }),
            ("twin", Some(args)) => {
                let (upper, lower) = args.split_once(',').ok_or_else(bad)?;
                Ok(MechanismId::TwinThreshold(ThresholdPair::new(int(upper)?, int(lower)?)?))
            }
            _ => Err(bad()),
        }
    }
}
