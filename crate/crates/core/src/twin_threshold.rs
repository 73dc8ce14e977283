//! The twin threshold mechanism.
//!
//! Starting from the highest indegree level `d = Δ(G)`, the mechanism
//! repeatedly picks the greatest not-yet-processed vertex whose current
//! indegree equals `d` and deletes its outgoing edges, lowering the current
//! indegree of each of its out-neighbours by one. When no unprocessed vertex
//! sits at level `d`, the level drops by one. The loop stops once `d`
//! falls below the lower threshold `t`. Finally, the greatest vertex with
//! maximum remaining indegree is selected if that indegree reaches the upper
//! threshold `T`; otherwise nothing is selected.
//!
//! [`run_twin_threshold`] returns a full [`DeletionTrace`] of the loop.
//! The planning functions pick `(T, t)` for a target class and check the
//! sufficient impartiality condition `T² + 3T + t − t² > 2k(n + 2)` in exact
//! integer arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Vertex};
use crate::mechanisms::Outcome;

/// Upper threshold `T` and lower threshold `t`, with `1 <= t <= T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ThresholdPair {
    upper: usize,
    lower: usize,
}

impl ThresholdPair {
    pub fn new(upper: usize, lower: usize) -> Result<Self> {
        if lower == 0 {
            return Err(Error::InvalidThresholds("lower threshold t must be at least 1".into()));
        }
        if lower > upper {
            return Err(Error::InvalidThresholds(format!(
                "lower threshold t = {lower} exceeds upper threshold T = {upper}"
            )));
        }
        Ok(ThresholdPair { upper, lower })
    }

    /// `T`.
    pub fn upper(&self) -> usize {
        self.upper
    }

    /// `t`.
    pub fn lower(&self) -> usize {
        self.lower
    }

    /// Checks `T <= n - 1`, the remaining range condition for `n` vertices.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if self.upper + 1 > n {
            return Err(Error::InvalidThresholds(format!(
                "upper threshold T = {} must be at most n - 1 = {}",
                self.upper,
                n.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for ThresholdPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.upper, self.lower)
    }
}

/// One iteration of the deletion loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeletionRecord {
    pub iteration: usize,
    pub vertex: Vertex,
    /// Current indegree of `vertex` when its outgoing edges were deleted.
    pub dstar: usize,
}

/// Everything the deletion loop did on one input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeletionTrace {
    /// One record per iteration, in iteration order.
    pub deletions: Vec<DeletionRecord>,
    /// Indegrees after the loop, ignoring deleted edges.
    pub final_degrees: Vec<usize>,
    /// Number of iterations `I`.
    pub iteration_count: usize,
    /// Iteration in which each vertex lost its outgoing edges; `I` for
    /// vertices that kept them.
    pub istar: Vec<usize>,
    /// Current indegree at deletion time; `None` for vertices that kept
    /// their outgoing edges.
    pub dstar: Vec<Option<usize>>,
}

impl DeletionTrace {
    pub fn is_deleted(&self, v: Vertex) -> bool {
        self.dstar[v].is_some()
    }

    /// δ⋆ extended to every vertex: the final degree for vertices that were
    /// never processed.
    pub fn dstar_or_final(&self, v: Vertex) -> usize {
        self.dstar[v].unwrap_or(self.final_degrees[v])
    }

    /// The lexicographic key `(δ⋆(v), v)` used to order processing.
    pub fn key(&self, v: Vertex) -> (usize, Vertex) {
        (self.dstar_or_final(v), v)
    }

    pub fn deleted_set(&self) -> Vec<Vertex> {
        self.deletions.iter().map(|r| r.vertex).collect()
    }
}

/// The iterated deletion loop with lower threshold `lower`.
pub(crate) fn iterated_deletion(g: &DirectedGraph, lower: usize) -> DeletionTrace {
    let n = g.n();
    let mut degrees = g.indegrees();
    let mut deleted = vec![false; n];
    let mut dstar = vec![None; n];
    let mut deletions = Vec::new();
    let mut level = degrees.iter().copied().max().unwrap_or(0);

    while level >= lower && level > 0 {
        let candidate = (0..n).rev().find(|&u| !deleted[u] && degrees[u] == level);
        let Some(v) = candidate else {
            level -= 1;
            continue;
        };
        deletions.push(DeletionRecord {
            iteration: deletions.len(),
            vertex: v,
            dstar: level,
        });
        dstar[v] = Some(level);
        deleted[v] = true;
        for &u in g.out_neighbors(v) {
            degrees[u] -= 1;
        }
    }

    let iteration_count = deletions.len();
    let mut istar = vec![iteration_count; n];
    for r in &deletions {
        istar[r.vertex] = r.iteration;
    }
    DeletionTrace {
        deletions,
        final_degrees: degrees,
        iteration_count,
        istar,
        dstar,
    }
}

/// The greatest vertex of maximum degree, if that degree is at least
/// `threshold`.
pub(crate) fn select_top(degrees: &[usize], threshold: usize) -> Option<Vertex> {
    let top = *degrees.iter().max()?;
    if top >= threshold {
        degrees.iter().rposition(|&d| d == top)
    } else {
        None
    }
}

/// Runs the twin threshold mechanism and records its deletion trace.
pub fn run_twin_threshold(
    g: &DirectedGraph,
    thresholds: ThresholdPair,
) -> Result<(Outcome, DeletionTrace)> {
    thresholds.validate_for(g.n())?;
    let trace = iterated_deletion(g, thresholds.lower());
    let outcome = match select_top(&trace.final_degrees, thresholds.upper()) {
        Some(v) => Outcome::selected(g, v),
        None => Outcome::none(),
    };
    Ok((outcome, trace))
}

/// Δ(G) − δ⁻(f(G), G), with an empty selection counting as indegree 0.
pub fn additive_gap(g: &DirectedGraph, outcome: &Outcome) -> usize {
    g.max_indegree() - outcome.selected_indegree
}

/// Threshold choice for a class `G_n(k)` together with its guarantees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanReport {
    pub n: usize,
    pub k: usize,
    pub thresholds: ThresholdPair,
    /// `(T² + 3T + t − t²) / 2`; the numerator is always even.
    pub condition_lhs: i128,
    /// `k(n + 2)`.
    pub condition_rhs: i128,
    /// `condition_lhs > condition_rhs`.
    pub impartial_certified: bool,
    /// `T + ⌊kn/t⌋ − 2`, the additive guarantee of the pair.
    pub alpha_bound: i128,
    /// The planned upper threshold did not fit below `n`; the pair was
    /// clamped and the plan should be read as "never selects".
    pub degenerate: bool,
}

/// Checks the sufficient impartiality condition for `(T, t)` on `G_n(k)`.
pub fn validate_thresholds(n: usize, k: usize, thresholds: ThresholdPair) -> Result<PlanReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={}", n - 1)));
    }
    thresholds.validate_for(n)?;
    Ok(report(n, k, thresholds, false))
}

fn report(n: usize, k: usize, p: ThresholdPair, degenerate: bool) -> PlanReport {
    let (upper, lower) = (p.upper() as i128, p.lower() as i128);
    let numerator = upper * upper + 3 * upper + lower - lower * lower;
    debug_assert_eq!(numerator % 2, 0);
    let condition_lhs = numerator / 2;
    let condition_rhs = k as i128 * (n as i128 + 2);
    PlanReport {
        n,
        k,
        thresholds: p,
        condition_lhs,
        condition_rhs,
        impartial_certified: condition_lhs > condition_rhs,
        alpha_bound: upper + (k as i128 * n as i128) / lower - 2,
        degenerate,
    }
}

/// ⌈√x⌉ for integers.
pub fn ceil_sqrt(x: u128) -> u128 {
    let r = floor_sqrt(x);
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// ⌊√x⌋ for integers, by Newton iteration on integers.
pub fn floor_sqrt(x: u128) -> u128 {
    if x < 2 {
        return x;
    }
    let mut r = 1u128 << (x.ilog2() / 2 + 1);
    loop {
        let next = (r + x / r) / 2;
        if next >= r {
            break;
        }
        r = next;
    }
    debug_assert!(r * r <= x && (r + 1) * (r + 1) > x);
    r
}

/// Thresholds for outdegree one: `t = ⌈√n⌉` and the largest `T` with
/// `T + 1/2 <= √(t² − t + 2n + 25/4)`.
pub fn plan_thresholds_k1(n: usize) -> Result<PlanReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    let big_n = n as u128;
    let lower = ceil_sqrt(big_n);
    // (2T + 1)² <= 4(t² − t + 2n) + 25
    let scaled = 4 * (lower * lower - lower + 2 * big_n) + 25;
    let upper = (floor_sqrt(scaled) - 1) / 2;
    Ok(clamped_plan(n, 1, upper, lower))
}

fn clamped_plan(n: usize, k: usize, upper: u128, lower: u128) -> PlanReport {
    let max = (n - 1) as u128;
    let degenerate = upper > max || lower > max;
    let lower = lower.clamp(1, max) as usize;
    let upper = (upper.min(max) as usize).max(lower);
    let pair = ThresholdPair::new(upper, lower).expect("clamped into range");
    report(n, k, pair, degenerate)
}

/// Thresholds for `G_n(k)` with `k <= c·n^κ`: the real values
/// `T = (5/2)√c·n^((1+κ)/2) − 1` and `t = (1/2)√c·n^((1+κ)/2)`, with `T`
/// rounded up and `t` rounded down. The impartiality flag is recomputed
/// from the rounded integers.
pub fn plan_thresholds_general(n: usize, k: usize, kappa: f64, c: f64) -> Result<PlanReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa} must lie in [0, 1]")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..={}", n - 1)));
    }
    let scale = c.sqrt() * (n as f64).powf((1.0 + kappa) / 2.0);
    if (k as f64) > c * (n as f64).powf(kappa) * (1.0 + ROUNDING_SLACK) {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds c·n^kappa = {}",
            c * (n as f64).powf(kappa)
        )));
    }
    // A value within ROUNDING_SLACK of an integer is taken to be that integer.
    let upper = (2.5 * scale - 1.0 - ROUNDING_SLACK).ceil().max(0.0) as u128;
    let lower = (0.5 * scale + ROUNDING_SLACK).floor().max(0.0) as u128;
    Ok(clamped_plan(n, k, upper, lower))
}

const ROUNDING_SLACK: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges.iter().map(|&(u, v)| (u - 1, v - 1))).unwrap()
    }

    #[test]
    fn empty_graph_has_empty_trace() {
        let (out, trace) =
            run_twin_threshold(&DirectedGraph::empty(4), ThresholdPair::new(2, 1).unwrap())
                .unwrap();
        assert_eq!(out, Outcome::none());
        assert!(trace.deletions.is_empty());
        assert_eq!(trace.iteration_count, 0);
    }

    #[test]
    fn star_selects_centre() {
        let g = graph(5, &[(2, 1), (3, 1), (4, 1), (5, 1)]);
        let (out, trace) = run_twin_threshold(&g, ThresholdPair::new(3, 2).unwrap()).unwrap();
        assert_eq!(
            trace.deletions,
            vec![DeletionRecord { iteration: 0, vertex: 0, dstar: 4 }]
        );
        assert_eq!(trace.final_degrees, vec![4, 0, 0, 0, 0]);
        assert_eq!(out.selected, Some(0));
        assert_eq!(out.selected_indegree, 4);
    }

    #[test]
    fn cascade_example() {
        let g = graph(5, &[(1, 5), (2, 5), (3, 5), (5, 4), (3, 4)]);
        let (out, trace) = run_twin_threshold(&g, ThresholdPair::new(2, 1).unwrap()).unwrap();
        assert_eq!(
            trace.deletions,
            vec![
                DeletionRecord { iteration: 0, vertex: 4, dstar: 3 },
                DeletionRecord { iteration: 1, vertex: 3, dstar: 1 },
            ]
        );
        assert_eq!(trace.final_degrees, vec![0, 0, 0, 1, 3]);
        assert_eq!(trace.istar, vec![2, 2, 2, 1, 0]);
        assert_eq!(out.selected, Some(4));
        assert_eq!(out.selected_indegree, 3);
    }

    #[test]
    fn invalid_thresholds() {
        assert!(ThresholdPair::new(1, 0).is_err());
        assert!(ThresholdPair::new(1, 2).is_err());
        let p = ThresholdPair::new(5, 1).unwrap();
        assert!(run_twin_threshold(&DirectedGraph::empty(5), p).is_err());
    }

    #[test]
    fn gap_convention() {
        let g = graph(5, &[(2, 1), (3, 1), (4, 1), (5, 1)]);
        assert_eq!(additive_gap(&DirectedGraph::empty(3), &Outcome::none()), 0);
        assert_eq!(additive_gap(&g, &Outcome::selected(&g, 0)), 0);
        assert_eq!(additive_gap(&g, &Outcome::none()), 4);
    }

    #[test]
    fn sufficient_condition_integer_check() {
        let r = validate_thresholds(100, 1, ThresholdPair::new(16, 10).unwrap()).unwrap();
        assert_eq!((r.condition_lhs, r.condition_rhs, r.impartial_certified), (107, 102, true));
        let r = validate_thresholds(100, 1, ThresholdPair::new(10, 10).unwrap()).unwrap();
        assert_eq!((r.condition_lhs, r.impartial_certified), (20, false));
        let r = validate_thresholds(5, 1, ThresholdPair::new(4, 1).unwrap()).unwrap();
        assert_eq!((r.condition_lhs, r.condition_rhs, r.impartial_certified), (14, 7, true));
        assert!(validate_thresholds(5, 5, ThresholdPair::new(4, 1).unwrap()).is_err());
        assert!(validate_thresholds(5, 1, ThresholdPair::new(5, 1).unwrap()).is_err());
    }

    #[test]
    fn k1_plans() {
        let r = plan_thresholds_k1(100).unwrap();
        assert_eq!((r.thresholds.lower(), r.thresholds.upper(), r.alpha_bound), (10, 16, 24));
        assert!(r.impartial_certified && !r.degenerate);
        let r = plan_thresholds_k1(4).unwrap();
        assert_eq!((r.thresholds.lower(), r.thresholds.upper(), r.alpha_bound), (2, 3, 3));
        assert!(!r.degenerate);
        let r = plan_thresholds_k1(2).unwrap();
        assert!(r.degenerate);
        assert!(plan_thresholds_k1(1).is_err());
    }

    #[test]
    fn general_plans() {
        let r = plan_thresholds_general(100, 1, 0.0, 1.0).unwrap();
        assert_eq!((r.thresholds.upper(), r.thresholds.lower()), (24, 5));
        assert_eq!(r.condition_lhs, 314);
        assert!(r.impartial_certified);
        let r = plan_thresholds_general(16, 1, 1.0, 1.0).unwrap();
        assert!(r.degenerate);
        assert!(plan_thresholds_general(16, 5, 0.0, 1.0).is_err());
        assert!(plan_thresholds_general(16, 1, 1.5, 1.0).is_err());
        assert!(plan_thresholds_general(16, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn integer_square_roots() {
        for x in 0u128..2000 {
            let r = floor_sqrt(x);
            assert!(r * r <= x && (r + 1) * (r + 1) > x);
            let c = ceil_sqrt(x);
            assert!(c * c >= x && (c == 0 || (c - 1) * (c - 1) < x));
        }
        assert_eq!(floor_sqrt(u64::MAX as u128), u32::MAX as u128);
    }
}
