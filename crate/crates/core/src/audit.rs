//! Brute-force and sampled verification of selection mechanisms.
//!
//! * impartiality: no vertex can change its own selection status by
//!   rewriting its outgoing edges;
//! * additive gap: worst `Δ(G) − δ⁻(f(G), G)` over a class;
//! * deletion-trace invariants of the twin threshold mechanism;
//! * the randomized lift of a deterministic mechanism and its
//!   symmetrization over all vertex relabelings, in exact rationals.
//!
//! Exhaustive passes evaluate the mechanism once per graph of the class and
//! then compare outcomes inside each group of graphs that differ only in
//! one vertex's out-set. All merges are order-independent, so reports do not
//! depend on the number of worker threads.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{
    serialize_graph, ClassEnumerator, DirectedGraph, GraphClassSpec, Permutation, Vertex,
    DEFAULT_ENUMERATION_CAP,
};
use crate::mechanisms::{Outcome, SelectionMechanism};
use crate::twin_threshold::{additive_gap, run_twin_threshold, DeletionTrace, ThresholdPair};

/// Default bound on `n` for symmetrization (`n!` relabelings per graph).
pub const DEFAULT_SYMMETRIZATION_CAP: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditMode {
    Exhaustive,
    Sampled { seed: u64, trials: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditConfig {
    /// Largest class an exhaustive pass may enumerate.
    pub cap: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Keep at most this many violation witnesses (all are counted).
    pub max_witnesses: Option<usize>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            cap: DEFAULT_ENUMERATION_CAP,
            jobs: None,
            max_witnesses: None,
        }
    }
}

fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("jobs must be at least 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn graph_text<S: Serializer>(g: &DirectedGraph, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&serialize_graph(g))
}

fn optional_graph_text<S: Serializer>(
    g: &Option<DirectedGraph>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match g {
        Some(g) => s.serialize_some(&serialize_graph(g)),
        None => s.serialize_none(),
    }
}

/// A violation keyed by both serialized graphs.
type KeyedViolation = (String, String, Violation);

/// Two graphs that differ only in the out-set of `deviator` and disagree on
/// whether `deviator` is selected.
///
/// Oriented so that `graph_a` has the smaller canonical serialization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(serialize_with = "graph_text")]
    pub graph_a: DirectedGraph,
    #[serde(serialize_with = "graph_text")]
    pub graph_b: DirectedGraph,
    pub deviator: Vertex,
    pub selected_in_a: bool,
    pub selected_in_b: bool,
}

impl Violation {
    fn oriented(
        g: DirectedGraph,
        h: DirectedGraph,
        deviator: Vertex,
        in_g: bool,
        in_h: bool,
    ) -> KeyedViolation {
        let (sg, sh) = (serialize_graph(&g), serialize_graph(&h));
        if sg <= sh {
            let v = Violation { graph_a: g, graph_b: h, deviator, selected_in_a: in_g, selected_in_b: in_h };
            (sg, sh, v)
        } else {
            let v = Violation { graph_a: h, graph_b: g, deviator, selected_in_a: in_h, selected_in_b: in_g };
            (sh, sg, v)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImpartialityReport {
    pub class: String,
    pub mode: AuditMode,
    /// Base graphs examined: the whole class, or the sampled graphs.
    pub graphs_checked: u64,
    pub mechanism_runs: u64,
    /// Number of distinct unordered violating pairs found.
    pub violation_count: u64,
    pub violations: Vec<Violation>,
}

impl ImpartialityReport {
    pub fn is_impartial(&self) -> bool {
        self.violation_count == 0
    }
}

/// Encodes a selection as `0` (none) or `v + 1`.
fn encode(outcome: Outcome) -> u8 {
    outcome.selected.map_or(0, |v| v as u8 + 1)
}

fn evaluate_class<M>(m: &M, e: &ClassEnumerator) -> Vec<u8>
where
    M: SelectionMechanism + ?Sized,
{
    (0..e.len() as usize)
        .into_par_iter()
        .map(|i| encode(m.select(&e.graph_at(i as u64))))
        .collect()
}

/// Groups of class indices that differ only in the digit of one vertex.
struct DeviationGroups<'a> {
    e: &'a ClassEnumerator,
}

impl DeviationGroups<'_> {
    fn count(&self) -> u64 {
        self.e.len() / self.e.radix().max(1)
    }

    /// Base index (digit of `v` equal to 0) of group `b` for vertex `v`.
    fn base(&self, v: Vertex, b: u64) -> u64 {
        let w = self.e.weight(v);
        (b / w) * w * self.e.radix() + b % w
    }

    fn members(&self, v: Vertex, base: u64) -> impl Iterator<Item = u64> {
        let w = self.e.weight(v);
        (0..self.e.radix()).map(move |c| base + c * w)
    }
}

/// Checks impartiality of `m` on a class.
///
/// Exhaustive mode compares every graph with every deviation of every
/// vertex. Sampled mode draws `trials` base graphs (trial `i` uses ChaCha20
/// stream `i` of `seed`) and checks all deviations of all their vertices.
pub fn check_impartiality<M>(
    m: &M,
    spec: &GraphClassSpec,
    mode: AuditMode,
    cfg: &AuditConfig,
) -> Result<ImpartialityReport>
where
    M: SelectionMechanism + ?Sized,
{
    match mode {
        AuditMode::Exhaustive => {
            let e = spec.enumerate(cfg.cap)?;
            with_jobs(cfg.jobs, || exhaustive_impartiality(m, &e, cfg.max_witnesses))
        }
        AuditMode::Sampled { seed, trials } => {
            with_jobs(cfg.jobs, || sampled_impartiality(m, spec, seed, trials, cfg.max_witnesses))?
        }
    }
}

fn exhaustive_impartiality<M>(
    m: &M,
    e: &ClassEnumerator,
    max_witnesses: Option<usize>,
) -> ImpartialityReport
where
    M: SelectionMechanism + ?Sized,
{
    let spec = *e.spec();
    let selected = evaluate_class(m, e);
    let groups = DeviationGroups { e };

    // (vertex, base, selected members, unselected members) for each
    // inconsistent group
    let mut failing: Vec<(Vertex, u64, Vec<u64>, Vec<u64>)> = (0..spec.n())
        .into_par_iter()
        .flat_map_iter(|v| {
            let selected = &selected;
            let groups = &groups;
            (0..groups.count()).filter_map(move |b| {
                let base = groups.base(v, b);
                let (yes, no): (Vec<u64>, Vec<u64>) = groups
                    .members(v, base)
                    .partition(|&i| selected[i as usize] as usize == v + 1);
                (!yes.is_empty() && !no.is_empty()).then_some((v, base, yes, no))
            })
        })
        .collect();
    failing.sort_by_key(|&(v, base, _, _)| (v, base));

    let violation_count = failing
        .iter()
        .map(|(_, _, yes, no)| (yes.len() * no.len()) as u64)
        .sum();
    let limit = max_witnesses.unwrap_or(usize::MAX);
    let mut witnesses = Vec::new();
    'outer: for (v, _, yes, no) in &failing {
        for &a in yes {
            for &b in no {
                if witnesses.len() >= limit {
                    break 'outer;
                }
                witnesses.push(Violation::oriented(e.graph_at(a), e.graph_at(b), *v, true, false));
            }
        }
    }
    witnesses.sort_by(|x, y| (&x.0, &x.1, x.2.deviator).cmp(&(&y.0, &y.1, y.2.deviator)));

    ImpartialityReport {
        class: spec.to_string(),
        mode: AuditMode::Exhaustive,
        graphs_checked: e.len(),
        mechanism_runs: e.len(),
        violation_count,
        violations: witnesses.into_iter().map(|w| w.2).collect(),
    }
}

fn sampled_impartiality<M>(
    m: &M,
    spec: &GraphClassSpec,
    seed: u64,
    trials: u64,
    max_witnesses: Option<usize>,
) -> Result<ImpartialityReport>
where
    M: SelectionMechanism + ?Sized,
{
    let per_trial: Vec<(u64, Vec<KeyedViolation>)> = (0..trials as usize)
        .into_par_iter()
        .map(|trial| -> Result<_> {
            let g = spec.sample_stream(seed, trial as u64)?;
            let base = m.select(&g);
            let mut runs = 1u64;
            let mut found = Vec::new();
            for v in 0..spec.n() {
                for h in spec.deviations(&g, v)? {
                    if h == g {
                        continue;
                    }
                    runs += 1;
                    let other = m.select(&h);
                    if base.contains(v) != other.contains(v) {
                        found.push(Violation::oriented(g.clone(), h, v, base.contains(v), other.contains(v)));
                    }
                }
            }
            Ok((runs, found))
        })
        .collect::<Result<_>>()?;

    let mechanism_runs = per_trial.iter().map(|(r, _)| r).sum();
    let mut unique: BTreeMap<(String, String, Vertex), Violation> = BTreeMap::new();
    for (_, found) in per_trial {
        for (a, b, v) in found {
            unique.entry((a, b, v.deviator)).or_insert(v);
        }
    }
    let violation_count = unique.len() as u64;
    let violations = unique
        .into_values()
        .take(max_witnesses.unwrap_or(usize::MAX))
        .collect();
    Ok(ImpartialityReport {
        class: spec.to_string(),
        mode: AuditMode::Sampled { seed, trials },
        graphs_checked: trials,
        mechanism_runs,
        violation_count,
        violations,
    })
}

/// Worst additive gap found over a class.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub class: String,
    pub mode: AuditMode,
    pub worst_gap: usize,
    /// First graph (in enumeration or trial order) attaining `worst_gap`.
    #[serde(serialize_with = "optional_graph_text")]
    pub witness: Option<DirectedGraph>,
    pub witness_outcome: Option<Outcome>,
    pub graphs_checked: u64,
}

pub fn measure_gap<M>(
    m: &M,
    spec: &GraphClassSpec,
    mode: AuditMode,
    cfg: &AuditConfig,
) -> Result<GapReport>
where
    M: SelectionMechanism + ?Sized,
{
    let gap_of = |g: &DirectedGraph| additive_gap(g, &m.select(g));
    // maximise gap, break ties towards the smaller position
    let better = |a: (usize, u64), b: (usize, u64)| {
        if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) {
            b
        } else {
            a
        }
    };
    let (best, checked, witness) = match mode {
        AuditMode::Exhaustive => {
            let e = spec.enumerate(cfg.cap)?;
            let best = with_jobs(cfg.jobs, || {
                (0..e.len() as usize)
                    .into_par_iter()
                    .map(|i| (gap_of(&e.graph_at(i as u64)), i as u64))
                    .reduce_with(better)
            })?;
            let witness = best.map(|(_, i)| e.graph_at(i));
            (best, e.len(), witness)
        }
        AuditMode::Sampled { seed, trials } => {
            let best = with_jobs(cfg.jobs, || {
                (0..trials as usize)
                    .into_par_iter()
                    .map(|i| -> Result<_> {
                        Ok((gap_of(&spec.sample_stream(seed, i as u64)?), i as u64))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|all| all.into_iter().reduce(better))
            })??;
            let witness = match best {
                Some((_, i)) => Some(spec.sample_stream(seed, i)?),
                None => None,
            };
            (best, trials, witness)
        }
    };
    Ok(GapReport {
        class: spec.to_string(),
        mode,
        worst_gap: best.map_or(0, |b| b.0),
        witness_outcome: witness.as_ref().map(|g| m.select(g)),
        witness,
        graphs_checked: checked,
    })
}

/// Outcome of one named invariant check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub counterexample: Option<String>,
}

impl InvariantCheck {
    fn from(name: &'static str, failure: Option<String>) -> Self {
        InvariantCheck {
            name,
            passed: failure.is_none(),
            counterexample: failure,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceInvariantReport {
    pub outcome: Outcome,
    pub trace: DeletionTrace,
    pub checks: Vec<InvariantCheck>,
}

impl TraceInvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the twin threshold mechanism on `g` and re-derives every trace
/// property from the graph and the recorded trace:
///
/// * `replay`: each deletion takes the unprocessed vertex with the
///   lexicographically largest (current indegree, index) among those at or
///   above `t`, and the loop stops exactly when none is left;
/// * `indegree-drop`: `δ⁻(v) − δ⋆(v)` equals the number of in-neighbours
///   processed before `v`;
/// * `processing-order`: for processed `u, v`, `u` goes first iff
///   `(δ⋆(u), u) > (δ⋆(v), v)`;
/// * `witnesses`: for processed `v` with drop `r`, there are distinct
///   in-neighbours `u_0..u_{r-1}` with `(δ⋆(u_j), u_j) > (δ⁻(v) − j, v)`, and
///   every other in-neighbour has a key below `(δ⋆(v), v)`.
pub fn check_trace_invariants(g: &DirectedGraph, p: ThresholdPair) -> Result<TraceInvariantReport> {
    let (outcome, trace) = run_twin_threshold(g, p)?;
    let indegree = g.indegrees();
    let in_nbrs = g.in_neighbors();
    let checks = vec![
        InvariantCheck::from("replay", replay_failure(g, &trace, p.lower())),
        InvariantCheck::from("indegree-drop", drop_failure(&trace, &indegree, &in_nbrs)),
        InvariantCheck::from("processing-order", order_failure(&trace)),
        InvariantCheck::from("witnesses", witness_failure(&trace, &indegree, &in_nbrs)),
    ];
    Ok(TraceInvariantReport { outcome, trace, checks })
}

fn replay_failure(g: &DirectedGraph, trace: &DeletionTrace, lower: usize) -> Option<String> {
    let n = g.n();
    let mut degree = g.indegrees();
    let mut done = vec![false; n];
    for (i, rec) in trace.deletions.iter().enumerate() {
        if rec.iteration != i {
            return Some(format!("record {i} carries iteration {}", rec.iteration));
        }
        let expected = (0..n)
            .filter(|&u| !done[u] && degree[u] >= lower)
            .max_by_key(|&u| (degree[u], u));
        if expected != Some(rec.vertex) || degree[rec.vertex] != rec.dstar {
            return Some(format!(
                "iteration {i}: trace processed vertex {} at degree {}, replay expects {:?}",
                rec.vertex + 1,
                rec.dstar,
                expected.map(|u| (u + 1, degree[u]))
            ));
        }
        done[rec.vertex] = true;
        for &u in g.out_neighbors(rec.vertex) {
            degree[u] -= 1;
        }
    }
    if let Some(u) = (0..n).find(|&u| !done[u] && degree[u] >= lower) {
        return Some(format!("vertex {} left unprocessed at degree {}", u + 1, degree[u]));
    }
    if degree != trace.final_degrees {
        return Some(format!("final degrees {:?} differ from replay {:?}", trace.final_degrees, degree));
    }
    for (v, &processed) in done.iter().enumerate() {
        let expected_istar = if processed { trace.istar[v] } else { trace.iteration_count };
        if trace.istar[v] != expected_istar || trace.is_deleted(v) != processed {
            return Some(format!("vertex {}: inconsistent i* / δ* bookkeeping", v + 1));
        }
        if let Some(d) = trace.dstar[v] {
            if d < lower {
                return Some(format!("vertex {} processed below t at degree {d}", v + 1));
            }
        }
    }
    None
}

fn drop_failure(trace: &DeletionTrace, indegree: &[usize], in_nbrs: &[Vec<Vertex>]) -> Option<String> {
    for rec in &trace.deletions {
        let v = rec.vertex;
        let earlier = in_nbrs[v]
            .iter()
            .filter(|&&u| trace.istar[u] < trace.istar[v])
            .count();
        if indegree[v] - rec.dstar != earlier {
            return Some(format!(
                "vertex {}: δ⁻ − δ⋆ = {} but {earlier} in-neighbours were processed earlier",
                v + 1,
                indegree[v] - rec.dstar
            ));
        }
    }
    None
}

fn order_failure(trace: &DeletionTrace) -> Option<String> {
    for a in &trace.deletions {
        for b in &trace.deletions {
            if a.vertex == b.vertex {
                continue;
            }
            let earlier = a.iteration < b.iteration;
            let larger = (a.dstar, a.vertex) > (b.dstar, b.vertex);
            if earlier != larger {
                return Some(format!(
                    "vertices {} (i={}, δ⋆={}) and {} (i={}, δ⋆={}) are out of order",
                    a.vertex + 1,
                    a.iteration,
                    a.dstar,
                    b.vertex + 1,
                    b.iteration,
                    b.dstar
                ));
            }
        }
    }
    None
}

fn witness_failure(trace: &DeletionTrace, indegree: &[usize], in_nbrs: &[Vec<Vertex>]) -> Option<String> {
    for rec in &trace.deletions {
        let v = rec.vertex;
        let r = indegree[v] - rec.dstar;
        let mut keys: Vec<(usize, Vertex)> = in_nbrs[v].iter().map(|&u| trace.key(u)).collect();
        keys.sort_unstable_by(|a, b| b.cmp(a));
        // Thresholds decrease with j, so matching the j-th largest key
        // against the j-th threshold decides whether distinct witnesses exist.
        if let Some(j) = (0..r).find(|&j| j >= keys.len() || keys[j] <= (indegree[v] - j, v)) {
            return Some(format!("vertex {}: no witness u_{j} for a drop of {r}", v + 1));
        }
        let above = keys.iter().filter(|&&k| k > (rec.dstar, v)).count();
        if above != r {
            return Some(format!(
                "vertex {}: {above} in-neighbours rank above (δ⋆, v) but the drop is {r}",
                v + 1
            ));
        }
    }
    None
}

/// Summary of a seeded sweep of [`check_trace_invariants`].
#[derive(Clone, Debug, Serialize)]
pub struct TraceSweepReport {
    pub class: String,
    pub thresholds: ThresholdPair,
    pub seed: u64,
    pub samples: u64,
    pub failures: u64,
    /// First failing sample: trial index, graph and failed check names.
    pub first_failure: Option<(u64, String, Vec<String>)>,
}

pub fn sweep_trace_invariants(
    spec: &GraphClassSpec,
    p: ThresholdPair,
    seed: u64,
    samples: u64,
    cfg: &AuditConfig,
) -> Result<TraceSweepReport> {
    p.validate_for(spec.n())?;
    let failures: Vec<(u64, String, Vec<String>)> = with_jobs(cfg.jobs, || {
        (0..samples as usize)
            .into_par_iter()
            .map(|i| -> Result<Option<(u64, String, Vec<String>)>> {
                let g = spec.sample_stream(seed, i as u64)?;
                let report = check_trace_invariants(&g, p)?;
                Ok((!report.all_passed()).then(|| {
                    let names = report
                        .checks
                        .iter()
                        .filter(|c| !c.passed)
                        .map(|c| format!("{}: {}", c.name, c.counterexample.clone().unwrap_or_default()))
                        .collect();
                    (i as u64, serialize_graph(&g), names)
                }))
            })
            .collect::<Result<Vec<_>>>()
    })??
    .into_iter()
    .flatten()
    .collect();
    Ok(TraceSweepReport {
        class: spec.to_string(),
        thresholds: p,
        seed,
        samples,
        failures: failures.len() as u64,
        first_failure: failures.into_iter().min_by_key(|f| f.0),
    })
}

/// Selection probabilities, one exact rational per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbabilityVector {
    entries: Vec<BigRational>,
}

impl ProbabilityVector {
    pub fn new(entries: Vec<BigRational>) -> Result<Self> {
        if entries.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let pv = ProbabilityVector { entries };
        if pv.mass() > BigRational::one() {
            return Err(Error::InvalidParameter("probabilities sum to more than 1".into()));
        }
        Ok(pv)
    }

    pub fn zero(n: usize) -> Self {
        ProbabilityVector {
            entries: vec![BigRational::zero(); n],
        }
    }

    /// All mass on `v`.
    pub fn point(n: usize, v: Vertex) -> Self {
        let mut pv = Self::zero(n);
        pv.entries[v] = BigRational::one();
        pv
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: Vertex) -> &BigRational {
        &self.entries[v]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn mass(&self) -> BigRational {
        self.entries.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Total probability on vertices of positive indegree in `g`.
    pub fn positive_indegree_mass(&self, g: &DirectedGraph) -> BigRational {
        g.indegrees()
            .iter()
            .zip(&self.entries)
            .filter(|(&d, _)| d >= 1)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

impl Serialize for ProbabilityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.iter().map(|p| p.to_string()))
    }
}

/// A mechanism returning a probability for each vertex.
pub trait RandomizedMechanism: Sync {
    fn probabilities(&self, g: &DirectedGraph) -> ProbabilityVector;
}

/// The randomized mechanism that puts probability 1 on the deterministic
/// choice.
#[derive(Clone, Copy, Debug)]
pub struct Lifted<M>(pub M);

pub fn lift_deterministic<M: SelectionMechanism>(m: M) -> Lifted<M> {
    Lifted(m)
}

impl<M: SelectionMechanism> RandomizedMechanism for Lifted<M> {
    fn probabilities(&self, g: &DirectedGraph) -> ProbabilityVector {
        match self.0.select(g).selected {
            Some(v) => ProbabilityVector::point(g.n(), v),
            None => ProbabilityVector::zero(g.n()),
        }
    }
}

/// `(f_s(G))_v = (1/n!) Σ_π (f(G_π))_{π(v)}` over all permutations of the
/// vertices, in exact arithmetic.
pub fn symmetrize_eval<R>(m: &R, g: &DirectedGraph, cap: usize) -> Result<ProbabilityVector>
where
    R: RandomizedMechanism + ?Sized,
{
    let n = g.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "symmetrization".into(),
            size: format!("{n}! relabelings"),
            cap: cap as u64,
        });
    }
    let mut sums = vec![BigRational::zero(); n];
    let mut count = 0u64;
    for pi in Permutation::all(n) {
        let image = m.probabilities(&g.relabel(&pi)?);
        for (v, sum) in sums.iter_mut().enumerate() {
            let p = image.get(pi.apply(v));
            if !p.is_zero() {
                *sum += p;
            }
        }
        count += 1;
    }
    let scale = BigRational::from_integer(BigInt::from(count));
    ProbabilityVector::new(sums.into_iter().map(|s| s / &scale).collect())
}

/// Exhaustive check of the symmetrization of a deterministic mechanism over
/// a class closed under relabeling.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetrizationReport {
    pub class: String,
    pub graphs_checked: u64,
    /// `(f_s(G_π))_{π(v)} = (f_s(G))_v` for all graphs, permutations, vertices.
    pub symmetric: bool,
    /// Every f_s vector has non-negative entries summing to at most 1.
    pub mass_ok: bool,
    pub base_impartial: bool,
    pub symmetrized_impartial: bool,
    /// The base mechanism selects a positive-indegree vertex whenever some
    /// vertex has indegree `n - 1`.
    pub base_weakly_unanimous: bool,
    pub symmetrized_weakly_unanimous: bool,
}

pub fn audit_symmetrization<M>(m: &M, spec: &GraphClassSpec, cfg: &AuditConfig) -> Result<SymmetrizationReport>
where
    M: SelectionMechanism,
{
    let n = spec.n();
    if n > DEFAULT_SYMMETRIZATION_CAP {
        return Err(Error::CapExceeded {
            what: "symmetrization".into(),
            size: format!("{n}! relabelings"),
            cap: DEFAULT_SYMMETRIZATION_CAP as u64,
        });
    }
    let e = spec.enumerate(cfg.cap)?;
    let lifted = Lifted(|g: &DirectedGraph| m.select(g));
    let perms: Vec<Permutation> = Permutation::all(n).collect();

    with_jobs(cfg.jobs, || -> Result<SymmetrizationReport> {
        let base = evaluate_class(m, &e);
        let table: Vec<ProbabilityVector> = (0..e.len() as usize)
            .into_par_iter()
            .map(|i| symmetrize_eval(&lifted, &e.graph_at(i as u64), n))
            .collect::<Result<_>>()?;

        let mass_ok = table
            .iter()
            .all(|pv| pv.entries().iter().all(|p| !p.is_negative()) && pv.mass() <= BigRational::one());

        let symmetric = (0..e.len() as usize).into_par_iter().all(|i| {
            let g = e.graph_at(i as u64);
            perms.iter().all(|pi| {
                let h = g.relabel(pi).expect("same vertex count");
                let j = e.index_of(&h).expect("class closed under relabeling") as usize;
                (0..n).all(|v| table[j].get(pi.apply(v)) == table[i].get(v))
            })
        });

        let groups = DeviationGroups { e: &e };
        let consistent = |status: &(dyn Fn(usize, Vertex) -> BigRational + Sync)| {
            (0..n).into_par_iter().all(|v| {
                (0..groups.count()).all(|b| {
                    let mut members = groups.members(v, groups.base(v, b));
                    let first = status(members.next().unwrap() as usize, v);
                    members.all(|i| status(i as usize, v) == first)
                })
            })
        };
        let base_impartial = consistent(&|i, v| {
            BigRational::from_integer(BigInt::from(u8::from(base[i] as usize == v + 1)))
        });
        let symmetrized_impartial = consistent(&|i, v| table[i].get(v).clone());

        let unanimity_graphs: Vec<usize> = (0..e.len() as usize)
            .filter(|&i| e.graph_at(i as u64).max_indegree() + 1 == n)
            .collect();
        let base_weakly_unanimous = unanimity_graphs.iter().all(|&i| {
            let g = e.graph_at(i as u64);
            base[i] != 0 && g.indegree(base[i] as usize - 1) >= 1
        });
        let symmetrized_weakly_unanimous = unanimity_graphs
            .iter()
            .all(|&i| table[i].positive_indegree_mass(&e.graph_at(i as u64)) >= BigRational::one());

        Ok(SymmetrizationReport {
            class: spec.to_string(),
            graphs_checked: e.len(),
            symmetric,
            mass_ok,
            base_impartial,
            symmetrized_impartial,
            base_weakly_unanimous,
            symmetrized_weakly_unanimous,
        })
    })?
}
