use impsel::audit::check_trace_invariants;
use impsel::graph::{parse_graph, serialize_graph, DirectedGraph, GraphClassSpec, Permutation};
use impsel::twin_threshold::{run_twin_threshold, ThresholdPair};
use impsel::MechanismId;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = DirectedGraph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.35), n * n).prop_map(move |bits| {
            let edges = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && bits[u * n + v]);
            DirectedGraph::from_edges(n, edges).unwrap()
        })
    })
}

fn permutation_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|images| Permutation::new(images).unwrap())
}

fn sorted(mut xs: Vec<usize>) -> Vec<usize> {
    xs.sort_unstable();
    xs
}

/// Algorithm as stated: scan levels downward from Δ, processing the
/// greatest vertex at the current level, then pick the greatest vertex of
/// maximum remaining indegree if it reaches the upper threshold.
fn reference_twin(g: &DirectedGraph, upper: usize, lower: usize) -> Option<usize> {
    let n = g.n();
    let mut indeg = vec![0usize; n];
    let mut live: Vec<(usize, usize)> = g.edges().collect();
    for &(_, v) in &live {
        indeg[v] += 1;
    }
    let mut done = vec![false; n];
    let mut d = indeg.iter().copied().max().unwrap_or(0);
    while d >= lower && d > 0 {
        match (0..n).filter(|&v| !done[v] && indeg[v] == d).max() {
            None => d -= 1,
            Some(v) => {
                done[v] = true;
                live.retain(|&(u, w)| {
                    if u == v {
                        indeg[w] -= 1;
                    }
                    u != v
                });
            }
        }
    }
    let top = indeg.iter().copied().max()?;
    if top < upper {
        return None;
    }
    (0..n).filter(|&v| indeg[v] == top).max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn relabel_preserves_degree_multisets(
        (g, pi) in graph_strategy(8).prop_flat_map(|g| { let n = g.n(); (Just(g), permutation_strategy(n)) })
    ) {
        let h = g.relabel(&pi).unwrap();
        prop_assert_eq!(sorted(g.indegrees()), sorted(h.indegrees()));
        let outdeg = |x: &DirectedGraph| sorted((0..x.n()).map(|v| x.outdegree(v)).collect());
        prop_assert_eq!(outdeg(&g), outdeg(&h));
        prop_assert_eq!(h.relabel(&pi.inverse()).unwrap(), g);
    }

    #[test]
    fn text_round_trip(g in graph_strategy(9)) {
        let text = serialize_graph(&g);
        prop_assert_eq!(parse_graph(&text).unwrap(), g.clone());
        prop_assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);
    }

    #[test]
    fn deviations_change_only_the_deviator(g in graph_strategy(6), pick in 0usize..6) {
        let n = g.n();
        prop_assume!(n >= 2);
        let v = pick % n;
        let k = (0..n).map(|u| g.outdegree(u)).max().unwrap().max(1);
        let spec = GraphClassSpec::bounded(n, k).unwrap();
        let all: Vec<DirectedGraph> = spec.deviations(&g, v).unwrap().collect();
        prop_assert_eq!(all.len() as u64, spec.out_set_count());
        prop_assert!(all.contains(&g));
        for h in &all {
            prop_assert!(spec.contains(h));
            prop_assert!(h.agrees_outside(&g, v));
            for u in (0..n).filter(|&u| u != v) {
                prop_assert_eq!(h.out_neighbors(u), g.out_neighbors(u));
            }
        }
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn twin_threshold_matches_reference(g in graph_strategy(9), a in 1usize..9, b in 1usize..9) {
        prop_assume!(g.n() >= 2);
        let upper = a.max(b).min(g.n() - 1);
        let lower = a.min(b).min(upper);
        let p = ThresholdPair::new(upper, lower).unwrap();
        let (outcome, _) = run_twin_threshold(&g, p).unwrap();
        prop_assert_eq!(outcome.selected, reference_twin(&g, upper, lower));
        prop_assert_eq!(MechanismId::TwinThreshold(p).apply(&g), outcome);
    }

    #[test]
    fn trace_invariants_hold(g in graph_strategy(10), a in 1usize..10, b in 1usize..10) {
        prop_assume!(g.n() >= 2);
        let upper = a.max(b).min(g.n() - 1);
        let lower = a.min(b).min(upper);
        let report = check_trace_invariants(&g, ThresholdPair::new(upper, lower).unwrap()).unwrap();
        prop_assert!(report.all_passed(), "{:?}", report.checks);
    }

    #[test]
    fn enumeration_index_round_trip(n in 1usize..5, k in 1usize..4, positive: bool, raw in any::<u64>()) {
        prop_assume!(n == 1 || k < n);
        let spec = GraphClassSpec::new(n, (n > 1).then_some(k), positive && n > 1).unwrap();
        let e = spec.enumerate(1 << 20).unwrap();
        let i = raw % e.len();
        let g = e.graph_at(i);
        prop_assert!(spec.contains(&g));
        prop_assert_eq!(e.index_of(&g), Some(i));
    }
}
