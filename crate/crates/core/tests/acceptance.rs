//! End-to-end acceptance checks, one test per criterion. Each prints a
//! PASS/FAIL line with a short summary.
//!
//! Run with `cargo test -p impsel --test acceptance`.

use std::time::Instant;

use impsel::audit::{
    audit_symmetrization, check_impartiality, measure_gap, sweep_trace_invariants, AuditConfig, AuditMode,
};
use impsel::graph::GraphClassSpec;
use impsel::partition::{
    build_certificate, enumerate_compositions, fubini, graph_of_composition, lambda_of, reduce_add_inneighbors,
    reduce_add_isolated, verify_transition_structure, DEFAULT_CERTIFICATE_CAP, DEFAULT_COMPOSITION_CAP,
};
use impsel::twin_threshold::{plan_thresholds_general, plan_thresholds_k1, validate_thresholds};
use impsel::{MechanismId, ThresholdPair};
use num_bigint::{BigInt, BigUint};

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn twin(upper: usize, lower: usize) -> MechanismId {
    MechanismId::TwinThreshold(ThresholdPair::new(upper, lower).unwrap())
}

fn bounded(n: usize, k: usize) -> GraphClassSpec {
    GraphClassSpec::bounded(n, k).unwrap()
}

fn exhaustive_violations(m: &MechanismId, spec: &GraphClassSpec) -> (u64, u64) {
    let cfg = AuditConfig { max_witnesses: Some(1), ..AuditConfig::default() };
    let r = check_impartiality(m, spec, AuditMode::Exhaustive, &cfg).unwrap();
    (r.violation_count, r.graphs_checked)
}

fn worst_gap(m: &MechanismId, spec: &GraphClassSpec) -> usize {
    measure_gap(m, spec, AuditMode::Exhaustive, &AuditConfig::default()).unwrap().worst_gap
}

fn impartiality_positive_control() -> Check {
    let mut notes = Vec::new();
    for (n, upper) in [(5, 4), (6, 5)] {
        let cfg = AuditConfig::default();
        let r = check_impartiality(&twin(upper, 1), &bounded(n, 1), AuditMode::Exhaustive, &cfg).unwrap();
        let deviation_runs = r.graphs_checked * n as u64 * n as u64;
        ensure(r.is_impartial(), format!("twin:{upper},1 on G_{n}(1): {} violations", r.violation_count))?;
        notes.push(format!("G_{n}(1): {} graphs, {deviation_runs} deviation pairs, 0 violations", r.graphs_checked));
    }
    let plan = validate_thresholds(5, 1, ThresholdPair::new(4, 1).unwrap()).unwrap();
    ensure(plan.condition_lhs == 14 && plan.condition_rhs == 7, "sufficient condition is not 14 > 7 at n = 5")?;
    Ok(notes.join("; "))
}

fn impartiality_negative_controls() -> Check {
    let (count, _) = exhaustive_violations(&MechanismId::MaxIndegreeNaive, &bounded(4, 1));
    ensure(count > 0, "max-naive shows no violation on G_4(1)")?;
    let mut notes = vec![format!("max-naive G_4(1): {count}")];
    for name in ["naive-iter:2", "naive-sim:2"] {
        let m: MechanismId = name.parse().unwrap();
        let found = (4..=6)
            .map(|n| (n, exhaustive_violations(&m, &bounded(n, 1)).0))
            .find(|&(_, c)| c > 0);
        let (n, c) = found.ok_or(format!("{name} shows no violation for n in 4..=6"))?;
        notes.push(format!("{name} G_{n}(1): {c}"));
    }
    Ok(notes.join("; "))
}

fn additive_guarantees() -> Check {
    let mut notes = Vec::new();
    for n in 3..=5 {
        let gap = worst_gap(&MechanismId::MajorityThreshold, &bounded(n, 1));
        ensure(gap <= n / 2, format!("majority on G_{n}(1) has gap {gap} > {}", n / 2))?;
        notes.push(format!("majority n={n}: {gap}"));
    }
    let gap = worst_gap(&twin(4, 1), &bounded(5, 1));
    ensure(gap <= 7, format!("twin:4,1 on G_5(1) has gap {gap} > 7"))?;
    notes.push(format!("twin:4,1 n=5: {gap} ≤ 7"));
    let spec = GraphClassSpec::unbounded(4).unwrap().positive();
    let gap = worst_gap(&MechanismId::FollowFixed { anchor: 0 }, &spec);
    ensure(gap == 2, format!("follow:1 on G+_4 has gap {gap}, expected 2"))?;
    notes.push("follow:1 on G+_4: 2".into());
    Ok(notes.join("; "))
}

fn k1_planner() -> Check {
    let mut notes = Vec::new();
    for n in [4usize, 9, 16, 25, 100, 10_000] {
        let plan = plan_thresholds_k1(n).unwrap();
        let alpha = plan.alpha_bound;
        ensure(alpha * alpha <= 8 * n as i128, format!("n={n}: alpha {alpha} exceeds √(8n)"))?;
        let check = validate_thresholds(n, 1, plan.thresholds).unwrap();
        ensure(check.impartial_certified && !plan.degenerate, format!("n={n}: plan not certified"))?;
        notes.push(format!("n={n}: (T,t)=({},{}) α={alpha}", plan.thresholds.upper(), plan.thresholds.lower()));
    }
    let p = plan_thresholds_k1(100).unwrap();
    ensure(
        (p.thresholds.lower(), p.thresholds.upper(), p.alpha_bound) == (10, 16, 24),
        "n=100 plan is not (t,T,α) = (10,16,24)",
    )?;
    Ok(notes.join("; "))
}

fn trace_invariants() -> Check {
    let mut notes = Vec::new();
    for (n, k) in [(20usize, 1usize), (30, 2), (50, 3)] {
        let plan = if k == 1 {
            plan_thresholds_k1(n).unwrap()
        } else {
            plan_thresholds_general(n, k, 0.0, k as f64).unwrap()
        };
        ensure(plan.impartial_certified && !plan.degenerate, format!("({n},{k}): planned pair not certified"))?;
        let report =
            sweep_trace_invariants(&bounded(n, k), plan.thresholds, 2024, 10_000, &AuditConfig::default()).unwrap();
        ensure(report.failures == 0, format!("({n},{k}): {} failures, first {:?}", report.failures, report.first_failure))?;
        notes.push(format!("({n},{k}) with {}: 10000 graphs clean", plan.thresholds));
    }
    Ok(notes.join("; "))
}

fn historical_variant() -> Check {
    let mut notes = Vec::new();
    for n in 4..=7 {
        let t = n / 3 + 1;
        let m = twin(t + 1, t);
        let spec = bounded(n, 1);
        let (violations, _) = exhaustive_violations(&m, &spec);
        ensure(violations == 0, format!("n={n}: {violations} violations"))?;
        let gap = worst_gap(&m, &spec);
        ensure(gap <= n / 3 + 2, format!("n={n}: gap {gap} > {}", n / 3 + 2))?;
        notes.push(format!("n={n}: gap {gap}"));
    }
    Ok(notes.join("; "))
}

fn weak_orders(n: usize) -> u64 {
    let total = (n as u64).pow(n as u32);
    (0..total)
        .filter(|&code| {
            let mut used = vec![false; n];
            let mut c = code;
            for _ in 0..n {
                used[(c % n as u64) as usize] = true;
                c /= n as u64;
            }
            let m = used.iter().filter(|&&u| u).count();
            used[..m].iter().all(|&u| u)
        })
        .count() as u64
}

fn partition_lattice() -> Check {
    for n in 1..=15 {
        let f = fubini(n, DEFAULT_COMPOSITION_CAP).unwrap();
        ensure(f.odd, format!("fubini({n}) = {} is even", f.value))?;
    }
    let table: Vec<(Vec<usize>, BigUint)> = (2..=3)
        .flat_map(|n| enumerate_compositions(n, DEFAULT_COMPOSITION_CAP).unwrap())
        .map(|p| (p.parts().to_vec(), lambda_of(&p)))
        .collect();
    let expected: Vec<(Vec<usize>, BigUint)> = [
        (vec![1, 1], 2u32),
        (vec![2], 1),
        (vec![1, 1, 1], 6),
        (vec![1, 2], 3),
        (vec![2, 1], 3),
        (vec![3], 1),
    ]
    .into_iter()
    .map(|(p, l)| (p, BigUint::from(l)))
    .collect();
    ensure(table == expected, format!("multiplicity table {table:?}"))?;
    for n in 1..=6 {
        let f = fubini(n, DEFAULT_COMPOSITION_CAP).unwrap();
        ensure(f.value == BigUint::from(weak_orders(n)), format!("fubini({n}) disagrees with brute force"))?;
    }
    Ok("fubini(1..=15) odd; n=2,3 table exact; brute force agrees for n ≤ 6".into())
}

fn certificate() -> Check {
    for n in 2..=8 {
        let c = build_certificate(n, DEFAULT_CERTIFICATE_CAP).unwrap();
        ensure(c.cancellation_ok && c.pairing_ok, format!("n={n}: coefficients do not cancel"))?;
        ensure(c.rhs_total <= BigInt::from(-1) && c.rhs_odd, format!("n={n}: rhs_total = {}", c.rhs_total))?;
    }
    let as_i64 = |n| -> Vec<i64> {
        build_certificate(n, DEFAULT_CERTIFICATE_CAP)
            .unwrap()
            .multipliers()
            .iter()
            .map(|x| x.try_into().unwrap())
            .collect()
    };
    let matches = |got: Vec<i64>, want: &[i64]| got == want || got.iter().zip(want).all(|(a, b)| *a == -b);
    ensure(matches(as_i64(3), &[-6, 3, 3, -1]), "n=3 multipliers")?;
    ensure(matches(as_i64(4), &[-24, 12, 12, -4, 12, -6, -4, 1]), "n=4 multipliers")?;
    Ok("n=2..=8 cancel with rhs_total = −1; n=3,4 multipliers exact".into())
}

fn transition_structure() -> Check {
    let mut edges = 0;
    for n in 2..=8 {
        let r = verify_transition_structure(n, DEFAULT_COMPOSITION_CAP).unwrap();
        ensure(
            r.partners_unique && r.bipartite && r.coefficient_identity,
            format!("n={n}: {:?}", r.failures),
        )?;
        ensure(r.passed(), format!("n={n}: {:?}", r.failures))?;
        edges += r.edges;
    }
    Ok(format!("n=2..=8, {edges} transition edges checked"))
}

fn symmetrization() -> Check {
    let mut checked = 0;
    for n in 2..=4 {
        let mut registry: Vec<MechanismId> = ["never", "max-naive", "follow:1", "majority", "naive-iter:1", "naive-sim:1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        registry.push(twin(n - 1, 1));
        for class in [GraphClassSpec::unbounded(n).unwrap(), bounded(n, 1)] {
            for m in &registry {
                let r = audit_symmetrization(m, &class, &AuditConfig::default()).unwrap();
                ensure(r.symmetric && r.mass_ok, format!("{m} on {class}: {r:?}"))?;
                ensure(!r.base_impartial || r.symmetrized_impartial, format!("{m} on {class}: impartiality lost"))?;
                ensure(
                    !r.base_weakly_unanimous || r.symmetrized_weakly_unanimous,
                    format!("{m} on {class}: weak unanimity lost"),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (mechanism, class) pairs for n ≤ 4"))
}

fn reductions() -> Check {
    for k in 1..=5 {
        for p in enumerate_compositions(k + 1, DEFAULT_COMPOSITION_CAP).unwrap() {
            let g = graph_of_composition(&p);
            for n in k + 1..=10 {
                let h = reduce_add_isolated(&g, n).unwrap();
                ensure(bounded(n, k).contains(&h), format!("{p} padded to {n} leaves G_{n}({k})"))?;
                ensure(h.max_indegree() == g.max_indegree(), format!("{p}: Δ changed"))?;
            }
        }
    }
    for k in 2..=6 {
        for p in enumerate_compositions(k, DEFAULT_COMPOSITION_CAP).unwrap() {
            let g = graph_of_composition(&p);
            for n in k + 1..=10 {
                let h = reduce_add_inneighbors(&g, n).unwrap();
                ensure(GraphClassSpec::unbounded(n).unwrap().positive().contains(&h), format!("{p} → {n}: not in G+"))?;
                ensure((k..n).all(|u| h.outdegree(u) == k), format!("{p} → {n}: added outdegree"))?;
                ensure(h.indegree(k) <= 1, format!("{p} → {n}: δ⁻(u_1) > 1"))?;
                ensure((k + 1..n).all(|u| h.indegree(u) == 0), format!("{p} → {n}: δ⁻(u_j) > 0"))?;
                ensure(
                    (0..k).all(|v| h.indegree(v) == g.indegree(v) + n - k),
                    format!("{p} → {n}: originals did not gain n − k"),
                )?;
            }
        }
    }
    Ok("isolated padding for k+1 ≤ 6, in-neighbour padding for k ≤ 6, n ≤ 10; originals gain n − k".into())
}

/// Writes straight to the process stdout so the line shows up even when
/// the test harness captures output.
fn report(number: usize, name: &str, check: fn() -> Check) {
    use std::io::Write;
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed().as_secs_f64();
    let line = match &result {
        Ok(detail) => format!("criterion {number:>2} PASS {name} ({elapsed:.2}s): {detail}"),
        Err(why) => format!("criterion {number:>2} FAIL {name} ({elapsed:.2}s): {why}"),
    };
    let _ = writeln!(std::io::stdout().lock(), "{line}");
    if let Err(why) = result {
        panic!("criterion {number} ({name}) failed: {why}");
    }
}

macro_rules! criteria {
    ($($test:ident => ($number:expr, $name:expr, $check:ident)),* $(,)?) => {
        $(
            #[test]
            fn $test() {
                report($number, $name, $check);
            }
        )*
    };
}

criteria! {
    criterion_01_impartiality_positive_control => (1, "impartiality, positive control", impartiality_positive_control),
    criterion_02_impartiality_negative_controls => (2, "impartiality, negative controls", impartiality_negative_controls),
    criterion_03_additive_guarantees => (3, "additive guarantees", additive_guarantees),
    criterion_04_outdegree_one_planner => (4, "outdegree-one planner", k1_planner),
    criterion_05_trace_invariants => (5, "trace invariants", trace_invariants),
    criterion_06_third_threshold_variant => (6, "t = n/3 + 1 variant", historical_variant),
    criterion_07_partition_lattice => (7, "partition lattice", partition_lattice),
    criterion_08_certificate => (8, "certificate", certificate),
    criterion_09_transition_structure => (9, "transition structure", transition_structure),
    criterion_10_symmetrization => (10, "symmetrization", symmetrization),
    criterion_11_reductions => (11, "reductions", reductions),
}
