//! Subcommand bodies. Each returns `Ok(true)` when the result is clean and
//! `Ok(false)` when an audit found a violation.

use std::fs;

use anyhow::{bail, Context};
use serde_json::{json, Value};

use impsel::audit::{
    audit_symmetrization, check_impartiality, check_trace_invariants, measure_gap, sweep_trace_invariants,
    AuditConfig, AuditMode,
};
use impsel::partition::{
    build_certificate, enumerate_compositions, fubini, lambda_of, reduce_add_inneighbors, reduce_add_isolated,
    verify_transition_structure,
};
use impsel::twin_threshold::{
    plan_thresholds_general, plan_thresholds_k1, run_twin_threshold, validate_thresholds, PlanReport,
};
use impsel::{serialize_graph, MechanismId, ThresholdPair};

use crate::render::{self, big, fields, print_json, table};
use crate::{read_graph, thresholds, AuditCommand, ModeArgs, PartitionArgs, PlanArgs, ReduceCommand, RunArgs, TraceArgs};

pub fn run(args: &RunArgs) -> anyhow::Result<bool> {
    let g = read_graph(&args.graph)?;
    let m = match (args.mechanism, thresholds(args.upper, args.lower)?) {
        (Some(m), _) => m,
        (None, Some(p)) => MechanismId::TwinThreshold(p),
        (None, None) => bail!("give --mechanism or --T and --t"),
    };
    m.validate(g.n())?;
    let outcome = m.apply(&g);
    let max_indegree = g.max_indegree();
    let gap = max_indegree - outcome.selected_indegree;
    let trace = match m {
        MechanismId::TwinThreshold(p) if args.trace => Some(run_twin_threshold(&g, p)?.1),
        _ if args.trace => bail!("--trace needs the twin threshold mechanism"),
        _ => None,
    };

    if args.json {
        let mut doc = json!({
            "n": g.n(),
            "edges": g.edge_count(),
            "mechanism": m.to_string(),
        });
        if let MechanismId::TwinThreshold(p) = m {
            doc["T"] = p.upper().into();
            doc["t"] = p.lower().into();
        }
        doc["selected"] = render::selected(&outcome);
        doc["selected_indegree"] = outcome.selected_indegree.into();
        doc["max_indegree"] = max_indegree.into();
        doc["gap"] = gap.into();
        if let Some(trace) = &trace {
            doc["trace"] = render::trace(trace);
            doc["final_degrees"] = trace.final_degrees.clone().into();
        }
        print_json(&doc);
    } else {
        print!(
            "{}",
            fields(&[
                ("graph", format!("{} vertices, {} edges", g.n(), g.edge_count())),
                ("mechanism", m.to_string()),
                ("selected", render::selected_text(&outcome)),
                ("max indegree", max_indegree.to_string()),
                ("gap", gap.to_string()),
            ])
        );
        if let Some(trace) = &trace {
            print!("\n{}", render::trace_text(trace));
        }
    }
    Ok(true)
}

fn plan_doc(plan: &PlanReport) -> Value {
    json!({
        "n": plan.n,
        "k": plan.k,
        "T": plan.thresholds.upper(),
        "t": plan.thresholds.lower(),
        "alpha": plan.alpha_bound,
        "certified": plan.impartial_certified,
        "condition_lhs": plan.condition_lhs,
        "condition_rhs": plan.condition_rhs,
        "degenerate": plan.degenerate,
    })
}

fn plan_text(plan: &PlanReport) -> String {
    let verdict = if plan.impartial_certified { "certified" } else { "not certified" };
    let mut rows = vec![
        ("n", plan.n.to_string()),
        ("k", plan.k.to_string()),
        ("T", plan.thresholds.upper().to_string()),
        ("t", plan.thresholds.lower().to_string()),
        ("alpha", plan.alpha_bound.to_string()),
        (
            "impartiality",
            format!("{verdict} ({} > {} is {})", plan.condition_lhs, plan.condition_rhs, plan.impartial_certified),
        ),
    ];
    if plan.degenerate {
        rows.push(("note", "thresholds exceed n - 1; the mechanism never selects".into()));
    }
    fields(&rows)
}

/// Thresholds for `G_n(k)`: the outdegree-one formula when it applies,
/// otherwise the general one with `kappa = 0` and `c = k` unless given.
fn planned(n: usize, k: usize, kappa: Option<f64>, c: Option<f64>) -> anyhow::Result<PlanReport> {
    if k == 1 && kappa.is_none() && c.is_none() {
        return Ok(plan_thresholds_k1(n)?);
    }
    Ok(plan_thresholds_general(n, k, kappa.unwrap_or(0.0), c.unwrap_or(k as f64))?)
}

pub fn plan(args: &PlanArgs) -> anyhow::Result<bool> {
    let k = args.k.resolve(args.n);
    let plan = match thresholds(args.upper, args.lower)? {
        Some(p) => {
            if args.kappa.is_some() || args.c.is_some() {
                bail!("--kappa and --c apply to planning, not to validating --T/--t");
            }
            validate_thresholds(args.n, k, p)?
        }
        None => planned(args.n, k, args.kappa, args.c)?,
    };
    if args.json {
        print_json(&plan_doc(&plan));
    } else {
        print!("{}", plan_text(&plan));
    }
    Ok(true)
}

fn audit_mode(m: &ModeArgs) -> anyhow::Result<AuditMode> {
    match m.samples {
        Some(trials) => {
            let seed = m.seed.context("sampled audits need --seed")?;
            Ok(AuditMode::Sampled { seed, trials })
        }
        None if m.seed.is_some() => bail!("--seed only applies with --samples"),
        None => Ok(AuditMode::Exhaustive),
    }
}

pub fn audit(cmd: &AuditCommand) -> anyhow::Result<bool> {
    match cmd {
        AuditCommand::Impartiality { mechanism, class, mode, max_witnesses, json } => {
            let spec = class.spec()?;
            mechanism.validate(spec.n())?;
            let cfg = AuditConfig { cap: mode.cap, jobs: mode.jobs, max_witnesses: Some(*max_witnesses) };
            let report = check_impartiality(mechanism, &spec, audit_mode(mode)?, &cfg)?;
            if *json {
                let violations: Vec<Value> = report
                    .violations
                    .iter()
                    .map(|v| {
                        json!({
                            "deviator": v.deviator + 1,
                            "graph_a": serialize_graph(&v.graph_a),
                            "graph_b": serialize_graph(&v.graph_b),
                            "selected_in_a": v.selected_in_a,
                            "selected_in_b": v.selected_in_b,
                        })
                    })
                    .collect();
                print_json(&json!({
                    "mechanism": mechanism.to_string(),
                    "class": report.class,
                    "mode": render::mode(&report.mode),
                    "graphs_checked": report.graphs_checked,
                    "mechanism_runs": report.mechanism_runs,
                    "violation_count": report.violation_count,
                    "impartial": report.is_impartial(),
                    "violations": violations,
                }));
            } else {
                print!(
                    "{}",
                    fields(&[
                        ("mechanism", mechanism.to_string()),
                        ("class", report.class.clone()),
                        ("mode", render::mode_text(&report.mode)),
                        ("graphs checked", report.graphs_checked.to_string()),
                        ("mechanism runs", report.mechanism_runs.to_string()),
                        ("violations", report.violation_count.to_string()),
                    ])
                );
                for (i, v) in report.violations.iter().enumerate() {
                    let status = |s: bool| if s { "selected" } else { "not selected" };
                    println!(
                        "\nwitness {}: vertex {} is {} in A and {} in B",
                        i + 1,
                        v.deviator + 1,
                        status(v.selected_in_a),
                        status(v.selected_in_b)
                    );
                    print!("  A:\n{}  B:\n{}", render::graph_block(&v.graph_a), render::graph_block(&v.graph_b));
                }
            }
            Ok(report.is_impartial())
        }
        AuditCommand::Gap { mechanism, class, mode, json } => {
            let spec = class.spec()?;
            mechanism.validate(spec.n())?;
            let cfg = AuditConfig { cap: mode.cap, jobs: mode.jobs, max_witnesses: None };
            let report = measure_gap(mechanism, &spec, audit_mode(mode)?, &cfg)?;
            let outcome = report.witness_outcome.unwrap_or_default();
            if *json {
                print_json(&json!({
                    "mechanism": mechanism.to_string(),
                    "class": report.class,
                    "mode": render::mode(&report.mode),
                    "graphs_checked": report.graphs_checked,
                    "worst_gap": report.worst_gap,
                    "witness": report.witness.as_ref().map(serialize_graph),
                    "witness_selected": render::selected(&outcome),
                }));
            } else {
                print!(
                    "{}",
                    fields(&[
                        ("mechanism", mechanism.to_string()),
                        ("class", report.class.clone()),
                        ("mode", render::mode_text(&report.mode)),
                        ("graphs checked", report.graphs_checked.to_string()),
                        ("worst gap", report.worst_gap.to_string()),
                        ("witness selects", render::selected_text(&outcome)),
                    ])
                );
                if let Some(g) = &report.witness {
                    print!("  witness:\n{}", render::graph_block(g));
                }
            }
            Ok(true)
        }
        AuditCommand::Trace(args) => trace(args),
        AuditCommand::Symmetrize { mechanism, class, jobs, cap, json } => {
            let spec = class.spec()?;
            mechanism.validate(spec.n())?;
            let cfg = AuditConfig { cap: *cap, jobs: *jobs, max_witnesses: None };
            let r = audit_symmetrization(mechanism, &spec, &cfg)?;
            let clean = r.symmetric
                && r.mass_ok
                && (!r.base_impartial || r.symmetrized_impartial)
                && (!r.base_weakly_unanimous || r.symmetrized_weakly_unanimous);
            if *json {
                let mut doc = serde_json::to_value(&r)?;
                doc["mechanism"] = mechanism.to_string().into();
                print_json(&doc);
            } else {
                let yes = |b: bool| if b { "yes" } else { "no" }.to_string();
                print!(
                    "{}",
                    fields(&[
                        ("mechanism", mechanism.to_string()),
                        ("class", r.class.clone()),
                        ("graphs checked", r.graphs_checked.to_string()),
                        ("symmetric", yes(r.symmetric)),
                        ("mass at most 1", yes(r.mass_ok)),
                        ("impartial (base)", yes(r.base_impartial)),
                        ("impartial (symmetrized)", yes(r.symmetrized_impartial)),
                        ("weakly unanimous (base)", yes(r.base_weakly_unanimous)),
                        ("weakly unanimous (symmetrized)", yes(r.symmetrized_weakly_unanimous)),
                    ])
                );
            }
            Ok(clean)
        }
    }
}

fn trace(args: &TraceArgs) -> anyhow::Result<bool> {
    let given = thresholds(args.upper, args.lower)?;
    if let Some(path) = &args.graph {
        let g = read_graph(path)?;
        let p = match given {
            Some(p) => p,
            None => planned(g.n(), args.k.resolve(g.n()), None, None)?.thresholds,
        };
        let report = check_trace_invariants(&g, p)?;
        if args.json {
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "counterexample": c.counterexample }))
                .collect();
            print_json(&json!({
                "n": g.n(),
                "T": p.upper(),
                "t": p.lower(),
                "selected": render::selected(&report.outcome),
                "checks": checks,
                "trace": render::trace(&report.trace),
                "final_degrees": report.trace.final_degrees,
            }));
        } else {
            println!("thresholds (T, t) = {p}, selected {}", render::selected_text(&report.outcome));
            let rows = report
                .checks
                .iter()
                .map(|c| {
                    let verdict = if c.passed { "pass" } else { "FAIL" };
                    vec![c.name.to_string(), verdict.to_string(), c.counterexample.clone().unwrap_or_default()]
                })
                .collect();
            print!("{}\n{}", table(&["check", "result", "detail"], rows), render::trace_text(&report.trace));
        }
        return Ok(report.all_passed());
    }

    let n = args.n.context("give --graph or --n")?;
    let (Some(samples), Some(seed)) = (args.samples, args.seed) else {
        bail!("sampled trace checks need --samples and --seed");
    };
    let k = match args.k {
        crate::OutdegreeBound::Bounded(k) => Some(k),
        crate::OutdegreeBound::Unbounded => None,
    };
    let spec = impsel::GraphClassSpec::new(n, k, args.positive_outdegree)?;
    let p: ThresholdPair = match given {
        Some(p) => p,
        None => planned(n, spec.effective_max_outdegree(), None, None)?.thresholds,
    };
    let cfg = AuditConfig { jobs: args.jobs, ..AuditConfig::default() };
    let report = sweep_trace_invariants(&spec, p, seed, samples, &cfg)?;
    if args.json {
        let first = report.first_failure.as_ref().map(|(trial, graph, checks)| {
            json!({ "trial": trial, "graph": graph, "checks": checks })
        });
        print_json(&json!({
            "class": report.class,
            "T": p.upper(),
            "t": p.lower(),
            "seed": seed,
            "samples": samples,
            "failures": report.failures,
            "first_failure": first,
        }));
    } else {
        print!(
            "{}",
            fields(&[
                ("class", report.class.clone()),
                ("thresholds (T, t)", p.to_string()),
                ("samples", format!("{samples} (seed {seed})")),
                ("failures", report.failures.to_string()),
            ])
        );
        if let Some((trial, graph, checks)) = &report.first_failure {
            println!("first failure at sample {trial}:");
            for c in checks {
                println!("  {c}");
            }
            for line in graph.lines() {
                println!("    {line}");
            }
        }
    }
    Ok(report.failures == 0)
}

pub fn partitions(args: &PartitionArgs) -> anyhow::Result<bool> {
    let compositions: Vec<_> = enumerate_compositions(args.n, args.composition_cap())?.collect();
    let f = fubini(args.n, args.composition_cap())?;
    let certificate = if args.certificate {
        Some(build_certificate(args.n, args.certificate_cap())?)
    } else {
        None
    };
    let transitions = if args.transitions {
        Some(verify_transition_structure(args.n, args.composition_cap())?)
    } else {
        None
    };
    let clean = certificate.as_ref().is_none_or(|c| c.proves_infeasible())
        && transitions.as_ref().is_none_or(|t| t.passed());

    if args.json {
        let rows: Vec<Value> = match &certificate {
            Some(c) => c
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "composition": r.composition.parts(),
                        "r": r.r,
                        "lambda": big(&r.lambda),
                        "sign": r.sign,
                        "sense": serde_json::to_value(r.sense).expect("plain enum"),
                        "multiplier": big(&r.multiplier),
                    })
                })
                .collect(),
            None => compositions
                .iter()
                .map(|p| json!({ "composition": p.parts(), "r": p.r(), "lambda": big(&lambda_of(p)) }))
                .collect(),
        };
        let mut doc = json!({
            "n": args.n,
            "compositions": rows,
            "fubini": big(&f.value),
            "fubini_odd": f.odd,
        });
        if let Some(c) = &certificate {
            doc["certificate"] = json!({
                "rhs_total": big(&c.rhs_total),
                "alternate_rhs_total": big(&c.alternate_rhs_total),
                "rhs_odd": c.rhs_odd,
                "cancellation_ok": c.cancellation_ok,
                "pairing_ok": c.pairing_ok,
                "infeasible": c.proves_infeasible(),
            });
        }
        if let Some(t) = &transitions {
            doc["transitions"] = serde_json::to_value(t)?;
        }
        print_json(&doc);
        return Ok(clean);
    }

    let text = match &certificate {
        Some(c) => table(
            &["composition", "r", "lambda", "sign", "sense", "multiplier"],
            c.rows
                .iter()
                .map(|r| {
                    let sense = match r.sense {
                        impsel::partition::ConstraintSense::AtMostOne => "at-most-one",
                        impsel::partition::ConstraintSense::AtLeastOne => "at-least-one",
                    };
                    vec![
                        r.composition.to_string(),
                        r.r.to_string(),
                        r.lambda.to_string(),
                        format!("{:+}", r.sign),
                        sense.to_string(),
                        r.multiplier.to_string(),
                    ]
                })
                .collect(),
        ),
        None => table(
            &["composition", "r", "lambda"],
            compositions
                .iter()
                .map(|p| vec![p.to_string(), p.r().to_string(), lambda_of(p).to_string()])
                .collect(),
        ),
    };
    println!("{text}");
    let parity = |odd: bool| if odd { "odd" } else { "even" };
    let mut summary = vec![("fubini", format!("{} ({})", f.value, parity(f.odd)))];
    if let Some(c) = &certificate {
        summary.push(("rhs_total", format!("{} ({})", c.rhs_total, parity(c.rhs_odd))));
        summary.push(("alternate rhs_total", c.alternate_rhs_total.to_string()));
        summary.push(("cancellation_ok", c.cancellation_ok.to_string()));
        summary.push(("pairing_ok", c.pairing_ok.to_string()));
    }
    if let Some(t) = &transitions {
        summary.push(("transition edges", t.edges.to_string()));
        summary.push(("transition checks", if t.passed() { "pass" } else { "FAIL" }.to_string()));
    }
    print!("{}", fields(&summary));
    if let Some(t) = &transitions {
        for failure in &t.failures {
            println!("  {failure}");
        }
    }
    Ok(clean)
}

pub fn reduce(cmd: &ReduceCommand) -> anyhow::Result<bool> {
    let (args, padded) = match cmd {
        ReduceCommand::Isolated(args) => (args, reduce_add_isolated(&read_graph(&args.graph)?, args.n)?),
        ReduceCommand::Inneighbors(args) => (args, reduce_add_inneighbors(&read_graph(&args.graph)?, args.n)?),
    };
    let text = serialize_graph(&padded);
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(true)
}
