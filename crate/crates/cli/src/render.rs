use std::fmt::Display;
use std::str::FromStr;

use serde_json::Value;

use impsel::audit::AuditMode;
use impsel::twin_threshold::DeletionTrace;
use impsel::{serialize_graph, DirectedGraph, Outcome};

pub fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}

/// An exact integer as a JSON number, whatever its size.
pub fn big(x: &impl Display) -> Value {
    Value::from_str(&x.to_string()).expect("integers are valid JSON numbers")
}

/// 1-based list with at most one element.
pub fn selected(outcome: &Outcome) -> Value {
    Value::from(outcome.selected.map(|v| v + 1).into_iter().collect::<Vec<_>>())
}

pub fn selected_text(outcome: &Outcome) -> String {
    match outcome.selected {
        Some(v) => format!("{} (indegree {})", v + 1, outcome.selected_indegree),
        None => "none".into(),
    }
}

pub fn mode(mode: &AuditMode) -> Value {
    match *mode {
        AuditMode::Exhaustive => Value::from("exhaustive"),
        AuditMode::Sampled { seed, trials } => serde_json::json!({ "samples": trials, "seed": seed }),
    }
}

pub fn mode_text(mode: &AuditMode) -> String {
    match *mode {
        AuditMode::Exhaustive => "exhaustive".into(),
        AuditMode::Sampled { seed, trials } => format!("{trials} samples, seed {seed}"),
    }
}

pub fn trace(trace: &DeletionTrace) -> Value {
    trace
        .deletions
        .iter()
        .map(|r| serde_json::json!({ "i": r.iteration, "v": r.vertex + 1, "dstar": r.dstar }))
        .collect()
}

pub fn trace_text(trace: &DeletionTrace) -> String {
    let rows = trace
        .deletions
        .iter()
        .map(|r| vec![r.iteration.to_string(), (r.vertex + 1).to_string(), r.dstar.to_string()])
        .collect();
    let mut s = table(&["i", "vertex", "dstar"], rows);
    let finals: Vec<String> = trace.final_degrees.iter().map(|d| d.to_string()).collect();
    s.push_str(&format!("final degrees: {}\n", finals.join(" ")));
    s
}

/// The graph file text, indented for inclusion in a report.
pub fn graph_block(g: &DirectedGraph) -> String {
    serialize_graph(g).lines().map(|l| format!("    {l}\n")).collect()
}

/// Columns separated by two spaces; numeric columns are right-aligned.
pub fn table(headers: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let numeric: Vec<bool> = (0..headers.len())
        .map(|c| rows.iter().all(|row| row[c].parse::<i128>().is_ok()))
        .collect();
    let line = |cells: Vec<String>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let pad = " ".repeat(widths[c] - cell.chars().count());
                if numeric[c] {
                    format!("{pad}{cell}")
                } else {
                    format!("{cell}{pad}")
                }
            })
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut s = line(headers.iter().map(|h| h.to_string()).collect());
    for row in rows {
        s.push_str(&line(row));
    }
    s
}

/// `key  value` lines with the keys padded to one width.
pub fn fields(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k}{}  {v}\n", " ".repeat(width - k.chars().count())))
        .collect()
}
