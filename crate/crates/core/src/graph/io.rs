//! Line-oriented graph files.
//!
//! ```text
//! # optional comments
//! n 5
//! e 2 1
//! e 3 1
//! ```
//!
//! Vertex ids in the file are 1-based. Blank lines are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::DirectedGraph;

pub fn parse_graph(text: &str) -> Result<DirectedGraph> {
    let mut n: Option<usize> = None;
    let mut out: Vec<Vec<usize>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match tokens[0] {
            "n" => {
                if n.is_some() {
                    return Err(syntax(line, "second header line"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(line, "expected `n <count>`"));
                }
                let count = parse_number(line, tokens[1])?;
                if count == 0 {
                    return Err(syntax(line, "vertex count must be positive"));
                }
                n = Some(count);
                out = vec![Vec::new(); count];
            }
            "e" => {
                let Some(count) = n else {
                    return Err(syntax(line, "edge before the `n` header"));
                };
                if tokens.len() != 3 {
                    return Err(syntax(line, "expected `e <u> <v>`"));
                }
                let u = parse_number(line, tokens[1])?;
                let v = parse_number(line, tokens[2])?;
                for vertex in [u, v] {
                    if vertex == 0 || vertex > count {
                        return Err(Error::VertexOutOfRange { line, vertex, n: count });
                    }
                }
                if u == v {
                    return Err(Error::SelfLoop { line, vertex: u });
                }
                let list = &mut out[u - 1];
                match list.binary_search(&(v - 1)) {
                    Ok(_) => return Err(Error::DuplicateEdge { line, u, v }),
                    Err(pos) => list.insert(pos, v - 1),
                }
            }
            other => {
                return Err(syntax(line, &format!("unknown record type `{other}`")));
            }
        }
    }

    if n.is_none() {
        return Err(syntax(text.lines().count().max(1), "missing `n <count>` header"));
    }
    Ok(DirectedGraph::from_sorted_unchecked(out))
}

/// Canonical form: the header, then edges in ascending `(u, v)` order.
pub fn serialize_graph(g: &DirectedGraph) -> String {
    let mut s = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "e {} {}", u + 1, v + 1);
    }
    s
}

fn syntax(line: usize, message: &str) -> Error {
    Error::Syntax {
        line,
        message: message.to_string(),
    }
}

fn parse_number(line: usize, token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| syntax(line, &format!("`{token}` is not a non-negative integer")))
}
