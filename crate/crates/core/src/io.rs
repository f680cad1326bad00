//! Text graph format: `#` comment lines, a header `p N M` (also accepted as
//! `p edge N M`), then `M` lines `e u v` with 1-based vertex ids.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError { line, msg: msg.into() }
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut g = Graph::new(0);
    let mut seen_edges = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(line, format!("`{s}` is not a nonnegative integer")));
        match fields.as_slice() {
            ["p", rest @ ..] => {
                if header.is_some() {
                    return Err(err(line, "duplicate header"));
                }
                let (n, m) = match rest {
                    [n, m] | ["edge", n, m] => (num(n)?, num(m)?),
                    _ => return Err(err(line, "header must be `p N M`")),
                };
                header = Some((n, m));
                g = Graph::new(n);
            }
            ["e", u, v] => {
                let Some((n, _)) = header else {
                    return Err(err(line, "edge before header"));
                };
                let (u, v) = (num(u)?, num(v)?);
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(err(line, format!("vertex ids must lie in 1..={n}")));
                }
                if u == v {
                    return Err(err(line, "self-loops are not allowed"));
                }
                if !g.add_edge(u - 1, v - 1).expect("checked range") {
                    return Err(err(line, format!("duplicate edge {u} {v}")));
                }
                seen_edges += 1;
            }
            _ => return Err(err(line, format!("unrecognised line `{trimmed}`"))),
        }
    }
    let Some((_, m)) = header else {
        return Err(err(0, "missing `p N M` header"));
    };
    if seen_edges != m {
        return Err(err(0, format!("header announces {m} edges, found {seen_edges}")));
    }
    Ok(g)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("p {} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1).expect("writing to a string");
    }
    out
}
