//! The `k`-improved graph: add `xy` whenever `conn(x, y) >= k`.

use crate::error::Error;
use crate::exec;
use crate::graph::{min_separation_pair, Graph, PairSeparation, Vertex};

/// Computes the `k`-improved graph, or reports `TooWide` when the edge count
/// already rules out treewidth below `k` (graphs of treewidth `< k` are
/// `(k-1)`-degenerate).
pub fn improve(g: &Graph, k: usize) -> Result<Graph, Error> {
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    if g.m() > (k - 1) * g.n() {
        return Err(Error::TooWide { k });
    }
    let n = g.n();
    let rows: Vec<Vec<Vertex>> = exec::map((0..n).collect(), |x| {
        (x + 1..n)
            .filter(|&y| !g.has_edge(x, y) && reaches_cap(g, x, y, k))
            .collect()
    });
    let mut out = g.clone();
    for (x, ys) in rows.into_iter().enumerate() {
        for y in ys {
            out.add_edge(x, y).expect("pair is in range");
        }
    }
    Ok(out)
}

fn reaches_cap(g: &Graph, x: Vertex, y: Vertex, k: usize) -> bool {
    matches!(
        min_separation_pair(g, x, y, k).expect("distinct in-range pair"),
        PairSeparation::AtLeastCap
    )
}

/// True iff every nonadjacent pair has `conn(x, y) < k`.
pub fn is_k_complemented(g: &Graph, k: usize) -> bool {
    assert!(k >= 1, "k must be at least 1");
    let n = g.n();
    (0..n).all(|x| (x + 1..n).all(|y| g.has_edge(x, y) || !reaches_cap(g, x, y, k)))
}
