//! Slow, independent ground truth for the test suites, plus seeded instance
//! generators. Nothing here calls into the pipeline; only the `Graph`
//! container is shared.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, PairConnectivity, Separation, Vertex, VertexSet};

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for u in 0..n {
        for &v in g.neighbors(u) {
            m[u][v] = true;
        }
    }
    m
}

/// Vertices reachable from `start` without entering `blocked`.
fn reach(adj: &[Vec<bool>], start: usize, blocked: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for w in 0..n {
            if adj[u][w] && !seen[w] && !blocked[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Some isomorphism `g1 -> g2` (as `mapping[v1] = v2`), by backtracking.
pub fn brute_iso(g1: &Graph, g2: &Graph) -> Option<Vec<Vertex>> {
    let n = g1.n();
    if n != g2.n() || g1.m() != g2.m() {
        return None;
    }
    let (a, b) = (adjacency_matrix(g1), adjacency_matrix(g2));
    let deg = |m: &Vec<Vec<bool>>, v: usize| m[v].iter().filter(|&&x| x).count();
    let mut d1: Vec<usize> = (0..n).map(|v| deg(&a, v)).collect();
    let mut d2: Vec<usize> = (0..n).map(|v| deg(&b, v)).collect();
    let (da, db) = (d1.clone(), d2.clone());
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return None;
    }
    let mut mapping = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    fn extend(
        v: usize,
        a: &[Vec<bool>],
        b: &[Vec<bool>],
        da: &[usize],
        db: &[usize],
        mapping: &mut Vec<usize>,
        taken: &mut Vec<bool>,
    ) -> bool {
        let n = a.len();
        if v == n {
            return true;
        }
        for w in 0..n {
            if taken[w] || da[v] != db[w] {
                continue;
            }
            if (0..v).any(|u| a[u][v] != b[mapping[u]][w]) {
                continue;
            }
            mapping[v] = w;
            taken[w] = true;
            if extend(v + 1, a, b, da, db, mapping, taken) {
                return true;
            }
            taken[w] = false;
        }
        mapping[v] = usize::MAX;
        false
    }
    extend(0, &a, &b, &da, &db, &mut mapping, &mut taken).then_some(mapping)
}

/// Exact treewidth by dynamic programming over vertex subsets; `-1` for the
/// empty graph.
pub fn brute_treewidth(g: &Graph) -> isize {
    let n = g.n();
    assert!(n <= 20, "subset dynamic program is exponential");
    if n == 0 {
        return -1;
    }
    let adj = adjacency_matrix(g);
    let full = 1usize << n;
    // q(s, v): vertices outside s ∪ {v} reachable from v through s
    let q = |s: usize, v: usize| -> isize {
        let mut seen = 1usize << v;
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            for w in 0..n {
                if adj[u][w] && seen >> w & 1 == 0 {
                    seen |= 1 << w;
                    if s >> w & 1 == 1 {
                        stack.push(w);
                    } else {
                        count += 1;
                    }
                }
            }
        }
        count
    };
    let mut tw = vec![isize::MAX; full];
    tw[0] = -1;
    for s in 1..full {
        for v in 0..n {
            if s >> v & 1 == 1 {
                let rest = s & !(1 << v);
                let cand = tw[rest].max(q(rest, v));
                tw[s] = tw[s].min(cand);
            }
        }
    }
    tw[full - 1]
}

/// `conn(x, y)` by enumerating separators in increasing size.
pub fn brute_min_separator(g: &Graph, x: Vertex, y: Vertex) -> PairConnectivity {
    assert_ne!(x, y);
    let adj = adjacency_matrix(g);
    if adj[x][y] {
        return PairConnectivity::Infinite;
    }
    let others: Vec<usize> = (0..g.n()).filter(|&v| v != x && v != y).collect();
    let mut best = others.len();
    for mask in 0usize..1 << others.len() {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let mut blocked = vec![false; g.n()];
        for (i, &v) in others.iter().enumerate() {
            blocked[v] = mask >> i & 1 == 1;
        }
        if !reach(&adj, x, &blocked)[y] {
            best = size;
        }
    }
    PairConnectivity::Finite(best)
}

/// Every separation `(A, B)` of `g` with `x ∈ A \ B`, `y ∈ B \ A` and a
/// separator avoiding both, as `(A, B)` pairs. Exponential; for `n <= 8`.
pub fn brute_pair_separations(g: &Graph, x: Vertex, y: Vertex) -> Vec<Separation> {
    let n = g.n();
    let adj = adjacency_matrix(g);
    let mut out = Vec::new();
    // assign each vertex to A-only (0), separator (1) or B-only (2)
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut side = vec![0u8; n];
        let mut c = code;
        for s in side.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        if side[x] != 0 || side[y] != 2 {
            continue;
        }
        let crossing = (0..n).any(|u| (0..n).any(|v| adj[u][v] && side[u] == 0 && side[v] == 2));
        if crossing {
            continue;
        }
        out.push(Separation {
            side_a: (0..n).filter(|&v| side[v] <= 1).collect(),
            side_b: (0..n).filter(|&v| side[v] >= 1).collect(),
        });
    }
    out
}

/// Every separation `(A, B)` with `xs ⊆ A` and `ys ⊆ B`. Exponential.
pub fn brute_set_separations(g: &Graph, xs: &VertexSet, ys: &VertexSet) -> Vec<Separation> {
    let n = g.n();
    let adj = adjacency_matrix(g);
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut side = vec![0u8; n];
        let mut c = code;
        for s in side.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        if xs.iter().any(|&v| side[v] == 2) || ys.iter().any(|&v| side[v] == 0) {
            continue;
        }
        let crossing = (0..n).any(|u| (0..n).any(|v| adj[u][v] && side[u] == 0 && side[v] == 2));
        if crossing {
            continue;
        }
        out.push(Separation {
            side_a: (0..n).filter(|&v| side[v] <= 1).collect(),
            side_b: (0..n).filter(|&v| side[v] >= 1).collect(),
        });
    }
    out
}

/// Some separation with nonempty private sides whose separator is a clique.
pub fn brute_clique_separation(g: &Graph) -> Option<Separation> {
    let n = g.n();
    let adj = adjacency_matrix(g);
    for mask in 0usize..1 << n {
        let c: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if !c.iter().all(|&u| c.iter().all(|&v| u == v || adj[u][v])) {
            continue;
        }
        let blocked: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
        let Some(start) = (0..n).find(|&v| !blocked[v]) else { continue };
        let seen = reach(&adj, start, &blocked);
        if (0..n).any(|v| !blocked[v] && !seen[v]) {
            let side_a: VertexSet = (0..n).filter(|&v| seen[v] || blocked[v]).collect();
            let side_b: VertexSet = (0..n).filter(|&v| !seen[v]).collect();
            return Some(Separation { side_a, side_b });
        }
    }
    None
}

/// Random partial `k`-tree: a seeded `k`-tree on `n` vertices grown from
/// `K_{k+1}` by attaching each new vertex to a uniform existing `k`-clique,
/// then each edge kept independently with probability `keep_prob`.
pub fn gen_partial_ktree(n: usize, k: usize, keep_prob: f64, seed: u64) -> Graph {
    assert!(n > k, "need at least k + 1 vertices");
    assert!((0.0..=1.0).contains(&keep_prob), "keep_prob must lie in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..=k {
        for v in u + 1..=k {
            edges.push((u, v));
        }
    }
    let base: Vec<usize> = (0..=k).collect();
    let mut cliques: Vec<Vec<usize>> = (0..=k)
        .map(|skip| base.iter().copied().filter(|&v| v != skip).collect())
        .collect();
    for v in k + 1..n {
        let c = cliques[rng.gen_range(0..cliques.len())].clone();
        for &u in &c {
            edges.push((u, v));
        }
        for skip in 0..c.len() {
            let mut nc: Vec<usize> = c.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &u)| u).collect();
            nc.push(v);
            cliques.push(nc);
        }
    }
    let kept: Vec<_> = edges.into_iter().filter(|_| rng.gen_bool(keep_prob)).collect();
    Graph::from_edges(n, &kept).expect("generated edges are valid")
}

/// Erdős–Rényi graph `G(n, p)`.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("valid edges")
}

/// Random connected graph: a random spanning tree plus `G(n, p)` edges.
pub fn random_connected_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = random_graph(n, p, rng);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v).expect("valid edge");
    }
    g
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<Vertex> {
    let mut p: Vec<Vertex> = (0..n).collect();
    p.shuffle(rng);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_examples() {
        let c4 = Graph::cycle(4);
        let relabelled = c4.permuted(&[1, 3, 0, 2]);
        let m = brute_iso(&c4, &relabelled).unwrap();
        assert!(c4.edges().all(|(u, v)| relabelled.has_edge(m[u], m[v])));
        assert!(brute_iso(&c4, &Graph::path(4)).is_none());
        assert_eq!(brute_iso(&Graph::complete(3), &Graph::complete(3)), Some(vec![0, 1, 2]));
    }

    #[test]
    fn treewidth_closed_forms() {
        assert_eq!(brute_treewidth(&Graph::path(6)), 1);
        assert_eq!(brute_treewidth(&Graph::complete(4)), 3);
        assert_eq!(brute_treewidth(&Graph::cycle(4)), 2);
        assert_eq!(brute_treewidth(&Graph::cycle(7)), 2);
        assert_eq!(brute_treewidth(&Graph::new(3)), 0);
        assert_eq!(brute_treewidth(&Graph::new(0)), -1);
    }

    #[test]
    fn separator_examples() {
        assert_eq!(brute_min_separator(&Graph::path(3), 0, 2), PairConnectivity::Finite(1));
        assert_eq!(brute_min_separator(&Graph::cycle(4), 0, 2), PairConnectivity::Finite(2));
        assert_eq!(brute_min_separator(&Graph::path(2), 0, 1), PairConnectivity::Infinite);
    }

    #[test]
    fn clique_separation_examples() {
        let diamond = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let s = brute_clique_separation(&diamond).unwrap();
        assert_eq!(s.separator(), VertexSet::from([0, 1]));
        assert!(brute_clique_separation(&Graph::complete(5)).is_none());
        assert_eq!(brute_clique_separation(&Graph::new(2)).unwrap().separator(), VertexSet::new());
    }

    #[test]
    fn partial_ktree_examples() {
        assert_eq!(gen_partial_ktree(4, 3, 1.0, 7), Graph::complete(4));
        assert_eq!(gen_partial_ktree(8, 2, 0.0, 7).m(), 0);
        for seed in 0..20 {
            let g = gen_partial_ktree(9, 2, 0.6, seed);
            assert!(brute_treewidth(&g) <= 2);
            assert_eq!(g, gen_partial_ktree(9, 2, 0.6, seed));
        }
    }
}
