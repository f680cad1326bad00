//! Clique minimal separator decomposition via MCS-M.
//!
//! MCS-M yields a minimal elimination ordering together with the generators
//! of the minimal separators. Walking the ordering, every generator whose
//! higher neighbourhood in the triangulation is a clique of `G` cuts off one
//! atom.

use crate::decomp::TreeDecomposition;
use crate::error::Error;
use crate::graph::{Graph, Vertex, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomDecomposition {
    pub bags: Vec<VertexSet>,
    pub parent: Vec<Option<usize>>,
    /// Clique separator towards the parent; `None` at the root.
    pub adhesions: Vec<Option<VertexSet>>,
}

impl AtomDecomposition {
    pub fn tree_decomposition(&self) -> TreeDecomposition {
        TreeDecomposition { parent: self.parent.clone(), bags: self.bags.clone() }
    }

    pub fn max_adhesion(&self) -> usize {
        self.adhesions.iter().flatten().map(VertexSet::len).max().unwrap_or(0)
    }
}

struct Mcsm {
    /// Vertices in elimination order (first eliminated first).
    order: Vec<Vertex>,
    position: Vec<usize>,
    /// Neighbourhood in the minimal triangulation.
    fill_adj: Vec<VertexSet>,
    generator: Vec<bool>,
}

fn mcs_m(g: &Graph) -> Mcsm {
    let n = g.n();
    let mut label = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut fill_adj: Vec<VertexSet> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut generator = vec![false; n];
    let mut picked = Vec::with_capacity(n);
    let mut prev: Option<usize> = None;

    for _ in 0..n {
        let x = (0..n)
            .filter(|&v| !numbered[v])
            .max_by(|&a, &b| label[a].cmp(&label[b]).then(b.cmp(&a)))
            .expect("an unnumbered vertex remains");
        if prev.is_some_and(|p| label[x] <= p) {
            generator[x] = true;
        }
        prev = Some(label[x]);
        numbered[x] = true;

        // Bottleneck search: best[y] = least possible maximum label over
        // the interior of an unnumbered x-y path.
        let mut best = vec![usize::MAX; n];
        let mut done = vec![false; n];
        for &y in g.neighbors(x) {
            if !numbered[y] {
                best[y] = 0;
            }
        }
        let mut reached = Vec::new();
        loop {
            let next = (0..n)
                .filter(|&v| !numbered[v] && !done[v] && best[v] != usize::MAX)
                .min_by_key(|&v| (best[v], v));
            let Some(y) = next else { break };
            done[y] = true;
            // direct neighbours have an empty interior
            let direct = g.has_edge(x, y);
            if direct || best[y] < label[y] + 1 {
                reached.push(y);
            }
            let through = if direct { label[y] + 1 } else { best[y].max(label[y] + 1) };
            for &w in g.neighbors(y) {
                if !numbered[w] && !done[w] && through < best[w] {
                    best[w] = through;
                }
            }
        }
        for y in reached {
            label[y] += 1;
            if !g.has_edge(x, y) {
                fill_adj[x].insert(y);
                fill_adj[y].insert(x);
            }
        }
        picked.push(x);
    }
    picked.reverse();
    let mut position = vec![0; n];
    for (i, &v) in picked.iter().enumerate() {
        position[v] = i;
    }
    Mcsm { order: picked, position, fill_adj, generator }
}

/// Decomposes a connected graph into its atoms. The set of bags depends only
/// on the isomorphism class; the tree shape may not.
pub fn atom_decomposition(g: &Graph) -> Result<AtomDecomposition, Error> {
    if g.n() == 0 || !g.is_connected() {
        return Err(Error::contract("atom decomposition needs a connected, nonempty graph"));
    }
    let n = g.n();
    let m = mcs_m(g);
    let mut alive = vec![true; n];
    let mut bags = Vec::new();
    let mut seps = Vec::new();
    for &x in &m.order {
        if !m.generator[x] || !alive[x] {
            continue;
        }
        let sep: VertexSet = m.fill_adj[x].iter().copied().filter(|&y| m.position[y] > m.position[x]).collect();
        if !g.is_clique(&sep) {
            continue;
        }
        // component of the remaining graph minus sep that contains x
        let mut comp = VertexSet::from([x]);
        let mut stack = vec![x];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if alive[w] && !sep.contains(&w) && comp.insert(w) {
                    stack.push(w);
                }
            }
        }
        for &v in &comp {
            alive[v] = false;
        }
        bags.push(sep.union(&comp).copied().collect::<VertexSet>());
        seps.push(sep);
    }
    bags.push((0..n).filter(|&v| alive[v]).collect());

    let last = bags.len() - 1;
    let mut parent = vec![None; bags.len()];
    let mut adhesions = vec![None; bags.len()];
    for (i, sep) in seps.into_iter().enumerate() {
        let p = (i + 1..=last).find(|&j| sep.is_subset(&bags[j])).expect("every clique lies in a later atom");
        parent[i] = Some(p);
        adhesions[i] = Some(sep);
    }
    Ok(AtomDecomposition { bags, parent, adhesions })
}
