//! Simple undirected graphs on contiguous vertex ids, plus the separation
//! machinery every later stage builds on.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::flow::{FlowOutcome, VertexFlow};

pub type Vertex = usize;

/// Vertex sets are ordered so that every set-valued output is sorted.
pub type VertexSet = BTreeSet<Vertex>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("query endpoints coincide at vertex {0}")]
    SameEndpoints(Vertex),
    #[error("terminal set is empty")]
    EmptyTerminalSet,
    #[error("capacity bound must be at least 1")]
    ZeroCap,
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list. Duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            g.adj[u] = (0..n).filter(|&v| v != u).collect();
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges).expect("path edges are in range")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n >= 3 {
            edges.push((n - 1, 0));
        }
        Graph::from_edges(n, &edges).expect("cycle edges are in range")
    }

    /// Inserts `uv`; returns whether the edge was new.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[u].insert(pos, v);
                let pos = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(pos, u);
                Ok(true)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn vertices(&self) -> VertexSet {
        (0..self.n()).collect()
    }

    pub(crate) fn check(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    pub(crate) fn check_set<'a>(&self, s: impl IntoIterator<Item = &'a Vertex>) -> Result<(), GraphError> {
        s.into_iter().try_for_each(|&v| self.check(v))
    }

    /// Open and closed neighbourhood of `z`: `(N(z), N[z])`.
    pub fn neighborhood(&self, z: &VertexSet) -> Result<(VertexSet, VertexSet), GraphError> {
        self.check_set(z)?;
        let open: VertexSet = z
            .iter()
            .flat_map(|&u| self.adj[u].iter().copied())
            .filter(|v| !z.contains(v))
            .collect();
        let closed = open.union(z).copied().collect();
        Ok((open, closed))
    }

    /// Connected components of `G \ removed`, ordered by smallest member.
    pub fn components(&self, removed: &VertexSet) -> Result<Vec<VertexSet>, GraphError> {
        self.check_set(removed)?;
        let mut seen = vec![false; self.n()];
        for &v in removed {
            seen[v] = true;
        }
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = VertexSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                comp.insert(u);
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            out.push(comp);
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.components(&VertexSet::new()).map(|c| c.len() == 1).unwrap_or(false)
    }

    /// True iff every pair of `s` is adjacent; the empty set is a clique.
    pub fn is_clique(&self, s: &VertexSet) -> bool {
        let vs: Vec<_> = s.iter().copied().collect();
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Induced subgraph on `vertices`; local id `i` corresponds to the `i`-th
    /// smallest member. Returns the local-to-global map alongside.
    pub fn induced_subgraph(&self, vertices: &VertexSet) -> Result<(Graph, Vec<Vertex>), GraphError> {
        self.check_set(vertices)?;
        let map: Vec<Vertex> = vertices.iter().copied().collect();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let adj = map
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .map(|&w| local[w])
                    .collect()
            })
            .collect();
        Ok((Graph { adj }, map))
    }

    /// Image of the graph under `perm` (vertex `v` becomes `perm[v]`).
    pub fn permuted(&self, perm: &[Vertex]) -> Graph {
        assert_eq!(perm.len(), self.n(), "permutation length mismatch");
        let mut adj = vec![Vec::new(); self.n()];
        for (u, ns) in self.adj.iter().enumerate() {
            let mut row: Vec<_> = ns.iter().map(|&v| perm[v]).collect();
            row.sort_unstable();
            adj[perm[u]] = row;
        }
        Graph { adj }
    }
}

/// Ordered pair `(A, B)` covering `V` with no edge between `A \ B` and `B \ A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Separation {
    pub side_a: VertexSet,
    pub side_b: VertexSet,
}

impl Separation {
    pub fn separator(&self) -> VertexSet {
        self.side_a.intersection(&self.side_b).copied().collect()
    }

    pub fn order(&self) -> usize {
        self.side_a.intersection(&self.side_b).count()
    }

    /// Checks the covering and no-crossing-edge conditions against `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        if (0..g.n()).any(|v| !self.side_a.contains(&v) && !self.side_b.contains(&v)) {
            return false;
        }
        if self.side_a.iter().chain(&self.side_b).any(|&v| v >= g.n()) {
            return false;
        }
        g.edges().all(|(u, v)| {
            let a_only = |x: Vertex| self.side_a.contains(&x) && !self.side_b.contains(&x);
            let b_only = |x: Vertex| self.side_b.contains(&x) && !self.side_a.contains(&x);
            !(a_only(u) && b_only(v) || b_only(u) && a_only(v))
        })
    }
}

/// `conn(x, y)`; infinite exactly for adjacent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairConnectivity {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSeparation {
    Adjacent,
    AtLeastCap,
    Found {
        order: usize,
        /// Minimum-order separation with inclusion-minimal `A`.
        pushed_x: Separation,
        /// Minimum-order separation with inclusion-minimal `B`.
        pushed_y: Separation,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSeparation {
    AtLeastCap,
    Found {
        order: usize,
        pushed_x: Separation,
        pushed_y: Separation,
    },
}

/// Minimum-order `x-y` separation with `x, y` outside the separator, or
/// `AtLeastCap` once `cap` disjoint paths have been found.
pub fn min_separation_pair(g: &Graph, x: Vertex, y: Vertex, cap: usize) -> Result<PairSeparation, GraphError> {
    g.check(x)?;
    g.check(y)?;
    if x == y {
        return Err(GraphError::SameEndpoints(x));
    }
    if cap == 0 {
        return Err(GraphError::ZeroCap);
    }
    if g.has_edge(x, y) {
        return Ok(PairSeparation::Adjacent);
    }
    let mut net = VertexFlow::new(g, &[x, y]);
    net.connect_source(x);
    net.connect_sink(y);
    Ok(match net.run(cap) {
        FlowOutcome::AtLeastCap => PairSeparation::AtLeastCap,
        FlowOutcome::Cut { order, toward_source, toward_sink } => PairSeparation::Found {
            order,
            pushed_x: toward_source,
            pushed_y: toward_sink,
        },
    })
}

/// Minimum-order `X-Y` separation; members of `xs` and `ys` may lie in the
/// separator.
pub fn min_separation_sets(
    g: &Graph,
    xs: &VertexSet,
    ys: &VertexSet,
    cap: usize,
) -> Result<SetSeparation, GraphError> {
    g.check_set(xs)?;
    g.check_set(ys)?;
    if xs.is_empty() || ys.is_empty() {
        return Err(GraphError::EmptyTerminalSet);
    }
    if cap == 0 {
        return Err(GraphError::ZeroCap);
    }
    let mut net = VertexFlow::new(g, &[]);
    for &x in xs {
        net.connect_source(x);
    }
    for &y in ys {
        net.connect_sink(y);
    }
    Ok(match net.run(cap) {
        FlowOutcome::AtLeastCap => SetSeparation::AtLeastCap,
        FlowOutcome::Cut { order, toward_source, toward_sink } => SetSeparation::Found {
            order,
            pushed_x: toward_source,
            pushed_y: toward_sink,
        },
    })
}

/// `conn(x, y)`, counting at most `cap` paths; `None` means `>= cap`.
pub fn connectivity(g: &Graph, x: Vertex, y: Vertex, cap: usize) -> Result<Option<PairConnectivity>, GraphError> {
    Ok(match min_separation_pair(g, x, y, cap)? {
        PairSeparation::Adjacent => Some(PairConnectivity::Infinite),
        PairSeparation::AtLeastCap => None,
        PairSeparation::Found { order, .. } => Some(PairConnectivity::Finite(order)),
    })
}
