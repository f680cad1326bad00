//! Unit vertex-capacity max-flow on the split graph (`v_in = 2v`,
//! `v_out = 2v + 1`). Augmenting paths are found by BFS in arc insertion
//! order, so results are deterministic for a fixed vertex numbering.

use std::collections::VecDeque;

use crate::graph::{Graph, Separation, Vertex, VertexSet};

const INF: u32 = u32::MAX / 2;

#[derive(Clone, Copy)]
struct Arc {
    to: usize,
    cap: u32,
    rev: usize,
}

pub(crate) enum FlowOutcome {
    AtLeastCap,
    Cut {
        order: usize,
        toward_source: Separation,
        toward_sink: Separation,
    },
}

pub(crate) struct VertexFlow {
    n: usize,
    arcs: Vec<Vec<Arc>>,
}

impl VertexFlow {
    /// Split network for `g`; vertices in `uncuttable` get unbounded capacity.
    pub(crate) fn new(g: &Graph, uncuttable: &[Vertex]) -> Self {
        let n = g.n();
        let mut net = VertexFlow { n, arcs: vec![Vec::new(); 2 * n + 2] };
        for v in 0..n {
            let cap = if uncuttable.contains(&v) { INF } else { 1 };
            net.add_arc(2 * v, 2 * v + 1, cap);
        }
        for (u, v) in g.edges() {
            net.add_arc(2 * u + 1, 2 * v, INF);
            net.add_arc(2 * v + 1, 2 * u, INF);
        }
        net
    }

    fn source(&self) -> usize {
        2 * self.n
    }

    fn sink(&self) -> usize {
        2 * self.n + 1
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        let rev_from = self.arcs[to].len();
        let rev_to = self.arcs[from].len();
        self.arcs[from].push(Arc { to, cap, rev: rev_from });
        self.arcs[to].push(Arc { to: from, cap: 0, rev: rev_to });
    }

    pub(crate) fn connect_source(&mut self, v: Vertex) {
        self.add_arc(self.source(), 2 * v, INF);
    }

    pub(crate) fn connect_sink(&mut self, v: Vertex) {
        self.add_arc(2 * v + 1, self.sink(), INF);
    }

    /// Pushes one unit along a shortest residual path; false if none exists.
    fn augment(&mut self) -> bool {
        let (s, t) = (self.source(), self.sink());
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.arcs.len()];
        let mut seen = vec![false; self.arcs.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for (i, a) in self.arcs[u].iter().enumerate() {
                if a.cap > 0 && !seen[a.to] {
                    seen[a.to] = true;
                    prev[a.to] = Some((u, i));
                    queue.push_back(a.to);
                }
            }
        }
        if !seen[t] {
            return false;
        }
        let mut cur = t;
        while let Some((u, i)) = prev[cur] {
            let Arc { to, rev, .. } = self.arcs[u][i];
            self.arcs[u][i].cap -= 1;
            self.arcs[to][rev].cap += 1;
            cur = u;
        }
        true
    }

    fn reach_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.arcs.len()];
        seen[self.source()] = true;
        let mut stack = vec![self.source()];
        while let Some(u) = stack.pop() {
            for a in &self.arcs[u] {
                if a.cap > 0 && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }

    fn reach_to_sink(&self) -> Vec<bool> {
        let mut seen = vec![false; self.arcs.len()];
        seen[self.sink()] = true;
        let mut stack = vec![self.sink()];
        while let Some(w) = stack.pop() {
            for a in &self.arcs[w] {
                // residual arc a.to -> w is the reverse of `a`
                if !seen[a.to] && self.arcs[a.to][a.rev].cap > 0 {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }

    pub(crate) fn run(mut self, cap: usize) -> FlowOutcome {
        let mut flow = 0;
        while self.augment() {
            flow += 1;
            if flow >= cap {
                return FlowOutcome::AtLeastCap;
            }
        }
        let n = self.n;

        let reach = self.reach_from_source();
        let side_a: VertexSet = (0..n).filter(|&v| reach[2 * v]).collect();
        let sep_a: VertexSet = side_a.iter().copied().filter(|&v| !reach[2 * v + 1]).collect();
        let side_b: VertexSet = (0..n).filter(|&v| !reach[2 * v + 1]).collect();
        debug_assert!(sep_a.is_subset(&side_b));
        let toward_source = Separation { side_a, side_b };

        let coreach = self.reach_to_sink();
        let side_b: VertexSet = (0..n).filter(|&v| coreach[2 * v + 1]).collect();
        let side_a: VertexSet = (0..n).filter(|&v| !coreach[2 * v]).collect();
        let toward_sink = Separation { side_a, side_b };

        debug_assert_eq!(toward_source.order(), flow);
        debug_assert_eq!(toward_sink.order(), flow);
        FlowOutcome::Cut { order: flow, toward_source, toward_sink }
    }
}
