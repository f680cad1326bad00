//! Canonical construction terms and the isomorphism test built on them.
//!
//! For a connected graph the term is `T[∅, ∅, V]`, the `⊴`-least term among
//! all ways to build `(G[B ∪ Z] minus the edges inside B, λ)` from states
//! `(B, λ, Z)` whose bags come from the reduced bag family. The recursion is
//! evaluated top-down from the start state with memoization.
//!
//! Two facts keep the reachable state space small without changing any
//! value:
//!
//! * Whether a state has a term at all does not depend on `λ`, and depends
//!   on `B` only through `N(Z)`: extra bag vertices can always be introduced
//!   first. So feasibility is memoized per zone.
//! * The top operator decides `⊴` first. If some bag vertex misses `Z`, an
//!   introduce candidate exists and the least label among those wins.
//!   Otherwise every candidate is a forget, and `forget_i` with the least
//!   free label `i` beats every larger label, since feasibility of a forget
//!   candidate does not depend on `i`.
//!
//! Candidates that survive are compared by a cheap operator prefix first and
//! only the prefix-minimal ones are expanded. [`reference`] holds a literal
//! implementation over all labels, used by the tests to cross-check.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use crate::bags::{reduced_family, Params, ReducedBagFamily};
use crate::bits::Bits;
use crate::error::Error;
use crate::exec;
use crate::graph::{Graph, Vertex, VertexSet};
use crate::improved::improve;
use crate::terms::{compare, Label, Op, Term};

/// Canonical term of a graph plus the numbering that certifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonResult {
    pub term: Term,
    /// `phi[v]` is the canonical number of `v`, in `1..=n`.
    pub phi: Vec<usize>,
    /// Graph on canonical numbers; vertex `i` stands for number `i + 1`.
    pub canonical_graph: Graph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoOutcome {
    /// `mapping[v]` is the image in the second graph of vertex `v` of the first.
    Isomorphic(Vec<Vertex>),
    NonIsomorphic,
}

/// Bag family with bitset bags, as used by the dynamic program.
struct Family {
    bags: Vec<Bits>,
    cap: usize,
}

impl Family {
    fn new(n: usize, f: &ReducedBagFamily) -> Self {
        Family { bags: f.base.iter().map(|b| Bits::from_iter(n, b.iter().copied())).collect(), cap: f.cap }
    }

    fn member(&self, x: &Bits) -> bool {
        x.len() <= self.cap && self.bags.iter().any(|b| x.is_subset(b))
    }
}

struct GraphBits {
    n: usize,
    adj: Vec<Bits>,
}

impl GraphBits {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        GraphBits { n, adj: (0..n).map(|v| Bits::from_iter(n, g.neighbors(v).iter().copied())).collect() }
    }

    fn neighborhood(&self, z: &Bits) -> Bits {
        let mut out = Bits::new(self.n);
        for v in z.iter() {
            out.union_with(&self.adj[v]);
        }
        out.difference_with(z);
        out
    }

    /// Components of `G[z]`, ordered by smallest member.
    fn components(&self, z: &Bits) -> Vec<Bits> {
        let mut left = z.clone();
        let mut out = Vec::new();
        while let Some(start) = left.first() {
            let mut comp = Bits::new(self.n);
            comp.insert(start);
            left.remove(start);
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for w in self.adj[u].iter() {
                    if left.contains(w) {
                        left.remove(w);
                        comp.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

/// Bag labelling as `(vertex, label)` pairs sorted by vertex.
type Labelling = Vec<(Vertex, Label)>;

fn smallest_free(lab: &Labelling) -> Label {
    let mut used: Vec<Label> = lab.iter().map(|&(_, l)| l).collect();
    used.sort_unstable();
    let mut next = 1;
    for l in used {
        if l == next {
            next += 1;
        } else if l > next {
            break;
        }
    }
    next
}

fn with_label(lab: &Labelling, v: Vertex, l: Label) -> Labelling {
    let mut out = lab.clone();
    let pos = out.partition_point(|&(u, _)| u < v);
    out.insert(pos, (v, l));
    out
}

fn restrict(lab: &Labelling, keep: &Bits) -> Labelling {
    lab.iter().copied().filter(|&(v, _)| keep.contains(v)).collect()
}

#[derive(Clone)]
struct Solved {
    term: Term,
    /// Vertices of `G` in the pre-order of the forget nodes that remove them.
    order: Arc<Vec<Vertex>>,
}

fn length_bound(k_prime: usize, z: usize, b: usize) -> usize {
    (k_prime + 2) * (2 * z).saturating_sub(1) + b + 2
}

struct Dp<'a> {
    g: &'a GraphBits,
    family: &'a Family,
    k_prime: usize,
    feasible: HashMap<Bits, bool>,
    memo: HashMap<(Bits, Vec<Label>), Option<Solved>>,
}

impl<'a> Dp<'a> {
    fn new(g: &'a GraphBits, family: &'a Family) -> Self {
        Dp { g, family, k_prime: family.cap, feasible: HashMap::new(), memo: HashMap::new() }
    }

    fn with_v(&self, b: &Bits, v: Vertex) -> Bits {
        let mut out = b.clone();
        out.insert(v);
        out
    }

    /// Whether `(N(z), ·, z)` has a term, for nonempty connected `z`.
    fn is_feasible(&mut self, z: &Bits) -> bool {
        if let Some(&f) = self.feasible.get(z) {
            return f;
        }
        let nz = self.g.neighborhood(z);
        let mut ok = false;
        if nz.len() < self.k_prime {
            for v in z.iter() {
                if !self.family.member(&self.with_v(&nz, v)) {
                    continue;
                }
                let mut rest = z.clone();
                rest.remove(v);
                if self.g.components(&rest).iter().all(|c| self.is_feasible(c)) {
                    ok = true;
                    break;
                }
            }
        }
        self.feasible.insert(z.clone(), ok);
        ok
    }

    /// `T[B, λ, Z]` for a state with `Z` empty or one component of `G \ B`.
    fn state(&mut self, b: &Bits, lab: &Labelling, z: &Bits) -> Option<Solved> {
        let nz = self.g.neighborhood(z);
        debug_assert!(nz.is_subset(b));
        let mut loose: Vec<Label> = lab.iter().filter(|&&(v, _)| !nz.contains(v)).map(|&(_, l)| l).collect();
        loose.sort_unstable();
        let mut solved = if z.is_empty() {
            Solved { term: Term::leaf(), order: Arc::new(Vec::new()) }
        } else {
            self.reduced(z, &restrict(lab, &nz))?
        };
        for &l in loose.iter().rev() {
            solved.term = Term::introduce(l, solved.term).expect("label is fresh below");
        }
        assert!(
            solved.term.len() <= length_bound(self.k_prime, z.len(), b.len()),
            "term longer than the length bound"
        );
        Some(solved)
    }

    /// `T[N(Z), λ, Z]`: only forget candidates, all with the least free label.
    fn reduced(&mut self, z: &Bits, lab: &Labelling) -> Option<Solved> {
        let key = (z.clone(), lab.iter().map(|&(_, l)| l).collect::<Vec<_>>());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = self.reduced_uncached(z, lab);
        self.memo.insert(key, out.clone());
        out
    }

    fn reduced_uncached(&mut self, z: &Bits, lab: &Labelling) -> Option<Solved> {
        if !self.is_feasible(z) {
            return None;
        }
        let b = self.g.neighborhood(z);
        let pot = 2 * z.len() + b.len();
        let i0 = smallest_free(lab);
        let mut best_prefix: Option<Vec<Op>> = None;
        let mut tied: Vec<(Vertex, Vec<Bits>)> = Vec::new();
        for v in z.iter() {
            let bv = self.with_v(&b, v);
            if !self.family.member(&bv) {
                continue;
            }
            let mut rest = z.clone();
            rest.remove(v);
            let comps = self.g.components(&rest);
            if !comps.iter().all(|c| self.is_feasible(c)) {
                continue;
            }
            assert!(comps.iter().all(|c| 2 * c.len() + bv.len() < pot), "state potential must drop");
            let prefix = self.prefix(v, i0, lab, &bv, &comps);
            match best_prefix.as_ref().map(|p| prefix.cmp(p)) {
                Some(Ordering::Greater) => continue,
                Some(Ordering::Equal) => tied.push((v, comps)),
                _ => {
                    best_prefix = Some(prefix);
                    tied = vec![(v, comps)];
                }
            }
        }
        let mut best: Option<Solved> = None;
        for (v, comps) in tied {
            let cand = self.forget_candidate(v, i0, lab, &b, &comps)?;
            if best.as_ref().is_none_or(|cur| compare(&cand.term, &cur.term).is_lt()) {
                best = Some(cand);
            }
        }
        // feasibility guarantees at least one candidate
        debug_assert!(best.is_some());
        best
    }

    /// Operators of a forget candidate down to the first one below its edges.
    fn prefix(&self, v: Vertex, i0: Label, lab: &Labelling, bv: &Bits, comps: &[Bits]) -> Vec<Op> {
        let mut ops = vec![Op::Forget(i0)];
        let mut js: Vec<Label> = lab.iter().filter(|&&(u, _)| self.g.adj[v].contains(u)).map(|&(_, l)| l).collect();
        js.sort_unstable();
        ops.extend(js.into_iter().map(|j| Op::Edge(i0, j)));
        let lab_v = with_label(lab, v, i0);
        let next = match comps {
            [] => Op::Introduce(lab_v.iter().map(|&(_, l)| l).min().expect("bag holds v")),
            [only] => {
                let nz = self.g.neighborhood(only);
                let loose = lab_v.iter().filter(|&&(u, _)| !nz.contains(u)).map(|&(_, l)| l).min();
                match loose {
                    Some(l) => Op::Introduce(l),
                    None => Op::Forget(smallest_free(&lab_v)),
                }
            }
            _ => Op::Join,
        };
        debug_assert!(bv.contains(v));
        ops.push(next);
        ops
    }

    fn forget_candidate(&mut self, v: Vertex, i0: Label, lab: &Labelling, b: &Bits, comps: &[Bits]) -> Option<Solved> {
        let bv = self.with_v(b, v);
        let lab_v = with_label(lab, v, i0);
        let inner = self.break_op(&bv, &lab_v, comps)?;
        let mut js: Vec<Label> = lab.iter().filter(|&&(u, _)| self.g.adj[v].contains(u)).map(|&(_, l)| l).collect();
        js.sort_unstable();
        let mut term = inner.term;
        for &j in js.iter().rev() {
            term = Term::edge(i0, j, term).expect("edge joins labelled, unlinked vertices");
        }
        term = Term::forget(i0, term).expect("label was introduced below");
        let mut order = Vec::with_capacity(inner.order.len() + 1);
        order.push(v);
        order.extend(inner.order.iter());
        Some(Solved { term, order: Arc::new(order) })
    }

    /// `break[B, λ, Z]` where `Z` is the union of `comps`.
    fn break_op(&mut self, b: &Bits, lab: &Labelling, comps: &[Bits]) -> Option<Solved> {
        match comps {
            [] => self.state(b, lab, &Bits::new(self.g.n)),
            [only] => self.state(b, lab, only),
            _ => {
                let mut parts = Vec::with_capacity(comps.len());
                for c in comps {
                    parts.push(self.state(b, lab, c)?);
                }
                Some(join_sorted(parts))
            }
        }
    }
}

fn join_sorted(mut parts: Vec<Solved>) -> Solved {
    parts.sort_by(|a, b| compare(&a.term, &b.term));
    let order: Vec<Vertex> = parts.iter().flat_map(|p| p.order.iter().copied()).collect();
    let term = Term::join(parts.into_iter().map(|p| p.term).collect()).expect("parts share labels and have no bag edges");
    Solved { term, order: Arc::new(order) }
}

/// Runs the dynamic program on a connected graph with a given family; the
/// label budget is the family's cap. Returns the term and the vertices in
/// forget pre-order.
#[doc(hidden)]
pub fn canonize_connected_with(g: &Graph, family: &ReducedBagFamily) -> Option<(Term, Vec<Vertex>)> {
    let gb = GraphBits::new(g);
    let fam = Family::new(g.n(), family);
    let mut dp = Dp::new(&gb, &fam);
    let empty = Bits::new(g.n());
    if !fam.member(&empty) {
        return None;
    }
    let all = Bits::from_iter(g.n(), 0..g.n());
    let s = dp.state(&empty, &Vec::new(), &all)?;
    Some((s.term, s.order.to_vec()))
}

fn canonize_component(g: &Graph, k: usize, p: &Params) -> Result<Solved, Error> {
    if g.n() == 1 {
        let term = Term::forget(1, Term::introduce(1, Term::leaf()).expect("fresh")).expect("used");
        return Ok(Solved { term, order: Arc::new(vec![0]) });
    }
    let improved = improve(g, k)?;
    let family = reduced_family(&improved, p)?;
    if family.is_empty() {
        return Err(Error::TooWide { k });
    }
    let (term, order) = canonize_connected_with(g, &family).ok_or(Error::TooWide { k })?;
    Ok(Solved { term, order: Arc::new(order) })
}

/// Computes the canonical term of `g`, or reports `tw(G) >= k`.
pub fn canonize(g: &Graph, k: usize, p: &Params) -> Result<CanonResult, Error> {
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let comps = g.components(&VertexSet::new())?;
    let solved = exec::map(comps, |comp| {
        let (h, map) = g.induced_subgraph(&comp)?;
        let s = canonize_component(&h, k, p)?;
        let order: Vec<Vertex> = s.order.iter().map(|&v| map[v]).collect();
        Ok::<_, Error>(Solved { term: s.term, order: Arc::new(order) })
    });
    let mut parts = Vec::new();
    for s in solved {
        parts.push(s?);
    }
    let top = match parts.len() {
        0 => Solved { term: Term::leaf(), order: Arc::new(Vec::new()) },
        1 => parts.pop().expect("one part"),
        _ => join_sorted(parts),
    };
    certify(g, top)
}

/// Numbers vertices by the pre-order of their forget nodes and checks the
/// numbering is an isomorphism onto the evaluated term.
fn certify(g: &Graph, solved: Solved) -> Result<CanonResult, Error> {
    let n = g.n();
    let ev = solved.term.eval();
    let eval_order = ev.forget_order();
    if eval_order.len() != n || solved.order.len() != n || ev.graph.n() != n {
        return Err(Error::contract("term does not forget every vertex exactly once"));
    }
    let mut number = vec![0; n];
    for (i, &v) in eval_order.iter().enumerate() {
        number[v] = i;
    }
    let canonical_graph = ev.graph.permuted(&number);
    let mut phi = vec![usize::MAX; n];
    for (i, &v) in solved.order.iter().enumerate() {
        phi[v] = i + 1;
    }
    let bijective = phi.iter().all(|&x| x != usize::MAX);
    let preserves = g.m() == canonical_graph.m() && g.edges().all(|(u, v)| canonical_graph.has_edge(phi[u] - 1, phi[v] - 1));
    if !bijective || !preserves {
        return Err(Error::contract("canonical numbering is not an isomorphism"));
    }
    Ok(CanonResult { term: solved.term, phi, canonical_graph })
}

/// Decides isomorphism by comparing canonical terms; the returned mapping is
/// verified edge by edge.
pub fn isomorphic(g1: &Graph, g2: &Graph, k: usize, p: &Params) -> Result<IsoOutcome, Error> {
    let (r1, r2) = exec::join(|| canonize(g1, k, p), || canonize(g2, k, p));
    let (c1, c2) = match (r1, r2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e @ Error::TooWide { .. }), _) | (_, Err(e @ Error::TooWide { .. })) => return Err(e),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    if c1.term.serialize() != c2.term.serialize() {
        return Ok(IsoOutcome::NonIsomorphic);
    }
    let mut inv = vec![0; g2.n()];
    for (v, &x) in c2.phi.iter().enumerate() {
        inv[x - 1] = v;
    }
    let mapping: Vec<Vertex> = c1.phi.iter().map(|&x| inv[x - 1]).collect();
    let ok = g1.n() == g2.n() && g1.m() == g2.m() && g1.edges().all(|(u, v)| g2.has_edge(mapping[u], mapping[v]));
    if !ok {
        return Err(Error::contract("equal terms but the derived mapping is not an isomorphism"));
    }
    Ok(IsoOutcome::Isomorphic(mapping))
}

/// Literal dynamic program over every state reachable from `(∅, ∅, V)`,
/// trying every free label in forget candidates. Exponential in the label
/// budget; only for cross-checking on tiny inputs.
#[doc(hidden)]
pub mod reference {
    use super::*;

    struct Exhaustive<'a> {
        g: &'a GraphBits,
        family: &'a Family,
        memo: HashMap<(Bits, Labelling, Bits), Option<Term>>,
    }

    impl Exhaustive<'_> {
        fn state(&mut self, b: &Bits, lab: &Labelling, z: &Bits) -> Option<Term> {
            let key = (b.clone(), lab.clone(), z.clone());
            if let Some(hit) = self.memo.get(&key) {
                return hit.clone();
            }
            let out = self.solve(b, lab, z);
            self.memo.insert(key, out.clone());
            out
        }

        fn solve(&mut self, b: &Bits, lab: &Labelling, z: &Bits) -> Option<Term> {
            if !self.family.member(b) {
                return None;
            }
            let mut cands: Vec<Term> = Vec::new();
            if b.is_empty() && z.is_empty() {
                cands.push(Term::leaf());
            }
            for &(u, l) in lab {
                if self.g.adj[u].intersects(z) {
                    continue;
                }
                let mut b2 = b.clone();
                b2.remove(u);
                let lab2: Labelling = lab.iter().copied().filter(|&(w, _)| w != u).collect();
                if let Some(t) = self.state(&b2, &lab2, z) {
                    cands.push(Term::introduce(l, t).expect("fresh label"));
                }
            }
            let used: Vec<Label> = lab.iter().map(|&(_, l)| l).collect();
            for v in z.iter() {
                let mut bv = b.clone();
                bv.insert(v);
                if !self.family.member(&bv) {
                    continue;
                }
                let mut rest = z.clone();
                rest.remove(v);
                let comps = self.g.components(&rest);
                for i in 1..=self.family.cap as Label {
                    if used.contains(&i) {
                        continue;
                    }
                    let lab_v = with_label(lab, v, i);
                    let inner = match comps.as_slice() {
                        [] => self.state(&bv, &lab_v, &rest),
                        [only] => self.state(&bv, &lab_v, only),
                        _ => {
                            let mut parts = Vec::new();
                            for c in &comps {
                                match self.state(&bv, &lab_v, c) {
                                    Some(t) => parts.push(t),
                                    None => break,
                                }
                            }
                            if parts.len() < comps.len() {
                                None
                            } else {
                                parts.sort();
                                Some(Term::join(parts).expect("valid join"))
                            }
                        }
                    };
                    let Some(mut t) = inner else { continue };
                    let mut js: Vec<Label> =
                        lab.iter().filter(|&&(u, _)| self.g.adj[v].contains(u)).map(|&(_, l)| l).collect();
                    js.sort_unstable();
                    for &j in js.iter().rev() {
                        t = Term::edge(i, j, t).expect("valid edge");
                    }
                    cands.push(Term::forget(i, t).expect("valid forget"));
                }
            }
            cands.into_iter().min()
        }
    }

    /// `T[∅, ∅, V]` by the literal recursion; label budget is `family.cap`.
    pub fn canonize_connected_exhaustive(g: &Graph, family: &ReducedBagFamily) -> Option<Term> {
        let gb = GraphBits::new(g);
        let fam = Family::new(g.n(), family);
        let mut ex = Exhaustive { g: &gb, family: &fam, memo: HashMap::new() };
        let all = Bits::from_iter(g.n(), 0..g.n());
        ex.state(&Bits::new(g.n()), &Vec::new(), &all)
    }
}
