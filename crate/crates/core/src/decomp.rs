//! Rooted tree decompositions, their validation, the conversion to
//! connectivity-sensitive form, and the bridges to construction terms.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::graph::{Graph, Vertex, VertexSet};
use crate::terms::{Label, Term, TermError};

/// Tree stored as a parent array; node ids index `bags`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub parent: Vec<Option<usize>>,
    pub bags: Vec<VertexSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Widths {
    /// `max |bag| - 1`; `-1` when every bag is empty.
    pub width: isize,
    pub adhesion_width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyTree,
    LengthMismatch,
    NotOneRoot(usize),
    BadParent(usize),
    Cycle(usize),
    VertexOutOfRange(Vertex),
    VertexMissing(Vertex),
    EdgeUncovered(Vertex, Vertex),
    Disconnected(Vertex),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTree => write!(f, "decomposition has no nodes"),
            Violation::LengthMismatch => write!(f, "parent and bag arrays differ in length"),
            Violation::NotOneRoot(r) => write!(f, "expected exactly one root, found {r}"),
            Violation::BadParent(t) => write!(f, "node {t} has an out-of-range parent"),
            Violation::Cycle(t) => write!(f, "node {t} lies on a parent cycle"),
            Violation::VertexOutOfRange(v) => write!(f, "bag mentions unknown vertex {v}"),
            Violation::VertexMissing(v) => write!(f, "vertex {v} is in no bag"),
            Violation::EdgeUncovered(u, v) => write!(f, "edge {u}-{v} is in no bag"),
            Violation::Disconnected(v) => write!(f, "bags containing vertex {v} are not connected"),
        }
    }
}

impl TreeDecomposition {
    pub fn single(bag: VertexSet) -> Self {
        TreeDecomposition { parent: vec![None], bags: vec![bag] }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    /// Children lists, each sorted by node id.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (t, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(t);
            }
        }
        ch
    }

    /// `σ(t) = β(t) ∩ β(parent(t))`, empty at the root.
    pub fn adhesion(&self, t: usize) -> VertexSet {
        match self.parent[t] {
            Some(p) => self.bags[t].intersection(&self.bags[p]).copied().collect(),
            None => VertexSet::new(),
        }
    }

    /// `γ(t)` for every node: union of the bags in the subtree.
    pub fn below(&self) -> Vec<VertexSet> {
        let children = self.children();
        let mut out: Vec<VertexSet> = self.bags.clone();
        for t in self.post_order() {
            for &c in &children[t] {
                let add = out[c].clone();
                out[t].extend(add);
            }
        }
        out
    }

    /// `α(t) = γ(t) \ σ(t)` for every node.
    pub fn strictly_below(&self) -> Vec<VertexSet> {
        self.below()
            .into_iter()
            .enumerate()
            .map(|(t, g)| g.difference(&self.adhesion(t)).copied().collect())
            .collect()
    }

    /// Nodes with every child before its parent. Assumes a well-formed tree.
    pub fn post_order(&self) -> Vec<usize> {
        let children = self.children();
        let mut out = Vec::with_capacity(self.len());
        let Some(root) = self.root() else { return out };
        let mut stack = vec![(root, false)];
        while let Some((t, done)) = stack.pop() {
            if done {
                out.push(t);
            } else {
                stack.push((t, true));
                for &c in children[t].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    fn structural_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.bags.is_empty() {
            out.push(Violation::EmptyTree);
            return out;
        }
        if self.parent.len() != self.bags.len() {
            out.push(Violation::LengthMismatch);
            return out;
        }
        let roots = self.parent.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            out.push(Violation::NotOneRoot(roots));
        }
        for (t, p) in self.parent.iter().enumerate() {
            if p.is_some_and(|p| p >= self.len()) {
                out.push(Violation::BadParent(t));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for t in 0..self.len() {
            let mut cur = t;
            let mut steps = 0;
            while let Some(p) = self.parent[cur] {
                cur = p;
                steps += 1;
                if steps > self.len() {
                    out.push(Violation::Cycle(t));
                    break;
                }
            }
        }
        out
    }
}

/// Checks the three decomposition axioms against `g`.
pub fn validate(g: &Graph, td: &TreeDecomposition) -> Result<Widths, Vec<Violation>> {
    let mut out = td.structural_violations();
    if !out.is_empty() {
        return Err(out);
    }
    let n = g.n();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            if v >= n {
                out.push(Violation::VertexOutOfRange(v));
            } else {
                holders[v].push(t);
            }
        }
    }
    for (v, hs) in holders.iter().enumerate() {
        if hs.is_empty() {
            out.push(Violation::VertexMissing(v));
        }
    }
    for (u, v) in g.edges() {
        if !td.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
            out.push(Violation::EdgeUncovered(u, v));
        }
    }
    // The holders of v form a subtree iff exactly one of them has a parent
    // outside the set.
    for (v, hs) in holders.iter().enumerate() {
        if hs.is_empty() {
            continue;
        }
        let tops = hs
            .iter()
            .filter(|&&t| td.parent[t].map_or(true, |p| !td.bags[p].contains(&v)))
            .count();
        if tops != 1 {
            out.push(Violation::Disconnected(v));
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    let width = td.bags.iter().map(|b| b.len() as isize).max().unwrap_or(0) - 1;
    let adhesion_width = (0..td.len()).map(|t| td.adhesion(t).len()).max().unwrap_or(0);
    Ok(Widths { width, adhesion_width })
}

/// True iff every `G[α(t)]` is connected and `σ(t) = N(α(t))`.
pub fn is_connectivity_sensitive(g: &Graph, td: &TreeDecomposition) -> bool {
    let alpha = td.strictly_below();
    (0..td.len()).all(|t| {
        let a = &alpha[t];
        let (open, _) = g.neighborhood(a).expect("bags are in range");
        let connected = a.is_empty() || {
            let (h, _) = g.induced_subgraph(a).expect("in range");
            h.is_connected()
        };
        connected && open == td.adhesion(t)
    })
}

/// Turns a decomposition of a connected graph into a connectivity-sensitive
/// one whose bags are subsets of the input bags.
pub fn make_cs(g: &Graph, td: &TreeDecomposition) -> Result<TreeDecomposition, Error> {
    if !g.is_connected() {
        return Err(Error::contract("make_cs needs a connected graph"));
    }
    if let Err(v) = validate(g, td) {
        return Err(Error::contract(format!("input decomposition is invalid: {}", v[0])));
    }
    let children = td.children();
    let alpha = td.strictly_below();
    let mut out = TreeDecomposition { parent: Vec::new(), bags: Vec::new() };
    if g.n() == 0 {
        return Ok(TreeDecomposition::single(VertexSet::new()));
    }
    let root = td.root().expect("validated");
    // (input node, zone, parent in output)
    let mut stack = vec![(root, g.vertices(), None)];
    while let Some((t, z, parent)) = stack.pop() {
        let (_, closed) = g.neighborhood(&z)?;
        let me = out.bags.len();
        out.bags.push(td.bags[t].intersection(&closed).copied().collect());
        out.parent.push(parent);
        for &c in children[t].iter().rev() {
            let zc: VertexSet = z.intersection(&alpha[c]).copied().collect();
            if zc.is_empty() {
                continue;
            }
            let outside: VertexSet = g.vertices().difference(&zc).copied().collect();
            for comp in g.components(&outside)?.into_iter().rev() {
                stack.push((c, comp, Some(me)));
            }
        }
    }
    Ok(out)
}

/// One node per subterm, bag = domain of the subterm's labelling, numbered in
/// pre-order of the term.
pub fn term_to_decomposition(t: &Term) -> (Graph, TreeDecomposition) {
    let ev = t.eval();
    let td = TreeDecomposition { parent: ev.node_parent.clone(), bags: ev.node_domain.clone() };
    (ev.graph, td)
}

/// Builds a term with no used labels that constructs `g`, following the
/// decomposition bottom-up. Labels are assigned smallest-free in ascending
/// vertex order; edges and forgets are emitted in ascending label order.
pub fn decomposition_to_term(g: &Graph, td: &TreeDecomposition, label_pool: usize) -> Result<Term, Error> {
    if let Err(v) = validate(g, td) {
        return Err(Error::contract(format!("decomposition is invalid: {}", v[0])));
    }
    if let Some(b) = td.bags.iter().find(|b| b.len() > label_pool) {
        return Err(Error::contract(format!("bag of size {} exceeds {label_pool} labels", b.len())));
    }
    let children = td.children();
    let root = td.root().expect("validated");
    let t = build_node(g, td, &children, root, &BTreeMap::new())?;
    Ok(t)
}

fn term_err(e: TermError) -> Error {
    Error::contract(format!("term construction failed: {e}"))
}

fn build_node(
    g: &Graph,
    td: &TreeDecomposition,
    children: &[Vec<usize>],
    t: usize,
    lab: &BTreeMap<Vertex, Label>,
) -> Result<Term, Error> {
    let bag = &td.bags[t];
    let mut full = lab.clone();
    let mut taken: Vec<Label> = lab.values().copied().collect();
    taken.sort_unstable();
    let mut next: Label = 1;
    for &v in bag {
        if full.contains_key(&v) {
            continue;
        }
        while taken.binary_search(&next).is_ok() {
            next += 1;
        }
        full.insert(v, next);
        let pos = taken.binary_search(&next).unwrap_err();
        taken.insert(pos, next);
    }

    let mut parts = Vec::new();
    for &c in &children[t] {
        let sigma = td.adhesion(c);
        let sub: BTreeMap<Vertex, Label> = sigma.iter().map(|v| (*v, full[v])).collect();
        let mut term = build_node(g, td, children, c, &sub)?;
        let mut extra: Vec<Label> = full.iter().filter(|(v, _)| !sigma.contains(v)).map(|(_, &l)| l).collect();
        extra.sort_unstable();
        for l in extra {
            term = Term::introduce(l, term).map_err(term_err)?;
        }
        parts.push(term);
    }
    let mut term = match parts.len() {
        0 => {
            // u1 is outermost
            let mut labels: Vec<Label> = bag.iter().map(|v| full[v]).collect();
            labels.reverse();
            let mut term = Term::leaf();
            for l in labels {
                term = Term::introduce(l, term).map_err(term_err)?;
            }
            term
        }
        1 => parts.pop().expect("one part"),
        _ => Term::join(parts).map_err(term_err)?,
    };

    let in_sigma = |v: &Vertex| lab.contains_key(v);
    let mut edges: Vec<(Label, Label)> = Vec::new();
    for &u in bag {
        for &v in g.neighbors(u) {
            if u < v && bag.contains(&v) && !(in_sigma(&u) && in_sigma(&v)) {
                let (a, b) = (full[&u], full[&v]);
                edges.push((a.min(b), a.max(b)));
            }
        }
    }
    edges.sort_unstable();
    for (a, b) in edges {
        term = Term::edge(a, b, term).map_err(term_err)?;
    }
    let mut forgets: Vec<Label> = full.iter().filter(|(v, _)| !in_sigma(v)).map(|(_, &l)| l).collect();
    forgets.sort_unstable();
    for l in forgets {
        term = Term::forget(l, term).map_err(term_err)?;
    }
    Ok(term)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn validate_examples() {
        let g = Graph::path(3);
        let w = validate(&g, &TreeDecomposition::single(g.vertices())).unwrap();
        assert_eq!(w, Widths { width: 2, adhesion_width: 0 });
        let td = TreeDecomposition { parent: vec![None, Some(0)], bags: vec![set(&[0, 1]), set(&[1, 2])] };
        assert_eq!(validate(&g, &td).unwrap(), Widths { width: 1, adhesion_width: 1 });
        let bad = TreeDecomposition { parent: vec![None, Some(0)], bags: vec![set(&[0]), set(&[2])] };
        let v = validate(&g, &bad).unwrap_err();
        assert!(v.contains(&Violation::VertexMissing(1)));
        assert!(v.contains(&Violation::EdgeUncovered(0, 1)));
    }

    #[test]
    fn disconnected_occurrences_flagged() {
        let g = Graph::new(2);
        let td = TreeDecomposition {
            parent: vec![None, Some(0), Some(1)],
            bags: vec![set(&[0]), set(&[1]), set(&[0])],
        };
        assert_eq!(validate(&g, &td).unwrap_err(), vec![Violation::Disconnected(0)]);
    }

    #[test]
    fn make_cs_examples() {
        let g = Graph::path(3);
        let single = TreeDecomposition::single(g.vertices());
        assert_eq!(make_cs(&g, &single).unwrap(), single);
        let td = TreeDecomposition { parent: vec![None, Some(0)], bags: vec![set(&[0, 2]), set(&[0, 1, 2])] };
        let cs = make_cs(&g, &td).unwrap();
        assert_eq!(cs, td);
        assert!(is_connectivity_sensitive(&g, &cs));
        let disconnected = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(make_cs(&disconnected, &TreeDecomposition::single(disconnected.vertices())).is_err());
    }

    #[test]
    fn term_bridges() {
        let (g, td) = term_to_decomposition(&Term::leaf());
        assert_eq!(g.n(), 0);
        assert_eq!(td.bags, vec![VertexSet::new()]);

        let k1 = Term::parse(b"(f 1 (i 1 (leaf)))").unwrap();
        let (g, td) = term_to_decomposition(&k1);
        assert_eq!(td.bags, vec![set(&[]), set(&[0]), set(&[])]);
        assert!(validate(&g, &td).is_ok());

        let g = Graph::new(1);
        let t = decomposition_to_term(&g, &TreeDecomposition::single(set(&[0])), 1).unwrap();
        assert_eq!(t.to_string(), "(f 1 (i 1 (leaf)))");
        let g = Graph::complete(2);
        let t = decomposition_to_term(&g, &TreeDecomposition::single(set(&[0, 1])), 2).unwrap();
        assert_eq!(t.eval().graph, g);
        assert!(decomposition_to_term(&g, &TreeDecomposition::single(set(&[0, 1])), 1).is_err());
        let empty = decomposition_to_term(&Graph::new(0), &TreeDecomposition::single(set(&[])), 1).unwrap();
        assert_eq!(empty.to_string(), "(leaf)");
    }
}
