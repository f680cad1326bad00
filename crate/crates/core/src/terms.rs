//! Construction terms: `leaf`, `introduce_i`, `forget_i`, `edge_{i,j}` and
//! `join`, their evaluation to labelled graphs, the total order `⊴`, and
//! the text serialization.
//!
//! Terms are immutable and share subterms through reference counting, so
//! the canonizer can keep many candidates alive cheaply.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Graph, Vertex, VertexSet};

pub type Label = u32;

/// Operators in `⊴` order: introduces by label, forgets by label, edges by
/// `(i, j)`, then leaf, then join. The derived `Ord` is exactly that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Introduce(Label),
    Forget(Label),
    Edge(Label, Label),
    Leaf,
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("label 0 is not allowed")]
    ZeroLabel,
    #[error("label {0} is already used")]
    AlreadyUsed(Label),
    #[error("label {0} is not used")]
    NotUsed(Label),
    #[error("edge endpoints coincide ({0})")]
    LoopEdge(Label),
    #[error("edge {0}-{1} already present in the bag graph")]
    DuplicateEdge(Label, Label),
    #[error("join needs at least 2 arguments, got {0}")]
    JoinArity(usize),
    #[error("join arguments use different label sets")]
    JoinUsedMismatch,
    #[error("join argument has edges in its bag graph")]
    JoinBagNotEdgeless,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("bad label: {0}")]
    BadLabel(&'static str),
    #[error("trailing input")]
    Trailing,
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error(transparent)]
    Invalid(#[from] TermError),
}

struct Node {
    op: Op,
    children: Vec<Term>,
    used: Vec<Label>,
    bag_edges: Vec<(Label, Label)>,
    len: usize,
    fingerprint: u64,
}

/// A well-formed construction term. Cloning is cheap.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl Term {
    fn build(op: Op, children: Vec<Term>, used: Vec<Label>, bag_edges: Vec<(Label, Label)>) -> Term {
        let len = 1 + children.iter().map(Term::len).sum::<usize>();
        let mut h = DefaultHasher::new();
        op.hash(&mut h);
        for c in &children {
            c.0.fingerprint.hash(&mut h);
        }
        let fingerprint = h.finish();
        Term(Arc::new(Node { op, children, used, bag_edges, len, fingerprint }))
    }

    pub fn leaf() -> Term {
        Term::build(Op::Leaf, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn introduce(i: Label, t: Term) -> Result<Term, TermError> {
        if i == 0 {
            return Err(TermError::ZeroLabel);
        }
        let pos = match t.0.used.binary_search(&i) {
            Ok(_) => return Err(TermError::AlreadyUsed(i)),
            Err(pos) => pos,
        };
        let mut used = t.0.used.clone();
        used.insert(pos, i);
        let edges = t.0.bag_edges.clone();
        Ok(Term::build(Op::Introduce(i), vec![t], used, edges))
    }

    pub fn forget(i: Label, t: Term) -> Result<Term, TermError> {
        let Ok(pos) = t.0.used.binary_search(&i) else {
            return Err(TermError::NotUsed(i));
        };
        let mut used = t.0.used.clone();
        used.remove(pos);
        let edges = t.0.bag_edges.iter().copied().filter(|&(a, b)| a != i && b != i).collect();
        Ok(Term::build(Op::Forget(i), vec![t], used, edges))
    }

    pub fn edge(i: Label, j: Label, t: Term) -> Result<Term, TermError> {
        if i == j {
            return Err(TermError::LoopEdge(i));
        }
        for l in [i, j] {
            if t.0.used.binary_search(&l).is_err() {
                return Err(TermError::NotUsed(l));
            }
        }
        let key = (i.min(j), i.max(j));
        let pos = match t.0.bag_edges.binary_search(&key) {
            Ok(_) => return Err(TermError::DuplicateEdge(i, j)),
            Err(pos) => pos,
        };
        let used = t.0.used.clone();
        let mut edges = t.0.bag_edges.clone();
        edges.insert(pos, key);
        Ok(Term::build(Op::Edge(i, j), vec![t], used, edges))
    }

    pub fn join(children: Vec<Term>) -> Result<Term, TermError> {
        if children.len() < 2 {
            return Err(TermError::JoinArity(children.len()));
        }
        let used = children[0].0.used.clone();
        if children.iter().any(|c| c.0.used != used) {
            return Err(TermError::JoinUsedMismatch);
        }
        if children.iter().any(|c| !c.0.bag_edges.is_empty()) {
            return Err(TermError::JoinBagNotEdgeless);
        }
        Ok(Term::build(Op::Join, children, used, Vec::new()))
    }

    pub fn op(&self) -> Op {
        self.0.op
    }

    pub fn children(&self) -> &[Term] {
        &self.0.children
    }

    /// Labels used, ascending.
    pub fn used(&self) -> &[Label] {
        &self.0.used
    }

    /// Edges of the bag graph as `(min, max)` pairs, ascending.
    pub fn bag_edges(&self) -> &[(Label, Label)] {
        &self.0.bag_edges
    }

    /// Number of operators in the term.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len
    }

    /// Largest label appearing anywhere in the term (0 for label-free terms).
    pub fn max_label(&self) -> Label {
        let mut best = 0;
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            best = best.max(match t.op() {
                Op::Introduce(i) | Op::Forget(i) => i,
                Op::Edge(i, j) => i.max(j),
                Op::Leaf | Op::Join => 0,
            });
            stack.extend(t.children());
        }
        best
    }

    /// Canonical text form, newline-terminated.
    pub fn serialize(&self) -> String {
        format!("{self}\n")
    }

    pub fn parse(input: &[u8]) -> Result<Term, ParseError> {
        let text = std::str::from_utf8(input).map_err(|e| ParseError {
            pos: e.valid_up_to(),
            kind: ParseErrorKind::Utf8,
        })?;
        let mut p = Parser { s: text.as_bytes(), pos: 0 };
        let t = p.term()?;
        if p.pos < p.s.len() && p.s[p.pos] == b'\n' {
            p.pos += 1;
        }
        if p.pos != p.s.len() {
            return Err(p.err(ParseErrorKind::Trailing));
        }
        Ok(t)
    }

    pub fn eval(&self) -> Evaluation {
        Evaluator::run(self)
    }
}

/// `⊴`: compare top operators, then children (join children lexicographically,
/// a proper prefix being smaller).
pub fn compare(a: &Term, b: &Term) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        if Arc::ptr_eq(&a.0, &b.0) {
            return Ordering::Equal;
        }
        match a.op().cmp(&b.op()) {
            Ordering::Equal => {}
            other => return other,
        }
        match a.op() {
            Op::Leaf => return Ordering::Equal,
            Op::Join => {
                for (x, y) in a.children().iter().zip(b.children()) {
                    match compare(x, y) {
                        Ordering::Equal => {}
                        other => return other,
                    }
                }
                return a.children().len().cmp(&b.children().len());
            }
            _ => {
                a = &a.children()[0];
                b = &b.children()[0];
            }
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.0.fingerprint == other.0.fingerprint && self.0.len == other.0.len && compare(self, other).is_eq()
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        compare(self, other)
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.fingerprint.hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op() {
            Op::Leaf => f.write_str("(leaf)"),
            Op::Introduce(i) => write!(f, "(i {i} {})", self.children()[0]),
            Op::Forget(i) => write!(f, "(f {i} {})", self.children()[0]),
            Op::Edge(i, j) => write!(f, "(e {i} {j} {})", self.children()[0]),
            Op::Join => {
                f.write_str("(j")?;
                for c in self.children() {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { pos: self.pos, kind }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Expected(what)))
        }
    }

    fn label(&mut self) -> Result<Label, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let digits = &self.s[start..self.pos];
        let fail = |p: &Self, why| Err(ParseError { pos: start.min(p.pos), kind: ParseErrorKind::BadLabel(why) });
        if digits.is_empty() {
            return fail(self, "expected a decimal label");
        }
        if digits[0] == b'0' {
            return fail(self, "labels are positive without leading zeros");
        }
        std::str::from_utf8(digits)
            .ok()
            .and_then(|d| d.parse::<Label>().ok())
            .map_or_else(|| fail(self, "label out of range"), Ok)
    }

    fn invalid(&self, start: usize, e: TermError) -> ParseError {
        ParseError { pos: start, kind: ParseErrorKind::Invalid(e) }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        self.expect(b'(', "`(`")?;
        let name_start = self.pos;
        while matches!(self.peek(), Some(b'a'..=b'z')) {
            self.pos += 1;
        }
        let name = &self.s[name_start..self.pos];
        let t = match name {
            b"leaf" => Term::leaf(),
            b"i" | b"f" => {
                self.expect(b' ', "a single space")?;
                let l = self.label()?;
                self.expect(b' ', "a single space")?;
                let child = self.term()?;
                let r = if name == b"i" { Term::introduce(l, child) } else { Term::forget(l, child) };
                r.map_err(|e| self.invalid(start, e))?
            }
            b"e" => {
                self.expect(b' ', "a single space")?;
                let i = self.label()?;
                self.expect(b' ', "a single space")?;
                let j = self.label()?;
                self.expect(b' ', "a single space")?;
                let child = self.term()?;
                Term::edge(i, j, child).map_err(|e| self.invalid(start, e))?
            }
            b"j" => {
                let mut children = Vec::new();
                while self.peek() == Some(b' ') {
                    self.pos += 1;
                    children.push(self.term()?);
                }
                if self.peek() != Some(b')') {
                    return Err(self.err(ParseErrorKind::Expected("` ` or `)`")));
                }
                Term::join(children).map_err(|e| self.invalid(start, e))?
            }
            _ => {
                let word = String::from_utf8_lossy(name).into_owned();
                return Err(ParseError { pos: name_start, kind: ParseErrorKind::UnknownOperator(word) });
            }
        };
        self.expect(b')', "`)`")?;
        Ok(t)
    }
}

/// Labelled graph produced by a term, plus bookkeeping about which term node
/// touched which vertex. Term nodes are numbered in depth-first pre-order
/// (root 0, join children in stored order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub graph: Graph,
    /// Label to vertex, for the labels used by the term.
    pub labelling: BTreeMap<Label, Vertex>,
    /// For every vertex, the pre-order id of the introduce node that created
    /// it (for vertices merged by a join, the earliest-created copy).
    pub origin: Vec<usize>,
    /// Parent of every term node.
    pub node_parent: Vec<Option<usize>>,
    /// Domain of the labelling of the subterm rooted at every node.
    pub node_domain: Vec<VertexSet>,
    /// Vertex forgotten at every forget node.
    pub forgotten: Vec<Option<Vertex>>,
}

impl Evaluation {
    /// Vertices in the order their forget nodes appear in pre-order.
    pub fn forget_order(&self) -> Vec<Vertex> {
        self.forgotten.iter().flatten().copied().collect()
    }
}

struct Evaluator {
    // provisional vertices are created in post-order
    uf: Vec<usize>,
    origin: Vec<usize>,
    edges: Vec<(usize, usize)>,
    node_parent: Vec<Option<usize>>,
    node_domain: Vec<Vec<usize>>,
    forgotten: Vec<Option<usize>>,
}

impl Evaluator {
    fn run(t: &Term) -> Evaluation {
        let mut ev = Evaluator {
            uf: Vec::new(),
            origin: Vec::new(),
            edges: Vec::new(),
            node_parent: Vec::new(),
            node_domain: Vec::new(),
            forgotten: Vec::new(),
        };
        let top = ev.visit(t, None);

        // Final ids: classes ranked by their earliest provisional vertex.
        let total = ev.uf.len();
        let mut final_id = vec![usize::MAX; total];
        let mut origin = Vec::new();
        let mut next = 0;
        for p in 0..total {
            let r = ev.find(p);
            if final_id[r] == usize::MAX {
                final_id[r] = next;
                origin.push(ev.origin[r]);
                next += 1;
            }
        }
        let id = |ev: &mut Evaluator, p: usize| final_id[ev.find(p)];
        let mut graph = Graph::new(next);
        for (a, b) in std::mem::take(&mut ev.edges) {
            let (a, b) = (id(&mut ev, a), id(&mut ev, b));
            graph.add_edge(a, b).expect("term edges join distinct vertices");
        }
        let labelling = top.into_iter().map(|(l, p)| (l, id(&mut ev, p))).collect();
        let node_domain = std::mem::take(&mut ev.node_domain)
            .into_iter()
            .map(|d| d.into_iter().map(|p| id(&mut ev, p)).collect())
            .collect();
        let forgotten = std::mem::take(&mut ev.forgotten)
            .into_iter()
            .map(|f| f.map(|p| id(&mut ev, p)))
            .collect();
        Evaluation { graph, labelling, origin, node_parent: ev.node_parent, node_domain, forgotten }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.uf[x] != x {
            self.uf[x] = self.uf[self.uf[x]];
            x = self.uf[x];
        }
        x
    }

    fn visit(&mut self, t: &Term, parent: Option<usize>) -> BTreeMap<Label, usize> {
        let me = self.node_parent.len();
        self.node_parent.push(parent);
        self.node_domain.push(Vec::new());
        self.forgotten.push(None);
        let map = match t.op() {
            Op::Leaf => BTreeMap::new(),
            Op::Introduce(i) => {
                let mut m = self.visit(&t.children()[0], Some(me));
                let v = self.uf.len();
                self.uf.push(v);
                self.origin.push(me);
                m.insert(i, v);
                m
            }
            Op::Forget(i) => {
                let mut m = self.visit(&t.children()[0], Some(me));
                self.forgotten[me] = m.remove(&i);
                m
            }
            Op::Edge(i, j) => {
                let m = self.visit(&t.children()[0], Some(me));
                self.edges.push((m[&i], m[&j]));
                m
            }
            Op::Join => {
                let maps: Vec<_> = t.children().iter().map(|c| self.visit(c, Some(me))).collect();
                let mut merged = maps[0].clone();
                for m in &maps[1..] {
                    for (l, &p) in m {
                        let (a, b) = (self.find(merged[l]), self.find(p));
                        let (lo, hi) = (a.min(b), a.max(b));
                        self.uf[hi] = lo;
                        merged.insert(*l, lo);
                    }
                }
                merged
            }
        };
        self.node_domain[me] = map.values().copied().collect();
        map
    }
}

/// Labelled bag graph of `t` as an explicit set of labels and edges.
pub fn bag_graph(t: &Term) -> (BTreeSet<Label>, BTreeSet<(Label, Label)>) {
    (t.used().iter().copied().collect(), t.bag_edges().iter().copied().collect())
}
