//! Isomorphism-invariant candidate bags.
//!
//! [`local_step`] grows a separator `S` into a bag `X` using only extreme
//! minimum separations between parts of `S`, so `X` depends on nothing but
//! the structure `(H, S)`. [`bags_no_cliqueseps`] runs the top-down
//! decomposition from every low-degree vertex, [`bags_with_atoms`] lifts that
//! to arbitrary connected graphs through the atoms, and [`reduced_family`]
//! closes the result under small subsets.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::atoms::atom_decomposition;
use crate::decomp::TreeDecomposition;
use crate::error::Error;
use crate::exec;
use crate::graph::{
    min_separation_pair, min_separation_sets, Graph, PairSeparation, SetSeparation, Vertex, VertexSet,
};
use crate::improved::is_k_complemented;

pub const DEFAULT_PAIR_BUDGET: u64 = 2_000_000;

/// Thresholds driving the bag construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub k: usize,
    /// Largest separator handled by the pairwise rule.
    pub tau: usize,
    /// Bound on adhesions.
    pub rho: usize,
    /// Bound on bag sizes.
    pub zeta: BigUint,
    /// Label budget of the canonizer, `(k + 1) * rho` by default.
    pub k_prime: usize,
    /// Maximum number of `(L, R)` pairs one local step may examine.
    pub pair_budget: u64,
    /// Set once a structural parameter deviates from its default.
    pub non_canonical: bool,
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let r = r.min(n - r);
    let mut acc = BigUint::from(1u32);
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

impl Params {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        let tau = 6 * k;
        let tau_pairs = binomial(tau, 2).to_usize().expect("small");
        let rho = tau + 2 * (k - 1) * tau_pairs;
        let c = binomial(rho, k + 1);
        let zeta = BigUint::from(rho) + BigUint::from(2 * k) * &c * &c;
        Params {
            k,
            tau,
            rho,
            zeta,
            k_prime: (k + 1) * rho,
            pair_budget: DEFAULT_PAIR_BUDGET,
            non_canonical: false,
        }
    }

    /// Applies `name=value`. Everything except `pair_budget` changes which
    /// bags are produced and marks the parameters non-canonical.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), String> {
        let parse = |v: &str| v.parse::<usize>().map_err(|e| format!("bad value for {name}: {e}"));
        match name {
            "tau" => self.tau = parse(value)?,
            "rho" => self.rho = parse(value)?,
            "k_prime" => self.k_prime = parse(value)?,
            "zeta" => {
                self.zeta = value.parse::<BigUint>().map_err(|e| format!("bad value for zeta: {e}"))?
            }
            "pair_budget" => {
                self.pair_budget = value.parse().map_err(|e| format!("bad value for pair_budget: {e}"))?;
                return Ok(());
            }
            _ => return Err(format!("unknown parameter `{name}`")),
        }
        self.non_canonical = true;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalCase {
    Pairs,
    Sets,
}

/// Observed sizes of one local step, kept for instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStepRecord {
    pub case: LocalCase,
    pub s_len: usize,
    pub x_len: usize,
    /// Whether `S ⊊ X`.
    pub grew: bool,
    /// Largest `|N(Z)|` over components `Z` of `H \ X`.
    pub max_neighborhood: usize,
}

fn check_local_preconditions(h: &Graph, s: &VertexSet, p: &Params, check_complemented: bool) -> Result<(), Error> {
    h.check_set(s)?;
    let fail = |what: &str| Err(Error::contract(format!("local step precondition: {what}")));
    if !h.is_connected() {
        return fail("graph is not connected");
    }
    if s.is_empty() || s.len() >= h.n() {
        return fail("S must be a nonempty proper subset");
    }
    if s.len() > p.rho {
        return fail("|S| exceeds rho");
    }
    if h.is_clique(s) {
        return fail("S induces a clique");
    }
    let rest = h.components(s)?;
    if rest.len() != 1 {
        return fail("H \\ S is not connected");
    }
    if h.neighborhood(&rest[0])?.0 != *s {
        return fail("S is not the neighbourhood of the rest");
    }
    if check_complemented && !is_k_complemented(h, p.k) {
        return fail("graph is not k-complemented");
    }
    Ok(())
}

/// Grows `S` into a bag `X ⊋ S` invariant under automorphisms of `(H, S)`.
pub fn local_step(h: &Graph, s: &VertexSet, p: &Params) -> Result<VertexSet, Error> {
    check_local_preconditions(h, s, p, true)?;
    local_step_inner(h, s, p).map(|(x, _)| x)
}

fn local_step_inner(h: &Graph, s: &VertexSet, p: &Params) -> Result<(VertexSet, LocalCase), Error> {
    let svec: Vec<Vertex> = s.iter().copied().collect();
    if s.len() <= p.tau {
        let pairs: Vec<(Vertex, Vertex)> = svec
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| svec[i + 1..].iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| !h.has_edge(x, y))
            .collect();
        let seps = exec::map(pairs, |(x, y)| match min_separation_pair(h, x, y, p.k)? {
            PairSeparation::Found { pushed_x, pushed_y, .. } => {
                Ok(pushed_x.separator().union(&pushed_y.separator()).copied().collect::<Vec<_>>())
            }
            PairSeparation::AtLeastCap => Err(Error::contract(format!(
                "nonadjacent pair {x}, {y} has connectivity at least k; graph is not k-complemented"
            ))),
            PairSeparation::Adjacent => unreachable!("pair filtered to nonadjacent"),
        });
        let mut x = s.clone();
        for sep in seps {
            x.extend(sep?);
        }
        return Ok((x, LocalCase::Pairs));
    }

    let c = binomial(s.len(), p.k + 1);
    let required = (&c * &c).to_u128().unwrap_or(u128::MAX);
    if required > u128::from(p.pair_budget) {
        return Err(Error::BudgetExceeded { required, budget: p.pair_budget });
    }
    let subsets = combinations(&svec, p.k + 1);
    let seps = exec::map(subsets.clone(), |l: Vec<Vertex>| -> Result<Vec<Vertex>, Error> {
        let lset: VertexSet = l.iter().copied().collect();
        let mut found = Vec::new();
        for r in &subsets {
            // (L, R) and (R, L) yield the same pair of separators
            if r <= &l || r.iter().any(|v| lset.contains(v)) {
                continue;
            }
            let rset: VertexSet = r.iter().copied().collect();
            if let SetSeparation::Found { pushed_x, pushed_y, .. } = min_separation_sets(h, &lset, &rset, p.k + 1)? {
                found.extend(pushed_x.separator());
                found.extend(pushed_y.separator());
            }
        }
        Ok(found)
    });
    let mut x = s.clone();
    for sep in seps {
        x.extend(sep?);
    }
    if x == *s {
        return Err(Error::TooWide { k: p.k });
    }
    Ok((x, LocalCase::Sets))
}

fn combinations(items: &[Vertex], r: usize) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    if r > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..r).rev().find(|&i| idx[i] != i + items.len() - r) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Decomposition built from one start vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartDecomposition {
    pub start: Vertex,
    pub decomposition: TreeDecomposition,
}

/// Bags of a graph together with the data used to produce them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagRun {
    /// Empty when the construction proved `tw >= k`.
    pub family: BTreeSet<VertexSet>,
    pub per_u: Vec<StartDecomposition>,
    pub records: Vec<LocalStepRecord>,
}

impl BagRun {
    fn empty() -> Self {
        BagRun::default()
    }
}

/// Bags for a connected, clique-separator-free, `k`-complemented graph.
pub fn bags_no_cliqueseps(g: &Graph, p: &Params) -> Result<BagRun, Error> {
    if g.n() == 0 || !g.is_connected() {
        return Err(Error::contract("bag enumeration needs a connected, nonempty graph"));
    }
    if g.is_clique(&g.vertices()) {
        let mut run = BagRun::empty();
        if g.n() <= p.k {
            run.family.insert(g.vertices());
            run.per_u = (0..g.n())
                .map(|u| StartDecomposition { start: u, decomposition: TreeDecomposition::single(g.vertices()) })
                .collect();
        }
        return Ok(run);
    }
    let starts: Vec<Vertex> = (0..g.n()).filter(|&u| g.degree(u) < p.k).collect();
    let runs = exec::map(starts, |u| {
        let mut b = Builder { g, p, u, td: TreeDecomposition { parent: Vec::new(), bags: Vec::new() }, records: Vec::new() };
        let (_, closed) = g.neighborhood(&VertexSet::from([u]))?;
        b.grow(g.vertices(), closed, None)?;
        Ok::<_, Error>((u, b.td, b.records))
    });
    let mut run = BagRun::empty();
    for r in runs {
        match r {
            Ok((u, td, records)) => {
                run.family.extend(td.bags.iter().cloned());
                run.per_u.push(StartDecomposition { start: u, decomposition: td });
                run.records.extend(records);
            }
            Err(Error::TooWide { .. }) => return Ok(BagRun::empty()),
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

struct Builder<'a> {
    g: &'a Graph,
    p: &'a Params,
    u: Vertex,
    td: TreeDecomposition,
    records: Vec<LocalStepRecord>,
}

impl Builder<'_> {
    fn potential(&self, w: &VertexSet, x: &VertexSet) -> BigUint {
        BigUint::from(w.len() + 1) * (&self.p.zeta + 1u32) - BigUint::from(x.len())
    }

    fn check_invariants(&self, w: &VertexSet, x: &VertexSet, comps: &[VertexSet]) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::contract(format!("bag recursion invariant: {what}")));
        if BigUint::from(x.len()) > self.p.zeta {
            return bad("|X| exceeds zeta");
        }
        let rest: VertexSet = w.difference(x).copied().collect();
        let (open, closed) = self.g.neighborhood(&rest)?;
        if !open.is_subset(x) {
            return bad("X does not separate the remainder");
        }
        if closed.contains(&self.u) {
            return bad("start vertex touches the remainder");
        }
        for z in comps {
            if self.g.neighborhood(z)?.0.len() > self.p.rho {
                return bad("component neighbourhood exceeds rho");
            }
        }
        Ok(())
    }

    /// Emits the decomposition of `G[w]` with root bag `x`.
    fn grow(&mut self, w: VertexSet, x: VertexSet, parent: Option<usize>) -> Result<(), Error> {
        let me = self.td.bags.len();
        self.td.bags.push(x.clone());
        self.td.parent.push(parent);
        if x == w {
            return Ok(());
        }
        let outside: VertexSet = (0..self.g.n()).filter(|v| !w.contains(v)).chain(x.iter().copied()).collect();
        let comps = self.g.components(&outside)?;
        self.check_invariants(&w, &x, &comps)?;
        let pot = self.potential(&w, &x);
        for z in comps {
            let (s, closed) = self.g.neighborhood(&z)?;
            let (h, map) = self.g.induced_subgraph(&closed)?;
            let local: BTreeMap<Vertex, Vertex> = map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let s_local: VertexSet = s.iter().map(|v| local[v]).collect();
            check_local_preconditions(&h, &s_local, self.p, false)?;
            let (x_local, case) = local_step_inner(&h, &s_local, self.p)?;
            let rest = h.components(&x_local)?;
            let mut max_neighborhood = 0;
            for c in &rest {
                max_neighborhood = max_neighborhood.max(h.neighborhood(c)?.0.len());
            }
            self.records.push(LocalStepRecord {
                case,
                s_len: s_local.len(),
                x_len: x_local.len(),
                grew: x_local.len() > s_local.len() && s_local.is_subset(&x_local),
                max_neighborhood,
            });
            let xz: VertexSet = x_local.iter().map(|&i| map[i]).collect();
            if self.potential(&closed, &xz) >= pot {
                return Err(Error::contract("bag recursion potential did not decrease"));
            }
            self.grow(closed, xz, Some(me))?;
        }
        Ok(())
    }
}

/// Bags for a connected `k`-complemented graph: the union over its atoms.
pub fn bags_with_atoms(g: &Graph, p: &Params) -> Result<BagRun, Error> {
    let atoms = atom_decomposition(g)?;
    if atoms.max_adhesion() > p.k {
        return Ok(BagRun::empty());
    }
    let runs = exec::map(atoms.bags.clone(), |atom| {
        let (h, map) = g.induced_subgraph(&atom)?;
        let run = bags_no_cliqueseps(&h, p)?;
        let lift = |b: &VertexSet| b.iter().map(|&i| map[i]).collect::<VertexSet>();
        Ok::<_, Error>(BagRun {
            family: run.family.iter().map(lift).collect(),
            per_u: run
                .per_u
                .into_iter()
                .map(|d| StartDecomposition {
                    start: map[d.start],
                    decomposition: TreeDecomposition {
                        parent: d.decomposition.parent,
                        bags: d.decomposition.bags.iter().map(lift).collect(),
                    },
                })
                .collect(),
            records: run.records,
        })
    });
    let mut out = BagRun::empty();
    for r in runs {
        let r = r?;
        // an atom is an induced subgraph, so its failure bounds tw(G) too
        if r.family.is_empty() {
            return Ok(BagRun::empty());
        }
        out.family.extend(r.family);
        out.per_u.extend(r.per_u);
        out.records.extend(r.records);
    }
    Ok(out)
}

/// All subsets of size at most `cap` of some base bag, kept implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedBagFamily {
    pub base: Vec<VertexSet>,
    pub cap: usize,
    /// For every vertex, the ids of the base bags containing it.
    pub superset_index: Vec<Vec<usize>>,
}

impl ReducedBagFamily {
    pub fn new(n: usize, base: impl IntoIterator<Item = VertexSet>, cap: usize) -> Self {
        let base: Vec<VertexSet> = base.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut superset_index = vec![Vec::new(); n];
        for (i, b) in base.iter().enumerate() {
            for &v in b {
                superset_index[v].push(i);
            }
        }
        ReducedBagFamily { base, cap, superset_index }
    }

    pub fn member(&self, x: &VertexSet) -> bool {
        if x.len() > self.cap {
            return false;
        }
        let Some(pivot) = x.iter().min_by_key(|&&v| self.superset_index.get(v).map_or(0, Vec::len)) else {
            return !self.base.is_empty();
        };
        self.superset_index
            .get(*pivot)
            .is_some_and(|ids| ids.iter().any(|&i| x.is_subset(&self.base[i])))
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

pub fn reduced_family(g: &Graph, p: &Params) -> Result<ReducedBagFamily, Error> {
    let run = bags_with_atoms(g, p)?;
    Ok(ReducedBagFamily::new(g.n(), run.family, p.k_prime))
}
