//! Undirected graphs over named variables, chordality recognition and
//! perfect clique orderings.
//!
//! Vertices are numbered by their position in the canonical (file) order.
//! Maximum cardinality search breaks ties by that order, so every result in
//! this module is a deterministic function of the input graph.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARIABLES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    names: Vec<String>,
    adj: Vec<VarSet>,
}

impl LabeledGraph {
    pub fn new<S: AsRef<str>>(names: &[S], edges: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        if names.len() > MAX_VARIABLES {
            return Err(Error::InvalidGraph(format!(
                "{} vertices exceeds the supported maximum of {MAX_VARIABLES}",
                names.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidGraph("empty vertex name".into()));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{n}`")));
            }
        }
        let mut adj = vec![VarSet::EMPTY; names.len()];
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index.get(a).ok_or_else(|| Error::UnknownVariable(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownVariable(b.to_string()))?;
            if ia == ib {
                return Err(Error::InvalidGraph(format!("self-loop on `{a}`")));
            }
            adj[ia] = adj[ia].with(ib);
            adj[ib] = adj[ib].with(ia);
        }
        Ok(LabeledGraph { names, adj })
    }

    /// Builds a graph from vertex indices; used by generators and transforms
    /// that already work in index space.
    pub fn from_adjacency(names: Vec<String>, adj: Vec<VarSet>) -> Result<Self> {
        if names.len() != adj.len() {
            return Err(Error::InvalidGraph("adjacency length mismatch".into()));
        }
        let all = VarSet::full(names.len());
        for (v, nb) in adj.iter().enumerate() {
            if nb.contains(v) || !nb.is_subset(all) {
                return Err(Error::InvalidGraph(format!("bad adjacency at vertex {v}")));
            }
            for w in nb.iter() {
                if !adj[w].contains(v) {
                    return Err(Error::InvalidGraph("adjacency is not symmetric".into()));
                }
            }
        }
        let edges: Vec<(String, String)> = Vec::new();
        let mut g = LabeledGraph::new(&names, &edges)?;
        g.adj = adj;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertices(&self) -> VarSet {
        VarSet::full(self.names.len())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<VarSet> {
        names
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(VarSet::from_iter)
    }

    pub fn names_of(&self, set: VarSet) -> Vec<String> {
        set.iter().map(|v| self.names[v].clone()).collect()
    }

    pub fn neighbors(&self, v: usize) -> VarSet {
        self.adj[v]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.len() {
            for w in self.adj[v].iter() {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    fn check_subset(&self, set: VarSet) -> Result<()> {
        if set.is_subset(self.vertices()) {
            Ok(())
        } else {
            Err(Error::InvalidGraph(format!(
                "vertex set {set:?} is not contained in the graph"
            )))
        }
    }

    /// True iff every pair in `d` is an edge. The empty set and singletons
    /// are complete.
    pub fn is_complete(&self, d: VarSet) -> bool {
        d.iter().all(|v| d.without(v).is_subset(self.adj[v]))
    }

    /// `{ v not in b : v adjacent to some w in b }`.
    pub fn boundary(&self, b: VarSet) -> VarSet {
        let nb = b.iter().fold(VarSet::EMPTY, |acc, v| acc.union(self.adj[v]));
        nb.difference(b)
    }

    /// Connected components of the subgraph induced by `subset`, ordered by
    /// their least vertex.
    pub fn connected_components(&self, subset: VarSet) -> Vec<VarSet> {
        let mut remaining = subset.intersection(self.vertices());
        let mut out = Vec::new();
        while let Some(start) = remaining.first() {
            let mut comp = VarSet::singleton(start);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in self.adj[v].intersection(subset).difference(comp).iter() {
                    comp = comp.with(w);
                    queue.push_back(w);
                }
            }
            remaining = remaining.difference(comp);
            out.push(comp);
        }
        out
    }

    /// The subgraph induced by `a`, renumbered in canonical order.
    pub fn induced_subgraph(&self, a: VarSet) -> Result<LabeledGraph> {
        self.check_subset(a)?;
        let members = a.to_vec();
        let names = members.iter().map(|&v| self.names[v].clone()).collect();
        let adj = members
            .iter()
            .map(|&v| {
                VarSet::from_iter(
                    self.adj[v]
                        .intersection(a)
                        .iter()
                        .map(|w| a.rank(w).expect("member")),
                )
            })
            .collect();
        LabeledGraph::from_adjacency(names, adj)
    }

    /// Maximum cardinality search restricted to `within`. Vertices of `seed`
    /// (which must be complete) are visited first; remaining ties go to the
    /// lowest canonical index. Returns the visit order.
    pub fn mcs_order(&self, within: VarSet, seed: VarSet) -> Vec<usize> {
        let n = self.len();
        let mut label = vec![0usize; n];
        let mut visited = VarSet::EMPTY;
        let mut order = Vec::with_capacity(within.len());
        let mut visit = |v: usize, visited: &mut VarSet, label: &mut Vec<usize>| {
            *visited = visited.with(v);
            order.push(v);
            for w in self.adj[v].intersection(within).difference(*visited).iter() {
                label[w] += 1;
            }
        };
        for v in seed.intersection(within).iter() {
            visit(v, &mut visited, &mut label);
        }
        while visited != within {
            let best = within
                .difference(visited)
                .iter()
                .max_by(|&a, &b| label[a].cmp(&label[b]).then(b.cmp(&a)))
                .expect("unvisited vertex");
            visit(best, &mut visited, &mut label);
        }
        order
    }

    /// Chordality test of the subgraph induced by `within`.
    pub fn check_decomposable_within(&self, within: VarSet) -> Decomposability {
        let order = self.mcs_order(within, VarSet::EMPTY);
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for (i, &v) in order.iter().enumerate() {
            let earlier = VarSet::from_iter(
                self.adj[v]
                    .intersection(within)
                    .iter()
                    .filter(|&w| pos[w] < i),
            );
            let Some(parent) = earlier.iter().max_by_key(|&w| pos[w]) else {
                continue;
            };
            let rest = earlier.without(parent);
            if !rest.is_subset(self.adj[parent]) {
                let cycle = self
                    .chordless_cycle(within)
                    .expect("a non-chordal graph has a chordless cycle");
                return Decomposability::NotChordal { cycle };
            }
        }
        let mut elimination = order;
        elimination.reverse();
        Decomposability::Chordal { elimination }
    }

    /// Finds a chordless cycle of length at least four in the subgraph
    /// induced by `within`, normalized to start at its least vertex and to
    /// continue towards the smaller of its two neighbours.
    pub fn chordless_cycle(&self, within: VarSet) -> Option<Vec<usize>> {
        for v in within.iter() {
            let nb = self.adj[v].intersection(within);
            for u in nb.iter() {
                for w in nb.iter().filter(|&w| w > u) {
                    if self.adj[u].contains(w) {
                        continue;
                    }
                    let allowed = within
                        .difference(nb)
                        .without(v)
                        .with(u)
                        .with(w);
                    if let Some(path) = self.shortest_path(u, w, allowed) {
                        let mut cycle = vec![v];
                        cycle.extend(path);
                        return Some(normalize_cycle(cycle));
                    }
                }
            }
        }
        None
    }

    fn shortest_path(&self, from: usize, to: usize, allowed: VarSet) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.len()];
        let mut seen = VarSet::singleton(from);
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for y in self.adj[x].intersection(allowed).difference(seen).iter() {
                seen = seen.with(y);
                prev[y] = x;
                queue.push_back(y);
            }
        }
        None
    }
}

fn normalize_cycle(mut cycle: Vec<usize>) -> Vec<usize> {
    let (start, _) = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .expect("nonempty cycle");
    cycle.rotate_left(start);
    let n = cycle.len();
    if n > 2 && cycle[n - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposability {
    /// A perfect elimination ordering of the vertices.
    Chordal { elimination: Vec<usize> },
    /// A chordless cycle of length at least four.
    NotChordal { cycle: Vec<usize> },
}

impl Decomposability {
    pub fn is_chordal(&self) -> bool {
        matches!(self, Decomposability::Chordal { .. })
    }
}

pub fn check_decomposable(g: &LabeledGraph) -> Decomposability {
    g.check_decomposable_within(g.vertices())
}

/// A perfect sequence of cliques `C_1..C_k` with derived separators,
/// residuals and histories.
///
/// Indices are zero-based. By convention `separators[0]` is empty,
/// `residuals[0] = C_1` and the history before the first clique is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueOrder {
    cliques: Vec<VarSet>,
    separators: Vec<VarSet>,
    residuals: Vec<VarSet>,
    histories: Vec<VarSet>,
}

impl CliqueOrder {
    /// Builds and validates an order of the cliques of `g` restricted to
    /// `within`.
    pub fn new(g: &LabeledGraph, within: VarSet, cliques: Vec<VarSet>) -> Result<Self> {
        let order = Self::derive(cliques);
        order.validate(g, within)?;
        Ok(order)
    }

    fn derive(cliques: Vec<VarSet>) -> Self {
        let mut separators = Vec::with_capacity(cliques.len());
        let mut residuals = Vec::with_capacity(cliques.len());
        let mut histories = Vec::with_capacity(cliques.len());
        let mut history = VarSet::EMPTY;
        for &c in &cliques {
            let s = history.intersection(c);
            separators.push(s);
            residuals.push(c.difference(s));
            history = history.union(c);
            histories.push(history);
        }
        CliqueOrder {
            cliques,
            separators,
            residuals,
            histories,
        }
    }

    pub fn validate(&self, g: &LabeledGraph, within: VarSet) -> Result<()> {
        let fresh = Self::derive(self.cliques.clone());
        if &fresh != self {
            return Err(Error::InvalidOrder(
                "separators, residuals or histories are inconsistent with the cliques".into(),
            ));
        }
        let union = self.vertices();
        if union != within {
            return Err(Error::InvalidOrder(format!(
                "cliques cover {:?}, expected {:?}",
                g.names_of(union),
                g.names_of(within)
            )));
        }
        for (l, &c) in self.cliques.iter().enumerate() {
            if c.is_empty() || !g.is_complete(c) {
                return Err(Error::InvalidOrder(format!(
                    "clique {} {:?} is not a nonempty complete set",
                    l + 1,
                    g.names_of(c)
                )));
            }
            let extendable = within
                .difference(c)
                .iter()
                .any(|v| c.is_subset(g.neighbors(v)));
            if extendable {
                return Err(Error::InvalidOrder(format!(
                    "clique {} {:?} is not maximal",
                    l + 1,
                    g.names_of(c)
                )));
            }
            if l > 0 {
                let s = self.separators[l];
                if !self.cliques[..l].iter().any(|&ci| s.is_subset(ci)) {
                    return Err(Error::InvalidOrder(format!(
                        "separator {:?} of clique {} is not contained in an earlier clique",
                        g.names_of(s),
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn cliques(&self) -> &[VarSet] {
        &self.cliques
    }

    pub fn clique(&self, l: usize) -> VarSet {
        self.cliques[l]
    }

    pub fn separator(&self, l: usize) -> VarSet {
        self.separators[l]
    }

    pub fn residual(&self, l: usize) -> VarSet {
        self.residuals[l]
    }

    /// `H_l = C_1 ∪ … ∪ C_l` (zero-based `l`).
    pub fn history(&self, l: usize) -> VarSet {
        self.histories[l]
    }

    /// History before clique `l`; empty for the first clique.
    pub fn history_before(&self, l: usize) -> VarSet {
        if l == 0 {
            VarSet::EMPTY
        } else {
            self.histories[l - 1]
        }
    }

    pub fn vertices(&self) -> VarSet {
        self.histories.last().copied().unwrap_or(VarSet::EMPTY)
    }

    /// Index of the first clique containing `d`, i.e. the unique `l` with
    /// `d ⊆ C_l` and `d ∩ R_l ≠ ∅` for nonempty `d`.
    pub fn owner(&self, d: VarSet) -> Option<usize> {
        self.cliques.iter().position(|&c| d.is_subset(c))
    }
}

/// Perfect order of the cliques of `g`.
pub fn perfect_order(g: &LabeledGraph) -> Result<CliqueOrder> {
    perfect_order_within(g, g.vertices(), VarSet::EMPTY)
}

/// Perfect order of the cliques of the subgraph induced by `within`, with
/// search seeded in the complete set `seed` so that the first clique
/// contains it.
pub fn perfect_order_within(g: &LabeledGraph, within: VarSet, seed: VarSet) -> Result<CliqueOrder> {
    if !within.is_subset(g.vertices()) {
        return Err(Error::InvalidGraph("vertex set outside the graph".into()));
    }
    if let Decomposability::NotChordal { cycle } = g.check_decomposable_within(within) {
        return Err(Error::NotDecomposable {
            witness: cycle.iter().map(|&v| g.name(v).to_string()).collect(),
        });
    }
    if !seed.is_subset(within) || !g.is_complete(seed) {
        return Err(Error::InvalidGraph("search seed must be a complete subset".into()));
    }
    let order = g.mcs_order(within, seed);
    let mut visited = VarSet::EMPTY;
    let mut candidates = Vec::with_capacity(order.len());
    for &v in &order {
        candidates.push(g.neighbors(v).intersection(visited).with(v));
        visited = visited.with(v);
    }
    let cliques: Vec<VarSet> = candidates
        .iter()
        .enumerate()
        .filter(|&(i, c)| !candidates[i + 1..].iter().any(|d| c.is_subset(*d)))
        .map(|(_, &c)| c)
        .collect();
    CliqueOrder::new(g, within, cliques)
}
