//! Seeded random models, parameter points and tables.

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Distribution;

use crate::error::Result;
use crate::graph::LabeledGraph;
use crate::model::Model;
use crate::probs::CondProbs;
use crate::table::{ContingencyTable, LevelSpec};
use crate::theta::{ThetaKind, ThetaMap};
use crate::varset::VarSet;

/// A random decomposable graph on `n` vertices built by attaching cliques
/// along a random tree; vertex names are shuffled so that the canonical
/// order differs from the construction order.
pub fn random_decomposable_graph<R: Rng>(rng: &mut R, n: usize) -> LabeledGraph {
    assert!((1..=64).contains(&n));
    let mut cliques: Vec<VarSet> = Vec::new();
    let mut used = 0;
    while used < n {
        let fresh = rng.gen_range(1..=3usize).min(n - used);
        let new = VarSet::from_iter(used..used + fresh);
        used += fresh;
        let sep = match cliques.choose(rng) {
            Some(&c) if rng.gen_bool(0.9) => {
                let members = c.to_vec();
                let k = rng.gen_range(1..=members.len());
                VarSet::from_iter(members.choose_multiple(rng, k).copied())
            }
            _ => VarSet::EMPTY,
        };
        cliques.push(sep.union(new));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut adj = vec![VarSet::EMPTY; n];
    for c in &cliques {
        for u in c.iter() {
            for w in c.iter().filter(|&w| w != u) {
                adj[perm[u]] = adj[perm[u]].with(perm[w]);
            }
        }
    }
    LabeledGraph::from_adjacency(names, adj).expect("symmetric adjacency")
}

/// A random model with `2..=max_vars` variables and `2..=max_levels` levels each.
pub fn random_model<R: Rng>(rng: &mut R, max_vars: usize, max_levels: usize) -> Result<Model> {
    let n = rng.gen_range(2..=max_vars.max(2));
    let g = random_decomposable_graph(rng, n);
    let levels = (0..n).map(|_| rng.gen_range(2..=max_levels.max(2))).collect();
    Model::new(g, LevelSpec::new(levels)?)
}

/// Conditional blocks with entries drawn uniformly from `[0.05, 1]` and normalized.
pub fn random_cond_probs<R: Rng>(rng: &mut R, spec: &LevelSpec, shape: &[(VarSet, VarSet)]) -> CondProbs {
    let mut cp = CondProbs::uniform(spec, shape);
    for fam in cp.families_mut() {
        for row in &mut fam.rows {
            row.iter_mut().for_each(|p| *p = rng.gen_range(0.05..1.0));
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= s);
        }
    }
    cp
}

/// A parameter map with entries uniform on `[-scale, scale]`.
pub fn random_theta<R: Rng>(rng: &mut R, model: &Model, kind: ThetaKind, scale: f64) -> ThetaMap {
    let values = (0..model.layout().len())
        .map(|_| rng.gen_range(-scale..=scale))
        .collect();
    ThetaMap::from_values(kind, model, values).expect("layout sized values")
}

/// `n` multinomial draws from the cell probabilities `p`.
pub fn random_table<R: Rng>(rng: &mut R, spec: &LevelSpec, p: &[f64], n: u64) -> ContingencyTable {
    let dist = WeightedIndex::new(p).expect("positive weights");
    let mut counts = vec![0u64; p.len()];
    for _ in 0..n {
        counts[dist.sample(rng)] += 1;
    }
    ContingencyTable::from_counts(spec.clone(), counts).expect("sized counts")
}
