//! A decomposable graphical model: graph, level counts and a fixed perfect
//! clique order, plus the index set shared by every log-odds parametrization.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{perfect_order, CliqueOrder, LabeledGraph};
use crate::table::{Cell, Level, LevelSpec};
use crate::varset::VarSet;

#[derive(Debug, Clone)]
pub struct Model {
    graph: LabeledGraph,
    spec: LevelSpec,
    order: CliqueOrder,
    layout: Arc<ParamLayout>,
    coords: Arc<Vec<(usize, usize)>>,
}

impl Model {
    pub fn new(graph: LabeledGraph, spec: LevelSpec) -> Result<Self> {
        let order = perfect_order(&graph)?;
        Self::with_order(graph, spec, order)
    }

    /// Uses a caller-supplied clique order, which is validated against the graph.
    pub fn with_order(graph: LabeledGraph, spec: LevelSpec, order: CliqueOrder) -> Result<Self> {
        if graph.len() != spec.len() {
            return Err(Error::InvalidGraph(format!(
                "{} vertices but {} level counts",
                graph.len(),
                spec.len()
            )));
        }
        if graph.is_empty() {
            return Err(Error::InvalidGraph("model has no variables".into()));
        }
        order.validate(&graph, graph.vertices())?;
        let layout = Arc::new(ParamLayout::new(&graph, &spec));
        let coords = Arc::new(block_coords(&order, &spec, &layout));
        Ok(Model {
            graph,
            spec,
            order,
            layout,
            coords,
        })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn spec(&self) -> &LevelSpec {
        &self.spec
    }

    pub fn order(&self) -> &CliqueOrder {
        &self.order
    }

    pub fn layout(&self) -> &Arc<ParamLayout> {
        &self.layout
    }

    /// For each parameter index, the owning clique `l` and the position
    /// `s · |I_{R_l}| + r` of its cell in the `(S_l, R_l)` block table.
    pub fn block_coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    pub fn n_vars(&self) -> usize {
        self.spec.len()
    }

    /// `(given, target)` pairs of the probability blocks: `(∅, C_1)` and
    /// `(S_l, R_l)` for the remaining cliques.
    pub fn families(&self) -> Vec<(VarSet, VarSet)> {
        (0..self.order.len())
            .map(|l| (self.order.separator(l), self.order.residual(l)))
            .collect()
    }

    pub fn set_name(&self, set: VarSet) -> String {
        format!("{{{}}}", self.graph.names_of(set).join(","))
    }
}

/// The index set `{(D, i_D) : D complete and nonempty, i_D ∈ I*_D}` with a
/// dense numbering.
///
/// Sets are kept in canonical order (by size, then members). Within a set,
/// starred cells are numbered with the first member varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    sets: Vec<VarSet>,
    offsets: Vec<usize>,
    strides: Vec<Vec<usize>>,
    levels: Vec<usize>,
    by_set: HashMap<VarSet, usize>,
    len: usize,
}

impl ParamLayout {
    pub fn new(graph: &LabeledGraph, spec: &LevelSpec) -> Self {
        let mut sets: Vec<VarSet> = Vec::new();
        collect_complete(graph, VarSet::EMPTY, graph.vertices(), &mut sets);
        sets.sort_by_key(|s| s.canonical_key());
        Self::from_sets(sets, spec)
    }

    pub fn from_sets(sets: Vec<VarSet>, spec: &LevelSpec) -> Self {
        let mut offsets = Vec::with_capacity(sets.len());
        let mut strides = Vec::with_capacity(sets.len());
        let mut by_set = HashMap::with_capacity(sets.len());
        let mut len = 0;
        for (id, &s) in sets.iter().enumerate() {
            offsets.push(len);
            let mut st = Vec::with_capacity(s.len());
            let mut acc = 1;
            for v in s.iter() {
                st.push(acc);
                acc *= spec.levels(v) - 1;
            }
            strides.push(st);
            by_set.insert(s, id);
            len += acc;
        }
        ParamLayout {
            sets,
            offsets,
            strides,
            levels: spec.all_levels().to_vec(),
            by_set,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sets(&self) -> &[VarSet] {
        &self.sets
    }

    pub fn set_id(&self, set: VarSet) -> Option<usize> {
        self.by_set.get(&set).copied()
    }

    pub fn contains_set(&self, set: VarSet) -> bool {
        self.by_set.contains_key(&set)
    }

    /// Number of starred cells of the set with the given id.
    pub fn set_len(&self, id: usize) -> usize {
        let end = self.offsets.get(id + 1).copied().unwrap_or(self.len);
        end - self.offsets[id]
    }

    /// Index of the starred cell on set `id` read off a full assignment that
    /// is nonzero on that set.
    pub fn index_full(&self, id: usize, full: &[Level]) -> usize {
        let set = self.sets[id];
        let mut idx = self.offsets[id];
        for (v, &st) in set.iter().zip(&self.strides[id]) {
            debug_assert!(full[v] != 0);
            idx += (full[v] as usize - 1) * st;
        }
        idx
    }

    pub fn index(&self, cell: &Cell) -> Option<usize> {
        if !cell.is_starred() {
            return None;
        }
        let id = self.set_id(cell.set)?;
        let mut idx = self.offsets[id];
        for ((v, &l), &st) in cell.set.iter().zip(&cell.levels).zip(&self.strides[id]) {
            if l as usize >= self.levels[v] {
                return None;
            }
            idx += (l as usize - 1) * st;
        }
        Some(idx)
    }

    /// The starred cell at a dense index.
    pub fn cell(&self, index: usize) -> Cell {
        let id = match self.offsets.binary_search(&index) {
            Ok(mut i) => {
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == index {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        let set = self.sets[id];
        let mut rem = index - self.offsets[id];
        let levels = set
            .iter()
            .map(|v| {
                let m = self.levels[v] - 1;
                let l = rem % m;
                rem /= m;
                (l + 1) as Level
            })
            .collect();
        Cell { set, levels }
    }

    /// All cells in dense-index order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len).map(move |i| self.cell(i))
    }

    /// Dense indices of the cells on set `id`.
    pub fn range(&self, id: usize) -> std::ops::Range<usize> {
        self.offsets[id]..self.offsets[id] + self.set_len(id)
    }
}

fn block_coords(order: &CliqueOrder, spec: &LevelSpec, layout: &ParamLayout) -> Vec<(usize, usize)> {
    let mut full = vec![0; spec.len()];
    layout
        .cells()
        .map(|cell| {
            let l = order
                .owner(cell.set)
                .expect("complete sets lie in some clique");
            full.iter_mut().for_each(|x| *x = 0);
            cell.write_into(&mut full);
            let (s, r) = (order.separator(l), order.residual(l));
            (l, spec.offset(s, &full) * spec.cells(r) + spec.offset(r, &full))
        })
        .collect()
}

fn collect_complete(g: &LabeledGraph, current: VarSet, candidates: VarSet, out: &mut Vec<VarSet>) {
    // Extends `current` only with larger-indexed common neighbours, so each
    // complete set is produced once.
    for v in candidates.iter() {
        let next = current.with(v);
        out.push(next);
        let above = candidates.above(v);
        collect_complete(g, next, above.intersection(g.neighbors(v)), out);
    }
}
