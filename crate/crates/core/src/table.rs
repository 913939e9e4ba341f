//! Contingency tables, marginal cells and starred cell sets.
//!
//! Joint cells are full-length level vectors in canonical variable order and
//! are stored row-major (last variable fastest). Level `0` of every variable
//! is the baseline.

use crate::error::{Error, Result};
use crate::varset::VarSet;

/// Upper bound on the number of joint cells held densely.
pub const MAX_DENSE_CELLS: u128 = 1 << 24;

pub type Level = u16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpec {
    levels: Vec<usize>,
}

impl LevelSpec {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if let Some((v, &m)) = levels.iter().enumerate().find(|(_, &m)| m < 2) {
            return Err(Error::InvalidCell(format!(
                "variable {v} has {m} levels; at least 2 are required"
            )));
        }
        if levels.iter().any(|&m| m > Level::MAX as usize) {
            return Err(Error::InvalidCell("too many levels".into()));
        }
        let spec = LevelSpec { levels };
        let total = spec.cells_u128(VarSet::full(spec.len()));
        if total > MAX_DENSE_CELLS {
            return Err(Error::TooLarge {
                what: "joint table".into(),
                cells: total,
                limit: MAX_DENSE_CELLS,
            });
        }
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self, v: usize) -> usize {
        self.levels[v]
    }

    pub fn all_levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn all(&self) -> VarSet {
        VarSet::full(self.len())
    }

    fn cells_u128(&self, set: VarSet) -> u128 {
        set.iter().map(|v| self.levels[v] as u128).product()
    }

    /// `|I_set|`, with `|I_∅| = 1`.
    pub fn cells(&self, set: VarSet) -> usize {
        set.iter().map(|v| self.levels[v]).product()
    }

    /// Size of the table over `set`, as a checked count for size guards.
    pub fn cells_checked(&self, set: VarSet) -> u128 {
        self.cells_u128(set)
    }

    /// `|I*_set| = Π (m_γ − 1)`.
    pub fn starred_count(&self, set: VarSet) -> usize {
        set.iter().map(|v| self.levels[v] - 1).product()
    }

    /// Row-major offset of the restriction of a full assignment to `set`.
    pub fn offset(&self, set: VarSet, full: &[Level]) -> usize {
        set.iter()
            .fold(0, |acc, v| acc * self.levels[v] + full[v] as usize)
    }

    /// Row-major offset of a marginal cell within the `cell.set` table.
    pub fn cell_offset(&self, cell: &Cell) -> usize {
        cell.set
            .iter()
            .zip(&cell.levels)
            .fold(0, |acc, (v, &l)| acc * self.levels[v] + l as usize)
    }

    /// Inverse of [`offset`](Self::offset): writes the levels of `set` into `full`.
    pub fn decode_into(&self, set: VarSet, mut index: usize, full: &mut [Level]) {
        let members = set.to_vec();
        for &v in members.iter().rev() {
            let m = self.levels[v];
            full[v] = (index % m) as Level;
            index /= m;
        }
    }

    /// All full-length assignments that vary over `set` and are zero
    /// elsewhere, in row-major order.
    pub fn assignments(&self, set: VarSet) -> Assignments<'_> {
        Assignments {
            spec: self,
            members: set.to_vec(),
            current: Some(vec![0; self.len()]),
            starred: false,
        }
    }

    /// All full-length assignments that are nonzero exactly on `set`, with
    /// the first member varying fastest.
    pub fn starred_assignments(&self, set: VarSet) -> Assignments<'_> {
        let mut start = vec![0; self.len()];
        for v in set.iter() {
            start[v] = 1;
        }
        let mut members = set.to_vec();
        members.reverse();
        Assignments {
            spec: self,
            members,
            current: Some(start),
            starred: true,
        }
    }

    pub fn check_cell(&self, cell: &Cell) -> Result<()> {
        if cell.levels.len() != cell.set.len() {
            return Err(Error::InvalidCell("level count does not match the set".into()));
        }
        if !cell.set.is_subset(self.all()) {
            return Err(Error::InvalidCell(format!("set {:?} outside the model", cell.set)));
        }
        for (v, &l) in cell.set.iter().zip(&cell.levels) {
            if l as usize >= self.levels[v] {
                return Err(Error::InvalidCell(format!(
                    "level {l} out of range for variable {v} ({} levels)",
                    self.levels[v]
                )));
            }
        }
        Ok(())
    }
}

/// Iterator over full assignments; see [`LevelSpec::assignments`].
pub struct Assignments<'a> {
    spec: &'a LevelSpec,
    members: Vec<usize>,
    current: Option<Vec<Level>>,
    starred: bool,
}

impl Iterator for Assignments<'_> {
    type Item = Vec<Level>;

    fn next(&mut self) -> Option<Vec<Level>> {
        let out = self.current.clone()?;
        let low: Level = if self.starred { 1 } else { 0 };
        let cur = self.current.as_mut().expect("checked");
        let mut advanced = false;
        for &v in self.members.iter().rev() {
            if (cur[v] as usize) + 1 < self.spec.levels[v] {
                cur[v] += 1;
                advanced = true;
                break;
            }
            cur[v] = low;
        }
        if !advanced {
            self.current = None;
        }
        Some(out)
    }
}

/// A marginal cell `i_D`: a set of variables with one level per member, in
/// ascending variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cell {
    pub set: VarSet,
    pub levels: Vec<Level>,
}

impl Cell {
    pub fn empty() -> Self {
        Cell {
            set: VarSet::EMPTY,
            levels: Vec::new(),
        }
    }

    pub fn new(set: VarSet, levels: Vec<Level>) -> Result<Self> {
        if set.len() != levels.len() {
            return Err(Error::InvalidCell(format!(
                "{} levels given for a set of {} variables",
                levels.len(),
                set.len()
            )));
        }
        Ok(Cell { set, levels })
    }

    /// Restriction of a full assignment to `set`.
    pub fn from_full(set: VarSet, full: &[Level]) -> Self {
        Cell {
            set,
            levels: set.iter().map(|v| full[v]).collect(),
        }
    }

    pub fn level(&self, v: usize) -> Option<Level> {
        self.set.rank(v).map(|r| self.levels[r])
    }

    /// Variables of the cell at a non-baseline level.
    pub fn support(&self) -> VarSet {
        VarSet::from_iter(
            self.set
                .iter()
                .zip(&self.levels)
                .filter(|(_, &l)| l != 0)
                .map(|(v, _)| v),
        )
    }

    pub fn is_starred(&self) -> bool {
        self.levels.iter().all(|&l| l != 0)
    }

    pub fn restrict(&self, sub: VarSet) -> Cell {
        debug_assert!(sub.is_subset(self.set));
        Cell {
            set: sub,
            levels: sub.iter().map(|v| self.level(v).expect("subset")).collect(),
        }
    }

    /// Writes the levels into a full-length assignment.
    pub fn write_into(&self, full: &mut [Level]) {
        for (v, &l) in self.set.iter().zip(&self.levels) {
            full[v] = l;
        }
    }

    pub fn to_full(&self, n: usize) -> Vec<Level> {
        let mut full = vec![0; n];
        self.write_into(&mut full);
        full
    }

    /// Union of two cells on disjoint sets.
    pub fn join(&self, other: &Cell) -> Cell {
        debug_assert!(!self.set.intersects(other.set));
        let set = self.set.union(other.set);
        let levels = set
            .iter()
            .map(|v| self.level(v).or_else(|| other.level(v)).expect("member"))
            .collect();
        Cell { set, levels }
    }

    /// True iff a full assignment agrees with this cell on its set.
    pub fn matches(&self, full: &[Level]) -> bool {
        self.set.iter().zip(&self.levels).all(|(v, &l)| full[v] == l)
    }
}

/// `I*_d` in the order used throughout the crate (first member fastest).
pub fn starred_cells(d: VarSet, spec: &LevelSpec) -> Result<Vec<Cell>> {
    if d.is_empty() {
        return Err(Error::InvalidCell("I*_∅ is undefined".into()));
    }
    if !d.is_subset(spec.all()) {
        return Err(Error::InvalidCell(format!("set {d:?} outside the model")));
    }
    Ok(spec
        .starred_assignments(d)
        .map(|full| Cell::from_full(d, &full))
        .collect())
}

/// Sums a dense joint table over the variables outside `set`.
pub fn marginalize<T>(spec: &LevelSpec, joint: &[T], set: VarSet) -> Vec<T>
where
    T: Copy + Default + std::ops::AddAssign,
{
    let mut out = vec![T::default(); spec.cells(set)];
    for (idx, full) in spec.assignments(spec.all()).enumerate() {
        out[spec.offset(set, &full)] += joint[idx];
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    spec: LevelSpec,
    counts: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn from_counts(spec: LevelSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != spec.cells(spec.all()) {
            return Err(Error::InvalidCell(format!(
                "expected {} cell counts, got {}",
                spec.cells(spec.all()),
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(ContingencyTable {
            spec,
            counts,
            total,
        })
    }

    pub fn zeros(spec: LevelSpec) -> Self {
        let n = spec.cells(spec.all());
        ContingencyTable {
            spec,
            counts: vec![0; n],
            total: 0,
        }
    }

    pub fn spec(&self) -> &LevelSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, full: &[Level]) -> u64 {
        self.counts[self.spec.offset(self.spec.all(), full)]
    }

    /// The `set`-marginal table, row-major over the members of `set`.
    pub fn marginal(&self, set: VarSet) -> Vec<u64> {
        marginalize(&self.spec, &self.counts, set)
    }

    /// `n(i_D)`; the empty cell yields `N`.
    pub fn marginal_count(&self, cell: &Cell) -> Result<u64> {
        self.spec.check_cell(cell)?;
        Ok(self.marginal(cell.set)[self.spec.cell_offset(cell)])
    }

    /// Counts `n(i_B, j_A)` of the `i_B`-slice of the `A`-table, one per
    /// `j_A` in row-major order.
    pub fn slice_counts(&self, given: &Cell, a: VarSet) -> Result<Vec<(Cell, u64)>> {
        self.spec.check_cell(given)?;
        if a.intersects(given.set) {
            return Err(Error::InvalidCell(format!(
                "slice variables {a:?} overlap the conditioning set {:?}",
                given.set
            )));
        }
        if !a.is_subset(self.spec.all()) {
            return Err(Error::InvalidCell(format!("set {a:?} outside the model")));
        }
        let union = a.union(given.set);
        let marg = self.marginal(union);
        let mut full = given.to_full(self.spec.len());
        let mut out = Vec::with_capacity(self.spec.cells(a));
        for j in self.spec.assignments(a) {
            for v in a.iter() {
                full[v] = j[v];
            }
            out.push((Cell::from_full(a, &j), marg[self.spec.offset(union, &full)]));
        }
        Ok(out)
    }

    /// Table of multiplicities of the given full-level rows.
    pub fn ingest_rows(spec: LevelSpec, rows: &[Vec<Level>]) -> Result<Self> {
        let mut table = ContingencyTable::zeros(spec);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != table.spec.len() {
                return Err(Error::InvalidRow {
                    row: r + 1,
                    message: format!(
                        "expected {} values, found {}",
                        table.spec.len(),
                        row.len()
                    ),
                });
            }
            for (v, &l) in row.iter().enumerate() {
                if l as usize >= table.spec.levels(v) {
                    return Err(Error::InvalidRow {
                        row: r + 1,
                        message: format!(
                            "level {l} out of range for variable {} ({} levels)",
                            v + 1,
                            table.spec.levels(v)
                        ),
                    });
                }
            }
            let idx = table.spec.offset(table.spec.all(), row);
            table.counts[idx] += 1;
            table.total += 1;
        }
        Ok(table)
    }
}
