//! Joint cell probabilities and families of conditional probability blocks.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::table::{marginalize, Cell, Level, LevelSpec};
use crate::varset::VarSet;

/// Tolerance on `Σ p = 1` for probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Strictly positive joint cell probabilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProbs {
    spec: LevelSpec,
    p: Vec<f64>,
}

impl JointProbs {
    pub fn new(spec: LevelSpec, p: Vec<f64>) -> Result<Self> {
        if p.len() != spec.cells(spec.all()) {
            return Err(Error::InvalidProbabilities(format!(
                "expected {} cells, got {}",
                spec.cells(spec.all()),
                p.len()
            )));
        }
        check_simplex(&p, "joint table")?;
        Ok(JointProbs { spec, p })
    }

    pub fn uniform(spec: LevelSpec) -> Self {
        let n = spec.cells(spec.all());
        JointProbs {
            spec,
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn spec(&self) -> &LevelSpec {
        &self.spec
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn prob(&self, full: &[Level]) -> f64 {
        self.p[self.spec.offset(self.spec.all(), full)]
    }

    /// The `set`-marginal table, row-major over `set`.
    pub fn marginal_table(&self, set: VarSet) -> Vec<f64> {
        marginalize(&self.spec, &self.p, set)
    }

    /// `p^D(i_D)`; the empty cell has probability one.
    pub fn marginal_prob(&self, cell: &Cell) -> Result<f64> {
        self.spec.check_cell(cell)?;
        Ok(self.marginal_table(cell.set)[self.spec.cell_offset(cell)])
    }

    /// `p^{D|i_F}(i_D) = p^{D∪F}(i_D, i_F) / p^F(i_F)`.
    pub fn conditional_prob(&self, cell: &Cell, given: &Cell) -> Result<f64> {
        if cell.set.intersects(given.set) {
            return Err(Error::InvalidCell("conditioning set overlaps the event".into()));
        }
        let joint = self.marginal_prob(&cell.join(given))?;
        Ok(joint / self.marginal_prob(given)?)
    }

    pub fn max_abs_diff(&self, other: &JointProbs) -> f64 {
        max_abs_diff(&self.p, &other.p)
    }
}

pub(crate) fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidProbabilities(format!(
            "{what}: entry {x} is not strictly positive"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE * (p.len().max(1) as f64).sqrt().max(1.0) {
        return Err(Error::InvalidProbabilities(format!(
            "{what}: probabilities sum to {sum}"
        )));
    }
    Ok(())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `p^{target | i_given}` for every `i_given`: one row per given cell
/// (row-major over `given`), each row a vector over the `target` table.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFamily {
    pub given: VarSet,
    pub target: VarSet,
    pub rows: Vec<Vec<f64>>,
}

impl BlockFamily {
    pub fn filled(spec: &LevelSpec, given: VarSet, target: VarSet, value: f64) -> Self {
        BlockFamily {
            given,
            target,
            rows: vec![vec![value; spec.cells(target)]; spec.cells(given)],
        }
    }

    pub fn block_count(&self) -> usize {
        self.rows.len()
    }

    /// Entry for the restriction of a full assignment.
    pub fn at(&self, spec: &LevelSpec, full: &[Level]) -> f64 {
        self.rows[spec.offset(self.given, full)][spec.offset(self.target, full)]
    }
}

/// Checks that `(given, target)` pairs describe a sequential factorization of
/// the joint table over `vertices`: targets partition it and every given set
/// lies in the union of earlier targets.
pub fn check_families(shape: &[(VarSet, VarSet)], vertices: VarSet) -> Result<()> {
    let mut seen = VarSet::EMPTY;
    for (i, &(given, target)) in shape.iter().enumerate() {
        if target.is_empty() && !given.is_empty() {
            return Err(Error::ParameterMismatch(format!("block family {i} has no target")));
        }
        if target.intersects(seen) || given.intersects(target) || !given.is_subset(seen) {
            return Err(Error::ParameterMismatch(format!(
                "block family {i} does not extend the earlier ones"
            )));
        }
        seen = seen.union(target);
    }
    if seen != vertices {
        return Err(Error::ParameterMismatch(
            "block families do not cover every variable".into(),
        ));
    }
    Ok(())
}

/// Conditional probabilities `p^cond`: the `C_1` table and every
/// `i_{S_l}`-slice of the `R_l` table. Also used for the cut
/// parametrization, whose blocks follow the same sequential pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CondProbs {
    families: Vec<BlockFamily>,
}

impl CondProbs {
    pub fn new(spec: &LevelSpec, families: Vec<BlockFamily>) -> Result<Self> {
        let shape: Vec<_> = families.iter().map(|f| (f.given, f.target)).collect();
        check_families(&shape, spec.all())?;
        for (i, f) in families.iter().enumerate() {
            if f.rows.len() != spec.cells(f.given) {
                return Err(Error::ParameterMismatch(format!(
                    "block family {i}: expected {} slices, got {}",
                    spec.cells(f.given),
                    f.rows.len()
                )));
            }
            for (s, row) in f.rows.iter().enumerate() {
                if row.len() != spec.cells(f.target) {
                    return Err(Error::ParameterMismatch(format!(
                        "block family {i} slice {s}: expected {} cells, got {}",
                        spec.cells(f.target),
                        row.len()
                    )));
                }
                check_simplex(row, &format!("block family {i} slice {s}"))?;
            }
        }
        Ok(CondProbs { families })
    }

    pub(crate) fn new_unchecked(families: Vec<BlockFamily>) -> Self {
        CondProbs { families }
    }

    pub fn uniform(spec: &LevelSpec, shape: &[(VarSet, VarSet)]) -> Self {
        CondProbs {
            families: shape
                .iter()
                .map(|&(g, t)| BlockFamily::filled(spec, g, t, 1.0 / spec.cells(t) as f64))
                .collect(),
        }
    }

    /// Conditional blocks of a joint table for the given family shape.
    pub fn from_joint_with(p: &JointProbs, shape: &[(VarSet, VarSet)]) -> Result<Self> {
        let spec = p.spec();
        check_families(shape, spec.all())?;
        let families = shape
            .iter()
            .map(|&(given, target)| {
                let joint = p.marginal_table(given.union(target));
                let marg = p.marginal_table(given);
                let mut fam = BlockFamily::filled(spec, given, target, 0.0);
                for full in spec.assignments(given.union(target)) {
                    let s = spec.offset(given, &full);
                    fam.rows[s][spec.offset(target, &full)] =
                        joint[spec.offset(given.union(target), &full)] / marg[s];
                }
                fam
            })
            .collect();
        Ok(CondProbs { families })
    }

    /// `p^cond` of a joint table for the model's clique order. The joint
    /// table is not checked for the Markov property.
    pub fn from_joint(model: &Model, p: &JointProbs) -> Result<Self> {
        Self::from_joint_with(p, &model.families())
    }

    pub fn families(&self) -> &[BlockFamily] {
        &self.families
    }

    pub fn families_mut(&mut self) -> &mut [BlockFamily] {
        &mut self.families
    }

    pub fn shape(&self) -> Vec<(VarSet, VarSet)> {
        self.families.iter().map(|f| (f.given, f.target)).collect()
    }

    /// `1 + Σ_l |I_{S_l}|` for the clique parametrization.
    pub fn block_count(&self) -> usize {
        self.families.iter().map(BlockFamily::block_count).sum()
    }

    /// Joint probabilities `Π_f p^{target|given}`.
    pub fn to_joint(&self, spec: &LevelSpec) -> Result<JointProbs> {
        let p: Vec<f64> = spec
            .assignments(spec.all())
            .map(|full| self.families.iter().map(|f| f.at(spec, &full)).product())
            .collect();
        JointProbs::new(spec.clone(), p)
    }

    /// `Σ_f Σ_{i_S, i_R} weight(i_S, i_R) · log p(i_R | i_S)` over all blocks,
    /// with weights given per family as a callback.
    pub fn weighted_log_sum(&self, mut weight: impl FnMut(usize, usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (f, fam) in self.families.iter().enumerate() {
            for (s, row) in fam.rows.iter().enumerate() {
                for (r, &p) in row.iter().enumerate() {
                    let w = weight(f, s, r);
                    if w != 0.0 {
                        total += w * p.ln();
                    }
                }
            }
        }
        total
    }

    pub fn max_abs_diff(&self, other: &CondProbs) -> f64 {
        self.families
            .iter()
            .zip(&other.families)
            .flat_map(|(a, b)| a.rows.iter().zip(&b.rows))
            .map(|(x, y)| max_abs_diff(x, y))
            .fold(0.0, f64::max)
    }
}
