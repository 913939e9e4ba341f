//! `ThetaMap`: the common carrier of the log-odds parametrizations.
//!
//! All four parametrizations are indexed by the starred cells of the
//! complete sets of the graph. For θ^cond and ξ the cell `(i_F, i_D)` with
//! `F ⊆ S_l`, `D ⊆ R_l` stands for the parameter of the slice
//! `i_{S_l} = (i_F, i*_{S_l\F})` at `i_D`; see [`ThetaMap::slice_view`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Model, ParamLayout};
use crate::table::Cell;
use crate::varset::VarSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaKind {
    /// Log-linear parameters of the joint table.
    Mod,
    /// Clique-marginal parameters of `C_1` and residual-conditional ones.
    Cond,
    /// Clique-marginal parameters of every clique.
    Cliq,
    /// Cumulated log-odds of the conditional blocks.
    Xi,
}

impl ThetaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaKind::Mod => "mod",
            ThetaKind::Cond => "cond",
            ThetaKind::Cliq => "cliq",
            ThetaKind::Xi => "xi",
        }
    }
}

impl fmt::Display for ThetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThetaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mod" => Ok(ThetaKind::Mod),
            "cond" => Ok(ThetaKind::Cond),
            "cliq" => Ok(ThetaKind::Cliq),
            "xi" => Ok(ThetaKind::Xi),
            other => Err(Error::ParameterMismatch(format!("unknown parameter kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMap {
    kind: ThetaKind,
    layout: Arc<ParamLayout>,
    values: Vec<f64>,
}

impl ThetaMap {
    pub fn zeros(kind: ThetaKind, model: &Model) -> Self {
        let layout = model.layout().clone();
        let values = vec![0.0; layout.len()];
        ThetaMap {
            kind,
            layout,
            values,
        }
    }

    pub fn from_values(kind: ThetaKind, model: &Model, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.layout().len() {
            return Err(Error::ParameterMismatch(format!(
                "expected {} values, got {}",
                model.layout().len(),
                values.len()
            )));
        }
        Ok(ThetaMap {
            kind,
            layout: model.layout().clone(),
            values,
        })
    }

    pub fn kind(&self) -> ThetaKind {
        self.kind
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a starred cell; cells on non-complete sets read as zero.
    pub fn get(&self, cell: &Cell) -> f64 {
        self.layout.index(cell).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, cell: &Cell, value: f64) -> Result<()> {
        let i = self.layout.index(cell).ok_or_else(|| {
            Error::ParameterMismatch(format!("{cell:?} is not a parameter index"))
        })?;
        self.values[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.layout.cells().zip(self.values.iter().copied())
    }

    pub fn check_compatible(&self, model: &Model) -> Result<()> {
        if *self.layout != **model.layout() {
            return Err(Error::ParameterMismatch(
                "parameters were built for a different model".into(),
            ));
        }
        Ok(())
    }

    pub fn expect_kind(&self, kind: ThetaKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::ParameterMismatch(format!(
                "expected {kind} parameters, got {}",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &ThetaMap) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Splits a cell into its slice and residual parts for the clique that
    /// owns it: `((S_l, i_{S_l}), i_{D ∩ R_l})`, with `i_{S_l}` at baseline
    /// outside the cell.
    pub fn slice_view(model: &Model, cell: &Cell) -> Option<(usize, Cell, Cell)> {
        let order = model.order();
        let l = order.owner(cell.set)?;
        let s = order.separator(l);
        let r = order.residual(l);
        let in_s = cell.restrict(cell.set.intersection(s));
        let mut full = vec![0; model.n_vars()];
        in_s.write_into(&mut full);
        let slice = Cell::from_full(s, &full);
        Some((l, slice, cell.restrict(cell.set.intersection(r))))
    }

    /// Inverse of [`slice_view`](Self::slice_view).
    pub fn from_slice_view(slice: &Cell, residual: &Cell) -> Cell {
        let support = slice.support();
        slice.restrict(support).join(residual)
    }
}

/// Largest absolute entry over cells whose set satisfies `pred`.
pub fn max_abs_where(theta: &ThetaMap, pred: impl Fn(VarSet) -> bool) -> f64 {
    theta
        .iter()
        .filter(|(c, _)| pred(c.set))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}
