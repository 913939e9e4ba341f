//! Exact transforms among joint probabilities, conditional blocks and the
//! four log-odds parametrizations.
//!
//! θ^cond, θ^cliq and ξ are handled as block tables: for clique `l` a flat
//! array over `I_{S_l} × I_{R_l}` whose entry at `(i_S, x)` with `x ≠ 0`
//! holds the parameter of the cell `(supp i_S, supp x)`; see
//! [`Model::block_coords`]. In these terms
//!
//! * θ^cond is the Möbius transform over `R_l` of the log slice probabilities,
//! * ξ is the zeta transform of θ^cond over `R_l`,
//! * θ^cliq is the Möbius transform of θ^cond over `S_l`.

use crate::error::{Error, Result};
use crate::lattice::{axes, block_axes, log_sum_exp, mobius, zeta};
use crate::model::Model;
use crate::probs::{BlockFamily, CondProbs, JointProbs};
use crate::table::{Cell, Level, MAX_DENSE_CELLS};
use crate::theta::{ThetaKind, ThetaMap};
use crate::varset::VarSet;

/// Largest configuration space of `V \ H_l` enumerated by [`mod_from_cliq`].
pub const MAX_K_TERM_CELLS: u128 = 1_000_000;

/// Default tolerance of the Markov check.
pub const DEFAULT_MARKOV_TOLERANCE: f64 = 1e-8;

/// θ for every subset of `V`: the Möbius transform of `log p` over the
/// joint table, row-major. Entry `x` holds `θ(x_{supp x})`; entry `0` holds
/// `θ(i*) = log p(i*)`.
pub fn saturated_theta(p: &JointProbs) -> Vec<f64> {
    let spec = p.spec();
    let mut f: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    mobius(&mut f, &axes(spec, spec.all(), 1));
    f
}

/// θ^mod on the complete sets of the graph, and the non-free scalar
/// `θ(i*) = log p(i*)`. Entries on non-complete sets are dropped without
/// checking; see [`check_markov`].
pub fn theta_mod_from_p(model: &Model, p: &JointProbs) -> Result<(ThetaMap, f64)> {
    check_spec(model, p)?;
    let sat = saturated_theta(p);
    Ok((pick_complete(model, &sat), sat[0]))
}

fn pick_complete(model: &Model, sat: &[f64]) -> ThetaMap {
    let spec = model.spec();
    let mut theta = ThetaMap::zeros(ThetaKind::Mod, model);
    let mut full = vec![0; spec.len()];
    for (i, cell) in model.layout().cells().enumerate() {
        full.iter_mut().for_each(|x| *x = 0);
        cell.write_into(&mut full);
        theta.values_mut()[i] = sat[spec.offset(spec.all(), &full)];
    }
    theta
}

fn check_spec(model: &Model, p: &JointProbs) -> Result<()> {
    if p.spec() != model.spec() {
        return Err(Error::ParameterMismatch(
            "probability table does not match the model's levels".into(),
        ));
    }
    Ok(())
}

/// The non-complete cell with the largest `|θ|`, if the graph has any
/// non-complete set.
pub fn markov_violation(model: &Model, p: &JointProbs) -> Result<Option<(Cell, f64)>> {
    check_spec(model, p)?;
    let spec = model.spec();
    let sat = saturated_theta(p);
    let mut worst: Option<(usize, f64)> = None;
    let mut full = vec![0; spec.len()];
    for (idx, &v) in sat.iter().enumerate() {
        spec.decode_into(spec.all(), idx, &mut full);
        let support = Cell::from_full(spec.all(), &full).support();
        if model.graph().is_complete(support) {
            continue;
        }
        if worst.is_none_or(|(_, w)| v.abs() > w) {
            worst = Some((idx, v.abs()));
        }
    }
    Ok(worst.map(|(idx, v)| {
        spec.decode_into(spec.all(), idx, &mut full);
        let cell = Cell::from_full(spec.all(), &full);
        (cell.restrict(cell.support()), v)
    }))
}

/// Fails unless every θ on a non-complete set is within `tolerance` of zero.
pub fn check_markov(model: &Model, p: &JointProbs, tolerance: f64) -> Result<()> {
    match markov_violation(model, p)? {
        Some((cell, value)) if value > tolerance => Err(Error::NotMarkov {
            set: describe_cell(model, &cell),
            value,
            tolerance,
        }),
        _ => Ok(()),
    }
}

pub(crate) fn describe_cell(model: &Model, cell: &Cell) -> String {
    let parts: Vec<String> = cell
        .set
        .iter()
        .zip(&cell.levels)
        .map(|(v, l)| format!("{}={}", model.graph().name(v), l))
        .collect();
    format!("({})", parts.join(","))
}

/// Log-linear sums `Σ_{F ⊆ supp x} θ(x_F)` over the table on `a`, with θ
/// read from a mod-kind map and taken as zero on non-complete sets.
fn log_linear_table(model: &Model, theta: &ThetaMap, a: VarSet) -> Result<Vec<f64>> {
    let spec = model.spec();
    let cells = spec.cells_checked(a);
    if cells > MAX_DENSE_CELLS {
        return Err(Error::TooLarge {
            what: format!("table over {}", model.set_name(a)),
            cells,
            limit: MAX_DENSE_CELLS,
        });
    }
    let mut g = vec![0.0; cells as usize];
    let mut full = vec![0; spec.len()];
    for (cell, value) in theta.iter() {
        if cell.set.is_subset(a) {
            full.iter_mut().for_each(|x| *x = 0);
            cell.write_into(&mut full);
            g[spec.offset(a, &full)] = value;
        }
    }
    zeta(&mut g, &axes(spec, a, 1));
    Ok(g)
}

/// `k(θ(𝒟^A)) = log(1 + Σ_{D ⊆ A} Σ_{i_D ∈ I*_D} exp Σ_{F ⊆ D} θ(i_F))`.
pub fn cumulant(model: &Model, theta: &ThetaMap, a: VarSet) -> Result<f64> {
    theta.expect_kind(ThetaKind::Mod)?;
    theta.check_compatible(model)?;
    Ok(log_sum_exp(&log_linear_table(model, theta, a)?))
}

/// Joint probabilities from θ^mod: `log p(i) = Σ_{F ⊆ supp i} θ(i_F) − k`.
pub fn p_from_theta_mod(model: &Model, theta: &ThetaMap) -> Result<JointProbs> {
    theta.expect_kind(ThetaKind::Mod)?;
    theta.check_compatible(model)?;
    let g = log_linear_table(model, theta, model.spec().all())?;
    let k = log_sum_exp(&g);
    let p: Vec<f64> = g.iter().map(|x| (x - k).exp()).collect();
    JointProbs::new(model.spec().clone(), p)
}

/// Block tables of a cond/cliq/xi map, zero at `x = 0`.
fn to_blocks(model: &Model, theta: &ThetaMap) -> Vec<Vec<f64>> {
    let spec = model.spec();
    let mut blocks: Vec<Vec<f64>> = model
        .families()
        .iter()
        .map(|&(s, r)| vec![0.0; spec.cells(s) * spec.cells(r)])
        .collect();
    for (&(l, pos), &v) in model.block_coords().iter().zip(theta.values()) {
        blocks[l][pos] = v;
    }
    blocks
}

fn from_blocks(model: &Model, kind: ThetaKind, blocks: &[Vec<f64>]) -> ThetaMap {
    let values = model
        .block_coords()
        .iter()
        .map(|&(l, pos)| blocks[l][pos])
        .collect();
    ThetaMap::from_values(kind, model, values).expect("layout sized values")
}

fn expect(model: &Model, theta: &ThetaMap, kind: ThetaKind) -> Result<()> {
    theta.expect_kind(kind)?;
    theta.check_compatible(model)
}

fn check_shape(model: &Model, cp: &CondProbs) -> Result<()> {
    if cp.shape() != model.families() {
        return Err(Error::ParameterMismatch(
            "conditional blocks do not follow the model's clique order".into(),
        ));
    }
    Ok(())
}

/// θ^cond of conditional probability blocks.
pub fn cond_from_pcond(model: &Model, cp: &CondProbs) -> Result<ThetaMap> {
    check_shape(model, cp)?;
    let spec = model.spec();
    let blocks: Vec<Vec<f64>> = cp
        .families()
        .iter()
        .map(|f| {
            let mut t: Vec<f64> = f.rows.iter().flatten().map(|p| p.ln()).collect();
            mobius(&mut t, &axes(spec, f.target, 1));
            t
        })
        .collect();
    Ok(from_blocks(model, ThetaKind::Cond, &blocks))
}

/// θ^cond of a Markov joint table.
pub fn theta_cond_from_p(model: &Model, p: &JointProbs, tolerance: f64) -> Result<ThetaMap> {
    check_markov(model, p, tolerance)?;
    cond_from_pcond(model, &CondProbs::from_joint(model, p)?)
}

/// `θ^{C_l}(i_D) = Σ_{F ⊆₀ D∩S_l} (−1)^{|(D∩S_l)\F|} θ^{R_l|(i_F, i*)}(i_{D∩R_l})`.
pub fn cliq_from_cond(model: &Model, cond: &ThetaMap) -> Result<ThetaMap> {
    expect(model, cond, ThetaKind::Cond)?;
    let mut blocks = to_blocks(model, cond);
    for (b, &(s, r)) in blocks.iter_mut().zip(&model.families()) {
        mobius(b, &block_axes(model.spec(), s, r).0);
    }
    Ok(from_blocks(model, ThetaKind::Cliq, &blocks))
}

/// `θ^{R_l|(i_F, i*)}(i_D) = Σ_{G ⊆₀ F} θ^{C_l}(i_G, i_D)`.
pub fn cond_from_cliq(model: &Model, cliq: &ThetaMap) -> Result<ThetaMap> {
    expect(model, cliq, ThetaKind::Cliq)?;
    let mut blocks = to_blocks(model, cliq);
    for (b, &(s, r)) in blocks.iter_mut().zip(&model.families()) {
        zeta(b, &block_axes(model.spec(), s, r).0);
    }
    Ok(from_blocks(model, ThetaKind::Cond, &blocks))
}

/// `ξ(i_F, i_D) = Σ_{L ⊆ D} θ^{R_l|(i_F, i*)}(i_L)`, and likewise on `C_1`.
pub fn xi_from_cond(model: &Model, cond: &ThetaMap) -> Result<ThetaMap> {
    expect(model, cond, ThetaKind::Cond)?;
    let mut blocks = to_blocks(model, cond);
    for (b, &(_, r)) in blocks.iter_mut().zip(&model.families()) {
        zeta(b, &axes(model.spec(), r, 1));
    }
    Ok(from_blocks(model, ThetaKind::Xi, &blocks))
}

/// Möbius inverse of [`xi_from_cond`].
pub fn cond_from_xi(model: &Model, xi: &ThetaMap) -> Result<ThetaMap> {
    expect(model, xi, ThetaKind::Xi)?;
    let mut blocks = to_blocks(model, xi);
    for (b, &(_, r)) in blocks.iter_mut().zip(&model.families()) {
        mobius(b, &axes(model.spec(), r, 1));
    }
    Ok(from_blocks(model, ThetaKind::Cond, &blocks))
}

/// Conditional blocks from ξ: `p(x | i_S) = exp ξ(i_S, x) / (1 + Σ_{y ≠ 0} exp ξ(i_S, y))`.
pub fn p_from_xi(model: &Model, xi: &ThetaMap) -> Result<CondProbs> {
    expect(model, xi, ThetaKind::Xi)?;
    let spec = model.spec();
    let blocks = to_blocks(model, xi);
    let families = model
        .families()
        .iter()
        .zip(blocks)
        .map(|(&(given, target), b)| BlockFamily {
            given,
            target,
            rows: b
                .chunks(spec.cells(target))
                .map(|row| {
                    let k = log_sum_exp(row);
                    row.iter().map(|x| (x - k).exp()).collect()
                })
                .collect(),
        })
        .collect();
    Ok(CondProbs::new_unchecked(families))
}

/// `ξ(i_S, x) = log p(x | i_S) − log p(0 | i_S)`.
pub fn xi_from_pcond(model: &Model, cp: &CondProbs) -> Result<ThetaMap> {
    check_shape(model, cp)?;
    let blocks: Vec<Vec<f64>> = cp
        .families()
        .iter()
        .map(|f| {
            f.rows
                .iter()
                .flat_map(|row| {
                    let base = row[0].ln();
                    row.iter().map(move |p| p.ln() - base)
                })
                .collect()
        })
        .collect();
    Ok(from_blocks(model, ThetaKind::Xi, &blocks))
}

/// Conditional blocks from θ^cond.
pub fn pcond_from_cond(model: &Model, cond: &ThetaMap) -> Result<CondProbs> {
    p_from_xi(model, &xi_from_cond(model, cond)?)
}

/// θ^mod from θ^cliq by a reverse sweep over the cliques.
///
/// For a cell `E` owned by clique `l`, `θ(E) = θ^{C_l}(E)` unless `E` lies in
/// a later separator, in which case
/// `θ(E) = θ^{C_l}(E) − Σ_{F ⊆₀ E} (−1)^{|E\F|} K_l(i_F)` with
/// `K_l(i_F) = log Σ_{y ∈ I_Y} exp Σ_T θ((i_F, y)_T)` over `Y = V \ H_l` and
/// complete `T ⊆ F ∪ supp y` meeting `supp y`. Those θ belong to later
/// cliques and are already known.
pub fn mod_from_cliq(model: &Model, cliq: &ThetaMap) -> Result<ThetaMap> {
    expect(model, cliq, ThetaKind::Cliq)?;
    let spec = model.spec();
    let order = model.order();
    let layout = model.layout();
    let coords = model.block_coords();
    let k = order.len();
    let mut theta = vec![f64::NAN; layout.len()];
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &(l, _)) in coords.iter().enumerate() {
        owned[l].push(i);
    }
    let cells: Vec<Cell> = layout.cells().collect();
    let mut full = vec![0 as Level; spec.len()];

    for l in (0..k).rev() {
        let later: Vec<VarSet> = (l + 1..k).map(|m| order.separator(m)).collect();
        let (inner, direct): (Vec<usize>, Vec<usize>) = owned[l]
            .iter()
            .partition(|&&i| later.iter().any(|&s| cells[i].set.is_subset(s)));
        for i in direct {
            theta[i] = cliq.values()[i];
        }
        if inner.is_empty() {
            continue;
        }
        let cl = order.clique(l);
        let y = spec.all().difference(order.history(l));
        let y_cells = spec.cells_checked(y);
        if y_cells > MAX_K_TERM_CELLS {
            return Err(Error::TooLarge {
                what: format!("configurations of {}", model.set_name(y)),
                cells: y_cells,
                limit: MAX_K_TERM_CELLS,
            });
        }
        let w = cl.union(y);
        let w_cells = spec.cells_checked(w);
        if w_cells > MAX_DENSE_CELLS {
            return Err(Error::TooLarge {
                what: format!("table over {}", model.set_name(w)),
                cells: w_cells,
                limit: MAX_DENSE_CELLS,
            });
        }
        let mut g = vec![0.0; w_cells as usize];
        for (i, cell) in cells.iter().enumerate() {
            if cell.set.is_subset(w) && cell.set.intersects(y) {
                if theta[i].is_nan() {
                    return Err(Error::Internal(format!(
                        "θ on {} needed before it was computed",
                        model.set_name(cell.set)
                    )));
                }
                full.iter_mut().for_each(|x| *x = 0);
                cell.write_into(&mut full);
                g[spec.offset(w, &full)] = theta[i];
            }
        }
        zeta(&mut g, &axes(spec, w, 1));
        let y_offsets: Vec<usize> = spec
            .assignments(y)
            .map(|a| spec.offset(w, &a))
            .collect();
        let mut kterm: Vec<f64> = spec
            .assignments(cl)
            .map(|z| {
                let base = spec.offset(w, &z);
                let row: Vec<f64> = y_offsets.iter().map(|&o| g[base + o]).collect();
                log_sum_exp(&row)
            })
            .collect();
        mobius(&mut kterm, &axes(spec, cl, 1));
        for i in inner {
            full.iter_mut().for_each(|x| *x = 0);
            cells[i].write_into(&mut full);
            theta[i] = cliq.values()[i] - kterm[spec.offset(cl, &full)];
        }
    }
    if theta.iter().any(|v| v.is_nan()) {
        return Err(Error::Internal("reverse sweep left θ entries unset".into()));
    }
    ThetaMap::from_values(ThetaKind::Mod, model, theta)
}

/// θ^cliq from θ^mod through the joint table and its conditional blocks.
pub fn cliq_from_mod(model: &Model, theta: &ThetaMap) -> Result<ThetaMap> {
    let p = p_from_theta_mod(model, theta)?;
    let cond = cond_from_pcond(model, &CondProbs::from_joint(model, &p)?)?;
    cliq_from_cond(model, &cond)
}

/// The parametrizations accepted by [`convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Joint,
    PCond,
    Theta(ThetaKind),
}

impl std::str::FromStr for ParamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(ParamKind::Joint),
            "pcond" => Ok(ParamKind::PCond),
            other => other.parse().map(ParamKind::Theta),
        }
    }
}

impl std::fmt::Display for ParamKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamKind::Joint => f.write_str("joint"),
            ParamKind::PCond => f.write_str("pcond"),
            ParamKind::Theta(k) => k.fmt(f),
        }
    }
}

/// A parameter point in any of the supported forms.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Joint(JointProbs),
    PCond(CondProbs),
    Theta(ThetaMap),
}

impl Params {
    pub fn kind(&self) -> ParamKind {
        match self {
            Params::Joint(_) => ParamKind::Joint,
            Params::PCond(_) => ParamKind::PCond,
            Params::Theta(t) => ParamKind::Theta(t.kind()),
        }
    }

    /// Conditional blocks of this point. Joint tables are checked for the
    /// Markov property first.
    pub fn to_pcond(&self, model: &Model, tolerance: f64) -> Result<CondProbs> {
        match self {
            Params::Joint(p) => {
                check_markov(model, p, tolerance)?;
                CondProbs::from_joint(model, p)
            }
            Params::PCond(cp) => {
                check_shape(model, cp)?;
                Ok(cp.clone())
            }
            Params::Theta(t) => match t.kind() {
                ThetaKind::Mod => CondProbs::from_joint(model, &p_from_theta_mod(model, t)?),
                ThetaKind::Cond => pcond_from_cond(model, t),
                ThetaKind::Cliq => pcond_from_cond(model, &cond_from_cliq(model, t)?),
                ThetaKind::Xi => p_from_xi(model, t),
            },
        }
    }
}

/// Converts a parameter point to another parametrization of the same model.
pub fn convert(model: &Model, from: &Params, to: ParamKind, tolerance: f64) -> Result<Params> {
    if from.kind() == to {
        if let Params::Joint(p) = from {
            check_markov(model, p, tolerance)?;
        }
        return Ok(from.clone());
    }
    if let Params::Theta(t) = from {
        t.check_compatible(model)?;
        match (t.kind(), to) {
            (ThetaKind::Mod, ParamKind::Joint) => return p_from_theta_mod(model, t).map(Params::Joint),
            (ThetaKind::Mod, ParamKind::Theta(ThetaKind::Cliq)) => {
                return cliq_from_mod(model, t).map(Params::Theta)
            }
            (ThetaKind::Cliq, ParamKind::Theta(ThetaKind::Mod)) => {
                return mod_from_cliq(model, t).map(Params::Theta)
            }
            (ThetaKind::Cond | ThetaKind::Xi, ParamKind::Theta(ThetaKind::Mod)) => {
                let cliq = match convert(model, from, ParamKind::Theta(ThetaKind::Cliq), tolerance)? {
                    Params::Theta(c) => c,
                    _ => unreachable!("conversion to cliq yields θ"),
                };
                return mod_from_cliq(model, &cliq).map(Params::Theta);
            }
            _ => {}
        }
    }
    if let (Params::Joint(p), ParamKind::Theta(ThetaKind::Mod)) = (from, to) {
        check_markov(model, p, tolerance)?;
        return theta_mod_from_p(model, p).map(|(t, _)| Params::Theta(t));
    }
    let cp = from.to_pcond(model, tolerance)?;
    Ok(match to {
        ParamKind::PCond => Params::PCond(cp),
        ParamKind::Joint => Params::Joint(cp.to_joint(model.spec())?),
        ParamKind::Theta(kind) => Params::Theta(match kind {
            ThetaKind::Cond => cond_from_pcond(model, &cp)?,
            ThetaKind::Cliq => cliq_from_cond(model, &cond_from_pcond(model, &cp)?)?,
            ThetaKind::Xi => xi_from_pcond(model, &cp)?,
            ThetaKind::Mod => theta_mod_from_p(model, &cp.to_joint(model.spec())?)?.0,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;
    use crate::table::LevelSpec;

    fn chain(levels: Vec<usize>) -> Model {
        let g = LabeledGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        Model::new(g, LevelSpec::new(levels).unwrap()).unwrap()
    }

    fn ex21() -> Model {
        let g = LabeledGraph::new(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b"),
                ("a", "c"),
                ("b", "c"),
                ("b", "d"),
                ("c", "d"),
                ("c", "e"),
                ("d", "e"),
                ("e", "f"),
            ],
        )
        .unwrap();
        Model::new(g, LevelSpec::new(vec![2; 6]).unwrap()).unwrap()
    }

    fn wiggle(model: &Model, kind: ThetaKind, scale: f64) -> ThetaMap {
        let values = (0..model.layout().len())
            .map(|i| scale * ((i as f64 + 1.0) * 1.618).sin())
            .collect();
        ThetaMap::from_values(kind, model, values).unwrap()
    }

    fn cell(model: &Model, names: &[&str], levels: Vec<Level>) -> Cell {
        Cell::new(model.graph().set_of(names).unwrap(), levels).unwrap()
    }

    #[test]
    fn single_binary_variable() {
        let g = LabeledGraph::new(&["a"], &[] as &[(&str, &str)]).unwrap();
        let model = Model::new(g, LevelSpec::new(vec![2]).unwrap()).unwrap();
        let p = JointProbs::new(model.spec().clone(), vec![0.25, 0.75]).unwrap();
        let (theta, star) = theta_mod_from_p(&model, &p).unwrap();
        assert!((theta.values()[0] - 3f64.ln()).abs() < 1e-15);
        assert!((star - 0.25f64.ln()).abs() < 1e-15);
        assert!((cumulant(&model, &theta, model.spec().all()).unwrap() - 4f64.ln()).abs() < 1e-15);
        let zero = ThetaMap::zeros(ThetaKind::Mod, &model);
        assert!((cumulant(&model, &zero, model.spec().all()).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_chain_has_zero_parameters() {
        let model = chain(vec![2, 3, 2]);
        let p = JointProbs::uniform(model.spec().clone());
        let cond = theta_cond_from_p(&model, &p, 1e-12).unwrap();
        assert!(cond.values().iter().all(|v| v.abs() < 1e-15));
        let back = p_from_theta_mod(&model, &ThetaMap::zeros(ThetaKind::Mod, &model)).unwrap();
        assert!(back.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn non_markov_table_is_reported() {
        let model = chain(vec![2, 2, 2]);
        let p = JointProbs::new(
            model.spec().clone(),
            vec![0.05, 0.1, 0.15, 0.2, 0.1, 0.1, 0.1, 0.2],
        )
        .unwrap();
        let err = theta_cond_from_p(&model, &p, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NotMarkov { .. }), "{err}");
    }

    #[test]
    fn two_term_cliq_from_cond() {
        let model = chain(vec![2, 2, 2]);
        let cond = wiggle(&model, ThetaKind::Cond, 0.7);
        let cliq = cliq_from_cond(&model, &cond).unwrap();
        let bc = cell(&model, &["b", "c"], vec![1, 1]);
        let c = cell(&model, &["c"], vec![1]);
        assert!((cliq.get(&bc) - (cond.get(&bc) - cond.get(&c))).abs() < 1e-15);
        assert_eq!(cliq.get(&c), cond.get(&c));
        let back = cond_from_cliq(&model, &cliq).unwrap();
        assert!(back.max_abs_diff(&cond) < 1e-15);
    }

    #[test]
    fn xi_of_pair_sums_subsets() {
        let model = ex21();
        let cond = wiggle(&model, ThetaKind::Cond, 0.5);
        let xi = xi_from_cond(&model, &cond).unwrap();
        let ab = cell(&model, &["a", "b"], vec![1, 1]);
        let a = cell(&model, &["a"], vec![1]);
        let b = cell(&model, &["b"], vec![1]);
        let expect = cond.get(&a) + cond.get(&b) + cond.get(&ab);
        assert!((xi.get(&ab) - expect).abs() < 1e-15);
        assert_eq!(xi.get(&a), cond.get(&a));
        assert!(cond_from_xi(&model, &xi).unwrap().max_abs_diff(&cond) < 1e-14);
    }

    #[test]
    fn xi_softmax_single_block() {
        let g = LabeledGraph::new(&["a"], &[] as &[(&str, &str)]).unwrap();
        let model = Model::new(g, LevelSpec::new(vec![2]).unwrap()).unwrap();
        let xi = ThetaMap::from_values(ThetaKind::Xi, &model, vec![3f64.ln()]).unwrap();
        let cp = p_from_xi(&model, &xi).unwrap();
        let row = &cp.families()[0].rows[0];
        assert!((row[0] - 0.25).abs() < 1e-15 && (row[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn round_trips_on_example_graph() {
        let model = ex21();
        let cliq = wiggle(&model, ThetaKind::Cliq, 0.9);
        let theta = mod_from_cliq(&model, &cliq).unwrap();
        assert!(cliq_from_mod(&model, &theta).unwrap().max_abs_diff(&cliq) < 1e-12);
        let p = p_from_theta_mod(&model, &theta).unwrap();
        let (back, _) = theta_mod_from_p(&model, &p).unwrap();
        assert!(back.max_abs_diff(&theta) < 1e-12);
        check_markov(&model, &p, 1e-10).unwrap();
        let cp = CondProbs::from_joint(&model, &p).unwrap();
        let xi = xi_from_pcond(&model, &cp).unwrap();
        assert!(p_from_xi(&model, &xi).unwrap().max_abs_diff(&cp) < 1e-14);
    }

    #[test]
    fn last_clique_keeps_clique_parameters() {
        let model = ex21();
        let cliq = wiggle(&model, ThetaKind::Cliq, 1.1);
        let theta = mod_from_cliq(&model, &cliq).unwrap();
        let ef = cell(&model, &["e", "f"], vec![1, 1]);
        let f = cell(&model, &["f"], vec![1]);
        assert_eq!(theta.get(&ef), cliq.get(&ef));
        assert_eq!(theta.get(&f), cliq.get(&f));
        let e = cell(&model, &["e"], vec![1]);
        let l1p = |x: f64| x.exp().ln_1p();
        let expect = cliq.get(&e) + l1p(cliq.get(&f)) - l1p(cliq.get(&f) + cliq.get(&ef));
        assert!((theta.get(&e) - expect).abs() < 1e-14);
    }

    #[test]
    fn convert_chain_matches_direct_calls() {
        let model = ex21();
        let cond = wiggle(&model, ThetaKind::Cond, 0.4);
        let from = Params::Theta(cond.clone());
        let to_mod = convert(&model, &from, ParamKind::Theta(ThetaKind::Mod), 1e-8).unwrap();
        let Params::Theta(theta) = to_mod else { panic!() };
        let back = convert(&model, &Params::Theta(theta), ParamKind::Theta(ThetaKind::Cond), 1e-8)
            .unwrap();
        let Params::Theta(back) = back else { panic!() };
        assert!(back.max_abs_diff(&cond) < 1e-12);
        assert_eq!("pcond".parse::<ParamKind>().unwrap(), ParamKind::PCond);
        assert!("bogus".parse::<ParamKind>().is_err());
    }
}
