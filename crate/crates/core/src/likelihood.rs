//! Canonical statistics and the log-likelihood in each parametrization.
//!
//! The multinomial coefficient is left out throughout.

use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::lattice::{axes, block_axes, log_sum_exp, marginal_sums, mobius, zeta};
use crate::model::Model;
use crate::probs::{CondProbs, JointProbs};
use crate::table::ContingencyTable;
use crate::theta::{ThetaKind, ThetaMap};
use crate::transform::{cond_from_xi, cumulant, Params};

/// Statistics of one clique, laid out like the block tables of
/// [`Model::block_coords`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyStats<T = f64> {
    /// `n(i_S, i_R)`.
    pub cells: Vec<T>,
    /// `n(i_S, x_{supp x})`; the entry at `x = 0` is `n(i_S)`.
    pub slice: Vec<T>,
    /// `n(j_F)` for `F = supp i_S`, equal to the total when `F = ∅`.
    pub sep: Vec<T>,
}

/// The canonical statistics paired with θ^mod, θ^cond and θ^cliq.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats<T = f64> {
    /// `N`.
    pub total: T,
    /// `n(i_E)` for every parameter cell, aligned with the model layout.
    pub marginal: Vec<T>,
    pub families: Vec<FamilyStats<T>>,
    /// Joint cell counts, when built from a table.
    pub joint: Option<Vec<T>>,
}

impl<T> SufficientStats<T>
where
    T: Copy + AddAssign,
{
    /// Statistics from per-clique tables `n_l(i_{S_l}, i_{R_l})`.
    pub fn from_blocks(model: &Model, blocks: Vec<Vec<T>>, total: T) -> Result<Self> {
        let spec = model.spec();
        let shape = model.families();
        if blocks.len() != shape.len() {
            return Err(Error::ParameterMismatch(format!(
                "expected {} block tables, got {}",
                shape.len(),
                blocks.len()
            )));
        }
        let mut families = Vec::with_capacity(blocks.len());
        let mut both_sums = Vec::with_capacity(blocks.len());
        for (cells, &(s, r)) in blocks.into_iter().zip(&shape) {
            let nr = spec.cells(r);
            if cells.len() != spec.cells(s) * nr {
                return Err(Error::ParameterMismatch(
                    "block table size does not match the clique".into(),
                ));
            }
            let (s_axes, r_axes) = block_axes(spec, s, r);
            let mut slice = cells.clone();
            marginal_sums(&mut slice, &r_axes);
            let mut sep: Vec<T> = slice.iter().step_by(nr).copied().collect();
            marginal_sums(&mut sep, &axes(spec, s, 1));
            let mut both = slice.clone();
            marginal_sums(&mut both, &s_axes);
            both_sums.push(both);
            families.push(FamilyStats { cells, slice, sep });
        }
        let marginal = model
            .block_coords()
            .iter()
            .map(|&(l, pos)| both_sums[l][pos])
            .collect();
        Ok(SufficientStats {
            total,
            marginal,
            families,
            joint: None,
        })
    }
}

impl SufficientStats<u64> {
    pub fn from_table(model: &Model, t: &ContingencyTable) -> Result<Self> {
        let spec = model.spec();
        if t.spec() != spec {
            return Err(Error::ParameterMismatch(
                "table does not match the model's levels".into(),
            ));
        }
        let shape = model.families();
        let mut blocks: Vec<Vec<u64>> = shape
            .iter()
            .map(|&(s, r)| vec![0; spec.cells(s) * spec.cells(r)])
            .collect();
        let mut full = vec![0; spec.len()];
        for (idx, &n) in t.counts().iter().enumerate() {
            if n == 0 {
                continue;
            }
            spec.decode_into(spec.all(), idx, &mut full);
            for (b, &(s, r)) in blocks.iter_mut().zip(&shape) {
                b[spec.offset(s, &full) * spec.cells(r) + spec.offset(r, &full)] += n;
            }
        }
        let mut stats = Self::from_blocks(model, blocks, t.total())?;
        stats.joint = Some(t.counts().to_vec());
        Ok(stats)
    }

    pub fn to_f64(&self) -> SufficientStats<f64> {
        self.map(|x| x as f64)
    }
}

impl<T: Copy> SufficientStats<T> {
    pub fn map<U>(&self, f: impl Fn(T) -> U + Copy) -> SufficientStats<U> {
        let conv = |v: &Vec<T>| v.iter().map(|&x| f(x)).collect::<Vec<U>>();
        SufficientStats {
            total: f(self.total),
            marginal: conv(&self.marginal),
            families: self
                .families
                .iter()
                .map(|fam| FamilyStats {
                    cells: conv(&fam.cells),
                    slice: conv(&fam.slice),
                    sep: conv(&fam.sep),
                })
                .collect(),
            joint: self.joint.as_ref().map(conv),
        }
    }
}

fn check_stats(model: &Model, stats: &SufficientStats) -> Result<()> {
    if stats.marginal.len() != model.layout().len() || stats.families.len() != model.order().len() {
        return Err(Error::ParameterMismatch(
            "statistics were built for a different model".into(),
        ));
    }
    Ok(())
}

fn blocks_of(model: &Model, theta: &ThetaMap) -> Vec<Vec<f64>> {
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

/// `⟨θ, n(𝒟)⟩ − N k(θ)`.
pub fn loglik_mod(model: &Model, theta: &ThetaMap, stats: &SufficientStats) -> Result<f64> {
    theta.expect_kind(ThetaKind::Mod)?;
    theta.check_compatible(model)?;
    check_stats(model, stats)?;
    let dot: f64 = theta.values().iter().zip(&stats.marginal).map(|(a, b)| a * b).sum();
    Ok(dot - stats.total * cumulant(model, theta, model.spec().all())?)
}

/// Sum over the `C_1` table and every residual slice of
/// `⟨θ(i_S, 𝒟^R), n(i_S, 𝒟^R)⟩ − n(i_S) k(θ(i_S, 𝒟^R))`.
pub fn loglik_cond(model: &Model, theta: &ThetaMap, stats: &SufficientStats) -> Result<f64> {
    theta.expect_kind(ThetaKind::Cond)?;
    theta.check_compatible(model)?;
    check_stats(model, stats)?;
    let spec = model.spec();
    let mut total = 0.0;
    for ((block, fam), &(_, r)) in blocks_of(model, theta)
        .into_iter()
        .zip(&stats.families)
        .zip(&model.families())
    {
        let nr = spec.cells(r);
        let mut xi = block.clone();
        zeta(&mut xi, &axes(spec, r, 1));
        for ((th, n), xi_row) in block.chunks(nr).zip(fam.slice.chunks(nr)).zip(xi.chunks(nr)) {
            let dot: f64 = th[1..].iter().zip(&n[1..]).map(|(a, b)| a * b).sum();
            total += dot - n[0] * log_sum_exp(xi_row);
        }
    }
    Ok(total)
}

/// Per clique, `⟨θ(𝒟₀^S, 𝒟^R), n(𝒟₀^S, 𝒟^R)⟩ − Σ_{F ⊆₀ S} Σ_{j_F} n(j_F)
/// Σ_{H ⊆₀ F} (−1)^{|F\H|} k(θ(j_{⊆₀H}, 𝒟^R))`, with each cumulant taken
/// directly from the clique parameters.
pub fn loglik_cliq(model: &Model, theta: &ThetaMap, stats: &SufficientStats) -> Result<f64> {
    theta.expect_kind(ThetaKind::Cliq)?;
    theta.check_compatible(model)?;
    check_stats(model, stats)?;
    let spec = model.spec();
    let dot: f64 = theta.values().iter().zip(&stats.marginal).map(|(a, b)| a * b).sum();
    let mut cumulants = 0.0;
    for ((block, fam), &(s, r)) in blocks_of(model, theta)
        .into_iter()
        .zip(&stats.families)
        .zip(&model.families())
    {
        let nr = spec.cells(r);
        let (s_axes, r_axes) = block_axes(spec, s, r);
        let mut sums = block;
        zeta(&mut sums, &s_axes);
        zeta(&mut sums, &r_axes);
        let mut k: Vec<f64> = sums.chunks(nr).map(log_sum_exp).collect();
        mobius(&mut k, &axes(spec, s, 1));
        cumulants += fam.sep.iter().zip(&k).map(|(n, k)| n * k).sum::<f64>();
    }
    Ok(dot - cumulants)
}

/// `Σ_f Σ n(i_S, i_R) log p(i_R | i_S)`.
pub fn loglik_pcond(model: &Model, cp: &CondProbs, stats: &SufficientStats) -> Result<f64> {
    check_stats(model, stats)?;
    if cp.shape() != model.families() {
        return Err(Error::ParameterMismatch(
            "conditional blocks do not follow the model's clique order".into(),
        ));
    }
    Ok(cp.weighted_log_sum(|f, s, r| {
        let nr = cp.families()[f].rows[0].len();
        stats.families[f].cells[s * nr + r]
    }))
}

/// `Σ_i n(i) log p(i)`.
pub fn loglik_direct(p: &JointProbs, counts: &[f64]) -> Result<f64> {
    if counts.len() != p.probs().len() {
        return Err(Error::ParameterMismatch("count vector does not match the table".into()));
    }
    Ok(p
        .probs()
        .iter()
        .zip(counts)
        .filter(|(_, &n)| n != 0.0)
        .map(|(p, n)| n * p.ln())
        .sum())
}

/// Log-likelihood of any parameter point.
pub fn loglik(model: &Model, params: &Params, stats: &SufficientStats) -> Result<f64> {
    match params {
        Params::Joint(p) => {
            let joint = stats.joint.as_ref().ok_or_else(|| {
                Error::ParameterMismatch("joint likelihood needs cell counts".into())
            })?;
            loglik_direct(p, joint)
        }
        Params::PCond(cp) => loglik_pcond(model, cp, stats),
        Params::Theta(t) => match t.kind() {
            ThetaKind::Mod => loglik_mod(model, t, stats),
            ThetaKind::Cond => loglik_cond(model, t, stats),
            ThetaKind::Cliq => loglik_cliq(model, t, stats),
            ThetaKind::Xi => loglik_cond(model, &cond_from_xi(model, t)?, stats),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;
    use crate::table::LevelSpec;
    use crate::transform::{cliq_from_cond, cond_from_pcond, theta_mod_from_p};

    fn model() -> Model {
        let g = LabeledGraph::new(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")],
        )
        .unwrap();
        Model::new(g, LevelSpec::new(vec![2, 3, 2, 3]).unwrap()).unwrap()
    }

    fn cond_probs(model: &Model) -> CondProbs {
        let mut cp = CondProbs::uniform(model.spec(), &model.families());
        let mut k = 0.0f64;
        for fam in cp.families_mut() {
            for row in &mut fam.rows {
                for p in row.iter_mut() {
                    k += 1.0;
                    *p = 1.0 + 0.8 * (k * 0.77).sin();
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= s);
            }
        }
        cp
    }

    fn table(model: &Model) -> ContingencyTable {
        let n = model.spec().cells(model.spec().all());
        let counts = (0..n).map(|i| ((i * 7919) % 13) as u64).collect();
        ContingencyTable::from_counts(model.spec().clone(), counts).unwrap()
    }

    #[test]
    fn all_forms_agree() {
        let model = model();
        let cp = cond_probs(&model);
        let p = cp.to_joint(model.spec()).unwrap();
        let stats = SufficientStats::from_table(&model, &table(&model)).unwrap().to_f64();
        let direct = loglik_direct(&p, stats.joint.as_ref().unwrap()).unwrap();
        let cond = cond_from_pcond(&model, &cp).unwrap();
        let cliq = cliq_from_cond(&model, &cond).unwrap();
        let (theta, _) = theta_mod_from_p(&model, &p).unwrap();
        for value in [
            loglik_mod(&model, &theta, &stats).unwrap(),
            loglik_cond(&model, &cond, &stats).unwrap(),
            loglik_cliq(&model, &cliq, &stats).unwrap(),
            loglik_pcond(&model, &cp, &stats).unwrap(),
        ] {
            assert!((value - direct).abs() < 1e-10, "{value} vs {direct}");
        }
    }

    #[test]
    fn empty_table_gives_zero() {
        let model = model();
        let stats = SufficientStats::from_table(&model, &ContingencyTable::zeros(model.spec().clone()))
            .unwrap()
            .to_f64();
        let cond = cond_from_pcond(&model, &cond_probs(&model)).unwrap();
        assert_eq!(loglik_cond(&model, &cond, &stats).unwrap(), 0.0);
        assert_eq!(loglik_cliq(&model, &cliq_from_cond(&model, &cond).unwrap(), &stats).unwrap(), 0.0);
    }

    #[test]
    fn statistics_are_marginal_counts() {
        let model = model();
        let t = table(&model);
        let stats = SufficientStats::from_table(&model, &t).unwrap();
        for (cell, &n) in model.layout().cells().zip(&stats.marginal) {
            assert_eq!(t.marginal_count(&cell).unwrap(), n);
        }
        for fam in &stats.families {
            assert_eq!(fam.sep[0], t.total());
        }
    }
}
