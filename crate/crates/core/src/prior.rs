//! Reference priors, conjugate updating and posterior sampling.
//!
//! The reference prior on conditional probability blocks is a product of
//! Dirichlet(1/2, …, 1/2) laws, one per block. Its pushforward to any of
//! the log-odds parametrizations has density proportional to the product of
//! all block probabilities raised to `+1/2`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::likelihood::{loglik_cliq, loglik_cond, SufficientStats};
use crate::model::Model;
use crate::probs::{check_families, BlockFamily, CondProbs};
use crate::table::{ContingencyTable, LevelSpec};
use crate::theta::{ThetaKind, ThetaMap};
use crate::transform::{cliq_from_mod, cond_from_xi, Params};
use crate::varset::VarSet;

/// The reference-prior hyperparameter of every cell.
pub const REFERENCE_ALPHA: f64 = 0.5;

/// Independent Dirichlet laws, one per block. The blocks follow the
/// sequential pattern of [`CondProbs`]: one per slice `i_given` of each
/// family.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBlocks {
    families: Vec<BlockFamily>,
}

impl DirichletBlocks {
    pub fn new(spec: &LevelSpec, families: Vec<BlockFamily>) -> Result<Self> {
        let shape: Vec<_> = families.iter().map(|f| (f.given, f.target)).collect();
        check_families(&shape, spec.all())?;
        for (i, f) in families.iter().enumerate() {
            if f.rows.len() != spec.cells(f.given)
                || f.rows.iter().any(|r| r.len() != spec.cells(f.target))
            {
                return Err(Error::ParameterMismatch(format!(
                    "block family {i} has the wrong size"
                )));
            }
            if f.rows.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
                return Err(Error::ParameterMismatch(format!(
                    "block family {i} has a non-positive hyperparameter"
                )));
            }
        }
        Ok(DirichletBlocks { families })
    }

    /// Dirichlet(1/2, …, 1/2) on every block of the given shape.
    pub fn reference(spec: &LevelSpec, shape: &[(VarSet, VarSet)]) -> Self {
        DirichletBlocks {
            families: shape
                .iter()
                .map(|&(g, t)| BlockFamily::filled(spec, g, t, REFERENCE_ALPHA))
                .collect(),
        }
    }

    pub fn families(&self) -> &[BlockFamily] {
        &self.families
    }

    pub fn shape(&self) -> Vec<(VarSet, VarSet)> {
        self.families.iter().map(|f| (f.given, f.target)).collect()
    }

    pub fn block_count(&self) -> usize {
        self.families.iter().map(BlockFamily::block_count).sum()
    }

    /// Blocks in order, as `(family, slice, α)`.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, &[f64])> + '_ {
        self.families
            .iter()
            .enumerate()
            .flat_map(|(f, fam)| fam.rows.iter().enumerate().map(move |(s, a)| (f, s, a.as_slice())))
    }

    /// `Σ_blocks log B(α)` with `B(α) = Π Γ(α_j) / Γ(Σ α_j)`.
    pub fn log_normalizer(&self) -> f64 {
        self.blocks().map(|(_, _, a)| log_beta(a)).sum()
    }

    /// Log density at conditional blocks with the same shape.
    pub fn log_density(&self, cp: &CondProbs) -> Result<f64> {
        self.check_shape(&cp.shape())?;
        Ok(cp.weighted_log_sum(|f, s, r| self.families[f].rows[s][r] - 1.0) - self.log_normalizer())
    }

    /// Block-wise Dirichlet means.
    pub fn mean(&self) -> CondProbs {
        CondProbs::new_unchecked(
            self.families
                .iter()
                .map(|f| BlockFamily {
                    given: f.given,
                    target: f.target,
                    rows: f
                        .rows
                        .iter()
                        .map(|a| {
                            let s: f64 = a.iter().sum();
                            a.iter().map(|x| x / s).collect()
                        })
                        .collect(),
                })
                .collect(),
        )
    }

    fn check_shape(&self, shape: &[(VarSet, VarSet)]) -> Result<()> {
        if shape != self.shape() {
            return Err(Error::ParameterMismatch(
                "blocks do not match the prior's block structure".into(),
            ));
        }
        Ok(())
    }

    /// Conjugate update: every hyperparameter `α(i_given, i_target)` gains
    /// the count `n(i_given, i_target)`.
    pub fn posterior(&self, t: &ContingencyTable) -> Result<Self> {
        let spec = t.spec();
        let mut families = self.families.clone();
        if families.iter().any(|f| !f.given.union(f.target).is_subset(spec.all())) {
            return Err(Error::ParameterMismatch("table does not cover the prior's variables".into()));
        }
        let mut full = vec![0; spec.len()];
        for (idx, &n) in t.counts().iter().enumerate() {
            if n == 0 {
                continue;
            }
            spec.decode_into(spec.all(), idx, &mut full);
            for f in &mut families {
                let (s, r) = (spec.offset(f.given, &full), spec.offset(f.target, &full));
                f.rows[s][r] += n as f64;
            }
        }
        DirichletBlocks::new(spec, families)
    }

    /// `n_draws` independent draws. Draw `d` uses a ChaCha20 generator
    /// seeded with `seed` on stream `d`, visiting blocks in order and
    /// normalizing independent Gamma(α, 1) variates, so results do not
    /// depend on thread scheduling.
    pub fn sample(&self, seed: u64, n_draws: usize) -> Vec<CondProbs> {
        let gammas: Vec<Vec<Vec<Gamma<f64>>>> = self
            .families
            .iter()
            .map(|f| {
                f.rows
                    .iter()
                    .map(|a| a.iter().map(|&x| Gamma::new(x, 1.0).expect("α > 0")).collect())
                    .collect()
            })
            .collect();
        (0..n_draws)
            .into_par_iter()
            .map(|d| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(d as u64);
                let families = self
                    .families
                    .iter()
                    .zip(&gammas)
                    .map(|(f, gs)| BlockFamily {
                        given: f.given,
                        target: f.target,
                        rows: gs
                            .iter()
                            .map(|row| {
                                let mut x: Vec<f64> = row
                                    .iter()
                                    .map(|g| g.sample(&mut rng).max(f64::MIN_POSITIVE))
                                    .collect();
                                let s: f64 = x.iter().sum();
                                x.iter_mut().for_each(|v| *v /= s);
                                x
                            })
                            .collect(),
                    })
                    .collect();
                CondProbs::new_unchecked(families)
            })
            .collect()
    }
}

/// `log B(α)`.
pub fn log_beta(alpha: &[f64]) -> f64 {
    alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(alpha.iter().sum())
}

/// The reference prior for the conditional blocks of the model.
pub fn reference_prior_pcond(model: &Model) -> DirichletBlocks {
    DirichletBlocks::reference(model.spec(), &model.families())
}

/// Posterior blocks after observing a table.
pub fn posterior_update(prior: &DirichletBlocks, t: &ContingencyTable) -> Result<DirichletBlocks> {
    prior.posterior(t)
}

/// Fictitious prior counts, stored doubled so that every value is an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct FictitiousCounts {
    tag: ThetaKind,
    doubled: SufficientStats<u64>,
}

impl FictitiousCounts {
    pub fn tag(&self) -> ThetaKind {
        self.tag
    }

    /// Twice the counts.
    pub fn doubled(&self) -> &SufficientStats<u64> {
        &self.doubled
    }

    pub fn to_stats(&self) -> SufficientStats {
        self.doubled.map(|x| x as f64 / 2.0)
    }
}

/// Fictitious counts of the θ^cond or θ^cliq reference prior. Both arise as
/// the statistics of a pseudo-table holding 1/2 in every cell of every
/// block; θ^cond reads `ñ(i_S, i_D)` and `ñ(i_S)` off it, θ^cliq reads
/// `ñ(j_F, i_D)` and `ñ(j_F)`.
pub fn fictitious_counts(model: &Model, tag: ThetaKind) -> Result<FictitiousCounts> {
    if !matches!(tag, ThetaKind::Cond | ThetaKind::Cliq) {
        return Err(Error::ParameterMismatch(format!(
            "fictitious counts exist for cond and cliq, not {tag}"
        )));
    }
    let spec = model.spec();
    let blocks: Vec<Vec<u64>> = model
        .families()
        .iter()
        .map(|&(s, r)| vec![1; spec.cells(s) * spec.cells(r)])
        .collect();
    let total = spec.cells(model.order().clique(0)) as u64;
    Ok(FictitiousCounts {
        tag,
        doubled: SufficientStats::from_blocks(model, blocks, total)?,
    })
}

/// The reference prior on a log-odds parametrization.
#[derive(Debug, Clone)]
pub struct ThetaPrior {
    kind: ThetaKind,
    blocks: DirichletBlocks,
}

impl ThetaPrior {
    pub fn kind(&self) -> ThetaKind {
        self.kind
    }

    /// The p^cond prior it is pushed forward from.
    pub fn blocks(&self) -> &DirichletBlocks {
        &self.blocks
    }

    /// `Σ_blocks Σ_cells ½ log p − Σ_blocks log B(½, …, ½)`, with the block
    /// probabilities computed from `theta`.
    pub fn log_density(&self, model: &Model, theta: &ThetaMap) -> Result<f64> {
        theta.expect_kind(self.kind)?;
        let cp = Params::Theta(theta.clone()).to_pcond(model, f64::INFINITY)?;
        Ok(cp.weighted_log_sum(|_, _, _| REFERENCE_ALPHA) - self.blocks.log_normalizer())
    }

    /// The same density in conjugate form: the likelihood with data counts
    /// replaced by fictitious counts. θ^mod and ξ are mapped to θ^cliq and
    /// θ^cond, both with unit Jacobian.
    pub fn log_density_conjugate(&self, model: &Model, theta: &ThetaMap) -> Result<f64> {
        theta.expect_kind(self.kind)?;
        let norm = self.blocks.log_normalizer();
        let stats = fictitious_counts(model, ThetaKind::Cond)?.to_stats();
        Ok(match self.kind {
            ThetaKind::Cond => loglik_cond(model, theta, &stats)?,
            ThetaKind::Xi => loglik_cond(model, &cond_from_xi(model, theta)?, &stats)?,
            ThetaKind::Cliq => loglik_cliq(model, theta, &stats)?,
            ThetaKind::Mod => loglik_cliq(model, &cliq_from_mod(model, theta)?, &stats)?,
        } - norm)
    }
}

pub fn reference_prior_theta(model: &Model, kind: ThetaKind) -> ThetaPrior {
    ThetaPrior {
        kind,
        blocks: reference_prior_pcond(model),
    }
}
