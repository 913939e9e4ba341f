//! Brute-force reference computations for tests and the `verify` command.
//!
//! Everything here works by literal enumeration over joint cells and
//! subsets and shares no code with the transforms it checks. Inputs beyond
//! [`MAX_ORACLE_CELLS`] joint cells are refused.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{CliqueOrder, LabeledGraph};
use crate::likelihood::{loglik_cliq, loglik_cond, loglik_direct, loglik_mod, SufficientStats};
use crate::model::Model;
use crate::prior::reference_prior_theta;
use crate::probs::JointProbs;
use crate::random::{random_cond_probs, random_model, random_table, random_theta};
use crate::table::{Cell, ContingencyTable, Level, LevelSpec};
use crate::theta::{ThetaKind, ThetaMap};
use crate::transform::{
    cliq_from_cond, cliq_from_mod, cond_from_cliq, cond_from_pcond, cond_from_xi, mod_from_cliq,
    p_from_theta_mod, p_from_xi, theta_mod_from_p, xi_from_cond, xi_from_pcond,
};
use crate::varset::VarSet;

pub const MAX_ORACLE_CELLS: u128 = 1_000_000;

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;

fn guard(what: &str, cells: u128) -> Result<()> {
    if cells > MAX_ORACLE_CELLS {
        return Err(Error::TooLarge {
            what: what.to_string(),
            cells,
            limit: MAX_ORACLE_CELLS,
        });
    }
    Ok(())
}

fn guard_joint(spec: &LevelSpec) -> Result<()> {
    guard("joint table", spec.cells_checked(spec.all()))
}

fn sign(outer: VarSet, inner: VarSet) -> f64 {
    if (outer.len() - inner.len()).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Every joint assignment, last variable fastest.
fn joint_cells(spec: &LevelSpec) -> impl Iterator<Item = Vec<Level>> + '_ {
    let n = spec.len();
    let total = spec.cells(spec.all());
    let mut full = vec![0 as Level; n];
    (0..total).map(move |k| {
        if k > 0 {
            for v in (0..n).rev() {
                full[v] += 1;
                if (full[v] as usize) < spec.levels(v) {
                    break;
                }
                full[v] = 0;
            }
        }
        full.clone()
    })
}

/// `n(i_D)` by summing every agreeing joint cell.
pub fn brute_marginal_count(t: &ContingencyTable, cell: &Cell) -> Result<u64> {
    let spec = t.spec();
    guard_joint(spec)?;
    spec.check_cell(cell)?;
    Ok(joint_cells(spec)
        .zip(t.counts())
        .filter(|(full, _)| cell.matches(full))
        .map(|(_, &n)| n)
        .sum())
}

/// `p^D(i_D)` by summing every agreeing joint cell.
pub fn brute_marginal_prob(p: &JointProbs, cell: &Cell) -> Result<f64> {
    let spec = p.spec();
    guard_joint(spec)?;
    spec.check_cell(cell)?;
    Ok(joint_cells(spec)
        .zip(p.probs())
        .filter(|(full, _)| cell.matches(full))
        .map(|(_, &q)| q)
        .sum())
}

/// `Σ_{F ⊆ D} (−1)^{|D\F|} log p(i_F, i*_{V\F})`, evaluated literally.
pub fn brute_theta(p: &JointProbs, cell: &Cell) -> Result<f64> {
    let spec = p.spec();
    guard_joint(spec)?;
    spec.check_cell(cell)?;
    if cell.set.is_empty() || !cell.is_starred() {
        return Err(Error::InvalidCell("log-linear parameters need a starred nonempty cell".into()));
    }
    let mut total = 0.0;
    for f in cell.set.subsets() {
        let mut full = vec![0 as Level; spec.len()];
        for v in f.iter() {
            full[v] = cell.level(v).expect("member");
        }
        let idx = full
            .iter()
            .enumerate()
            .fold(0usize, |acc, (v, &l)| acc * spec.levels(v) + l as usize);
        total += sign(cell.set, f) * p.probs()[idx].ln();
    }
    Ok(total)
}

/// Starred cells of `d`, first member fastest.
fn starred(spec: &LevelSpec, d: VarSet) -> Vec<Cell> {
    let members = d.to_vec();
    let mut levels: Vec<Level> = vec![1; members.len()];
    let mut out = Vec::new();
    if members.iter().any(|&v| spec.levels(v) < 2) {
        return out;
    }
    loop {
        out.push(Cell {
            set: d,
            levels: levels.clone(),
        });
        let mut k = 0;
        loop {
            if k == members.len() {
                return out;
            }
            levels[k] += 1;
            if (levels[k] as usize) < spec.levels(members[k]) {
                break;
            }
            levels[k] = 1;
            k += 1;
        }
    }
}

/// Largest `|θ(i_D)|` over every non-complete `D`, with the offending cell.
pub fn brute_markov_violation(g: &LabeledGraph, p: &JointProbs) -> Result<(f64, Option<Cell>)> {
    let spec = p.spec();
    guard_joint(spec)?;
    let mut worst = (0.0, None);
    for d in g.vertices().nonempty_subsets() {
        if g.is_complete(d) {
            continue;
        }
        for cell in starred(spec, d) {
            let v = brute_theta(p, &cell)?.abs();
            if v > worst.0 {
                worst = (v, Some(cell));
            }
        }
    }
    Ok(worst)
}

/// θ^mod of a map keyed by complete sets, read as zero elsewhere.
pub fn mod_lookup(theta: &ThetaMap) -> impl Fn(&Cell) -> f64 + '_ {
    move |cell| theta.layout().index(cell).map_or(0.0, |i| theta.values()[i])
}

/// The alternating sum over `F ⊆ D` of
/// `log(1 + Σ_{L ⊆ C_{<l}} Σ_{j_L} exp Σ_{H ⊆ F, G ⊆ L} θ(i_H, j_G))`,
/// with `C_{<l} = H_{l−1} \ C_l` and `l` zero-based. Zero for Markov θ.
pub fn appendix_cancellation(
    theta: &dyn Fn(&Cell) -> f64,
    spec: &LevelSpec,
    order: &CliqueOrder,
    l: usize,
    cell: &Cell,
) -> Result<f64> {
    if l >= order.len() {
        return Err(Error::InvalidOrder(format!("no clique {}", l + 1)));
    }
    let d = cell.set;
    if d.is_empty() || !d.is_subset(order.clique(l)) || !d.intersects(order.residual(l)) {
        return Err(Error::InvalidCell(
            "the set must lie in the clique and meet its residual".into(),
        ));
    }
    if !cell.is_starred() {
        return Err(Error::InvalidCell("cell must be starred".into()));
    }
    let before = order.history_before(l).difference(order.clique(l));
    guard("earlier-history table", spec.cells_checked(before))?;
    let outer: Vec<(VarSet, Vec<Cell>)> = before
        .nonempty_subsets()
        .map(|lset| (lset, starred(spec, lset)))
        .collect();
    let mut total = 0.0;
    for f in d.subsets() {
        let i_f = cell.restrict(f);
        let mut acc = 1.0;
        for (lset, cells) in &outer {
            for j_l in cells {
                let mut e = 0.0;
                for h in f.subsets() {
                    let i_h = i_f.restrict(h);
                    for gset in lset.nonempty_subsets() {
                        e += theta(&i_h.join(&j_l.restrict(gset)));
                    }
                }
                acc += e.exp();
            }
        }
        total += sign(d, f) * acc.ln();
    }
    Ok(total)
}

/// `log |det J|` of the central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian_logdet(
    f: impl Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    let n = x.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut point = x.to_vec();
    for j in 0..n {
        point[j] = x[j] + h;
        let up = f(&point)?;
        point[j] = x[j] - h;
        let down = f(&point)?;
        point[j] = x[j];
        if up.len() != n || down.len() != n {
            return Err(Error::ParameterMismatch("the map is not square".into()));
        }
        for i in 0..n {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    Ok(jac.lu().determinant().abs().ln())
}

/// θ^mod of `{c,d}` on the binary six-variable model (cliques `abc, bcd,
/// cde, ef`) written out through θ^cliq by the recursive formula.
pub fn theta_cd_expansion(cliq: impl Fn(&[&str]) -> f64) -> f64 {
    let t_f = cliq(&["f"]);
    let t_ef = cliq(&["e", "f"]);
    let t_e = cliq(&["e"]) + (1.0 + t_f.exp()).ln() - (1.0 + (t_f + t_ef).exp()).ln();
    let t_ce = cliq(&["c", "e"]);
    let t_de = cliq(&["d", "e"]);
    let t_cde = cliq(&["c", "d", "e"]);
    let term = |x: f64| (1.0 + x.exp() + t_f.exp() + (x + t_f + t_ef).exp()).ln();
    cliq(&["c", "d"]) - term(t_e + t_ce + t_de + t_cde) + term(t_e + t_de) + term(t_e + t_ce) - term(t_e)
}

/// Whether a check bounds its deviation from above or, for negative
/// controls, from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity being checked.
    pub anchor: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, name: &str, anchor: &str, deviation: f64, tolerance: f64, bound: Bound) {
        let passed = match bound {
            Bound::AtMost => deviation <= tolerance,
            Bound::AtLeast => deviation >= tolerance,
        };
        self.checks.push(Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            deviation,
            tolerance,
            bound,
            passed,
        });
    }

    /// Adds a check or tightens an existing one with the same name.
    pub fn merge(&mut self, name: &str, anchor: &str, deviation: f64, tolerance: f64, bound: Bound) {
        match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => {
                c.deviation = match bound {
                    Bound::AtMost => c.deviation.max(deviation),
                    Bound::AtLeast => c.deviation.min(deviation),
                };
                c.passed = match bound {
                    Bound::AtMost => c.deviation <= c.tolerance,
                    Bound::AtLeast => c.deviation >= c.tolerance,
                };
            }
            None => self.push(name, anchor, deviation, tolerance, bound),
        }
    }

    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn render_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let rel = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let _ = writeln!(
                out,
                "{} {:width$}  {:.3e} {rel} {:.0e}  ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.deviation,
                c.tolerance,
                c.anchor,
            );
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}

const A_EXPANSION: &str = "log-linear expansion of log p";
const A_MARKOV: &str = "zero log-linear terms on non-complete sets";
const A_ROUND: &str = "parametrization maps are mutually inverse";
const A_CANCEL: &str = "earlier-history term of the clique recursion vanishes";
const A_JACOBIAN: &str = "unit Jacobian between parametrizations";
const A_LIK: &str = "likelihood factorizations coincide";
const A_MARGINAL: &str = "marginal counts by direct summation";
const A_PRIOR: &str = "reference prior pushforward equals the conjugate form";
const A_CD: &str = "explicit expansion of theta(cd) through clique parameters";

/// Runs every model-generic check on `model`, merging into `report` with
/// names prefixed by `label`.
pub fn check_model(model: &Model, label: &str, rng: &mut impl Rng, report: &mut VerificationReport) -> Result<()> {
    let spec = model.spec();
    let g = model.graph();
    let name = |s: &str| format!("{label}: {s}");
    let cp = random_cond_probs(rng, spec, &model.families());
    let p = cp.to_joint(spec)?;
    let small = spec.cells_checked(spec.all()) <= MAX_ORACLE_CELLS;

    let (mod_t, _) = theta_mod_from_p(model, &p)?;
    if small {
        let mut dev: f64 = 0.0;
        for (cell, v) in mod_t.iter() {
            dev = dev.max((brute_theta(&p, &cell)? - v).abs());
        }
        report.merge(&name("log-linear parameters vs brute force"), A_EXPANSION, dev, 1e-11, Bound::AtMost);

        let (viol, _) = brute_markov_violation(g, &p)?;
        report.merge(&name("Markov zero constraints"), A_MARKOV, viol, 1e-9, Bound::AtMost);
        if g.edges().len() < g.len() * (g.len() - 1) / 2 {
            let mut q = p.probs().to_vec();
            *q.last_mut().expect("nonempty") *= 1.5;
            let s: f64 = q.iter().sum();
            q.iter_mut().for_each(|x| *x /= s);
            let (viol, _) = brute_markov_violation(g, &JointProbs::new(spec.clone(), q)?)?;
            report.merge(&name("Markov negative control"), A_MARKOV, viol, 1e-3, Bound::AtLeast);
        }

        let t = random_table(rng, spec, p.probs(), 200);
        let mut dev = 0u64;
        for d in g.vertices().nonempty_subsets().take(64) {
            let marg = t.marginal(d);
            for (k, full) in spec.assignments(d).enumerate() {
                let c = Cell::from_full(d, &full);
                dev = dev.max(brute_marginal_count(&t, &c)?.abs_diff(marg[k]));
            }
        }
        report.merge(&name("marginal counts"), A_MARGINAL, dev as f64, 0.0, Bound::AtMost);
    }

    let back = p_from_theta_mod(model, &mod_t)?;
    report.merge(&name("round trip p -> mod -> p"), A_ROUND, back.max_abs_diff(&p), 1e-9, Bound::AtMost);
    let cond = cond_from_pcond(model, &cp)?;
    let cliq = cliq_from_cond(model, &cond)?;
    let dev = cond_from_cliq(model, &cliq)?.max_abs_diff(&cond);
    report.merge(&name("round trip cond -> cliq -> cond"), A_ROUND, dev, 1e-9, Bound::AtMost);
    let dev = cliq_from_mod(model, &mod_from_cliq(model, &cliq)?)?.max_abs_diff(&cliq);
    report.merge(&name("round trip cliq -> mod -> cliq"), A_ROUND, dev, 1e-9, Bound::AtMost);
    let xi = xi_from_cond(model, &cond)?;
    let dev = cond_from_xi(model, &xi)?.max_abs_diff(&cond);
    report.merge(&name("round trip cond -> xi -> cond"), A_ROUND, dev, 1e-9, Bound::AtMost);
    let dev = xi_from_pcond(model, &p_from_xi(model, &xi)?)?.max_abs_diff(&xi);
    report.merge(&name("round trip xi -> pcond -> xi"), A_ROUND, dev, 1e-9, Bound::AtMost);

    let order = model.order();
    let theta = random_theta(rng, model, ThetaKind::Mod, 1.0);
    let lookup = mod_lookup(&theta);
    let mut dev: f64 = 0.0;
    let mut control: Option<f64> = None;
    for l in 1..order.len() {
        let before = order.history_before(l).difference(order.clique(l));
        if spec.cells_checked(before) > 4096 {
            continue;
        }
        for d in order.clique(l).nonempty_subsets() {
            if !d.intersects(order.residual(l)) {
                continue;
            }
            for cell in starred(spec, d) {
                dev = dev.max(appendix_cancellation(&lookup, spec, order, l, &cell)?.abs());
            }
        }
        if control.is_none() && !before.is_empty() {
            let r = order.residual(l).first().expect("nonempty residual");
            let gv = before.first().expect("nonempty");
            let bad = Cell {
                set: VarSet::singleton(r).with(gv),
                levels: vec![1, 1],
            };
            let perturbed = |c: &Cell| lookup(c) + if *c == bad { 0.5 } else { 0.0 };
            let d_cell = Cell {
                set: VarSet::singleton(r),
                levels: vec![1],
            };
            control = Some(appendix_cancellation(&perturbed, spec, order, l, &d_cell)?.abs());
        }
    }
    report.merge(&name("cancellation identity"), A_CANCEL, dev, 1e-9, Bound::AtMost);
    if let Some(c) = control {
        report.merge(&name("cancellation negative control"), A_CANCEL, c, 1e-6, Bound::AtLeast);
    }

    if model.layout().len() <= 400 {
        let jac = |from: ThetaKind, map: &dyn Fn(&ThetaMap) -> Result<ThetaMap>, at: &ThetaMap| {
            fd_jacobian_logdet(
                |x| Ok(map(&ThetaMap::from_values(from, model, x.to_vec())?)?.into_values()),
                at.values(),
                FD_STEP,
            )
        };
        let d1 = jac(ThetaKind::Cliq, &|t| mod_from_cliq(model, t), &cliq)?.abs();
        report.merge(&name("Jacobian cliq -> mod"), A_JACOBIAN, d1, 1e-4, Bound::AtMost);
        let d2 = jac(ThetaKind::Cond, &|t| cliq_from_cond(model, t), &cond)?.abs();
        report.merge(&name("Jacobian cond -> cliq"), A_JACOBIAN, d2, 1e-4, Bound::AtMost);
        let d3 = jac(ThetaKind::Xi, &|t| cond_from_xi(model, t), &xi)?.abs();
        report.merge(&name("Jacobian xi -> cond"), A_JACOBIAN, d3, 1e-4, Bound::AtMost);
    }

    let t = random_table(rng, spec, p.probs(), 1000);
    let stats = SufficientStats::from_table(model, &t)?.to_f64();
    let counts: Vec<f64> = t.counts().iter().map(|&n| n as f64).collect();
    let values = [
        loglik_direct(&p, &counts)?,
        loglik_mod(model, &mod_t, &stats)?,
        loglik_cond(model, &cond, &stats)?,
        loglik_cliq(model, &cliq, &stats)?,
    ];
    let spread = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    report.merge(&name("likelihood forms"), A_LIK, spread, 1e-10, Bound::AtMost);

    let cp2 = random_cond_probs(rng, spec, &model.families());
    let mut dev: f64 = 0.0;
    for kind in [ThetaKind::Cond, ThetaKind::Cliq, ThetaKind::Mod] {
        let prior = reference_prior_theta(model, kind);
        let at = |q| -> Result<ThetaMap> {
            let c = cond_from_pcond(model, q)?;
            Ok(match kind {
                ThetaKind::Cond => c,
                ThetaKind::Cliq => cliq_from_cond(model, &c)?,
                _ => mod_from_cliq(model, &cliq_from_cond(model, &c)?)?,
            })
        };
        let (x1, x2) = (at(&cp)?, at(&cp2)?);
        let push = prior.log_density(model, &x1)? - prior.log_density(model, &x2)?;
        let conj = prior.log_density_conjugate(model, &x1)? - prior.log_density_conjugate(model, &x2)?;
        dev = dev.max((push - conj).abs());
    }
    report.merge(&name("prior density ratios"), A_PRIOR, dev, 1e-9, Bound::AtMost);
    Ok(())
}

/// The explicit θ(cd) expansion against the general recursion on the
/// six-variable fixture, over `draws` random θ^cliq points.
pub fn check_theta_cd(model: &Model, rng: &mut impl Rng, draws: usize) -> Result<f64> {
    let g = model.graph();
    let mut dev: f64 = 0.0;
    for _ in 0..draws {
        let cliq = random_theta(rng, model, ThetaKind::Cliq, 1.0);
        let lookup = |names: &[&str]| -> f64 {
            let set = g.set_of(names).expect("fixture variable");
            cliq.get(&Cell {
                set,
                levels: vec![1; set.len()],
            })
        };
        let expected = theta_cd_expansion(lookup);
        let m = mod_from_cliq(model, &cliq)?;
        let cd = g.set_of(&["c", "d"])?;
        dev = dev.max((m.get(&Cell { set: cd, levels: vec![1, 1] }) - expected).abs());
    }
    Ok(dev)
}

/// Which models `verify` runs on.
#[derive(Debug, Clone)]
pub enum VerifyTarget {
    /// The shipped fixtures plus seeded random models.
    Builtin,
    /// A single named model.
    Model(String, Box<Model>),
}

/// Number of random models in the built-in suite.
pub const RANDOM_MODELS: usize = 12;

pub fn verify(target: &VerifyTarget, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match target {
        VerifyTarget::Builtin => {
            for fixture in ["chain", "six", "eleven"] {
                let model = crate::fixtures::load(fixture)?;
                check_model(&model, fixture, &mut rng, &mut report)?;
            }
            let six = crate::fixtures::load("six")?;
            let dev = check_theta_cd(&six, &mut rng, 100)?;
            report.push("six: theta(cd) expansion", A_CD, dev, 1e-9, Bound::AtMost);
            for _ in 0..RANDOM_MODELS {
                let model = random_model(&mut rng, 6, 3)?;
                check_model(&model, "random", &mut rng, &mut report)?;
            }
        }
        VerifyTarget::Model(label, model) => check_model(model, label, &mut rng, &mut report)?,
    }
    Ok(report)
}
