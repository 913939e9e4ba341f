//! Cuts: detection, the factorization through the `A`-marginal, and the
//! associated reference prior.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{perfect_order_within, CliqueOrder, LabeledGraph};
use crate::prior::DirichletBlocks;
use crate::probs::{CondProbs, JointProbs};
use crate::table::{ContingencyTable, LevelSpec};
use crate::varset::VarSet;

/// Outcome of the cut criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutCheck {
    Cut,
    /// A component of `V \ A` whose boundary contains two non-adjacent vertices.
    NotCut {
        component: VarSet,
        pair: (usize, usize),
    },
}

impl CutCheck {
    pub fn is_cut(&self) -> bool {
        matches!(self, CutCheck::Cut)
    }
}

/// `A` is a cut iff every connected component of `V \ A` has a complete
/// boundary.
pub fn is_cut(g: &LabeledGraph, a: VarSet) -> Result<CutCheck> {
    if !a.is_subset(g.vertices()) {
        return Err(Error::InvalidGraph("cut set outside the graph".into()));
    }
    for b in g.connected_components(g.vertices().difference(a)) {
        let boundary = g.boundary(b);
        for u in boundary.iter() {
            if let Some(w) = boundary.above(u).iter().find(|&w| !g.adjacent(u, w)) {
                return Ok(CutCheck::NotCut {
                    component: b,
                    pair: (u, w),
                });
            }
        }
    }
    Ok(CutCheck::Cut)
}

/// One component `B_l` of `V \ A` with its boundary and a perfect order of
/// the cliques of `G_{B_l ∪ ∂B_l}` whose first clique contains `∂B_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutComponent {
    pub component: VarSet,
    pub boundary: VarSet,
    pub order: CliqueOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutDecomposition {
    pub a: VarSet,
    pub order_a: CliqueOrder,
    pub components: Vec<CutComponent>,
}

/// Decomposes the model along the cut `a`. Components are listed by
/// boundary (lexicographically on canonical vertex order), then by least
/// vertex.
pub fn cut_decomposition(g: &LabeledGraph, a: VarSet) -> Result<CutDecomposition> {
    if let CutCheck::NotCut { component, pair } = is_cut(g, a)? {
        return Err(Error::NotACut {
            set: format!("{{{}}}", g.names_of(a).join(",")),
            component: g.names_of(component),
            pair: (g.name(pair.0).to_string(), g.name(pair.1).to_string()),
        });
    }
    let order_a = perfect_order_within(g, a, VarSet::EMPTY)?;
    let mut components = g
        .connected_components(g.vertices().difference(a))
        .into_iter()
        .map(|b| {
            let boundary = g.boundary(b);
            let order = perfect_order_within(g, b.union(boundary), boundary)?;
            if !boundary.is_subset(order.clique(0)) {
                return Err(Error::Internal(
                    "seeded search did not put the boundary in the first clique".into(),
                ));
            }
            Ok(CutComponent {
                component: b,
                boundary,
                order,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    components.sort_by_key(|c| (c.boundary.to_vec(), c.component.first()));
    Ok(CutDecomposition {
        a,
        order_a,
        components,
    })
}

impl CutDecomposition {
    /// `(given, target)` pairs of `p^cut`: the blocks of `G_A`, then per
    /// component `(∂B_l, C^{(l)}_1 \ ∂B_l)` and `(S^{(l)}_j, R^{(l)}_j)`.
    pub fn shape(&self) -> Vec<(VarSet, VarSet)> {
        let mut out: Vec<(VarSet, VarSet)> = (0..self.order_a.len())
            .map(|l| (self.order_a.separator(l), self.order_a.residual(l)))
            .collect();
        for c in &self.components {
            out.push((c.boundary, c.order.clique(0).difference(c.boundary)));
            for j in 1..c.order.len() {
                out.push((c.order.separator(j), c.order.residual(j)));
            }
        }
        out
    }

    /// Number of block families belonging to `G_A`.
    pub fn a_families(&self) -> usize {
        self.order_a.len()
    }

    /// `p^cut` of a joint table.
    pub fn params_from_joint(&self, p: &JointProbs) -> Result<CondProbs> {
        CondProbs::from_joint_with(p, &self.shape())
    }

    pub fn check_params(&self, cp: &CondProbs) -> Result<()> {
        let want = self.shape();
        let got = cp.shape();
        if let Some(i) = (0..want.len().max(got.len())).find(|&i| want.get(i) != got.get(i)) {
            return Err(Error::ParameterMismatch(format!(
                "cut parameters: block family {} is missing or has the wrong sets",
                i + 1
            )));
        }
        Ok(())
    }

    /// Human-readable table of the decomposition.
    pub fn render_text(&self, g: &LabeledGraph) -> String {
        let set = |s: VarSet| format!("{{{}}}", g.names_of(s).join(","));
        let mut out = String::new();
        let _ = writeln!(out, "A = {}", set(self.a));
        for l in 0..self.order_a.len() {
            let _ = write!(out, "C'_{} = {}", l + 1, set(self.order_a.clique(l)));
            if l > 0 {
                let _ = write!(
                    out,
                    "  S'_{0} = {1}  R'_{0} = {2}",
                    l + 1,
                    set(self.order_a.separator(l)),
                    set(self.order_a.residual(l))
                );
            }
            out.push('\n');
        }
        let rows: Vec<[String; 5]> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let cliques: Vec<String> = c
                    .order
                    .cliques()
                    .iter()
                    .enumerate()
                    .map(|(j, &cl)| format!("C^({})_{} = {}", i + 1, j + 1, set(cl)))
                    .collect();
                [
                    (i + 1).to_string(),
                    set(c.component),
                    set(c.boundary),
                    set(c.component.union(c.boundary)),
                    cliques.join(", "),
                ]
            })
            .collect();
        let header = ["l", "B_l", "dB_l", "B_l u dB_l", "C_j^(l)"];
        let widths: Vec<usize> = (0..5)
            .map(|k| rows.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: [&str; 5]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, &w))| if k == 4 { c.to_string() } else { format!("{c:<w$}") })
                .collect();
            parts.join(" | ")
        };
        let _ = writeln!(out, "{}", line(header));
        let _ = writeln!(
            out,
            "{}",
            widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("-+-")
        );
        for r in &rows {
            let _ = writeln!(out, "{}", line([&r[0], &r[1], &r[2], &r[3], &r[4]]));
        }
        out
    }
}

/// Log-likelihood of `p^cut`: `Σ_blocks Σ n(i_given, i_target) log p(i_target | i_given)`.
pub fn cut_loglik(decomp: &CutDecomposition, cp: &CondProbs, t: &ContingencyTable) -> Result<f64> {
    decomp.check_params(cp)?;
    let spec = t.spec();
    let counts: Vec<Vec<f64>> = cp
        .families()
        .iter()
        .map(|f| {
            let mut c = vec![0.0; spec.cells(f.given) * spec.cells(f.target)];
            let mut full = vec![0; spec.len()];
            for (idx, &n) in t.counts().iter().enumerate() {
                if n > 0 {
                    spec.decode_into(spec.all(), idx, &mut full);
                    c[spec.offset(f.given, &full) * spec.cells(f.target) + spec.offset(f.target, &full)] +=
                        n as f64;
                }
            }
            c
        })
        .collect();
    Ok(cp.weighted_log_sum(|f, s, r| counts[f][s * spec.cells(cp.families()[f].target) + r]))
}

/// Dirichlet(1/2, …, 1/2) on every block of `p^cut`.
pub fn cut_reference_prior(decomp: &CutDecomposition, spec: &LevelSpec) -> DirichletBlocks {
    DirichletBlocks::reference(spec, &decomp.shape())
}
