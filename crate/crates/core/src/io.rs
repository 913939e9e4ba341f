//! File formats: model descriptions, data tables and JSON dumps.
//!
//! Every real number written by this module carries 17 significant digits,
//! so dumps read back to the identical `f64`.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::cut::CutDecomposition;
use crate::error::{Error, Result};
use crate::graph::{CliqueOrder, LabeledGraph};
use crate::model::Model;
use crate::prior::{DirichletBlocks, FictitiousCounts};
use crate::probs::{BlockFamily, CondProbs, JointProbs};
use crate::table::{Cell, ContingencyTable, Level, LevelSpec};
use crate::theta::{ThetaKind, ThetaMap};
use crate::transform::Params;
use crate::varset::VarSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub levels: usize,
}

/// On-disk model description. Variable order is the canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub variables: Vec<VariableDecl>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clique_order: Option<Vec<Vec<String>>>,
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let g = model.graph();
        ModelFile {
            variables: g
                .names()
                .iter()
                .enumerate()
                .map(|(v, name)| VariableDecl {
                    name: name.clone(),
                    levels: model.spec().levels(v),
                })
                .collect(),
            edges: g
                .edges()
                .into_iter()
                .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
                .collect(),
            clique_order: Some(model.order().cliques().iter().map(|&c| g.names_of(c)).collect()),
        }
    }

    /// Builds the model; a given clique order replaces the computed one.
    pub fn into_model(self) -> Result<Model> {
        let names: Vec<String> = self.variables.iter().map(|v| v.name.clone()).collect();
        let graph = LabeledGraph::new(&names, &self.edges)?;
        let spec = LevelSpec::new(self.variables.iter().map(|v| v.levels).collect())?;
        match self.clique_order {
            None => Model::new(graph, spec),
            Some(order) => {
                let cliques = order
                    .iter()
                    .map(|c| graph.set_of(c))
                    .collect::<Result<Vec<VarSet>>>()?;
                let order = CliqueOrder::new(&graph, graph.vertices(), cliques)?;
                Model::with_order(graph, spec, order)
            }
        }
    }
}

fn format_error(origin: &str, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: origin.to_string(),
        message: e.to_string(),
    }
}

fn json_error(origin: &str, e: serde_json::Error) -> Error {
    Error::Format {
        path: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| format_error(&path.display().to_string(), e))
}

pub fn parse_model(text: &str, origin: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| json_error(origin, e))?;
    file.into_model().map_err(|e| match e {
        Error::Internal(_) => e,
        other => format_error(origin, other),
    })
}

pub fn read_model(path: &Path) -> Result<Model> {
    parse_model(&read_text(path)?, &path.display().to_string())
}

/// Layout of a CSV data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    /// One observation per row.
    #[default]
    Rows,
    /// One cell per row with a trailing `count` column.
    Counts,
}

impl std::str::FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" => Ok(DataFormat::Rows),
            "counts" => Ok(DataFormat::Counts),
            other => Err(Error::Format {
                path: "--format".into(),
                message: format!("unknown data format `{other}` (expected rows or counts)"),
            }),
        }
    }
}

/// Parses CSV data whose header names the model's variables in any order.
pub fn parse_table(model: &Model, text: &str, origin: &str, format: DataFormat) -> Result<ContingencyTable> {
    let g = model.graph();
    let spec = model.spec();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format_error(origin, e))?.clone();
    let n_value_cols = match format {
        DataFormat::Rows => header.len(),
        DataFormat::Counts => {
            if header.iter().next_back() != Some("count") {
                return Err(format_error(origin, "last column of a counts file must be `count`"));
            }
            header.len() - 1
        }
    };
    let mut column_var = Vec::with_capacity(n_value_cols);
    let mut seen = VarSet::EMPTY;
    for name in header.iter().take(n_value_cols) {
        let v = g
            .index_of(name)
            .map_err(|_| format_error(&format!("{origin}:1"), format!("unknown variable `{name}` in header")))?;
        if seen.contains(v) {
            return Err(format_error(&format!("{origin}:1"), format!("variable `{name}` repeated in header")));
        }
        seen = seen.with(v);
        column_var.push(v);
    }
    if seen != g.vertices() {
        let missing = g.names_of(g.vertices().difference(seen)).join(", ");
        return Err(format_error(&format!("{origin}:1"), format!("header lacks variables: {missing}")));
    }
    let mut counts = vec![0u64; spec.cells(spec.all())];
    let mut full: Vec<Level> = vec![0; spec.len()];
    for record in reader.records() {
        let record = record.map_err(|e| format_error(origin, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let at = format!("{origin}:{line}");
        if record.len() != header.len() {
            return Err(format_error(
                &at,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (k, &v) in column_var.iter().enumerate() {
            let field = &record[k];
            let level: Level = field
                .parse()
                .map_err(|_| format_error(&at, format!("`{field}` is not a level index for `{}`", g.name(v))))?;
            if level as usize >= spec.levels(v) {
                return Err(format_error(
                    &at,
                    format!("level {level} out of range for `{}` ({} levels)", g.name(v), spec.levels(v)),
                ));
            }
            full[v] = level;
        }
        let n = match format {
            DataFormat::Rows => 1,
            DataFormat::Counts => {
                let field = &record[n_value_cols];
                field
                    .parse::<u64>()
                    .map_err(|_| format_error(&at, format!("`{field}` is not a nonnegative count")))?
            }
        };
        let idx = spec.offset(spec.all(), &full);
        counts[idx] = counts[idx]
            .checked_add(n)
            .ok_or_else(|| format_error(&at, "count overflow"))?;
    }
    ContingencyTable::from_counts(spec.clone(), counts)
}

pub fn read_table(model: &Model, path: &Path, format: DataFormat) -> Result<ContingencyTable> {
    parse_table(model, &read_text(path)?, &path.display().to_string(), format)
}

/// A marginal cell named by variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDump {
    pub set: Vec<String>,
    pub cell: Vec<Level>,
}

impl CellDump {
    fn from_cell(g: &LabeledGraph, cell: &Cell) -> Self {
        CellDump {
            set: g.names_of(cell.set),
            cell: cell.levels.clone(),
        }
    }

    fn to_cell(&self, model: &Model) -> Result<Cell> {
        let g = model.graph();
        let mut pairs = self
            .set
            .iter()
            .map(|n| g.index_of(n))
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .zip(self.cell.iter().copied())
            .collect::<Vec<_>>();
        if pairs.len() != self.set.len() || self.set.len() != self.cell.len() {
            return Err(Error::InvalidCell(format!(
                "{} levels given for {} variables",
                self.cell.len(),
                self.set.len()
            )));
        }
        pairs.sort_unstable();
        let set = VarSet::from_iter(pairs.iter().map(|p| p.0));
        if set.len() != pairs.len() {
            return Err(Error::InvalidCell("repeated variable in cell".into()));
        }
        let cell = Cell::new(set, pairs.into_iter().map(|p| p.1).collect())?;
        model.spec().check_cell(&cell)?;
        Ok(cell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDump {
    pub set: Vec<String>,
    pub cell: Vec<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<CellDump>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDump {
    pub given: CellDump,
    pub target: Vec<String>,
    /// Probabilities over the target table, last variable fastest.
    pub probs: Vec<f64>,
}

/// Any parameter point, tagged by its kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamDump {
    Mod { entries: Vec<EntryDump> },
    Cond { entries: Vec<EntryDump> },
    Cliq { entries: Vec<EntryDump> },
    Xi { entries: Vec<EntryDump> },
    Pcond { blocks: Vec<BlockDump> },
    Joint { variables: Vec<String>, probs: Vec<f64> },
}

fn theta_entries(model: &Model, theta: &ThetaMap) -> Vec<EntryDump> {
    let g = model.graph();
    let sliced = matches!(theta.kind(), ThetaKind::Cond | ThetaKind::Xi);
    theta
        .iter()
        .map(|(cell, value)| match ThetaMap::slice_view(model, &cell) {
            Some((l, slice, residual)) if sliced && l > 0 => EntryDump {
                set: g.names_of(residual.set),
                cell: residual.levels,
                slice: Some(CellDump::from_cell(g, &slice)),
                value,
            },
            _ => EntryDump {
                set: g.names_of(cell.set),
                cell: cell.levels,
                slice: None,
                value,
            },
        })
        .collect()
}

fn family_blocks(g: &LabeledGraph, spec: &LevelSpec, families: &[BlockFamily]) -> Vec<BlockDump> {
    families
        .iter()
        .flat_map(|f| {
            spec.assignments(f.given).zip(&f.rows).map(move |(full, row)| BlockDump {
                given: CellDump::from_cell(g, &Cell::from_full(f.given, &full)),
                target: g.names_of(f.target),
                probs: row.clone(),
            })
        })
        .collect()
}

impl ParamDump {
    pub fn from_params(model: &Model, params: &Params) -> Self {
        let g = model.graph();
        match params {
            Params::Joint(p) => ParamDump::Joint {
                variables: g.names().to_vec(),
                probs: p.probs().to_vec(),
            },
            Params::PCond(cp) => ParamDump::Pcond {
                blocks: family_blocks(g, model.spec(), cp.families()),
            },
            Params::Theta(t) => {
                let entries = theta_entries(model, t);
                match t.kind() {
                    ThetaKind::Mod => ParamDump::Mod { entries },
                    ThetaKind::Cond => ParamDump::Cond { entries },
                    ThetaKind::Cliq => ParamDump::Cliq { entries },
                    ThetaKind::Xi => ParamDump::Xi { entries },
                }
            }
        }
    }

    /// Validates the dump against the model and converts it.
    pub fn into_params(self, model: &Model) -> Result<Params> {
        let (kind, entries) = match self {
            ParamDump::Mod { entries } => (ThetaKind::Mod, entries),
            ParamDump::Cond { entries } => (ThetaKind::Cond, entries),
            ParamDump::Cliq { entries } => (ThetaKind::Cliq, entries),
            ParamDump::Xi { entries } => (ThetaKind::Xi, entries),
            ParamDump::Pcond { blocks } => return pcond_from_blocks(model, blocks).map(Params::PCond),
            ParamDump::Joint { variables, probs } => {
                if variables != model.graph().names() {
                    return Err(Error::ParameterMismatch(
                        "joint table variables differ from the model's".into(),
                    ));
                }
                return JointProbs::new(model.spec().clone(), probs).map(Params::Joint);
            }
        };
        let layout = model.layout();
        let mut values = vec![f64::NAN; layout.len()];
        for e in entries {
            let residual = CellDump {
                set: e.set,
                cell: e.cell,
            }
            .to_cell(model)?;
            let cell = match &e.slice {
                Some(s) => {
                    let slice = s.to_cell(model)?;
                    if slice.set.intersects(residual.set) {
                        return Err(Error::InvalidCell("slice and entry share a variable".into()));
                    }
                    ThetaMap::from_slice_view(&slice, &residual)
                }
                None => residual,
            };
            let idx = layout.index(&cell).ok_or_else(|| {
                Error::ParameterMismatch(format!(
                    "{} is not a parameter of this model",
                    crate::transform::describe_cell(model, &cell)
                ))
            })?;
            if !values[idx].is_nan() {
                return Err(Error::ParameterMismatch(format!(
                    "{} given twice",
                    crate::transform::describe_cell(model, &cell)
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::ParameterMismatch("non-finite parameter value".into()));
            }
            values[idx] = e.value;
        }
        if let Some(idx) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::ParameterMismatch(format!(
                "missing {}",
                crate::transform::describe_cell(model, &layout.cell(idx))
            )));
        }
        ThetaMap::from_values(kind, model, values).map(Params::Theta)
    }
}

fn pcond_from_blocks(model: &Model, blocks: Vec<BlockDump>) -> Result<CondProbs> {
    let spec = model.spec();
    let mut families: Vec<BlockFamily> = model
        .families()
        .iter()
        .map(|&(s, r)| BlockFamily::filled(spec, s, r, f64::NAN))
        .collect();
    for b in blocks {
        let given = b.given.to_cell(model)?;
        let target = model.graph().set_of(&b.target)?;
        let f = families
            .iter_mut()
            .find(|f| f.given == given.set && f.target == target)
            .ok_or_else(|| {
                Error::ParameterMismatch(format!(
                    "no block family for {} given {}",
                    model.set_name(target),
                    model.set_name(given.set)
                ))
            })?;
        let s = spec.offset(given.set, &given.to_full(spec.len()));
        if b.probs.len() != spec.cells(target) {
            return Err(Error::ParameterMismatch(format!(
                "block for {} has {} probabilities, expected {}",
                model.set_name(target),
                b.probs.len(),
                spec.cells(target)
            )));
        }
        if !f.rows[s][0].is_nan() {
            return Err(Error::ParameterMismatch(format!(
                "block for {} given a slice of {} repeated",
                model.set_name(target),
                model.set_name(given.set)
            )));
        }
        f.rows[s] = b.probs;
    }
    if let Some(f) = families.iter().find(|f| f.rows.iter().any(|r| r[0].is_nan())) {
        return Err(Error::ParameterMismatch(format!(
            "missing blocks for {} given {}",
            model.set_name(f.target),
            model.set_name(f.given)
        )));
    }
    CondProbs::new(spec, families)
}

pub fn parse_params(model: &Model, text: &str, origin: &str) -> Result<Params> {
    let dump: ParamDump = serde_json::from_str(text).map_err(|e| json_error(origin, e))?;
    dump.into_params(model).map_err(|e| match e {
        Error::Internal(_) => e,
        other => format_error(origin, other),
    })
}

pub fn read_params(model: &Model, path: &Path) -> Result<Params> {
    parse_params(model, &read_text(path)?, &path.display().to_string())
}

/// `x` as an exact `"k/2"` string when `2x` is an integer.
pub fn half_integer(x: f64) -> Option<String> {
    let twice = 2.0 * x;
    (twice.fract() == 0.0 && twice.abs() < 9.0e15).then(|| {
        let k = twice as i64;
        if k % 2 == 0 {
            (k / 2).to_string()
        } else {
            format!("{k}/2")
        }
    })
}

fn doubled_str(k: u64) -> String {
    if k.is_multiple_of(2) {
        (k / 2).to_string()
    } else {
        format!("{k}/2")
    }
}

/// A hyperparameter: exact half-integer rational when possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hyper {
    Rational(String),
    Real(f64),
}

impl Hyper {
    fn of(x: f64) -> Self {
        half_integer(x).map_or(Hyper::Real(x), Hyper::Rational)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorBlockDump {
    pub label: String,
    pub given: CellDump,
    pub target: Vec<String>,
    /// Target cells, last variable fastest.
    pub cells: Vec<Vec<Level>>,
    pub alpha: Vec<Hyper>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FictitiousEntry {
    pub set: Vec<String>,
    pub cell: Vec<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<CellDump>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FictitiousDump {
    pub tag: String,
    pub total: String,
    pub entries: Vec<FictitiousEntry>,
    /// `ñ(i_{S_l})` for θ^cond, `ñ(j_F)` for θ^cliq.
    pub slice_totals: Vec<FictitiousEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDump {
    pub param: String,
    /// `Σ_blocks log B(α)`, the log normalizing constant shared by all parametrizations.
    pub log_normalizer: f64,
    pub blocks: Vec<PriorBlockDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fictitious_counts: Option<FictitiousDump>,
}

fn block_label(g: &LabeledGraph, given: &Cell, target: VarSet) -> String {
    let t = format!("{{{}}}", g.names_of(target).join(","));
    if given.set.is_empty() {
        t
    } else {
        let s: Vec<String> = given
            .set
            .iter()
            .zip(&given.levels)
            .map(|(v, l)| format!("{}={l}", g.name(v)))
            .collect();
        format!("{t} | {}", s.join(","))
    }
}

impl PriorDump {
    pub fn new(g: &LabeledGraph, spec: &LevelSpec, param: &str, prior: &DirichletBlocks) -> Self {
        let blocks = prior
            .families()
            .iter()
            .flat_map(|f| {
                spec.assignments(f.given).zip(&f.rows).map(move |(full, alpha)| {
                    let given = Cell::from_full(f.given, &full);
                    PriorBlockDump {
                        label: block_label(g, &given, f.target),
                        given: CellDump::from_cell(g, &given),
                        target: g.names_of(f.target),
                        cells: spec
                            .assignments(f.target)
                            .map(|c| Cell::from_full(f.target, &c).levels)
                            .collect(),
                        alpha: alpha.iter().map(|&a| Hyper::of(a)).collect(),
                    }
                })
            })
            .collect();
        PriorDump {
            param: param.to_string(),
            log_normalizer: prior.log_normalizer(),
            blocks,
            fictitious_counts: None,
        }
    }

    pub fn with_fictitious(mut self, model: &Model, fc: &FictitiousCounts) -> Self {
        self.fictitious_counts = Some(fictitious_dump(model, fc));
        self
    }
}

fn fictitious_dump(model: &Model, fc: &FictitiousCounts) -> FictitiousDump {
    let g = model.graph();
    let spec = model.spec();
    let stats = fc.doubled();
    let cond = fc.tag() == ThetaKind::Cond;
    let mut entries = Vec::new();
    for (idx, cell) in model.layout().cells().enumerate() {
        let (l, pos) = model.block_coords()[idx];
        let (slice, set_cell, value) = match ThetaMap::slice_view(model, &cell) {
            Some((l2, slice, residual)) if cond && l2 > 0 => {
                (Some(CellDump::from_cell(g, &slice)), residual, stats.families[l].slice[pos])
            }
            _ => (None, cell, stats.marginal[idx]),
        };
        entries.push(FictitiousEntry {
            set: g.names_of(set_cell.set),
            cell: set_cell.levels,
            slice,
            value: doubled_str(value),
        });
    }
    let mut slice_totals = Vec::new();
    for (l, (s, r)) in model.families().into_iter().enumerate().skip(1) {
        let fam = &stats.families[l];
        let nr = spec.cells(r);
        for (k, full) in spec.assignments(s).enumerate() {
            let c = Cell::from_full(s, &full);
            let (cell, value) = if cond {
                (c, fam.slice[k * nr])
            } else {
                let f = c.support();
                (c.restrict(f), fam.sep[k])
            };
            slice_totals.push(FictitiousEntry {
                set: g.names_of(cell.set),
                cell: cell.levels,
                slice: None,
                value: doubled_str(value),
            });
        }
    }
    FictitiousDump {
        tag: fc.tag().to_string(),
        total: doubled_str(stats.total),
        entries,
        slice_totals,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutComponentDump {
    pub component: Vec<String>,
    pub boundary: Vec<String>,
    pub cliques: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutDump {
    pub a: Vec<String>,
    pub cliques_a: Vec<Vec<String>>,
    pub components: Vec<CutComponentDump>,
}

impl CutDump {
    pub fn new(g: &LabeledGraph, d: &CutDecomposition) -> Self {
        let names = |o: &CliqueOrder| o.cliques().iter().map(|&c| g.names_of(c)).collect();
        CutDump {
            a: g.names_of(d.a),
            cliques_a: names(&d.order_a),
            components: d
                .components
                .iter()
                .map(|c| CutComponentDump {
                    component: g.names_of(c.component),
                    boundary: g.names_of(c.boundary),
                    cliques: names(&c.order),
                })
                .collect(),
        }
    }
}

/// Pretty JSON with every float written as `d.dddddddddddddddde±x`.
struct Sig17 {
    inner: PrettyFormatter<'static>,
}

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes to pretty JSON with 17 significant digits per float.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        Sig17 {
            inner: PrettyFormatter::new(),
        },
    );
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    let mut s = String::from_utf8(out).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cond_probs, random_theta};
    use crate::transform::{convert, ParamKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CHAIN: &str = r#"{
        "variables": [{"name": "a", "levels": 2}, {"name": "b", "levels": 3}, {"name": "c", "levels": 2}],
        "edges": [["a", "b"], ["b", "c"]]
    }"#;

    #[test]
    fn model_round_trip() {
        let m = parse_model(CHAIN, "chain.json").unwrap();
        assert_eq!(m.order().len(), 2);
        let text = to_json(&ModelFile::from_model(&m)).unwrap();
        let m2 = parse_model(&text, "again").unwrap();
        assert_eq!(m2.order(), m.order());
        assert_eq!(m2.spec(), m.spec());
    }

    #[test]
    fn malformed_model_names_location() {
        let err = parse_model("{\"variables\": [}", "bad.json").unwrap_err();
        match err {
            Error::Format { path, .. } => assert!(path.starts_with("bad.json:1:")),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_model(r#"{"variables":[{"name":"a","levels":2}],"edges":[["a","z"]]}"#, "m.json")
            .unwrap_err();
        assert!(err.to_string().contains("m.json"));
    }

    #[test]
    fn csv_rows_and_counts_agree() {
        let m = parse_model(CHAIN, "chain.json").unwrap();
        let rows = parse_table(&m, "c,b,a\n0,2,1\n0,2,1\n1,0,0\n", "rows.csv", DataFormat::Rows).unwrap();
        let counts = parse_table(&m, "a,b,c,count\n1,2,0,2\n0,0,1,1\n", "n.csv", DataFormat::Counts).unwrap();
        assert_eq!(rows, counts);
        assert_eq!(rows.total(), 3);
        let err = parse_table(&m, "a,b,c\n0,3,0\n", "x.csv", DataFormat::Rows).unwrap_err();
        assert!(err.to_string().starts_with("x.csv:2"), "{err}");
    }

    #[test]
    fn dumps_read_back_exactly() {
        let m = parse_model(CHAIN, "chain.json").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cp = random_cond_probs(&mut rng, m.spec(), &m.families());
        let base = Params::PCond(cp);
        for kind in ["joint", "pcond", "mod", "cond", "cliq", "xi"] {
            let kind: ParamKind = kind.parse().unwrap();
            let p = convert(&m, &base, kind, 1e-8).unwrap();
            let text = to_json(&ParamDump::from_params(&m, &p)).unwrap();
            let back = parse_params(&m, &text, "dump.json").unwrap();
            assert_eq!(back, p, "{kind}");
        }
        let t = random_theta(&mut rng, &m, ThetaKind::Cond, 1.0);
        let mut dump = ParamDump::from_params(&m, &Params::Theta(t));
        if let ParamDump::Cond { entries } = &mut dump {
            entries.pop();
        }
        let err = dump.into_params(&m).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }

    #[test]
    fn half_integers_are_exact() {
        assert_eq!(half_integer(0.5).as_deref(), Some("1/2"));
        assert_eq!(half_integer(3.5).as_deref(), Some("7/2"));
        assert_eq!(half_integer(2.0).as_deref(), Some("2"));
        assert_eq!(half_integer(0.3), None);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&vec![0.1f64]).unwrap();
        assert!(s.contains("1.0000000000000001e-1") || s.contains("1.0000000000000000e-1"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1]);
    }
}
