//! The `dgm` command line.
//!
//! Exit status: 0 on success, 1 on a user error (one-line diagnosis on
//! stderr), 2 on an internal defect or a failed self-verification.

use std::fmt::Write as _;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cut::{cut_decomposition, cut_reference_prior};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::io::{read_model, read_params, read_table, to_json, CutDump, DataFormat, ParamDump, PriorDump};
use crate::likelihood::{loglik, SufficientStats};
use crate::model::Model;
use crate::oracle::{verify, VerifyTarget};
use crate::prior::{fictitious_counts, reference_prior_pcond, reference_prior_theta, DirichletBlocks};
use crate::table::ContingencyTable;
use crate::theta::ThetaKind;
use crate::transform::{convert, ParamKind, Params, DEFAULT_MARKOV_TOLERANCE};

#[derive(Debug, Parser)]
#[command(
    name = "dgm",
    version,
    about = "Log-odds parametrizations, reference priors and cuts for discrete decomposable graphical models"
)]
pub struct Cli {
    /// Model file (JSON with `variables`, `edges` and an optional `clique_order`).
    #[arg(long, short, global = true, value_name = "FILE")]
    pub model: Option<PathBuf>,

    /// Output format; dumps are always JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Tolerance for the Markov check on joint tables.
    #[arg(long, global = true, env = "DGM_TOLERANCE", default_value_t = DEFAULT_MARKOV_TOLERANCE)]
    pub tolerance: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV data file whose header names the model variables.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,

    /// `rows`: one observation per line; `counts`: a trailing `count` column.
    #[arg(long, default_value = "rows", value_parser = parse_data_format)]
    pub data_format: DataFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check decomposability and print the perfect clique order.
    Check,
    /// Convert a parameter dump to another parametrization.
    Transform {
        /// Kind of the input dump: joint, pcond, mod, cond, cliq or xi.
        #[arg(long, value_parser = parse_kind)]
        from: ParamKind,
        /// Kind to produce.
        #[arg(long, value_parser = parse_kind)]
        to: ParamKind,
        /// Parameter dump to read.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
    },
    /// Log-likelihood of a parameter point, evaluated in the given parametrization.
    Loglik {
        /// Parametrization used for the evaluation: joint, pcond, mod, cond, cliq or xi.
        #[arg(long = "as", value_parser = parse_kind)]
        kind: ParamKind,
        /// Parameter dump of any kind.
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Reference prior in the given parametrization.
    Prior {
        /// pcond, cond, cliq, mod or xi.
        #[arg(long = "as", default_value = "pcond", value_parser = parse_kind)]
        kind: ParamKind,
        /// Evaluate the log density at this parameter dump instead of dumping the prior.
        #[arg(long, value_name = "FILE")]
        at: Option<PathBuf>,
    },
    /// Posterior hyperparameters after observing a table.
    Posterior {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Draw from the reference prior, or from the posterior when data are given.
    Sample {
        /// Number of draws.
        #[arg(long)]
        n: usize,
        /// Random seed; draws are identical for equal seeds.
        #[arg(long)]
        seed: u64,
        /// Parametrization of the emitted draws.
        #[arg(long = "as", default_value = "pcond", value_parser = parse_kind)]
        kind: ParamKind,
        /// Optional CSV data for posterior draws.
        #[arg(long, value_name = "FILE")]
        data: Option<PathBuf>,
        #[arg(long, default_value = "rows", value_parser = parse_data_format)]
        data_format: DataFormat,
    },
    /// Decompose the model along a cut.
    Cut {
        /// Comma-separated variable names of the cut.
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<String>,
        /// Also print the reference-prior block inventory.
        #[arg(long)]
        prior: bool,
    },
    /// Cross-check every transform against the brute-force oracle.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Built-in fixture name (chain, six, eleven) or a model file; default runs the full suite.
        #[arg(long)]
        graph: Option<String>,
    },
}

fn parse_kind(s: &str) -> std::result::Result<ParamKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_data_format(s: &str) -> std::result::Result<DataFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a successful command produced.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

fn model_of(cli: &Cli) -> Result<Model> {
    let path = cli.model.as_deref().ok_or_else(|| Error::Format {
        path: "--model".into(),
        message: "this command needs a model file".into(),
    })?;
    read_model(path)
}

fn table_of(model: &Model, data: &Path, format: DataFormat) -> Result<ContingencyTable> {
    read_table(model, data, format)
}

fn theta_kind(kind: ParamKind, what: &str) -> Result<Option<ThetaKind>> {
    match kind {
        ParamKind::PCond => Ok(None),
        ParamKind::Theta(k) => Ok(Some(k)),
        ParamKind::Joint => Err(Error::ParameterMismatch(format!(
            "{what} is defined for pcond, mod, cond, cliq and xi"
        ))),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    to_json(v)
}

fn sig(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let text = cli.format == Some(OutputFormat::Text);
    let as_json = cli.format == Some(OutputFormat::Json);
    match &cli.command {
        Command::Check => {
            let model = model_of(cli)?;
            let g = model.graph();
            let order = model.order();
            if as_json {
                #[derive(Serialize)]
                struct CheckDump {
                    decomposable: bool,
                    cliques: Vec<Vec<String>>,
                    separators: Vec<Vec<String>>,
                    residuals: Vec<Vec<String>>,
                }
                let names = |f: &dyn Fn(usize) -> crate::varset::VarSet| {
                    (0..order.len()).map(|l| g.names_of(f(l))).collect()
                };
                return json(&CheckDump {
                    decomposable: true,
                    cliques: names(&|l| order.clique(l)),
                    separators: names(&|l| order.separator(l)),
                    residuals: names(&|l| order.residual(l)),
                })
                .map(Outcome::ok);
            }
            let mut out = String::from("decomposable\n");
            for l in 0..order.len() {
                let _ = write!(out, "C{} = {}", l + 1, model.set_name(order.clique(l)));
                if l > 0 {
                    let _ = write!(
                        out,
                        "  S{0} = {1}  R{0} = {2}",
                        l + 1,
                        model.set_name(order.separator(l)),
                        model.set_name(order.residual(l))
                    );
                }
                out.push('\n');
            }
            Ok(Outcome::ok(out))
        }
        Command::Transform { from, to, input } => {
            let model = model_of(cli)?;
            let params = read_params(&model, input)?;
            if params.kind() != *from {
                return Err(Error::Format {
                    path: input.display().to_string(),
                    message: format!("dump holds {} parameters, not {from}", params.kind()),
                });
            }
            let out = convert(&model, &params, *to, cli.tolerance)?;
            json(&ParamDump::from_params(&model, &out)).map(Outcome::ok)
        }
        Command::Loglik { kind, params, data } => {
            let model = model_of(cli)?;
            let point = read_params(&model, params)?;
            let point = convert(&model, &point, *kind, cli.tolerance)?;
            let t = table_of(&model, &data.data, data.data_format)?;
            let stats = SufficientStats::from_table(&model, &t)?.to_f64();
            let value = loglik(&model, &point, &stats)?;
            if text {
                return Ok(Outcome::ok(format!("{}\n", sig(value))));
            }
            #[derive(Serialize)]
            struct LoglikDump {
                parametrization: String,
                total: u64,
                loglik: f64,
            }
            json(&LoglikDump {
                parametrization: kind.to_string(),
                total: t.total(),
                loglik: value,
            })
            .map(Outcome::ok)
        }
        Command::Prior { kind, at } => {
            let model = model_of(cli)?;
            let tk = theta_kind(*kind, "the reference prior")?;
            let blocks = reference_prior_pcond(&model);
            if let Some(path) = at {
                let point = convert(&model, &read_params(&model, path)?, *kind, cli.tolerance)?;
                let value = match (&point, tk) {
                    (Params::PCond(cp), None) => blocks.log_density(cp)?,
                    (Params::Theta(t), Some(k)) => reference_prior_theta(&model, k).log_density(&model, t)?,
                    _ => return Err(Error::Internal("conversion returned the wrong kind".into())),
                };
                return Ok(Outcome::ok(if as_json {
                    json(&serde_json::json!({ "parametrization": kind.to_string(), "log_density": value }))?
                } else {
                    format!("{}\n", sig(value))
                }));
            }
            let mut dump = PriorDump::new(model.graph(), model.spec(), &kind.to_string(), &blocks);
            if let Some(k @ (ThetaKind::Cond | ThetaKind::Cliq)) = tk {
                dump = dump.with_fictitious(&model, &fictitious_counts(&model, k)?);
            }
            json(&dump).map(Outcome::ok)
        }
        Command::Posterior { data } => {
            let model = model_of(cli)?;
            let t = table_of(&model, &data.data, data.data_format)?;
            let post = reference_prior_pcond(&model).posterior(&t)?;
            json(&PriorDump::new(model.graph(), model.spec(), "pcond", &post)).map(Outcome::ok)
        }
        Command::Sample {
            n,
            seed,
            kind,
            data,
            data_format,
        } => {
            let model = model_of(cli)?;
            let mut blocks: DirichletBlocks = reference_prior_pcond(&model);
            if let Some(path) = data {
                blocks = blocks.posterior(&table_of(&model, path, *data_format)?)?;
            }
            let draws = blocks
                .sample(*seed, *n)
                .into_iter()
                .map(|cp| {
                    convert(&model, &Params::PCond(cp), *kind, cli.tolerance)
                        .map(|p| ParamDump::from_params(&model, &p))
                })
                .collect::<Result<Vec<_>>>()?;
            #[derive(Serialize)]
            struct SampleDump {
                seed: u64,
                parametrization: String,
                draws: Vec<ParamDump>,
            }
            json(&SampleDump {
                seed: *seed,
                parametrization: kind.to_string(),
                draws,
            })
            .map(Outcome::ok)
        }
        Command::Cut { set, prior } => {
            let model = model_of(cli)?;
            let g = model.graph();
            let a = g.set_of(set)?;
            let d = cut_decomposition(g, a)?;
            let blocks = prior.then(|| cut_reference_prior(&d, model.spec()));
            if as_json {
                #[derive(Serialize)]
                struct CutOut {
                    #[serde(flatten)]
                    cut: CutDump,
                    #[serde(skip_serializing_if = "Option::is_none")]
                    prior: Option<PriorDump>,
                }
                return json(&CutOut {
                    cut: CutDump::new(g, &d),
                    prior: blocks.map(|b| PriorDump::new(g, model.spec(), "cut", &b)),
                })
                .map(Outcome::ok);
            }
            let mut out = d.render_text(g);
            if let Some(b) = blocks {
                let dump = PriorDump::new(g, model.spec(), "cut", &b);
                let _ = writeln!(out, "\nreference prior: {} Dirichlet blocks", dump.blocks.len());
                for blk in &dump.blocks {
                    let _ = writeln!(out, "  {}  size {}", blk.label, blk.alpha.len());
                }
            }
            Ok(Outcome::ok(out))
        }
        Command::Verify { seed, graph } => {
            let target = match graph {
                None => VerifyTarget::Builtin,
                Some(name) if fixtures::text(name).is_some() => {
                    VerifyTarget::Model(name.clone(), Box::new(fixtures::load(name)?))
                }
                Some(path) => VerifyTarget::Model(path.clone(), Box::new(read_model(Path::new(path))?)),
            };
            let report = verify(&target, *seed)?;
            let stdout = if as_json { json(&report)? } else { report.render_text() };
            Ok(Outcome {
                stdout,
                code: if report.all_passed() { 0 } else { 2 },
            })
        }
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = catch_unwind(AssertUnwindSafe(|| execute(&cli)));
    match result {
        Ok(Ok(outcome)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            outcome.code
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
        Err(_) => {
            eprintln!("error: internal defect (panic)");
            2
        }
    }
}
