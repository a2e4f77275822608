//! Command-line front end.
//!
//! Every subcommand writes `<out>/<subcommand>.json` (and a CSV where there
//! is a table to plot) through an atomic rename. The JSON embeds the
//! subcommand's configuration and the crate version, and contains nothing
//! that varies between runs, so the same arguments and seed give
//! byte-identical files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 solver failure or a failed verification.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::adaptation::{self, AdaptationConfig, ClassSpec};
use crate::ball::AmbiguityBall;
use crate::bounds::{self, BoundReport, CorollaryParams};
use crate::casebook::{self, IllustrativeInstance};
use crate::dataset::{load_dataset, write_atomic, Schema};
use crate::dual::local_worst_case_risk;
use crate::erm::{fixed_lambda_erm, minimax_erm, ordinary_erm, HypothesisClass};
use crate::error::{Error, Result};
use crate::space::{EmpiricalDistribution, InstanceSpace, MetricKind, Point};
use crate::transport::{primal_worst_case_risk, wasserstein};
use crate::verify;

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "WDRO_OUT";

#[derive(Debug, Parser)]
#[command(name = "wdro", version, about = "Local minimax risk over Wasserstein balls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory for JSON and CSV results.
    #[arg(long, global = true, env = OUT_ENV, default_value = "wdro-out")]
    pub out: PathBuf,

    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W_p distance between two datasets, with an optimal coupling.
    Wass(WassArgs),
    /// Worst-case risk of each class member through the dual (and the
    /// primal LP with --primal).
    WorstCase(RiskArgs),
    /// Ordinary empirical risk minimization.
    Erm(ErmArgs),
    /// Local minimax ERM, or the fixed-lambda relaxation with --lambda-grid.
    MinimaxErm(RiskArgs),
    /// Evaluate a generalization or excess-risk bound.
    Bounds(BoundsArgs),
    /// The two-hypothesis step example: closed forms and Monte Carlo.
    Casebook(CasebookArgs),
    /// Domain adaptation from a TOML scenario file.
    Adapt(AdaptArgs),
    /// Randomized self-checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    /// l_p product (features only when unlabeled).
    Lp,
    Euclidean,
    Interval,
    Classification,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SpaceArgs {
    #[arg(long, value_enum, default_value = "lp")]
    pub metric: MetricArg,
    /// The last data column is a label.
    #[arg(long)]
    pub labeled: bool,
    /// Feature radius; defaults to the largest feature norm in the data.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Label bound; defaults to the largest |label| in the data.
    #[arg(long)]
    pub label_bound: Option<f64>,
    /// Interval ends; default to the data range.
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub high: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct WassArgs {
    #[arg(long = "p", default_value_t = 1.0)]
    pub p: f64,
    pub a: PathBuf,
    pub b: PathBuf,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RiskArgs {
    pub data: PathBuf,
    #[arg(long = "p", default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// `casebook:<alpha>` or `file:<class.toml>`.
    #[arg(long)]
    pub class: String,
    /// `support`, `grid:<N>` or `file:<path>`.
    #[arg(long, default_value = "support")]
    pub candidates: String,
    /// Also solve the primal transport LP.
    #[arg(long)]
    pub primal: bool,
    /// Fixed-lambda relaxation over these values (minimax-erm only).
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Vec<f64>,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ErmArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub class: String,
    #[command(flatten)]
    pub space: SpaceArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Lipschitz class excess risk.
    Lipschitz,
    /// Anchored class excess risk.
    Anchored,
    /// Rademacher complexity of the surrogate class.
    Rademacher,
    /// Target-domain excess risk after adaptation.
    Adaptation,
    /// Sigmoid network class constants.
    Network,
    /// Gaussian RKHS class constants.
    Rkhs,
    /// `2 L rho`.
    Sandwich,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub comp: Option<f64>,
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub diam: Option<f64>,
    /// Loss bound `M`.
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "p", default_value_t = 1.0)]
    pub p: f64,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// RKHS ball radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// `sup |s|` of the network nonlinearity.
    #[arg(long, default_value_t = 1.0)]
    pub s_sup: f64,
    /// `sup |s'|` of the network nonlinearity.
    #[arg(long, default_value_t = 1.0)]
    pub s_prime_sup: f64,
    /// `<n|rho|delta>=v1,v2,...`: also write one CSV row per value.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CasebookArgs {
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    #[arg(long = "p", default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Radii; several values give several CSV rows.
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = casebook::POPULATION_GRID)]
    pub grid: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AdaptArgs {
    /// TOML scenario file; the built-in shift-trap scenario when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of paired seeds; more than one also writes a CSV summary.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Duality,
    Bracket,
    Pushforward,
    Degeneration,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Wass(a) => cmd_wass(cli, a),
        Command::WorstCase(a) => cmd_worst_case(cli, a),
        Command::Erm(a) => cmd_erm(cli, a),
        Command::MinimaxErm(a) => cmd_minimax(cli, a),
        Command::Bounds(a) => cmd_bounds(cli, a),
        Command::Casebook(a) => cmd_casebook(cli, a),
        Command::Adapt(a) => cmd_adapt(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn emit(cli: &Cli, name: &str, config: &impl Serialize, result: impl Serialize) -> Result<()> {
    let doc = json!({
        "tool": "wdro",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": cli.seed,
        "config": config,
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_atomic(&cli.out.join(format!("{name}.json")), text.as_bytes())
}

fn emit_csv(cli: &Cli, name: &str, body: &str) -> Result<()> {
    write_atomic(&cli.out.join(format!("{name}.csv")), body.as_bytes())
}

/// Number of feature columns in a dataset file: all numeric columns, minus
/// the label when `labeled`, minus a `weight` column named in the header.
fn sniff_dimension(path: &Path, labeled: bool) -> Result<usize> {
    let text = read(path)?;
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or(Error::EmptyDataset)?;
    let cols: Vec<&str> = first.split(',').map(str::trim).collect();
    let numeric = cols.iter().all(|c| c.parse::<f64>().is_ok());
    let mut width = cols.len();
    if !numeric && cols.last().is_some_and(|c| c.eq_ignore_ascii_case("weight")) {
        width -= 1;
    }
    let d = width.saturating_sub(usize::from(labeled));
    if d == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: "no feature columns".into(),
        });
    }
    Ok(d)
}

/// Reads a file, naming it in the error.
fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

const LOOSE: f64 = 1e150;

fn schema(args: &SpaceArgs) -> Schema {
    if args.labeled || args.metric == MetricArg::Classification {
        Schema::Labeled
    } else {
        Schema::Unlabeled
    }
}

fn loose_space(args: &SpaceArgs, d: usize, p: f64) -> Result<InstanceSpace> {
    space_with(args, d, p, LOOSE, LOOSE, -LOOSE, LOOSE)
}

fn space_with(args: &SpaceArgs, d: usize, p: f64, r0: f64, b: f64, low: f64, high: f64) -> Result<InstanceSpace> {
    let labeled = schema(args) == Schema::Labeled;
    match args.metric {
        MetricArg::Interval => {
            if labeled || d != 1 {
                return Err(Error::invalid("the interval metric takes one unlabeled column"));
            }
            InstanceSpace::interval(low, high)
        }
        MetricArg::Classification => InstanceSpace::classification(d, r0),
        MetricArg::Euclidean => {
            if !labeled {
                return Err(Error::invalid("the euclidean metric needs --labeled data"));
            }
            InstanceSpace::euclidean(d, r0, b)
        }
        MetricArg::Lp if labeled => InstanceSpace::lp_product(d, r0, b, p),
        MetricArg::Lp => InstanceSpace::feature_only(d, r0, p),
    }
}

/// Loads every file with loose bounds, then fixes the bounds from the flags
/// or from the data and validates again.
fn load_all(args: &SpaceArgs, paths: &[&Path], p: f64) -> Result<(InstanceSpace, Vec<EmpiricalDistribution>)> {
    let d = sniff_dimension(paths[0], schema(args) == Schema::Labeled)?;
    let loose = loose_space(args, d, p)?;
    let sets = paths
        .iter()
        .map(|path| load_dataset(path, schema(args), &loose))
        .collect::<Result<Vec<_>>>()?;
    let pts = sets.iter().flat_map(|s| s.support());
    let space = fit_space(args, d, p, pts)?;
    for s in &sets {
        s.validate_in(&space)?;
    }
    Ok((space, sets))
}

fn fit_space<'a>(args: &SpaceArgs, d: usize, p: f64, pts: impl Iterator<Item = &'a Point> + Clone) -> Result<InstanceSpace> {
    let norm = |z: &Point| z.features.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r0 = args.r0.unwrap_or_else(|| pts.clone().map(norm).fold(0.0, f64::max));
    let b = args
        .label_bound
        .unwrap_or_else(|| pts.clone().filter_map(|z| z.label).map(f64::abs).fold(0.0, f64::max));
    let low = args
        .low
        .unwrap_or_else(|| pts.clone().map(|z| z.features[0]).fold(f64::INFINITY, f64::min));
    let high = args
        .high
        .unwrap_or_else(|| pts.clone().map(|z| z.features[0]).fold(f64::NEG_INFINITY, f64::max));
    space_with(args, d, p, r0, b, low, high)
}

fn cmd_wass(cli: &Cli, a: &WassArgs) -> Result<()> {
    let (space, sets) = load_all(&a.space, &[&a.a, &a.b], a.p)?;
    let (value, plan) = wasserstein(a.p, &sets[0], &sets[1], &space)?;
    println!("{value:?}");
    emit_csv(cli, "wass_plan", &plan.to_csv())?;
    emit(
        cli,
        "wass",
        a,
        json!({ "value": value, "cost": plan.cost, "space": space }),
    )
}

/// `casebook:<alpha>` or `file:<class.toml>`.
pub fn parse_class(spec: &str, space: &InstanceSpace) -> Result<HypothesisClass> {
    if let Some(alpha) = spec.strip_prefix("casebook:") {
        let alpha: f64 = alpha
            .parse()
            .map_err(|_| Error::invalid(format!("bad alpha in class spec {spec:?}")))?;
        if !matches!(space.metric(), MetricKind::Interval { .. }) {
            return Err(Error::invalid("the casebook class needs --metric interval"));
        }
        return Ok(casebook::class(alpha));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = read(Path::new(path))?;
        let cs: ClassSpec = toml::from_str(&text).map_err(|e| Error::Config(format!("{path}: {e}")))?;
        return cs.build(space);
    }
    Err(Error::invalid(format!(
        "unknown class spec {spec:?}; use casebook:<alpha> or file:<path>"
    )))
}

/// `support`, `grid:<N>` or `file:<path>`.
pub fn parse_candidates(
    spec: &str,
    space: &InstanceSpace,
    sample: &EmpiricalDistribution,
    args: &SpaceArgs,
) -> Result<Vec<Point>> {
    if spec == "support" {
        return Ok(sample.support().to_vec());
    }
    if let Some(n) = spec.strip_prefix("grid:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid size in {spec:?}")))?;
        return grid_candidates(space, n);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let set = load_dataset(path, schema(args), space)?;
        return Ok(set.support().to_vec());
    }
    Err(Error::invalid(format!(
        "unknown candidate spec {spec:?}; use support, grid:<N> or file:<path>"
    )))
}

/// `n` evenly spaced points per feature axis (inside the feature ball),
/// times `n` labels in `[-B, B]` or both classes when labeled.
pub fn grid_candidates(space: &InstanceSpace, n: usize) -> Result<Vec<Point>> {
    if n < 2 {
        return Err(Error::invalid("grid needs at least 2 points per axis"));
    }
    match *space.metric() {
        MetricKind::Interval { low, high } => Ok((0..n)
            .map(|k| Point::scalar(low + (high - low) * k as f64 / (n - 1) as f64))
            .collect()),
        MetricKind::Classification => {
            let labeled = InstanceSpace::lp_product(space.dimension(), space.feature_bound(), 1.0, 1.0)?;
            let mut out = adaptation::candidate_grid(&labeled, n, 2)?;
            out.iter_mut().for_each(|z| z.label = z.label.map(f64::signum));
            Ok(out)
        }
        _ if space.is_labeled() => adaptation::candidate_grid(space, n, n),
        _ => {
            let labeled = InstanceSpace::lp_product(space.dimension(), space.feature_bound(), 0.0, 1.0)?;
            Ok(adaptation::candidate_grid(&labeled, n, 1)?
                .iter()
                .map(Point::without_label)
                .collect())
        }
    }
}

fn risk_setup(a: &RiskArgs) -> Result<(InstanceSpace, EmpiricalDistribution, HypothesisClass, Vec<Point>)> {
    let mut paths: Vec<&Path> = vec![&a.data];
    let cand_file = a.candidates.strip_prefix("file:").map(PathBuf::from);
    if let Some(p) = &cand_file {
        paths.push(p);
    }
    let (space, mut sets) = load_all(&a.space, &paths, a.p)?;
    let sample = sets.swap_remove(0);
    let class = parse_class(&a.class, &space)?;
    let cands = parse_candidates(&a.candidates, &space, &sample, &a.space)?;
    Ok((space, sample, class, cands))
}

#[derive(Serialize)]
struct MemberRisk {
    id: String,
    dual_value: f64,
    lambda_star: f64,
    lambda_bracket: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    primal_value: Option<f64>,
}

fn cmd_worst_case(cli: &Cli, a: &RiskArgs) -> Result<()> {
    let (space, sample, class, cands) = risk_setup(a)?;
    let ball = AmbiguityBall::new(a.p, a.rho)?;
    let mut rows = Vec::with_capacity(class.len());
    let mut csv = String::from("id,dual_value,lambda_star,primal_value\n");
    for h in class.members() {
        let dual = local_worst_case_risk(h, &sample, &ball, &cands, &space)?;
        let primal = if a.primal {
            Some(primal_worst_case_risk(h, &sample, &ball, &cands, &space)?.value)
        } else {
            None
        };
        println!("{}: worst-case risk {:.6} (lambda* = {:.6})", h.id(), dual.value, dual.lambda_star);
        csv.push_str(&format!(
            "{},{:?},{:?},{}\n",
            h.id(),
            dual.value,
            dual.lambda_star,
            primal.map_or(String::new(), |v| format!("{v:?}"))
        ));
        rows.push(MemberRisk {
            id: h.id().to_string(),
            dual_value: dual.value,
            lambda_star: dual.lambda_star,
            lambda_bracket: dual.bracket,
            primal_value: primal,
        });
    }
    emit_csv(cli, "worst-case", &csv)?;
    emit(cli, "worst-case", a, json!({ "members": rows, "candidate_count": cands.len() }))
}

fn cmd_erm(cli: &Cli, a: &ErmArgs) -> Result<()> {
    let (space, sets) = load_all(&a.space, &[&a.data], 1.0)?;
    let class = parse_class(&a.class, &space)?;
    let res = ordinary_erm(&class, &sets[0])?;
    println!("selected {} (empirical risk {:.6})", res.selected_id, res.objective);
    emit(cli, "erm", a, res)
}

fn cmd_minimax(cli: &Cli, a: &RiskArgs) -> Result<()> {
    let (space, sample, class, cands) = risk_setup(a)?;
    let ball = AmbiguityBall::new(a.p, a.rho)?;
    let res = if a.lambda_grid.is_empty() {
        minimax_erm(&class, &sample, &ball, &cands, &space)?
    } else {
        fixed_lambda_erm(&class, &sample, &a.lambda_grid, &ball, &cands, &space)?
    };
    println!("selected {} (objective {:.6})", res.selected_id, res.objective);
    emit(cli, "minimax-erm", a, res)
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("this bound needs --{name}")))
}

fn evaluate_bound(a: &BoundsArgs) -> Result<BoundReport> {
    let n = || need(a.n, "n");
    Ok(match a.kind {
        BoundKind::Lipschitz => bounds::theorem2_bound(
            need(a.comp, "comp")?,
            need(a.lipschitz, "lipschitz")?,
            need(a.diam, "diam")?,
            need(a.rho, "rho")?,
            a.p,
            need(a.m, "m")?,
            n()?,
            a.delta,
        )?,
        BoundKind::Anchored => bounds::theorem3_bound(
            need(a.comp, "comp")?,
            need(a.c0, "c0")?,
            need(a.diam, "diam")?,
            need(a.rho, "rho")?,
            a.p,
            need(a.m, "m")?,
            n()?,
            a.delta,
        )?,
        BoundKind::Rademacher => bounds::rademacher_phi_bound(
            need(a.comp, "comp")?,
            need(a.c0, "c0")?,
            need(a.diam, "diam")?,
            need(a.rho, "rho")?,
            a.p,
            n()?,
        )?,
        BoundKind::Adaptation => bounds::adaptation_bound(
            need(a.lipschitz, "lipschitz")?,
            need(a.rho, "rho")?,
            need(a.comp, "comp")?,
            need(a.diam, "diam")?,
            a.p,
            need(a.m, "m")?,
            n()?,
            a.delta,
        )?,
        BoundKind::Network => {
            bounds::corollary_constants(
                &CorollaryParams::Network {
                    d: need(a.d, "d")?,
                    r0: need(a.r0, "r0")?,
                    b: need(a.b, "b")?,
                    s_sup: a.s_sup,
                    s_prime_sup: a.s_prime_sup,
                },
                n()?,
                a.delta,
            )?
            .bound
        }
        BoundKind::Rkhs => {
            bounds::corollary_constants(
                &CorollaryParams::Rkhs {
                    d: need(a.d, "d")?,
                    r0: need(a.r0, "r0")?,
                    b: need(a.b, "b")?,
                    sigma: need(a.sigma, "sigma")?,
                    r: need(a.r, "r")?,
                },
                n()?,
                a.delta,
            )?
            .bound
        }
        BoundKind::Sandwich => {
            let l = need(a.lipschitz, "lipschitz")?;
            let rho = need(a.rho, "rho")?;
            let mut inputs = std::collections::BTreeMap::new();
            inputs.insert("l".to_string(), l);
            inputs.insert("rho".to_string(), rho);
            let value = bounds::sandwich_lipschitz(l, rho);
            BoundReport {
                bound_name: "sandwich_lipschitz".into(),
                inputs,
                value,
                term_breakdown: vec![bounds::Term {
                    name: "two_l_rho".into(),
                    value,
                }],
                vacuous: false,
            }
        }
    })
}

fn cmd_bounds(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let report = evaluate_bound(a)?;
    println!("{}: {:.6}", report.bound_name, report.value);
    if let Some(spec) = &a.sweep {
        let (var, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::invalid("sweep must look like n=10,100"))?;
        let mut csv = format!("{var},value,vacuous\n");
        for v in values.split(',') {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad sweep value {v:?}")))?;
            let mut b = a.clone();
            match var {
                "n" => b.n = Some(x as usize),
                "rho" => b.rho = Some(x),
                "delta" => b.delta = x,
                _ => return Err(Error::invalid(format!("cannot sweep {var:?}; use n, rho or delta"))),
            }
            let r = evaluate_bound(&b)?;
            csv.push_str(&format!("{x:?},{:?},{}\n", r.value, r.vacuous));
        }
        emit_csv(cli, "bounds", &csv)?;
    }
    emit(cli, "bounds", a, report)
}

#[derive(Serialize)]
struct CasebookRow {
    rho: f64,
    regime: casebook::Regime,
    analytic_population_risk: f64,
    oracle_population_risk: f64,
    selection_probability: f64,
    simulated_frequency: f64,
    standard_error: f64,
    excess_risk_profile: f64,
    simulated_excess_quantile: f64,
}

fn cmd_casebook(cli: &Cli, a: &CasebookArgs) -> Result<()> {
    let mut rows = Vec::with_capacity(a.rho.len());
    let mut csv = String::from("rho,analytic_risk,oracle_risk,selection_probability,simulated_frequency,in_regime\n");
    for &rho in &a.rho {
        let inst = IllustrativeInstance::new(a.alpha, a.p, a.n, rho, a.delta)?;
        let analytic = casebook::analytic_population_worst_case(&inst);
        let oracle = casebook::population_oracle(&inst, a.grid)?;
        let sel = casebook::selection_probability(&inst);
        let runs = casebook::simulate(&inst, a.trials, cli.seed)?;
        let freq = casebook::selection_frequency(&runs);
        let se = (sel.value * (1.0 - sel.value) / a.trials.max(1) as f64).sqrt();
        println!(
            "rho={rho}: selection probability {:.6} (analytic) vs {:.6} (simulated, {} trials)",
            sel.value, freq, a.trials
        );
        csv.push_str(&format!(
            "{rho:?},{:?},{:?},{:?},{:?},{}\n",
            analytic.value,
            oracle.value,
            sel.value,
            freq,
            analytic.regime.in_regime()
        ));
        rows.push(CasebookRow {
            rho,
            regime: analytic.regime,
            analytic_population_risk: analytic.value,
            oracle_population_risk: oracle.value,
            selection_probability: sel.value,
            simulated_frequency: freq,
            standard_error: se,
            excess_risk_profile: casebook::excess_risk_profile(&inst),
            simulated_excess_quantile: if runs.is_empty() {
                f64::NAN
            } else {
                casebook::excess_quantile(&runs, 1.0 - a.delta)
            },
        });
    }
    emit_csv(cli, "casebook", &csv)?;
    emit(cli, "casebook", a, rows)
}

fn cmd_adapt(cli: &Cli, a: &AdaptArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => AdaptationConfig::from_toml(&read(path)?)?,
        None => AdaptationConfig::shift_trap(),
    };
    cfg.seed = cli.seed;
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if a.seeds == 0 {
        return Err(Error::invalid("--seeds must be at least 1"));
    }
    let (cmp, runs) = adaptation::compare_selection(&cfg, a.seeds)?;
    let config = json!({ "args": a, "scenario": cfg, "constants_note": adaptation::CONSTANTS_MARKER });
    if a.seeds == 1 {
        let run = &runs[0];
        println!(
            "radius {:.6}; minimax selects {}, ordinary ERM selects {}; target risk {:.6}",
            run.radius.value, run.result.selected_id, run.ordinary.selected_id, run.target_risk
        );
        return emit(cli, "adapt", &config, run);
    }
    println!(
        "{} seeds: minimax optimal {} times, ordinary {} times; sign test p = {:.3e}",
        cmp.seeds, cmp.minimax_hits, cmp.ordinary_hits, cmp.p_value
    );
    emit_csv(cli, "adapt", &adaptation::comparison_csv(&runs))?;
    emit(cli, "adapt", &config, cmp)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<()> {
    let report = match a.suite {
        Suite::Duality => verify::duality_suite(a.seeds, cli.seed)?,
        Suite::Bracket => verify::bracket_suite(a.seeds, cli.seed)?,
        Suite::Pushforward => verify::pushforward_suite(a.seeds, cli.seed)?,
        Suite::Degeneration => verify::degeneration_suite(a.seeds, cli.seed)?,
    };
    println!(
        "{}: {} cases, max deviation {:e} (tolerance {:e}), {} failures",
        report.suite, report.cases, report.max_deviation, report.tolerance, report.failures
    );
    emit(cli, "verify", a, &report)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Solver(format!(
            "{} suite failed in {} of {} cases (worst seed {})",
            report.suite, report.failures, report.cases, report.worst_seed
        )))
    }
}
