//! Command-line front end for the `lvim` library: estimate importance
//! trajectories from CSV panels, run replicated simulation studies,
//! compute benchmark oracle truths, and re-render stored reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use lvim::inference::{
    estimate_addin_trajectory, estimate_leaveout_trajectory, infer_summary, infer_timepoint,
    InferenceResult, VimKind,
};
use lvim::learners::LearnerSpec;
use lvim::panel::{
    load_long_csv_file, make_folds, make_plugin_folds, FoldAssignment, SidecarSchema, TimeWindow,
    VariableSet,
};
use lvim::predictiveness::PredictivenessMeasure;
use lvim::report::{
    render_study, render_trajectory, RenderFormat, RenderSpec, SummaryRow, TrajectoryReport,
};
use lvim::runtime::{thread_count_from_env, with_thread_limit};
use lvim::simulate::{
    default_beta, oracle_truth, run_study, DgpConfig, MonteCarloReport, OracleTruth, StudyScenario,
};
use lvim::summaries::{self, SummarySpec};
use lvim::Error as LibError;

const GLOBAL_HELP: &str = "\
Configuration precedence: built-in defaults, then the --config file, then
command-line flags (flags win). Every file key has a flag of the same name;
each subcommand's --help lists them all.

Environment:
  LVIM_THREADS   worker thread count (default: available parallelism);
                 LVIM_THREADS=1 forces the sequential reference path

Exit codes: 0 success, 2 configuration error, 3 data validation error,
4 estimation failure.";

/// Longitudinal variable importance: estimation, inference, simulation.
#[derive(Parser)]
#[command(name = "lvim", version, after_help = GLOBAL_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate an importance trajectory and its summaries from a CSV panel.
    Estimate(EstimateArgs),
    /// Run a replicated simulation study from a scenario file.
    Simulate(SimulateArgs),
    /// Compute oracle importance truths for the built-in benchmark design.
    Oracle(OracleArgs),
    /// Re-render a stored JSON report to another format.
    Report(ReportArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// TOML config file supplying any of this command's keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Long-format CSV panel (header: subject_id,time,y,<features>). [key: data]
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// JSON sidecar declaring missing-value columns. [key: schema]
    #[arg(long, value_name = "FILE")]
    schema: Option<PathBuf>,
    /// Comma-separated feature columns whose importance to measure. [key: s]
    #[arg(long, value_delimiter = ',', value_name = "COLS")]
    s: Option<Vec<String>>,
    /// Comma-separated base-set columns for add-in comparisons. [key: base]
    #[arg(long, value_delimiter = ',', value_name = "COLS")]
    base: Option<Vec<String>>,
    /// Importance kind: add-in or leave-out. [key: kind]
    #[arg(long, value_name = "KIND")]
    kind: Option<String>,
    /// Learner name: mean-only, logistic, lasso, stumps, or stacked; the
    /// config file may instead give a table with settings. [key: learner]
    #[arg(long, value_name = "NAME")]
    learner: Option<String>,
    /// Predictiveness measure: auc, r-squared, accuracy, or accuracy@T. [key: measure]
    #[arg(long, value_name = "NAME")]
    measure: Option<String>,
    /// Comma-separated summaries: mean, trend-intercept, trend-slope,
    /// autc-linear, autc-spline, gmrc-linear, gmrc-spline. [key: summaries]
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    summaries: Option<Vec<String>>,
    /// Timepoint window, 0-based inclusive, as START..END. [key: window]
    #[arg(long, value_name = "START..END")]
    window: Option<String>,
    /// Cross-fitting folds per half; 1 disables cross-fitting. Defaults
    /// to min(5, n/2), at least 1. [key: k_folds]
    #[arg(long, value_name = "K")]
    k_folds: Option<usize>,
    /// Level for confidence intervals and tests. [key: alpha]
    #[arg(long, value_name = "LEVEL")]
    alpha: Option<f64>,
    /// Root seed for fold assignment and learner randomness. [key: seed]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Output file; stdout when omitted. [key: out]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format: text-table, csv, or json. [key: format]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Display negative point estimates as zero. [key: truncate_at_zero]
    #[arg(long)]
    truncate_at_zero: bool,
    /// Round displayed numbers to this many decimals. [key: round]
    #[arg(long, value_name = "DIGITS")]
    round: Option<usize>,
}

/// File counterpart of [`EstimateArgs`]; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EstimateFile {
    data: Option<PathBuf>,
    schema: Option<PathBuf>,
    s: Option<Vec<String>>,
    base: Option<Vec<String>>,
    kind: Option<String>,
    learner: Option<LearnerField>,
    measure: Option<String>,
    summaries: Option<Vec<String>>,
    window: Option<[usize; 2]>,
    k_folds: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    truncate_at_zero: Option<bool>,
    round: Option<usize>,
}

/// A learner in a config file: either a simple name or a full spec table.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LearnerField {
    Name(String),
    Spec(LearnerSpec),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML scenario file: config (generator), n, replicates, learner,
    /// measure, kinds, variables, summaries, k_folds, alpha, oracle_draws.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Override the scenario's subjects per replicate. [scenario key: n]
    #[arg(long)]
    n: Option<usize>,
    /// Override the scenario's replicate count. [scenario key: replicates]
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the scenario's folds per half. [scenario key: k_folds]
    #[arg(long, value_name = "K")]
    k_folds: Option<usize>,
    /// Override the scenario's oracle draws. [scenario key: oracle_draws]
    #[arg(long, value_name = "DRAWS")]
    oracle_draws: Option<usize>,
    /// Override the scenario's test level. [scenario key: alpha]
    #[arg(long, value_name = "LEVEL")]
    alpha: Option<f64>,
    /// Root seed for the whole study.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format: text-table, csv, or json.
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Round displayed numbers to this many decimals.
    #[arg(long, value_name = "DIGITS")]
    round: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// TOML config file supplying any of this command's keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Carryover correlation in [0, 1). [key: rho]
    #[arg(long)]
    rho: Option<f64>,
    /// Number of timepoints. [key: t_count]
    #[arg(long, value_name = "T")]
    t_count: Option<usize>,
    /// Monte Carlo draws per timepoint. [key: n_draws]
    #[arg(long, value_name = "DRAWS")]
    n_draws: Option<usize>,
    /// Comma-separated features of interest, as x-names or 1-based
    /// numbers (x1 or 1). [key: s]
    #[arg(long, value_delimiter = ',', value_name = "FEATURES")]
    s: Option<Vec<String>>,
    /// Comma-separated base features; default x4,x5,x6,x7. [key: base]
    #[arg(long, value_delimiter = ',', value_name = "FEATURES")]
    base: Option<Vec<String>>,
    /// Importance kind: add-in or leave-out. [key: kind]
    #[arg(long, value_name = "KIND")]
    kind: Option<String>,
    /// Predictiveness measure: auc, r-squared, accuracy, or accuracy@T. [key: measure]
    #[arg(long, value_name = "NAME")]
    measure: Option<String>,
    /// Monte Carlo seed. [key: seed]
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Output file; stdout when omitted. [key: out]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format: text-table, csv, or json. [key: format]
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Round displayed numbers to this many decimals. [key: round]
    #[arg(long, value_name = "DIGITS")]
    round: Option<usize>,
}

/// File counterpart of [`OracleArgs`]; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OracleFile {
    rho: Option<f64>,
    t_count: Option<usize>,
    n_draws: Option<usize>,
    s: Option<Vec<String>>,
    base: Option<Vec<String>>,
    kind: Option<String>,
    measure: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    round: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored JSON report, trajectory or study.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output format: text-table, csv, or json.
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Display negative point estimates as zero (trajectories only).
    #[arg(long)]
    truncate_at_zero: bool,
    /// Round displayed numbers to this many decimals.
    #[arg(long, value_name = "DIGITS")]
    round: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// A failure tagged with the stage that produced it, which fixes the
/// process exit code: config 2, data 3, run 4.
#[derive(Debug)]
enum Failure {
    Config(String),
    Data(String),
    Run(String),
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    fn data(msg: impl Into<String>) -> Self {
        Failure::Data(msg.into())
    }

    fn run(msg: impl Into<String>) -> Self {
        Failure::Run(msg.into())
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Run(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Run(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let threads = thread_count_from_env().map_err(|e| Failure::config(e.to_string()))?;
    with_thread_limit(threads, || match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Report(a) => cmd_report(a),
    })
}

/// Parses a library `FromStr` type, prefixing errors with the config key.
fn parse_key<T>(key: &str, raw: &str) -> CliResult<T>
where
    T: FromStr<Err = LibError>,
{
    raw.parse::<T>()
        .map_err(|e| Failure::config(format!("{key}: {e}")))
}

fn load_toml_file<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("config file {}: {e}", path.display())))
}

fn named_learner(name: &str) -> CliResult<LearnerSpec> {
    match name {
        "mean-only" => Ok(LearnerSpec::MeanOnly),
        "logistic" => Ok(LearnerSpec::Logistic),
        "lasso" | "lasso-logistic" => Ok(LearnerSpec::lasso_default()),
        "stumps" | "boosted-stumps" => Ok(LearnerSpec::stumps_default()),
        "stacked" => Ok(LearnerSpec::stacked_default()),
        other => Err(Failure::config(format!(
            "learner: unknown name {other} (expected mean-only, logistic, lasso, stumps, \
             or stacked; a config file may give a full learner table instead)"
        ))),
    }
}

fn parse_window(raw: &str) -> CliResult<(usize, usize)> {
    let parsed = raw.split_once("..").and_then(|(a, b)| {
        Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?))
    });
    parsed.ok_or_else(|| {
        Failure::config(format!("window: expected START..END indices, got {raw}"))
    })
}

/// Everything `estimate` needs, with defaults applied and names parsed.
struct ResolvedEstimate {
    data: PathBuf,
    schema: Option<PathBuf>,
    s: Vec<String>,
    /// Absent means "not configured": the sidecar schema's base set, if
    /// any, then empty.
    base: Option<Vec<String>>,
    kind: VimKind,
    learner: LearnerSpec,
    measure: PredictivenessMeasure,
    summaries: Vec<SummarySpec>,
    window: Option<(usize, usize)>,
    k_folds: Option<usize>,
    alpha: f64,
    seed: u64,
    out: Option<PathBuf>,
    format: RenderFormat,
    truncate_at_zero: bool,
    round: Option<usize>,
}

/// Stderr echo of the resolved estimate configuration. The learner table
/// sits last so plain keys serialize ahead of it.
#[derive(Serialize)]
struct EstimateEcho<'a> {
    command: &'static str,
    data: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    s: &'a [String],
    base: &'a [String],
    kind: String,
    measure: String,
    summaries: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<[usize; 2]>,
    k_folds: usize,
    alpha: f64,
    seed: u64,
    format: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    truncate_at_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    round: Option<usize>,
    learner: &'a LearnerSpec,
}

fn resolve_estimate(args: EstimateArgs) -> CliResult<ResolvedEstimate> {
    let file: EstimateFile = match &args.config {
        Some(path) => load_toml_file(path)?,
        None => EstimateFile::default(),
    };

    let data = args
        .data
        .or(file.data)
        .ok_or_else(|| Failure::config("missing required key: data (CSV panel path)"))?;
    let s = args
        .s
        .or(file.s)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Failure::config("missing required key: s (variables of interest)"))?;
    let base = args.base.or(file.base);

    let kind = match args.kind.or(file.kind) {
        Some(raw) => parse_key::<VimKind>("kind", &raw)?,
        None => VimKind::AddIn,
    };
    let learner = match (args.learner, file.learner) {
        (Some(name), _) => named_learner(&name)?,
        (None, Some(LearnerField::Name(name))) => named_learner(&name)?,
        (None, Some(LearnerField::Spec(spec))) => spec,
        (None, None) => LearnerSpec::Logistic,
    };
    learner
        .validate()
        .map_err(|e| Failure::config(format!("learner: {e}")))?;
    let measure = match args.measure.or(file.measure) {
        Some(raw) => parse_key::<PredictivenessMeasure>("measure", &raw)?,
        None => PredictivenessMeasure::Auc,
    };
    let summaries = match args.summaries.or(file.summaries) {
        Some(raw) => {
            if raw.is_empty() {
                return Err(Failure::config("summaries: list is empty"));
            }
            raw.iter()
                .map(|r| parse_key::<SummarySpec>("summaries", r))
                .collect::<CliResult<Vec<_>>>()?
        }
        None => vec![
            SummarySpec::Mean,
            SummarySpec::LinearTrend(lvim::summaries::TrendComponent::Intercept),
            SummarySpec::LinearTrend(lvim::summaries::TrendComponent::Slope),
        ],
    };
    let window = match args.window {
        Some(raw) => Some(parse_window(&raw)?),
        None => file.window.map(|[a, b]| (a, b)),
    };
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Failure::config(format!("alpha: {alpha} outside (0, 1)")));
    }
    let format = match args.format.or(file.format) {
        Some(raw) => parse_key::<RenderFormat>("format", &raw)?,
        None => RenderFormat::TextTable,
    };

    Ok(ResolvedEstimate {
        data,
        schema: args.schema.or(file.schema),
        s,
        base,
        kind,
        learner,
        measure,
        summaries,
        window,
        k_folds: args.k_folds.or(file.k_folds),
        alpha,
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.or(file.out),
        format,
        truncate_at_zero: args.truncate_at_zero || file.truncate_at_zero.unwrap_or(false),
        round: args.round.or(file.round),
    })
}

/// Maps the named columns to indices; unknown names are config errors
/// that identify the column and the set it came from.
fn resolve_columns(
    names: &[String],
    which: &str,
    data: &lvim::panel::LongitudinalDataset,
) -> CliResult<Vec<usize>> {
    names
        .iter()
        .map(|name| {
            data.column_index(name).ok_or_else(|| {
                Failure::config(format!("{which} set names unknown column \"{name}\""))
            })
        })
        .collect()
}

fn cmd_estimate(args: EstimateArgs) -> CliResult<()> {
    let cfg = resolve_estimate(args)?;

    let schema = match &cfg.schema {
        Some(path) => Some(
            SidecarSchema::from_json_file(path).map_err(|e| Failure::data(e.to_string()))?,
        ),
        None => None,
    };
    let data = load_long_csv_file(&cfg.data, schema.as_ref())
        .map_err(|e| Failure::data(e.to_string()))?;

    // An unconfigured base set falls back to the sidecar's declaration.
    let base_names: Vec<String> = match (&cfg.base, &schema) {
        (Some(b), _) => b.clone(),
        (None, Some(sch)) => sch.base_set.clone(),
        (None, None) => Vec::new(),
    };
    let s_idx = resolve_columns(&cfg.s, "s", &data)?;
    let base_idx = resolve_columns(&base_names, "base", &data)?;
    let varset = VariableSet::new(s_idx, base_idx, data.p())
        .map_err(|e| Failure::config(e.to_string()))?;
    if cfg.measure.requires_binary() {
        data.require_binary_outcomes()
            .map_err(|e| Failure::data(e.to_string()))?;
    }

    let n = data.n();
    let k = cfg.k_folds.unwrap_or_else(|| (n / 2).clamp(1, 5));
    let folds = build_folds(n, k, cfg.seed)?;
    let window = match cfg.window {
        Some((a, b)) => TimeWindow::new(a, b, data.t_count())
            .map_err(|e| Failure::config(format!("window: {e}")))?,
        None => TimeWindow::full(data.t_count()).map_err(|e| Failure::config(e.to_string()))?,
    };

    let echo = EstimateEcho {
        command: "estimate",
        data: cfg.data.display().to_string(),
        schema: cfg.schema.as_ref().map(|p| p.display().to_string()),
        s: &cfg.s,
        base: &base_names,
        kind: cfg.kind.to_string(),
        measure: cfg.measure.to_string(),
        summaries: cfg.summaries.iter().map(|s| s.to_string()).collect(),
        window: cfg.window.map(|(a, b)| [a, b]),
        k_folds: k,
        alpha: cfg.alpha,
        seed: cfg.seed,
        format: cfg.format.to_string(),
        out: cfg.out.as_ref().map(|p| p.display().to_string()),
        truncate_at_zero: cfg.truncate_at_zero,
        round: cfg.round,
        learner: &cfg.learner,
    };
    echo_toml(&echo);
    if k == 1 {
        eprintln!("note: K = 1 runs without cross-fitting (plug-in estimates)");
    }

    let trajectory = match cfg.kind {
        VimKind::AddIn => estimate_addin_trajectory(
            &data, &varset, &cfg.learner, &cfg.measure, &folds, &window, cfg.seed,
        ),
        VimKind::LeaveOut => estimate_leaveout_trajectory(
            &data, &varset, &cfg.learner, &cfg.measure, &folds, &window, cfg.seed,
        ),
    }
    .map_err(|e| Failure::run(e.to_string()))?;

    let per_timepoint: Vec<InferenceResult> = window
        .indices()
        .map(|t| infer_timepoint(&trajectory, t, cfg.alpha))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::run(e.to_string()))?;
    let summary_rows: Vec<SummaryRow> = cfg
        .summaries
        .iter()
        .map(|&spec| {
            let value = summaries::evaluate(spec, &trajectory.estimates, &trajectory.times)
                .map_err(|e| Failure::run(format!("{spec}: {e}")))?
                .value;
            SummaryRow::from_inference(spec, value, infer_summary(&trajectory, spec, cfg.alpha))
                .map_err(|e| Failure::run(format!("{spec}: {e}")))
        })
        .collect::<CliResult<_>>()?;

    let report = TrajectoryReport::new(&trajectory, &per_timepoint, summary_rows, cfg.alpha, cfg.seed)
        .map_err(|e| Failure::run(e.to_string()))?;
    let spec = RenderSpec {
        format: cfg.format,
        truncate_at_zero: cfg.truncate_at_zero,
        round: cfg.round,
        alpha: cfg.alpha,
    };
    write_output(&render_trajectory(&report, &spec), cfg.out.as_deref())
}

/// Cross-fits with K >= 2; K = 1 falls back to the plug-in split.
fn build_folds(n: usize, k: usize, seed: u64) -> CliResult<FoldAssignment> {
    if k == 0 {
        return Err(Failure::config("k_folds: must be at least 1"));
    }
    if k == 1 {
        make_plugin_folds(n, seed).map_err(|e| Failure::data(e.to_string()))
    } else {
        make_folds(n, k, seed).map_err(|e| Failure::config(format!("k_folds: {e}")))
    }
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let mut scenario: StudyScenario = load_toml_file(&args.scenario)?;
    if let Some(n) = args.n {
        scenario.n = n;
    }
    if let Some(r) = args.replicates {
        scenario.replicates = r;
    }
    if let Some(k) = args.k_folds {
        scenario.k_folds = k;
    }
    if let Some(d) = args.oracle_draws {
        scenario.oracle_draws = d;
    }
    if let Some(a) = args.alpha {
        scenario.alpha = a;
    }
    let seed = args.seed.unwrap_or(0);
    let format = match args.format {
        Some(raw) => parse_key::<RenderFormat>("format", &raw)?,
        None => RenderFormat::TextTable,
    };

    match toml::to_string(&scenario) {
        Ok(text) => eprintln!("resolved scenario (root seed {seed}):\n{text}"),
        Err(e) => eprintln!("resolved scenario (root seed {seed}): <unprintable: {e}>"),
    }

    let report = run_study(&scenario, seed).map_err(|e| match e {
        LibError::Argument(_) | LibError::Validation(_) => Failure::config(e.to_string()),
        other => Failure::run(other.to_string()),
    })?;
    let spec = RenderSpec {
        format,
        truncate_at_zero: false,
        round: args.round,
        alpha: scenario.alpha,
    };
    write_output(&render_study(&report, &spec), args.out.as_deref())
}

/// Parses a feature token: an x-name like `x7` or a 1-based number.
fn parse_feature(token: &str, p: usize) -> CliResult<usize> {
    let digits = token.strip_prefix('x').unwrap_or(token);
    let number: usize = digits
        .parse()
        .map_err(|_| Failure::config(format!("unknown feature token: {token}")))?;
    if number == 0 || number > p {
        return Err(Failure::config(format!(
            "feature {token} out of range: expected x1..x{p}"
        )));
    }
    Ok(number - 1)
}

fn parse_features(tokens: &[String], p: usize) -> CliResult<Vec<usize>> {
    tokens.iter().map(|t| parse_feature(t, p)).collect()
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    let file: OracleFile = match &args.config {
        Some(path) => load_toml_file(path)?,
        None => OracleFile::default(),
    };
    let rho = args.rho.or(file.rho).unwrap_or(0.0);
    let t_count = args.t_count.or(file.t_count).unwrap_or(4);
    let n_draws = args.n_draws.or(file.n_draws).unwrap_or(500_000);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let kind = match args.kind.or(file.kind) {
        Some(raw) => parse_key::<VimKind>("kind", &raw)?,
        None => VimKind::AddIn,
    };
    let measure = match args.measure.or(file.measure) {
        Some(raw) => parse_key::<PredictivenessMeasure>("measure", &raw)?,
        None => PredictivenessMeasure::Auc,
    };
    let format = match args.format.or(file.format) {
        Some(raw) => parse_key::<RenderFormat>("format", &raw)?,
        None => RenderFormat::TextTable,
    };
    let round = args.round.or(file.round);
    let out = args.out.or(file.out);

    let config = DgpConfig {
        t_count,
        beta: default_beta(t_count),
        ..DgpConfig::correlated(rho)
    };
    config
        .validate()
        .map_err(|e| Failure::config(e.to_string()))?;

    let s_tokens = args
        .s
        .or(file.s)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Failure::config("missing required key: s (features of interest)"))?;
    let base_tokens = args.base.or(file.base).unwrap_or_else(|| {
        ["x4", "x5", "x6", "x7"].map(String::from).to_vec()
    });
    let s_idx = parse_features(&s_tokens, config.p)?;
    let base_idx = parse_features(&base_tokens, config.p)?;
    let varset = VariableSet::new(s_idx, base_idx, config.p)
        .map_err(|e| Failure::config(e.to_string()))?;

    eprintln!(
        "oracle: kind {kind}, measure {measure}, rho {rho}, {t_count} timepoints, \
         {n_draws} draws, seed {seed}"
    );
    let truth = oracle_truth(&config, n_draws, seed, &measure, &varset, kind)
        .map_err(|e| Failure::run(e.to_string()))?;
    write_output(&render_oracle(&truth, format, round), out.as_deref())
}

/// Renders an oracle truth: per-timepoint rows then summary rows, in the
/// same uniform-schema style as the trajectory renderer.
fn render_oracle(truth: &OracleTruth, format: RenderFormat, round: Option<usize>) -> String {
    let fmt = |x: f64| -> String {
        if !x.is_finite() {
            return String::new();
        }
        match round {
            Some(d) => format!("{x:.d$}"),
            None => format!("{x}"),
        }
    };
    let mut rows: Vec<[String; 5]> = truth
        .times
        .iter()
        .zip(truth.big.iter().zip(&truth.small))
        .zip(&truth.per_t)
        .map(|((&time, (&big, &small)), &v)| {
            ["timepoint".into(), fmt(time), fmt(big), fmt(small), fmt(v)]
        })
        .collect();
    for (label, value) in [
        ("mean", truth.mean),
        ("trend-intercept", truth.trend_intercept),
        ("trend-slope", truth.trend_slope),
    ] {
        rows.push(["summary".into(), label.into(), String::new(), String::new(), fmt(value)]);
    }

    let header = ["row", "label", "big", "small", "value"];
    match format {
        RenderFormat::Json => {
            let mut text = serde_json::to_string_pretty(truth).expect("oracle truth serializes");
            text.push('\n');
            text
        }
        RenderFormat::Csv => {
            let mut text = header.join(",");
            text.push('\n');
            for row in &rows {
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text
        }
        RenderFormat::TextTable => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut text = format!(
                "oracle importance truth ({}, {})\n",
                truth.kind, truth.measure
            );
            let mut line = String::new();
            for (w, h) in widths.iter().zip(header) {
                let _ = write!(line, "{h:<w$}  ");
            }
            text.push_str(line.trim_end());
            text.push('\n');
            for row in &rows {
                let mut line = String::new();
                for (w, cell) in widths.iter().zip(row) {
                    let _ = write!(line, "{cell:<w$}  ");
                }
                text.push_str(line.trim_end());
                text.push('\n');
            }
            text
        }
    }
}

fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Failure::data(format!("input {}: {e}", args.input.display())))?;
    let format = match args.format {
        Some(raw) => parse_key::<RenderFormat>("format", &raw)?,
        None => RenderFormat::TextTable,
    };

    let trajectory = serde_json::from_str::<TrajectoryReport>(&text);
    let rendered = match trajectory {
        Ok(report) => {
            let spec = RenderSpec {
                format,
                truncate_at_zero: args.truncate_at_zero,
                round: args.round,
                alpha: report.alpha,
            };
            render_trajectory(&report, &spec)
        }
        Err(trajectory_err) => match serde_json::from_str::<MonteCarloReport>(&text) {
            Ok(report) => {
                let spec = RenderSpec {
                    format,
                    truncate_at_zero: false,
                    round: args.round,
                    alpha: report.alpha,
                };
                render_study(&report, &spec)
            }
            Err(study_err) => {
                return Err(Failure::data(format!(
                    "input {} is neither a trajectory report ({trajectory_err}) nor a \
                     study report ({study_err})",
                    args.input.display()
                )));
            }
        },
    };
    write_output(&rendered, args.out.as_deref())
}

fn echo_toml<T: Serialize>(value: &T) {
    match toml::to_string(value) {
        Ok(text) => eprintln!("resolved configuration:\n{text}"),
        Err(e) => eprintln!("resolved configuration: <unprintable: {e}>"),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| Failure::run(format!("writing {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}
