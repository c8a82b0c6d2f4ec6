//! Command-line harness: single-field simulation, the comparison
//! experiment, and the statistical validation suite.
//!
//! Exit codes: 0 success, 1 failed validation checks, 2 configuration
//! errors (message names the offending field), 3 spectral-function budget
//! exhausted.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use maxfield::estimators::{self, ReplicationSummary};
use maxfield::experiment::{run_experiment, ExperimentConfig, ExperimentError, ExperimentReport};
use maxfield::geometry::RectDomain;
use maxfield::rng::RngStream;
use maxfield::shapes::{
    IndicatorScaling, RadialShape, ShapeError, ShiftDensitySpec, SpectralModel,
};
use maxfield::simulate::{
    simulate_normalized, simulate_schlather, simulate_transformed, stop_index_from_final, Method,
    Realization, SimError, SimOptions, StoppingVariant,
};
use maxfield::stats;

const FIELD_SCHEMA: &str = "maxfield/field/v1";
const VALIDATE_SCHEMA: &str = "maxfield/validate/v1";

#[derive(Parser)]
#[command(
    name = "maxfield",
    version,
    about = "Exact max-stable random field simulator"
)]
struct Cli {
    /// Optional key=value configuration file; command-line flags override
    /// values from the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one field and write a CSV of grid values plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Run the normalized-vs-cutoff comparison and write a report (CSV + JSON).
    Experiment(ExperimentArgs),
    /// Run the statistical validation suite; exit 0 iff every check passes.
    Validate(ValidateArgs),
}

#[derive(Args, Default)]
struct SimulateArgs {
    /// Shape family: gaussian | indicator.
    #[arg(long)]
    shape: Option<String>,
    /// Gaussian bandwidth σ.
    #[arg(long)]
    sigma: Option<f64>,
    /// Indicator support radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Indicator scaling: unit | raw.
    #[arg(long)]
    scaling: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Domain half-width (the rectangle is [-R, R]^dim).
    #[arg(long = "R")]
    half_width: Option<f64>,
    /// Grid step; must divide 2R.
    #[arg(long = "h")]
    grid_step: Option<f64>,
    /// Sampler: normalized | schlather | transformed.
    #[arg(long)]
    method: Option<String>,
    /// Stopping variant for the normalized sampler: exact | strong | weak.
    #[arg(long)]
    variant: Option<String>,
    /// Cut-off multiple k for the schlather method (window [-kσ, kσ]^dim).
    #[arg(long = "cutoff-k")]
    cutoff_k: Option<u32>,
    /// Shift density for the transformed method: gstar | uniform.
    #[arg(long)]
    weight: Option<String>,
    /// Halfwidth of the uniform shift window.
    #[arg(long = "weight-halfwidth")]
    weight_halfwidth: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replication index (stream id) to simulate.
    #[arg(long)]
    replication: Option<u64>,
    #[arg(long = "max-functions")]
    max_functions: Option<usize>,
    /// Output base path; writes <out>.csv and <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// Preset: table1 (d=1, σ=1, h=0.1) | table2 (d=2, σ=1, h=0.25) | custom.
    preset: String,
    /// Replications per process and half-width.
    #[arg(long = "N")]
    n_replications: Option<usize>,
    /// Comma-separated half-widths R.
    #[arg(long = "R", value_delimiter = ',')]
    half_widths: Option<Vec<f64>>,
    /// Comma-separated cut-off multiples k.
    #[arg(long = "k", value_delimiter = ',')]
    cutoffs: Option<Vec<u32>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "h")]
    grid_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (fallback: MAXFIELD_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Attach published reference values to matching rows.
    #[arg(long = "compare-paper")]
    compare_paper: bool,
    /// Also write a per-replication trace CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long = "max-functions")]
    max_functions: Option<usize>,
    /// Output base path; writes <out>.csv and <out>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ValidateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON check report here (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Config(String),
    Budget(String),
    ChecksFailed,
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Budget(m) => write!(f, "{m}"),
            CliError::ChecksFailed => write!(f, "one or more validation checks failed"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::BudgetExhausted { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Sim(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<maxfield::geometry::GeometryError> for CliError {
    fn from(e: maxfield::geometry::GeometryError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn exit_for(e: &CliError) -> u8 {
    match e {
        CliError::ChecksFailed => 1,
        CliError::Config(_) | CliError::Io(_) => 2,
        CliError::Budget(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(FileConfig::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args, &file),
        Command::Experiment(args) => cmd_experiment(args, &file),
        Command::Validate(args) => cmd_validate(args, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

/// `key = value` lines; `#` starts a comment. Flags take precedence.
#[derive(Default)]
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("config: cannot read {}: {e}", path.display()))
        })?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "config: line {} is not key=value: {raw:?}",
                    lineno + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Config(format!("config: {key}: cannot parse value {raw:?}"))
            }),
        }
    }

    fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse::<T>())
                .collect::<Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("config: {key}: cannot parse list {raw:?}"))),
        }
    }
}

fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("{field}: required (pass --{field})")))
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let threads = match threads {
        Some(t) => Some(t),
        None => match std::env::var("MAXFIELD_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                CliError::Config(format!(
                    "threads: cannot parse MAXFIELD_THREADS value {v:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(CliError::Config("threads: must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ModelSpec {
    shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<String>,
    dim: usize,
    half_width: f64,
    grid_step: f64,
}

fn build_model(spec: &ModelSpec) -> Result<SpectralModel, CliError> {
    let domain = RectDomain::new(spec.dim, spec.half_width, spec.grid_step)?;
    let shape = match spec.shape.as_str() {
        "gaussian" => RadialShape::gaussian(spec.dim, require(spec.sigma, "sigma")?)?,
        "indicator" => {
            let scaling = match spec.scaling.as_deref().unwrap_or("unit") {
                "unit" => IndicatorScaling::UnitIntegral,
                "raw" => IndicatorScaling::Raw,
                other => {
                    return Err(CliError::Config(format!(
                        "scaling: expected unit or raw, got {other:?}"
                    )))
                }
            };
            RadialShape::indicator(spec.dim, require(spec.radius, "radius")?, scaling)?
        }
        other => {
            return Err(CliError::Config(format!(
                "shape: expected gaussian or indicator, got {other:?}"
            )))
        }
    };
    Ok(SpectralModel::new(shape, domain)?)
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let spec = ModelSpec {
        shape: require(args.shape.or(file.get("shape")?), "shape")?,
        sigma: args.sigma.or(file.get("sigma")?),
        radius: args.radius.or(file.get("radius")?),
        scaling: args.scaling.or(file.get("scaling")?),
        dim: require(args.dim.or(file.get("dim")?), "dim")?,
        half_width: require(args.half_width.or(file.get("R")?), "R")?,
        grid_step: require(args.grid_step.or(file.get("h")?), "h")?,
    };
    let method = require(args.method.or(file.get("method")?), "method")?;
    let seed = args.seed.or(file.get("seed")?).unwrap_or(0);
    let replication = args.replication.or(file.get("replication")?).unwrap_or(0);
    let opts = SimOptions {
        max_functions: args
            .max_functions
            .or(file.get("max_functions")?)
            .unwrap_or(SimOptions::default().max_functions),
    };
    let out = args
        .out
        .or(file.get::<PathBuf>("out")?)
        .unwrap_or_else(|| PathBuf::from("field"));

    let model = build_model(&spec)?;
    let mut stream = RngStream::derive(seed, replication);
    let realization = match method.as_str() {
        "normalized" => {
            let variant = parse_variant(args.variant.or(file.get("variant")?).as_deref())?;
            simulate_normalized(&model, &mut stream, variant, &opts)?
        }
        "schlather" => {
            let k = args.cutoff_k.or(file.get("cutoff_k")?).unwrap_or(3);
            simulate_schlather(&model, k, &mut stream, &opts)?
        }
        "transformed" => {
            let weight = parse_weight(
                args.weight.or(file.get("weight")?).as_deref(),
                args.weight_halfwidth.or(file.get("weight_halfwidth")?),
            )?;
            simulate_transformed(&model, &weight, &mut stream, &opts)?
        }
        other => {
            return Err(CliError::Config(format!(
                "method: expected normalized, schlather or transformed, got {other:?}"
            )))
        }
    };

    write_field_csv(&out.with_extension("csv"), &model, &realization)?;
    let meta = serde_json::json!({
        "schema": FIELD_SCHEMA,
        "seed": seed,
        "replication": replication,
        "method": realization.method,
        "variant": realization.variant,
        "m": realization.n_spectral,
        "inf": realization.inf_field,
        "sup": realization.sup_field,
        "t1": realization.first_arrival,
        "normalizing_constant": model.normalizing_constant(),
        "config": {
            "model": spec,
            "method": method,
            "max_functions": opts.max_functions,
        },
    });
    std::fs::write(
        out.with_extension("json"),
        serde_json::to_string_pretty(&meta).expect("serializable") + "\n",
    )?;
    Ok(())
}

fn parse_variant(v: Option<&str>) -> Result<StoppingVariant, CliError> {
    match v.unwrap_or("exact") {
        "exact" => Ok(StoppingVariant::Exact),
        "strong" => Ok(StoppingVariant::Strong),
        "weak" => Ok(StoppingVariant::Weak),
        other => Err(CliError::Config(format!(
            "variant: expected exact, strong or weak, got {other:?}"
        ))),
    }
}

fn parse_weight(
    weight: Option<&str>,
    halfwidth: Option<f64>,
) -> Result<ShiftDensitySpec, CliError> {
    match weight.unwrap_or("gstar") {
        "gstar" => Ok(ShiftDensitySpec::GStar),
        "uniform" => Ok(ShiftDensitySpec::UniformWindow {
            halfwidth: require(halfwidth, "weight-halfwidth")?,
        }),
        other => Err(CliError::Config(format!(
            "weight: expected gstar or uniform, got {other:?}"
        ))),
    }
}

fn write_field_csv(path: &Path, model: &SpectralModel, r: &Realization) -> Result<(), CliError> {
    let domain = model.domain();
    let mut out = String::new();
    out.push_str(if domain.dim() == 1 {
        "y1,z\n"
    } else {
        "y1,y2,z\n"
    });
    for (i, &z) in r.field.iter().enumerate() {
        let p = domain.point(i);
        if domain.dim() == 1 {
            let _ = writeln!(out, "{},{z}", p[0]);
        } else {
            let _ = writeln!(out, "{},{},{z}", p[0], p[1]);
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn cmd_experiment(args: ExperimentArgs, file: &FileConfig) -> Result<(), CliError> {
    let seed = require(args.seed.or(file.get("seed")?), "seed")?;
    let n = args.n_replications.or(file.get("N")?);
    let half_widths = match args.half_widths {
        Some(v) => Some(v),
        None => file.get_list("R")?,
    };
    let cutoffs = match args.cutoffs {
        Some(v) => Some(v),
        None => file.get_list("k")?,
    };

    let mut config = match args.preset.as_str() {
        "table1" => ExperimentConfig::table_1d(
            half_widths.unwrap_or_else(|| vec![1.0, 2.0, 5.0, 10.0]),
            n.unwrap_or(5000),
            seed,
        ),
        "table2" => ExperimentConfig::table_2d(
            half_widths.unwrap_or_else(|| vec![1.0, 2.0]),
            n.unwrap_or(2500),
            seed,
        ),
        "custom" => ExperimentConfig {
            dim: require(args.dim.or(file.get("dim")?), "dim")?,
            sigma: require(args.sigma.or(file.get("sigma")?), "sigma")?,
            grid_step: require(args.grid_step.or(file.get("h")?), "h")?,
            half_widths: require(half_widths.clone(), "R")?,
            cutoffs: vec![2, 3],
            n_replications: require(n, "N")?,
            master_seed: seed,
            compare_reference: false,
            collect_trace: false,
            max_functions: SimOptions::default().max_functions,
        },
        other => {
            return Err(CliError::Config(format!(
                "preset: expected table1, table2 or custom, got {other:?}"
            )))
        }
    };
    if let Some(k) = cutoffs {
        config.cutoffs = k;
    }
    config.compare_reference = args.compare_paper || file.get("compare_paper")?.unwrap_or(false);
    config.collect_trace = args.trace.is_some();
    if let Some(mf) = args.max_functions.or(file.get("max_functions")?) {
        config.max_functions = mf;
    }
    let threads = args.threads.or(file.get("threads")?);
    let out = args
        .out
        .or(file.get::<PathBuf>("out")?)
        .unwrap_or_else(|| PathBuf::from("report"));

    let pool = thread_pool(threads)?;
    let report = pool.install(|| run_experiment(&config))?;

    write_report_csv(&out.with_extension("csv"), &report)?;
    std::fs::write(
        out.with_extension("json"),
        serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    )?;
    if let Some(trace_path) = args.trace {
        write_trace_csv(&trace_path, &report)?;
    }
    Ok(())
}

fn write_report_csv(path: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    let mut out = String::from(
        "dim,R,k,N,Q_hat,Q_se,M_hat,M_se,ratio,ratio_se,A,P_hat,P_se,gap,gap_se,formula_Q,formula_M,ref_Q,ref_M,ref_A,ref_P\n",
    );
    for r in &report.rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dim,
            r.half_width,
            r.cutoff_k,
            r.n_replications,
            r.q_hat,
            r.q_se,
            r.m_hat,
            r.m_se,
            r.ratio,
            r.ratio_se,
            r.a_factor,
            r.p_hat,
            r.p_se,
            r.factorization_gap,
            r.factorization_gap_se,
            r.formula_q,
            r.formula_m
        );
        match &r.reference {
            Some(reference) => {
                let _ = writeln!(
                    out,
                    ",{},{},{},{}",
                    reference.q, reference.m, reference.a, reference.p
                );
            }
            None => out.push_str(",,,,\n"),
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_trace_csv(path: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    let mut out = String::from("method,R,k,replication,m,inf,sup,t1\n");
    for t in &report.trace {
        let method = match t.method {
            Method::Normalized => "normalized",
            Method::Schlather => "schlather",
            Method::Transformed => "transformed",
        };
        let _ = writeln!(
            out,
            "{method},{},{},{},{},{},{},{}",
            t.half_width,
            t.cutoff_k,
            t.replication,
            t.n_spectral,
            t.inf_field,
            t.sup_field,
            t.first_arrival
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    statistic: f64,
    threshold: f64,
    detail: String,
}

fn check(name: &str, pass: bool, statistic: f64, threshold: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        pass,
        statistic,
        threshold,
        detail,
    }
}

fn cmd_validate(args: ValidateArgs, file: &FileConfig) -> Result<(), CliError> {
    let seed = require(args.seed.or(file.get("seed")?), "seed")?;
    let threads = args.threads.or(file.get("threads")?);
    let pool = thread_pool(threads)?;
    let checks = pool.install(|| validation_checks(seed))?;

    let all_pass = checks.iter().all(|c| c.pass);
    let doc = serde_json::json!({
        "schema": VALIDATE_SCHEMA,
        "seed": seed,
        "checks": checks,
        "all_pass": all_pass,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if all_pass {
        Ok(())
    } else {
        for c in checks.iter().filter(|c| !c.pass) {
            eprintln!("check failed: {}: {}", c.name, c.detail);
        }
        Err(CliError::ChecksFailed)
    }
}

fn validation_checks(seed: u64) -> Result<Vec<CheckResult>, CliError> {
    use rayon::prelude::*;

    let smith = SpectralModel::new(
        RadialShape::gaussian(1, 1.0)?,
        RectDomain::new(1, 1.0, 0.1)?,
    )?;
    let c = smith.normalizing_constant();
    let opts = SimOptions::default();
    let mut checks = Vec::new();

    // Margin and sup-law checks on N = 5000 Smith fields.
    let fields: Vec<Vec<f64>> = (0..5000u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(seed, i);
            simulate_normalized(&smith, &mut stream, StoppingVariant::Exact, &opts).map(|r| r.field)
        })
        .collect::<Result<_, _>>()?;
    for &idx in &[0usize, 10, 20] {
        let samples: Vec<f64> = fields.iter().map(|f| f[idx]).collect();
        let (d, p) = stats::ks_one_sample(&samples, |z| stats::frechet_cdf(z, 1.0));
        checks.push(check(
            &format!("frechet_margin_grid_{idx}"),
            p > 0.001,
            p,
            0.001,
            format!("KS D = {d:.5}, p = {p:.5} at grid index {idx}"),
        ));
    }
    let p_hat = fields
        .iter()
        .filter(|f| f.iter().all(|&v| v <= 1.0))
        .count() as f64
        / 5000.0;
    let se = (p_hat * (1.0 - p_hat) / 5000.0).sqrt();
    let neg_log = -p_hat.ln();
    checks.push(check(
        "sup_distribution",
        (neg_log - c).abs() < 3.0 * se / p_hat,
        neg_log,
        c,
        format!(
            "-log P(sup <= 1) = {neg_log:.4}, c = {c:.4}, 3 sigma band {:.4}",
            3.0 * se / p_hat
        ),
    ));

    // Joint exceedance vs the exponent-measure oracle.
    let points = [[-0.5, 0.0], [0.5, 0.0]];
    let thresholds = [1.0, 1.0];
    let oracle = estimators::exponent_oracle(&smith, &points, &thresholds)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let joint = fields
        .iter()
        .filter(|f| f[5] <= 1.0 && f[15] <= 1.0)
        .count() as f64
        / 5000.0;
    let se = (joint * (1.0 - joint) / 5000.0).sqrt();
    checks.push(check(
        "exponent_oracle_2pt",
        (-joint.ln() - oracle).abs() < 3.0 * se / joint,
        -joint.ln(),
        oracle,
        format!("-log P(joint) = {:.4}, oracle = {oracle:.4}", -joint.ln()),
    ));

    // Per-replication identity over 1e4 replications.
    let mismatches: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(seed ^ 0x1111, i);
            let r = simulate_normalized(&smith, &mut stream, StoppingVariant::Exact, &opts)
                .expect("budget not reachable here");
            usize::from(
                stop_index_from_final(c, r.inf_field, &r.partial_sums) != Some(r.n_spectral),
            )
        })
        .sum();
    checks.push(check(
        "replication_identity",
        mismatches == 0,
        mismatches as f64,
        0.0,
        format!("{mismatches} mismatches in 10000 replications"),
    ));

    // Singleton domain and weak variant: one spectral function always.
    let singleton = SpectralModel::new(
        RadialShape::gaussian(1, 1.0)?,
        RectDomain::new(1, 0.0, 0.1)?,
    )?;
    let bad_singleton: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(seed ^ 0x2222, i);
            let r = simulate_normalized(&singleton, &mut stream, StoppingVariant::Exact, &opts)
                .expect("single function");
            usize::from(r.n_spectral != 1)
        })
        .sum();
    checks.push(check(
        "singleton_count",
        bad_singleton == 0,
        bad_singleton as f64,
        0.0,
        format!("{bad_singleton} replications with m != 1"),
    ));
    let bad_weak: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(seed ^ 0x3333, i);
            let r = simulate_normalized(&smith, &mut stream, StoppingVariant::Weak, &opts)
                .expect("single function");
            usize::from(r.n_spectral != 1)
        })
        .sum();
    checks.push(check(
        "weak_variant_count",
        bad_weak == 0,
        bad_weak as f64,
        0.0,
        format!("{bad_weak} replications with m != 1"),
    ));

    // Indicator coincidence under matched streams.
    let indicator = SpectralModel::new(
        RadialShape::indicator(1, 1.0, IndicatorScaling::Raw)?,
        RectDomain::new(1, 1.0, 0.1)?,
    )?;
    let diffs: usize = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut s1 = RngStream::derive(seed ^ 0x4444, i);
            let mut s2 = RngStream::derive(seed ^ 0x4444, i);
            let a = simulate_normalized(&indicator, &mut s1, StoppingVariant::Exact, &opts)
                .expect("indicator sim");
            let b = simulate_schlather(&indicator, 1, &mut s2, &opts).expect("indicator sim");
            usize::from(a.field != b.field || a.n_spectral != b.n_spectral)
        })
        .sum();
    checks.push(check(
        "indicator_coincidence",
        diffs == 0,
        diffs as f64,
        0.0,
        format!("{diffs} mismatching replications out of 1000"),
    ));

    // Counted mean against the formula estimator (3 sigma).
    let summaries: Vec<ReplicationSummary> = (0..5000u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(seed ^ 0x5555, i);
            simulate_normalized(&smith, &mut stream, StoppingVariant::Exact, &opts)
                .map(|r| ReplicationSummary::from(&r))
        })
        .collect::<Result<_, _>>()?;
    let (counted, counted_se) =
        estimators::estimate_counts(&summaries).map_err(|e| CliError::Config(e.to_string()))?;
    let formula = estimators::formula_estimate_q(&summaries, c)
        .map_err(|e| CliError::Config(e.to_string()))?;
    checks.push(check(
        "formula_vs_counted_mean",
        (formula - counted).abs() < 3.0 * 2.0 * counted_se,
        formula,
        counted,
        format!("formula {formula:.4} vs counted {counted:.4} (se {counted_se:.4})"),
    ));

    Ok(checks)
}
