//! Command-line entry point.
//!
//! Exit codes: 0 on success, 2 on usage errors (including invalid tunables),
//! 1 on data, format and I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::adaptive::{plan_selection_with, ForceMode, PlanOptions};
use crate::config::SelectionConfig;
use crate::embedding::RelevanceVector;
use crate::error::Error;
use crate::io::{read_embeddings, read_scores, render_record, to_json_sig9, ConfigSnapshot, RunRecord};
use crate::selector::SelectOptions;
use crate::synth::{run_benchmark, BenchSpec, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "keyframe-select",
    version,
    about = "Select query-relevant, mutually diverse keyframes from per-frame embeddings and scores",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    select: SelectArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the synthetic coverage benchmark.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// JSON benchmark spec.
    #[arg(long)]
    spec: PathBuf,
    /// Seeds per case.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    /// CSV report; a `.summary.json` is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ForceModeArg {
    Auto,
    Rd,
    Diversity,
}

impl From<ForceModeArg> for ForceMode {
    fn from(v: ForceModeArg) -> Self {
        match v {
            ForceModeArg::Auto => ForceMode::Auto,
            ForceModeArg::Rd => ForceMode::RelevanceDiversity,
            ForceModeArg::Diversity => ForceMode::DiversityOnly,
        }
    }
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// RDMV embedding file.
    #[arg(long, required = true)]
    embeddings: Option<PathBuf>,
    /// Scores, one per line or {"scores": [...]}.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Number of keyframes.
    #[arg(long, required = true)]
    k: Option<usize>,
    #[arg(long, default_value_t = SelectionConfig::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = SelectionConfig::default().tau)]
    tau: f64,
    #[arg(long, default_value_t = SelectionConfig::default().lambda_min)]
    lambda_min: f64,
    #[arg(long, default_value_t = SelectionConfig::default().lambda_max)]
    lambda_max: f64,
    #[arg(long, default_value_t = SelectionConfig::default().alpha_cv)]
    alpha: f64,
    #[arg(long, default_value_t = SelectionConfig::default().rho_cap)]
    rho_cap: f64,
    #[arg(long, default_value_t = SelectionConfig::default().delta_cv)]
    delta_cv: f64,
    /// Fixed diversity weight for the relevance + diversity path.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = ForceModeArg::Auto)]
    force_mode: ForceModeArg,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include every candidate's gain at the first step.
    #[arg(long)]
    trace: bool,
    /// Record duration_ms as 0 for reproducible output.
    #[arg(long)]
    zero_duration: bool,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn with_context(context: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
        move |err| match err {
            Error::Config(_) => Failure::Usage(format!("{context}: {err}")),
            other => Failure::Data(format!("{context}: {other}")),
        }
    }
}

/// Runs the CLI with process stdout/stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };

    let outcome = match cli.command {
        Some(Command::Bench(args)) => run_bench(&args, out),
        None => run_select(&cli.select, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let e = Cli::command().error(ErrorKind::InvalidValue, msg);
            let _ = err.write_all(e.render().to_string().as_bytes());
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Data(format!("--out {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(format!("standard output: {e}"))),
    }
}

fn run_select(args: &SelectArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let force: ForceMode = args.force_mode.into();
    let emb_path = args.embeddings.as_ref().expect("required by clap");
    let k = args.k.expect("required by clap");
    if args.scores.is_none() && force != ForceMode::DiversityOnly {
        return Err(Failure::Usage(
            "--scores is required unless --force-mode diversity is given".into(),
        ));
    }

    let cfg = SelectionConfig {
        k,
        epsilon: args.epsilon,
        tau: args.tau,
        lambda_min: args.lambda_min,
        lambda_max: args.lambda_max,
        alpha_cv: args.alpha,
        rho_cap: args.rho_cap,
        delta_cv: args.delta_cv,
    };
    cfg.validate().map_err(Failure::with_context("invalid flags"))?;

    let embeddings = read_embeddings(emb_path)
        .map_err(Failure::with_context(format!("--embeddings {}", emb_path.display())))?;
    let scores = match &args.scores {
        Some(p) => read_scores(p).map_err(Failure::with_context(format!("--scores {}", p.display())))?,
        None => RelevanceVector::zeros(embeddings.count()),
    };
    if scores.len() != embeddings.count() {
        return Err(Failure::Data(format!(
            "--scores {} has {} entries but --embeddings {} has {} frames",
            args.scores.as_ref().unwrap().display(),
            scores.len(),
            emb_path.display(),
            embeddings.count()
        )));
    }

    let opts = PlanOptions {
        force,
        lambda_override: args.lambda,
        select: SelectOptions {
            trace_first_step: args.trace,
            ..Default::default()
        },
    };
    let started = Instant::now();
    let (plan, result) = plan_selection_with(&embeddings, &scores, &cfg, &opts)
        .map_err(Failure::with_context("selection"))?;
    let duration_ms = if args.zero_duration {
        0.0
    } else {
        started.elapsed().as_secs_f64() * 1e3
    };

    let record = RunRecord::new(
        &plan,
        &result,
        ConfigSnapshot {
            selection: cfg,
            force_mode: force,
            lambda_override: args.lambda,
        },
        duration_ms,
    );
    emit(&render_record(&record), args.out.as_deref(), out)
}

fn summary_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.summary.json"))
}

fn run_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let ctx = format!("--spec {}", args.spec.display());
    let text = std::fs::read_to_string(&args.spec).map_err(|e| Failure::Data(format!("{ctx}: {e}")))?;
    let spec: BenchSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::Data(format!("{ctx}: invalid benchmark spec: {e}")))?;
    let report = run_benchmark(&spec, &Strategy::ALL, args.seeds).map_err(Failure::with_context(ctx))?;

    emit(&report.to_csv(), Some(&args.out), out)?;
    let summary = summary_path(&args.out);
    emit(&to_json_sig9(&report), Some(&summary), out)?;
    let _ = writeln!(out, "wrote {} and {}", args.out.display(), summary.display());
    Ok(())
}
