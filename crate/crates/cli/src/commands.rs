//! Subcommands and their exit-code contract: 0 success, 1 I/O failure,
//! 2 rejected input (bad submission, bad dataset layout, bad spec).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use vosbench_core::dataset::{DatasetError, DatasetIndex, LoadError, LoadOptions};
use vosbench_core::evaluator::{evaluate_split, EvalConfig, EvalError, SplitOutcome, Task};
use vosbench_core::interactive::scribble::INITIAL_SCRIBBLE_FILE;
use vosbench_core::interactive::{InteractiveService, SystemClock};
use vosbench_core::mask::{ObjectId, DEFAULT_MAX_ID};
use vosbench_core::report;
use vosbench_core::synth::{render_dataset, SynthError, SynthSpec};

use crate::{diag, server, table1};

#[derive(Debug, Parser)]
#[command(name = "vosbench", version, about = "Video object segmentation benchmark toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a results folder against a split.
    Evaluate(EvaluateArgs),
    /// Check a dataset's layout and print its statistics.
    ValidateDataset(ValidateArgs),
    /// Run the interactive scribble service.
    Serve(ServeArgs),
    /// Generate a synthetic dataset from a spec file.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    SemiSupervised,
    Unsupervised,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::SemiSupervised => Task::SemiSupervised,
            TaskArg::Unsupervised => Task::Unsupervised,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset root holding Annotations_unsupervised/, JPEGImages/ and ImageSets/.
    #[arg(long)]
    pub davis_root: PathBuf,
    #[arg(long, default_value = "val")]
    pub split: String,
    /// Ground-truth label to treat as an ignore region instead of rejecting it.
    #[arg(long)]
    pub void_id: Option<ObjectId>,
}

impl DatasetArgs {
    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            max_id: DEFAULT_MAX_ID,
            void_id: self.void_id,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// Folder with one subfolder of PNG masks per sequence.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value_t = vosbench_core::evaluator::DEFAULT_MAX_PROPOSALS)]
    pub max_proposals: usize,
    /// Directory for the report files.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// 0 picks a free port.
    #[arg(long, default_value_t = 8000)]
    pub port: u16,
    /// Multiplier on the per-round time budget; 0 disables it. Falls back to
    /// the VOSBENCH_SESSION_BUDGET_SCALE environment variable, then 1.
    #[arg(long)]
    pub budget_scale: Option<f64>,
    /// Disable time budgets (same as a budget scale of 0).
    #[arg(long)]
    pub frozen_clock: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Invalid(_) => 2,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => Self::Io(e.to_string()),
            DatasetError::Layout(ref violations) => {
                for v in violations {
                    diag::error("layout-violation", json!({"message": v.to_string()}));
                }
                Self::Invalid(e.to_string())
            }
            DatasetError::SplitName(_) => Self::Invalid(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::ResultsRoot { .. } => Self::Io(e.to_string()),
            EvalError::Load(l) => l.into(),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Io { .. } | SynthError::Codec(_) => Self::Io(e.to_string()),
            SynthError::Dataset(d) => d.into(),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate(a) => evaluate(&a),
        Command::ValidateDataset(a) => validate_dataset(&a),
        Command::Serve(a) => serve(&a),
        Command::Synth(a) => synth(&a),
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let index = DatasetIndex::open(&args.dataset.davis_root, &args.dataset.split)?;
    let config = EvalConfig {
        max_proposals: args.max_proposals,
        load: args.dataset.load_options(),
        ..EvalConfig::new(args.task.into())
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| evaluate_split(&index, &args.results, &config))?;
    let report = match outcome {
        SplitOutcome::Evaluated(r) => r,
        SplitOutcome::Rejected(v) => {
            let mut failed = 0;
            for s in v.failures() {
                failed += 1;
                for p in &s.problems {
                    diag::error(
                        "rejected",
                        json!({"sequence": s.sequence, "message": p.to_string(), "problem": p}),
                    );
                }
            }
            return Err(CliError::Invalid(format!(
                "submission rejected: {failed} sequence(s) failed validation"
            )));
        }
    };
    fs::create_dir_all(&args.output).map_err(io(&args.output))?;
    let files: Vec<(&str, String)> = match args.format {
        Format::Csv => vec![
            (report::PER_SEQUENCE_FILE, report::per_sequence_csv(&report)),
            (report::GLOBAL_FILE, report::global_csv(&report)),
        ],
        Format::Json => vec![(report::JSON_FILE, report::report_json(&report))],
    };
    for (name, body) in files {
        let path = args.output.join(name);
        fs::write(&path, body).map_err(io(&path))?;
        diag::info("wrote", json!({"path": path.display().to_string()}));
    }
    print!("{}", report::global_table(&report));
    Ok(())
}

pub fn validate_dataset(args: &ValidateArgs) -> Result<(), CliError> {
    let d = &args.dataset;
    let scan = DatasetIndex::scan(&d.davis_root, &d.split)?;
    if !scan.violations.is_empty() {
        return Err(DatasetError::Layout(scan.violations).into());
    }
    let index = DatasetIndex::open(&d.davis_root, &d.split)?;
    let stats = table1::collect(&index, &d.load_options())?;
    println!("split\t{}", stats.split);
    println!("sequences\t{}", stats.sequences);
    println!("frames\t{}", stats.frames);
    println!("mean frames/sequence\t{:.2}", stats.mean_frames);
    println!("objects\t{}", stats.objects);
    println!("mean objects/sequence\t{:.2}", stats.mean_objects);
    let Some(expected) = table1::expected(&d.split) else {
        println!("comparison\tskipped (not an official split)");
        return Ok(());
    };
    let checks = table1::compare(&stats, expected);
    for c in &checks {
        println!(
            "check\t{}\texpected {}\tgot {}\t{}",
            c.field,
            c.expected,
            c.actual,
            if c.ok { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.ok).collect();
    if failed.is_empty() {
        return Ok(());
    }
    for c in &failed {
        diag::error("statistics-mismatch", json!({"split": d.split, "check": c}));
    }
    Err(CliError::Invalid(format!(
        "{} statistic(s) differ from the published values for {}",
        failed.len(),
        d.split
    )))
}

/// Budget multiplier from flags, then environment, then 1.
pub fn budget_scale(args: &ServeArgs) -> Result<f64, CliError> {
    if args.frozen_clock {
        return Ok(0.0);
    }
    let scale = match args.budget_scale {
        Some(s) => s,
        None => match std::env::var(server::BUDGET_SCALE_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("{}={v:?} is not a number", server::BUDGET_SCALE_ENV)))?,
            Err(_) => 1.0,
        },
    };
    if !scale.is_finite() || scale < 0.0 {
        return Err(CliError::Invalid(format!("budget scale {scale} must be finite and >= 0")));
    }
    Ok(scale)
}

pub fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let d = &args.dataset;
    let index = DatasetIndex::open(&d.davis_root, &d.split)?;
    let missing: Vec<String> = index
        .sequences()
        .iter()
        .filter(|e| !index.scribbles_dir(&e.name).join(INITIAL_SCRIBBLE_FILE).is_file())
        .map(|e| e.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Invalid(format!(
            "no initial scribbles for: {}",
            missing.join(", ")
        )));
    }
    let scale = budget_scale(args)?;
    let service = Arc::new(InteractiveService::new(
        index,
        d.load_options(),
        scale,
        Arc::new(SystemClock::default()),
    ));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| CliError::Io(format!("cannot listen on {}:{}: {e}", args.host, args.port)))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::Io(e.to_string()))?;
        diag::info(
            "listening",
            json!({"address": addr.to_string(), "port": addr.port(), "budget_scale": scale}),
        );
        axum::serve(listener, server::logged_router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Io(e.to_string()))
    })
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.spec).map_err(io(&args.spec))?;
    let spec = SynthSpec::from_json(&text)?;
    let index = render_dataset(&spec, &args.out)?;
    let frames: usize = index.sequences().iter().map(|e| e.frames).sum();
    println!(
        "synthesized {} sequence(s), {frames} frames, split {} under {}",
        index.sequences().len(),
        spec.split,
        args.out.display()
    );
    Ok(())
}
