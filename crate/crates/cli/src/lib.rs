//! `hierprobe` command-line front end.
//!
//! Exit codes: 0 success, 2 data error, 3 infeasible configuration,
//! 4 missing embedding key, 64 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hierprobe_core::{
    aggregate_runs, build_splits, evaluate, parse_taxonomies, random_baseline, read_probes,
    render_aggregate, render_report, write_probes, DistanceMethod, EmbeddingTable, EvalError,
    GenConfig, HierarchyProperty, MissingPolicy, ProbeDataset, ProbeError, PropertyReport,
    ReportFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_MISSING_KEY: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "hierprobe",
    version,
    about = "Hierarchy-property probes for concept embeddings"
)]
pub struct Cli {
    /// Seed for sampling, splitting and the random baseline.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Log level (error, warn, info, debug, trace).
    #[arg(long, global = true, env = "HIERPROBE_LOG")]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate train/dev/test probe files from a taxonomy file.
    Generate(GenerateArgs),
    /// Score an embedding table against probe files.
    Evaluate(EvaluateArgs),
    /// Score probe files with random symmetric distances.
    Baseline(BaselineArgs),
    /// Merge saved reports, e.g. one per fine-tuning seed.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub taxonomies: PathBuf,
    /// P-A, P-S, P-F, A-S, A-F, S-F or `all`.
    #[arg(long, default_value = "all")]
    pub property: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_per_node: Option<usize>,
    /// Train, dev and test fractions of the taxonomies.
    #[arg(long, default_value = "0.7,0.15,0.15")]
    pub split_ratios: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistanceArg {
    Cos,
    L2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MissingArg {
    Error,
    Skip,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Glob of probe files, e.g. `probes/*.test.probes`.
    #[arg(long)]
    pub probes: String,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long, value_enum, default_value = "cos")]
    pub distance: DistanceArg,
    #[arg(long, value_enum, default_value = "error")]
    pub missing: MissingArg,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
    /// Also write the report as JSON for `hierprobe report`.
    #[arg(long)]
    pub save_report: Option<PathBuf>,
    /// Row label stored in the saved report.
    #[arg(long)]
    pub label: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub probes: String,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
    #[arg(long)]
    pub save_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Glob of saved JSON reports.
    #[arg(long)]
    pub inputs: String,
    /// Reference accuracy in percent (e.g. the vanilla model's All) for the t-test.
    #[arg(long)]
    pub reference: Option<f64>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Results go to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.log_level.as_deref());
    log::info!("resolved config: {cli:?}");
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn init_logging(level: Option<&str>) {
    let filter = level.unwrap_or("info");
    let _ = env_logger::Builder::new()
        .parse_filters(filter)
        .format_timestamp(None)
        .try_init();
}

/// Maps an error chain onto the stable exit codes.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<ProbeError>() {
            match e {
                ProbeError::InsufficientTaxonomies { .. } => return EXIT_INFEASIBLE,
                ProbeError::InvalidConfig(_) => return EXIT_USAGE,
                _ => {}
            }
        }
        if let Some(EvalError::MissingKey(_)) = cause.downcast_ref::<EvalError>() {
            return EXIT_MISSING_KEY;
        }
    }
    EXIT_DATA
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args, cli.seed, out),
        Command::Evaluate(args) => cmd_evaluate(args, out),
        Command::Baseline(args) => cmd_baseline(args, cli.seed, out),
        Command::Report(args) => cmd_report(args, out),
    }
}

fn parse_ratios(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let values: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| UsageError(format!("--split-ratios `{text}` is not a list of numbers")))?;
    <[f64; 3]>::try_from(values)
        .map_err(|_| UsageError(format!("--split-ratios needs three values, got `{text}`")).into())
}

fn parse_properties(text: &str) -> Result<Vec<HierarchyProperty>> {
    if text.eq_ignore_ascii_case("all") {
        return Ok(HierarchyProperty::ALL.to_vec());
    }
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| UsageError(format!("{e}")).into())
        })
        .collect()
}

pub fn probe_file_name(property: HierarchyProperty, split: hierprobe_core::Split) -> String {
    format!("{property}.{split}.probes")
}

fn cmd_generate(args: &GenerateArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let properties = parse_properties(&args.property)?;
    let config = GenConfig::new(seed, args.max_per_node, parse_ratios(&args.split_ratios)?)?;
    let file = File::open(&args.taxonomies)
        .with_context(|| format!("opening {}", args.taxonomies.display()))?;
    let taxonomies = parse_taxonomies(BufReader::new(file))
        .with_context(|| format!("reading {}", args.taxonomies.display()))?;
    log::info!("{} taxonomies loaded", taxonomies.len());
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    for property in properties {
        let splits = build_splits(&taxonomies, property, &config)?;
        for dataset in splits.iter() {
            let path = args.out.join(probe_file_name(property, dataset.split));
            let file =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_probes(dataset, BufWriter::new(file))?;
            writeln!(out, "{property}\t{}\t{}", dataset.split, dataset.len())?;
        }
    }
    Ok(())
}

fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| UsageError(format!("bad glob `{pattern}`: {e}")))?
        .collect::<Result<_, _>>()?;
    paths.sort();
    if paths.is_empty() {
        bail!("no files match `{pattern}`");
    }
    Ok(paths)
}

fn load_probes(pattern: &str) -> Result<Vec<ProbeDataset>> {
    expand_glob(pattern)?
        .into_iter()
        .map(|path| {
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            read_probes(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
        })
        .collect()
}

fn save_report(path: &Path, report: &PropertyReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let datasets = load_probes(&args.probes)?;
    let file = File::open(&args.embeddings)
        .with_context(|| format!("opening {}", args.embeddings.display()))?;
    let table = EmbeddingTable::load(BufReader::new(file))
        .with_context(|| format!("reading {}", args.embeddings.display()))?
        .with_provenance(args.embeddings.display().to_string());
    let method = match args.distance {
        DistanceArg::Cos => DistanceMethod::Cosine,
        DistanceArg::L2 => DistanceMethod::Euclidean,
    };
    let missing = match args.missing {
        MissingArg::Error => MissingPolicy::Error,
        MissingArg::Skip => MissingPolicy::Skip,
    };
    let report = with_threads(args.threads, || {
        evaluate(&datasets, &table, method, missing)
    })??;
    for (p, s) in &report.per_property {
        if s.skipped > 0 {
            log::warn!(
                "{p}: skipped {} ternaries with missing embeddings",
                s.skipped
            );
        }
    }
    let label = args
        .label
        .clone()
        .unwrap_or_else(|| table.provenance().to_string());
    let report = report.with_label(label);
    write!(out, "{}", render_report(&report, args.format.into()))?;
    if let Some(path) = &args.save_report {
        save_report(path, &report)?;
    }
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(UsageError("--threads must be positive".into()).into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_baseline(args: &BaselineArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    if args.runs == 0 {
        return Err(UsageError("--runs must be at least 1".into()).into());
    }
    let datasets = load_probes(&args.probes)?;
    let report = random_baseline(&datasets, args.runs, seed)?;
    write!(out, "{}", render_report(&report, args.format.into()))?;
    if let Some(path) = &args.save_report {
        save_report(path, &report)?;
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let mut reports = Vec::new();
    for path in expand_glob(&args.inputs)? {
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let report: PropertyReport = serde_json::from_str(&text)
            .with_context(|| format!("malformed report {}", path.display()))?;
        let report = if report.label.is_empty() {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            report.with_label(stem.unwrap_or_default())
        } else {
            report
        };
        reports.push(report);
    }
    let format = args.format.into();
    if reports.len() == 1 {
        if args.reference.is_some() {
            log::warn!("a single report cannot be tested against --reference");
        }
        write!(out, "{}", render_report(&reports[0], format))?;
        return Ok(());
    }
    let reference = args.reference.map(|r| r / 100.0);
    let agg = aggregate_runs(&reports, reference.unwrap_or(0.0)).map_err(|e| match e {
        EvalError::PropertySetMismatch { expected, found } => {
            anyhow!(
                "reports cover different properties: first has [{expected}], another has [{found}]"
            )
        }
        other => other.into(),
    })?;
    write!(
        out,
        "{}",
        render_aggregate(&reports, &agg, reference.is_some(), format)
    )?;
    Ok(())
}
