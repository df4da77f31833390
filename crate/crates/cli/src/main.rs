//! `embcorr` command-line tool.

mod report;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use embcorr::embeddings::{load_text_embeddings, load_word2vec_binary, EmbeddingTable};
use embcorr::eval::{
    load_sts_dir, load_wordsim, sweep, BootstrapOptions, EvalOptions, Separator, SweepConfig,
    SweepReport, Task, WordSimFormat,
};
use embcorr::manifest::{EmbeddingFormat, Manifest};
use embcorr::measures::{similarity, ApsParams};
use embcorr::normality::{mean_census, normality_census, qq_points, Histogram, MeanCensus, NormalityReport};
use embcorr::{MeasureKind, VectorSample};
use serde::Serialize;

use report::Envelope;

const EMBEDDINGS_DIR_VAR: &str = "EMBCORR_EMBEDDINGS_DIR";

#[derive(Parser)]
#[command(name = "embcorr", version, about = "Correlation-based similarity for word embeddings")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    output_format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FormatArg {
    Text,
    Word2vecBin,
}

impl From<FormatArg> for EmbeddingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => EmbeddingFormat::Text,
            FormatArg::Word2vecBin => EmbeddingFormat::Word2vecBin,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeparatorArg {
    Tab,
    Comma,
    Whitespace,
}

#[derive(Args)]
struct EmbeddingArgs {
    /// Embedding file (repeatable). Relative paths that do not exist are
    /// also looked up in $EMBCORR_EMBEDDINGS_DIR.
    #[arg(long = "embeddings", required = true)]
    paths: Vec<PathBuf>,
    /// File format; never guessed from the file name.
    #[arg(long, value_enum)]
    format: FormatArg,
    /// Read only the first N vectors.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct MeasureArgs {
    /// Comma-separated measures: cos, prs, spr, ken, aps.
    #[arg(long, value_delimiter = ',', default_value = "cos,prs,spr,ken,aps")]
    measures: Vec<MeasureKind>,
    #[command(flatten)]
    aps: ApsArgs,
    /// Shapiro-Wilk significance level for the N column.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Lowercase tokens before lookup.
    #[arg(long)]
    lowercase: bool,
}

#[derive(Args)]
struct ApsArgs {
    /// APSynP top-n (default min(100, D)).
    #[arg(long)]
    aps_top_n: Option<usize>,
    /// APSynP rank power.
    #[arg(long, default_value_t = 0.1)]
    aps_power: f64,
}

impl ApsArgs {
    fn params(&self) -> ApsParams {
        ApsParams {
            top_n: self.aps_top_n,
            power: self.aps_power,
        }
    }
}

#[derive(Args)]
struct BootstrapArgs {
    /// Measure pair A:B to compare with a BCa interval on A - B (repeatable).
    #[arg(long = "compare")]
    comparisons: Vec<String>,
    #[arg(long, default_value_t = embcorr::bootstrap::DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Mean census and Shapiro-Wilk normality census of whole tables.
    Profile {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Magnitude above which a vector mean counts as non-zero.
        #[arg(long, default_value_t = 0.05)]
        mean_threshold: f64,
    },
    /// Similarity of two words.
    Sim {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long)]
        measure: MeasureKind,
        #[arg(long)]
        word_a: String,
        #[arg(long)]
        word_b: String,
        #[command(flatten)]
        aps: ApsArgs,
    },
    /// Score word-similarity files.
    Wordsim {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        /// Word-similarity file (repeatable).
        #[arg(long = "task", required = true)]
        tasks: Vec<PathBuf>,
        /// Zero-based column holding the gold score.
        #[arg(long, default_value_t = 2)]
        score_column: usize,
        /// Field separator; detected per line when omitted.
        #[arg(long, value_enum)]
        separator: Option<SeparatorArg>,
        #[command(flatten)]
        measures: MeasureArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
    },
    /// Score SentEval-style STS directories.
    Sts {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        /// STS year directory (repeatable).
        #[arg(long = "task", required = true)]
        tasks: Vec<PathBuf>,
        /// Keep an SMT subtask if present.
        #[arg(long)]
        include_smt: bool,
        #[command(flatten)]
        measures: MeasureArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
    },
    /// Every task × embeddings × measure, with BCa verdicts.
    Sweep {
        /// Data manifest listing embeddings and tasks.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long = "embeddings")]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long = "wordsim")]
        wordsim: Vec<PathBuf>,
        #[arg(long = "sts")]
        sts: Vec<PathBuf>,
        #[arg(long)]
        include_smt: bool,
        /// Skip the best-rank vs best-non-rank comparison on word tasks.
        #[arg(long)]
        no_family_verdicts: bool,
        #[command(flatten)]
        measures: MeasureArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
    },
    /// Q-Q plot data (standardized sample vs normal quantiles) for words.
    ExportQq {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long = "word", required = true)]
        words: Vec<String>,
    },
    /// Histogram data of per-vector means, or of one word's components.
    ExportHist {
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long, default_value_t = embcorr::normality::HISTOGRAM_BINS)]
        bins: usize,
        #[arg(long)]
        word: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize)]
struct EmbeddingSpec {
    label: String,
    path: PathBuf,
    format: EmbeddingFormat,
    limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct TaskSpec {
    kind: &'static str,
    name: String,
    path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<WordSimFormat>,
}

/// Everything that determines a run; echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    command: &'static str,
    embeddings: Vec<EmbeddingSpec>,
    tasks: Vec<TaskSpec>,
    measures: Vec<MeasureKind>,
    alpha: Option<f64>,
    aps_top_n: Option<usize>,
    aps_power: Option<f64>,
    resamples: Option<usize>,
    seed: Option<u64>,
    level: Option<f64>,
    comparisons: Vec<(MeasureKind, MeasureKind)>,
    lowercase: bool,
    include_smt: bool,
    threads: Option<usize>,
    output: Option<PathBuf>,
    output_format: OutputFormat,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    arguments: serde_json::Value,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Ingest(String),
    Eval(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Ingest(_) => 2,
            Failure::Eval(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Ingest(m) | Failure::Eval(m) => m,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn output_error(e: impl std::fmt::Display) -> Failure {
    Failure::Eval(format!("writing output: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("embcorr: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let base = RunConfig {
        command: "",
        embeddings: Vec::new(),
        tasks: Vec::new(),
        measures: Vec::new(),
        alpha: None,
        aps_top_n: None,
        aps_power: None,
        resamples: None,
        seed: None,
        level: None,
        comparisons: Vec::new(),
        lowercase: false,
        include_smt: false,
        threads: cli.threads,
        output: cli.output.clone(),
        output_format: cli.output_format,
        arguments: serde_json::Value::Null,
    };
    let out = Output {
        path: cli.output,
        format: cli.output_format,
    };

    match cli.command {
        Command::Profile {
            embeddings,
            alpha,
            mean_threshold,
        } => {
            check_alpha(alpha)?;
            if !(mean_threshold > 0.0 && mean_threshold.is_finite()) {
                return Err(usage("--mean-threshold must be positive"));
            }
            let specs = embedding_specs(&embeddings)?;
            let config = RunConfig {
                command: "profile",
                embeddings: specs.clone(),
                alpha: Some(alpha),
                arguments: serde_json::json!({ "mean_threshold": mean_threshold }),
                ..base
            };
            let tables = load_tables(&specs)?;
            profile(&config, &out, &tables, alpha, mean_threshold)
        }
        Command::Sim {
            embeddings,
            measure,
            word_a,
            word_b,
            aps,
        } => {
            let specs = embedding_specs(&embeddings)?;
            if specs.len() != 1 {
                return Err(usage("sim takes exactly one --embeddings"));
            }
            let config = RunConfig {
                command: "sim",
                embeddings: specs.clone(),
                measures: vec![measure],
                aps_top_n: aps.aps_top_n,
                aps_power: Some(aps.aps_power),
                arguments: serde_json::json!({ "word_a": word_a, "word_b": word_b }),
                ..base
            };
            let tables = load_tables(&specs)?;
            sim(&config, &out, &tables[0], measure, &word_a, &word_b, aps.params())
        }
        Command::Wordsim {
            embeddings,
            tasks,
            score_column,
            separator,
            measures,
            bootstrap,
        } => {
            let specs = embedding_specs(&embeddings)?;
            let format = WordSimFormat {
                separator: separator.map(|s| match s {
                    SeparatorArg::Tab => Separator::Tab,
                    SeparatorArg::Comma => Separator::Comma,
                    SeparatorArg::Whitespace => Separator::Whitespace,
                }),
                score_column,
                lowercase: measures.lowercase,
            };
            let task_specs = tasks
                .iter()
                .map(|p| TaskSpec {
                    kind: "wordsim",
                    name: stem(p),
                    path: p.clone(),
                    format: Some(format),
                })
                .collect();
            let sweep_config = sweep_config(&measures, &bootstrap, false)?;
            let config = eval_config("wordsim", base, specs, task_specs, &sweep_config, false);
            run_sweep(&config, &out, &sweep_config)
        }
        Command::Sts {
            embeddings,
            tasks,
            include_smt,
            measures,
            bootstrap,
        } => {
            let specs = embedding_specs(&embeddings)?;
            let task_specs = tasks
                .iter()
                .map(|p| TaskSpec {
                    kind: "sts",
                    name: stem(p),
                    path: p.clone(),
                    format: None,
                })
                .collect();
            let sweep_config = sweep_config(&measures, &bootstrap, false)?;
            let config = eval_config("sts", base, specs, task_specs, &sweep_config, include_smt);
            run_sweep(&config, &out, &sweep_config)
        }
        Command::Sweep {
            manifest,
            paths,
            format,
            limit,
            wordsim,
            sts,
            include_smt,
            no_family_verdicts,
            measures,
            mut bootstrap,
        } => {
            let mut specs = Vec::new();
            let mut task_specs = Vec::new();
            let mut include_smt = include_smt;
            if let Some(path) = &manifest {
                let m = Manifest::load(path)
                    .map_err(|e| Failure::Ingest(format!("{}: {e}", path.display())))?;
                specs.extend(m.embeddings.iter().map(|e| EmbeddingSpec {
                    label: e.name.clone(),
                    path: e.path.clone(),
                    format: e.format,
                    limit: e.limit,
                }));
                task_specs.extend(m.wordsim.iter().map(|w| TaskSpec {
                    kind: "wordsim",
                    name: w.name.clone(),
                    path: w.path.clone(),
                    format: Some(w.format()),
                }));
                task_specs.extend(m.sts.iter().map(|s| TaskSpec {
                    kind: "sts",
                    name: s.name.clone(),
                    path: s.path.clone(),
                    format: None,
                }));
                include_smt |= m.sts.iter().any(|s| s.include_smt);
            }
            if !paths.is_empty() {
                let format = format.ok_or_else(|| usage("--embeddings needs --format"))?;
                specs.extend(embedding_specs(&EmbeddingArgs { paths, format, limit })?);
            }
            let word_format = WordSimFormat {
                lowercase: measures.lowercase,
                ..Default::default()
            };
            task_specs.extend(wordsim.iter().map(|p| TaskSpec {
                kind: "wordsim",
                name: stem(p),
                path: p.clone(),
                format: Some(word_format),
            }));
            task_specs.extend(sts.iter().map(|p| TaskSpec {
                kind: "sts",
                name: stem(p),
                path: p.clone(),
                format: None,
            }));
            if specs.is_empty() {
                return Err(usage("sweep needs embeddings (--embeddings or --manifest)"));
            }
            if task_specs.is_empty() {
                return Err(usage("sweep needs tasks (--wordsim, --sts or --manifest)"));
            }
            if bootstrap.comparisons.is_empty() {
                bootstrap.comparisons.push("spr:cos".into());
            }
            let sweep_config = sweep_config(&measures, &bootstrap, !no_family_verdicts)?;
            let config = eval_config("sweep", base, specs, task_specs, &sweep_config, include_smt);
            run_sweep(&config, &out, &sweep_config)
        }
        Command::ExportQq { embeddings, words } => {
            let specs = embedding_specs(&embeddings)?;
            let config = RunConfig {
                command: "export-qq",
                embeddings: specs.clone(),
                arguments: serde_json::json!({ "words": words }),
                ..base
            };
            let tables = load_tables(&specs)?;
            export_qq(&config, &out, &tables, &words)
        }
        Command::ExportHist {
            embeddings,
            bins,
            word,
        } => {
            if bins == 0 {
                return Err(usage("--bins must be at least 1"));
            }
            let specs = embedding_specs(&embeddings)?;
            let config = RunConfig {
                command: "export-hist",
                embeddings: specs.clone(),
                arguments: serde_json::json!({ "bins": bins, "word": word }),
                ..base
            };
            let tables = load_tables(&specs)?;
            export_hist(&config, &out, &tables, bins, word.as_deref())
        }
    }
}

fn check_alpha(alpha: f64) -> Outcome<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--alpha must be in (0, 1), got {alpha}")))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn resolve_embedding_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(EMBEDDINGS_DIR_VAR) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn embedding_specs(args: &EmbeddingArgs) -> Outcome<Vec<EmbeddingSpec>> {
    if args.limit == Some(0) {
        return Err(usage("--limit must be at least 1"));
    }
    Ok(args
        .paths
        .iter()
        .map(|p| {
            let path = resolve_embedding_path(p);
            EmbeddingSpec {
                label: path
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string()),
                path,
                format: args.format.into(),
                limit: args.limit,
            }
        })
        .collect())
}

fn load_tables(specs: &[EmbeddingSpec]) -> Outcome<Vec<EmbeddingTable>> {
    specs
        .iter()
        .map(|spec| {
            let context = |e: &dyn std::fmt::Display| Failure::Ingest(format!("{}: {e}", spec.path.display()));
            let file = File::open(&spec.path).map_err(|e| context(&e))?;
            let reader = BufReader::with_capacity(1 << 20, file);
            match spec.format {
                EmbeddingFormat::Text => load_text_embeddings(reader, spec.limit, &spec.label),
                EmbeddingFormat::Word2vecBin => load_word2vec_binary(reader, spec.limit, &spec.label),
            }
            .map_err(|e| context(&e))
        })
        .collect()
}

fn parse_comparison(s: &str) -> Outcome<(MeasureKind, MeasureKind)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("--compare expects A:B, got '{s}'")))?;
    let parse = |m: &str| m.parse::<MeasureKind>().map_err(|e| usage(e.to_string()));
    Ok((parse(a)?, parse(b)?))
}

fn sweep_config(measures: &MeasureArgs, bootstrap: &BootstrapArgs, family: bool) -> Outcome<SweepConfig> {
    check_alpha(measures.alpha)?;
    if !(bootstrap.level > 0.0 && bootstrap.level < 1.0) {
        return Err(usage("--level must be in (0, 1)"));
    }
    if bootstrap.resamples == 0 {
        return Err(usage("--resamples must be at least 1"));
    }
    if measures.measures.is_empty() {
        return Err(usage("no measures given"));
    }
    let comparisons = bootstrap
        .comparisons
        .iter()
        .map(|c| parse_comparison(c))
        .collect::<Outcome<Vec<_>>>()?;
    for &(a, b) in &comparisons {
        if !measures.measures.contains(&a) || !measures.measures.contains(&b) {
            return Err(usage(format!("--compare {a}:{b} uses a measure not in --measures")));
        }
    }
    Ok(SweepConfig {
        measures: measures.measures.clone(),
        comparisons,
        family_verdicts: family,
        options: EvalOptions {
            aps: measures.aps.params(),
            alpha: measures.alpha,
            lowercase: measures.lowercase,
        },
        bootstrap: BootstrapOptions {
            level: bootstrap.level,
            resamples: bootstrap.resamples,
            seed: bootstrap.seed,
        },
    })
}

fn eval_config(
    command: &'static str,
    base: RunConfig,
    embeddings: Vec<EmbeddingSpec>,
    tasks: Vec<TaskSpec>,
    sweep: &SweepConfig,
    include_smt: bool,
) -> RunConfig {
    let bootstrapped = !sweep.comparisons.is_empty() || sweep.family_verdicts;
    RunConfig {
        command,
        embeddings,
        tasks,
        measures: sweep.measures.clone(),
        alpha: Some(sweep.options.alpha),
        aps_top_n: sweep.options.aps.top_n,
        aps_power: Some(sweep.options.aps.power),
        resamples: bootstrapped.then_some(sweep.bootstrap.resamples),
        seed: Some(sweep.bootstrap.seed),
        level: bootstrapped.then_some(sweep.bootstrap.level),
        comparisons: sweep.comparisons.clone(),
        lowercase: sweep.options.lowercase,
        include_smt,
        ..base
    }
}

fn load_tasks(config: &RunConfig) -> Outcome<Vec<Task>> {
    config
        .tasks
        .iter()
        .map(|spec| {
            let context = |e: &dyn std::fmt::Display| Failure::Ingest(format!("{}: {e}", spec.path.display()));
            if spec.kind == "sts" {
                load_sts_dir(&spec.path, &spec.name, config.include_smt)
                    .map(Task::Sts)
                    .map_err(|e| context(&e))
            } else {
                let file = File::open(&spec.path).map_err(|e| context(&e))?;
                let format = spec.format.unwrap_or_default();
                load_wordsim(BufReader::new(file), &spec.name, format)
                    .map(Task::Word)
                    .map_err(|e| context(&e))
            }
        })
        .collect()
}

struct Output {
    path: Option<PathBuf>,
    format: OutputFormat,
}

impl Output {
    fn emit(&self, bytes: &[u8]) -> Outcome<()> {
        self.emit_to(self.path.as_deref(), bytes)
    }

    fn emit_to(&self, path: Option<&Path>, bytes: &[u8]) -> Outcome<()> {
        match path {
            Some(p) => report::write_atomic(p, bytes).map_err(|e| output_error(format!("{}: {e}", p.display()))),
            None => io::stdout().write_all(bytes).map_err(output_error),
        }
    }

    fn json<T: Serialize>(&self, config: &RunConfig, result: T) -> Outcome<()> {
        let bytes = Envelope::new(config, result).to_json().map_err(output_error)?;
        self.emit(&bytes)
    }

    fn csv(&self, config: &RunConfig, body: &[u8]) -> Outcome<()> {
        let bytes = report::csv_with_config(config, body).map_err(output_error)?;
        self.emit(&bytes)
    }
}

fn csv_rows<I, R>(header: &[&str], rows: I) -> Outcome<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(output_error)?;
    for row in rows {
        w.write_record(row).map_err(output_error)?;
    }
    w.into_inner().map_err(|e| output_error(e.error()))
}

#[derive(Serialize)]
struct Profile {
    embeddings: String,
    words: usize,
    dimension: usize,
    duplicates_dropped: usize,
    skipped_lines: usize,
    mean_census: MeanCensus,
    normality: NormalityReport,
}

fn profile(
    config: &RunConfig,
    out: &Output,
    tables: &[EmbeddingTable],
    alpha: f64,
    threshold: f64,
) -> Outcome<()> {
    let mut profiles = Vec::new();
    for table in tables {
        let eval = |e: embcorr::Error| Failure::Eval(format!("{}: {e}", table.source_label()));
        let samples: Vec<VectorSample> = table
            .iter()
            .filter_map(|(_, v)| VectorSample::new(v).ok())
            .collect();
        profiles.push(Profile {
            embeddings: table.source_label().to_owned(),
            words: table.len(),
            dimension: table.dimension(),
            duplicates_dropped: table.duplicates_dropped(),
            skipped_lines: table.skipped_lines(),
            mean_census: mean_census(table, threshold).map_err(eval)?,
            normality: normality_census(&samples, alpha).map_err(eval)?,
        });
    }
    match out.format {
        OutputFormat::Json => out.json(config, &profiles),
        OutputFormat::Csv => {
            let rows = profiles.iter().map(|p| {
                vec![
                    p.embeddings.clone(),
                    p.words.to_string(),
                    p.dimension.to_string(),
                    p.mean_census.exceeding.to_string(),
                    format!("{:.6}", p.mean_census.fraction),
                    p.normality.total.to_string(),
                    p.normality.not_rejected.to_string(),
                    p.normality.untestable.to_string(),
                    format!("{:.4}", p.normality.proportion),
                ]
            });
            let body = csv_rows(
                &[
                    "embeddings",
                    "words",
                    "dimension",
                    "means_exceeding",
                    "mean_fraction",
                    "tested",
                    "not_rejected",
                    "untestable",
                    "normal_proportion",
                ],
                rows,
            )?;
            out.csv(config, &body)
        }
    }
}

#[derive(Serialize)]
struct SimResult<'a> {
    word_a: &'a str,
    word_b: &'a str,
    measure: MeasureKind,
    value: f64,
}

fn sim(
    config: &RunConfig,
    out: &Output,
    table: &EmbeddingTable,
    measure: MeasureKind,
    word_a: &str,
    word_b: &str,
    aps: ApsParams,
) -> Outcome<()> {
    let vector = |w: &str| {
        table
            .get(w)
            .ok_or_else(|| Failure::Eval(format!("'{w}' is not in {}", table.source_label())))
            .and_then(|v| VectorSample::new(v).map_err(|e| Failure::Eval(format!("'{w}': {e}"))))
    };
    let value = similarity(measure, vector(word_a)?, vector(word_b)?, aps)
        .map_err(|e| Failure::Eval(format!("{word_a}/{word_b}: {e}")))?;
    println!("{value}");
    if out.path.is_some() {
        let result = SimResult {
            word_a,
            word_b,
            measure,
            value,
        };
        match out.format {
            OutputFormat::Json => out.json(config, result)?,
            OutputFormat::Csv => {
                let body = csv_rows(
                    &["word_a", "word_b", "measure", "value"],
                    [[word_a.to_owned(), word_b.to_owned(), measure.to_string(), value.to_string()]],
                )?;
                out.csv(config, &body)?;
            }
        }
    }
    Ok(())
}

fn run_sweep(config: &RunConfig, out: &Output, sweep_config: &SweepConfig) -> Outcome<()> {
    let tables = load_tables(&config.embeddings)?;
    let tasks = load_tasks(config)?;
    let result = sweep(&tasks, &tables, sweep_config);
    for f in &result.failures {
        let measure = f.measure.map(|m| format!(" {m}")).unwrap_or_default();
        eprintln!("embcorr: {} / {}{measure}: {}", f.task, f.embeddings, f.error);
    }
    if result.reports.is_empty() {
        return Err(Failure::Eval("every evaluation cell failed".into()));
    }
    write_sweep(config, out, &result, &sweep_config.measures)
}

fn write_sweep(config: &RunConfig, out: &Output, result: &SweepReport, measures: &[MeasureKind]) -> Outcome<()> {
    match out.format {
        OutputFormat::Json => out.json(config, result),
        OutputFormat::Csv => {
            let scores = report::scores_csv(result, measures).map_err(output_error)?;
            let has_comparisons =
                !result.family_verdicts.is_empty() || result.reports.iter().any(|r| !r.verdicts.is_empty());
            if !has_comparisons {
                return out.csv(config, &scores);
            }
            let comparisons = report::comparisons_csv(result).map_err(output_error)?;
            let comparisons = report::csv_with_config(config, &comparisons).map_err(output_error)?;
            match &out.path {
                Some(path) => {
                    let sibling = path.with_file_name(format!("{}.comparisons.csv", stem(path)));
                    out.emit_to(Some(&sibling), &comparisons)?;
                    out.csv(config, &scores)
                }
                None => {
                    out.csv(config, &scores)?;
                    out.emit_to(None, b"\n")?;
                    out.emit_to(None, &comparisons)
                }
            }
        }
    }
}

#[derive(Serialize)]
struct QqSeries {
    embeddings: String,
    word: String,
    points: Vec<(f64, f64)>,
}

fn export_qq(config: &RunConfig, out: &Output, tables: &[EmbeddingTable], words: &[String]) -> Outcome<()> {
    let mut series = Vec::new();
    for table in tables {
        for word in words {
            let v = table
                .get(word)
                .ok_or_else(|| Failure::Eval(format!("'{word}' is not in {}", table.source_label())))?;
            let points = VectorSample::new(v)
                .and_then(qq_points)
                .map_err(|e| Failure::Eval(format!("'{word}': {e}")))?;
            series.push(QqSeries {
                embeddings: table.source_label().to_owned(),
                word: word.clone(),
                points,
            });
        }
    }
    match out.format {
        OutputFormat::Json => out.json(config, &series),
        OutputFormat::Csv => {
            let rows = series.iter().flat_map(|s| {
                s.points
                    .iter()
                    .map(move |(x, y)| [s.embeddings.clone(), s.word.clone(), x.to_string(), y.to_string()])
            });
            let body = csv_rows(&["embeddings", "word", "x", "y"], rows)?;
            out.csv(config, &body)
        }
    }
}

#[derive(Serialize)]
struct HistogramSeries {
    embeddings: String,
    /// `vector means` or the word whose components were binned.
    of: String,
    histogram: Histogram,
}

fn export_hist(
    config: &RunConfig,
    out: &Output,
    tables: &[EmbeddingTable],
    bins: usize,
    word: Option<&str>,
) -> Outcome<()> {
    let mut series = Vec::new();
    for table in tables {
        let (of, values) = match word {
            Some(w) => {
                let v = table
                    .get(w)
                    .ok_or_else(|| Failure::Eval(format!("'{w}' is not in {}", table.source_label())))?;
                (w.to_owned(), v.to_vec())
            }
            None => (
                "vector means".to_owned(),
                table
                    .iter()
                    .map(|(_, v)| v.iter().sum::<f64>() / v.len() as f64)
                    .collect(),
            ),
        };
        let histogram = Histogram::from_values(&values, bins)
            .map_err(|e| Failure::Eval(format!("{}: {e}", table.source_label())))?;
        series.push(HistogramSeries {
            embeddings: table.source_label().to_owned(),
            of,
            histogram,
        });
    }
    match out.format {
        OutputFormat::Json => out.json(config, &series),
        OutputFormat::Csv => {
            let rows = series.iter().flat_map(|s| {
                s.histogram.bins.iter().map(move |b| {
                    [
                        s.embeddings.clone(),
                        s.of.clone(),
                        b.left.to_string(),
                        b.right.to_string(),
                        b.count.to_string(),
                    ]
                })
            });
            let body = csv_rows(&["embeddings", "of", "bin_left", "bin_right", "count"], rows)?;
            out.csv(config, &body)
        }
    }
}
