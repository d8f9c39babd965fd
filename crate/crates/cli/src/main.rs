use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gase::runner::{
    self, render, render_analysis, render_runtime, CacheOptions, DatasetData, Experiment, ExperimentConfig,
    IrAugmentScope, OutputFormat, ScoreReport, Task,
};
use gase::TextUnit;

#[derive(Parser)]
#[command(name = "gase", version, about = "Generatively augmented sentence encoding experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cache directory; overrides GASE_CACHE_DIR and the config file.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Ignore cached entries (new results are still written).
    #[arg(long, global = true)]
    no_cache: bool,

    /// Overrides the experiment seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write output here instead of stdout. Run metadata goes to `<out>.meta.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Sts,
    Pc,
    Ir,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Sts => Task::Sts,
            TaskArg::Pc => Task::Pc,
            TaskArg::Ir => Task::Ir,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write augmentation records (JSON lines) for the configured datasets or a single text.
    Augment {
        /// Augment this text instead of the datasets.
        #[arg(long)]
        text: Option<String>,
    },
    /// Spearman correlation on STS datasets.
    EvalSts,
    /// Average precision on pair-classification datasets.
    EvalPc,
    /// NDCG@10 on retrieval datasets.
    EvalIr,
    /// Word-count, Jaccard and cosine statistics of the variants.
    Analyze,
    /// Wall-clock runtime with and without each strategy.
    Time {
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Combine saved score reports (JSON or CSV) into one comparison.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Task assumed for CSV inputs.
        #[arg(long, value_enum, default_value_t = TaskArg::Sts)]
        task: TaskArg,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let path = common.config.as_deref().context("--config is required for this command")?;
    let mut config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn cache_options(common: &Common) -> CacheOptions {
    CacheOptions {
        dir: common.cache_dir.clone(),
        no_cache: common.no_cache,
    }
}

fn emit(common: &Common, bytes: &[u8]) -> Result<()> {
    match &common.out {
        Some(path) => runner::write_output(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_meta(common: &Common, meta: serde_json::Value) -> Result<()> {
    if let Some(out) = &common.out {
        let mut bytes = serde_json::to_vec_pretty(&meta)?;
        bytes.push(b'\n');
        runner::write_output(&meta_path(out), &bytes)?;
    }
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn run(cli: Cli) -> Result<i32> {
    let common = &cli.common;
    let format = OutputFormat::from(common.format);
    match cli.command {
        Command::Augment { text } => {
            let config = load_config(common)?;
            let inputs = match text {
                Some(t) => vec![TextUnit::new("input", t)],
                None => dataset_texts(&config)?,
            };
            let experiment = Experiment::from_config(config, &cache_options(common))?;
            let records = experiment.augment_all(&inputs)?;
            let mut out = Vec::new();
            for record in records.iter().flatten() {
                serde_json::to_writer(&mut out, record)?;
                out.push(b'\n');
            }
            emit(common, &out)?;
            emit_meta(common, serde_json::to_value(experiment.augmenter().counts())?)?;
            Ok(0)
        }
        Command::EvalSts | Command::EvalPc | Command::EvalIr => {
            let task = match cli.command {
                Command::EvalSts => Task::Sts,
                Command::EvalPc => Task::Pc,
                _ => Task::Ir,
            };
            let config = load_config(common)?;
            let report = runner::run_task(config, task, &cache_options(common))?;
            emit(common, &render(std::slice::from_ref(&report), format))?;
            emit_meta(common, serde_json::to_value(&report.metadata)?)?;
            Ok(exit_code(&report))
        }
        Command::Analyze => {
            let config = load_config(common)?;
            let report = runner::analyze(config, &cache_options(common))?;
            emit(common, &render_analysis(&report, format))?;
            Ok(0)
        }
        Command::Time { repeats } => {
            let config = load_config(common)?;
            let report = runner::time_run(&config, repeats, &cache_options(common))?;
            emit(common, &render_runtime(&report, format))?;
            Ok(0)
        }
        Command::Report { inputs, task } => {
            let mut reports = Vec::new();
            for path in &inputs {
                let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                reports.extend(
                    runner::load_reports(&bytes, task.into()).with_context(|| format!("parsing {}", path.display()))?,
                );
            }
            emit(common, &render(&reports, format))?;
            Ok(0)
        }
    }
}

/// Non-zero only when every dataset of the task failed.
fn exit_code(report: &ScoreReport) -> i32 {
    if report.datasets.is_empty() {
        log::warn!("no {:?} datasets in the configuration", report.task);
        return 0;
    }
    if report.datasets.iter().all(|d| d.value.is_none()) {
        2
    } else {
        0
    }
}

fn dataset_texts(config: &ExperimentConfig) -> Result<Vec<TextUnit>> {
    let mut inputs = Vec::new();
    for d in runner::load_datasets(config) {
        let data = match d.data {
            Ok(data) => data,
            Err(e) => bail!("dataset {}: {e}", d.name),
        };
        match data {
            DatasetData::Sts(sts) => {
                for r in sts.rows {
                    inputs.push(TextUnit::new(format!("{}/{}/1", d.name, r.id), r.sentence1));
                    inputs.push(TextUnit::new(format!("{}/{}/2", d.name, r.id), r.sentence2));
                }
            }
            DatasetData::Pc(pc) => {
                for r in pc.rows {
                    inputs.push(TextUnit::new(format!("{}/{}/1", d.name, r.id), r.sentence1));
                    inputs.push(TextUnit::new(format!("{}/{}/2", d.name, r.id), r.sentence2));
                }
            }
            DatasetData::Ir(ir) => {
                for q in ir.queries {
                    inputs.push(TextUnit::new(format!("{}/q/{}", d.name, q.id), q.text));
                }
                if config.ir_augment_scope == IrAugmentScope::QueriesAndCorpus {
                    for doc in ir.corpus {
                        inputs.push(TextUnit::new(format!("{}/d/{}", d.name, doc.id), doc.text));
                    }
                }
            }
        }
    }
    Ok(inputs)
}
