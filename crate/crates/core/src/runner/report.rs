use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnalysisReport, DatasetScore, RunError, RuntimeReport, ScoreReport, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Self::Table),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(RunError::Config(format!("unknown format `{other}`"))),
        }
    }
}

const AVERAGE: &str = "average";

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn fmt2(v: f64) -> String {
    // Avoid printing "-0.00".
    let r = round2(v);
    format!("{:.2}", if r == 0.0 { 0.0 } else { r })
}

/// Dataset names in first-seen order across reports.
fn dataset_names(reports: &[ScoreReport]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for r in reports {
        for d in &r.datasets {
            if !names.contains(&d.name) {
                names.push(d.name.clone());
            }
        }
    }
    names
}

/// One row per dataset plus an average row, one column per report.
fn grid(reports: &[ScoreReport]) -> Vec<(String, Vec<Option<f64>>)> {
    let names = dataset_names(reports);
    if names.is_empty() {
        return Vec::new();
    }
    let mut rows: Vec<(String, Vec<Option<f64>>)> = names
        .into_iter()
        .map(|name| {
            let cells = reports.iter().map(|r| r.value(&name)).collect();
            (name, cells)
        })
        .collect();
    rows.push((AVERAGE.to_owned(), reports.iter().map(ScoreReport::average).collect()));
    rows
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    task: Task,
    label: String,
    datasets: Vec<DatasetScore>,
    average: Option<f64>,
}

/// Renders score reports side by side. Output depends only on the scores,
/// never on timing or cache state.
pub fn render(reports: &[ScoreReport], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Table => render_table(reports).into_bytes(),
        OutputFormat::Csv => render_csv(reports),
        OutputFormat::Json => {
            let out: Vec<JsonReport> = reports
                .iter()
                .map(|r| JsonReport {
                    task: r.task,
                    label: r.label.clone(),
                    datasets: r
                        .datasets
                        .iter()
                        .map(|d| DatasetScore {
                            value: d.value.map(round2),
                            ..d.clone()
                        })
                        .collect(),
                    average: r.average().map(round2),
                })
                .collect();
            let mut bytes = serde_json::to_vec_pretty(&out).expect("reports serialize");
            bytes.push(b'\n');
            bytes
        }
    }
}

fn render_table(reports: &[ScoreReport]) -> String {
    let mut out = String::new();
    out.push_str("| dataset |");
    for r in reports {
        let _ = write!(out, " {} |", r.label);
    }
    out.push_str("\n|---|");
    for _ in reports {
        out.push_str("---:|");
    }
    out.push('\n');
    let bold = reports.len() >= 2;
    for (name, cells) in grid(reports) {
        let max = cells
            .iter()
            .flatten()
            .map(|v| round2(*v))
            .fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(out, "| {name} |");
        for cell in cells {
            match cell {
                Some(v) if bold && round2(v) == max => {
                    let _ = write!(out, " **{}** |", fmt2(v));
                }
                Some(v) => {
                    let _ = write!(out, " {} |", fmt2(v));
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

fn render_csv(reports: &[ScoreReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset".to_owned()];
    header.extend(reports.iter().map(|r| r.label.clone()));
    w.write_record(&header).expect("write to memory");
    for (name, cells) in grid(reports) {
        let mut record = vec![name];
        record.extend(cells.into_iter().map(|c| c.map(fmt2).unwrap_or_default()));
        w.write_record(&record).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

/// Reads reports back from CSV produced by [`render`]. The average row is
/// recomputed rather than stored, and values carry two decimals.
pub fn parse_csv(bytes: &[u8], task: Task) -> Result<Vec<ScoreReport>, RunError> {
    let bad = |e: csv::Error| RunError::Config(format!("invalid report csv: {e}"));
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = r.headers().map_err(bad)?.clone();
    let mut reports: Vec<ScoreReport> = header
        .iter()
        .skip(1)
        .map(|label| ScoreReport {
            task,
            label: label.to_owned(),
            datasets: Vec::new(),
            metadata: Default::default(),
        })
        .collect();
    for record in r.records() {
        let record = record.map_err(bad)?;
        let name = record.get(0).unwrap_or_default();
        if name == AVERAGE {
            continue;
        }
        for (report, cell) in reports.iter_mut().zip(record.iter().skip(1)) {
            let value = if cell.is_empty() {
                None
            } else {
                Some(
                    cell.parse::<f64>()
                        .map_err(|e| RunError::Config(format!("invalid score `{cell}`: {e}")))?,
                )
            };
            report.datasets.push(DatasetScore {
                name: name.to_owned(),
                value,
                error: value.is_none().then(|| "failed".to_owned()),
            });
        }
    }
    Ok(reports)
}

/// Reads reports rendered as JSON or CSV.
pub fn load_reports(bytes: &[u8], task: Task) -> Result<Vec<ScoreReport>, RunError> {
    let trimmed = bytes.iter().position(|b| !b.is_ascii_whitespace()).map(|i| bytes[i]);
    if matches!(trimmed, Some(b'[') | Some(b'{')) {
        let parsed: Vec<JsonReport> = match serde_json::from_slice::<Vec<JsonReport>>(bytes) {
            Ok(v) => v,
            Err(_) => vec![serde_json::from_slice::<JsonReport>(bytes)
                .map_err(|e| RunError::Config(format!("invalid report json: {e}")))?],
        };
        Ok(parsed
            .into_iter()
            .map(|r| ScoreReport {
                task: r.task,
                label: r.label,
                datasets: r.datasets,
                metadata: Default::default(),
            })
            .collect())
    } else {
        parse_csv(bytes, task)
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".to_owned())
}

const ANALYSIS_COLUMNS: [&str; 11] = [
    "dataset",
    "strategy",
    "generator",
    "original_words",
    "variant_words",
    "word_ratio",
    "jaccard",
    "cos_orig1_aug1",
    "cos_orig2_aug2",
    "cos_aug1_aug2",
    "cos_orig1_orig2",
];

fn analysis_rows(report: &AnalysisReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for d in &report.datasets {
        if let Some(e) = &d.error {
            let mut row = vec![d.name.clone(), "-".to_owned(), format!("error: {e}")];
            row.resize(ANALYSIS_COLUMNS.len(), "-".to_owned());
            rows.push(row);
        }
        for r in &d.rows {
            rows.push(vec![
                d.name.clone(),
                r.strategy.clone(),
                r.generator.clone(),
                format!("{:.2}", r.original_words),
                format!("{:.2}", r.variant_words),
                format!("{:.4}", r.word_ratio),
                format!("{:.4}", r.jaccard),
                format!("{:.4}", r.cos_orig1_aug1),
                fmt_opt(r.cos_orig2_aug2, 4),
                fmt_opt(r.cos_aug1_aug2, 4),
                fmt_opt(r.cos_orig1_orig2, 4),
            ]);
        }
    }
    rows
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n|", header.join(" | "));
    for i in 0..header.len() {
        out.push_str(if i == 0 { "---|" } else { "---:|" });
    }
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

pub fn render_analysis(report: &AnalysisReport, format: OutputFormat) -> Vec<u8> {
    let rows = analysis_rows(report);
    match format {
        OutputFormat::Table => table(&ANALYSIS_COLUMNS, &rows).into_bytes(),
        OutputFormat::Csv => csv_bytes(&ANALYSIS_COLUMNS, &rows),
        OutputFormat::Json => json_bytes(report),
    }
}

pub fn render_runtime(report: &RuntimeReport, format: OutputFormat) -> Vec<u8> {
    let header = ["strategy", "mean_secs", "std_secs", "runs"];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.strategy.clone(),
                format!("{:.3}", r.mean_secs),
                if r.std_defined {
                    format!("{:.3}", r.std_secs)
                } else {
                    format!("{:.3} (single run)", r.std_secs)
                },
                r.runs_secs.len().to_string(),
            ]
        })
        .collect();
    match format {
        OutputFormat::Table => table(&header, &rows).into_bytes(),
        OutputFormat::Csv => csv_bytes(&header, &rows),
        OutputFormat::Json => json_bytes(report),
    }
}

/// Groups reports by task, preserving order, for rendering one table each.
pub fn by_task(reports: Vec<ScoreReport>) -> BTreeMap<&'static str, Vec<ScoreReport>> {
    let mut out: BTreeMap<&'static str, Vec<ScoreReport>> = BTreeMap::new();
    for r in reports {
        out.entry(r.task.metric_name()).or_default().push(r);
    }
    out
}
