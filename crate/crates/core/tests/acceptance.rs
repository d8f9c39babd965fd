//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

mod common;

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use common::fixtures;
use gase::augment::{AugmentationStrategy, Augmenter};
use gase::embedprovider::{EmbeddingProvider, HashBowProvider};
use gase::genclient::{make_stub, CountingClient, GenerationError, StubConfig, StubKind};
use gase::metrics::{self, MetricError, RankedList, SimilarityPairBatch};
use gase::runner::{
    self, load_datasets, render, CacheOptions, DatasetConfig, DatasetSource, EmbeddingConfig, Experiment,
    ExperimentConfig, GeneratorConfig, GeneratorSource, LoadedDataset, OutputFormat, StubSpec, Task,
};
use gase::{AugmentationKind, GenerationParams, GenerativeClient, PoolingSpec, TextUnit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "metric oracle equivalence", criterion_1),
        (2, "closed-form spot checks", criterion_2),
        (3, "identity augmentation is a no-op", criterion_3),
        (4, "weighted pooling consistency", criterion_4),
        (5, "random keyword rule", criterion_5),
        (6, "cache determinism", criterion_6),
        (7, "keyword extraction beats random keywords", criterion_7),
        (8, "analysis shapes", criterion_8),
        (9, "GloVe k=0 STS average (optional)", criterion_9),
        (10, "runtime harness", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(outcome) => outcome,
            Err(panic) => Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".to_owned())),
        };
        match outcome {
            Ok(detail) if detail.starts_with("SKIP ") => println!("criterion {id:>2} SKIP  {name}: {}", &detail[5..]),
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- helpers

fn sts(name: &str, file: &str) -> DatasetConfig {
    DatasetConfig {
        name: name.into(),
        source: DatasetSource::Sts {
            path: fixtures().join(file),
        },
    }
}

fn pc() -> DatasetConfig {
    DatasetConfig {
        name: "pc".into(),
        source: DatasetSource::Pc {
            path: fixtures().join("pc_small.jsonl"),
        },
    }
}

fn ir() -> DatasetConfig {
    DatasetConfig {
        name: "ir".into(),
        source: DatasetSource::Ir {
            queries: fixtures().join("ir_queries.jsonl"),
            corpus: fixtures().join("ir_corpus.jsonl"),
            qrels: fixtures().join("ir_qrels.tsv"),
        },
    }
}

fn config(datasets: Vec<DatasetConfig>) -> ExperimentConfig {
    ExperimentConfig {
        name: "run".into(),
        embedding: EmbeddingConfig::HashBow { dim: 256, seed: 11 },
        datasets,
        ..ExperimentConfig::default()
    }
}

fn stub(kind: StubKind, seed: u64) -> GeneratorConfig {
    let mut g = GeneratorConfig::stub(kind);
    if let GeneratorSource::Stub(spec) = &mut g.source {
        spec.seed = seed;
    }
    g
}

fn experiment(config: &ExperimentConfig) -> (Experiment, Vec<LoadedDataset>) {
    let datasets = load_datasets(config);
    (
        Experiment::from_config(config.clone(), &CacheOptions::default()).expect("valid config"),
        datasets,
    )
}

fn all_formats(reports: &[runner::ScoreReport]) -> Vec<Vec<u8>> {
    [OutputFormat::Table, OutputFormat::Csv, OutputFormat::Json]
        .into_iter()
        .map(|f| render(reports, f))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

// ------------------------------------------------------------- criterion 1

/// Rank of each value: 1 + number of smaller values + half the other ties.
fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let cov = sxy - sx * sy / n;
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    (vx > 1e-9 && vy > 1e-9).then(|| cov / (vx * vy).sqrt())
}

fn ap_oracle(order: &[usize], labels: &[bool]) -> f64 {
    let relevant = labels.iter().filter(|l| **l).count();
    let mut total = 0.0;
    for k in 1..=order.len() {
        if labels[order[k - 1]] {
            let in_top = order[..k].iter().filter(|i| labels[**i]).count();
            total += in_top as f64 / k as f64;
        }
    }
    total / relevant as f64
}

fn dcg(rels: &[u32]) -> f64 {
    rels.iter()
        .take(10)
        .enumerate()
        .map(|(i, r)| (2f64.powi(*r as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=50);
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            if case % 2 == 0 {
                rng.random_range(0..6) as f64
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        let mut sims: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let gold: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64 * 1.25).collect();
        // Inject a tie into the continuous cases as well.
        if n > 2 {
            sims[1] = sims[0];
        }
        let expected = oracle_pearson(&oracle_ranks(&sims), &oracle_ranks(&gold));
        let got = metrics::spearman(&SimilarityPairBatch {
            sims: sims.clone(),
            gold: gold.clone(),
        });
        match (expected, got) {
            (Some(e), Ok(g)) => {
                let d = (e - g).abs();
                worst = worst.max(d);
                ensure!(d <= 1e-12, "case {case}: spearman {g} vs oracle {e}");
            }
            (None, Err(MetricError::DegenerateInput)) => degenerate += 1,
            (e, g) => return Err(format!("case {case}: oracle {e:?} vs {g:?}")),
        }
    }

    let mut ap_checks = 0usize;
    for n in 1..=6 {
        let perms = permutations(n);
        for mask in 1u32..(1 << n) {
            let labels: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            for order in &perms {
                let mut scores = vec![0.0; n];
                for (pos, &item) in order.iter().enumerate() {
                    scores[item] = (n - pos) as f64;
                }
                let got = metrics::average_precision(&scores, &labels).map_err(|e| e.to_string())?;
                let want = ap_oracle(order, &labels);
                ensure!(got == want, "AP {got} vs oracle {want} for {labels:?} ranked {order:?}");
                ap_checks += 1;
            }
        }
    }

    let mut ndcg_checks = 0usize;
    for n in 1..=6 {
        let perms = permutations(n);
        let levels: u32 = if n <= 5 { 3 } else { 2 };
        for code in 0..levels.pow(n as u32) {
            let rels: Vec<u32> = (0..n).map(|i| code / levels.pow(i as u32) % levels).collect();
            if rels.iter().all(|r| *r == 0) {
                continue;
            }
            // Ideal DCG by exhaustive search over every arrangement.
            let ideal = perms
                .iter()
                .map(|p| dcg(&p.iter().map(|i| rels[*i]).collect::<Vec<_>>()))
                .fold(f64::NEG_INFINITY, f64::max);
            let qrels: HashMap<String, u32> = rels.iter().enumerate().map(|(i, r)| (format!("d{i}"), *r)).collect();
            for order in &perms {
                let ranked = RankedList::from_ordered_ids(order.iter().map(|i| format!("d{i}")));
                let got = metrics::ndcg_at_k(&ranked, &qrels, 10).map_err(|e| e.to_string())?;
                let want = dcg(&order.iter().map(|i| rels[*i]).collect::<Vec<_>>()) / ideal;
                ensure!(got == want, "NDCG {got} vs oracle {want} for {rels:?} ranked {order:?}");
                ndcg_checks += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(elapsed < 5.0, "took {elapsed:.2}s");
    Ok(format!(
        "200 spearman cases (max |d| {worst:.1e}, {degenerate} degenerate agreed), {ap_checks} AP and {ndcg_checks} NDCG orderings exact, {elapsed:.2}s"
    ))
}

// ------------------------------------------------------------- criterion 2

fn criterion_2() -> Outcome {
    let c = metrics::cosine_slices(&[1.0, 1.0], &[1.0, 0.0]).map_err(|e| e.to_string())?.value;
    let want = 1.0 / 2f64.sqrt();
    ensure!((c - want).abs() <= 1e-12, "cosine {c} vs {want}");
    let ranked = RankedList::from_ordered_ids(["x", "hit", "y"]);
    let qrels: HashMap<String, u32> = [("hit".to_string(), 1)].into();
    let n = metrics::ndcg_at_k(&ranked, &qrels, 10).map_err(|e| e.to_string())?;
    let want_n = 1.0 / 3f64.log2();
    ensure!((n - want_n).abs() <= 1e-12, "ndcg {n} vs {want_n}");
    Ok(format!("cosine {c:.15}, ndcg {n:.15}"))
}

// ------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let datasets = vec![sts("small", "sts_small.jsonl"), sts("fifty", "sts50.jsonl")];
    let base = config(datasets);
    let (exp, data) = experiment(&base);
    let baseline = all_formats(&[exp.run_sts(&data)]);
    let mut runs = 0;
    let cases: Vec<(Vec<AugmentationKind>, usize)> = vec![
        (vec![AugmentationKind::Paraphrase], 1),
        (vec![AugmentationKind::Paraphrase], 2),
        (vec![AugmentationKind::Paraphrase], 3),
        (
            vec![
                AugmentationKind::Paraphrase,
                AugmentationKind::Summarise,
                AugmentationKind::ExtractKeywords,
            ],
            2,
        ),
    ];
    for (strategies, generators) in cases {
        let mut cfg = base.clone();
        cfg.strategies = strategies;
        cfg.generators = (0..generators).map(|_| stub(StubKind::Identity, 0)).collect();
        let k = cfg.k();
        let (exp, data) = experiment(&cfg);
        let report = exp.run_sts(&data);
        ensure!(report.metadata.augment.requests > 0, "k={k}: no augmentation happened");
        ensure!(all_formats(&[report]) == baseline, "k={k}: report differs from the k=0 baseline");
        runs += 1;
    }
    Ok(format!("{runs} identity runs (k = 1, 2, 3, 6) byte-identical to k=0 in table, csv and json"))
}

// ------------------------------------------------------------- criterion 4

fn criterion_4() -> Outcome {
    let base = config(vec![sts("small", "sts_small.jsonl"), sts("fifty", "sts50.jsonl")]);
    let (exp, data) = experiment(&base);
    let baseline = all_formats(&[exp.run_sts(&data)]);

    let mut augmented = base.clone();
    augmented.strategies = vec![AugmentationKind::Paraphrase];
    augmented.generators = vec![stub(StubKind::NoiseSuffix, 1), stub(StubKind::NoiseSuffix, 2)];
    let k = augmented.k();

    let mut w1 = augmented.clone();
    w1.pooling = PoolingSpec::weighted(1.0);
    let (exp, data) = experiment(&w1);
    ensure!(all_formats(&[exp.run_sts(&data)]) == baseline, "w=1.0 differs from k=0");

    let mut mean = augmented.clone();
    mean.pooling = PoolingSpec::mean();
    let mut uniform = augmented.clone();
    uniform.pooling = PoolingSpec::weighted(1.0 / (k + 1) as f64);
    let (mean_exp, data) = experiment(&mean);
    let (uniform_exp, _) = experiment(&uniform);
    let a = mean_exp.sts_similarities(&data);
    let b = uniform_exp.sts_similarities(&data);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for ((name, x), (_, y)) in a.into_iter().zip(b) {
        let (x, y) = (x.map_err(|e| e.to_string())?, y.map_err(|e| e.to_string())?);
        ensure!(x.len() == y.len(), "{name}: length mismatch");
        for (p, q) in x.iter().zip(&y) {
            worst = worst.max((p - q).abs());
            compared += 1;
        }
    }
    ensure!(worst <= 1e-10, "max |d| {worst:e} exceeds 1e-10");
    // Mean pooling must actually differ from the original here.
    let (plain, _) = experiment(&base);
    let differs = plain.sts_similarities(&data)[0].1.as_ref().map_err(|e| e.to_string())?
        != mean_exp.sts_similarities(&data)[0].1.as_ref().map_err(|e| e.to_string())?;
    ensure!(differs, "noise variants did not change the similarities");
    Ok(format!(
        "w=1.0 byte-identical to k=0; w=1/{} vs mean max |d| {worst:.1e} over {compared} pairs",
        k + 1
    ))
}

// ------------------------------------------------------------- criterion 5

const VOCAB: &[&str] = &[
    "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog", "and", "runs", "into", "a", "forest", "where",
    "birds", "sing", "loudly", "at", "dawn", "while", "rivers", "flow", "towards", "distant", "mountains", "of",
    "snow", "it", "is", "quiet",
];

fn stripped_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|c| !c.is_ascii_punctuation()).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus: Vec<TextUnit> = (0..1000)
        .map(|i| {
            let w = 1 + i % 60;
            let words: Vec<String> = (0..w)
                .map(|j| {
                    let word = VOCAB[rng.random_range(0..VOCAB.len())];
                    match (j + 1 == w, rng.random_range(0..8)) {
                        (true, _) => format!("{word}."),
                        (false, 0) => format!("{word},"),
                        _ => word.to_owned(),
                    }
                })
                .collect();
            TextUnit::new(format!("s{i}"), words.join(" "))
        })
        .collect();
    let strategy = AugmentationStrategy::new(AugmentationKind::RandomKeywords);
    let run = |seed: u64| -> Result<Vec<String>, String> {
        let augmenter = Augmenter::new().with_seed(seed);
        corpus
            .iter()
            .map(|t| augmenter.augment(t, &strategy, None).map(|r| r.text).map_err(|e| e.to_string()))
            .collect()
    };
    let first = run(42)?;
    for (input, output) in corpus.iter().zip(&first) {
        let words = stripped_words(&input.text);
        let w = words.len();
        let expected = if w < 3 { w } else { (28 * w / 100).max(3) };
        let out: Vec<String> = output.split_whitespace().map(str::to_owned).collect();
        ensure!(out.len() == expected, "{}: W={w} gave {} words, want {expected}", input.id, out.len());
        ensure!(is_subsequence(&out, &words), "{}: `{output}` is not an ordered subsequence", input.id);
    }
    ensure!(run(42)? == first, "same seed produced a different corpus");
    ensure!(run(43)? != first, "seed has no effect");
    Ok("1000 sentences (W = 1..60): counts, order and seed determinism hold".into())
}

// ------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config(vec![sts("small", "sts_small.jsonl"), pc(), ir()]);
    cfg.strategies = vec![
        AugmentationKind::Paraphrase,
        AugmentationKind::Summarise,
        AugmentationKind::ExtractKeywords,
    ];
    cfg.generators = vec![GeneratorConfig::stub(StubKind::ContentWords)];
    cfg.cache_dir = Some(dir.path().to_path_buf());
    let counting = Arc::new(CountingClient::new(make_stub(StubKind::ContentWords, StubConfig::default())));
    let run = || -> Result<Vec<Vec<u8>>, String> {
        let generators: Vec<Arc<dyn GenerativeClient>> = vec![counting.clone()];
        let embedder: Arc<dyn EmbeddingProvider> = Arc::new(HashBowProvider::new(256, 11));
        let exp = Experiment::with_clients(cfg.clone(), generators, embedder, CacheOptions::default().open(&cfg))
            .map_err(|e| e.to_string())?;
        let data = load_datasets(&cfg);
        let reports = vec![exp.run_sts(&data), exp.run_pc(&data), exp.run_ir(&data)];
        for r in &reports {
            if let Some(d) = r.datasets.iter().find(|d| d.value.is_none()) {
                return Err(format!("{} failed: {:?}", d.name, d.error));
            }
        }
        Ok(all_formats(&reports))
    };
    let first = run()?;
    let cold = counting.calls();
    ensure!(cold > 0, "first run issued no requests");
    counting.reset();
    let second = run()?;
    ensure!(counting.calls() == 0, "second run issued {} requests", counting.calls());
    ensure!(first == second, "reports differ between runs");
    Ok(format!("{cold} requests cold, 0 warm; sts/pc/ir reports byte-identical"))
}

// ------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let base = config(vec![sts("fifty", "sts50.jsonl")]);
    let mut keywords = base.clone();
    keywords.strategies = vec![AugmentationKind::ExtractKeywords];
    keywords.generators = vec![GeneratorConfig::stub(StubKind::ContentWords)];
    let mut random = base.clone();
    random.strategies = vec![AugmentationKind::RandomKeywords];
    let score = |cfg: &ExperimentConfig| -> Result<f64, String> {
        let (exp, data) = experiment(cfg);
        let r = exp.run_sts(&data);
        r.value("fifty").ok_or_else(|| format!("{:?}", r.datasets[0].error))
    };
    let (k, r, none) = (score(&keywords)?, score(&random)?, score(&base)?);
    ensure!(k >= r, "keywords {k:.2} < random keywords {r:.2}");
    Ok(format!("keyword stand-in {k:.2} >= random keywords {r:.2} (no augmentation {none:.2})"))
}

// ------------------------------------------------------------- criterion 8

/// Answers with words that never occur in the fixtures.
struct Disjoint;

impl GenerativeClient for Disjoint {
    fn provider(&self) -> &str {
        "test"
    }

    fn model(&self) -> &str {
        "disjoint"
    }

    fn complete(&self, prompt: &str, _: &GenerationParams) -> Result<String, GenerationError> {
        Ok(format!("zyzzyva{} quixotry", prompt.len() % 5))
    }
}

fn criterion_8() -> Outcome {
    let datasets = vec![sts("small", "sts_small.jsonl"), pc(), ir()];
    let mut identity = config(datasets.clone());
    identity.strategies = vec![
        AugmentationKind::Paraphrase,
        AugmentationKind::Summarise,
        AugmentationKind::ExtractKeywords,
    ];
    identity.generators = vec![stub(StubKind::Identity, 0)];
    let (exp, data) = experiment(&identity);
    let report = exp.analyze(&data);
    let mut rows = 0;
    for d in &report.datasets {
        ensure!(d.error.is_none(), "{}: {:?}", d.name, d.error);
        ensure!(d.rows.len() == 3, "{}: {} rows", d.name, d.rows.len());
        for r in &d.rows {
            ensure!(r.jaccard == 1.0, "{} {}: jaccard {}", d.name, r.strategy, r.jaccard);
            ensure!(r.word_ratio == 1.0, "{} {}: ratio {}", d.name, r.strategy, r.word_ratio);
            ensure!(r.cos_orig1_aug1 == 1.0, "{} {}: cos {}", d.name, r.strategy, r.cos_orig1_aug1);
            ensure!(
                r.cos_orig2_aug2.is_none_or(|c| c == 1.0),
                "{} {}: cos2 {:?}",
                d.name,
                r.strategy,
                r.cos_orig2_aug2
            );
            rows += 1;
        }
    }

    let mut disjoint = identity.clone();
    disjoint.strategies = vec![AugmentationKind::Paraphrase];
    let data = load_datasets(&disjoint);
    let generators: Vec<Arc<dyn GenerativeClient>> = vec![Arc::new(Disjoint)];
    let exp = Experiment::with_clients(disjoint, generators, Arc::new(HashBowProvider::new(256, 11)), None)
        .map_err(|e| e.to_string())?;
    let report = exp.analyze(&data);
    for d in &report.datasets {
        for r in &d.rows {
            ensure!(r.jaccard == 0.0, "{}: disjoint jaccard {}", d.name, r.jaccard);
            rows += 1;
        }
    }
    Ok(format!("{rows} rows: identity gives jaccard = ratio = cosine = 1, disjoint gives jaccard 0"))
}

// ------------------------------------------------------------- criterion 9

fn criterion_9() -> Outcome {
    let (Some(glove), Some(sts_dir)) = (std::env::var_os("GASE_GLOVE_PATH"), std::env::var_os("GASE_STS_DIR")) else {
        return Ok("SKIP set GASE_GLOVE_PATH and GASE_STS_DIR (directory of STS *.jsonl files) to run".into());
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(&sts_dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let cfg = ExperimentConfig {
        name: "glove".into(),
        embedding: EmbeddingConfig::WordVectors {
            path: glove.into(),
            id: None,
        },
        datasets: files
            .iter()
            .map(|p| DatasetConfig {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                source: DatasetSource::Sts { path: p.clone() },
            })
            .collect(),
        ..ExperimentConfig::default()
    };
    let (exp, data) = experiment(&cfg);
    let report = exp.run(Task::Sts, &data);
    let avg = report.average().ok_or("no dataset scored")?;
    ensure!((avg - 57.86).abs() <= 1.5, "average {avg:.2} outside 57.86 +- 1.5");
    Ok(format!("average {avg:.2} over {} datasets", report.datasets.len()))
}

// ------------------------------------------------------------ criterion 10

fn criterion_10() -> Outcome {
    let mut cfg = config(vec![sts("small", "sts_small.jsonl")]);
    cfg.strategies = vec![AugmentationKind::Paraphrase];
    cfg.generators = vec![GeneratorConfig {
        source: GeneratorSource::Stub(StubSpec {
            stub: StubKind::Identity,
            seed: 0,
            delay_ms: 3,
            table: BTreeMap::new(),
            table_path: None,
        }),
        templates: BTreeMap::new(),
        postprocess: None,
    }];
    let report = runner::time_run(&cfg, 5, &CacheOptions::default()).map_err(|e| e.to_string())?;
    let row = |name: &str| {
        report
            .rows
            .iter()
            .find(|r| r.strategy == name)
            .ok_or_else(|| format!("no `{name}` row"))
    };
    let (none, para) = (row("none")?, row("paraphrase")?);
    for r in [none, para] {
        ensure!(r.runs_secs.len() == 5, "{}: {} runs", r.strategy, r.runs_secs.len());
        ensure!(
            r.std_defined && r.std_secs.is_finite() && r.std_secs >= 0.0,
            "{}: invalid std {}",
            r.strategy,
            r.std_secs
        );
        let oracle = {
            let m = r.runs_secs.iter().sum::<f64>() / 5.0;
            (r.runs_secs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0).sqrt()
        };
        ensure!((oracle - r.std_secs).abs() <= 1e-12, "{}: std {} vs {oracle}", r.strategy, r.std_secs);
    }
    ensure!(
        para.mean_secs > none.mean_secs,
        "paraphrase mean {:.4}s not above none {:.4}s",
        para.mean_secs,
        none.mean_secs
    );
    Ok(format!(
        "none {:.4}s +- {:.4}, paraphrase {:.4}s +- {:.4} over 5 repeats",
        none.mean_secs, none.std_secs, para.mean_secs, para.std_secs
    ))
}
