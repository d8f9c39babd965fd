//! Loaders for the three evaluation dataset shapes.
//!
//! * STS pairs: JSON lines `{"id", "sentence1", "sentence2", "score"}`.
//! * Pair classification: JSON lines `{"id", "sentence1", "sentence2", "label"}`
//!   with `label` 0 or 1.
//! * Retrieval: `queries.jsonl` and `corpus.jsonl` with `{"id", "text"}` rows
//!   plus a tab-separated `qrels.tsv` of `qid, docid, relevance`.
//!
//! Text fields are kept byte-exact. Gold STS scores are used as given; their
//! scale (0-5 or 0-1) does not matter to a rank correlation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{source_name}:{line}: duplicate id `{id}`")]
    DuplicateId {
        source_name: String,
        line: usize,
        id: String,
    },
    #[error("qrels line {line} references unknown {kind} `{id}`")]
    DanglingReference { line: usize, kind: &'static str, id: String },
    #[error("pair-classification data has only label {0}")]
    SingleClass(u8),
    #[error("dataset is empty")]
    Empty,
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsRow {
    pub id: String,
    pub sentence1: String,
    pub sentence2: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcRow {
    pub id: String,
    pub sentence1: String,
    pub sentence2: String,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StsPairs {
    pub rows: Vec<StsRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcPairs {
    pub rows: Vec<PcRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrCollection {
    pub queries: Vec<TextRecord>,
    pub corpus: Vec<TextRecord>,
    /// qid -> docid -> relevance.
    pub qrels: BTreeMap<String, HashMap<String, u32>>,
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, DatasetError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

/// Parses JSON lines into `T`, skipping blank lines and rejecting repeated ids.
fn parse_jsonl<T, R>(reader: R, name: &str, id_of: impl Fn(&T) -> &str) -> Result<Vec<T>, DatasetError>
where
    T: for<'de> Deserialize<'de>,
    R: BufRead,
{
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| DatasetError::Parse {
            source_name: name.to_owned(),
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: T = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            source_name: name.to_owned(),
            line: lineno,
            message: e.to_string(),
        })?;
        let id = id_of(&row).to_owned();
        if !seen.insert(id.clone()) {
            return Err(DatasetError::DuplicateId {
                source_name: name.to_owned(),
                line: lineno,
                id,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

impl StsPairs {
    pub fn parse<R: BufRead>(reader: R, name: &str) -> Result<Self, DatasetError> {
        let rows: Vec<StsRow> = parse_jsonl(reader, name, |r: &StsRow| &r.id)?;
        if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| !r.score.is_finite()) {
            return Err(DatasetError::Parse {
                source_name: name.to_owned(),
                line: i + 1,
                message: "score is not finite".into(),
            });
        }
        Ok(Self { rows })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in &self.rows {
            serde_json::to_writer(&mut w, row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn gold(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.score).collect()
    }
}

impl PcPairs {
    pub fn parse<R: BufRead>(reader: R, name: &str) -> Result<Self, DatasetError> {
        let rows: Vec<PcRow> = parse_jsonl(reader, name, |r: &PcRow| &r.id)?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.label > 1) {
            return Err(DatasetError::Parse {
                source_name: name.to_owned(),
                line: i + 1,
                message: format!("label must be 0 or 1, got {}", r.label),
            });
        }
        let first = rows.first().ok_or(DatasetError::Empty)?.label;
        if rows.iter().all(|r| r.label == first) {
            return Err(DatasetError::SingleClass(first));
        }
        Ok(Self { rows })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in &self.rows {
            serde_json::to_writer(&mut w, row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label == 1).collect()
    }
}

pub fn load_sts(path: &Path) -> Result<StsPairs, DatasetError> {
    StsPairs::parse(open(path)?, &source_name(path))
}

pub fn load_pc(path: &Path) -> Result<PcPairs, DatasetError> {
    PcPairs::parse(open(path)?, &source_name(path))
}

fn parse_records<R: BufRead>(reader: R, name: &str) -> Result<Vec<TextRecord>, DatasetError> {
    parse_jsonl(reader, name, |r: &TextRecord| &r.id)
}

impl IrCollection {
    pub fn parse<Q: BufRead, C: BufRead, R: BufRead>(
        queries: Q,
        corpus: C,
        qrels: R,
        names: [&str; 3],
    ) -> Result<Self, DatasetError> {
        let queries = parse_records(queries, names[0])?;
        let corpus = parse_records(corpus, names[1])?;
        let qids: HashSet<&str> = queries.iter().map(|q| q.id.as_str()).collect();
        let docids: HashSet<&str> = corpus.iter().map(|d| d.id.as_str()).collect();
        let mut judgments: BTreeMap<String, HashMap<String, u32>> = BTreeMap::new();
        for (i, line) in qrels.lines().enumerate() {
            let lineno = i + 1;
            let parse_err = |message: String| DatasetError::Parse {
                source_name: names[2].to_owned(),
                line: lineno,
                message,
            };
            let line = line.map_err(|e| parse_err(e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(parse_err(format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let relevance = match fields[2].trim().parse::<u32>() {
                Ok(r) => r,
                // BEIR dumps start with a `query-id corpus-id score` header.
                Err(_) if lineno == 1 => continue,
                Err(e) => return Err(parse_err(format!("bad relevance `{}`: {e}", fields[2]))),
            };
            let (qid, docid) = (fields[0], fields[1]);
            if !qids.contains(qid) {
                return Err(DatasetError::DanglingReference {
                    line: lineno,
                    kind: "query",
                    id: qid.to_owned(),
                });
            }
            if !docids.contains(docid) {
                return Err(DatasetError::DanglingReference {
                    line: lineno,
                    kind: "document",
                    id: docid.to_owned(),
                });
            }
            judgments
                .entry(qid.to_owned())
                .or_default()
                .insert(docid.to_owned(), relevance);
        }
        Ok(Self {
            queries,
            corpus,
            qrels: judgments,
        })
    }

    pub fn write_queries<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_records(&self.queries, w)
    }

    pub fn write_corpus<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_records(&self.corpus, w)
    }

    /// Writes qrels sorted by query then document id.
    pub fn write_qrels<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (qid, docs) in &self.qrels {
            let mut docs: Vec<_> = docs.iter().collect();
            docs.sort();
            for (docid, rel) in docs {
                writeln!(w, "{qid}\t{docid}\t{rel}")?;
            }
        }
        Ok(())
    }

    pub fn qrel_count(&self) -> usize {
        self.qrels.values().map(HashMap::len).sum()
    }
}

fn write_records<W: Write>(records: &[TextRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_ir(queries_path: &Path, corpus_path: &Path, qrels_path: &Path) -> Result<IrCollection, DatasetError> {
    IrCollection::parse(
        open(queries_path)?,
        open(corpus_path)?,
        open(qrels_path)?,
        [
            &source_name(queries_path),
            &source_name(corpus_path),
            &source_name(qrels_path),
        ],
    )
}
