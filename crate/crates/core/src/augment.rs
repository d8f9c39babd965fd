//! Textual variants of an input: prompt rendering and post-processing for
//! the generative strategies, and the two local baselines (random keyword
//! extraction and stopword removal).

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cache::{Cache, CacheError, CacheKey, KeyMaterial, Namespace};
use crate::genclient::{GenerationError, GenerationParams, GenerativeClient};
use crate::text;

pub const PLACEHOLDER: &str = "{text}";

/// Share of words kept by random keyword extraction, as a ratio of integers
/// so that `floor(0.28 * W)` is computed exactly.
const RANDOM_KEYWORD_SHARE: (usize, usize) = (28, 100);
const RANDOM_KEYWORD_MIN: usize = 3;

const SHIPPED_TEMPLATES: [(&str, &str); 4] = [
    ("paraphrase", include_str!("../data/templates/paraphrase.txt")),
    ("paraphrase_reka", include_str!("../data/templates/paraphrase_reka.txt")),
    ("summarise", include_str!("../data/templates/summarise.txt")),
    ("extract_keywords", include_str!("../data/templates/extract_keywords.txt")),
];

const SHIPPED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("input has no words")]
    EmptyInput,
    #[error("template `{0}` has no `{{text}}` placeholder")]
    MissingPlaceholder(String),
    #[error("template `{0}` has more than one `{{text}}` placeholder")]
    RepeatedPlaceholder(String),
    #[error("unknown prompt template `{0}`")]
    UnknownTemplate(String),
    #[error("strategy {0:?} needs a generative client")]
    ClientRequired(AugmentationKind),
    #[error("strategy {0:?} runs locally and must not be given a client")]
    UnexpectedClient(AugmentationKind),
    #[error("stopword list is empty")]
    EmptyStopwords,
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// An input sentence or document with a stable identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextUnit {
    pub id: String,
    pub text: String,
}

impl TextUnit {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Declaration order is the fixed order used when variants from several
/// strategies are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationKind {
    Paraphrase,
    Summarise,
    ExtractKeywords,
    RandomKeywords,
    StopwordRemoval,
}

impl AugmentationKind {
    pub fn is_generative(self) -> bool {
        matches!(self, Self::Paraphrase | Self::Summarise | Self::ExtractKeywords)
    }

    pub fn default_template_id(self) -> &'static str {
        match self {
            Self::Paraphrase => "paraphrase",
            Self::Summarise => "summarise",
            Self::ExtractKeywords => "extract_keywords",
            Self::RandomKeywords | Self::StopwordRemoval => "",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Paraphrase => "paraphrase",
            Self::Summarise => "summarise",
            Self::ExtractKeywords => "extract_keywords",
            Self::RandomKeywords => "random_keywords",
            Self::StopwordRemoval => "stopword_removal",
        }
    }
}

impl std::str::FromStr for AugmentationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "paraphrase" => Self::Paraphrase,
            "summarise" | "summarize" => Self::Summarise,
            "extract_keywords" | "keywords" => Self::ExtractKeywords,
            "random_keywords" => Self::RandomKeywords,
            "stopword_removal" => Self::StopwordRemoval,
            other => return Err(format!("unknown augmentation strategy `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugmentationStrategy {
    pub kind: AugmentationKind,
    /// Empty for the local strategies.
    #[serde(default)]
    pub prompt_template_id: String,
}

impl AugmentationStrategy {
    pub fn new(kind: AugmentationKind) -> Self {
        Self {
            kind,
            prompt_template_id: kind.default_template_id().to_owned(),
        }
    }

    pub fn with_template(kind: AugmentationKind, template_id: impl Into<String>) -> Self {
        Self {
            kind,
            prompt_template_id: if kind.is_generative() {
                template_id.into()
            } else {
                String::new()
            },
        }
    }
}

/// One generated variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub source_id: String,
    pub strategy: AugmentationStrategy,
    /// `provider/model` of the generator, or `local`.
    pub generator_id: String,
    pub params: GenerationParams,
    pub text: String,
    /// Set when the strategy produced nothing usable and the source text was
    /// substituted.
    pub degraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostprocessRule {
    Trim,
    StripQuotes,
    StripLabels,
    KeywordPunctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    id: String,
    body: String,
    prefix_len: usize,
    /// Overrides the strategy's default post-processing when non-empty.
    pub postprocess_rules: Vec<PostprocessRule>,
}

impl PromptTemplate {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Result<Self, AugmentError> {
        let id = id.into();
        let body = body.into();
        let prefix_len = body
            .find(PLACEHOLDER)
            .ok_or_else(|| AugmentError::MissingPlaceholder(id.clone()))?;
        if body[prefix_len + PLACEHOLDER.len()..].contains(PLACEHOLDER) {
            return Err(AugmentError::RepeatedPlaceholder(id));
        }
        Ok(Self {
            id,
            body,
            prefix_len,
            postprocess_rules: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// The four shipped prompts.
    pub fn defaults() -> Vec<Self> {
        SHIPPED_TEMPLATES
            .iter()
            .map(|(id, body)| Self::new(*id, *body).expect("shipped templates are valid"))
            .collect()
    }

    pub fn default_for(id: &str) -> Option<Self> {
        Self::defaults().into_iter().find(|t| t.id == id)
    }

    /// Loads every `*.txt` file in `dir`; the id is the file stem. A single
    /// trailing newline is not part of the body.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, AugmentError> {
        let io = |source| AugmentError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "txt"))
            .collect();
        paths.sort();
        paths
            .into_iter()
            .map(|path| {
                let body = std::fs::read_to_string(&path).map_err(|source| AugmentError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                let body = body.strip_suffix('\n').unwrap_or(&body);
                let body = body.strip_suffix('\r').unwrap_or(body);
                let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                Self::new(id, body)
            })
            .collect()
    }

    pub fn render(&self, input: &TextUnit) -> Result<String, AugmentError> {
        render_prompt(self, input)
    }

    /// Inverse of [`render`](Self::render): the `{text}` payload of `prompt`
    /// if the prompt was produced by this template.
    pub fn extract<'p>(&self, prompt: &'p str) -> Option<&'p str> {
        let prefix = &self.body[..self.prefix_len];
        let suffix = &self.body[self.prefix_len + PLACEHOLDER.len()..];
        prompt.strip_prefix(prefix)?.strip_suffix(suffix)
    }
}

/// Substitutes the input text, verbatim, for the template's placeholder.
pub fn render_prompt(template: &PromptTemplate, input: &TextUnit) -> Result<String, AugmentError> {
    let at = template
        .body
        .find(PLACEHOLDER)
        .ok_or_else(|| AugmentError::MissingPlaceholder(template.id.clone()))?;
    let mut out = String::with_capacity(template.body.len() + input.text.len());
    out.push_str(&template.body[..at]);
    out.push_str(&input.text);
    out.push_str(&template.body[at + PLACEHOLDER.len()..]);
    Ok(out)
}

const LABELS: [&str; 4] = ["paraphrase:", "summary:", "keywords:", "rephrased:"];
const QUOTES: [(char, char); 6] = [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('«', '»'), ('`', '`')];

fn strip_quotes(s: &str) -> &str {
    let mut chars = s.chars();
    if let (Some(first), Some(last)) = (chars.next(), chars.next_back()) {
        if QUOTES.contains(&(first, last)) {
            return &s[first.len_utf8()..s.len() - last.len_utf8()];
        }
    }
    s
}

fn strip_label(s: &str) -> &str {
    for label in LABELS {
        if s.get(..label.len()).is_some_and(|p| p.eq_ignore_ascii_case(label)) {
            return s[label.len()..].trim_start_matches(|c: char| c == ':' || c.is_whitespace());
        }
    }
    s
}

fn apply_rule(rule: PostprocessRule, s: &str) -> String {
    match rule {
        PostprocessRule::Trim => s.trim().to_owned(),
        PostprocessRule::StripQuotes => strip_quotes(s).to_owned(),
        PostprocessRule::StripLabels => strip_label(s).to_owned(),
        PostprocessRule::KeywordPunctuation => s
            .replace([',', '.'], " ")
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" "),
    }
}

pub fn default_rules(kind: AugmentationKind) -> Vec<PostprocessRule> {
    use PostprocessRule::*;
    let mut rules = vec![Trim, StripQuotes, Trim, StripLabels, Trim];
    if kind == AugmentationKind::ExtractKeywords {
        rules.push(KeywordPunctuation);
    }
    rules
}

/// Applies `rules` in order, repeating the pass until nothing changes. Every
/// rule only removes characters or turns `,`/`.` into spaces, so the loop
/// terminates, and the fixed point makes the result idempotent.
pub fn apply_rules(raw: &str, rules: &[PostprocessRule]) -> String {
    let mut current = raw.to_owned();
    loop {
        let next = rules.iter().fold(current.clone(), |s, r| apply_rule(*r, &s));
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Post-processing rule sets, configurable per generator.
#[derive(Debug, Clone, Default)]
pub struct Postprocessor {
    overrides: HashMap<String, Vec<PostprocessRule>>,
}

impl Postprocessor {
    pub fn with_override(mut self, generator_id: impl Into<String>, rules: Vec<PostprocessRule>) -> Self {
        self.overrides.insert(generator_id.into(), rules);
        self
    }

    pub fn rules_for(
        &self,
        kind: AugmentationKind,
        generator_id: &str,
        template: Option<&PromptTemplate>,
    ) -> Vec<PostprocessRule> {
        if let Some(rules) = self.overrides.get(generator_id) {
            return rules.clone();
        }
        match template {
            Some(t) if !t.postprocess_rules.is_empty() => t.postprocess_rules.clone(),
            _ => default_rules(kind),
        }
    }

    pub fn apply(&self, raw: &str, strategy: &AugmentationStrategy, generator_id: &str) -> String {
        apply_rules(raw, &self.rules_for(strategy.kind, generator_id, None))
    }
}

/// Strips surrounding quotes and leading labels and trims; keyword outputs
/// additionally lose commas and full stops.
pub fn postprocess(raw: &str, strategy: &AugmentationStrategy, generator_id: &str) -> String {
    Postprocessor::default().apply(raw, strategy, generator_id)
}

/// Keeps `max(3, floor(0.28 * W))` of the `W` punctuation-free words (all of
/// them when `W < 3`), chosen uniformly without replacement by a ChaCha8 RNG
/// seeded with `rng_seed`, in their original order.
pub fn random_keywords(input: &TextUnit, rng_seed: u64) -> Result<String, AugmentError> {
    let words = text::words_without_punctuation(&input.text);
    if words.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let n = random_keyword_count(words.len());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picked = rand::seq::index::sample(&mut rng, words.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| words[i].as_str()).collect::<Vec<_>>().join(" "))
}

pub fn random_keyword_count(word_count: usize) -> usize {
    if word_count < RANDOM_KEYWORD_MIN {
        word_count
    } else {
        let (num, den) = RANDOM_KEYWORD_SHARE;
        (word_count * num / den).max(RANDOM_KEYWORD_MIN)
    }
}

/// Result of stopword removal. `degraded` is set when every token was a
/// stopword and the input was returned unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordOutcome {
    pub text: String,
    pub degraded: bool,
}

pub fn remove_stopwords(input: &TextUnit, stopwords: &HashSet<String>) -> Result<StopwordOutcome, AugmentError> {
    if stopwords.is_empty() {
        return Err(AugmentError::EmptyStopwords);
    }
    let kept: Vec<&str> = text::tokens(&input.text)
        .filter(|t| !stopwords.contains(&text::strip_punctuation(&t.to_lowercase())))
        .collect();
    if kept.is_empty() {
        return Ok(StopwordOutcome {
            text: input.text.clone(),
            degraded: true,
        });
    }
    Ok(StopwordOutcome {
        text: kept.join(" "),
        degraded: false,
    })
}

/// Builds a lookup set from one-word-per-line text. Each entry is stored both
/// as written and in its punctuation-stripped form so that `don't` also
/// matches `dont`.
pub fn parse_stopwords(list: &str) -> HashSet<String> {
    let mut set = HashSet::new();
    for line in list.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let lower = line.to_lowercase();
        set.insert(text::strip_punctuation(&lower));
        set.insert(lower);
    }
    set.remove("");
    set
}

/// The shipped English stopword list.
pub fn default_stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| parse_stopwords(SHIPPED_STOPWORDS))
}

#[derive(Debug, Default)]
struct Counters {
    requests: AtomicU64,
    cache_hits: AtomicU64,
    degraded: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentCounts {
    /// Requests that reached a generative client.
    pub requests: u64,
    pub cache_hits: u64,
    pub degraded: u64,
}

/// Runs augmentation strategies with shared templates, stopwords, sampling
/// parameters and an optional completion cache.
#[derive(Debug)]
pub struct Augmenter {
    templates: HashMap<String, PromptTemplate>,
    postprocessor: Postprocessor,
    stopwords: HashSet<String>,
    params: GenerationParams,
    seed: u64,
    cache: Option<Arc<Cache>>,
    counters: Counters,
}

impl Default for Augmenter {
    fn default() -> Self {
        Self {
            templates: PromptTemplate::defaults()
                .into_iter()
                .map(|t| (t.id.clone(), t))
                .collect(),
            postprocessor: Postprocessor::default(),
            stopwords: default_stopwords().clone(),
            params: GenerationParams::default(),
            seed: 1337,
            cache: None,
            counters: Counters::default(),
        }
    }
}

impl Augmenter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces templates by id.
    pub fn with_templates(mut self, templates: impl IntoIterator<Item = PromptTemplate>) -> Self {
        for t in templates {
            self.templates.insert(t.id.clone(), t);
        }
        self
    }

    pub fn with_postprocessor(mut self, postprocessor: Postprocessor) -> Self {
        self.postprocessor = postprocessor;
        self
    }

    pub fn with_stopwords(mut self, stopwords: HashSet<String>) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cache(mut self, cache: Option<Arc<Cache>>) -> Self {
        self.cache = cache;
        self
    }

    pub fn params(&self) -> &GenerationParams {
        &self.params
    }

    pub fn template(&self, id: &str) -> Option<&PromptTemplate> {
        self.templates.get(id)
    }

    pub fn counts(&self) -> AugmentCounts {
        AugmentCounts {
            requests: self.counters.requests.load(Ordering::Relaxed),
            cache_hits: self.counters.cache_hits.load(Ordering::Relaxed),
            degraded: self.counters.degraded.load(Ordering::Relaxed),
        }
    }

    /// Seed for random keyword extraction of one input: the experiment seed
    /// mixed with the input text, so equal texts get equal selections
    /// regardless of where they occur.
    pub fn input_seed(&self, input: &TextUnit) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(input.text.as_bytes());
        let digest = hasher.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
    }

    pub fn augment(
        &self,
        input: &TextUnit,
        strategy: &AugmentationStrategy,
        client: Option<&dyn GenerativeClient>,
    ) -> Result<AugmentationRecord, AugmentError> {
        if input.text.trim().is_empty() {
            return Err(AugmentError::EmptyInput);
        }
        let kind = strategy.kind;
        let (generator_id, text, degraded) = match (kind.is_generative(), client) {
            (true, None) => return Err(AugmentError::ClientRequired(kind)),
            (false, Some(_)) => return Err(AugmentError::UnexpectedClient(kind)),
            (true, Some(client)) => {
                let generator_id = client.generator_id();
                let text = self.generate(input, strategy, client)?;
                if text.is_empty() {
                    (generator_id, input.text.clone(), true)
                } else {
                    (generator_id, text, false)
                }
            }
            (false, None) => {
                let (text, degraded) = match kind {
                    AugmentationKind::RandomKeywords => (random_keywords(input, self.input_seed(input))?, false),
                    AugmentationKind::StopwordRemoval => {
                        let out = remove_stopwords(input, &self.stopwords)?;
                        (out.text, out.degraded)
                    }
                    _ => unreachable!("generative kinds handled above"),
                };
                ("local".to_owned(), text, degraded)
            }
        };
        if degraded {
            self.counters.degraded.fetch_add(1, Ordering::Relaxed);
            log::debug!("degraded {} variant for {}", kind.as_str(), input.id);
        }
        Ok(AugmentationRecord {
            source_id: input.id.clone(),
            strategy: strategy.clone(),
            generator_id,
            params: self.params.clone(),
            text,
            degraded,
        })
    }

    fn generate(
        &self,
        input: &TextUnit,
        strategy: &AugmentationStrategy,
        client: &dyn GenerativeClient,
    ) -> Result<String, AugmentError> {
        let template = self
            .templates
            .get(&strategy.prompt_template_id)
            .ok_or_else(|| AugmentError::UnknownTemplate(strategy.prompt_template_id.clone()))?;
        let prompt = template.render(input)?;
        let params = serde_json::to_value(self.params.canonical()).expect("params serialize");
        let material = KeyMaterial {
            namespace: Namespace::Gen,
            provider: client.provider(),
            model: client.model(),
            template: template.id(),
            input: &prompt,
            params: &params,
        };
        let key = CacheKey::new(&material);
        let cached = match &self.cache {
            Some(cache) => cache.get(&key)?,
            None => None,
        };
        let raw = match cached.and_then(|bytes| String::from_utf8(bytes).ok()) {
            Some(raw) => {
                self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
                raw
            }
            None => {
                self.counters.requests.fetch_add(1, Ordering::Relaxed);
                let raw = client.complete(&prompt, &self.params)?;
                if let Some(cache) = &self.cache {
                    cache.put(&key, &material, raw.as_bytes())?;
                }
                raw
            }
        };
        let rules = self
            .postprocessor
            .rules_for(strategy.kind, &client.generator_id(), Some(template));
        Ok(apply_rules(&raw, &rules))
    }
}

/// Augments with a default [`Augmenter`] (shipped templates and stopwords,
/// default parameters, no cache).
pub fn augment(
    input: &TextUnit,
    strategy: &AugmentationStrategy,
    client: Option<&dyn GenerativeClient>,
) -> Result<AugmentationRecord, AugmentError> {
    Augmenter::default().augment(input, strategy, client)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genclient::{make_stub, CountingClient, StubConfig, StubKind};

    const PARAPHRASE_PROMPT: &str = "Rephrase the following text while maintaining its original meaning. If the text contains only a single word, provide a definition or a synomym. When done, check and make sure that the length of the original is approximately maintained. Text:";

    fn unit(text: &str) -> TextUnit {
        TextUnit::new("u1", text)
    }

    #[test]
    fn shipped_paraphrase_prompt_is_verbatim() {
        let t = PromptTemplate::default_for("paraphrase").unwrap();
        assert_eq!(
            t.render(&unit("A man plays guitar.")).unwrap(),
            format!("{PARAPHRASE_PROMPT}A man plays guitar.")
        );
    }

    #[test]
    fn shipped_summarise_prompt_ends_with_input() {
        let t = PromptTemplate::default_for("summarise").unwrap();
        let out = t.render(&unit("x")).unwrap();
        assert!(out.starts_with("summarise the following text. Do not include any meta text"));
        assert!(out.ends_with("If the text is too short to summarise, paraphrase it instead. Text:x"));
    }

    #[test]
    fn shipped_keyword_prompt_keeps_space_before_input() {
        let t = PromptTemplate::default_for("extract_keywords").unwrap();
        let out = t.render(&unit("x")).unwrap();
        assert!(out.ends_with("do not start your answer with \"keywords\". Text: x"));
    }

    #[test]
    fn placeholder_only_template_is_identity() {
        let t = PromptTemplate::new("id", "{text}").unwrap();
        assert_eq!(t.render(&unit("")).unwrap(), "");
        assert_eq!(t.render(&unit("  keep  spaces ")).unwrap(), "  keep  spaces ");
    }

    #[test]
    fn template_placeholder_validation() {
        assert!(matches!(PromptTemplate::new("a", "no slot"), Err(AugmentError::MissingPlaceholder(_))));
        assert!(matches!(
            PromptTemplate::new("a", "{text} and {text}"),
            Err(AugmentError::RepeatedPlaceholder(_))
        ));
    }

    #[test]
    fn input_containing_placeholder_is_inserted_once() {
        let t = PromptTemplate::new("a", "say {text}!").unwrap();
        assert_eq!(t.render(&unit("{text}")).unwrap(), "say {text}!");
    }

    #[test]
    fn load_dir_reads_stems_and_drops_trailing_newline() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mine.txt"), "Do it: {text}\n").unwrap();
        std::fs::write(dir.path().join("ignored.md"), "nope").unwrap();
        let templates = PromptTemplate::load_dir(dir.path()).unwrap();
        assert_eq!(templates.len(), 1);
        assert_eq!(templates[0].id(), "mine");
        assert_eq!(templates[0].body(), "Do it: {text}");
    }

    #[test]
    fn postprocess_examples() {
        let kw = AugmentationStrategy::new(AugmentationKind::ExtractKeywords);
        let para = AugmentationStrategy::new(AugmentationKind::Paraphrase);
        assert_eq!(postprocess("Keywords: cat dog", &kw, "g"), "cat dog");
        assert_eq!(postprocess("\"A person strums a guitar.\"", &para, "g"), "A person strums a guitar.");
        assert_eq!(postprocess("man, guitar, playing.", &kw, "g"), "man guitar playing");
        assert_eq!(postprocess("  PARAPHRASE:  \"Hi.\" ", &para, "g"), "Hi.");
        assert_eq!(postprocess("Summary:: short", &para, "g"), "short");
        assert_eq!(postprocess("“quoted”", &para, "g"), "quoted");
        assert_eq!(postprocess("   ", &para, "g"), "");
    }

    #[test]
    fn labels_need_their_colon() {
        let para = AugmentationStrategy::new(AugmentationKind::Paraphrase);
        assert_eq!(postprocess("Summary of events", &para, "g"), "Summary of events");
    }

    #[test]
    fn generator_override_replaces_rules() {
        let pp = Postprocessor::default().with_override("raw/model", vec![PostprocessRule::Trim]);
        let para = AugmentationStrategy::new(AugmentationKind::Paraphrase);
        assert_eq!(pp.apply(" \"x\" ", &para, "raw/model"), "\"x\"");
        assert_eq!(pp.apply(" \"x\" ", &para, "other"), "x");
    }

    #[test]
    fn random_keyword_counts() {
        let twenty: String = (0..20).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let out = random_keywords(&unit(&twenty), 1).unwrap();
        assert_eq!(out.split(' ').count(), 5);
        assert_eq!(random_keywords(&unit("hello world"), 1).unwrap(), "hello world");
        assert_eq!(random_keyword_count(3), 3);
        assert_eq!(random_keyword_count(11), 3);
        assert_eq!(random_keyword_count(25), 7);
        assert_eq!(random_keyword_count(58), 16);
        assert_eq!(random_keyword_count(100), 28);
    }

    #[test]
    fn random_keywords_strip_punctuation_and_are_deterministic() {
        let input = unit("Hello, world! This is a test -- of punctuation.");
        let a = random_keywords(&input, 42).unwrap();
        assert_eq!(a, random_keywords(&input, 42).unwrap());
        assert!(!a.contains(',') && !a.contains('!') && !a.contains('.'));
        assert!(matches!(random_keywords(&unit("... !!"), 1), Err(AugmentError::EmptyInput)));
    }

    #[test]
    fn stopword_examples() {
        let sw: HashSet<String> = ["the", "on"].iter().map(|s| s.to_string()).collect();
        let out = remove_stopwords(&unit("the cat sat on the mat"), &sw).unwrap();
        assert_eq!(out, StopwordOutcome { text: "cat sat mat".into(), degraded: false });
        let only_the: HashSet<String> = ["the".to_string()].into();
        assert_eq!(remove_stopwords(&unit("cat"), &only_the).unwrap().text, "cat");
        let out = remove_stopwords(&unit("the the"), &only_the).unwrap();
        assert_eq!(out, StopwordOutcome { text: "the the".into(), degraded: true });
        assert!(matches!(remove_stopwords(&unit("x"), &HashSet::new()), Err(AugmentError::EmptyStopwords)));
    }

    #[test]
    fn stopword_match_ignores_case_and_punctuation() {
        let out = remove_stopwords(&unit("The cat, and THE dog."), default_stopwords()).unwrap();
        assert_eq!(out.text, "cat, dog.");
        assert!(default_stopwords().contains("dont"));
    }

    #[test]
    fn echo_stub_round_trip() {
        let stub = make_stub(StubKind::Echo, StubConfig::default());
        let input = unit("A man plays guitar.");
        let strategy = AugmentationStrategy::new(AugmentationKind::Paraphrase);
        let record = augment(&input, &strategy, Some(&stub)).unwrap();
        let prompt = PromptTemplate::default_for("paraphrase").unwrap().render(&input).unwrap();
        assert_eq!(record.text, postprocess(&prompt, &strategy, "stub/echo"));
        assert_eq!(record.generator_id, "stub/echo");
        assert!(!record.degraded);
    }

    #[test]
    fn local_strategies_reject_clients_and_generative_need_one() {
        let stub = make_stub(StubKind::Echo, StubConfig::default());
        let input = unit("a b c d");
        assert!(matches!(
            augment(&input, &AugmentationStrategy::new(AugmentationKind::RandomKeywords), Some(&stub)),
            Err(AugmentError::UnexpectedClient(_))
        ));
        assert!(matches!(
            augment(&input, &AugmentationStrategy::new(AugmentationKind::Summarise), None),
            Err(AugmentError::ClientRequired(_))
        ));
        assert!(matches!(
            augment(&unit("  "), &AugmentationStrategy::new(AugmentationKind::Summarise), Some(&stub)),
            Err(AugmentError::EmptyInput)
        ));
    }

    #[test]
    fn random_keyword_record_matches_direct_call() {
        let augmenter = Augmenter::default().with_seed(9);
        let input = unit("one two three four five six seven eight nine ten eleven twelve");
        let record = augmenter
            .augment(&input, &AugmentationStrategy::new(AugmentationKind::RandomKeywords), None)
            .unwrap();
        assert_eq!(record.generator_id, "local");
        assert_eq!(record.text, random_keywords(&input, augmenter.input_seed(&input)).unwrap());
    }

    #[test]
    fn empty_generation_is_degraded_to_source() {
        let mut table = std::collections::BTreeMap::new();
        let input = unit("cats purr");
        let prompt = PromptTemplate::default_for("paraphrase").unwrap().render(&input).unwrap();
        table.insert(prompt, " \"\" ".to_owned());
        let stub = make_stub(StubKind::Table, StubConfig { table, ..StubConfig::default() });
        let augmenter = Augmenter::default();
        let record = augmenter
            .augment(&input, &AugmentationStrategy::new(AugmentationKind::Paraphrase), Some(&stub))
            .unwrap();
        assert!(record.degraded);
        assert_eq!(record.text, "cats purr");
        assert_eq!(augmenter.counts().degraded, 1);
    }

    #[test]
    fn unknown_template_is_an_error() {
        let stub = make_stub(StubKind::Echo, StubConfig::default());
        let strategy = AugmentationStrategy::with_template(AugmentationKind::Paraphrase, "nope");
        assert!(matches!(augment(&unit("x"), &strategy, Some(&stub)), Err(AugmentError::UnknownTemplate(_))));
    }

    #[test]
    fn cache_serves_second_request() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Arc::new(Cache::open(dir.path()));
        let stub = CountingClient::new(make_stub(StubKind::NoiseSuffix, StubConfig { seed: 3, ..StubConfig::default() }));
        let strategy = AugmentationStrategy::new(AugmentationKind::Paraphrase);
        let input = unit("cats purr");
        let first = Augmenter::default().with_cache(Some(cache.clone()));
        let a = first.augment(&input, &strategy, Some(&stub)).unwrap();
        let second = Augmenter::default().with_cache(Some(cache));
        let b = second.augment(&input, &strategy, Some(&stub)).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(stub.calls(), 1);
        assert_eq!(second.counts().cache_hits, 1);
        assert_eq!(second.counts().requests, 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_strategy() -> impl Strategy<Value = AugmentationStrategy> {
            prop_oneof![
                Just(AugmentationKind::Paraphrase),
                Just(AugmentationKind::Summarise),
                Just(AugmentationKind::ExtractKeywords),
            ]
            .prop_map(AugmentationStrategy::new)
        }

        proptest! {
            #[test]
            fn postprocess_is_idempotent(raw in "[\"'“” a-zA-Z:,.\\n]{0,40}", strategy in any_strategy()) {
                let once = postprocess(&raw, &strategy, "g");
                prop_assert_eq!(postprocess(&once, &strategy, "g"), once);
            }

            #[test]
            fn postprocess_labels_idempotent(label in prop::sample::select(LABELS.to_vec()), body in "[a-z ,.\"]{0,20}", strategy in any_strategy()) {
                let raw = format!("{}{}", label.to_uppercase(), body);
                let once = postprocess(&raw, &strategy, "g");
                prop_assert_eq!(postprocess(&once, &strategy, "g"), once);
            }

            #[test]
            fn keyword_output_has_no_commas_or_stops(raw in "\\PC{0,60}") {
                let out = postprocess(&raw, &AugmentationStrategy::new(AugmentationKind::ExtractKeywords), "g");
                prop_assert!(!out.contains(',') && !out.contains('.'));
            }

            #[test]
            fn stopword_output_is_subsequence(words in prop::collection::vec("[a-zA-Z]{1,6}", 1..20)) {
                let input = unit(&words.join(" "));
                let out = remove_stopwords(&input, default_stopwords()).unwrap();
                let src: Vec<&str> = input.text.split(' ').collect();
                let mut it = src.iter();
                for tok in out.text.split(' ') {
                    prop_assert!(it.any(|s| *s == tok));
                }
            }

            #[test]
            fn random_keywords_are_ordered_subsequence(words in prop::collection::vec("[a-z]{1,8}", 1..60), seed in any::<u64>()) {
                let input = unit(&words.join(" "));
                let out = random_keywords(&input, seed).unwrap();
                let picked: Vec<&str> = out.split(' ').collect();
                prop_assert_eq!(picked.len(), random_keyword_count(words.len()));
                let mut it = words.iter();
                for tok in picked {
                    prop_assert!(it.any(|s| s == tok));
                }
            }
        }
    }
}
