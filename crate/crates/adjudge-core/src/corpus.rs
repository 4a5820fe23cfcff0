//! Human judgment datasets: loading, validation, per-bigram statistics and
//! corpus-frequency bins.
//!
//! Two files are loaded here. `no_context.csv` holds one row per
//! (bigram, rater) Likert rating together with the bigram's adjective class
//! and corpus count. `contexts.csv` holds the expert-written biasing
//! contexts, two per bigram (one privative-biased, one subsective-biased).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five Likert labels in rating order 1..=5.
pub const LIKERT_LABELS: [&str; 5] = [
    "Definitely not",
    "Probably not",
    "Unsure",
    "Probably yes",
    "Definitely yes",
];

/// A single Likert rating, always in 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct LikertRating(u8);

impl LikertRating {
    pub const ALL: [LikertRating; 5] = [
        LikertRating(1),
        LikertRating(2),
        LikertRating(3),
        LikertRating(4),
        LikertRating(5),
    ];

    pub fn new(value: u8) -> Result<Self, CorpusError> {
        if (1..=5).contains(&value) {
            Ok(LikertRating(value))
        } else {
            Err(CorpusError::InvalidRating { row: 0, value: value as i64 })
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn label(self) -> &'static str {
        LIKERT_LABELS[self.index()]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        LIKERT_LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| LikertRating(i as u8 + 1))
    }
}

impl TryFrom<u8> for LikertRating {
    type Error = CorpusError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        LikertRating::new(value)
    }
}

impl From<LikertRating> for u8 {
    fn from(r: LikertRating) -> u8 {
        r.0
    }
}

impl fmt::Display for LikertRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether an adjective historically licenses privative or subsective
/// inferences. The class describes the adjective, not any particular bigram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjectiveClass {
    TypicallyPrivative,
    TypicallySubsective,
}

impl AdjectiveClass {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "privative" => Some(AdjectiveClass::TypicallyPrivative),
            "subsective" => Some(AdjectiveClass::TypicallySubsective),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AdjectiveClass::TypicallyPrivative => "privative",
            AdjectiveClass::TypicallySubsective => "subsective",
        }
    }
}

/// Corpus-frequency bin of a bigram. `Zero` iff the corpus count is zero;
/// nonzero counts fall into exactly one percentile bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyBin {
    Zero,
    P0to25,
    P25to50,
    P50to75,
    P75to90,
    P90to99,
}

impl FrequencyBin {
    /// High-frequency bigrams are those in the top quartile.
    pub fn is_high_frequency(self) -> bool {
        matches!(self, FrequencyBin::P75to90 | FrequencyBin::P90to99)
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyBin::Zero => "zero",
            FrequencyBin::P0to25 => "0-25th",
            FrequencyBin::P25to50 => "25-50th",
            FrequencyBin::P50to75 => "50-75th",
            FrequencyBin::P75to90 => "75-90th",
            FrequencyBin::P90to99 => "90-99th",
        }
    }

    pub const NONZERO: [FrequencyBin; 5] = [
        FrequencyBin::P0to25,
        FrequencyBin::P25to50,
        FrequencyBin::P50to75,
        FrequencyBin::P75to90,
        FrequencyBin::P90to99,
    ];
}

/// Count thresholds that open the 25th/50th/75th/90th percentile bins.
/// A nonzero count `c` falls in the highest bin whose threshold is `<= c`
/// (left-closed, right-open bins); below `p25` it is `P0to25`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinThresholds {
    pub p25: u64,
    pub p50: u64,
    pub p75: u64,
    pub p90: u64,
}

impl BinThresholds {
    /// Nearest-rank percentiles over the given nonzero counts.
    pub fn from_nonzero_counts(counts: &[u64]) -> Option<Self> {
        if counts.is_empty() {
            return None;
        }
        let mut sorted: Vec<u64> = counts.to_vec();
        sorted.sort_unstable();
        let nearest_rank = |p: f64| -> u64 {
            let n = sorted.len() as f64;
            let rank = (p / 100.0 * n).ceil() as usize;
            sorted[rank.saturating_sub(1)]
        };
        Some(BinThresholds {
            p25: nearest_rank(25.0),
            p50: nearest_rank(50.0),
            p75: nearest_rank(75.0),
            p90: nearest_rank(90.0),
        })
    }

    pub fn from_json_file(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| CorpusError::Io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CorpusError::BadThresholds(e.to_string()))
    }

    /// Assign the bin for a count. Coinciding thresholds collapse into the
    /// lower bin, leaving the upper bin empty.
    pub fn bin_for(&self, count: u64) -> FrequencyBin {
        if count == 0 {
            FrequencyBin::Zero
        } else if count < self.p25 {
            FrequencyBin::P0to25
        } else if count < self.p50 {
            FrequencyBin::P25to50
        } else if count < self.p75 {
            FrequencyBin::P50to75
        } else if count < self.p90 {
            FrequencyBin::P75to90
        } else {
            FrequencyBin::P90to99
        }
    }
}

/// Determiner used before a noun phrase in the inference question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Article {
    A,
    An,
    /// Mass and plural nouns take no determiner.
    Zero,
}

impl Article {
    /// Rendered with a trailing space so templates can splice it directly.
    pub fn as_prefix(self) -> &'static str {
        match self {
            Article::A => "a ",
            Article::An => "an ",
            Article::Zero => "",
        }
    }
}

/// Mass/count classification of a noun, which decides its determiner and
/// agreement verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NounClass {
    Count,
    Mass,
    MassCount,
    Plural,
}

/// Words that start with a vowel letter but take "a" ("a useful fruit").
const AN_EXCEPTIONS: [&str; 1] = ["useful"];

/// Per-noun article data with a vowel-initial heuristic fallback for nouns
/// not listed. Heuristic assignments are flagged so the audit log can report
/// them.
#[derive(Debug, Clone, Default)]
pub struct ArticleTable {
    classes: HashMap<String, NounClass>,
}

impl ArticleTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        #[derive(Deserialize)]
        struct Row {
            noun: String,
            noun_class: NounClass,
        }
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| CorpusError::Io(path.display().to_string(), std::io::Error::other(e)))?;
        let mut classes = HashMap::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| CorpusError::MalformedRow { row: i + 2, reason: e.to_string() })?;
            classes.insert(row.noun, row.noun_class);
        }
        Ok(ArticleTable { classes })
    }

    pub fn noun_class(&self, noun: &str) -> Option<NounClass> {
        self.classes.get(noun).copied()
    }

    fn vowel_initial(word: &str) -> bool {
        word.starts_with(['a', 'e', 'i', 'o', 'u'])
            && !AN_EXCEPTIONS.iter().any(|e| word.starts_with(e))
    }

    /// Determiner for a noun phrase starting with `first_word`, where `noun`
    /// decides countability. Returns the article and whether the noun's
    /// class was guessed rather than listed.
    pub fn article_for(&self, first_word: &str, noun: &str) -> (Article, bool) {
        let (class, guessed) = match self.noun_class(noun) {
            Some(c) => (c, false),
            None => (NounClass::Count, true),
        };
        let article = match class {
            NounClass::Mass | NounClass::Plural => Article::Zero,
            NounClass::Count | NounClass::MassCount => {
                if Self::vowel_initial(first_word) {
                    Article::An
                } else {
                    Article::A
                }
            }
        };
        (article, guessed)
    }

    /// Agreement verb for the noun ("are" only for plural-only nouns).
    pub fn verb_for(&self, noun: &str) -> &'static str {
        match self.noun_class(noun) {
            Some(NounClass::Plural) => "are",
            _ => "is",
        }
    }
}

/// An adjective-noun pair with its class, corpus count and frequency bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigramRecord {
    pub adjective: String,
    pub noun: String,
    pub adjective_class: AdjectiveClass,
    pub corpus_count: u64,
    pub frequency_bin: FrequencyBin,
}

impl BigramRecord {
    /// "adjective noun", the canonical key used throughout.
    pub fn key(&self) -> String {
        format!("{} {}", self.adjective, self.noun)
    }
}

/// The human ratings collected for one bigram. Mean, SD and the rating
/// distribution are always recomputed from the raw ratings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRatingSet {
    ratings: Vec<LikertRating>,
}

impl HumanRatingSet {
    pub fn new(ratings: Vec<LikertRating>) -> Result<Self, CorpusError> {
        if ratings.is_empty() {
            return Err(CorpusError::EmptyRatingSet);
        }
        Ok(HumanRatingSet { ratings })
    }

    pub fn ratings(&self) -> &[LikertRating] {
        &self.ratings
    }

    pub fn n(&self) -> usize {
        self.ratings.len()
    }

    pub fn mean(&self) -> f64 {
        let sum: u32 = self.ratings.iter().map(|r| r.value() as u32).sum();
        sum as f64 / self.ratings.len() as f64
    }

    /// Sample standard deviation (n-1 denominator); 0 when n == 1.
    pub fn sd(&self) -> f64 {
        let n = self.ratings.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self
            .ratings
            .iter()
            .map(|r| {
                let d = r.value() as f64 - mean;
                d * d
            })
            .sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// Counts per rating point 1..=5.
    pub fn rating_counts(&self) -> [usize; 5] {
        let mut counts = [0usize; 5];
        for r in &self.ratings {
            counts[r.index()] += 1;
        }
        counts
    }
}

/// Per-bigram mean and sample SD.
pub fn summarize(set: &HumanRatingSet) -> (f64, f64) {
    (set.mean(), set.sd())
}

/// Which context a bigram's rating was elicited under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextBias {
    PrivativeBiased,
    SubsectiveBiased,
}

impl ContextBias {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "privative" => Some(ContextBias::PrivativeBiased),
            "subsective" => Some(ContextBias::SubsectiveBiased),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContextBias::PrivativeBiased => "privative",
            ContextBias::SubsectiveBiased => "subsective",
        }
    }
}

/// One expert-written biasing context for a bigram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub adjective: String,
    pub noun: String,
    pub bias: ContextBias,
    pub text: String,
    pub human_ratings: Option<Vec<LikertRating>>,
}

impl ContextRecord {
    pub fn key(&self) -> String {
        format!("{} {}", self.adjective, self.noun)
    }
}

/// One loaded bigram with its ratings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub record: BigramRecord,
    pub ratings: HumanRatingSet,
}

/// Dataset-level counts exposed after loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetCounts {
    pub bigrams: usize,
    pub nouns: usize,
    pub adjectives: usize,
    pub zero_frequency: usize,
}

/// Where the bin thresholds came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    /// Explicit thresholds supplied alongside the data.
    Explicit,
    /// Nearest-rank percentiles over this dataset's nonzero counts.
    DatasetPercentiles,
}

/// The loaded no-context dataset: records, rating sets, bin thresholds and an
/// audit log. Read-only after load.
#[derive(Debug, Clone)]
pub struct Dataset {
    entries: Vec<DatasetEntry>,
    index: HashMap<String, usize>,
    thresholds: BinThresholds,
    threshold_source: ThresholdSource,
    articles: ArticleTable,
    core_subset: Option<BTreeSet<String>>,
    load_log: Vec<String>,
}

impl Dataset {
    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&DatasetEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn thresholds(&self) -> BinThresholds {
        self.thresholds
    }

    pub fn threshold_source(&self) -> ThresholdSource {
        self.threshold_source
    }

    pub fn articles(&self) -> &ArticleTable {
        &self.articles
    }

    /// Bigram keys of the core (original-experiment) subset, when provided.
    pub fn core_subset(&self) -> Option<&BTreeSet<String>> {
        self.core_subset.as_ref()
    }

    pub fn load_log(&self) -> &[String] {
        &self.load_log
    }

    pub fn adjectives(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.record.adjective.as_str()).collect()
    }

    pub fn nouns(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.record.noun.as_str()).collect()
    }

    pub fn counts(&self) -> DatasetCounts {
        DatasetCounts {
            bigrams: self.entries.len(),
            nouns: self.nouns().len(),
            adjectives: self.adjectives().len(),
            zero_frequency: self
                .entries
                .iter()
                .filter(|e| e.record.frequency_bin == FrequencyBin::Zero)
                .count(),
        }
    }

    /// Entries restricted to the core subset; all entries when none was
    /// provided.
    pub fn core_entries(&self) -> Vec<&DatasetEntry> {
        match &self.core_subset {
            Some(keys) => self
                .entries
                .iter()
                .filter(|e| keys.contains(&e.record.key()))
                .collect(),
            None => self.entries.iter().collect(),
        }
    }

    /// Write the dataset back out in the canonical CSV schema.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| CorpusError::Io(path.display().to_string(), std::io::Error::other(e)))?;
        w.write_record(["adjective", "noun", "adjective_class", "corpus_count", "rater_id", "rating"])
            .map_err(|e| CorpusError::MalformedRow { row: 0, reason: e.to_string() })?;
        for entry in &self.entries {
            for (i, rating) in entry.ratings.ratings().iter().enumerate() {
                w.write_record([
                    entry.record.adjective.as_str(),
                    entry.record.noun.as_str(),
                    entry.record.adjective_class.as_str(),
                    &entry.record.corpus_count.to_string(),
                    &format!("r{i}"),
                    &rating.value().to_string(),
                ])
                .map_err(|e| CorpusError::MalformedRow { row: 0, reason: e.to_string() })?;
            }
        }
        w.flush().map_err(|e| CorpusError::Io(path.display().to_string(), e))?;
        Ok(())
    }
}

/// Options controlling dataset loading.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Explicit bin thresholds (e.g. from `frequency_thresholds.json`).
    /// Without them, thresholds are nearest-rank percentiles over the
    /// dataset's own nonzero counts.
    pub thresholds: Option<BinThresholds>,
    /// Per-noun article data; nouns not listed fall back to the vowel
    /// heuristic and are flagged in the load log.
    pub articles: Option<ArticleTable>,
    /// Bigram keys (one "adjective noun" per line) marking the core subset.
    pub core_subset: Option<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("row {row}: malformed row: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: rating {value} outside 1..=5")]
    InvalidRating { row: usize, value: i64 },
    #[error("row {row}: negative corpus count {value}")]
    NegativeCount { row: usize, value: i64 },
    #[error("row {row}: unknown adjective class {value:?} for adjective {adjective:?}")]
    UnknownAdjectiveClass { row: usize, value: String, adjective: String },
    #[error("row {row}: bigram {bigram:?} conflicts with an earlier row on {field}")]
    InconsistentBigram { row: usize, bigram: String, field: &'static str },
    #[error("row {row}: empty or non-lowercase token {value:?}")]
    BadToken { row: usize, value: String },
    #[error("no records")]
    EmptyDataset,
    #[error("rating set must contain at least one rating")]
    EmptyRatingSet,
    #[error("bigram {bigram:?}: missing {bias}-biased context")]
    MissingContext { bigram: String, bias: &'static str },
    #[error("bigram {bigram:?}: duplicate {bias}-biased context")]
    DuplicateContext { bigram: String, bias: &'static str },
    #[error("row {row}: unknown context bias {value:?}")]
    UnknownBias { row: usize, value: String },
    #[error("invalid thresholds file: {0}")]
    BadThresholds(String),
}

fn validate_token(row: usize, token: &str) -> Result<(), CorpusError> {
    let ok = !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_lowercase() || c == ' ' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(CorpusError::BadToken { row, value: token.to_string() })
    }
}

/// Load the no-context dataset. Row numbers in errors are 1-based file lines
/// (header is line 1).
pub fn load_no_context_dataset(path: &Path, options: LoadOptions) -> Result<Dataset, CorpusError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CorpusError::Io(path.display().to_string(), std::io::Error::other(e)))?;

    struct Partial {
        class: AdjectiveClass,
        count: u64,
        ratings: Vec<LikertRating>,
        first_row: usize,
    }
    // BTreeMap keeps record order stable regardless of input order.
    let mut partials: BTreeMap<(String, String), Partial> = BTreeMap::new();

    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CorpusError::MalformedRow { row: line, reason: e.to_string() })?;
        if row.len() != 6 {
            return Err(CorpusError::MalformedRow {
                row: line,
                reason: format!("expected 6 columns, got {}", row.len()),
            });
        }
        let adjective = row[0].to_string();
        let noun = row[1].to_string();
        validate_token(line, &adjective)?;
        validate_token(line, &noun)?;
        let class = AdjectiveClass::parse(&row[2]).ok_or_else(|| CorpusError::UnknownAdjectiveClass {
            row: line,
            value: row[2].to_string(),
            adjective: adjective.clone(),
        })?;
        let count: i64 = row[3]
            .parse()
            .map_err(|_| CorpusError::MalformedRow { row: line, reason: format!("bad corpus_count {:?}", &row[3]) })?;
        if count < 0 {
            return Err(CorpusError::NegativeCount { row: line, value: count });
        }
        let rating: i64 = row[5]
            .parse()
            .map_err(|_| CorpusError::MalformedRow { row: line, reason: format!("bad rating {:?}", &row[5]) })?;
        if !(1..=5).contains(&rating) {
            return Err(CorpusError::InvalidRating { row: line, value: rating });
        }
        let rating = LikertRating::new(rating as u8).expect("range checked");

        let entry = partials.entry((adjective, noun)).or_insert_with(|| Partial {
            class,
            count: count as u64,
            ratings: Vec::new(),
            first_row: line,
        });
        if entry.class != class {
            return Err(CorpusError::InconsistentBigram {
                row: line,
                bigram: format!("{} {}", &row[0], &row[1]),
                field: "adjective_class",
            });
        }
        if entry.count != count as u64 {
            return Err(CorpusError::InconsistentBigram {
                row: line,
                bigram: format!("{} {}", &row[0], &row[1]),
                field: "corpus_count",
            });
        }
        entry.ratings.push(rating);
    }

    if partials.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }

    // Adjective class must be consistent across all bigrams of an adjective.
    let mut class_by_adjective: HashMap<String, AdjectiveClass> = HashMap::new();
    for ((adjective, _), partial) in &partials {
        match class_by_adjective.get(adjective) {
            Some(&c) if c != partial.class => {
                return Err(CorpusError::InconsistentBigram {
                    row: partial.first_row,
                    bigram: adjective.clone(),
                    field: "adjective_class",
                });
            }
            None => {
                class_by_adjective.insert(adjective.clone(), partial.class);
            }
            _ => {}
        }
    }

    let mut load_log = Vec::new();
    let (thresholds, threshold_source) = match options.thresholds {
        Some(t) => (t, ThresholdSource::Explicit),
        None => {
            let nonzero: Vec<u64> = partials.values().map(|p| p.count).filter(|&c| c > 0).collect();
            let t = BinThresholds::from_nonzero_counts(&nonzero).ok_or(CorpusError::EmptyDataset)?;
            (t, ThresholdSource::DatasetPercentiles)
        }
    };
    load_log.push(format!(
        "frequency bin thresholds ({}): p25={} p50={} p75={} p90={}",
        match threshold_source {
            ThresholdSource::Explicit => "explicit",
            ThresholdSource::DatasetPercentiles => "dataset percentiles",
        },
        thresholds.p25, thresholds.p50, thresholds.p75, thresholds.p90
    ));

    let articles = options.articles.unwrap_or_default();
    let mut entries = Vec::with_capacity(partials.len());
    let mut index = HashMap::with_capacity(partials.len());
    for ((adjective, noun), partial) in partials {
        if articles.noun_class(&noun).is_none() {
            load_log.push(format!("article for noun {noun:?} guessed by vowel heuristic"));
        }
        let record = BigramRecord {
            frequency_bin: thresholds.bin_for(partial.count),
            adjective,
            noun,
            adjective_class: partial.class,
            corpus_count: partial.count,
        };
        index.insert(record.key(), entries.len());
        entries.push(DatasetEntry {
            record,
            ratings: HumanRatingSet::new(partial.ratings)?,
        });
    }

    let core_subset = options.core_subset.map(|keys| keys.into_iter().collect());

    Ok(Dataset {
        entries,
        index,
        thresholds,
        threshold_source,
        articles,
        core_subset,
        load_log,
    })
}

/// Re-assign frequency bins, e.g. after supplying different thresholds.
pub fn assign_frequency_bins(dataset: &mut Dataset, thresholds: BinThresholds) {
    dataset.thresholds = thresholds;
    dataset.threshold_source = ThresholdSource::Explicit;
    for entry in &mut dataset.entries {
        entry.record.frequency_bin = thresholds.bin_for(entry.record.corpus_count);
    }
    dataset.load_log.push(format!(
        "frequency bins reassigned: p25={} p50={} p75={} p90={}",
        thresholds.p25, thresholds.p50, thresholds.p75, thresholds.p90
    ));
}

/// Load the context dataset: exactly one record per (bigram, bias).
pub fn load_context_dataset(path: &Path) -> Result<Vec<ContextRecord>, CorpusError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CorpusError::Io(path.display().to_string(), std::io::Error::other(e)))?;
    let mut records: Vec<ContextRecord> = Vec::new();
    let mut seen: HashMap<(String, ContextBias), usize> = HashMap::new();

    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CorpusError::MalformedRow { row: line, reason: e.to_string() })?;
        if row.len() != 4 {
            return Err(CorpusError::MalformedRow {
                row: line,
                reason: format!("expected 4 columns, got {}", row.len()),
            });
        }
        let adjective = row[0].to_string();
        let noun = row[1].to_string();
        validate_token(line, &adjective)?;
        validate_token(line, &noun)?;
        let bias = ContextBias::parse(&row[2]).ok_or_else(|| CorpusError::UnknownBias {
            row: line,
            value: row[2].to_string(),
        })?;
        let record = ContextRecord {
            adjective,
            noun,
            bias,
            text: row[3].to_string(),
            human_ratings: None,
        };
        let key = (record.key(), bias);
        if seen.insert(key, line).is_some() {
            return Err(CorpusError::DuplicateContext {
                bigram: record.key(),
                bias: bias.as_str(),
            });
        }
        records.push(record);
    }

    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }

    let bigrams: BTreeSet<String> = records.iter().map(|r| r.key()).collect();
    for bigram in &bigrams {
        for (bias, name) in [
            (ContextBias::PrivativeBiased, "privative"),
            (ContextBias::SubsectiveBiased, "subsective"),
        ] {
            if !seen.contains_key(&(bigram.clone(), bias)) {
                return Err(CorpusError::MissingContext { bigram: bigram.clone(), bias: name });
            }
        }
    }

    Ok(records)
}

/// Bigram keys in the context dataset that do not appear in the no-context
/// dataset. Non-empty results are reported, not fatal.
pub fn cross_reference(contexts: &[ContextRecord], dataset: &Dataset) -> Vec<String> {
    let keys: BTreeSet<String> = contexts.iter().map(|r| r.key()).collect();
    keys.into_iter().filter(|k| dataset.get(k).is_none()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn likert_label_round_trip() {
        for r in LikertRating::ALL {
            assert_eq!(LikertRating::from_label(r.label()), Some(r));
        }
        assert_eq!(LikertRating::ALL[0].label(), "Definitely not");
        assert_eq!(LikertRating::ALL[4].label(), "Definitely yes");
        assert!(LikertRating::new(0).is_err());
        assert!(LikertRating::new(6).is_err());
    }

    #[test]
    fn summarize_contract() {
        let set = HumanRatingSet::new(vec![LikertRating(5), LikertRating(5), LikertRating(5)]).unwrap();
        assert_eq!(summarize(&set), (5.0, 0.0));
        let set = HumanRatingSet::new(vec![LikertRating(1), LikertRating(5)]).unwrap();
        let (mean, sd) = summarize(&set);
        assert_eq!(mean, 3.0);
        assert!((sd - 2.8284271247461903).abs() < 1e-12);
        let set = HumanRatingSet::new(vec![LikertRating(2), LikertRating(3), LikertRating(4)]).unwrap();
        assert_eq!(summarize(&set), (3.0, 1.0));
        let set = HumanRatingSet::new(vec![LikertRating(4)]).unwrap();
        assert_eq!(summarize(&set), (4.0, 0.0));
    }

    #[test]
    fn bin_assignment_enumeration_fixture() {
        // Counts 0..=99: thresholds are nearest-rank percentiles of 1..=99.
        let nonzero: Vec<u64> = (1..=99).collect();
        let t = BinThresholds::from_nonzero_counts(&nonzero).unwrap();
        assert_eq!(t, BinThresholds { p25: 25, p50: 50, p75: 75, p90: 90 });
        assert_eq!(t.bin_for(0), FrequencyBin::Zero);
        assert_eq!(t.bin_for(24), FrequencyBin::P0to25);
        assert_eq!(t.bin_for(25), FrequencyBin::P25to50);
        // Boundary rule pinned: a count equal to a threshold opens that bin.
        assert_eq!(t.bin_for(50), FrequencyBin::P50to75);
        assert_eq!(t.bin_for(74), FrequencyBin::P50to75);
        assert_eq!(t.bin_for(75), FrequencyBin::P75to90);
        assert_eq!(t.bin_for(99), FrequencyBin::P90to99);
    }

    #[test]
    fn coinciding_thresholds_collapse_to_lower_bin() {
        let t = BinThresholds { p25: 10, p50: 10, p75: 10, p90: 20 };
        assert_eq!(t.bin_for(10), FrequencyBin::P50to75);
        assert_eq!(t.bin_for(19), FrequencyBin::P50to75);
        assert_eq!(t.bin_for(20), FrequencyBin::P90to99);
        assert_eq!(t.bin_for(9), FrequencyBin::P0to25);
    }

    #[test]
    fn high_frequency_is_top_quartile() {
        assert!(FrequencyBin::P75to90.is_high_frequency());
        assert!(FrequencyBin::P90to99.is_high_frequency());
        assert!(!FrequencyBin::P50to75.is_high_frequency());
        assert!(!FrequencyBin::Zero.is_high_frequency());
    }

    const SMALL: &str = "\
adjective,noun,adjective_class,corpus_count,rater_id,rating
fake,watch,privative,100,r1,4
fake,watch,privative,100,r2,5
useful,fruit,subsective,200,r1,5
useful,fruit,subsective,200,r2,5
fake,crowd,privative,0,r1,2
";

    #[test]
    fn load_small_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "nc.csv", SMALL);
        let ds = load_no_context_dataset(&path, LoadOptions::default()).unwrap();
        let counts = ds.counts();
        assert_eq!(counts.bigrams, 3);
        assert_eq!(counts.adjectives, 2);
        assert_eq!(counts.nouns, 3);
        assert_eq!(counts.zero_frequency, 1);
        let watch = ds.get("fake watch").unwrap();
        assert_eq!(watch.ratings.n(), 2);
        assert_eq!(watch.record.adjective_class, AdjectiveClass::TypicallyPrivative);
        assert!(!ds.load_log().is_empty());
    }

    #[test]
    fn empty_file_is_no_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "nc.csv", "adjective,noun,adjective_class,corpus_count,rater_id,rating\n");
        let err = load_no_context_dataset(&path, LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyDataset));
        assert_eq!(err.to_string(), "no records");
    }

    #[test]
    fn load_errors_are_row_indexed() {
        let dir = tempfile::tempdir().unwrap();
        let bad_rating = SMALL.replace("fake,watch,privative,100,r2,5", "fake,watch,privative,100,r2,9");
        let path = write_csv(&dir, "a.csv", &bad_rating);
        match load_no_context_dataset(&path, LoadOptions::default()).unwrap_err() {
            CorpusError::InvalidRating { row, value } => {
                assert_eq!(row, 3);
                assert_eq!(value, 9);
            }
            other => panic!("unexpected error {other:?}"),
        }

        let bad_class = SMALL.replace("useful,fruit,subsective,200,r1,5", "useful,fruit,intersective,200,r1,5");
        let path = write_csv(&dir, "b.csv", &bad_class);
        assert!(matches!(
            load_no_context_dataset(&path, LoadOptions::default()).unwrap_err(),
            CorpusError::UnknownAdjectiveClass { row: 4, .. }
        ));

        let negative = SMALL.replace("fake,crowd,privative,0,r1,2", "fake,crowd,privative,-3,r1,2");
        let path = write_csv(&dir, "c.csv", &negative);
        assert!(matches!(
            load_no_context_dataset(&path, LoadOptions::default()).unwrap_err(),
            CorpusError::NegativeCount { row: 6, value: -3 }
        ));

        let conflicting = SMALL.replace("fake,watch,privative,100,r2,5", "fake,watch,privative,120,r2,5");
        let path = write_csv(&dir, "d.csv", &conflicting);
        assert!(matches!(
            load_no_context_dataset(&path, LoadOptions::default()).unwrap_err(),
            CorpusError::InconsistentBigram { row: 3, field: "corpus_count", .. }
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "nc.csv", SMALL);
        let ds = load_no_context_dataset(&path, LoadOptions::default()).unwrap();
        let saved = dir.path().join("saved.csv");
        ds.save(&saved).unwrap();
        let reloaded = load_no_context_dataset(&saved, LoadOptions::default()).unwrap();
        let a: Vec<_> = ds.entries().iter().map(|e| (&e.record, e.ratings.rating_counts())).collect();
        let b: Vec<_> = reloaded.entries().iter().map(|e| (&e.record, e.ratings.rating_counts())).collect();
        assert_eq!(a, b);
    }

    const CONTEXTS: &str = "\
adjective,noun,bias,text
fake,concert,privative,\"They included a fake concert in their tax returns.\"
fake,concert,subsective,\"The fake concert is a great success.\"
";

    #[test]
    fn load_contexts() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_csv(&dir, "ctx.csv", CONTEXTS);
        let records = load_context_dataset(&path).unwrap();
        assert_eq!(records.len(), 2);
        let privative = records
            .iter()
            .find(|r| r.bias == ContextBias::PrivativeBiased)
            .unwrap();
        assert!(privative.text.contains("fake concert"));
    }

    #[test]
    fn context_missing_bias_fails() {
        let dir = tempfile::tempdir().unwrap();
        let only_privative = "adjective,noun,bias,text\nfake,concert,privative,\"x\"\n";
        let path = write_csv(&dir, "ctx.csv", only_privative);
        match load_context_dataset(&path).unwrap_err() {
            CorpusError::MissingContext { bigram, bias } => {
                assert_eq!(bigram, "fake concert");
                assert_eq!(bias, "subsective");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn context_duplicate_bias_fails() {
        let dir = tempfile::tempdir().unwrap();
        let dup = format!("{CONTEXTS}fake,concert,privative,\"again\"\n");
        let path = write_csv(&dir, "ctx.csv", &dup);
        assert!(matches!(
            load_context_dataset(&path).unwrap_err(),
            CorpusError::DuplicateContext { .. }
        ));
    }

    #[test]
    fn article_heuristic_and_exceptions() {
        let table = ArticleTable::new();
        assert_eq!(table.article_for("fake", "watch"), (Article::A, true));
        assert_eq!(table.article_for("artificial", "drug"), (Article::An, true));
        // "useful" starts with a vowel letter but takes "a".
        assert_eq!(table.article_for("useful", "fruit"), (Article::A, true));
        assert_eq!(table.verb_for("watch"), "is");
    }

    #[test]
    fn mass_and_plural_articles() {
        let mut table = ArticleTable::new();
        table.classes.insert("ice".into(), NounClass::Mass);
        table.classes.insert("instructions".into(), NounClass::Plural);
        table.classes.insert("intelligence".into(), NounClass::Mass);
        assert_eq!(table.article_for("melted", "ice"), (Article::Zero, false));
        assert_eq!(table.article_for("artificial", "intelligence"), (Article::Zero, false));
        assert_eq!(table.verb_for("instructions"), "are");
        assert_eq!(table.article_for("fake", "instructions"), (Article::Zero, false));
    }
}
