//! Benchmark ingestion and scoring.
//!
//! Word-similarity tasks are scored by Spearman's rho between gold and
//! predicted similarities; STS tasks by Pearson's r per subtask, averaged
//! without weighting. Note that these criteria are unrelated to the
//! similarity measure that produces the predictions.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bca_interval, significance_verdict, BcaInterval, PairedScoreDiff, Verdict};
use crate::embeddings::{sentence_embed, tokenize, EmbeddingTable};
use crate::measures::{pearson, similarity, spearman, ApsParams, MeasureKind, VectorSample};
use crate::normality::{normality_census, NormalityReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPair {
    pub word_a: String,
    pub word_b: String,
    pub gold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSimTask {
    pub name: String,
    pub pairs: Vec<WordPair>,
    /// Malformed lines dropped at load time.
    pub skipped_lines: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separator {
    Tab,
    Comma,
    Whitespace,
}

impl Separator {
    fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Separator::Tab
        } else if line.contains(',') {
            Separator::Comma
        } else {
            Separator::Whitespace
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Separator::Tab => line.split('\t').map(str::trim).collect(),
            Separator::Comma => line.split(',').map(str::trim).collect(),
            Separator::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Layout hints for word-similarity files. Words are always the first two
/// columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordSimFormat {
    /// `None` detects the separator per line (tab, then comma, then
    /// whitespace).
    pub separator: Option<Separator>,
    pub score_column: usize,
    pub lowercase: bool,
}

impl Default for WordSimFormat {
    fn default() -> Self {
        WordSimFormat {
            separator: None,
            score_column: 2,
            lowercase: false,
        }
    }
}

/// Reads `word_a<sep>word_b<sep>score` lines. A first line whose score field
/// is not numeric is taken as a header.
pub fn load_wordsim<R: BufRead>(reader: R, name: &str, format: WordSimFormat) -> Result<WordSimTask> {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    let mut first = true;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let is_first = std::mem::replace(&mut first, false);
        let sep = format.separator.unwrap_or_else(|| Separator::detect(line));
        let fields = sep.split(line);
        let score = fields
            .get(format.score_column)
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()));
        match score {
            Some(Some(gold)) if fields.len() >= 2 && !fields[0].is_empty() && !fields[1].is_empty() => {
                let word = |w: &str| if format.lowercase { w.to_lowercase() } else { w.to_owned() };
                pairs.push(WordPair {
                    word_a: word(fields[0]),
                    word_b: word(fields[1]),
                    gold,
                });
            }
            Some(None) if is_first => {}
            _ => skipped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput("no parseable word pairs"));
    }
    Ok(WordSimTask {
        name: name.to_owned(),
        pairs,
        skipped_lines: skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub sentence_a: String,
    pub sentence_b: String,
    pub gold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsSubtask {
    pub name: String,
    pub pairs: Vec<SentencePair>,
    pub dropped: Vec<DroppedLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StsTask {
    pub name: String,
    pub subtasks: Vec<StsSubtask>,
    /// Subtasks present on disk but left out (e.g. STS13 SMT).
    pub excluded_subtasks: Vec<String>,
}

impl StsTask {
    pub fn new(name: &str, subtasks: Vec<StsSubtask>) -> Result<Self> {
        if subtasks.is_empty() {
            return Err(Error::EmptyInput("STS task without subtasks"));
        }
        Ok(StsTask {
            name: name.to_owned(),
            subtasks,
            excluded_subtasks: Vec::new(),
        })
    }
}

/// Assembles one subtask from a file of tab-separated sentence pairs and a
/// parallel file of gold scores. Blank gold lines drop their pair.
pub fn load_sts<S: BufRead, G: BufRead>(sentences: S, gold: G, name: &str) -> Result<StsSubtask> {
    let sentence_lines = sentences.lines().collect::<std::io::Result<Vec<_>>>()?;
    let gold_lines = gold.lines().collect::<std::io::Result<Vec<_>>>()?;
    if sentence_lines.len() != gold_lines.len() {
        return Err(Error::LineCountMismatch {
            sentences: sentence_lines.len(),
            gold: gold_lines.len(),
        });
    }
    let mut pairs = Vec::new();
    let mut dropped = Vec::new();
    for (i, (s, g)) in sentence_lines.iter().zip(&gold_lines).enumerate() {
        let line = i + 1;
        let g = g.trim();
        if g.is_empty() {
            dropped.push(DroppedLine {
                line,
                reason: "blank gold score".into(),
            });
            continue;
        }
        let gold = match g.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => {
                dropped.push(DroppedLine {
                    line,
                    reason: format!("unparseable gold score '{g}'"),
                });
                continue;
            }
        };
        let mut parts = s.trim_end_matches('\r').split('\t');
        match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => pairs.push(SentencePair {
                sentence_a: a.to_owned(),
                sentence_b: b.to_owned(),
                gold,
            }),
            _ => dropped.push(DroppedLine {
                line,
                reason: "sentence line without a tab".into(),
            }),
        }
    }
    if pairs.len() < 2 {
        return Err(Error::TooFewPairs {
            scored: pairs.len(),
            required: 2,
        });
    }
    Ok(StsSubtask {
        name: name.to_owned(),
        pairs,
        dropped,
    })
}

/// Loads a SentEval-style STS directory: every `<prefix>.input.<name>.txt`
/// with a matching `<prefix>.gs.<name>.txt` becomes subtask `<name>`.
/// A subtask named `SMT` is skipped unless `include_smt` is set.
pub fn load_sts_dir(dir: &Path, task_name: &str, include_smt: bool) -> Result<StsTask> {
    let mut found = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
            continue;
        };
        let Some((prefix, rest)) = file.split_once(".input.") else {
            continue;
        };
        let Some(sub) = rest.strip_suffix(".txt") else {
            continue;
        };
        let gold = dir.join(format!("{prefix}.gs.{sub}.txt"));
        if gold.is_file() {
            found.insert(sub.to_owned(), (path.clone(), gold));
        }
    }
    let mut subtasks = Vec::new();
    let mut excluded = Vec::new();
    for (sub, (input, gold)) in found {
        if sub == "SMT" && !include_smt {
            excluded.push(sub);
            continue;
        }
        let subtask = load_sts(
            BufReader::new(File::open(&input)?),
            BufReader::new(File::open(&gold)?),
            &sub,
        )?;
        subtasks.push(subtask);
    }
    let mut task = StsTask::new(task_name, subtasks)?;
    task.excluded_subtasks = excluded;
    Ok(task)
}

/// How predicted similarities are scored against gold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Pearson,
    Spearman,
}

impl Criterion {
    pub fn score(self, gold: &[f64], predicted: &[f64]) -> Result<f64> {
        let g = VectorSample::new(gold)?;
        let p = VectorSample::new(predicted)?;
        match self {
            Criterion::Pearson => pearson(g, p),
            Criterion::Spearman => spearman(g, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub aps: ApsParams,
    pub alpha: f64,
    pub lowercase: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            aps: ApsParams::default(),
            alpha: 0.05,
            lowercase: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCount {
    pub reason: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskScore {
    pub name: String,
    /// `None` when the subtask is excluded from the task mean.
    pub score: Option<f64>,
    pub total_pairs: usize,
    pub scored_pairs: usize,
    pub excluded_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub measure_a: MeasureKind,
    pub measure_b: MeasureKind,
    /// STS subtask the interval refers to; `None` for word-level tasks.
    pub subtask: Option<String>,
    pub score_a: f64,
    pub score_b: f64,
    pub interval: Option<BcaInterval>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub embeddings: String,
    pub measure: MeasureKind,
    pub criterion: Criterion,
    /// Raw correlation; word tasks: over scored pairs, STS: mean over
    /// included subtasks.
    pub score: f64,
    /// Share of vectors not rejected as non-normal (the N column).
    pub normality: Option<NormalityReport>,
    pub normality_basis: String,
    pub total_pairs: usize,
    pub scored_pairs: usize,
    pub coverage: f64,
    pub skipped: Vec<SkipCount>,
    pub subtasks: Vec<SubtaskScore>,
    pub verdicts: Vec<MeasureComparison>,
}

/// Gold scores and predictions for one scored unit (a word task or an STS
/// subtask), indexed by pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredItems {
    pub name: String,
    pub gold: Vec<f64>,
    pub predicted: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    pub items: Vec<ScoredItems>,
}

const WORD_BASIS: &str = "unique in-vocabulary word vectors of the task";
const SENTENCE_BASIS: &str = "unique non-degenerate sentence vectors of the task";

#[derive(Default)]
struct SkipTally(BTreeMap<String, usize>);

impl SkipTally {
    fn add(&mut self, reason: impl Into<String>) {
        *self.0.entry(reason.into()).or_default() += 1;
    }

    fn total(&self) -> usize {
        self.0.values().sum()
    }

    fn into_counts(self) -> Vec<SkipCount> {
        self.0
            .into_iter()
            .map(|(reason, count)| SkipCount { reason, count })
            .collect()
    }
}

fn census_of(vectors: &[&[f64]], alpha: f64) -> Option<NormalityReport> {
    let samples: Vec<VectorSample> = vectors
        .iter()
        .filter_map(|v| VectorSample::new(v).ok())
        .collect();
    normality_census(&samples, alpha).ok()
}

fn word_normality(task: &WordSimTask, table: &EmbeddingTable, alpha: f64) -> Option<NormalityReport> {
    let rows: BTreeSet<usize> = task
        .pairs
        .iter()
        .flat_map(|p| [&p.word_a, &p.word_b])
        .filter_map(|w| table.index_of(w))
        .collect();
    let vectors: Vec<&[f64]> = rows.into_iter().map(|i| table.row(i)).collect();
    census_of(&vectors, alpha)
}

fn eval_wordsim_with(
    task: &WordSimTask,
    table: &EmbeddingTable,
    kind: MeasureKind,
    options: &EvalOptions,
    normality: Option<NormalityReport>,
) -> Result<Evaluation> {
    let mut skips = SkipTally::default();
    let mut predicted = Vec::with_capacity(task.pairs.len());
    for pair in &task.pairs {
        let (Some(a), Some(b)) = (table.get(&pair.word_a), table.get(&pair.word_b)) else {
            skips.add("out-of-vocabulary word");
            predicted.push(None);
            continue;
        };
        let value = VectorSample::new(a)
            .and_then(|a| VectorSample::new(b).and_then(|b| similarity(kind, a, b, options.aps)));
        match value {
            Ok(v) => predicted.push(Some(v)),
            Err(e) => {
                skips.add(format!("similarity undefined: {e}"));
                predicted.push(None);
            }
        }
    }
    let gold: Vec<f64> = task.pairs.iter().map(|p| p.gold).collect();
    let (g, p) = scored_subset(&gold, &predicted);
    if g.len() < 2 {
        return Err(Error::TooFewPairs {
            scored: g.len(),
            required: 2,
        });
    }
    let score = Criterion::Spearman.score(&g, &p)?;
    let total = task.pairs.len();
    let scored = g.len();
    debug_assert_eq!(scored + skips.total(), total);
    Ok(Evaluation {
        report: EvalReport {
            task: task.name.clone(),
            embeddings: table.source_label().to_owned(),
            measure: kind,
            criterion: Criterion::Spearman,
            score,
            normality,
            normality_basis: WORD_BASIS.into(),
            total_pairs: total,
            scored_pairs: scored,
            coverage: scored as f64 / total as f64,
            skipped: skips.into_counts(),
            subtasks: Vec::new(),
            verdicts: Vec::new(),
        },
        items: vec![ScoredItems {
            name: task.name.clone(),
            gold,
            predicted,
        }],
    })
}

fn scored_subset(gold: &[f64], predicted: &[Option<f64>]) -> (Vec<f64>, Vec<f64>) {
    gold.iter()
        .zip(predicted)
        .filter_map(|(&g, p)| p.map(|p| (g, p)))
        .unzip()
}

/// Scores a word-similarity task with measure `kind`. Pairs with an
/// out-of-vocabulary word are skipped and counted.
pub fn eval_wordsim(
    task: &WordSimTask,
    table: &EmbeddingTable,
    kind: MeasureKind,
    options: &EvalOptions,
) -> Result<Evaluation> {
    let normality = word_normality(task, table, options.alpha);
    eval_wordsim_with(task, table, kind, options, normality)
}

type PairVectors = (Option<Vec<f64>>, Option<Vec<f64>>);

/// Averaged sentence vectors for every pair of every subtask; `None` marks a
/// degenerate sentence.
struct EmbeddedSts {
    subtasks: Vec<Vec<PairVectors>>,
    normality: Option<NormalityReport>,
}

fn embed_sts(task: &StsTask, table: &EmbeddingTable, options: &EvalOptions) -> EmbeddedSts {
    let embed = |s: &str| {
        let v = sentence_embed(table, &tokenize(s, options.lowercase));
        (!v.is_degenerate()).then_some(v.values)
    };
    let subtasks: Vec<Vec<_>> = task
        .subtasks
        .iter()
        .map(|sub| {
            sub.pairs
                .par_iter()
                .map(|p| (embed(&p.sentence_a), embed(&p.sentence_b)))
                .collect()
        })
        .collect();

    let mut unique: BTreeMap<&str, &[f64]> = BTreeMap::new();
    for (sub, vectors) in task.subtasks.iter().zip(&subtasks) {
        for (pair, (a, b)) in sub.pairs.iter().zip(vectors) {
            if let Some(a) = a {
                unique.entry(pair.sentence_a.as_str()).or_insert(a);
            }
            if let Some(b) = b {
                unique.entry(pair.sentence_b.as_str()).or_insert(b);
            }
        }
    }
    let vectors: Vec<&[f64]> = unique.into_values().collect();
    let normality = census_of(&vectors, options.alpha);
    EmbeddedSts { subtasks, normality }
}

fn eval_sts_with(
    task: &StsTask,
    table: &EmbeddingTable,
    kind: MeasureKind,
    options: &EvalOptions,
    embedded: &EmbeddedSts,
) -> Result<Evaluation> {
    let mut skips = SkipTally::default();
    let mut items = Vec::new();
    let mut subtask_scores = Vec::new();
    let mut total = 0;
    let mut scored_total = 0;

    for (sub, vectors) in task.subtasks.iter().zip(&embedded.subtasks) {
        let mut predicted = Vec::with_capacity(sub.pairs.len());
        for (a, b) in vectors {
            let (Some(a), Some(b)) = (a, b) else {
                skips.add("degenerate sentence (no in-vocabulary token)");
                predicted.push(None);
                continue;
            };
            let value = VectorSample::new(a)
                .and_then(|a| VectorSample::new(b).and_then(|b| similarity(kind, a, b, options.aps)));
            match value {
                Ok(v) => predicted.push(Some(v)),
                Err(e) => {
                    skips.add(format!("similarity undefined: {e}"));
                    predicted.push(None);
                }
            }
        }
        let gold: Vec<f64> = sub.pairs.iter().map(|p| p.gold).collect();
        let (g, p) = scored_subset(&gold, &predicted);
        let (score, excluded_reason) = if g.len() < 2 {
            (None, Some(format!("only {} scored pairs", g.len())))
        } else {
            match Criterion::Pearson.score(&g, &p) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            }
        };
        total += sub.pairs.len();
        scored_total += g.len();
        subtask_scores.push(SubtaskScore {
            name: sub.name.clone(),
            score,
            total_pairs: sub.pairs.len(),
            scored_pairs: g.len(),
            excluded_reason,
        });
        items.push(ScoredItems {
            name: sub.name.clone(),
            gold,
            predicted,
        });
    }

    let included: Vec<f64> = subtask_scores.iter().filter_map(|s| s.score).collect();
    if included.is_empty() {
        return Err(Error::TooFewPairs {
            scored: scored_total,
            required: 2,
        });
    }
    let score = included.iter().sum::<f64>() / included.len() as f64;
    Ok(Evaluation {
        report: EvalReport {
            task: task.name.clone(),
            embeddings: table.source_label().to_owned(),
            measure: kind,
            criterion: Criterion::Pearson,
            score,
            normality: embedded.normality,
            normality_basis: SENTENCE_BASIS.into(),
            total_pairs: total,
            scored_pairs: scored_total,
            coverage: scored_total as f64 / total as f64,
            skipped: skips.into_counts(),
            subtasks: subtask_scores,
            verdicts: Vec::new(),
        },
        items,
    })
}

/// Scores an STS task: Pearson's r per subtask over pairs whose sentence
/// vectors are both non-degenerate, then the unweighted mean over subtasks.
pub fn eval_sts(
    task: &StsTask,
    table: &EmbeddingTable,
    kind: MeasureKind,
    options: &EvalOptions,
) -> Result<Evaluation> {
    let embedded = embed_sts(task, table, options);
    eval_sts_with(task, table, kind, options, &embedded)
}

/// `criterion(gold, a) - criterion(gold, b)` over the items where both
/// predictions exist. The returned index map translates statistic item
/// indices back to pair indices.
pub fn correlation_difference<'a>(
    criterion: Criterion,
    gold: &'a [f64],
    predicted_a: &'a [Option<f64>],
    predicted_b: &'a [Option<f64>],
) -> PairedScoreDiff<'a> {
    let shared: Vec<usize> = (0..gold.len())
        .filter(|&i| predicted_a[i].is_some() && predicted_b[i].is_some())
        .collect();
    let count = shared.len();
    PairedScoreDiff::new(count, move |items: &[usize]| {
        let mut g = Vec::with_capacity(items.len());
        let mut a = Vec::with_capacity(items.len());
        let mut b = Vec::with_capacity(items.len());
        for &k in items {
            let i = shared[k];
            g.push(gold[i]);
            a.push(predicted_a[i]?);
            b.push(predicted_b[i]?);
        }
        let sa = criterion.score(&g, &a).ok()?;
        let sb = criterion.score(&g, &b).ok()?;
        Some(sa - sb)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            level: 0.95,
            resamples: crate::bootstrap::DEFAULT_RESAMPLES,
            seed: 0,
        }
    }
}

fn compare(
    criterion: Criterion,
    a: (&EvalReport, &ScoredItems),
    b: (&EvalReport, &ScoredItems),
    subtask: Option<String>,
    bootstrap: &BootstrapOptions,
) -> MeasureComparison {
    let (report_a, items_a) = a;
    let (report_b, items_b) = b;
    let (score_a, score_b) = match &subtask {
        Some(name) => {
            let find = |r: &EvalReport| {
                r.subtasks
                    .iter()
                    .find(|s| &s.name == name)
                    .and_then(|s| s.score)
                    .unwrap_or(f64::NAN)
            };
            (find(report_a), find(report_b))
        }
        None => (report_a.score, report_b.score),
    };
    let diff = correlation_difference(criterion, &items_a.gold, &items_a.predicted, &items_b.predicted);
    let result = bca_interval(&diff, bootstrap.level, bootstrap.resamples, bootstrap.seed);
    let (interval, verdict, error) = match result {
        Ok(ci) => (Some(ci), Some(significance_verdict(&ci)), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    MeasureComparison {
        measure_a: report_a.measure,
        measure_b: report_b.measure,
        subtask,
        score_a,
        score_b,
        interval,
        verdict,
        error,
    }
}

/// BCa comparisons of measure `a` against measure `b` on the same task and
/// embeddings: one for a word task, one per subtask for STS.
pub fn compare_measures(
    a: &Evaluation,
    b: &Evaluation,
    bootstrap: &BootstrapOptions,
) -> Vec<MeasureComparison> {
    let criterion = a.report.criterion;
    let per_subtask = !a.report.subtasks.is_empty();
    a.items
        .iter()
        .zip(&b.items)
        .map(|(ia, ib)| {
            let subtask = per_subtask.then(|| ia.name.clone());
            compare(criterion, (&a.report, ia), (&b.report, ib), subtask, bootstrap)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub enum Task {
    Word(WordSimTask),
    Sts(StsTask),
}

impl Task {
    pub fn name(&self) -> &str {
        match self {
            Task::Word(t) => &t.name,
            Task::Sts(t) => &t.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub measures: Vec<MeasureKind>,
    /// Measure pairs `(A, B)` to compare with BCa intervals on `A - B`.
    pub comparisons: Vec<(MeasureKind, MeasureKind)>,
    /// Compare the best rank-based against the best non-rank measure on
    /// word tasks.
    pub family_verdicts: bool,
    pub options: EvalOptions,
    pub bootstrap: BootstrapOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            measures: MeasureKind::ALL.to_vec(),
            comparisons: vec![(MeasureKind::Spr, MeasureKind::Cos)],
            family_verdicts: true,
            options: EvalOptions::default(),
            bootstrap: BootstrapOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub task: String,
    pub embeddings: String,
    pub measure: Option<MeasureKind>,
    pub error: String,
}

/// Winner of best rank-based vs best non-rank measure: `R`, `N` or `=`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub task: String,
    pub embeddings: String,
    pub rank_measure: MeasureKind,
    pub non_rank_measure: MeasureKind,
    pub comparison: MeasureComparison,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub reports: Vec<EvalReport>,
    pub failures: Vec<CellFailure>,
    pub family_verdicts: Vec<FamilyVerdict>,
}

struct CellResult {
    evaluations: Vec<Evaluation>,
    failures: Vec<CellFailure>,
    family: Option<FamilyVerdict>,
}

fn run_cell(task: &Task, table: &EmbeddingTable, config: &SweepConfig) -> CellResult {
    let options = &config.options;
    let mut failures = Vec::new();
    let mut evaluations = Vec::new();
    let fail = |measure, error: Error| CellFailure {
        task: task.name().to_owned(),
        embeddings: table.source_label().to_owned(),
        measure,
        error: error.to_string(),
    };

    match task {
        Task::Word(t) => {
            let normality = word_normality(t, table, options.alpha);
            for &kind in &config.measures {
                match eval_wordsim_with(t, table, kind, options, normality) {
                    Ok(e) => evaluations.push(e),
                    Err(e) => failures.push(fail(Some(kind), e)),
                }
            }
        }
        Task::Sts(t) => {
            let embedded = embed_sts(t, table, options);
            for &kind in &config.measures {
                match eval_sts_with(t, table, kind, options, &embedded) {
                    Ok(e) => evaluations.push(e),
                    Err(e) => failures.push(fail(Some(kind), e)),
                }
            }
        }
    }

    for &(a, b) in &config.comparisons {
        let find = |k: MeasureKind| evaluations.iter().position(|e| e.report.measure == k);
        if let (Some(ia), Some(ib)) = (find(a), find(b)) {
            let found = compare_measures(&evaluations[ia], &evaluations[ib], &config.bootstrap);
            evaluations[ia].report.verdicts.extend(found);
        }
    }

    let family = match task {
        Task::Word(_) if config.family_verdicts => family_verdict(&evaluations, &config.bootstrap),
        _ => None,
    };
    CellResult {
        evaluations,
        failures,
        family,
    }
}

fn family_verdict(evaluations: &[Evaluation], bootstrap: &BootstrapOptions) -> Option<FamilyVerdict> {
    // first of equal scores wins, in measure order
    let best = |rank_based: bool| {
        evaluations
            .iter()
            .filter(|e| e.report.measure.is_rank_based() == rank_based)
            .fold(None::<&Evaluation>, |best, e| match best {
                Some(b) if b.report.score >= e.report.score => Some(b),
                _ => Some(e),
            })
    };
    let (rank, other) = (best(true)?, best(false)?);
    let comparison = compare_measures(rank, other, bootstrap).into_iter().next()?;
    let label = match comparison.verdict {
        Some(Verdict::AWins) => "R",
        Some(Verdict::BWins) => "N",
        _ => "=",
    };
    Some(FamilyVerdict {
        task: rank.report.task.clone(),
        embeddings: rank.report.embeddings.clone(),
        rank_measure: rank.report.measure,
        non_rank_measure: other.report.measure,
        comparison,
        label: label.into(),
    })
}

/// Evaluates every task × embeddings × measure cell. Cells run concurrently;
/// results keep task-major, then embeddings, then measure order. A failing
/// cell is recorded and never stops the sweep.
pub fn sweep(tasks: &[Task], tables: &[EmbeddingTable], config: &SweepConfig) -> SweepReport {
    let cells: Vec<(usize, usize)> = (0..tasks.len())
        .flat_map(|t| (0..tables.len()).map(move |e| (t, e)))
        .collect();
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(t, e)| run_cell(&tasks[t], &tables[e], config))
        .collect();

    let mut report = SweepReport {
        reports: Vec::new(),
        failures: Vec::new(),
        family_verdicts: Vec::new(),
    };
    for cell in results {
        report
            .reports
            .extend(cell.evaluations.into_iter().map(|e| e.report));
        report.failures.extend(cell.failures);
        report.family_verdicts.extend(cell.family);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_rows(
            "toy",
            [
                ("cat", vec![1.0, 2.0, 3.0, 4.0]),
                ("dog", vec![1.5, 2.5, 2.0, 4.5]),
                ("car", vec![4.0, -1.0, 0.5, 1.0]),
                ("tree", vec![0.0, 3.0, -2.0, 1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn wordsim_loading() {
        let t = load_wordsim("cat\tdog\t7.35\n".as_bytes(), "x", WordSimFormat::default()).unwrap();
        assert_eq!(t.pairs.len(), 1);
        assert_eq!(t.pairs[0].gold, 7.35);

        let t = load_wordsim(
            "w1,w2,score\ncat,dog,1\ncar,tree,2\n".as_bytes(),
            "x",
            WordSimFormat::default(),
        )
        .unwrap();
        assert_eq!((t.pairs.len(), t.skipped_lines), (2, 0));

        let t = load_wordsim("cat dog 3\na b\n".as_bytes(), "x", WordSimFormat::default()).unwrap();
        assert_eq!((t.pairs.len(), t.skipped_lines), (1, 1));

        let simlex = "word1\tword2\tPOS\tSimLex999\nOld\tNew\tA\t1.58\n";
        let format = WordSimFormat {
            score_column: 3,
            lowercase: true,
            ..Default::default()
        };
        let t = load_wordsim(simlex.as_bytes(), "simlex", format).unwrap();
        assert_eq!(t.pairs[0].word_a, "old");
        assert_eq!(t.pairs[0].gold, 1.58);

        assert!(load_wordsim("a b\n".as_bytes(), "x", WordSimFormat::default()).is_err());
        assert!(load_wordsim("".as_bytes(), "x", WordSimFormat::default()).is_err());
    }

    #[test]
    fn sts_loading() {
        let s = load_sts("a b\tc d\ne f\tg h\n".as_bytes(), "1.0\n2.0\n".as_bytes(), "sub").unwrap();
        assert_eq!(s.pairs.len(), 2);
        assert!(s.dropped.is_empty());

        let s = load_sts(
            "a\tb\nc\td\ne\tf\n".as_bytes(),
            "1.0\n\n3.0\n".as_bytes(),
            "sub",
        )
        .unwrap();
        assert_eq!(s.pairs.len(), 2);
        assert_eq!(s.dropped, vec![DroppedLine { line: 2, reason: "blank gold score".into() }]);

        match load_sts("a\tb\nc\td\ne\tf\n".as_bytes(), "1\n2\n".as_bytes(), "sub") {
            Err(Error::LineCountMismatch { sentences: 3, gold: 2 }) => {}
            other => panic!("expected mismatch, got {other:?}"),
        }
        assert!(matches!(
            load_sts("a\tb\nc\td\n".as_bytes(), "1\n\n".as_bytes(), "sub"),
            Err(Error::TooFewPairs { .. })
        ));
    }

    #[test]
    fn wordsim_perfect_predictor_and_oov() {
        let table = table();
        let mut pairs = Vec::new();
        let words = ["cat", "dog", "car", "tree"];
        for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                let x = VectorSample::new(table.get(a).unwrap()).unwrap();
                let y = VectorSample::new(table.get(b).unwrap()).unwrap();
                let gold = crate::measures::cosine(x, y).unwrap() * 10.0 + 1.0;
                pairs.push(WordPair {
                    word_a: a.to_string(),
                    word_b: b.to_string(),
                    gold,
                });
            }
        }
        pairs.push(WordPair {
            word_a: "cat".into(),
            word_b: "unicorn".into(),
            gold: 5.0,
        });
        let task = WordSimTask {
            name: "toy".into(),
            pairs,
            skipped_lines: 0,
        };
        let e = eval_wordsim(&task, &table, MeasureKind::Cos, &EvalOptions::default()).unwrap();
        assert_eq!(e.report.score, 1.0);
        assert_eq!((e.report.total_pairs, e.report.scored_pairs), (7, 6));
        assert_eq!(
            e.report.skipped,
            vec![SkipCount { reason: "out-of-vocabulary word".into(), count: 1 }]
        );
        let n = e.report.normality.unwrap();
        assert_eq!(n.total + n.untestable, 4);
    }

    #[test]
    fn wordsim_too_few_pairs() {
        let task = WordSimTask {
            name: "t".into(),
            pairs: vec![WordPair {
                word_a: "cat".into(),
                word_b: "dog".into(),
                gold: 1.0,
            }],
            skipped_lines: 0,
        };
        assert!(matches!(
            eval_wordsim(&task, &table(), MeasureKind::Spr, &EvalOptions::default()),
            Err(Error::TooFewPairs { .. })
        ));
    }

    #[test]
    fn sts_subtask_exclusion() {
        let table = table();
        let good = StsSubtask {
            name: "good".into(),
            pairs: vec![
                SentencePair { sentence_a: "cat dog".into(), sentence_b: "dog".into(), gold: 4.0 },
                SentencePair { sentence_a: "car".into(), sentence_b: "tree".into(), gold: 0.5 },
                SentencePair { sentence_a: "cat!".into(), sentence_b: "tree car".into(), gold: 1.0 },
            ],
            dropped: vec![],
        };
        let bad = StsSubtask {
            name: "bad".into(),
            pairs: vec![
                SentencePair { sentence_a: "zzz".into(), sentence_b: "dog".into(), gold: 4.0 },
                SentencePair { sentence_a: "car".into(), sentence_b: "tree".into(), gold: 0.5 },
            ],
            dropped: vec![],
        };
        let task = StsTask::new("sts", vec![good, bad]).unwrap();
        let e = eval_sts(&task, &table, MeasureKind::Cos, &EvalOptions::default()).unwrap();
        let r = &e.report;
        assert_eq!(r.subtasks[0].score, Some(r.score));
        assert!(r.subtasks[1].score.is_none());
        assert!(r.subtasks[1].excluded_reason.is_some());
        assert_eq!((r.total_pairs, r.scored_pairs), (5, 4));
        assert_eq!(r.skipped.iter().map(|s| s.count).sum::<usize>(), 1);
    }
}
