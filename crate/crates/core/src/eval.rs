//! Mention buckets, micro-averaged P@1 and MRR, the easy-mention mutilation
//! experiment and the gold-vs-non-gold score-gap analysis.
//!
//! Easy and hard figures exclude not-found mentions; the overall figures
//! count them as misses.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DocumentTask;
use crate::error::{Error, Result};
use crate::index::CandidateList;
use crate::link::{link_corpus, LinkResult, LinkSettings, Resources, ScoredCandidate};

pub const PREDICTIONS_FORMAT: &str = "eigenthemes-predictions";
pub const METRICS_FORMAT: &str = "eigenthemes-metrics";
pub const FORMAT_VERSION: u32 = 1;
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

const PREDICTIONS_HEADER: [&str; 8] = [
    "doc_id",
    "mention_idx",
    "surface",
    "gold_qid",
    "predicted_qid",
    "bucket",
    "rank_of_gold",
    "score",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Easy,
    Hard,
    NotFound,
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Easy => "easy",
            Bucket::Hard => "hard",
            Bucket::NotFound => "not_found",
        })
    }
}

impl FromStr for Bucket {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Bucket::Easy),
            "hard" => Ok(Bucket::Hard),
            "not_found" => Ok(Bucket::NotFound),
            other => Err(Error::Format(format!("unknown bucket {other:?}"))),
        }
    }
}

/// Bucket of a mention given its degree-sorted, truncated candidate list.
pub fn classify(candidates: &CandidateList, gold: &str) -> Bucket {
    match candidates.position(gold) {
        None => Bucket::NotFound,
        Some(0) => Bucket::Easy,
        Some(_) => Bucket::Hard,
    }
}

/// Which mentions a metric is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Easy,
    Hard,
    /// Every annotated mention; not-found ones count as misses.
    Overall,
}

impl Scope {
    fn admits(self, b: Bucket) -> bool {
        match self {
            Scope::Easy => b == Bucket::Easy,
            Scope::Hard => b == Bucket::Hard,
            Scope::Overall => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionOutcome {
    pub doc_id: String,
    pub mention_idx: usize,
    pub surface: String,
    pub gold: String,
    pub predicted: Option<String>,
    pub bucket: Bucket,
    /// 1-based rank of the gold entity in the method's ranking. Absent for
    /// not-found mentions, and for methods whose ranking omits the gold entity.
    pub rank_of_gold: Option<usize>,
    /// Score of the predicted entity.
    pub score: Option<f64>,
    /// Full ranking; empty when read back from a predictions file.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<ScoredCandidate>,
}

impl MentionOutcome {
    pub fn correct(&self) -> bool {
        self.bucket != Bucket::NotFound && self.predicted.as_deref() == Some(self.gold.as_str())
    }

    pub fn reciprocal_rank(&self) -> f64 {
        match (self.bucket, self.rank_of_gold) {
            (Bucket::NotFound, _) | (_, None) => 0.0,
            (_, Some(r)) => 1.0 / r as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub outcomes: Vec<MentionOutcome>,
    /// Mentions without a gold annotation, left out of every metric.
    pub unannotated: usize,
}

/// Pairs each mention with its link result.
pub fn evaluate(tasks: &[DocumentTask], results: &[LinkResult]) -> Result<Evaluation> {
    if tasks.len() != results.len() {
        return Err(Error::Dimension {
            expected: tasks.len(),
            got: results.len(),
        });
    }
    let mut outcomes = Vec::new();
    let mut unannotated = 0;
    for (task, result) in tasks.iter().zip(results) {
        if task.mentions.len() != result.mentions.len() {
            return Err(Error::Dimension {
                expected: task.mentions.len(),
                got: result.mentions.len(),
            });
        }
        for (i, (m, link)) in task.mentions.iter().zip(&result.mentions).enumerate() {
            let Some(gold) = &m.gold else {
                unannotated += 1;
                continue;
            };
            let bucket = classify(&m.candidates, gold);
            let rank_of_gold = match bucket {
                Bucket::NotFound => None,
                _ => link.rank_of(gold),
            };
            let score = link.predicted.as_ref().and_then(|p| link.score_of(p));
            outcomes.push(MentionOutcome {
                doc_id: task.doc_id.clone(),
                mention_idx: i,
                surface: m.surface.clone(),
                gold: gold.clone(),
                predicted: link.predicted.clone(),
                bucket,
                rank_of_gold,
                score,
                scores: link.ranking.clone(),
            });
        }
    }
    if unannotated > 0 {
        log::warn!("{unannotated} mention(s) without gold annotation excluded from evaluation");
    }
    Ok(Evaluation { outcomes, unannotated })
}

fn scoped(outcomes: &[MentionOutcome], scope: Scope) -> impl Iterator<Item = &MentionOutcome> {
    outcomes.iter().filter(move |o| scope.admits(o.bucket))
}

/// Fraction of the scope's mentions linked correctly; `None` for an empty scope.
pub fn precision_at_1(outcomes: &[MentionOutcome], scope: Scope) -> Option<f64> {
    let (n, c) = scoped(outcomes, scope).fold((0usize, 0usize), |(n, c), o| (n + 1, c + o.correct() as usize));
    (n > 0).then(|| c as f64 / n as f64)
}

/// Mean reciprocal rank of the gold entity; `None` for an empty scope.
pub fn mrr(outcomes: &[MentionOutcome], scope: Scope) -> Option<f64> {
    let (n, s) = scoped(outcomes, scope).fold((0usize, 0.0), |(n, s), o| (n + 1, s + o.reciprocal_rank()));
    (n > 0).then(|| s / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketMetrics {
    pub count: usize,
    pub precision_at_1: Option<f64>,
    pub mrr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub easy: BucketMetrics,
    pub hard: BucketMetrics,
    pub overall: BucketMetrics,
    pub not_found: usize,
    /// Fraction of annotated mentions whose gold entity is a candidate.
    pub oracle_recall: Option<f64>,
}

impl MetricsReport {
    pub fn from_outcomes(outcomes: &[MentionOutcome]) -> Self {
        let bucket = |scope| BucketMetrics {
            count: scoped(outcomes, scope).count(),
            precision_at_1: precision_at_1(outcomes, scope),
            mrr: mrr(outcomes, scope),
        };
        let overall = bucket(Scope::Overall);
        let not_found = outcomes.iter().filter(|o| o.bucket == Bucket::NotFound).count();
        Self {
            easy: bucket(Scope::Easy),
            hard: bucket(Scope::Hard),
            overall,
            not_found,
            oracle_recall: (overall.count > 0)
                .then(|| (overall.count - not_found) as f64 / overall.count as f64),
        }
    }
}

/// Metrics file contents: the report plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub format: String,
    pub format_version: u32,
    pub seed: u64,
    pub config: serde_json::Value,
    pub unannotated: usize,
    pub metrics: MetricsReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_gap: Option<ScoreGap>,
}

impl MetricsDocument {
    pub fn new(config: serde_json::Value, seed: u64, metrics: MetricsReport, unannotated: usize) -> Self {
        Self {
            format: METRICS_FORMAT.into(),
            format_version: FORMAT_VERSION,
            seed,
            config,
            unannotated,
            metrics,
            score_gap: None,
        }
    }

    pub fn from_evaluation(config: serde_json::Value, seed: u64, eval: &Evaluation) -> Self {
        Self::new(config, seed, MetricsReport::from_outcomes(&eval.outcomes), eval.unannotated)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("metrics serialize");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Metadata line at the top of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsMeta {
    pub format: String,
    pub format_version: u32,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl PredictionsMeta {
    pub fn new(config: serde_json::Value, seed: u64) -> Self {
        Self {
            format: PREDICTIONS_FORMAT.into(),
            format_version: FORMAT_VERSION,
            seed,
            config,
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, line, format!("{other:?}")),
    }
}

/// Writes one CSV row per outcome, preceded by a `#`-prefixed JSON metadata line.
pub fn write_predictions(outcomes: &[MentionOutcome], meta: &PredictionsMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let meta_line = serde_json::to_string(meta).expect("metadata serializes");
    writeln!(out, "# {meta_line}").map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PREDICTIONS_HEADER).map_err(|e| csv_error(path, e))?;
    for o in outcomes {
        w.write_record([
            o.doc_id.clone(),
            o.mention_idx.to_string(),
            o.surface.clone(),
            o.gold.clone(),
            o.predicted.clone().unwrap_or_default(),
            o.bucket.to_string(),
            o.rank_of_gold.map(|r| r.to_string()).unwrap_or_default(),
            o.score.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a predictions file written by [`write_predictions`].
pub fn read_predictions(path: impl AsRef<Path>) -> Result<(Option<PredictionsMeta>, Vec<MentionOutcome>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(&file).read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let meta = match first.strip_prefix('#') {
        Some(json) => Some(
            serde_json::from_str(json.trim()).map_err(|e| Error::parse(path, 1, format!("metadata: {e}")))?,
        ),
        None => None,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(PREDICTIONS_HEADER) {
        return Err(Error::Format(format!(
            "{}: expected header {}",
            path.display(),
            PREDICTIONS_HEADER.join(",")
        )));
    }
    let mut outcomes = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |what: &str| Error::parse(path, line, format!("bad {what}"));
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_owned());
        outcomes.push(MentionOutcome {
            doc_id: rec[0].to_owned(),
            mention_idx: rec[1].parse().map_err(|_| bad("mention_idx"))?,
            surface: rec[2].to_owned(),
            gold: rec[3].to_owned(),
            predicted: opt(&rec[4]),
            bucket: rec[5].parse().map_err(|_| bad("bucket"))?,
            rank_of_gold: match &rec[6] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("rank_of_gold"))?),
            },
            score: match &rec[7] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("score"))?),
            },
            scores: Vec::new(),
        });
    }
    Ok((meta, outcomes))
}

/// Copy of the corpus keeping `round(fraction * n_easy)` easy mentions,
/// chosen uniformly at random. Hard, not-found and unannotated mentions stay.
pub fn mutilate(tasks: &[DocumentTask], fraction: f64, rng: &mut impl Rng) -> Result<Vec<DocumentTask>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Domain(format!("fraction {fraction} outside [0, 1]")));
    }
    let easy: Vec<(usize, usize)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(d, t)| {
            t.mentions.iter().enumerate().filter_map(move |(m, men)| {
                let gold = men.gold.as_deref()?;
                (classify(&men.candidates, gold) == Bucket::Easy).then_some((d, m))
            })
        })
        .collect();
    let keep_n = (fraction * easy.len() as f64).round() as usize;
    let mut drop = vec![Vec::new(); tasks.len()];
    let mut kept = vec![false; easy.len()];
    for i in sample(rng, easy.len(), keep_n) {
        kept[i] = true;
    }
    for (&(d, m), k) in easy.iter().zip(&kept) {
        if !k {
            drop[d].push(m);
        }
    }
    Ok(tasks
        .iter()
        .zip(&drop)
        .map(|(t, drop)| {
            if drop.is_empty() {
                t.clone()
            } else {
                t.retain_mentions(|i| !drop.contains(&i))
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutilationPoint {
    pub fraction: f64,
    /// Overall P@1 per method, pooled over repeats.
    pub precision_at_1: Vec<Option<f64>>,
    /// Annotated mentions per repeat.
    pub mentions: usize,
}

/// Drops easy mentions at each fraction, re-links the mutilated corpus with
/// every method and reports overall P@1.
///
/// All methods see the same subsample in a given repeat. P@1 is pooled
/// (total correct over total mentions across repeats), so `fraction = 1`
/// reproduces the plain evaluation exactly.
pub fn mutilation(
    tasks: &[DocumentTask],
    fractions: &[f64],
    seed: u64,
    repeats: usize,
    methods: &[LinkSettings],
    res: &Resources<'_>,
    jobs: usize,
) -> Result<Vec<MutilationPoint>> {
    if repeats == 0 {
        return Err(Error::Config("mutilation needs at least one repeat".into()));
    }
    for s in methods {
        res.check(s)?;
    }
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let mut correct = vec![0usize; methods.len()];
        let mut total = vec![0usize; methods.len()];
        let mut mentions = 0;
        for _ in 0..repeats {
            let mut rng = ChaCha8Rng::seed_from_u64(root.random());
            let sub = mutilate(tasks, f, &mut rng)?;
            for (j, s) in methods.iter().enumerate() {
                let ev = evaluate(&sub, &link_corpus(&sub, res, s, jobs)?)?;
                correct[j] += ev.outcomes.iter().filter(|o| o.correct()).count();
                total[j] += ev.outcomes.len();
                mentions = ev.outcomes.len();
            }
        }
        points.push(MutilationPoint {
            fraction: f,
            precision_at_1: correct
                .iter()
                .zip(&total)
                .map(|(&c, &n)| (n > 0).then(|| c as f64 / n as f64))
                .collect(),
            mentions,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGap {
    /// Mean of (G - N) / N over contributing mentions.
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mentions: usize,
    /// Found mentions without a defined gap (single candidate, missing or
    /// non-positive scores).
    pub excluded: usize,
    pub resamples: usize,
    pub seed: u64,
}

/// Relative gap between the gold score G and the mean non-gold score N of one mention.
pub fn relative_gap(o: &MentionOutcome) -> Option<f64> {
    if o.bucket == Bucket::NotFound {
        return None;
    }
    let mut gold = None;
    let (mut sum, mut n) = (0.0, 0usize);
    for c in &o.scores {
        if !c.score.is_finite() {
            continue;
        }
        if c.qid == o.gold {
            gold = Some(c.score);
        } else {
            sum += c.score;
            n += 1;
        }
    }
    let g = gold?;
    if n == 0 {
        return None;
    }
    let mean = sum / n as f64;
    (mean > 0.0).then(|| (g - mean) / mean)
}

/// Mean relative gap with a percentile bootstrap 95% interval.
pub fn score_gap(outcomes: &[MentionOutcome], seed: u64, resamples: usize) -> Result<ScoreGap> {
    if resamples == 0 {
        return Err(Error::Config("bootstrap needs at least one resample".into()));
    }
    let found = outcomes.iter().filter(|o| o.bucket != Bucket::NotFound).count();
    let gaps: Vec<f64> = outcomes.iter().filter_map(relative_gap).collect();
    if gaps.is_empty() {
        return Err(Error::UndefinedInput("no mention has a defined score gap".into()));
    }
    let n = gaps.len();
    let mean = gaps.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| gaps[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = ((0.025 * resamples as f64).floor() as usize).min(resamples - 1);
    let hi = ((0.975 * resamples as f64).ceil() as usize).saturating_sub(1).min(resamples - 1);
    Ok(ScoreGap {
        mean,
        ci_low: means[lo],
        ci_high: means[hi],
        mentions: n,
        excluded: found - n,
        resamples,
        seed,
    })
}
