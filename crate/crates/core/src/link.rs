//! Linking results shared by every method, and the dispatcher that runs a
//! method over a corpus.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, NameIndex};
use crate::catalog::EntityCatalog;
use crate::context::DEFAULT_WINDOW;
use crate::dataset::DocumentTask;
use crate::eigenthemes::{self, Scaling, WeightingContext, DEFAULT_COMPONENTS};
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::index::CandidateList;
use crate::weighting::{ContextMode, TextResources, WeightScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub qid: String,
    pub score: f64,
}

/// Why a mention was not ranked by the method itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// No usable signal; the top-degree candidate was taken.
    TopDegree,
    /// The mention had no candidates.
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionLink {
    pub predicted: Option<String>,
    /// Best first.
    pub ranking: Vec<ScoredCandidate>,
    pub fallback: Option<Fallback>,
}

impl MentionLink {
    pub fn ranked(ranking: Vec<ScoredCandidate>, fallback: Option<Fallback>) -> Self {
        Self {
            predicted: ranking.first().map(|c| c.qid.clone()),
            ranking,
            fallback,
        }
    }

    /// Candidates in generator order, scored by degree.
    pub fn from_degree_order(candidates: &CandidateList, fallback: Option<Fallback>) -> Self {
        if candidates.is_empty() {
            return Self::unresolved();
        }
        let ranking = candidates
            .candidates
            .iter()
            .map(|c| ScoredCandidate {
                qid: c.qid.clone(),
                score: c.degree as f64,
            })
            .collect();
        Self::ranked(ranking, fallback)
    }

    pub fn unresolved() -> Self {
        Self {
            predicted: None,
            ranking: Vec::new(),
            fallback: Some(Fallback::NoCandidates),
        }
    }

    /// 1-based position of `qid` in the ranking.
    pub fn rank_of(&self, qid: &str) -> Option<usize> {
        self.ranking.iter().position(|c| c.qid == qid).map(|p| p + 1)
    }

    pub fn score_of(&self, qid: &str) -> Option<f64> {
        self.ranking.iter().find(|c| c.qid == qid).map(|c| c.score)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    /// One entry per mention of the task, in order.
    pub mentions: Vec<MentionLink>,
    /// Components actually used, for subspace methods that learned one.
    pub effective_k: Option<usize>,
}

impl LinkResult {
    /// Every mention resolved to its top-degree candidate.
    pub fn degree_fallback(task: &DocumentTask) -> Self {
        Self {
            mentions: task
                .mentions
                .iter()
                .map(|m| MentionLink::from_degree_order(&m.candidates, Some(Fallback::TopDegree)))
                .collect(),
            effective_k: None,
        }
    }
}

/// Orders candidates by score descending, then degree descending, then qid.
///
/// `scores` is aligned with `candidates`. Negative infinity marks a
/// candidate that could not be scored.
pub fn rank_by_scores(candidates: &CandidateList, scores: &[f64]) -> Vec<ScoredCandidate> {
    debug_assert_eq!(candidates.len(), scores.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates.candidates[a], &candidates.candidates[b]);
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| cb.degree.cmp(&ca.degree))
            .then_with(|| ca.qid.cmp(&cb.qid))
    });
    order
        .into_iter()
        .map(|i| ScoredCandidate {
            qid: candidates.candidates[i].qid.clone(),
            score: scores[i],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Eigen,
    Avg,
    Degree,
    NameMatch,
    Local,
    Global,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Eigen,
        Method::Avg,
        Method::Degree,
        Method::NameMatch,
        Method::Local,
        Method::Global,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Eigen => "eigen",
            Method::Avg => "avg",
            Method::Degree => "degree",
            Method::NameMatch => "namematch",
            Method::Local => "local",
            Method::Global => "global",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Method::Eigen),
            "avg" => Ok(Method::Avg),
            "degree" => Ok(Method::Degree),
            "namematch" => Ok(Method::NameMatch),
            "local" => Ok(Method::Local),
            "global" => Ok(Method::Global),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Method and hyperparameters for one linking run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSettings {
    pub method: Method,
    pub k: usize,
    pub weighting: WeightScheme,
    pub window: usize,
    pub scaling: Scaling,
    /// NameMatch also compares against aliases.
    pub name_match_aliases: bool,
}

impl LinkSettings {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if matches!(self.method, Method::Local) && self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for LinkSettings {
    fn default() -> Self {
        Self {
            method: Method::Eigen,
            k: DEFAULT_COMPONENTS,
            weighting: WeightScheme::default(),
            window: DEFAULT_WINDOW,
            scaling: Scaling::Strength,
            name_match_aliases: false,
        }
    }
}

/// Read-only inputs shared by all documents.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub catalog: &'a EntityCatalog,
    pub entities: Option<&'a EmbeddingStore>,
    pub text: Option<TextResources<'a>>,
    pub names: Option<&'a NameIndex>,
}

impl<'a> Resources<'a> {
    pub fn new(catalog: &'a EntityCatalog) -> Self {
        Self {
            catalog,
            entities: None,
            text: None,
            names: None,
        }
    }

    /// Checks that everything `settings` needs is present.
    pub fn check(&self, settings: &LinkSettings) -> Result<()> {
        settings.validate()?;
        let needs_entities = matches!(settings.method, Method::Eigen | Method::Avg);
        if needs_entities && self.entities.is_none() {
            return Err(Error::Config(format!("method {} needs entity embeddings", settings.method)));
        }
        let needs_text = matches!(settings.method, Method::Local | Method::Global)
            || (needs_entities && settings.weighting.kind().needs_text());
        if needs_text && self.text.is_none() {
            return Err(Error::Config(format!(
                "method {} with weighting {} needs word embeddings and descriptions",
                settings.method,
                settings.weighting.kind()
            )));
        }
        if settings.method == Method::NameMatch && self.names.is_none() {
            return Err(Error::Config("namematch needs a name index".into()));
        }
        Ok(())
    }
}

/// Links one document with the configured method.
pub fn link_task(task: &DocumentTask, res: &Resources<'_>, settings: &LinkSettings) -> Result<LinkResult> {
    res.check(settings)?;
    let weighting = WeightingContext {
        scheme: settings.weighting,
        text: res.text,
        window: settings.window,
    };
    match settings.method {
        Method::Eigen => {
            let store = res.entities.expect("checked");
            eigenthemes::link_document(task, store, &weighting, settings.k, settings.scaling)
        }
        Method::Avg => baselines::avg_document(task, res.entities.expect("checked"), &weighting),
        Method::Degree => Ok(LinkResult {
            mentions: task
                .mentions
                .iter()
                .map(|m| baselines::degree_baseline(&m.candidates))
                .collect(),
            effective_k: None,
        }),
        Method::NameMatch => {
            let names = res.names.expect("checked");
            Ok(LinkResult {
                mentions: task
                    .mentions
                    .iter()
                    .map(|m| baselines::name_match(&m.surface, res.catalog, names))
                    .collect(),
                effective_k: None,
            })
        }
        Method::Local | Method::Global => {
            let text = res.text.expect("checked");
            let mode = if settings.method == Method::Local {
                ContextMode::Local { window: settings.window }
            } else {
                ContextMode::Global
            };
            Ok(LinkResult {
                mentions: (0..task.mentions.len())
                    .map(|i| baselines::context_baseline(task, i, &text, mode))
                    .collect(),
                effective_k: None,
            })
        }
    }
}

/// Links every document, in parallel when `jobs > 1`. Output order follows
/// `tasks` and does not depend on `jobs`.
pub fn link_corpus(
    tasks: &[DocumentTask],
    res: &Resources<'_>,
    settings: &LinkSettings,
    jobs: usize,
) -> Result<Vec<LinkResult>> {
    res.check(settings)?;
    if jobs <= 1 {
        return tasks.iter().map(|t| link_task(t, res, settings)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| tasks.par_iter().map(|t| link_task(t, res, settings)).collect())
}
