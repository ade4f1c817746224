//! Per-candidate weights derived from rank positions, `rank^(-δ)`.
//!
//! Each mention ranks its own candidates; the ranking comes from KG degree
//! (the candidate generator's order) or from textual coherence between
//! candidate descriptions and the mention's local or global context.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::{global_context, local_context, DescriptionStore};
use crate::dataset::DocumentTask;
use crate::embeddings::{cosine, EmbeddingStore};
use crate::error::{Error, Result};
use crate::index::CandidateList;

pub const DEFAULT_DELTA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    None,
    DegreeRr,
    LocalCtxtRr,
    GlobalCtxtRr,
}

impl WeightKind {
    pub fn needs_text(self) -> bool {
        matches!(self, WeightKind::LocalCtxtRr | WeightKind::GlobalCtxtRr)
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::None => "none",
            WeightKind::DegreeRr => "degree_rr",
            WeightKind::LocalCtxtRr => "local_ctxt_rr",
            WeightKind::GlobalCtxtRr => "global_ctxt_rr",
        })
    }
}

impl FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(WeightKind::None),
            "degree_rr" | "degree" => Ok(WeightKind::DegreeRr),
            "local_ctxt_rr" | "local" => Ok(WeightKind::LocalCtxtRr),
            "global_ctxt_rr" | "global" => Ok(WeightKind::GlobalCtxtRr),
            other => Err(Error::Config(format!("unknown weighting scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    kind: WeightKind,
    delta: f64,
}

impl WeightScheme {
    /// `delta` must be finite and strictly positive (it is ignored for `None`).
    pub fn new(kind: WeightKind, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { kind, delta })
    }

    pub fn none() -> Self {
        Self {
            kind: WeightKind::None,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn degree() -> Self {
        Self {
            kind: WeightKind::DegreeRr,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for WeightScheme {
    fn default() -> Self {
        Self::degree()
    }
}

/// `rank^(-delta)` for a 1-based rank.
pub fn reciprocal_rank_weight(rank: usize, delta: f64) -> Result<f64> {
    if rank < 1 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    Ok((rank as f64).powf(-delta))
}

/// 1-based ranks in list order (the generator's degree order).
pub fn degree_ranking(candidates: &CandidateList) -> Vec<usize> {
    (1..=candidates.len()).collect()
}

/// 1-based ranks by descending score. Candidates without a score go last;
/// ties and unscored candidates keep their list (degree) order.
pub fn ranks_from_scores(scores: &[Option<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match (scores[a], scores[b]) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut ranks = vec![0; scores.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Word-embedding resources for the text-based rankings and baselines.
#[derive(Debug, Clone, Copy)]
pub struct TextResources<'a> {
    pub words: &'a EmbeddingStore,
    pub descriptions: &'a DescriptionStore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    Local { window: usize },
    Global,
}

/// Cosine between each candidate's description vector and `context`;
/// `None` where either is missing.
pub fn context_scores(
    candidates: &CandidateList,
    context: Option<&[f64]>,
    descriptions: &DescriptionStore,
) -> Vec<Option<f64>> {
    candidates
        .candidates
        .iter()
        .map(|c| {
            let ctx = context?;
            let desc = descriptions.get(&c.qid)?;
            cosine(desc, ctx)
        })
        .collect()
}

pub fn context_vector(
    task: &DocumentTask,
    mention: usize,
    mode: ContextMode,
    words: &EmbeddingStore,
) -> Option<Vec<f64>> {
    match mode {
        ContextMode::Local { window } => local_context(task, mention, window, words),
        ContextMode::Global => global_context(task, words),
    }
}

/// Ranks of mention `mention`'s candidates by textual coherence with its context.
pub fn context_ranking(
    task: &DocumentTask,
    mention: usize,
    text: &TextResources<'_>,
    mode: ContextMode,
) -> Vec<usize> {
    let ctx = context_vector(task, mention, mode, text.words);
    let scores = context_scores(&task.mentions[mention].candidates, ctx.as_deref(), text.descriptions);
    ranks_from_scores(&scores)
}

/// Weights of one mention's candidates, aligned with its candidate list.
pub fn mention_weights(
    scheme: &WeightScheme,
    task: &DocumentTask,
    mention: usize,
    text: Option<&TextResources<'_>>,
    window: usize,
) -> Result<Vec<f64>> {
    let candidates = &task.mentions[mention].candidates;
    let ranks = match scheme.kind {
        WeightKind::None => return Ok(vec![1.0; candidates.len()]),
        WeightKind::DegreeRr => degree_ranking(candidates),
        WeightKind::LocalCtxtRr | WeightKind::GlobalCtxtRr => {
            let text = text.ok_or_else(|| {
                Error::Config(format!("weighting {} needs word embeddings and descriptions", scheme.kind))
            })?;
            let mode = if scheme.kind == WeightKind::LocalCtxtRr {
                ContextMode::Local { window }
            } else {
                ContextMode::Global
            };
            context_ranking(task, mention, text, mode)
        }
    };
    ranks
        .into_iter()
        .map(|r| reciprocal_rank_weight(r, scheme.delta))
        .collect()
}
