//! Non-subspace linkers: exact name match, degree prior, document centroid
//! (Avg), and local/global textual context.

use std::collections::HashMap;

use crate::catalog::EntityCatalog;
use crate::dataset::DocumentTask;
use crate::eigenthemes::{build_document_matrix, DocumentMatrix, WeightingContext};
use crate::embeddings::{cosine, norm, unit_normalize, EmbeddingStore, ZERO_NORM};
use crate::error::{Error, Result};
use crate::index::{sort_by_degree, Candidate, CandidateList};
use crate::link::{rank_by_scores, Fallback, LinkResult, MentionLink};
use crate::weighting::{context_scores, context_vector, ContextMode, TextResources};

/// Lowercase with internal whitespace collapsed to single spaces.
pub fn normalize_name(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalized surface form -> entities carrying it.
#[derive(Debug, Clone, Default)]
pub struct NameIndex {
    by_name: HashMap<String, Vec<String>>,
    includes_aliases: bool,
}

impl NameIndex {
    pub fn build(catalog: &EntityCatalog, include_aliases: bool) -> Self {
        let mut by_name: HashMap<String, Vec<String>> = HashMap::new();
        for rec in catalog.records() {
            let forms = std::iter::once(&rec.name).chain(rec.aliases.iter().filter(|_| include_aliases));
            for form in forms {
                let list = by_name.entry(normalize_name(form)).or_default();
                if list.last() != Some(&rec.qid) {
                    list.push(rec.qid.clone());
                }
            }
        }
        Self {
            by_name,
            includes_aliases: include_aliases,
        }
    }

    pub fn includes_aliases(&self) -> bool {
        self.includes_aliases
    }

    pub fn matches(&self, mention: &str) -> &[String] {
        self.by_name
            .get(&normalize_name(mention))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Entities whose name equals the mention, highest degree first.
pub fn name_match(mention: &str, catalog: &EntityCatalog, names: &NameIndex) -> MentionLink {
    let mut found: Vec<Candidate> = names
        .matches(mention)
        .iter()
        .map(|q| Candidate {
            qid: q.clone(),
            degree: catalog.degree(q).unwrap_or(0),
        })
        .collect();
    if found.is_empty() {
        return MentionLink {
            predicted: None,
            ranking: Vec::new(),
            fallback: None,
        };
    }
    sort_by_degree(&mut found);
    let list = CandidateList {
        mention_surface: mention.to_owned(),
        candidates: found,
        truncated: false,
    };
    MentionLink::from_degree_order(&list, None)
}

/// Generator order as the ranking; the first candidate is the prediction.
pub fn degree_baseline(candidates: &CandidateList) -> MentionLink {
    MentionLink::from_degree_order(candidates, None)
}

/// Weighted mean of the document matrix rows; `None` if it vanishes.
pub fn weighted_centroid(dm: &DocumentMatrix) -> Option<Vec<f64>> {
    let d = dm.matrix.cols();
    let total: f64 = dm.weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut c = vec![0.0; d];
    for (i, w) in dm.weights.iter().enumerate() {
        for (acc, x) in c.iter_mut().zip(dm.matrix.row(i)) {
            *acc += w * x;
        }
    }
    c.iter_mut().for_each(|x| *x /= total);
    (norm(&c) > ZERO_NORM).then_some(c)
}

/// Scores each candidate by cosine with the document centroid.
///
/// A vanishing centroid scores everything zero and keeps degree order.
pub fn avg_baseline(dm: &DocumentMatrix, candidates: &CandidateList, store: &EmbeddingStore) -> MentionLink {
    if candidates.is_empty() {
        return MentionLink::unresolved();
    }
    let Some(centroid) = weighted_centroid(dm) else {
        let zeros = vec![0.0; candidates.len()];
        return MentionLink::ranked(rank_by_scores(candidates, &zeros), Some(Fallback::TopDegree));
    };
    let scores: Vec<f64> = candidates
        .candidates
        .iter()
        .map(|c| match store.get(&c.qid) {
            Some(v) => cosine(&unit_normalize(v), &centroid).unwrap_or(0.0),
            None => f64::NEG_INFINITY,
        })
        .collect();
    if scores.iter().all(|s| s.is_infinite()) {
        return MentionLink::from_degree_order(candidates, Some(Fallback::TopDegree));
    }
    MentionLink::ranked(rank_by_scores(candidates, &scores), None)
}

/// Avg over a whole document.
pub fn avg_document(
    task: &DocumentTask,
    store: &EmbeddingStore,
    weighting: &WeightingContext<'_>,
) -> Result<LinkResult> {
    let dm = match build_document_matrix(task, store, weighting) {
        Ok(dm) => dm,
        Err(Error::EmptyDocument) => return Ok(LinkResult::degree_fallback(task)),
        Err(e) => return Err(e),
    };
    Ok(LinkResult {
        mentions: task
            .mentions
            .iter()
            .map(|m| avg_baseline(&dm, &m.candidates, store))
            .collect(),
        effective_k: None,
    })
}

/// Ranks candidates by cosine between their description and the mention's context.
pub fn context_baseline(
    task: &DocumentTask,
    mention: usize,
    text: &TextResources<'_>,
    mode: ContextMode,
) -> MentionLink {
    let candidates = &task.mentions[mention].candidates;
    if candidates.is_empty() {
        return MentionLink::unresolved();
    }
    let ctx = context_vector(task, mention, mode, text.words);
    let scores = context_scores(candidates, ctx.as_deref(), text.descriptions);
    if scores.iter().all(Option::is_none) {
        return MentionLink::from_degree_order(candidates, Some(Fallback::TopDegree));
    }
    let scores: Vec<f64> = scores.into_iter().map(|s| s.unwrap_or(f64::NEG_INFINITY)).collect();
    MentionLink::ranked(rank_by_scores(candidates, &scores), None)
}

/// Local-context baseline with a `window`-token half width.
pub fn local_ctxt(task: &DocumentTask, mention: usize, window: usize, text: &TextResources<'_>) -> MentionLink {
    context_baseline(task, mention, text, ContextMode::Local { window })
}

/// Global-context baseline over the document's nouns.
pub fn global_ctxt(task: &DocumentTask, mention: usize, text: &TextResources<'_>) -> MentionLink {
    context_baseline(task, mention, text, ContextMode::Global)
}
