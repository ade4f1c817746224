//! Collective disambiguation with a per-document embedding subspace.
//!
//! The candidates of all mentions in a document are pooled into one matrix of
//! unit-normalized embeddings (one row per distinct entity), rows are scaled
//! by their weights, and the leading right singular vectors of the result span
//! the document's subspace. Each candidate is scored by the norm of its
//! projection onto that subspace, with each coordinate scaled by the matching
//! singular value, and every mention takes its best-scoring candidate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::DocumentTask;
use crate::embeddings::{unit_normalize, EmbeddingStore};
use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, Matrix, Subspace};
use crate::link::{rank_by_scores, Fallback, LinkResult, MentionLink};
use crate::weighting::{mention_weights, TextResources, WeightScheme};

/// Default number of components.
pub const DEFAULT_COMPONENTS: usize = 10;

/// How projection coefficients are combined into a score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Scale each coefficient by its singular value.
    #[default]
    Strength,
    /// Plain projection norm.
    Unit,
}

/// Candidate space of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentMatrix {
    /// Distinct candidate qids with an embedding, in first-seen order.
    pub entity_ids: Vec<String>,
    /// Unit-normalized embeddings, row `i` for `entity_ids[i]`.
    pub matrix: Matrix,
    /// Largest weight the entity received from any mention.
    pub weights: Vec<f64>,
}

impl DocumentMatrix {
    pub fn len(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_ids.is_empty()
    }

    /// Copy with rows reordered so that new row `i` is old row `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let rows: Vec<&[f64]> = perm.iter().map(|&i| self.matrix.row(i)).collect();
        Self {
            entity_ids: perm.iter().map(|&i| self.entity_ids[i].clone()).collect(),
            matrix: Matrix::from_rows(&rows).expect("rows share a length"),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

/// Options shared by the document-matrix builders.
#[derive(Debug, Clone, Copy)]
pub struct WeightingContext<'a> {
    pub scheme: WeightScheme,
    pub text: Option<TextResources<'a>>,
    pub window: usize,
}

impl WeightingContext<'_> {
    pub fn unweighted() -> Self {
        Self {
            scheme: WeightScheme::none(),
            text: None,
            window: crate::context::DEFAULT_WINDOW,
        }
    }
}

/// Pools every mention's candidates into one deduplicated, weighted matrix.
///
/// Candidates without an embedding are skipped. Fails with
/// [`Error::EmptyDocument`] when nothing remains.
pub fn build_document_matrix(
    task: &DocumentTask,
    store: &EmbeddingStore,
    weighting: &WeightingContext<'_>,
) -> Result<DocumentMatrix> {
    let mut position: HashMap<&str, usize> = HashMap::new();
    let mut entity_ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();

    for (m, mention) in task.mentions.iter().enumerate() {
        if mention.candidates.is_empty() {
            continue;
        }
        let w = mention_weights(&weighting.scheme, task, m, weighting.text.as_ref(), weighting.window)?;
        for (cand, w) in mention.candidates.candidates.iter().zip(w) {
            if let Some(&i) = position.get(cand.qid.as_str()) {
                weights[i] = weights[i].max(w);
                continue;
            }
            let Some(v) = store.get(&cand.qid) else {
                continue;
            };
            position.insert(&cand.qid, entity_ids.len());
            entity_ids.push(cand.qid.clone());
            rows.push(unit_normalize(v));
            weights.push(w);
        }
    }
    if entity_ids.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(DocumentMatrix {
        entity_ids,
        matrix: Matrix::from_rows(&rows)?,
        weights,
    })
}

/// Subspace of the weighted document matrix with at most `k` components.
pub fn learn_subspace(dm: &DocumentMatrix, k: usize) -> Result<Subspace> {
    if dm.is_empty() {
        return Err(Error::EmptyDocument);
    }
    truncated_svd(&dm.matrix, &dm.weights, k)
}

/// `‖(eᵀV) ⊙ σ‖₂` for a unit (or zero) vector `e`.
pub fn score_candidate(subspace: &Subspace, e: &[f64]) -> Result<f64> {
    score_with(subspace, e, Scaling::Strength)
}

pub fn score_with(subspace: &Subspace, e: &[f64], scaling: Scaling) -> Result<f64> {
    let coeffs = subspace.project(e)?;
    let sum: f64 = match scaling {
        Scaling::Strength => coeffs
            .iter()
            .zip(subspace.strengths())
            .map(|(c, s)| (c * s) * (c * s))
            .sum(),
        Scaling::Unit => coeffs.iter().map(|c| c * c).sum(),
    };
    Ok(sum.sqrt())
}

/// Scores every mention's candidates against `subspace`. Candidates without
/// an embedding score negative infinity.
pub fn score_mentions(
    task: &DocumentTask,
    store: &EmbeddingStore,
    subspace: &Subspace,
    scaling: Scaling,
) -> Result<Vec<Vec<f64>>> {
    task.mentions
        .iter()
        .map(|m| {
            m.candidates
                .candidates
                .iter()
                .map(|c| match store.get(&c.qid) {
                    Some(v) => score_with(subspace, &unit_normalize(v), scaling),
                    None => Ok(f64::NEG_INFINITY),
                })
                .collect()
        })
        .collect()
}

/// Links every mention of `task` against one subspace learned for the whole document.
pub fn link_document(
    task: &DocumentTask,
    store: &EmbeddingStore,
    weighting: &WeightingContext<'_>,
    k: usize,
    scaling: Scaling,
) -> Result<LinkResult> {
    if k == 0 {
        return Err(Error::Config("number of components must be positive".into()));
    }
    let dm = match build_document_matrix(task, store, weighting) {
        Ok(dm) => dm,
        Err(Error::EmptyDocument) => return Ok(LinkResult::degree_fallback(task)),
        Err(e) => return Err(e),
    };
    let subspace = learn_subspace(&dm, k)?;
    let scores = score_mentions(task, store, &subspace, scaling)?;
    let mentions = task
        .mentions
        .iter()
        .zip(scores)
        .map(|(m, s)| {
            if m.candidates.is_empty() {
                MentionLink::unresolved()
            } else if s.iter().all(|x| x.is_infinite()) {
                MentionLink::from_degree_order(&m.candidates, Some(Fallback::TopDegree))
            } else {
                MentionLink::ranked(rank_by_scores(&m.candidates, &s), None)
            }
        })
        .collect();
    Ok(LinkResult {
        mentions,
        effective_k: Some(subspace.rank()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MentionTask;
    use crate::index::{Candidate, CandidateList};
    use crate::weighting::WeightKind;

    fn mention(surface: &str, cands: &[(&str, u64)]) -> MentionTask {
        let c = cands
            .iter()
            .map(|(q, d)| Candidate { qid: q.to_string(), degree: *d })
            .collect();
        MentionTask {
            surface: surface.into(),
            gold: None,
            span: None,
            candidates: CandidateList::from_unsorted(surface, c, usize::MAX),
        }
    }

    fn doc(mentions: Vec<MentionTask>) -> DocumentTask {
        DocumentTask {
            doc_id: "d".into(),
            mentions,
            tokens: vec![],
            nouns: None,
        }
    }

    #[test]
    fn shared_candidate_appears_once() {
        let mut store = EmbeddingStore::new(2).unwrap();
        for (q, v) in [("q1", [1.0, 0.0]), ("q5", [0.0, 2.0]), ("q7", [1.0, 1.0])] {
            store.insert(q, &v).unwrap();
        }
        let d = doc(vec![
            mention("a", &[("q1", 3), ("q5", 2)]),
            mention("b", &[("q5", 2), ("q7", 1)]),
        ]);
        let dm = build_document_matrix(&d, &store, &WeightingContext::unweighted()).unwrap();
        assert_eq!(dm.entity_ids, vec!["q1", "q5", "q7"]);
        assert_eq!(dm.weights, vec![1.0; 3]);
        assert_eq!(dm.matrix.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn duplicate_entity_takes_its_best_weight() {
        let mut store = EmbeddingStore::new(2).unwrap();
        for q in ["x", "y", "z"] {
            store.insert(q, &[1.0, 0.0]).unwrap();
        }
        // y is rank 2 for the first mention and rank 1 for the second.
        let d = doc(vec![
            mention("a", &[("x", 9), ("y", 5), ("z", 1)]),
            mention("b", &[("y", 5), ("z", 1)]),
        ]);
        let ctx = WeightingContext {
            scheme: WeightScheme::new(WeightKind::DegreeRr, 1.0).unwrap(),
            ..WeightingContext::unweighted()
        };
        let dm = build_document_matrix(&d, &store, &ctx).unwrap();
        assert_eq!(dm.entity_ids, vec!["x", "y", "z"]);
        assert_eq!(dm.weights, vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn union_size_on_overlapping_fixture() {
        // 3 mentions x 20 candidates; the second shares 7 with the first.
        let mut store = EmbeddingStore::new(1).unwrap();
        let mut mentions = Vec::new();
        let mut all = std::collections::BTreeSet::new();
        for m in 0..3 {
            let ids: Vec<String> = (0..20)
                .map(|i| if m == 1 && i < 7 { format!("m0c{i}") } else { format!("m{m}c{i}") })
                .collect();
            for q in &ids {
                all.insert(q.clone());
            }
            let pairs: Vec<(&str, u64)> = ids.iter().map(|q| (q.as_str(), 1)).collect();
            mentions.push(mention("s", &pairs));
        }
        for q in &all {
            store.insert(q.clone(), &[1.0]).unwrap();
        }
        let dm = build_document_matrix(&doc(mentions), &store, &WeightingContext::unweighted()).unwrap();
        assert_eq!(all.len(), 53);
        assert_eq!(dm.len(), 53);
    }

    #[test]
    fn missing_embeddings_are_skipped_and_empty_is_an_error() {
        let store = EmbeddingStore::new(2).unwrap();
        let d = doc(vec![mention("a", &[("nope", 1)])]);
        assert!(matches!(
            build_document_matrix(&d, &store, &WeightingContext::unweighted()),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn identical_rows_give_rank_one_subspace() {
        let u = [0.0, 0.6, 0.8];
        let dm = DocumentMatrix {
            entity_ids: (0..6).map(|i| format!("e{i}")).collect(),
            matrix: Matrix::from_rows(&[u; 6]).unwrap(),
            weights: vec![1.0; 6],
        };
        let s = learn_subspace(&dm, 10).unwrap();
        assert_eq!(s.rank(), 1);
        let b = s.basis().column(0);
        let sign = b[2].signum();
        for (x, y) in b.iter().zip(&u) {
            assert!((sign * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weights_annihilate_rows() {
        let dm = DocumentMatrix {
            entity_ids: vec!["a".into(), "b".into(), "c".into()],
            matrix: Matrix::from_rows(&[[0.6, 0.8, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap(),
            weights: vec![1.0, 0.0, 0.0],
        };
        let s = learn_subspace(&dm, 3).unwrap();
        assert_eq!(s.rank(), 1);
        let b = s.basis().column(0);
        assert!((b[0].abs() - 0.6).abs() < 1e-12 && (b[1].abs() - 0.8).abs() < 1e-12);
    }

    fn two_axis_subspace() -> Subspace {
        let basis = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        Subspace::new(basis, vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn score_examples() {
        let s = two_axis_subspace();
        assert_eq!(score_candidate(&s, &[1.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(score_candidate(&s, &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        let got = score_candidate(&s, &[0.6, 0.8, 0.0]).unwrap();
        assert!((got - (1.44f64 + 0.64).sqrt()).abs() < 1e-15);
        assert_eq!(score_with(&s, &[0.6, 0.8, 0.0], Scaling::Unit).unwrap(), 1.0);
        assert!(matches!(score_candidate(&s, &[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn single_candidate_is_always_predicted() {
        let mut store = EmbeddingStore::new(2).unwrap();
        store.insert("only", &[0.3, -0.1]).unwrap();
        let d = doc(vec![mention("m", &[("only", 1)])]);
        let r = link_document(&d, &store, &WeightingContext::unweighted(), 10, Scaling::Strength).unwrap();
        assert_eq!(r.mentions[0].predicted.as_deref(), Some("only"));
        assert_eq!(r.effective_k, Some(1));
    }

    #[test]
    fn fallbacks_for_unscorable_mentions() {
        let mut store = EmbeddingStore::new(2).unwrap();
        store.insert("a", &[1.0, 0.0]).unwrap();
        let d = doc(vec![
            mention("m1", &[("a", 1)]),
            mention("m2", &[("ghost1", 3), ("ghost2", 8)]),
            mention("m3", &[]),
        ]);
        let r = link_document(&d, &store, &WeightingContext::unweighted(), 10, Scaling::Strength).unwrap();
        assert_eq!(r.mentions[1].predicted.as_deref(), Some("ghost2"));
        assert_eq!(r.mentions[1].fallback, Some(Fallback::TopDegree));
        assert_eq!(r.mentions[2].predicted, None);
        assert_eq!(r.mentions[2].fallback, Some(Fallback::NoCandidates));

        let none = EmbeddingStore::new(2).unwrap();
        let r = link_document(&d, &none, &WeightingContext::unweighted(), 10, Scaling::Strength).unwrap();
        assert_eq!(r.mentions[0].predicted.as_deref(), Some("a"));
        assert_eq!(r.effective_k, None);
    }

    #[test]
    fn missing_candidate_never_beats_an_embedded_one() {
        let mut store = EmbeddingStore::new(2).unwrap();
        store.insert("weak", &[0.0, 1.0]).unwrap();
        store.insert("strong", &[1.0, 0.0]).unwrap();
        store.insert("other", &[1.0, 0.1]).unwrap();
        let d = doc(vec![
            mention("m1", &[("ghost", 100), ("weak", 1)]),
            mention("m2", &[("strong", 1), ("other", 1)]),
        ]);
        let r = link_document(&d, &store, &WeightingContext::unweighted(), 1, Scaling::Strength).unwrap();
        assert_eq!(r.mentions[0].predicted.as_deref(), Some("weak"));
        assert_eq!(r.mentions[0].ranking[1].qid, "ghost");
        assert_eq!(r.mentions[0].ranking[1].score, f64::NEG_INFINITY);
    }

    #[test]
    fn zero_components_rejected() {
        let store = EmbeddingStore::new(2).unwrap();
        let d = doc(vec![mention("m", &[("a", 1)])]);
        assert!(matches!(
            link_document(&d, &store, &WeightingContext::unweighted(), 0, Scaling::Strength),
            Err(Error::Config(_))
        ));
    }
}
