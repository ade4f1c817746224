//! Annotated documents and their resolution into linking tasks.
//!
//! Dataset files are JSONL, one document per line:
//!
//! ```text
//! {"doc_id": "d1",
//!  "tokens": ["Jordan", "published", "a", "paper", ...],
//!  "nouns": ["paper", ...],
//!  "mentions": [{"surface": "Michael Jordan", "gold": "Q3308285", "start": 0, "end": 1,
//!                "candidates": ["Q3308285", "Q41421"]}]}
//! ```
//!
//! Only `doc_id` and `mentions[].surface` are required. `start`/`end` are
//! token offsets (end exclusive) used for local context. `candidates`, when
//! present, replaces index lookup for that mention, which is how externally
//! generated candidate sets are plugged in. `nouns` overrides the built-in
//! noun approximation used by the global context.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::EntityCatalog;
use crate::error::{Error, Result};
use crate::index::{generate_candidates, Candidate, CandidateList, InvertedIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nouns: Option<Vec<String>>,
    pub mentions: Vec<MentionRecord>,
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DocumentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DocumentRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        for (j, m) in doc.mentions.iter().enumerate() {
            if let (Some(s), Some(e)) = (m.start, m.end) {
                if s > e || e > doc.tokens.len() {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("mention {j} span {s}..{e} outside {} tokens", doc.tokens.len()),
                    ));
                }
            }
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_dataset(docs: &[DocumentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for d in docs {
        let line = serde_json::to_string(d).expect("document serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// One mention with its resolved candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionTask {
    pub surface: String,
    pub gold: Option<String>,
    /// Token span `[start, end)` within the document, when known.
    pub span: Option<(usize, usize)>,
    pub candidates: CandidateList,
}

/// A document ready for linking.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentTask {
    pub doc_id: String,
    pub mentions: Vec<MentionTask>,
    pub tokens: Vec<String>,
    pub nouns: Option<Vec<String>>,
}

impl DocumentTask {
    /// Copy keeping only the mentions for which `keep(index)` holds.
    pub fn retain_mentions(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            doc_id: self.doc_id.clone(),
            mentions: self
                .mentions
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, m)| m.clone())
                .collect(),
            tokens: self.tokens.clone(),
            nouns: self.nouns.clone(),
        }
    }
}

/// Attaches candidate lists of at most `limit` entries to every mention.
///
/// Explicit `candidates` in the record are used as given (unknown qids are
/// kept with degree 0); otherwise the index is queried.
pub fn resolve(
    doc: &DocumentRecord,
    index: &InvertedIndex,
    catalog: &EntityCatalog,
    limit: usize,
) -> DocumentTask {
    let mentions = doc
        .mentions
        .iter()
        .map(|m| {
            let candidates = match &m.candidates {
                Some(qids) => {
                    let cands = qids
                        .iter()
                        .map(|q| Candidate {
                            qid: q.clone(),
                            degree: catalog.degree(q).unwrap_or(0),
                        })
                        .collect();
                    CandidateList::from_unsorted(&m.surface, cands, limit)
                }
                None => generate_candidates(index, catalog, &m.surface, limit),
            };
            MentionTask {
                surface: m.surface.clone(),
                gold: m.gold.clone(),
                span: m.start.zip(m.end),
                candidates,
            }
        })
        .collect();
    DocumentTask {
        doc_id: doc.doc_id.clone(),
        mentions,
        tokens: doc.tokens.clone(),
        nouns: doc.nouns.clone(),
    }
}

pub fn resolve_all(
    docs: &[DocumentRecord],
    index: &InvertedIndex,
    catalog: &EntityCatalog,
    limit: usize,
) -> Vec<DocumentTask> {
    docs.iter().map(|d| resolve(d, index, catalog, limit)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::EntityRecord;

    #[test]
    fn explicit_candidates_bypass_the_index() {
        let cat = EntityCatalog::from_records(vec![
            EntityRecord { qid: "a".into(), name: "Alpha".into(), aliases: vec![], degree: 1 },
            EntityRecord { qid: "b".into(), name: "Beta".into(), aliases: vec![], degree: 5 },
        ])
        .unwrap();
        let idx = InvertedIndex::build(&cat);
        let doc: DocumentRecord = serde_json::from_str(
            r#"{"doc_id":"d","mentions":[{"surface":"Alpha"},{"surface":"x","candidates":["a","b","zz"]}]}"#,
        )
        .unwrap();
        let task = resolve(&doc, &idx, &cat, 20);
        assert_eq!(task.mentions[0].candidates.qids().collect::<Vec<_>>(), vec!["a"]);
        assert_eq!(task.mentions[1].candidates.qids().collect::<Vec<_>>(), vec!["b", "a", "zz"]);
        let limited = resolve(&doc, &idx, &cat, 1);
        assert!(limited.mentions[1].candidates.truncated);
    }

    #[test]
    fn span_outside_tokens_is_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"doc_id":"d","tokens":["a"],"mentions":[{{"surface":"a","start":0,"end":2}}]}}"#).unwrap();
        assert!(matches!(load_dataset(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn dataset_round_trip() {
        let docs = vec![DocumentRecord {
            doc_id: "d1".into(),
            tokens: vec!["a".into(), "b".into()],
            nouns: None,
            mentions: vec![MentionRecord {
                surface: "a".into(),
                gold: Some("q".into()),
                start: Some(0),
                end: Some(1),
                candidates: None,
            }],
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&docs, f.path()).unwrap();
        assert_eq!(load_dataset(f.path()).unwrap(), docs);
    }
}
