//! Token inverted index over entity names and aliases, and degree-sorted
//! candidate generation on top of it.
//!
//! A mention's candidates are the entities having *one* surface form (the
//! canonical name or a single alias) whose tokens include every token of the
//! mention. Posting-list intersection produces a superset of that set; each
//! survivor is then checked against its individual surface forms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{EntityCatalog, EntityId, EntityRecord};
use crate::error::{Error, Result};

/// Default maximum number of candidates per mention.
pub const DEFAULT_MAX_CANDIDATES: usize = 20;

pub const INDEX_FORMAT: &str = "eigenthemes-index";
pub const INDEX_FORMAT_VERSION: u32 = 1;

/// Lowercases and splits on every non-alphanumeric codepoint.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// `true` if every token of `mention_tokens` occurs in the tokens of the name
/// or in the tokens of a single alias of `record`.
pub fn surface_form_covers(record: &EntityRecord, mention_tokens: &[String]) -> bool {
    if mention_tokens.is_empty() {
        return false;
    }
    std::iter::once(&record.name)
        .chain(record.aliases.iter())
        .any(|form| {
            let form_tokens = tokenize(form);
            mention_tokens.iter().all(|t| form_tokens.contains(t))
        })
}

/// token -> entities whose name or some alias contains the token.
#[derive(Debug, Clone, Default)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<EntityId>>,
}

impl InvertedIndex {
    /// Indexes every token of every name and alias in `catalog`.
    pub fn build(catalog: &EntityCatalog) -> Self {
        let mut postings: BTreeMap<String, Vec<EntityId>> = BTreeMap::new();
        // Ids are visited in ascending order, so pushing keeps each list sorted;
        // only repeats of the same id need filtering.
        for (id, rec) in catalog.records().iter().enumerate() {
            let id = id as EntityId;
            for form in std::iter::once(&rec.name).chain(rec.aliases.iter()) {
                for token in tokenize(form) {
                    let list = postings.entry(token).or_default();
                    if list.last() != Some(&id) {
                        list.push(id);
                    }
                }
            }
        }
        Self { postings }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    /// Posting list for `token`, ascending by qid. Empty if the token is unknown.
    pub fn postings(&self, token: &str) -> &[EntityId] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    /// Entities present in the posting list of every token.
    pub fn intersect(&self, tokens: &[String]) -> Vec<EntityId> {
        if tokens.is_empty() {
            return Vec::new();
        }
        let mut lists: Vec<&[EntityId]> = tokens.iter().map(|t| self.postings(t)).collect();
        lists.sort_by_key(|l| l.len());
        let mut acc: Vec<EntityId> = lists[0].to_vec();
        for list in &lists[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, list);
        }
        acc
    }

    /// Writes a JSONL artifact: a header object, then one `{"t","p"}` line per
    /// token in lexicographic order with qids in ascending order.
    pub fn write(&self, catalog: &EntityCatalog, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let header = IndexHeader {
            format: INDEX_FORMAT.to_owned(),
            version: INDEX_FORMAT_VERSION,
            vocabulary_size: self.vocabulary_size(),
            entities: catalog.len(),
        };
        let write_err = |e| Error::io(path, e);
        writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(write_err)?;
        for (token, list) in &self.postings {
            let line = PostingLine {
                t: token.clone(),
                p: list.iter().map(|&id| catalog.record(id).qid.clone()).collect(),
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("posting serializes")).map_err(write_err)?;
        }
        out.flush().map_err(write_err)
    }

    /// Reads an artifact written by [`InvertedIndex::write`], resolving qids against `catalog`.
    pub fn read(catalog: &EntityCatalog, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let header: IndexHeader = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&line).map_err(|e| Error::parse(path, 1, e.to_string()))?
            }
            None => return Err(Error::Format(format!("{}: missing index header", path.display()))),
        };
        if header.format != INDEX_FORMAT || header.version != INDEX_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: unsupported index format {} v{}",
                path.display(),
                header.format,
                header.version
            )));
        }
        if header.entities != catalog.len() {
            return Err(Error::Integrity(format!(
                "index was built over {} entities but the catalog has {}",
                header.entities,
                catalog.len()
            )));
        }
        let mut postings = BTreeMap::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let pl: PostingLine =
                serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            let mut ids = Vec::with_capacity(pl.p.len());
            for qid in &pl.p {
                let id = catalog
                    .id_of(qid)
                    .ok_or_else(|| Error::Integrity(format!("index references unknown qid {qid}")))?;
                ids.push(id);
            }
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(path, i + 1, "posting list not strictly ascending"));
            }
            postings.insert(pl.t, ids);
        }
        if postings.len() != header.vocabulary_size {
            return Err(Error::Format(format!(
                "{}: header declares {} tokens, found {}",
                path.display(),
                header.vocabulary_size,
                postings.len()
            )));
        }
        Ok(Self { postings })
    }
}

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    format: String,
    version: u32,
    vocabulary_size: usize,
    entities: usize,
}

#[derive(Serialize, Deserialize)]
struct PostingLine {
    t: String,
    p: Vec<String>,
}

fn intersect_sorted(a: &[EntityId], b: &[EntityId]) -> Vec<EntityId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub qid: String,
    pub degree: u64,
}

/// Candidates for one mention, by degree descending then qid ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateList {
    pub mention_surface: String,
    pub candidates: Vec<Candidate>,
    /// More than the limit matched and the tail was dropped.
    pub truncated: bool,
}

impl CandidateList {
    /// Sorts `candidates` into canonical order and keeps at most `limit`.
    pub fn from_unsorted(mention_surface: &str, mut candidates: Vec<Candidate>, limit: usize) -> Self {
        sort_by_degree(&mut candidates);
        candidates.dedup_by(|a, b| a.qid == b.qid);
        let truncated = candidates.len() > limit;
        candidates.truncate(limit);
        Self {
            mention_surface: mention_surface.to_owned(),
            candidates,
            truncated,
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn position(&self, qid: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.qid == qid)
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.qid.as_str())
    }
}

/// Degree descending, then qid ascending.
pub fn sort_by_degree(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| b.degree.cmp(&a.degree).then_with(|| a.qid.cmp(&b.qid)));
}

/// Candidate generation for one mention. `limit` is the maximum list size T;
/// pass `usize::MAX` for no limit. Panics if `limit` is zero.
pub fn generate_candidates(
    index: &InvertedIndex,
    catalog: &EntityCatalog,
    mention: &str,
    limit: usize,
) -> CandidateList {
    assert!(limit >= 1, "candidate limit must be positive");
    let tokens = tokenize(mention);
    let candidates = index
        .intersect(&tokens)
        .into_iter()
        .map(|id| catalog.record(id))
        .filter(|rec| surface_form_covers(rec, &tokens))
        .map(|rec| Candidate {
            qid: rec.qid.clone(),
            degree: rec.degree,
        })
        .collect();
    CandidateList::from_unsorted(mention, candidates, limit)
}

/// Fraction of `(mention, gold)` pairs whose gold entity survives candidate generation.
pub fn oracle_recall<S1, S2>(
    tasks: &[(S1, S2)],
    index: &InvertedIndex,
    catalog: &EntityCatalog,
    limit: usize,
) -> Result<f64>
where
    S1: AsRef<str>,
    S2: AsRef<str>,
{
    if tasks.is_empty() {
        return Err(Error::UndefinedInput("oracle recall of an empty task list".into()));
    }
    let hits = tasks
        .iter()
        .filter(|(m, g)| {
            generate_candidates(index, catalog, m.as_ref(), limit)
                .position(g.as_ref())
                .is_some()
        })
        .count();
    Ok(hits as f64 / tasks.len() as f64)
}
