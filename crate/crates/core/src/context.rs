//! Text signals: entity description vectors and mention context vectors,
//! both averages of word embeddings.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::DocumentTask;
use crate::embeddings::{mean, EmbeddingStore};
use crate::error::{Error, Result};
use crate::index::tokenize;

/// Default half-width of the local context window, in tokens.
pub const DEFAULT_WINDOW: usize = 5;

/// English function words dropped when approximating "all nouns of a document".
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "said", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
    "yourself", "yourselves",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptionRecord {
    pub qid: String,
    pub description: String,
}

/// Entity description vectors. Entities whose description has no word with
/// an embedding are absent.
#[derive(Debug, Clone, Default)]
pub struct DescriptionStore {
    vectors: HashMap<String, Vec<f64>>,
}

impl DescriptionStore {
    pub fn from_records<'a>(
        records: impl IntoIterator<Item = &'a DescriptionRecord>,
        words: &EmbeddingStore,
    ) -> Self {
        let vectors = records
            .into_iter()
            .filter_map(|r| {
                let toks = tokenize(&r.description);
                mean(toks.iter().filter_map(|t| word_vector(words, t)), words.dim())
                    .map(|v| (r.qid.clone(), v))
            })
            .collect();
        Self { vectors }
    }

    pub fn get(&self, qid: &str) -> Option<&[f64]> {
        self.vectors.get(qid).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn load_descriptions(path: impl AsRef<Path>) -> Result<Vec<DescriptionRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_descriptions(records: &[DescriptionRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("description serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Word vector for a token, trying the token verbatim and then lowercased.
pub fn word_vector<'a>(words: &'a EmbeddingStore, token: &str) -> Option<&'a [f64]> {
    words.get(token).or_else(|| words.get(&token.to_lowercase()))
}

/// Token span of mention `idx`: the annotated span, else the first
/// occurrence of the mention's tokens in the document.
pub fn mention_span(task: &DocumentTask, idx: usize) -> Option<(usize, usize)> {
    let m = &task.mentions[idx];
    if m.span.is_some() {
        return m.span;
    }
    let needle = tokenize(&m.surface);
    if needle.is_empty() || needle.len() > task.tokens.len() {
        return None;
    }
    let hay: Vec<String> = task.tokens.iter().map(|t| t.to_lowercase()).collect();
    (0..=hay.len() - needle.len())
        .find(|&s| hay[s..s + needle.len()] == needle[..])
        .map(|s| (s, s + needle.len()))
}

/// Mean word vector of up to `window` tokens on each side of the mention.
pub fn local_context(
    task: &DocumentTask,
    idx: usize,
    window: usize,
    words: &EmbeddingStore,
) -> Option<Vec<f64>> {
    let (start, end) = mention_span(task, idx)?;
    let left = start.saturating_sub(window)..start;
    let right = end..(end + window).min(task.tokens.len());
    let tokens = task.tokens[left].iter().chain(&task.tokens[right]);
    mean(tokens.filter_map(|t| word_vector(words, t)), words.dim())
}

/// Mean word vector over the document's nouns.
///
/// Uses the document's explicit noun list when present, otherwise every
/// token that contains a letter and is not a stopword.
pub fn global_context(task: &DocumentTask, words: &EmbeddingStore) -> Option<Vec<f64>> {
    match &task.nouns {
        Some(nouns) => mean(nouns.iter().filter_map(|t| word_vector(words, t)), words.dim()),
        None => {
            let stop: HashSet<&str> = STOPWORDS.iter().copied().collect();
            let nouns = task.tokens.iter().filter(|t| {
                t.chars().any(char::is_alphabetic) && !stop.contains(t.to_lowercase().as_str())
            });
            mean(nouns.filter_map(|t| word_vector(words, t)), words.dim())
        }
    }
}
