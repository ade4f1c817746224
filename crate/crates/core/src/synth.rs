//! Seeded generator of synthetic corpora with a planted low-rank gold structure.
//!
//! Every document draws `topics` random `r`-dimensional subspaces of `R^d`.
//! Gold entity embeddings are unit-normalized points of the mention's topic
//! subspace plus isotropic Gaussian noise; distractors are spread over the
//! sphere, confined to the orthogonal complement, or drawn from a competing
//! planted cluster. Candidate lists are controlled through names: each
//! mention gets a unique surface word; its top-degree candidate is named by
//! that word alone and the others `"<Surface> <j>"`, so the inverted index
//! returns exactly the intended set.
//! Degrees are strictly decreasing along the intended list, so the gold
//! position (and with it the easy/hard bucket) is set by construction.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::catalog::{write_catalog, EntityCatalog, EntityRecord};
use crate::context::{write_descriptions, DescriptionRecord, DescriptionStore};
use crate::dataset::{resolve_all, write_dataset, DocumentRecord, DocumentTask, MentionRecord};
use crate::embeddings::{norm, EmbeddingStore};
use crate::error::{Error, Result};
use crate::eval::Bucket;
use crate::index::{InvertedIndex, DEFAULT_MAX_CANDIDATES};

pub const MANIFEST_FORMAT: &str = "eigenthemes-synth-manifest";
pub const MANIFEST_VERSION: u32 = 1;

pub const CATALOG_FILE: &str = "catalog.jsonl";
pub const ENTITY_EMBEDDINGS_FILE: &str = "entities.emb";
pub const WORD_EMBEDDINGS_FILE: &str = "words.emb";
pub const DESCRIPTIONS_FILE: &str = "descriptions.jsonl";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

const SYLLABLES: [&str; 20] = [
    "ba", "de", "fi", "go", "ku", "la", "me", "ni", "po", "ru", "sa", "te", "vi", "zo", "ka", "lu",
    "mo", "ne", "ri", "tu",
];
/// Surface words have this many syllables, vocabulary words one fewer, so
/// the two never collide.
const SURFACE_SYLLABLES: u32 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorMode {
    /// Uniform on the unit sphere.
    #[default]
    Isotropic,
    /// Uniform on the unit sphere of the complement of the document's gold subspaces.
    Orthogonal,
    /// One distractor per mention comes from a second planted subspace of the
    /// same rank; the rest are isotropic.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    /// Entity embedding dimension.
    pub d: usize,
    /// Rank of each planted gold subspace.
    pub r: usize,
    pub docs: usize,
    pub mentions_per_doc: usize,
    pub candidates_per_mention: usize,
    pub noise: f64,
    /// Probability that the gold entity is the top-degree candidate.
    pub easy_fraction: f64,
    /// Gold subspaces per document; mention `m` uses topic `m % topics`.
    pub topics: usize,
    /// Probability that the gold entity is left out of the candidate list.
    pub not_found_fraction: f64,
    pub distractors: DistractorMode,
    pub word_dim: usize,
    pub vocab: usize,
    /// Topic words per document, used in its text and gold descriptions.
    pub topic_words: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 17,
            d: 64,
            r: 3,
            docs: 50,
            mentions_per_doc: 8,
            candidates_per_mention: 10,
            noise: 0.3,
            easy_fraction: 0.4,
            topics: 1,
            not_found_fraction: 0.0,
            distractors: DistractorMode::Isotropic,
            word_dim: 16,
            vocab: 200,
            topic_words: 6,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.r == 0 || self.r >= self.d {
            return fail(format!("need 0 < r < d, got r={} d={}", self.r, self.d));
        }
        if self.topics == 0 {
            return fail("topics must be at least 1".into());
        }
        let planted = self.r * (self.topics + (self.distractors == DistractorMode::Adversarial) as usize);
        if self.distractors != DistractorMode::Isotropic && planted >= self.d {
            return fail(format!("{planted} planted dimensions leave no room in d={}", self.d));
        }
        if self.docs == 0 || self.mentions_per_doc == 0 || self.candidates_per_mention == 0 {
            return fail("docs, mentions_per_doc and candidates_per_mention must be positive".into());
        }
        let capacity = (SYLLABLES.len() as u64).pow(SURFACE_SYLLABLES);
        if 2 * (self.docs as u64) * (self.mentions_per_doc as u64) > capacity {
            return fail(format!("at most {} mentions can be named", capacity / 2));
        }
        if !(0.0..=1.0).contains(&self.easy_fraction) || !(0.0..=1.0).contains(&self.not_found_fraction) {
            return fail("easy_fraction and not_found_fraction must lie in [0, 1]".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return fail(format!("noise must be finite and non-negative, got {}", self.noise));
        }
        if self.word_dim == 0 || self.topic_words == 0 || self.vocab < self.topic_words {
            return fail("need word_dim > 0 and vocab >= topic_words > 0".into());
        }
        if self.vocab > SYLLABLES.len().pow(SURFACE_SYLLABLES - 1) {
            return fail("vocab too large".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMention {
    pub surface: String,
    pub gold: String,
    pub bucket: Bucket,
    /// 0-based position of the gold entity in the intended candidate list.
    pub gold_position: Option<usize>,
    pub topic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDocument {
    pub doc_id: String,
    /// Per topic, the `r` orthonormal basis vectors of the planted subspace.
    pub bases: Vec<Vec<Vec<f64>>>,
    pub mentions: Vec<ManifestMention>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub format_version: u32,
    pub config: SynthConfig,
    pub easy: usize,
    pub hard: usize,
    pub not_found: usize,
    pub documents: Vec<ManifestDocument>,
}

impl Manifest {
    /// Realized fraction of easy mentions.
    pub fn easy_fraction(&self) -> f64 {
        self.easy as f64 / (self.easy + self.hard + self.not_found) as f64
    }
}

/// A generated corpus, in memory.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub entities: Vec<EntityRecord>,
    pub entity_embeddings: EmbeddingStore,
    pub word_embeddings: EmbeddingStore,
    pub descriptions: Vec<DescriptionRecord>,
    pub documents: Vec<DocumentRecord>,
    pub manifest: Manifest,
}

impl SynthCorpus {
    pub fn catalog(&self) -> EntityCatalog {
        EntityCatalog::from_records(self.entities.clone()).expect("generated qids are unique")
    }

    pub fn description_store(&self) -> DescriptionStore {
        DescriptionStore::from_records(&self.descriptions, &self.word_embeddings)
    }

    /// Documents with candidates from the inverted index, truncated to `limit`.
    pub fn tasks(&self, catalog: &EntityCatalog, limit: usize) -> Vec<DocumentTask> {
        resolve_all(&self.documents, &InvertedIndex::build(catalog), catalog, limit)
    }

    /// Tasks with the default candidate limit.
    pub fn default_tasks(&self) -> (EntityCatalog, Vec<DocumentTask>) {
        let cat = self.catalog();
        let tasks = self.tasks(&cat, DEFAULT_MAX_CANDIDATES);
        (cat, tasks)
    }

    /// Writes every artifact into `dir`, creating it if needed.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_catalog(&self.catalog(), dir.join(CATALOG_FILE))?;
        self.entity_embeddings.write(dir.join(ENTITY_EMBEDDINGS_FILE))?;
        self.word_embeddings.write(dir.join(WORD_EMBEDDINGS_FILE))?;
        write_descriptions(&self.descriptions, dir.join(DESCRIPTIONS_FILE))?;
        write_dataset(&self.documents, dir.join(DATASET_FILE))?;
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

fn syllable_word(mut n: usize, syllables: u32) -> String {
    let base = SYLLABLES.len();
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(SYLLABLES[n % base]);
        n /= base;
    }
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Removes from `v` its components along the orthonormal vectors in `basis`.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// `r` orthonormal vectors, each also orthogonal to `against`.
fn random_basis(rng: &mut ChaCha8Rng, d: usize, r: usize, against: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    while basis.len() < r {
        let mut v = gaussian(rng, d);
        // Twice, for numerical orthogonality.
        for _ in 0..2 {
            project_out(&mut v, against);
            project_out(&mut v, &basis);
        }
        if norm(&v) > 1e-8 {
            basis.push(normalized(v));
        }
    }
    basis
}

/// Unit vector near the subspace spanned by `basis`.
fn planted_point(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], noise: f64) -> Vec<f64> {
    let d = basis[0].len();
    let z = normalized(gaussian(rng, basis.len()));
    let scale = noise / (d as f64).sqrt();
    let eps = gaussian(rng, d);
    let v = (0..d)
        .map(|i| basis.iter().zip(&z).map(|(b, zj)| b[i] * zj).sum::<f64>() + scale * eps[i])
        .collect();
    normalized(v)
}

fn isotropic(rng: &mut ChaCha8Rng, d: usize, against: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut v = gaussian(rng, d);
        project_out(&mut v, against);
        project_out(&mut v, against);
        if norm(&v) > 1e-8 {
            return normalized(v);
        }
    }
}

struct Builder {
    rng: ChaCha8Rng,
    next_qid: usize,
    entities: Vec<EntityRecord>,
    embeddings: EmbeddingStore,
    descriptions: Vec<DescriptionRecord>,
    vocab: Vec<String>,
}

impl Builder {
    fn entity(&mut self, name: String, degree: u64, vector: &[f64], description: String) -> Result<String> {
        self.next_qid += 1;
        let qid = format!("Q{}", self.next_qid);
        self.entities.push(EntityRecord {
            qid: qid.clone(),
            name,
            aliases: Vec::new(),
            degree,
        });
        self.embeddings.insert(qid.clone(), vector)?;
        self.descriptions.push(DescriptionRecord {
            qid: qid.clone(),
            description,
        });
        Ok(qid)
    }

    fn words_from(&mut self, pool: &[String], n: usize) -> Vec<String> {
        (0..n).map(|_| pool.choose(&mut self.rng).expect("non-empty pool").clone()).collect()
    }
}

/// Generates a corpus. Identical configs give identical corpora.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let vocab: Vec<String> = (0..cfg.vocab).map(|i| syllable_word(i, SURFACE_SYLLABLES - 1)).collect();
    let mut words = EmbeddingStore::new(cfg.word_dim)?;
    for w in &vocab {
        words.insert(w.clone(), &gaussian(&mut rng, cfg.word_dim))?;
    }

    let mut b = Builder {
        rng,
        next_qid: 0,
        entities: Vec::new(),
        embeddings: EmbeddingStore::new(cfg.d)?,
        descriptions: Vec::new(),
        vocab,
    };
    let c = cfg.candidates_per_mention;
    let mentions_total = cfg.docs * cfg.mentions_per_doc;
    let mut documents = Vec::with_capacity(cfg.docs);
    let mut manifest_docs = Vec::with_capacity(cfg.docs);
    let (mut easy, mut hard, mut not_found) = (0, 0, 0);

    for doc in 0..cfg.docs {
        let mut bases: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.topics);
        for _ in 0..cfg.topics {
            let basis = random_basis(&mut b.rng, cfg.d, cfg.r, &[]);
            bases.push(basis);
        }
        let mut planted: Vec<Vec<f64>> = Vec::new();
        // Orthonormalized union of the topics, so complement projections are exact.
        for v in bases.iter().flatten() {
            let mut v = v.clone();
            project_out(&mut v, &planted);
            project_out(&mut v, &planted);
            if norm(&v) > 1e-8 {
                planted.push(normalized(v));
            }
        }
        let adversary = match cfg.distractors {
            DistractorMode::Adversarial => Some(random_basis(&mut b.rng, cfg.d, cfg.r, &planted)),
            _ => None,
        };
        let complement: &[Vec<f64>] = match cfg.distractors {
            DistractorMode::Orthogonal => &planted,
            _ => &[],
        };
        let vocab = b.vocab.clone();
        let topic_pool = b.words_from(&vocab, cfg.topic_words);

        let mut tokens: Vec<String> = Vec::new();
        let mut mentions = Vec::with_capacity(cfg.mentions_per_doc);
        let mut manifest_mentions = Vec::with_capacity(cfg.mentions_per_doc);
        for m in 0..cfg.mentions_per_doc {
            let serial = doc * cfg.mentions_per_doc + m;
            let surface = capitalize(&syllable_word(serial, SURFACE_SYLLABLES));
            let topic = m % cfg.topics;
            let gold_vec = planted_point(&mut b.rng, &bases[topic], cfg.noise);

            let found = b.rng.random::<f64>() >= cfg.not_found_fraction;
            let is_easy = b.rng.random::<f64>() < cfg.easy_fraction;
            let gold_position = match (found, is_easy || c == 1) {
                (false, _) => None,
                (true, true) => Some(0),
                (true, false) => Some(b.rng.random_range(1..c)),
            };
            let adversary_slot = b.rng.random_range(0..c);

            // Intended list, best degree first. Gold (if found) takes its slot.
            let mut gold_qid = None;
            for pos in 0..c {
                let degree = (10 * (c - pos)) as u64 + b.rng.random_range(0..10);
                // The most connected entity owns the bare name.
                let name = match pos {
                    0 => surface.clone(),
                    _ => format!("{surface} {pos}"),
                };
                if gold_position == Some(pos) {
                    let desc = b.words_from(&topic_pool, 3).join(" ");
                    gold_qid = Some(b.entity(name, degree, &gold_vec, desc)?);
                    continue;
                }
                let v = match &adversary {
                    Some(adv) if pos == adversary_slot => planted_point(&mut b.rng, adv, cfg.noise),
                    _ => isotropic(&mut b.rng, cfg.d, complement),
                };
                let desc = b.words_from(&vocab, 3).join(" ");
                b.entity(name, degree, &v, desc)?;
            }
            let gold_qid = match gold_qid {
                Some(q) => q,
                None => {
                    // Named after a surface no mention uses, so retrieval misses it.
                    let other = capitalize(&syllable_word(mentions_total + serial, SURFACE_SYLLABLES));
                    let desc = b.words_from(&topic_pool, 3).join(" ");
                    let degree = b.rng.random_range(1..100);
                    b.entity(other, degree, &gold_vec, desc)?
                }
            };

            tokens.extend(b.words_from(&topic_pool, 2));
            let start = tokens.len();
            tokens.push(surface.clone());
            tokens.extend(b.words_from(&topic_pool, 2));
            tokens.push(".".into());

            let bucket = match gold_position {
                None => Bucket::NotFound,
                Some(0) => Bucket::Easy,
                Some(_) => Bucket::Hard,
            };
            match bucket {
                Bucket::Easy => easy += 1,
                Bucket::Hard => hard += 1,
                Bucket::NotFound => not_found += 1,
            }
            mentions.push(MentionRecord {
                surface: surface.clone(),
                gold: Some(gold_qid.clone()),
                start: Some(start),
                end: Some(start + 1),
                candidates: None,
            });
            manifest_mentions.push(ManifestMention {
                surface,
                gold: gold_qid,
                bucket,
                gold_position,
                topic,
            });
        }
        let doc_id = format!("doc{doc:04}");
        documents.push(DocumentRecord {
            doc_id: doc_id.clone(),
            tokens,
            nouns: None,
            mentions,
        });
        manifest_docs.push(ManifestDocument {
            doc_id,
            bases,
            mentions: manifest_mentions,
        });
    }

    Ok(SynthCorpus {
        entities: b.entities,
        entity_embeddings: b.embeddings,
        word_embeddings: words,
        descriptions: b.descriptions,
        documents,
        manifest: Manifest {
            format: MANIFEST_FORMAT.into(),
            format_version: MANIFEST_VERSION,
            config: cfg.clone(),
            easy,
            hard,
            not_found,
            documents: manifest_docs,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::dot;
    use crate::eval::classify;

    fn small() -> SynthConfig {
        SynthConfig {
            docs: 6,
            mentions_per_doc: 5,
            candidates_per_mention: 7,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            SynthConfig { r: 64, ..small() },
            SynthConfig { r: 0, ..small() },
            SynthConfig { easy_fraction: 1.5, ..small() },
            SynthConfig { noise: -0.1, ..small() },
            SynthConfig { candidates_per_mention: 0, ..small() },
            SynthConfig { topics: 30, distractors: DistractorMode::Orthogonal, ..small() },
        ];
        for cfg in bad {
            assert!(matches!(generate(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn candidate_sets_and_buckets_match_manifest() {
        let corpus = generate(&small()).unwrap();
        let (_, tasks) = corpus.default_tasks();
        for (task, md) in tasks.iter().zip(&corpus.manifest.documents) {
            for (m, mm) in task.mentions.iter().zip(&md.mentions) {
                assert_eq!(m.candidates.len(), 7);
                assert_eq!(classify(&m.candidates, &mm.gold), mm.bucket);
                assert_eq!(m.candidates.position(&mm.gold), mm.gold_position);
            }
        }
    }

    #[test]
    fn planted_bases_are_orthonormal_and_gold_lies_near_them() {
        let cfg = SynthConfig { noise: 0.0, ..small() };
        let corpus = generate(&cfg).unwrap();
        for md in &corpus.manifest.documents {
            let basis = &md.bases[0];
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(u, v) - want).abs() < 1e-12);
                }
            }
            for mm in &md.mentions {
                let g = corpus.entity_embeddings.get(&mm.gold).unwrap();
                let in_span: f64 = basis.iter().map(|b| dot(b, g).powi(2)).sum();
                assert!((in_span - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_distractors_are_orthogonal() {
        let cfg = SynthConfig { distractors: DistractorMode::Orthogonal, ..small() };
        let corpus = generate(&cfg).unwrap();
        let (_, tasks) = corpus.default_tasks();
        for (task, md) in tasks.iter().zip(&corpus.manifest.documents) {
            for (m, mm) in task.mentions.iter().zip(&md.mentions) {
                for q in m.candidates.qids().filter(|q| *q != mm.gold) {
                    let v = corpus.entity_embeddings.get(q).unwrap();
                    for b in &md.bases[0] {
                        assert!(dot(b, v).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn extremes_of_easy_and_not_found_fractions() {
        let all_easy = generate(&SynthConfig { easy_fraction: 1.0, ..small() }).unwrap();
        assert_eq!(all_easy.manifest.easy, 30);
        let all_missing = generate(&SynthConfig { not_found_fraction: 1.0, ..small() }).unwrap();
        assert_eq!(all_missing.manifest.not_found, 30);
        let (_, tasks) = all_missing.default_tasks();
        for m in tasks.iter().flat_map(|t| &t.mentions) {
            assert_eq!(classify(&m.candidates, m.gold.as_deref().unwrap()), Bucket::NotFound);
        }
    }

    #[test]
    fn same_seed_gives_identical_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate(&small()).unwrap().write_to(a.path()).unwrap();
        generate(&small()).unwrap().write_to(b.path()).unwrap();
        for f in [CATALOG_FILE, ENTITY_EMBEDDINGS_FILE, WORD_EMBEDDINGS_FILE, DESCRIPTIONS_FILE, DATASET_FILE, MANIFEST_FILE] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
        let c = tempfile::tempdir().unwrap();
        generate(&SynthConfig { seed: 18, ..small() }).unwrap().write_to(c.path()).unwrap();
        assert_ne!(fs::read(a.path().join(MANIFEST_FILE)).unwrap(), fs::read(c.path().join(MANIFEST_FILE)).unwrap());
    }

    #[test]
    fn written_artifacts_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate(&small()).unwrap();
        corpus.write_to(dir.path()).unwrap();
        let cat = crate::catalog::load_catalog(dir.path().join(CATALOG_FILE)).unwrap();
        assert_eq!(cat.len(), corpus.entities.len());
        let emb = crate::embeddings::load_embeddings(dir.path().join(ENTITY_EMBEDDINGS_FILE)).unwrap();
        for (q, v) in corpus.entity_embeddings.iter() {
            assert_eq!(emb.get(q).unwrap(), v);
        }
        let docs = crate::dataset::load_dataset(dir.path().join(DATASET_FILE)).unwrap();
        assert_eq!(docs, corpus.documents);
    }
}
