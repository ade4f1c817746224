//! Unsupervised entity linking with per-document embedding subspaces.
//!
//! Every document's candidate entities are pooled into one weighted matrix.
//! Its top right singular vectors span the document's dominant "theme", and
//! each mention is linked to the candidate lying closest to that subspace.
//!
//! The pipeline is: [`catalog`] and [`embeddings`] load the knowledge-graph
//! artifacts, [`index`] generates candidates, [`eigenthemes`] (or one of the
//! [`baselines`]) ranks them via [`link`], and [`eval`] scores the result.
//! [`synth`] produces planted corpora for testing.

pub mod baselines;
pub mod catalog;
pub mod context;
pub mod dataset;
pub mod eigenthemes;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod index;
pub mod linalg;
pub mod link;
pub mod synth;
pub mod weighting;

pub use catalog::{load_catalog, EntityCatalog, EntityRecord};
pub use dataset::{load_dataset, resolve_all, DocumentRecord, DocumentTask, MentionTask};
pub use eigenthemes::{link_document, Scaling, DEFAULT_COMPONENTS};
pub use embeddings::{load_embeddings, EmbeddingStore};
pub use error::{Error, Result};
pub use index::{generate_candidates, CandidateList, InvertedIndex, DEFAULT_MAX_CANDIDATES};
pub use linalg::{truncated_svd, weighted_sscp, Matrix, Subspace};
pub use link::{link_corpus, LinkResult, LinkSettings, Method, MentionLink, Resources};
pub use weighting::{WeightKind, WeightScheme};
