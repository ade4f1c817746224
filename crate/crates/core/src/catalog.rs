//! Entity catalog: names, aliases and KG degrees keyed by opaque identifier.
//!
//! The on-disk format is JSONL, one record per line:
//!
//! ```text
//! {"qid": "Q41421", "name": "Michael Jordan", "aliases": ["MJ"], "degree": 812}
//! ```
//!
//! `aliases` defaults to `[]` and `degree` to `0` when absent. Degrees can also
//! be recomputed from an undirected edge list; values present in the catalog
//! take precedence over recomputed ones.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One knowledge-graph entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub qid: String,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Vertex degree in the undirected KG.
    #[serde(default)]
    pub degree: u64,
}

#[derive(Deserialize)]
struct RawRecord {
    qid: String,
    name: String,
    #[serde(default)]
    aliases: Vec<String>,
    degree: Option<u64>,
}

/// Dense entity handle, valid for the catalog that produced it.
///
/// Ids are assigned in ascending qid order, so comparing ids compares qids.
pub type EntityId = u32;

/// Immutable set of entities. Safe to share across threads once built.
#[derive(Debug, Clone, Default)]
pub struct EntityCatalog {
    records: Vec<EntityRecord>,
    by_qid: HashMap<String, EntityId>,
    degree_supplied: Vec<bool>,
}

impl EntityCatalog {
    /// Builds a catalog, rejecting duplicate or empty identifiers and empty names.
    pub fn from_records(records: Vec<EntityRecord>) -> Result<Self> {
        let supplied = vec![true; records.len()];
        Self::build(records, supplied)
    }

    fn build(records: Vec<EntityRecord>, supplied: Vec<bool>) -> Result<Self> {
        let mut paired: Vec<(EntityRecord, bool)> = records.into_iter().zip(supplied).collect();
        for (r, _) in &paired {
            if r.qid.is_empty() {
                return Err(Error::Integrity("empty qid".into()));
            }
            if r.name.is_empty() {
                return Err(Error::Integrity(format!("entity {} has an empty name", r.qid)));
            }
        }
        paired.sort_by(|a, b| a.0.qid.cmp(&b.0.qid));
        for w in paired.windows(2) {
            if w[0].0.qid == w[1].0.qid {
                return Err(Error::Integrity(format!("duplicate qid {}", w[0].0.qid)));
            }
        }
        if paired.len() > EntityId::MAX as usize {
            return Err(Error::Data("catalog too large".into()));
        }
        let (records, degree_supplied): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
        let by_qid = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.qid.clone(), i as EntityId))
            .collect();
        Ok(Self {
            records,
            by_qid,
            degree_supplied,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, qid: &str) -> Option<&EntityRecord> {
        self.id_of(qid).map(|id| self.record(id))
    }

    pub fn id_of(&self, qid: &str) -> Option<EntityId> {
        self.by_qid.get(qid).copied()
    }

    /// Panics if `id` did not come from this catalog.
    pub fn record(&self, id: EntityId) -> &EntityRecord {
        &self.records[id as usize]
    }

    pub fn degree(&self, qid: &str) -> Option<u64> {
        self.get(qid).map(|r| r.degree)
    }

    /// Records in ascending qid order.
    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }

    /// Fills in degrees for records whose source line had no `degree` field.
    /// Returns the number of records updated.
    pub fn apply_degrees(&mut self, degrees: &HashMap<String, u64>) -> usize {
        let mut updated = 0;
        for (rec, supplied) in self.records.iter_mut().zip(&self.degree_supplied) {
            if *supplied {
                continue;
            }
            if let Some(&d) = degrees.get(&rec.qid) {
                rec.degree = d;
                updated += 1;
            }
        }
        updated
    }
}

/// Reads a JSONL catalog. Blank lines are skipped.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<EntityCatalog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut supplied = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if raw.qid.is_empty() {
            return Err(Error::parse(path, i + 1, "empty qid"));
        }
        if raw.name.is_empty() {
            return Err(Error::parse(path, i + 1, "empty name"));
        }
        if !seen.insert(raw.qid.clone()) {
            return Err(Error::Integrity(format!(
                "{}:{}: duplicate qid {}",
                path.display(),
                i + 1,
                raw.qid
            )));
        }
        supplied.push(raw.degree.is_some());
        records.push(EntityRecord {
            qid: raw.qid,
            name: raw.name,
            aliases: raw.aliases,
            degree: raw.degree.unwrap_or(0),
        });
    }
    EntityCatalog::build(records, supplied)
}

/// Writes the catalog as JSONL in ascending qid order.
pub fn write_catalog(catalog: &EntityCatalog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for rec in catalog.records() {
        let line = serde_json::to_string(rec).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Degrees of the undirected simple graph induced by `edges`.
///
/// Parallel and reversed edges collapse into one; a self-loop adds one to its vertex.
pub fn compute_degrees<I, S>(edges: I) -> HashMap<String, u64>
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
{
    let mut unique: BTreeSet<(String, String)> = BTreeSet::new();
    for (a, b) in edges {
        let (a, b) = (a.as_ref(), b.as_ref());
        let key = if a <= b { (a.to_owned(), b.to_owned()) } else { (b.to_owned(), a.to_owned()) };
        unique.insert(key);
    }
    let mut degrees: HashMap<String, u64> = HashMap::new();
    for (a, b) in unique {
        if a == b {
            *degrees.entry(a).or_default() += 1;
        } else {
            *degrees.entry(a).or_default() += 1;
            *degrees.entry(b).or_default() += 1;
        }
    }
    degrees
}

/// Reads a TSV edge list (two qids per line) and returns the degree map.
pub fn load_edge_degrees(path: impl AsRef<Path>) -> Result<HashMap<String, u64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, i + 1, "expected two tab-separated identifiers"));
        };
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(path, i + 1, "empty identifier"));
        }
        edges.push((a.to_owned(), b.to_owned()));
    }
    Ok(compute_degrees(edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn write_lines(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_two_michael_jordans() {
        let f = write_lines(&[
            r#"{"qid":"Q41421","name":"Michael Jordan","aliases":["MJ","Air Jordan"],"degree":812}"#.into(),
            r#"{"qid":"Q3308285","name":"Michael Jordan","degree":57}"#.into(),
        ]);
        let cat = load_catalog(f.path()).unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(cat.get("Q41421").unwrap().aliases, vec!["MJ", "Air Jordan"]);
        let cs = cat.get("Q3308285").unwrap();
        assert_eq!(cs.degree, 57);
        assert!(cs.aliases.is_empty());
    }

    #[test]
    fn empty_file_is_empty_catalog() {
        let f = write_lines(&[]);
        assert_eq!(load_catalog(f.path()).unwrap().len(), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_lines(&[
            r#"{"qid":"a","name":"A"}"#.into(),
            r#"{"qid":"b","name":"#.into(),
        ]);
        match load_catalog(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_qid_is_integrity_error() {
        let f = write_lines(&[
            r#"{"qid":"a","name":"A"}"#.into(),
            r#"{"qid":"a","name":"B"}"#.into(),
        ]);
        assert!(matches!(load_catalog(f.path()), Err(Error::Integrity(_))));
    }

    #[test]
    fn synthetic_thousand_records_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let source: Vec<EntityRecord> = (0..1000)
            .map(|i| EntityRecord {
                qid: format!("E{i}"),
                name: format!("name {}", rng.random_range(0..5000)),
                aliases: (0..rng.random_range(0..3)).map(|j| format!("alias{i}x{j}")).collect(),
                degree: rng.random_range(0..10_000),
            })
            .collect();
        let lines: Vec<String> = source.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        let f = write_lines(&lines);
        let cat = load_catalog(f.path()).unwrap();
        assert_eq!(cat.len(), 1000);
        for _ in 0..100 {
            let r = &source[rng.random_range(0..1000)];
            assert_eq!(cat.get(&r.qid), Some(r));
        }

        let out = tempfile::NamedTempFile::new().unwrap();
        write_catalog(&cat, out.path()).unwrap();
        let again = load_catalog(out.path()).unwrap();
        assert_eq!(again.records(), cat.records());
    }

    #[test]
    fn path_graph_degrees() {
        let d = compute_degrees([("a", "b"), ("b", "c")]);
        assert_eq!(d["a"], 1);
        assert_eq!(d["b"], 2);
        assert_eq!(d["c"], 1);
    }

    #[test]
    fn reversed_edge_is_deduplicated() {
        let d = compute_degrees([("a", "b"), ("b", "a")]);
        assert_eq!((d["a"], d["b"]), (1, 1));
    }

    #[test]
    fn random_multigraph_matches_adjacency_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let edges: Vec<(String, String)> = (0..50)
            .map(|_| {
                (
                    format!("v{}", rng.random_range(0..12)),
                    format!("v{}", rng.random_range(0..12)),
                )
            })
            .collect();
        let got = compute_degrees(edges.iter().map(|(a, b)| (a.as_str(), b.as_str())));

        let mut adj: HashMap<&str, HashSet<&str>> = HashMap::new();
        for (a, b) in &edges {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        for (v, nbrs) in &adj {
            assert_eq!(got[*v], nbrs.len() as u64, "vertex {v}");
        }
        assert_eq!(got.len(), adj.len());

        let undirected: HashSet<(&str, &str)> = edges
            .iter()
            .map(|(a, b)| if a <= b { (a.as_str(), b.as_str()) } else { (b.as_str(), a.as_str()) })
            .collect();
        let loops = undirected.iter().filter(|(a, b)| a == b).count() as u64;
        let total: u64 = got.values().sum();
        assert_eq!(total, 2 * undirected.len() as u64 - loops);
    }

    #[test]
    fn supplied_degree_wins_over_edges() {
        let f = write_lines(&[
            r#"{"qid":"a","name":"A","degree":40}"#.into(),
            r#"{"qid":"b","name":"B"}"#.into(),
        ]);
        let mut cat = load_catalog(f.path()).unwrap();
        let degrees = compute_degrees([("a", "b"), ("b", "c")]);
        assert_eq!(cat.apply_degrees(&degrees), 1);
        assert_eq!(cat.degree("a"), Some(40));
        assert_eq!(cat.degree("b"), Some(2));
    }

    #[test]
    fn edge_file_rejects_single_column() {
        let f = write_lines(&["a\tb".into(), "c".into()]);
        assert!(matches!(load_edge_degrees(f.path()), Err(Error::Parse { line: 2, .. })));
    }
}
