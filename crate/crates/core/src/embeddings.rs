//! Fixed-dimension vectors for entities or words.
//!
//! Text format: a header line `N D`, then `N` lines `identifier v1 ... vD`,
//! separated by single spaces or any run of whitespace.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Norms at or below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    index: HashMap<String, usize>,
    ids: Vec<String>,
    data: Vec<f64>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            index: HashMap::new(),
            ids: Vec::new(),
            data: Vec::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: &[f64]) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if let Some(bad) = vector.iter().find(|x| !x.is_finite()) {
            return Err(Error::Data(format!("non-finite value {bad} for {id}")));
        }
        if self.index.contains_key(&id) {
            return Err(Error::Integrity(format!("duplicate embedding for {id}")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(id, v)| (id.as_str(), v))
    }

    /// Copy of the store with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let err = |e| Error::io(path, e);
        writeln!(out, "{} {}", self.len(), self.dim).map_err(err)?;
        for (id, v) in self.iter() {
            write!(out, "{id}").map_err(err)?;
            for x in v {
                write!(out, " {x}").map_err(err)?;
            }
            writeln!(out).map_err(err)?;
        }
        out.flush().map_err(err)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::Format(format!("{}: missing header", path.display()))),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) => (n, d),
            _ => return Err(Error::Format(format!("{}: bad header {header:?}", path.display()))),
        },
        _ => return Err(Error::Format(format!("{}: bad header {header:?}", path.display()))),
    };
    let mut store = EmbeddingStore::new(dim)?;
    let mut row = Vec::with_capacity(dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let id = parts.next().expect("non-empty line has a first field");
        row.clear();
        for p in parts {
            let x: f64 = p
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad number {p:?}")))?;
            row.push(x);
        }
        if row.len() != dim {
            return Err(Error::Format(format!(
                "{}:{line_no}: expected {dim} values, found {}",
                path.display(),
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(format!("{}:{line_no}: non-finite value", path.display())));
        }
        store.insert(id, &row).map_err(|e| match e {
            Error::Integrity(m) => Error::Integrity(format!("{}:{line_no}: {m}", path.display())),
            other => other,
        })?;
    }
    if store.len() != count {
        return Err(Error::Format(format!(
            "{}: header declares {count} vectors, found {}",
            path.display(),
            store.len()
        )));
    }
    Ok(store)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `v / |v|`, or the zero vector when the norm is at most [`ZERO_NORM`].
pub fn unit_normalize(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n <= ZERO_NORM {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| x / n).collect()
}

/// Cosine similarity; `None` if either vector is (numerically) zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na <= ZERO_NORM || nb <= ZERO_NORM {
        return None;
    }
    Some(dot(a, b) / (na * nb))
}

/// Component-wise mean of the vectors yielded by `vectors`; `None` when empty.
pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; dim];
    let mut count = 0usize;
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        count += 1;
    }
    if count == 0 {
        return None;
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn file_with(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_file() {
        let f = file_with("2 3\nq1 1 0 0\nq2 0 1 0\n");
        let s = load_embeddings(f.path()).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("q2"), Some(&[0.0, 1.0, 0.0][..]));
        assert_eq!(s.get("q3"), None);
    }

    #[test]
    fn short_row_is_format_error() {
        let f = file_with("1 3\nq1 1 0\n");
        assert!(matches!(load_embeddings(f.path()), Err(Error::Format(_))));
    }

    #[test]
    fn count_mismatch_is_format_error() {
        let f = file_with("3 2\nq1 1 0\nq2 0 1\n");
        assert!(matches!(load_embeddings(f.path()), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_is_data_error() {
        let f = file_with("1 2\nq1 NaN 0\n");
        assert!(matches!(load_embeddings(f.path()), Err(Error::Data(_))));
        let f = file_with("1 2\nq1 inf 0\n");
        assert!(matches!(load_embeddings(f.path()), Err(Error::Data(_))));
    }

    #[test]
    fn hundred_vectors_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut store = EmbeddingStore::new(16).unwrap();
        let rows: Vec<(String, Vec<f64>)> = (0..100)
            .map(|i| (format!("e{i}"), (0..16).map(|_| rng.random_range(-3.0..3.0)).collect()))
            .collect();
        for (id, v) in &rows {
            store.insert(id.clone(), v).unwrap();
        }
        let f = tempfile::NamedTempFile::new().unwrap();
        store.write(f.path()).unwrap();
        let back = load_embeddings(f.path()).unwrap();
        for (id, v) in &rows {
            assert_eq!(back.get(id).unwrap(), v.as_slice());
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(unit_normalize(&[3.0, 4.0]), vec![0.6, 0.8]);
        assert_eq!(unit_normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!((norm(&unit_normalize(&v)) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalized_norm_is_zero_or_one(v in proptest::collection::vec(-1e6f64..1e6, 1..64)) {
            let n = norm(&unit_normalize(&v));
            prop_assert!(n == 0.0 || (n - 1.0).abs() <= 1e-12, "norm {}", n);
        }

        #[test]
        fn normalize_is_idempotent(v in proptest::collection::vec(-1e3f64..1e3, 1..64)) {
            let once = unit_normalize(&v);
            let twice = unit_normalize(&once);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
