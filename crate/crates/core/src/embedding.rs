//! Concept embedding tables and the two distance methods.
//!
//! File format (UTF-8): a `dim<TAB><d>` header, then one
//! `<taxonomy_id>/<node_id><TAB>v1 v2 ... vd` line per concept.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Table key of node `node_id` in taxonomy `taxonomy_id`.
pub fn concept_key(taxonomy_id: &str, node_id: &str) -> String {
    format!("{taxonomy_id}/{node_id}")
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("`{key}` has {found} components, expected {expected}")]
    DimensionMismatch {
        key: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` has a non-finite component")]
    NonFiniteValue(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("key `{0}` is not of the form <taxonomy_id>/<node_id>")]
    InvalidKey(String),
    #[error("embedding table has no vectors")]
    EmptyTable,
    #[error("vector dimension must be positive")]
    ZeroDimension,
    #[error("cosine distance is undefined for a zero vector")]
    ZeroVector,
    #[error("vectors have dimensions {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DistanceMethod {
    #[default]
    #[serde(rename = "cos")]
    Cosine,
    #[serde(rename = "l2")]
    Euclidean,
}

impl fmt::Display for DistanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMethod::Cosine => "cos",
            DistanceMethod::Euclidean => "l2",
        })
    }
}

impl FromStr for DistanceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cos" | "cosine" => Ok(DistanceMethod::Cosine),
            "l2" | "euclidean" => Ok(DistanceMethod::Euclidean),
            other => Err(format!("unknown distance `{other}` (expected cos or l2)")),
        }
    }
}

/// Cosine distance `1 - cos(u, v)` in `[0, 2]`, or Euclidean distance.
pub fn distance(u: &[f64], v: &[f64], method: DistanceMethod) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch(u.len(), v.len()));
    }
    match method {
        DistanceMethod::Euclidean => Ok(u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()),
        DistanceMethod::Cosine => {
            let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
            for (a, b) in u.iter().zip(v) {
                dot += a * b;
                uu += a * a;
                vv += b * b;
            }
            if uu == 0.0 || vv == 0.0 {
                return Err(EmbeddingError::ZeroVector);
            }
            if u == v {
                return Ok(0.0);
            }
            Ok((1.0 - dot / (uu.sqrt() * vv.sqrt())).clamp(0.0, 2.0))
        }
    }
}

/// Immutable map from concept key to a fixed-dimension vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    provenance: String,
}

impl EmbeddingTable {
    /// Builds a table from `(key, vector)` rows, validating every row.
    pub fn from_rows<I>(dimension: usize, rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dimension == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        let mut table = EmbeddingTable {
            dimension,
            keys: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            provenance: String::new(),
        };
        for (key, vector) in rows {
            table.push(key, &vector)?;
        }
        if table.keys.is_empty() {
            return Err(EmbeddingError::EmptyTable);
        }
        Ok(table)
    }

    fn push(&mut self, key: String, vector: &[f64]) -> Result<(), EmbeddingError> {
        match key.split_once('/') {
            Some((tax, node)) if !tax.is_empty() && !node.is_empty() => {}
            _ => return Err(EmbeddingError::InvalidKey(key)),
        }
        if vector.len() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                key,
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFiniteValue(key));
        }
        if self.index.contains_key(&key) {
            return Err(EmbeddingError::DuplicateKey(key));
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index
            .get(key)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    /// Keys in insertion order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.keys
            .iter()
            .zip(self.data.chunks_exact(self.dimension))
            .map(|(k, v)| (k.as_str(), v))
    }

    /// Applies `f` to every vector, keeping keys and order.
    pub fn map_vectors<F>(&self, mut f: F) -> Result<Self, EmbeddingError>
    where
        F: FnMut(&str, &[f64]) -> Vec<f64>,
    {
        let rows: Vec<_> = self.rows().map(|(k, v)| (k.to_string(), f(k, v))).collect();
        Ok(Self::from_rows(self.dimension, rows)?.with_provenance(self.provenance.clone()))
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self, EmbeddingError> {
        let mut lines = source.lines().enumerate();
        let dimension = loop {
            let Some((i, line)) = lines.next() else {
                return Err(EmbeddingError::EmptyTable);
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || EmbeddingError::Malformed {
                line: i + 1,
                message: format!("expected `dim<TAB><d>` header, found `{line}`"),
            };
            let (tag, value) = line.split_once('\t').ok_or_else(bad)?;
            if tag != "dim" {
                return Err(bad());
            }
            let d: usize = value.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(EmbeddingError::ZeroDimension);
            }
            break d;
        };

        let mut table = EmbeddingTable {
            dimension,
            keys: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            provenance: String::new(),
        };
        let mut vector = Vec::with_capacity(dimension);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (key, values) = line
                .split_once('\t')
                .ok_or_else(|| EmbeddingError::Malformed {
                    line: i + 1,
                    message: "expected `<key><TAB><values>`".into(),
                })?;
            vector.clear();
            for token in values.split_ascii_whitespace() {
                // Rust parses "NaN"/"inf"; those are caught by the finiteness check.
                let x: f64 = token.parse().map_err(|_| EmbeddingError::Malformed {
                    line: i + 1,
                    message: format!("`{token}` is not a number"),
                })?;
                vector.push(x);
            }
            table.push(key.to_string(), &vector)?;
        }
        if table.keys.is_empty() {
            return Err(EmbeddingError::EmptyTable);
        }
        Ok(table)
    }

    /// Writes the table with 17 significant digits per component.
    pub fn write<W: Write>(&self, mut sink: W) -> Result<(), EmbeddingError> {
        writeln!(sink, "dim\t{}", self.dimension)?;
        for (key, v) in self.rows() {
            let values: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(sink, "{key}\t{}", values.join(" "))?;
        }
        sink.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_two_rows() {
        let t =
            EmbeddingTable::load("dim\t3\nt/a\t1 2 3\nt/b\t0.5 0.25 -1e-3\n".as_bytes()).unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("t/b").unwrap(), &[0.5, 0.25, -1e-3]);
    }

    #[test]
    fn load_errors() {
        let load = |s: &str| EmbeddingTable::load(s.as_bytes());
        assert!(matches!(
            load("dim\t3\nt/a\t1 2 3\nt/b\t1 2 3 4\n"),
            Err(EmbeddingError::DimensionMismatch { ref key, .. }) if key == "t/b"
        ));
        assert!(matches!(
            load("dim\t2\nt/a\t1 NaN\n"),
            Err(EmbeddingError::NonFiniteValue(_))
        ));
        assert!(matches!(
            load("dim\t1\nt/a\t1\nt/a\t2\n"),
            Err(EmbeddingError::DuplicateKey(_))
        ));
        assert!(matches!(load("dim\t2\n"), Err(EmbeddingError::EmptyTable)));
        assert!(matches!(load(""), Err(EmbeddingError::EmptyTable)));
        assert!(matches!(
            load("dims 2\nt/a\t1 2\n"),
            Err(EmbeddingError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            load("dim\t1\nnoslash\t1\n"),
            Err(EmbeddingError::InvalidKey(_))
        ));
        assert!(matches!(
            load("dim\t1\nt/a\tabc\n"),
            Err(EmbeddingError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let cos = DistanceMethod::Cosine;
        assert_eq!(distance(&[1.0, 0.0], &[0.0, 1.0], cos).unwrap(), 1.0);
        assert_eq!(distance(&[1.0, 0.0], &[-1.0, 0.0], cos).unwrap(), 2.0);
        assert_eq!(
            distance(
                &[1.0, 2.0, 2.0],
                &[1.0, 2.0, 2.0],
                DistanceMethod::Euclidean
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            distance(&[0.0, 0.0], &[3.0, 4.0], DistanceMethod::Euclidean).unwrap(),
            5.0
        );
        assert!(matches!(
            distance(&[0.0, 0.0], &[1.0, 0.0], cos),
            Err(EmbeddingError::ZeroVector)
        ));
        assert!(matches!(
            distance(&[1.0], &[1.0, 0.0], DistanceMethod::Euclidean),
            Err(EmbeddingError::LengthMismatch(1, 2))
        ));
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-100.0f64..100.0, 3)
    }

    proptest! {
        #[test]
        fn distances_are_symmetric_and_bounded(u in vec3(), v in vec3()) {
            prop_assume!(u.iter().any(|x| *x != 0.0) && v.iter().any(|x| *x != 0.0));
            for m in [DistanceMethod::Cosine, DistanceMethod::Euclidean] {
                let a = distance(&u, &v, m).unwrap();
                prop_assert_eq!(a, distance(&v, &u, m).unwrap());
                prop_assert!(a >= 0.0);
                prop_assert_eq!(distance(&u, &u, m).unwrap(), 0.0);
            }
            prop_assert!(distance(&u, &v, DistanceMethod::Cosine).unwrap() <= 2.0);
        }

        #[test]
        fn write_then_load_is_lossless(rows in proptest::collection::vec(vec3(), 1..8)) {
            let table = EmbeddingTable::from_rows(
                3,
                rows.iter().enumerate().map(|(i, v)| (format!("t/{i}"), v.clone())),
            ).unwrap();
            let mut buf = Vec::new();
            table.write(&mut buf).unwrap();
            prop_assert_eq!(EmbeddingTable::load(buf.as_slice()).unwrap(), table);
        }
    }
}
