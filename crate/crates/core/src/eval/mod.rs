//! Scoring embedding tables against probe datasets.

mod baseline;
mod render;
mod report;
mod stats;

pub use baseline::random_baseline;
pub use render::{format_percent, render_aggregate, render_report, ReportFormat};
pub use report::{PropertyReport, PropertyScore, RunSummary};
pub use stats::{aggregate_runs, summarize, RunAggregate};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{distance, DistanceMethod, EmbeddingError, EmbeddingTable};
use crate::probe::{ProbeDataset, Ternary};
use crate::property::HierarchyProperty;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("concept `{0}` has no embedding")]
    MissingKey(String),
    #[error("{0} dataset has no ternaries to judge")]
    EmptyDataset(HierarchyProperty),
    #[error("property {0} is supplied by more than one dataset")]
    DuplicateProperty(HierarchyProperty),
    #[error("at least {needed} runs are required, got {found}")]
    InsufficientRuns { needed: usize, found: usize },
    #[error("reports cover different properties: {expected} vs {found}")]
    PropertySetMismatch { expected: String, found: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Judgment {
    Correct,
    Incorrect,
    MissingKey(String),
}

/// What to do with ternaries whose concepts are absent from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    #[default]
    Error,
    Skip,
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::Error => "error",
            MissingPolicy::Skip => "skip",
        })
    }
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(MissingPolicy::Error),
            "skip" => Ok(MissingPolicy::Skip),
            other => Err(format!("unknown missing-key policy `{other}`")),
        }
    }
}

/// Correct iff `d(n, l) < d(n, r)`; ties are incorrect.
pub fn judge_ternary(
    table: &EmbeddingTable,
    t: &Ternary,
    method: DistanceMethod,
) -> Result<Judgment, EvalError> {
    let [kn, kl, kr] = t.concept_keys();
    let lookup = |k: String| table.get(&k).ok_or(k);
    let (n, l, r) = match (lookup(kn), lookup(kl), lookup(kr)) {
        (Ok(n), Ok(l), Ok(r)) => (n, l, r),
        (Err(k), _, _) | (_, Err(k), _) | (_, _, Err(k)) => return Ok(Judgment::MissingKey(k)),
    };
    let near = distance(n, l, method)?;
    let far = distance(n, r, method)?;
    Ok(if near < far {
        Judgment::Correct
    } else {
        Judgment::Incorrect
    })
}

/// Per-property accuracy of `table` on `datasets`, with group and overall
/// means. Judgments run on the current rayon pool; counts do not depend on
/// how the work is partitioned.
pub fn evaluate(
    datasets: &[ProbeDataset],
    table: &EmbeddingTable,
    method: DistanceMethod,
    missing: MissingPolicy,
) -> Result<PropertyReport, EvalError> {
    let mut scores = BTreeMap::new();
    for d in datasets {
        if d.is_empty() {
            return Err(EvalError::EmptyDataset(d.property));
        }
        let judgments: Vec<Judgment> = d
            .ternaries
            .par_iter()
            .map(|t| judge_ternary(table, t, method))
            .collect::<Result<_, _>>()?;
        let mut score = PropertyScore::default();
        for j in judgments {
            match j {
                Judgment::Correct => {
                    score.correct += 1;
                    score.total += 1;
                }
                Judgment::Incorrect => score.total += 1,
                Judgment::MissingKey(key) => match missing {
                    MissingPolicy::Error => return Err(EvalError::MissingKey(key)),
                    MissingPolicy::Skip => score.skipped += 1,
                },
            }
        }
        if score.total == 0 {
            return Err(EvalError::EmptyDataset(d.property));
        }
        score.accuracy = score.correct as f64 / score.total as f64;
        if scores.insert(d.property, score).is_some() {
            return Err(EvalError::DuplicateProperty(d.property));
        }
    }
    Ok(PropertyReport::from_scores(scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{Provenance, Split};
    use crate::taxonomy::ConceptNode;

    fn ternary(n: &str, l: &str, r: &str) -> Ternary {
        Ternary {
            property: HierarchyProperty::ParentSibling,
            taxonomy_id: "t".into(),
            n: ConceptNode::new(n, n, ""),
            l: ConceptNode::new(l, l, ""),
            r: ConceptNode::new(r, r, ""),
            dist_nl: 1,
            dist_nr: 2,
        }
    }

    fn table(rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        EmbeddingTable::from_rows(2, rows.iter().map(|(k, v)| (format!("t/{k}"), v.to_vec())))
            .unwrap()
    }

    fn dataset(ts: Vec<Ternary>) -> ProbeDataset {
        let prov = Provenance {
            seed: 0,
            max_per_node: None,
            source_digest: String::new(),
        };
        ProbeDataset::new(HierarchyProperty::ParentSibling, Split::Test, ts, prov).unwrap()
    }

    #[test]
    fn judgments() {
        let tb = table(&[
            ("n", [1.0, 0.0]),
            ("l", [1.0, 0.0]),
            ("r", [0.0, 1.0]),
            ("s", [0.0, -1.0]),
        ]);
        for m in [DistanceMethod::Cosine, DistanceMethod::Euclidean] {
            assert_eq!(
                judge_ternary(&tb, &ternary("n", "l", "r"), m).unwrap(),
                Judgment::Correct
            );
            // r and s are both orthogonal to n: a tie.
            assert_eq!(
                judge_ternary(&tb, &ternary("n", "r", "s"), m).unwrap(),
                Judgment::Incorrect
            );
            assert_eq!(
                judge_ternary(&tb, &ternary("n", "l", "zz"), m).unwrap(),
                Judgment::MissingKey("t/zz".into())
            );
        }
    }

    #[test]
    fn three_of_four() {
        let tb = table(&[
            ("a", [1.0, 0.0]),
            ("b", [1.0, 0.1]),
            ("c", [0.0, 1.0]),
            ("d", [-1.0, 0.0]),
        ]);
        let ds = dataset(vec![
            ternary("a", "b", "c"),
            ternary("a", "b", "d"),
            ternary("a", "c", "d"),
            ternary("a", "d", "b"),
        ]);
        let rep = evaluate(&[ds], &tb, DistanceMethod::Cosine, MissingPolicy::Error).unwrap();
        let s = &rep.per_property[&HierarchyProperty::ParentSibling];
        assert_eq!((s.correct, s.total), (3, 4));
        assert_eq!(s.accuracy, 0.75);
        assert_eq!(rep.all, None);
    }

    #[test]
    fn missing_policy() {
        let tb = table(&[("a", [1.0, 0.0]), ("b", [1.0, 0.1]), ("c", [0.0, 1.0])]);
        let ds = dataset(vec![ternary("a", "b", "c"), ternary("a", "b", "zz")]);
        assert!(matches!(
            evaluate(
                std::slice::from_ref(&ds),
                &tb,
                DistanceMethod::Cosine,
                MissingPolicy::Error
            ),
            Err(EvalError::MissingKey(_))
        ));
        let rep = evaluate(&[ds], &tb, DistanceMethod::Cosine, MissingPolicy::Skip).unwrap();
        let s = &rep.per_property[&HierarchyProperty::ParentSibling];
        assert_eq!((s.correct, s.total, s.skipped), (1, 1, 1));
    }

    #[test]
    fn empty_and_duplicate_datasets() {
        let tb = table(&[("a", [1.0, 0.0])]);
        assert!(matches!(
            evaluate(
                &[dataset(vec![])],
                &tb,
                DistanceMethod::Cosine,
                MissingPolicy::Skip
            ),
            Err(EvalError::EmptyDataset(_))
        ));
        let tb = table(&[("a", [1.0, 0.0]), ("b", [1.0, 0.1]), ("c", [0.0, 1.0])]);
        let ds = dataset(vec![ternary("a", "b", "c")]);
        assert!(matches!(
            evaluate(
                &[ds.clone(), ds],
                &tb,
                DistanceMethod::Cosine,
                MissingPolicy::Error
            ),
            Err(EvalError::DuplicateProperty(_))
        ));
    }

    #[test]
    fn zero_vector_propagates() {
        let tb = table(&[("a", [0.0, 0.0]), ("b", [1.0, 0.1]), ("c", [0.0, 1.0])]);
        assert!(matches!(
            judge_ternary(&tb, &ternary("a", "b", "c"), DistanceMethod::Cosine),
            Err(EvalError::Embedding(EmbeddingError::ZeroVector))
        ));
        assert!(judge_ternary(&tb, &ternary("a", "b", "c"), DistanceMethod::Euclidean).is_ok());
    }
}
