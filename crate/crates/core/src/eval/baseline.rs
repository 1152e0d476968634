use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{EvalError, PropertyReport, PropertyScore};
use crate::probe::ProbeDataset;
use crate::seed::{mix64, open_unit, stable_hash};

/// Random-distance baseline.
///
/// Each run gives every unordered concept pair an independent uniform
/// distance in (0, 1). The draw for a pair is a hash of `(seed, run, pair)`,
/// so it is symmetric, fresh per run, and independent of evaluation order.
/// Per-property accuracy is the mean over runs; `correct`/`total` are summed
/// over runs.
pub fn random_baseline(
    datasets: &[ProbeDataset],
    runs: usize,
    seed: u64,
) -> Result<PropertyReport, EvalError> {
    if runs == 0 {
        return Err(EvalError::InsufficientRuns {
            needed: 1,
            found: 0,
        });
    }
    let mut scores = BTreeMap::new();
    for d in datasets {
        if d.is_empty() {
            return Err(EvalError::EmptyDataset(d.property));
        }
        let keyed: Vec<[u64; 3]> = d
            .ternaries
            .par_iter()
            .map(|t| t.concept_keys().map(|k| stable_hash(&k)))
            .collect();
        let correct: u64 = (0..runs as u64)
            .into_par_iter()
            .map(|run| {
                let run_key = mix64(seed ^ mix64(run));
                keyed
                    .iter()
                    .filter(|[n, l, r]| {
                        pair_distance(run_key, *n, *l) < pair_distance(run_key, *n, *r)
                    })
                    .count() as u64
            })
            .sum();
        let total = d.len() as u64 * runs as u64;
        let score = PropertyScore {
            correct,
            total,
            skipped: 0,
            accuracy: correct as f64 / total as f64,
        };
        if scores.insert(d.property, score).is_some() {
            return Err(EvalError::DuplicateProperty(d.property));
        }
    }
    Ok(
        PropertyReport::from_scores(scores)
            .with_label(format!("random ({runs} runs, seed {seed})")),
    )
}

fn pair_distance(run_key: u64, a: u64, b: u64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    open_unit(mix64(run_key ^ mix64(lo ^ mix64(hi))))
}
