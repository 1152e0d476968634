use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{EvalError, PropertyReport, PropertyScore, RunSummary};
use crate::property::{HierarchyProperty, PropertyGroup};

/// Statistics over several runs (e.g. fine-tuning seeds) of the same setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub reference_mean: f64,
    pub per_property: BTreeMap<HierarchyProperty, RunSummary>,
    pub groups: BTreeMap<PropertyGroup, RunSummary>,
    pub all: Option<RunSummary>,
    /// Mean accuracies as a report; `runs` carries the `All` summary.
    pub mean_report: PropertyReport,
}

/// Sample mean, sample standard deviation, and a two-sided one-sample t-test
/// of `values` against `reference` with `n - 1` degrees of freedom.
pub fn summarize(values: &[f64], reference: f64) -> Result<RunSummary, EvalError> {
    let n = values.len();
    if n < 2 {
        return Err(EvalError::InsufficientRuns {
            needed: 2,
            found: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let stdev = var.sqrt();
    let diff = mean - reference;
    if stdev == 0.0 {
        let (t_stat, p_value) = if diff == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(diff), 0.0)
        };
        return Ok(RunSummary {
            n,
            mean,
            stdev,
            t_stat,
            p_value,
            degenerate: true,
        });
    }
    let t_stat = diff / (stdev / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    let p_value = (2.0 * (1.0 - dist.cdf(t_stat.abs()))).clamp(0.0, 1.0);
    Ok(RunSummary {
        n,
        mean,
        stdev,
        t_stat,
        p_value,
        degenerate: false,
    })
}

/// Aggregates reports over the same property set. `reference_mean` is in the
/// same unit as accuracies (a fraction).
pub fn aggregate_runs(
    reports: &[PropertyReport],
    reference_mean: f64,
) -> Result<RunAggregate, EvalError> {
    if reports.len() < 2 {
        return Err(EvalError::InsufficientRuns {
            needed: 2,
            found: reports.len(),
        });
    }
    let names = |r: &PropertyReport| {
        r.per_property
            .keys()
            .map(|p| p.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    let expected = names(&reports[0]);
    for r in &reports[1..] {
        let found = names(r);
        if found != expected {
            return Err(EvalError::PropertySetMismatch { expected, found });
        }
    }

    let mut per_property = BTreeMap::new();
    let mut mean_scores = BTreeMap::new();
    for &p in reports[0].per_property.keys() {
        let values: Vec<f64> = reports
            .iter()
            .map(|r| r.per_property[&p].accuracy)
            .collect();
        let summary = summarize(&values, reference_mean)?;
        let (correct, total, skipped) = reports.iter().fold((0, 0, 0), |acc, r| {
            let s = &r.per_property[&p];
            (acc.0 + s.correct, acc.1 + s.total, acc.2 + s.skipped)
        });
        mean_scores.insert(
            p,
            PropertyScore {
                correct,
                total,
                skipped,
                accuracy: summary.mean,
            },
        );
        per_property.insert(p, summary);
    }

    let mut groups = BTreeMap::new();
    for g in PropertyGroup::ALL {
        let values: Option<Vec<f64>> = reports.iter().map(|r| r.group(g)).collect();
        if let Some(values) = values {
            groups.insert(g, summarize(&values, reference_mean)?);
        }
    }
    let all = match reports.iter().map(|r| r.all).collect::<Option<Vec<f64>>>() {
        Some(values) => Some(summarize(&values, reference_mean)?),
        None => None,
    };

    let mut mean_report = PropertyReport::from_scores(mean_scores).with_label("mean");
    mean_report.runs = all;
    Ok(RunAggregate {
        reference_mean,
        per_property,
        groups,
        all,
        mean_report,
    })
}
