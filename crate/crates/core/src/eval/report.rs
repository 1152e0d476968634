use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::property::{HierarchyProperty, PropertyGroup};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PropertyScore {
    pub correct: u64,
    pub total: u64,
    #[serde(default)]
    pub skipped: u64,
    /// `correct / total`, in `[0, 1]`.
    pub accuracy: f64,
}

/// Mean and one-sample t-test of a score across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub mean: f64,
    pub stdev: f64,
    /// Infinite (with `degenerate` set) when every run has the same score.
    #[serde(with = "lenient_f64")]
    pub t_stat: f64,
    #[serde(with = "lenient_f64")]
    pub p_value: f64,
    pub degenerate: bool,
}

/// Per-property accuracies plus the `P-*`, `A-*`, `S-*` group means and the
/// overall `All` score. Groups and `All` are `None` unless every member
/// property is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub per_property: BTreeMap<HierarchyProperty, PropertyScore>,
    pub groups: BTreeMap<PropertyGroup, Option<f64>>,
    pub all: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl PropertyReport {
    pub fn from_scores(per_property: BTreeMap<HierarchyProperty, PropertyScore>) -> Self {
        let accuracies: BTreeMap<_, _> =
            per_property.iter().map(|(p, s)| (*p, s.accuracy)).collect();
        let mean_of = |props: &mut dyn Iterator<Item = HierarchyProperty>| -> Option<f64> {
            let values: Option<Vec<f64>> = props.map(|p| accuracies.get(&p).copied()).collect();
            let values = values?;
            Some(values.iter().sum::<f64>() / values.len() as f64)
        };
        let groups = PropertyGroup::ALL
            .into_iter()
            .map(|g| (g, mean_of(&mut g.members())))
            .collect();
        // The overall score averages the six properties, not the three groups.
        let all = mean_of(&mut HierarchyProperty::ALL.into_iter());
        Self {
            per_property,
            groups,
            all,
            runs: None,
            label: String::new(),
        }
    }

    /// Report from bare accuracies, e.g. published table rows.
    pub fn from_accuracies(accuracies: &[(HierarchyProperty, f64)]) -> Self {
        Self::from_scores(
            accuracies
                .iter()
                .map(|(p, a)| {
                    (
                        *p,
                        PropertyScore {
                            accuracy: *a,
                            ..PropertyScore::default()
                        },
                    )
                })
                .collect(),
        )
    }

    pub fn accuracy(&self, property: HierarchyProperty) -> Option<f64> {
        self.per_property.get(&property).map(|s| s.accuracy)
    }

    pub fn group(&self, group: PropertyGroup) -> Option<f64> {
        self.groups.get(&group).copied().flatten()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// JSON has no infinities; store non-finite values as strings.
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
