use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{sample_ternaries, GenConfig, ProbeError, Ternary};
use crate::property::HierarchyProperty;
use crate::seed::keyed_rng;
use crate::taxonomy::{write_taxonomies, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub max_per_node: Option<usize>,
    /// SHA-256 of the canonical serialization of the source taxonomies.
    pub source_digest: String,
}

/// Ternaries of a single property and split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeDataset {
    pub property: HierarchyProperty,
    pub split: Split,
    pub ternaries: Vec<Ternary>,
    pub provenance: Provenance,
}

impl ProbeDataset {
    /// Builds a dataset, rejecting foreign-property, invalid or duplicate ternaries.
    pub fn new(
        property: HierarchyProperty,
        split: Split,
        ternaries: Vec<Ternary>,
        provenance: Provenance,
    ) -> Result<Self, ProbeError> {
        let mut seen = HashSet::with_capacity(ternaries.len());
        for (i, t) in ternaries.iter().enumerate() {
            if t.property != property {
                return Err(ProbeError::PropertyMismatch {
                    line: i + 1,
                    message: format!("ternary of {} in a {property} dataset", t.property),
                });
            }
            t.check().map_err(|message| ProbeError::PropertyMismatch {
                line: i + 1,
                message,
            })?;
            if !seen.insert(t.identity()) {
                return Err(ProbeError::DuplicateTernary {
                    line: i + 1,
                    key: format!("{}/({}, {}, {})", t.taxonomy_id, t.n.id, t.l.id, t.r.id),
                });
            }
        }
        Ok(Self {
            property,
            split,
            ternaries,
            provenance,
        })
    }

    pub fn trainable(&self) -> bool {
        self.property.trainable()
    }

    pub fn len(&self) -> usize {
        self.ternaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ternaries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSet {
    pub train: ProbeDataset,
    pub dev: ProbeDataset,
    pub test: ProbeDataset,
}

impl SplitSet {
    pub fn get(&self, split: Split) -> &ProbeDataset {
        match split {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ProbeDataset> {
        [&self.train, &self.dev, &self.test].into_iter()
    }
}

pub fn taxonomy_digest(taxonomies: &[Taxonomy]) -> String {
    let mut buf = Vec::new();
    write_taxonomies(&mut buf, taxonomies).expect("writing to memory cannot fail");
    hex::encode(Sha256::digest(&buf))
}

/// Shuffles taxonomy ids with `config.seed` and cuts them at the ratio
/// boundaries. Each returned split is sorted by id.
///
/// The shuffle only depends on the seed and the id set, so every property
/// sees the same partition.
pub fn partition_taxonomies(
    ids: &[&str],
    config: &GenConfig,
) -> Result<[Vec<String>; 3], ProbeError> {
    config.validate()?;
    let mut ids: Vec<&str> = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.shuffle(&mut keyed_rng(config.seed, &[b"taxonomy-split"]));

    let total = ids.len();
    let [train, dev, _] = config.split_ratios;
    let first = ((total as f64 * train).round() as usize).min(total);
    let second = ((total as f64 * (train + dev)).round() as usize).clamp(first, total);
    let mut parts = [
        ids[..first].to_vec(),
        ids[first..second].to_vec(),
        ids[second..].to_vec(),
    ];
    for (split, (part, ratio)) in Split::ALL
        .into_iter()
        .zip(parts.iter_mut().zip(config.split_ratios))
    {
        if ratio > 0.0 && part.is_empty() {
            return Err(ProbeError::InsufficientTaxonomies {
                split,
                ratio,
                available: total,
            });
        }
        part.sort_unstable();
    }
    Ok(parts.map(|p| p.into_iter().map(str::to_string).collect()))
}

/// Samples `property` over every taxonomy and assigns whole taxonomies to
/// train/dev/test, so no concept appears in two splits.
pub fn build_splits(
    taxonomies: &[Taxonomy],
    property: HierarchyProperty,
    config: &GenConfig,
) -> Result<SplitSet, ProbeError> {
    let ids: Vec<&str> = taxonomies.iter().map(Taxonomy::id).collect();
    let parts = partition_taxonomies(&ids, config)?;
    let provenance = Provenance {
        seed: config.seed,
        max_per_node: config.max_per_node,
        source_digest: taxonomy_digest(taxonomies),
    };

    let [train, dev, test] = parts.map(|members| {
        let mut chosen: Vec<&Taxonomy> = taxonomies
            .iter()
            .filter(|t| members.binary_search_by(|m| m.as_str().cmp(t.id())).is_ok())
            .collect();
        chosen.sort_by(|a, b| a.id().cmp(b.id()));
        chosen
            .par_iter()
            .map(|t| sample_ternaries(t, property, config))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
    });
    Ok(SplitSet {
        train: ProbeDataset::new(property, Split::Train, train, provenance.clone())?,
        dev: ProbeDataset::new(property, Split::Dev, dev, provenance.clone())?,
        test: ProbeDataset::new(property, Split::Test, test, provenance)?,
    })
}
