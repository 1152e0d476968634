//! Ternary probe generation, train/dev/test splitting, and the probe file format.

mod generate;
mod io;
mod split;

pub use generate::{enumerate_ternaries, sample_ternaries};
pub use io::{read_probes, write_probes, FORMAT_VERSION};
pub use split::{
    build_splits, partition_taxonomies, taxonomy_digest, ProbeDataset, Provenance, Split, SplitSet,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::concept_key;
use crate::property::HierarchyProperty;
use crate::taxonomy::ConceptNode;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("line {line}: malformed probe record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("line {line}: {message}")]
    PropertyMismatch { line: usize, message: String },
    #[error("line {line}: duplicate ternary {key}")]
    DuplicateTernary { line: usize, key: String },
    #[error("probe file has no header record")]
    MissingHeader,
    #[error("unsupported probe format version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("split `{split}` has ratio {ratio} but receives no taxonomies out of {available}")]
    InsufficientTaxonomies {
        split: Split,
        ratio: f64,
        available: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One probe: the fixed node `n` should be closer to `l` than to `r`.
///
/// Edge distances are recorded at generation time so evaluation never needs
/// the source taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ternary {
    pub property: HierarchyProperty,
    pub taxonomy_id: String,
    pub n: ConceptNode,
    pub l: ConceptNode,
    pub r: ConceptNode,
    pub dist_nl: usize,
    pub dist_nr: usize,
}

impl Ternary {
    /// Checks the distance table for the property's two relations and the
    /// ordering `dist_nl < dist_nr` (equality for A-S).
    pub fn check(&self) -> Result<(), String> {
        let p = self.property;
        if self.n.id == self.l.id || self.n.id == self.r.id || self.l.id == self.r.id {
            return Err(format!(
                "{p}: nodes ({}, {}, {}) are not pairwise distinct",
                self.n.id, self.l.id, self.r.id
            ));
        }
        if !p.left().distances().contains(&self.dist_nl) {
            return Err(format!(
                "{p}: dist_nl = {} is not a {:?} distance",
                self.dist_nl,
                p.left()
            ));
        }
        if !p.right().distances().contains(&self.dist_nr) {
            return Err(format!(
                "{p}: dist_nr = {} is not a {:?} distance",
                self.dist_nr,
                p.right()
            ));
        }
        let ordered = if p == HierarchyProperty::AncestorSibling {
            self.dist_nl == self.dist_nr
        } else {
            self.dist_nl < self.dist_nr
        };
        if !ordered {
            return Err(format!(
                "{p}: distances {} and {} violate the property ordering",
                self.dist_nl, self.dist_nr
            ));
        }
        Ok(())
    }

    /// Embedding-table keys of `n`, `l`, `r`.
    pub fn concept_keys(&self) -> [String; 3] {
        [&self.n, &self.l, &self.r].map(|c| concept_key(&self.taxonomy_id, &c.id))
    }

    pub(crate) fn identity(&self) -> (HierarchyProperty, &str, &str, &str, &str) {
        (
            self.property,
            &self.taxonomy_id,
            &self.n.id,
            &self.l.id,
            &self.r.id,
        )
    }
}

/// Sampling and splitting parameters. Splits are always made over whole
/// taxonomies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub max_per_node: Option<usize>,
    pub split_ratios: [f64; 3],
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            max_per_node: None,
            split_ratios: [0.7, 0.15, 0.15],
        }
    }
}

impl GenConfig {
    pub fn new(
        seed: u64,
        max_per_node: Option<usize>,
        split_ratios: [f64; 3],
    ) -> Result<Self, ProbeError> {
        let config = Self {
            seed,
            max_per_node,
            split_ratios,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ProbeError> {
        if self.max_per_node == Some(0) {
            return Err(ProbeError::InvalidConfig(
                "max_per_node must be positive".into(),
            ));
        }
        if self.split_ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(ProbeError::InvalidConfig(format!(
                "split ratios must be non-negative, got {:?}",
                self.split_ratios
            )));
        }
        let sum: f64 = self.split_ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ProbeError::InvalidConfig(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Text fed to an encoder for a concept: `"<name> is defined as <definition>"`,
/// or the bare name when the gloss is empty. Special tokens are left to the
/// encoder.
pub fn render_concept_text(node: &ConceptNode) -> String {
    let definition = node.definition.trim();
    if definition.is_empty() {
        node.name.clone()
    } else {
        format!("{} is defined as {}", node.name, definition)
    }
}
