//! Hierarchy-property probes over rooted taxonomies.
//!
//! The crate turns taxonomies into ternary probes `(n, l, r)` where the
//! fixed node `n` must be closer to `l` than to `r`, and scores concept
//! embedding tables against those probes.
//!
//! ```text
//! taxonomy file --parse--> Taxonomy --enumerate/sample--> Ternary
//!     --build_splits--> ProbeDataset (train/dev/test)
//!     --evaluate(EmbeddingTable)--> PropertyReport
//! ```

pub mod embedding;
pub mod eval;
pub mod probe;
pub mod property;
mod seed;
pub mod synthetic;
pub mod taxonomy;

pub use embedding::{concept_key, distance, DistanceMethod, EmbeddingError, EmbeddingTable};
pub use eval::{
    aggregate_runs, evaluate, judge_ternary, random_baseline, render_aggregate, render_report,
    EvalError, Judgment, MissingPolicy, PropertyReport, PropertyScore, ReportFormat, RunAggregate,
    RunSummary,
};
pub use probe::{
    build_splits, enumerate_ternaries, read_probes, render_concept_text, sample_ternaries,
    taxonomy_digest, write_probes, GenConfig, ProbeDataset, ProbeError, Provenance, Split,
    SplitSet, Ternary,
};
pub use property::{HierarchyProperty, PropertyGroup};
pub use taxonomy::{
    parse_taxonomies, write_taxonomies, ConceptNode, RelationKind, RelationSet, Taxonomy,
    TaxonomyError, TaxonomyRecord, Violation,
};
