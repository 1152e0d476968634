//! Fixed synthetic workloads shared by the criterion benches.

use hierprobe_core::synthetic::{hierarchical_table, random_taxonomy};
use hierprobe_core::{
    build_splits, EmbeddingTable, GenConfig, HierarchyProperty, ProbeDataset, Taxonomy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn taxonomies(count: usize, seed: u64) -> Vec<Taxonomy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_taxonomy(&mut rng, &format!("tax{i:04}"), 50, 3, 5))
        .collect()
}

/// All six properties over `taxonomies`, everything in the train split.
pub fn datasets(taxonomies: &[Taxonomy]) -> Vec<ProbeDataset> {
    let config = GenConfig::new(42, None, [1.0, 0.0, 0.0]).expect("valid config");
    HierarchyProperty::ALL
        .iter()
        .map(|p| {
            build_splits(taxonomies, *p, &config)
                .expect("one split")
                .train
        })
        .collect()
}

pub fn table(taxonomies: &[Taxonomy], dimension: usize) -> EmbeddingTable {
    hierarchical_table(
        &mut ChaCha8Rng::seed_from_u64(7),
        taxonomies,
        dimension,
        0.5,
    )
}
