//! Random taxonomies and embedding tables for tests, benchmarks and demos.

use rand::Rng;

use crate::embedding::{concept_key, EmbeddingTable};
use crate::taxonomy::{ConceptNode, Taxonomy, TaxonomyRecord};

/// Random tree with at most `max_nodes` nodes and height at most `max_height`
/// edges. Each node gets between 1 and `max_children` children until the node
/// budget runs out; nodes at the height limit are leaves.
pub fn random_taxonomy<R: Rng>(
    rng: &mut R,
    taxonomy_id: &str,
    max_nodes: usize,
    max_height: usize,
    max_children: usize,
) -> Taxonomy {
    assert!(max_nodes >= 1 && max_children >= 1);
    let mut nodes = vec![ConceptNode::new(
        "n0",
        format!("{taxonomy_id} concept 0"),
        "",
    )];
    let mut depth = vec![0usize];
    let mut edges = Vec::new();
    let mut frontier = 0;
    while frontier < nodes.len() && nodes.len() < max_nodes {
        if depth[frontier] < max_height {
            let k = rng.random_range(1..=max_children);
            for _ in 0..k {
                if nodes.len() >= max_nodes {
                    break;
                }
                let id = format!("n{}", nodes.len());
                let definition = if rng.random_bool(0.8) {
                    format!("gloss for {id} of {taxonomy_id}")
                } else {
                    String::new()
                };
                nodes.push(ConceptNode::new(
                    id.clone(),
                    format!("{taxonomy_id} concept {}", nodes.len()),
                    definition,
                ));
                depth.push(depth[frontier] + 1);
                edges.push((id, nodes[frontier].id.clone()));
            }
        }
        frontier += 1;
    }
    Taxonomy::try_from(TaxonomyRecord {
        taxonomy_id: taxonomy_id.to_string(),
        nodes,
        edges,
        root: None,
    })
    .expect("generated record is a tree")
}

/// Table of independent standard-normal-ish vectors (sum of uniforms) for
/// every node of every taxonomy.
pub fn random_table<R: Rng>(
    rng: &mut R,
    taxonomies: &[Taxonomy],
    dimension: usize,
) -> EmbeddingTable {
    let rows = taxonomies.iter().flat_map(|t| {
        t.nodes()
            .iter()
            .map(|n| concept_key(t.id(), &n.id))
            .collect::<Vec<_>>()
    });
    let rows: Vec<(String, Vec<f64>)> = rows
        .map(|k| (k, (0..dimension).map(|_| gaussian(rng)).collect()))
        .collect();
    EmbeddingTable::from_rows(dimension, rows).expect("non-empty finite table")
}

/// Table where each node's vector is its parent's vector plus a random
/// offset, so taxonomic neighbors are close in space.
pub fn hierarchical_table<R: Rng>(
    rng: &mut R,
    taxonomies: &[Taxonomy],
    dimension: usize,
    step: f64,
) -> EmbeddingTable {
    let mut rows = Vec::new();
    for t in taxonomies {
        let mut vectors: std::collections::HashMap<&str, Vec<f64>> = Default::default();
        let mut order: Vec<&ConceptNode> = t.nodes().iter().collect();
        order.sort_by_key(|n| t.depth(&n.id).expect("own node"));
        for n in order {
            let base = match t.parent_of(&n.id).expect("own node") {
                Some(p) => vectors[p.id.as_str()].clone(),
                None => (0..dimension).map(|_| gaussian(rng)).collect(),
            };
            let v: Vec<f64> = base.iter().map(|x| x + step * gaussian(rng)).collect();
            rows.push((concept_key(t.id(), &n.id), v.clone()));
            vectors.insert(&n.id, v);
        }
    }
    EmbeddingTable::from_rows(dimension, rows).expect("non-empty finite table")
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0
}
