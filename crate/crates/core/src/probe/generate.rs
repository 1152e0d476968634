use rand::seq::index;

use super::{GenConfig, Ternary};
use crate::property::HierarchyProperty;
use crate::seed::keyed_rng;
use crate::taxonomy::{RelationIdx, Taxonomy};

/// Every ternary of `property` in `tax`, sorted by `(n, l, r)` ids.
pub fn enumerate_ternaries(tax: &Taxonomy, property: HierarchyProperty) -> Vec<Ternary> {
    tax.sorted_indices()
        .into_iter()
        .flat_map(|n| node_ternaries(tax, n, &tax.relations_idx(n), property))
        .collect()
}

/// At most `config.max_per_node` ternaries per fixed node, drawn uniformly
/// without replacement. The generator for each node is keyed by
/// `(seed, taxonomy_id, node id, property)`, so output does not depend on
/// iteration order.
pub fn sample_ternaries(
    tax: &Taxonomy,
    property: HierarchyProperty,
    config: &GenConfig,
) -> Vec<Ternary> {
    let mut out = Vec::new();
    for n in tax.sorted_indices() {
        let mut candidates = node_ternaries(tax, n, &tax.relations_idx(n), property);
        match config.max_per_node {
            Some(cap) if candidates.len() > cap => {
                let mut rng = keyed_rng(
                    config.seed,
                    &[
                        tax.id().as_bytes(),
                        tax.node_at(n).id.as_bytes(),
                        property.as_str().as_bytes(),
                    ],
                );
                let mut picked = index::sample(&mut rng, candidates.len(), cap).into_vec();
                picked.sort_unstable();
                let mut slots: Vec<Option<Ternary>> = candidates.into_iter().map(Some).collect();
                out.extend(picked.into_iter().filter_map(|i| slots[i].take()));
            }
            _ => out.append(&mut candidates),
        }
    }
    out
}

fn node_ternaries(
    tax: &Taxonomy,
    n: usize,
    rel: &RelationIdx,
    property: HierarchyProperty,
) -> Vec<Ternary> {
    let lefts = rel.members(property.left());
    let rights = rel.members(property.right());
    let mut out = Vec::with_capacity(lefts.len() * rights.len());
    for &l in lefts {
        let dist_nl = tax.distance_idx(n, l);
        for &r in rights {
            out.push(Ternary {
                property,
                taxonomy_id: tax.id().to_string(),
                n: tax.node_at(n).clone(),
                l: tax.node_at(l).clone(),
                r: tax.node_at(r).clone(),
                dist_nl,
                dist_nr: tax.distance_idx(n, r),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{ConceptNode, TaxonomyRecord};
    use HierarchyProperty::*;

    fn tree(edges: &[(&str, &str)]) -> Taxonomy {
        let mut ids: Vec<&str> = Vec::new();
        for (c, p) in edges {
            for id in [*p, *c] {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        Taxonomy::try_from(TaxonomyRecord {
            taxonomy_id: "t".into(),
            nodes: ids.iter().map(|i| ConceptNode::new(*i, *i, "")).collect(),
            edges: edges
                .iter()
                .map(|(c, p)| (c.to_string(), p.to_string()))
                .collect(),
            root: None,
        })
        .unwrap()
    }

    fn seven() -> Taxonomy {
        tree(&[
            ("A", "R"),
            ("B", "R"),
            ("a1", "A"),
            ("a2", "A"),
            ("x1", "a1"),
            ("x2", "a1"),
        ])
    }

    fn triples(ts: &[Ternary]) -> Vec<(&str, &str, &str)> {
        ts.iter()
            .map(|t| (t.n.id.as_str(), t.l.id.as_str(), t.r.id.as_str()))
            .collect()
    }

    // Expected sets below come from applying the relation definitions by hand
    // to the seven-node tree. a1, a2 (ancestor R) and x1, x2 (ancestor A) are
    // the depth-2+ nodes; B is the uncle of a1/a2 and a2 the uncle of x1/x2.
    #[test]
    fn parent_ancestor_on_seven_node_tree() {
        let ts = enumerate_ternaries(&seven(), ParentAncestor);
        assert_eq!(
            triples(&ts),
            vec![
                ("a1", "A", "R"),
                ("a2", "A", "R"),
                ("x1", "a1", "A"),
                ("x2", "a1", "A"),
            ]
        );
    }

    #[test]
    fn sibling_far_on_seven_node_tree() {
        let ts = enumerate_ternaries(&seven(), SiblingFar);
        assert_eq!(
            triples(&ts),
            vec![
                ("a1", "a2", "B"),
                ("a2", "a1", "B"),
                ("x1", "x2", "a2"),
                ("x2", "x1", "a2"),
            ]
        );
        assert!(ts.iter().all(|t| t.dist_nl == 2 && t.dist_nr == 3));
    }

    #[test]
    fn depth_one_tree_has_no_ancestor_or_far_ternaries() {
        let t = tree(&[("a", "R"), ("b", "R"), ("c", "R")]);
        for p in [
            ParentAncestor,
            ParentFar,
            AncestorSibling,
            AncestorFar,
            SiblingFar,
        ] {
            assert!(enumerate_ternaries(&t, p).is_empty(), "{p}");
        }
        assert_eq!(enumerate_ternaries(&t, ParentSibling).len(), 6);
    }

    #[test]
    fn uncapped_sample_equals_enumeration() {
        let t = seven();
        for p in HierarchyProperty::ALL {
            assert_eq!(
                sample_ternaries(&t, p, &GenConfig::default()),
                enumerate_ternaries(&t, p)
            );
        }
    }

    #[test]
    fn cap_of_one_keeps_one_per_node() {
        // x1 and x2 each get two S-F ternaries once a2 has a child.
        let t = tree(&[
            ("A", "R"),
            ("B", "R"),
            ("a1", "A"),
            ("a2", "A"),
            ("x1", "a1"),
            ("x2", "a1"),
            ("y1", "a2"),
        ]);
        let all = enumerate_ternaries(&t, SiblingFar);
        assert_eq!(all.len(), 6);
        let config = GenConfig {
            max_per_node: Some(1),
            ..GenConfig::default()
        };
        let picked = sample_ternaries(&t, SiblingFar, &config);
        let nodes: Vec<&str> = picked.iter().map(|t| t.n.id.as_str()).collect();
        assert_eq!(nodes, vec!["a1", "a2", "x1", "x2"]);
        assert!(picked.iter().all(|p| all.contains(p)));
        assert_eq!(picked, sample_ternaries(&t, SiblingFar, &config));
    }
}
