use std::collections::HashSet;

use hierprobe_core::synthetic::{random_table, random_taxonomy};
use hierprobe_core::{
    enumerate_ternaries, evaluate, judge_ternary, parse_taxonomies, sample_ternaries,
    write_taxonomies, DistanceMethod, GenConfig, HierarchyProperty, Judgment, MissingPolicy,
    ProbeDataset, Provenance, Split, Taxonomy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree(seed: u64, max_nodes: usize, max_height: usize) -> Taxonomy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_taxonomy(&mut rng, &format!("t{seed}"), max_nodes, max_height, 4)
}

fn dataset(property: HierarchyProperty, ternaries: Vec<hierprobe_core::Ternary>) -> ProbeDataset {
    let prov = Provenance {
        seed: 0,
        max_per_node: None,
        source_digest: String::new(),
    };
    ProbeDataset::new(property, Split::Test, ternaries, prov).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_distance_is_a_tree_metric(seed in any::<u64>()) {
        let t = tree(seed, 25, 4);
        let ids: Vec<&str> = t.nodes().iter().map(|n| n.id.as_str()).collect();
        for a in &ids {
            prop_assert_eq!(t.edge_distance(a, a).unwrap(), 0);
            for b in &ids {
                let ab = t.edge_distance(a, b).unwrap();
                prop_assert_eq!(ab, t.edge_distance(b, a).unwrap());
                if a != b {
                    prop_assert!(ab > 0);
                }
                for c in &ids {
                    prop_assert!(ab <= t.edge_distance(a, c).unwrap() + t.edge_distance(c, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn relation_sets_respect_distance_table(seed in any::<u64>()) {
        let t = tree(seed, 50, 4);
        for node in t.nodes() {
            let n = node.id.as_str();
            let rel = t.relations_of(n).unwrap();
            let depth = t.depth(n).unwrap();
            prop_assert_eq!(rel.parent.is_none(), depth == 0);
            prop_assert_eq!(rel.ancestor.is_none(), depth < 2);
            if let Some(p) = &rel.parent {
                prop_assert_eq!(t.edge_distance(n, p).unwrap(), 1);
            }
            if let Some(a) = &rel.ancestor {
                prop_assert_eq!(t.edge_distance(n, a).unwrap(), 2);
            }
            for s in &rel.siblings {
                prop_assert_eq!(t.edge_distance(n, s).unwrap(), 2);
            }
            for f in &rel.far_relatives {
                let d = t.edge_distance(n, f).unwrap();
                prop_assert!(d == 3 || d == 4);
            }
            let mut seen = HashSet::new();
            seen.insert(n);
            for id in rel.parent.iter().chain(&rel.ancestor).chain(&rel.siblings).chain(&rel.far_relatives) {
                prop_assert!(seen.insert(id.as_str()), "{} repeated for {}", id, n);
            }
        }
    }

    #[test]
    fn taxonomy_file_round_trip(seeds in proptest::collection::vec(any::<u64>(), 1..5)) {
        let mut taxes: Vec<Taxonomy> = Vec::new();
        for (i, s) in seeds.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(*s);
            taxes.push(random_taxonomy(&mut rng, &format!("tax{i}"), 30, 3, 3));
        }
        let mut buf = Vec::new();
        write_taxonomies(&mut buf, &taxes).unwrap();
        prop_assert_eq!(parse_taxonomies(buf.as_slice()).unwrap(), taxes);
    }

    #[test]
    fn samples_are_capped_subsets(seed in any::<u64>(), cap in 1usize..4) {
        let t = tree(seed, 50, 3);
        let config = GenConfig { seed, max_per_node: Some(cap), ..GenConfig::default() };
        for p in HierarchyProperty::ALL {
            let all = enumerate_ternaries(&t, p);
            let picked = sample_ternaries(&t, p, &config);
            let all_set: HashSet<_> = all.iter().collect();
            prop_assert!(picked.iter().all(|x| all_set.contains(x)));
            for node in t.nodes() {
                let available = all.iter().filter(|x| x.n.id == node.id).count();
                let chosen = picked.iter().filter(|x| x.n.id == node.id).count();
                prop_assert_eq!(chosen, available.min(cap));
            }
        }
    }

    #[test]
    fn swapping_sides_complements_accuracy(seed in any::<u64>()) {
        let t = tree(seed, 40, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let table = random_table(&mut rng, std::slice::from_ref(&t), 8);
        let p = HierarchyProperty::ParentSibling;
        let ts = enumerate_ternaries(&t, p);
        prop_assume!(!ts.is_empty());
        // Swapped ternaries violate the distance table, so judge them directly.
        let swapped: Vec<_> = ts.iter().cloned().map(|mut x| {
            std::mem::swap(&mut x.l, &mut x.r);
            x
        }).collect();
        for m in [DistanceMethod::Cosine, DistanceMethod::Euclidean] {
            let rep = evaluate(&[dataset(p, ts.clone())], &table, m, MissingPolicy::Error).unwrap();
            let acc = rep.accuracy(p).unwrap();
            let correct_swapped = swapped
                .iter()
                .filter(|x| judge_ternary(&table, x, m).unwrap() == Judgment::Correct)
                .count();
            let ties = ts.iter().filter(|x| {
                let [n, l, r] = x.concept_keys();
                let (n, l, r) = (table.get(&n).unwrap(), table.get(&l).unwrap(), table.get(&r).unwrap());
                hierprobe_core::distance(n, l, m).unwrap() == hierprobe_core::distance(n, r, m).unwrap()
            }).count();
            let total = ts.len() as f64;
            let expected = 1.0 - acc - ties as f64 / total;
            prop_assert!((correct_swapped as f64 / total - expected).abs() < 1e-12);
        }
    }
}
