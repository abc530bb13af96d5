use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rreh_core::dsl::{parse, serialize};
use rreh_core::model::{derive_byproducts, expand_hyperedges, CommodityId, TechGraph, TechId};
use rreh_core::par::{map_ordered, map_ordered_seq};
use rreh_core::synth::{random_graph, random_hub};

/// Every (producer, consumer) pair of every hyperedge, built by explicit loops.
fn brute_simple_edges(g: &TechGraph) -> Vec<(CommodityId, TechId, TechId)> {
    let mut out = Vec::new();
    for e in g.edges() {
        for p in &e.producers {
            for c in &e.consumers {
                out.push((e.commodity.clone(), p.clone(), c.clone()));
            }
        }
    }
    out
}

/// A commodity is a byproduct if some technology outputs it and no simple
/// edge carries it away from that technology.
fn brute_byproducts(g: &TechGraph) -> BTreeSet<CommodityId> {
    let simple = brute_simple_edges(g);
    let mut out = BTreeSet::new();
    for t in g.technologies() {
        for c in &t.outputs {
            if !simple.iter().any(|(k, p, _)| k == c && p == &t.id) {
                out.insert(c.clone());
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn expansion_and_byproducts_match_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 12, 20);
        prop_assert!(g.technologies().len() <= 12);
        prop_assert!(g.edges().len() <= 20);
        let expanded = expand_hyperedges(&g).unwrap();
        let expected: usize = g.edges().iter().map(|e| e.producers.len() * e.consumers.len()).sum();
        prop_assert_eq!(expanded.len(), expected);
        let brute = brute_simple_edges(&g);
        let got: Vec<_> = expanded.into_iter().map(|s| (s.commodity, s.producer, s.consumer)).collect();
        prop_assert_eq!(got, brute);
        prop_assert_eq!(derive_byproducts(&g).unwrap(), brute_byproducts(&g));
    }

    #[test]
    fn dsl_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hub = random_hub(&mut rng);
        let text = serialize(&hub);
        let doc = parse(&text, "generated.rreh").map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(&doc.hub, &hub);
        prop_assert_eq!(serialize(&doc.hub), text);
    }

    #[test]
    fn parallel_map_preserves_order(xs in proptest::collection::vec(any::<i64>(), 0..200)) {
        let f = |x: &i64| x.wrapping_mul(31).rotate_left(7);
        prop_assert_eq!(map_ordered(&xs, f), map_ordered_seq(&xs, f));
    }
}
