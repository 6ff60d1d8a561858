mod common;

use std::collections::BTreeSet;

use motifmdl::bench::{auc, average_precision};
use motifmdl::canon::MAX_MOTIF_NODES;
use motifmdl::encoding::{decode_graph, encode_graph, graph_length, motif_encoding_length, universal_integer_length};
use motifmdl::pipeline::{fit, FitConfig};
use motifmdl::{
    canonical_form, enumerate_simple_occurrences, is_isomorphic, EnumerationConfig, GraphDatabase, LabeledMultiGraph,
    NodeId, RawMotif,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn raw_motif(max_n: usize, types: usize) -> impl Strategy<Value = RawMotif> {
    (2..=max_n).prop_flat_map(move |n| {
        (proptest::collection::vec(0..types, n), proptest::collection::btree_set((0..n, 0..n), 1..=n * n))
            .prop_map(|(t, e)| RawMotif::new(t, e.into_iter().collect()))
    })
}

fn connected(raw: &RawMotif) -> bool {
    let n = raw.node_types.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in &raw.edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Isomorphism by trying every bijection.
fn brute_isomorphic(a: &RawMotif, b: &RawMotif) -> bool {
    let n = a.node_types.len();
    if n != b.node_types.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let target: BTreeSet<_> = b.edges.iter().copied().collect();
    permutations(n).into_iter().any(|p| {
        let q = a.permuted(&p);
        q.node_types == b.node_types && q.edges.iter().copied().collect::<BTreeSet<_>>() == target
    })
}

fn graph_from(types: &[usize], edges: &[(usize, usize, u32)]) -> LabeledMultiGraph {
    let mut g = LabeledMultiGraph::new("g");
    for (i, &t) in types.iter().enumerate() {
        g.add_node(i as NodeId, t).unwrap();
    }
    for &(u, v, m) in edges {
        if g.multiplicity(u as NodeId, v as NodeId) == 0 {
            g.add_edge(u as NodeId, v as NodeId, m).unwrap();
        }
    }
    g
}

fn multigraph(max_n: usize, types: usize, max_mult: u32) -> impl Strategy<Value = LabeledMultiGraph> {
    (3..=max_n).prop_flat_map(move |n| {
        (proptest::collection::vec(0..types, n), proptest::collection::vec((0..n, 0..n, 1..=max_mult), 1..=2 * n))
            .prop_map(|(t, e)| graph_from(&t, &e))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_form_ignores_node_order(raw in raw_motif(6, 3), seed in any::<u64>()) {
        prop_assume!(connected(&raw));
        let (m, order) = canonical_form(&raw, MAX_MOTIF_NODES).unwrap();
        let mut perm: Vec<usize> = (0..raw.node_types.len()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let (m2, _) = canonical_form(&raw.permuted(&perm), MAX_MOTIF_NODES).unwrap();
        prop_assert_eq!(m.key(), m2.key());
        prop_assert_eq!(&m, &m2);
        let (again, _) = canonical_form(&m.to_raw(), MAX_MOTIF_NODES).unwrap();
        prop_assert_eq!(&again, &m);
        // `order` maps canonical nodes back onto raw nodes
        for (i, &r) in order.iter().enumerate() {
            prop_assert_eq!(m.node_types()[i], raw.node_types[r]);
        }
    }

    #[test]
    fn canonical_keys_match_bijection_oracle(a in raw_motif(5, 2), b in raw_motif(5, 2)) {
        prop_assume!(connected(&a) && connected(&b));
        let (ma, _) = canonical_form(&a, MAX_MOTIF_NODES).unwrap();
        let (mb, _) = canonical_form(&b, MAX_MOTIF_NODES).unwrap();
        let oracle = brute_isomorphic(&a, &b);
        prop_assert_eq!(ma.key() == mb.key(), oracle);
        prop_assert_eq!(is_isomorphic(&ma, &mb), oracle);
    }

    #[test]
    fn canonical_keys_of_relabeled_copies_agree(raw in raw_motif(5, 2), seed in any::<u64>()) {
        prop_assume!(connected(&raw));
        let mut perm: Vec<usize> = (0..raw.node_types.len()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let other = raw.permuted(&perm);
        prop_assert!(brute_isomorphic(&raw, &other));
        let (a, _) = canonical_form(&raw, MAX_MOTIF_NODES).unwrap();
        let (b, _) = canonical_form(&other, MAX_MOTIF_NODES).unwrap();
        prop_assert_eq!(a.key(), b.key());
    }

    #[test]
    fn enumeration_matches_subset_oracle(g in multigraph(8, 2, 2), k_max in 3usize..=4) {
        let config = EnumerationConfig::new(3, k_max, 1_000_000).unwrap();
        let found = enumerate_simple_occurrences(&g, &config);
        prop_assert!(!found.truncated);
        let mut got = BTreeSet::new();
        for o in &found.occurrences {
            prop_assert!(got.insert(o.sorted_nodes()), "node set listed twice");
            // the occurrence maps the motif onto the induced subgraph
            let mapped: BTreeSet<(NodeId, NodeId)> =
                o.motif().edges().map(|(a, b)| (o.node_map()[a], o.node_map()[b])).collect();
            let induced: BTreeSet<(NodeId, NodeId)> = g
                .edges()
                .keys()
                .filter(|(u, v)| o.node_map().contains(u) && o.node_map().contains(v))
                .copied()
                .collect();
            prop_assert_eq!(&mapped, &induced);
            for (i, &v) in o.node_map().iter().enumerate() {
                prop_assert_eq!(g.node_type(v), Some(o.motif().node_types()[i]));
            }
        }
        let nodes: Vec<NodeId> = g.nodes().keys().copied().collect();
        let mut want = BTreeSet::new();
        for mask in 1u32..(1 << nodes.len()) {
            let k = mask.count_ones() as usize;
            if k < 3 || k > k_max {
                continue;
            }
            let sub: Vec<NodeId> = (0..nodes.len()).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i]).collect();
            let idx = |v: NodeId| sub.iter().position(|&x| x == v).unwrap();
            let raw = RawMotif::new(
                sub.iter().map(|&v| g.node_type(v).unwrap()).collect(),
                g.edges().keys().filter(|(u, v)| sub.contains(u) && sub.contains(v)).map(|&(u, v)| (idx(u), idx(v))).collect(),
            );
            if !raw.edges.is_empty() && connected(&raw) {
                want.insert(sub);
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn universal_code_is_monotone(k in 1u64..1_000_000) {
        let a = universal_integer_length(k).unwrap();
        let b = universal_integer_length(k + 1).unwrap();
        prop_assert!(b >= a);
        prop_assert!(a >= universal_integer_length(1).unwrap());
    }

    #[test]
    fn auc_and_ap_ignore_monotone_transforms(
        points in proptest::collection::vec((-100.0f64..100.0, any::<bool>()), 2..60),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let labels: Vec<bool> = points.iter().map(|p| p.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let scores: Vec<f64> = points.iter().map(|p| p.0).collect();
        let moved: Vec<f64> = scores.iter().map(|s| (s * scale + shift).powi(3)).collect();
        let order_kept = scores.iter().zip(&moved).all(|(a, x)| {
            scores.iter().zip(&moved).all(|(b, y)| (a < b) == (x < y) && (a == b) == (x == y))
        });
        prop_assume!(order_kept);
        prop_assert!((auc(&scores, &labels).unwrap() - auc(&moved, &labels).unwrap()).abs() < 1e-12);
        prop_assert!((average_precision(&scores, &labels).unwrap() - average_precision(&moved, &labels).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn encoding_round_trips_and_ignores_node_ids(seed in any::<u64>(), weighted in any::<bool>(), shift in 1u32..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let db = common::random_db(&mut rng, 12, 3);
        let cfg = FitConfig { enumeration: EnumerationConfig::new(3, 4, 100_000).unwrap(), weighted };
        let model = fit(&db, &cfg).unwrap();
        for (g, cover) in db.graphs().iter().zip(&model.covers) {
            let (stream, bits) = encode_graph(g, &model.table, cover).unwrap();
            let back = decode_graph(&stream, &model.table, db.alphabet()).unwrap();
            prop_assert_eq!(&back, &g.without_isolated_nodes());
            prop_assert!(bits > 0.0);
        }
        // renumbering every node leaves every graph's length unchanged
        let relabeled: Vec<LabeledMultiGraph> = db.graphs().iter().map(|g| {
            let mut h = LabeledMultiGraph::new(g.id());
            let new_id = |v: NodeId| (v * 7 + shift) % 100_003;
            for (&v, &t) in g.nodes() {
                h.add_node(new_id(v), t).unwrap();
            }
            for (&(u, v), &m) in g.edges() {
                h.add_edge(new_id(u), new_id(v), m).unwrap();
            }
            h
        }).collect();
        let db2 = GraphDatabase::new(db.alphabet().clone(), relabeled).unwrap();
        let model2 = fit(&db2, &cfg).unwrap();
        let lens: Vec<f64> = db.graphs().iter().zip(&model.covers).map(|(g, c)| graph_length(g, &model.table, c).unwrap()).collect();
        let lens2: Vec<f64> = db2.graphs().iter().zip(&model2.covers).map(|(g, c)| graph_length(g, &model2.table, c).unwrap()).collect();
        prop_assert!((model.state.total - model2.state.total).abs() <= 1e-6 * model.state.total.max(1.0));
        for (a, b) in lens.iter().zip(&lens2) {
            prop_assert!((a - b).abs() <= 1e-6 * a.max(1.0));
        }
    }

    #[test]
    fn motif_length_ignores_node_order(raw in raw_motif(6, 4), seed in any::<u64>()) {
        prop_assume!(connected(&raw));
        let mut perm: Vec<usize> = (0..raw.node_types.len()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let (a, _) = canonical_form(&raw, MAX_MOTIF_NODES).unwrap();
        let (b, _) = canonical_form(&raw.permuted(&perm), MAX_MOTIF_NODES).unwrap();
        prop_assert!((motif_encoding_length(&a, 4) - motif_encoding_length(&b, 4)).abs() < 1e-12);
    }
}

#[test]
fn known_motif_lengths() {
    let chain = canonical_form(&RawMotif::new(vec![0, 1, 2], vec![(0, 1), (1, 2)]), MAX_MOTIF_NODES).unwrap().0;
    assert!((motif_encoding_length(&chain, 3) - 23.003).abs() < 1e-3);
    let edge = canonical_form(&RawMotif::new(vec![0, 1], vec![(0, 1)]), MAX_MOTIF_NODES).unwrap().0;
    assert!((motif_encoding_length(&edge, 2) - 11.556).abs() < 1e-3);
}
