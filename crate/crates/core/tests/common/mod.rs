#![allow(dead_code)]

use motifmdl::{GraphDatabase, LabeledMultiGraph, NodeId, TypeAlphabet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random typed multigraph with `n` nodes, about `m` distinct edges and
/// multiplicities up to `max_mult`.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    id: &str,
    n: usize,
    m: usize,
    types: usize,
    max_mult: u32,
    self_loops: bool,
) -> LabeledMultiGraph {
    let mut g = LabeledMultiGraph::new(id);
    for v in 0..n {
        g.add_node(v as NodeId, rng.gen_range(0..types)).unwrap();
    }
    for _ in 0..m {
        let u = rng.gen_range(0..n) as NodeId;
        let v = rng.gen_range(0..n) as NodeId;
        if (u == v && !self_loops) || g.multiplicity(u, v) > 0 {
            continue;
        }
        g.add_edge(u, v, rng.gen_range(1..=max_mult)).unwrap();
    }
    g
}

pub fn alphabet(types: usize) -> TypeAlphabet {
    TypeAlphabet::from_labels((0..types).map(|t| format!("T{t}"))).unwrap()
}

/// Database of `count` random graphs; graphs without edges are dropped.
pub fn random_db(rng: &mut ChaCha8Rng, count: usize, types: usize) -> GraphDatabase {
    let mut graphs = Vec::new();
    while graphs.len() < count {
        let n = rng.gen_range(2..=9);
        let m = rng.gen_range(1..=2 * n);
        let g = random_graph(rng, &format!("g{}", graphs.len()), n, m, types, 3, true);
        if g.edge_count() > 0 {
            graphs.push(g);
        }
    }
    GraphDatabase::new(alphabet(types), graphs).unwrap()
}
