//! Enumeration of connected induced k-node subgraphs (simple occurrences).

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::canon::{canonical_form, CanonicalKey, Motif, RawMotif, MAX_MOTIF_NODES};
use crate::error::{Error, Result};
use crate::graph::{LabeledMultiGraph, NodeId, TypeId};

pub const DEFAULT_K_MIN: usize = 3;
pub const DEFAULT_K_MAX: usize = 5;
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationConfig {
    k_min: usize,
    k_max: usize,
    budget: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { k_min: DEFAULT_K_MIN, k_max: DEFAULT_K_MAX, budget: DEFAULT_BUDGET }
    }
}

impl EnumerationConfig {
    pub fn new(k_min: usize, k_max: usize, budget: usize) -> Result<Self> {
        if k_min < 3 || k_min > k_max || k_max > MAX_MOTIF_NODES {
            return Err(Error::Config(format!(
                "need 3 <= k_min <= k_max <= {MAX_MOTIF_NODES}, got k_min={k_min} k_max={k_max}"
            )));
        }
        if budget == 0 {
            return Err(Error::Config("occurrence budget must be at least 1".into()));
        }
        Ok(Self { k_min, k_max, budget })
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn budget(&self) -> usize {
        self.budget
    }
}

/// A connected induced subgraph of a graph, ignoring multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleOccurrence {
    motif: Arc<Motif>,
    node_map: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl SimpleOccurrence {
    /// Builds an occurrence from a motif and the graph nodes its canonical
    /// nodes map to. Edges are the motif edges carried over by `node_map`.
    pub fn from_motif(motif: Arc<Motif>, node_map: Vec<NodeId>) -> Self {
        let mut edges: Vec<(NodeId, NodeId)> = motif.edges().map(|(u, v)| (node_map[u], node_map[v])).collect();
        edges.sort_unstable();
        Self { motif, node_map, edges }
    }

    pub fn motif(&self) -> &Arc<Motif> {
        &self.motif
    }

    pub fn key(&self) -> &CanonicalKey {
        self.motif.key()
    }

    /// Graph node for each canonical motif node.
    pub fn node_map(&self) -> &[NodeId] {
        &self.node_map
    }

    /// Covered graph edges, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Number of edges, the occurrence weight.
    pub fn weight(&self) -> usize {
        self.edges.len()
    }

    pub fn sorted_nodes(&self) -> Vec<NodeId> {
        let mut v = self.node_map.clone();
        v.sort_unstable();
        v
    }

    /// Tie-break order: canonical key, then node map.
    pub fn tie_break_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(other.key()).then_with(|| self.node_map.cmp(&other.node_map))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub occurrences: Vec<SimpleOccurrence>,
    /// Set when the budget stopped enumeration early.
    pub truncated: bool,
}

/// Shares canonical forms between subgraphs with identical raw structure.
#[derive(Default)]
pub struct MotifCache {
    map: HashMap<RawMotif, (Arc<Motif>, Vec<usize>)>,
}

impl MotifCache {
    pub fn canonical(&mut self, raw: RawMotif) -> Result<(Arc<Motif>, Vec<usize>)> {
        if let Some(hit) = self.map.get(&raw) {
            return Ok(hit.clone());
        }
        let (m, order) = canonical_form(&raw, MAX_MOTIF_NODES)?;
        let entry = (Arc::new(m), order);
        self.map.insert(raw, entry.clone());
        Ok(entry)
    }
}

struct Dense<'g> {
    ids: Vec<NodeId>,
    types: Vec<TypeId>,
    /// undirected neighbors, no self-loops, ascending
    neighbors: Vec<Vec<usize>>,
    arcs: HashSet<(usize, usize)>,
    _graph: &'g LabeledMultiGraph,
}

impl<'g> Dense<'g> {
    fn new(g: &'g LabeledMultiGraph) -> Self {
        let ids: Vec<NodeId> = g.nodes().keys().copied().collect();
        let types: Vec<TypeId> = g.nodes().values().copied().collect();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut neighbors = vec![Vec::new(); ids.len()];
        let mut arcs = HashSet::new();
        for &(u, v) in g.edges().keys() {
            let (a, b) = (index[&u], index[&v]);
            arcs.insert((a, b));
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Self { ids, types, neighbors, arcs, _graph: g }
    }
}

/// Lists every connected induced subgraph of `g` with `k_min..=k_max`
/// nodes, smaller sizes first, each node set once. Within one size the
/// order follows an ESU tree rooted at ascending node ids.
pub fn enumerate_simple_occurrences(g: &LabeledMultiGraph, config: &EnumerationConfig) -> Enumeration {
    let mut cache = MotifCache::default();
    enumerate_with_cache(g, config, &mut cache)
}

pub fn enumerate_with_cache(g: &LabeledMultiGraph, config: &EnumerationConfig, cache: &mut MotifCache) -> Enumeration {
    let dense = Dense::new(g);
    let n = dense.ids.len();
    let mut out = Enumeration::default();
    if n < config.k_min {
        return out;
    }
    let mut walker = Esu {
        dense: &dense,
        closed: vec![0; n],
        sub: Vec::with_capacity(config.k_max),
        k: 0,
        root: 0,
        budget: config.budget,
        cache,
        out: &mut out,
    };
    'sizes: for k in config.k_min..=config.k_max.min(n) {
        walker.k = k;
        for root in 0..n {
            walker.root = root;
            let ext: Vec<usize> = dense.neighbors[root].iter().copied().filter(|&u| u > root).collect();
            walker.push(root);
            let go_on = walker.extend(&ext);
            walker.pop();
            if !go_on {
                break 'sizes;
            }
        }
    }
    out
}

struct Esu<'a, 'g> {
    dense: &'a Dense<'g>,
    /// how many nodes of `sub` have this node in their closed neighborhood
    closed: Vec<u32>,
    sub: Vec<usize>,
    k: usize,
    root: usize,
    budget: usize,
    cache: &'a mut MotifCache,
    out: &'a mut Enumeration,
}

impl Esu<'_, '_> {
    fn push(&mut self, v: usize) {
        self.sub.push(v);
        self.closed[v] += 1;
        for &u in &self.dense.neighbors[v] {
            self.closed[u] += 1;
        }
    }

    fn pop(&mut self) {
        let v = self.sub.pop().expect("non-empty");
        self.closed[v] -= 1;
        for &u in &self.dense.neighbors[v] {
            self.closed[u] -= 1;
        }
    }

    /// Returns false once the budget is exhausted.
    fn extend(&mut self, ext: &[usize]) -> bool {
        if self.sub.len() == self.k {
            return self.emit();
        }
        for (i, &w) in ext.iter().enumerate() {
            let mut next: Vec<usize> = ext[i + 1..].to_vec();
            for &u in &self.dense.neighbors[w] {
                if u > self.root && self.closed[u] == 0 {
                    next.push(u);
                }
            }
            self.push(w);
            let go_on = self.extend(&next);
            self.pop();
            if !go_on {
                return false;
            }
        }
        true
    }

    fn emit(&mut self) -> bool {
        if self.out.occurrences.len() == self.budget {
            self.out.truncated = true;
            return false;
        }
        let mut nodes = self.sub.clone();
        nodes.sort_unstable();
        let types: Vec<TypeId> = nodes.iter().map(|&v| self.dense.types[v]).collect();
        let mut edges = Vec::new();
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate() {
                if self.dense.arcs.contains(&(u, v)) {
                    edges.push((a, b));
                }
            }
        }
        let (motif, order) =
            self.cache.canonical(RawMotif::new(types, edges)).expect("connected induced subgraph canonicalizes");
        let node_map = order.iter().map(|&i| self.dense.ids[nodes[i]]).collect();
        self.out.occurrences.push(SimpleOccurrence::from_motif(motif, node_map));
        true
    }
}
