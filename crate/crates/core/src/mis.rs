//! Non-overlapping occurrence selection: the explicit occurrence graph with
//! greedy (W)MIS, the compound-node greedy that works on simple occurrences
//! directly, and an exhaustive oracle for small instances.
//!
//! Both greedy variants share one selection rule. Unweighted: smallest
//! current degree. Weighted: largest `w / (min(w, deg) * max_nbr_w)`, where
//! an isolated node scores `w`. Ties go to the smallest motif key, then the
//! smallest node map.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::canon::{CanonicalKey, TypedEdge};
use crate::enumerate::SimpleOccurrence;
use crate::error::{Error, Result};
use crate::graph::{LabeledMultiGraph, NodeId, TypePairCounts};

/// Default cap on explicit occurrence-graph size.
pub const DEFAULT_EXPANSION_CAP: usize = 10_000_000;
/// Largest occurrence graph [`brute_force_mis`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Greedy selection priority; `Ord` puts the preferred node first.
#[derive(Clone, Copy, Debug)]
pub enum Priority {
    Degree(u128),
    Ratio { num: u64, den: u64 },
}

impl Priority {
    pub fn new(weighted: bool, weight: u32, degree: u128, max_neighbor_weight: u32) -> Self {
        if !weighted {
            return Priority::Degree(degree);
        }
        let w = weight as u64;
        if degree == 0 {
            Priority::Ratio { num: w, den: 1 }
        } else {
            let m = (w as u128).min(degree) as u64;
            Priority::Ratio { num: w, den: m * (max_neighbor_weight.max(1) as u64) }
        }
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        match (*self, *other) {
            (Priority::Degree(a), Priority::Degree(b)) => a.cmp(&b),
            (Priority::Ratio { num: an, den: ad }, Priority::Ratio { num: bn, den: bd }) => {
                // larger ratio first
                ((bn as u128) * (ad as u128)).cmp(&((an as u128) * (bd as u128)))
            }
            (Priority::Degree(_), Priority::Ratio { .. }) => Ordering::Less,
            (Priority::Ratio { .. }, Priority::Degree(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Priority {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Priority {}

/// Per-graph multiset of selected simple occurrences plus the edge copies
/// they leave uncovered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSolution {
    graph_id: String,
    selected: Vec<(SimpleOccurrence, u32)>,
    residual: BTreeMap<(NodeId, NodeId), u32>,
}

impl CoverSolution {
    /// Builds a cover from selection counts; fails if some edge copy would be
    /// covered twice or a selected edge is missing from `g`.
    pub fn new(g: &LabeledMultiGraph, selected: Vec<(SimpleOccurrence, u32)>) -> Result<Self> {
        let mut merged: Vec<(SimpleOccurrence, u32)> = Vec::new();
        let mut sorted = selected;
        sorted.retain(|(_, c)| *c > 0);
        sorted.sort_by(|a, b| a.0.tie_break_cmp(&b.0));
        for (occ, c) in sorted {
            match merged.last_mut() {
                Some((last, lc)) if last.tie_break_cmp(&occ) == Ordering::Equal => *lc += c,
                _ => merged.push((occ, c)),
            }
        }
        let mut residual = g.edges().clone();
        for (occ, c) in &merged {
            for e in occ.edges() {
                let r = residual
                    .get_mut(e)
                    .ok_or_else(|| Error::Coverage(format!("graph {}: edge {e:?} is not in the graph", g.id())))?;
                *r = r
                    .checked_sub(*c)
                    .ok_or_else(|| Error::Coverage(format!("graph {}: edge {e:?} covered too often", g.id())))?;
            }
        }
        residual.retain(|_, r| *r > 0);
        Ok(Self { graph_id: g.id().to_string(), selected: merged, residual })
    }

    /// The cover that leaves every edge copy to typed-edge motifs.
    pub fn all_residual(g: &LabeledMultiGraph) -> Self {
        Self { graph_id: g.id().to_string(), selected: Vec::new(), residual: g.edges().clone() }
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    /// Distinct selected simple occurrences with their counts, in tie-break
    /// order.
    pub fn selected(&self) -> &[(SimpleOccurrence, u32)] {
        &self.selected
    }

    /// Uncovered copies per edge; only positive entries.
    pub fn residual(&self) -> &BTreeMap<(NodeId, NodeId), u32> {
        &self.residual
    }

    /// Number of selected occurrence instances.
    pub fn instance_count(&self) -> u64 {
        self.selected.iter().map(|(_, c)| *c as u64).sum()
    }

    pub fn motif_counts(&self) -> BTreeMap<CanonicalKey, u64> {
        let mut out = BTreeMap::new();
        for (occ, c) in &self.selected {
            *out.entry(occ.key().clone()).or_insert(0) += *c as u64;
        }
        out
    }

    pub fn residual_type_counts(&self, g: &LabeledMultiGraph) -> TypePairCounts {
        let mut counts = TypePairCounts::default();
        for (&(u, v), &r) in &self.residual {
            counts.add(g.nodes()[&u], g.nodes()[&v], r as u64);
        }
        counts
    }

    pub fn residual_typed_edges(&self, g: &LabeledMultiGraph) -> BTreeMap<TypedEdge, u64> {
        let mut out = BTreeMap::new();
        for (&(u, v), &r) in &self.residual {
            let te = TypedEdge::new(g.nodes()[&u], g.nodes()[&v], u == v);
            *out.entry(te).or_insert(0) += r as u64;
        }
        out
    }

    /// Keeps only selections whose motif satisfies `keep`; everything else
    /// returns to the residual.
    pub fn restrict(&self, g: &LabeledMultiGraph, keep: impl Fn(&CanonicalKey) -> bool) -> Result<Self> {
        let selected = self.selected.iter().filter(|(o, _)| keep(o.key())).cloned().collect();
        Self::new(g, selected)
    }

    /// Exact-cover accounting: selected coverage plus residual equals the
    /// multiplicity of every edge.
    pub fn check(&self, g: &LabeledMultiGraph) -> Result<()> {
        let mut covered: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
        for (occ, c) in &self.selected {
            for e in occ.edges() {
                *covered.entry(*e).or_insert(0) += *c as u64;
            }
        }
        for (e, r) in &self.residual {
            *covered.entry(*e).or_insert(0) += *r as u64;
        }
        let expected: BTreeMap<(NodeId, NodeId), u64> = g.edges().iter().map(|(&e, &m)| (e, m as u64)).collect();
        if covered != expected {
            return Err(Error::Invariant(format!("graph {}: cover does not partition edge copies", g.id())));
        }
        Ok(())
    }
}

fn product<I: IntoIterator<Item = u128>>(it: I) -> u128 {
    it.into_iter().fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Degree of any occurrence springing from `sg` in the occurrence graph of
/// `g`, computed from multiplicities alone. `all` may contain `sg` itself.
pub fn occurrence_degree(sg: &SimpleOccurrence, all: &[SimpleOccurrence], g: &LabeledMultiGraph) -> u128 {
    let m = |e: &(NodeId, NodeId)| g.multiplicity(e.0, e.1) as u128;
    let own = sg.edges();
    let internal = product(own.iter().map(m))
        .saturating_sub(product(own.iter().map(|e| m(e).saturating_sub(1))))
        .saturating_sub(1);
    let mut external = 0u128;
    for other in all {
        if other.sorted_nodes() == sg.sorted_nodes() && other.edges() == own {
            continue;
        }
        let (inter, outside): (Vec<_>, Vec<_>) = other.edges().iter().partition(|e| own.binary_search(e).is_ok());
        if inter.is_empty() {
            continue;
        }
        let shared = product(inter.iter().map(m)).saturating_sub(product(inter.iter().map(|e| m(e).saturating_sub(1))));
        external = external.saturating_add(product(outside.iter().map(m)).saturating_mul(shared));
    }
    internal.saturating_add(external)
}

/// Simple occurrences of one graph with interned edges.
struct OccurrenceIndex {
    mult: Vec<u32>,
    occ_edges: Vec<Vec<usize>>,
    edge_occs: Vec<Vec<usize>>,
    weights: Vec<u32>,
}

impl OccurrenceIndex {
    fn new(occs: &[SimpleOccurrence], g: &LabeledMultiGraph) -> Self {
        let edge_ids: HashMap<(NodeId, NodeId), usize> = g.edges().keys().enumerate().map(|(i, &e)| (e, i)).collect();
        let mult: Vec<u32> = g.edges().values().copied().collect();
        let mut edge_occs = vec![Vec::new(); mult.len()];
        let mut occ_edges = Vec::with_capacity(occs.len());
        for (i, o) in occs.iter().enumerate() {
            let mut es: Vec<usize> = o.edges().iter().map(|e| edge_ids[e]).collect();
            es.sort_unstable();
            for &e in &es {
                edge_occs[e].push(i);
            }
            occ_edges.push(es);
        }
        let weights = occs.iter().map(|o| o.weight() as u32).collect();
        Self { mult, occ_edges, edge_occs, weights }
    }

    fn live(&self, i: usize, mult: &[u32]) -> bool {
        self.occ_edges[i].iter().all(|&e| mult[e] > 0)
    }

    /// Current degree and largest neighbor weight of a live compound node.
    fn stats(&self, i: usize, mult: &[u32], seen: &mut [u32], stamp: u32) -> (u128, u32) {
        let own = &self.occ_edges[i];
        let m = |e: usize| mult[e] as u128;
        let internal =
            product(own.iter().map(|&e| m(e))).saturating_sub(product(own.iter().map(|&e| m(e) - 1))).saturating_sub(1);
        let mut degree = internal;
        let mut max_w = if internal > 0 { self.weights[i] } else { 0 };
        seen[i] = stamp;
        for &e in own {
            for &l in &self.edge_occs[e] {
                if seen[l] == stamp {
                    continue;
                }
                seen[l] = stamp;
                if !self.live(l, mult) {
                    continue;
                }
                let mut outside = 1u128;
                let mut all_m = 1u128;
                let mut all_m1 = 1u128;
                for &f in &self.occ_edges[l] {
                    if own.binary_search(&f).is_ok() {
                        all_m = all_m.saturating_mul(m(f));
                        all_m1 = all_m1.saturating_mul(m(f) - 1);
                    } else {
                        outside = outside.saturating_mul(m(f));
                    }
                }
                degree = degree.saturating_add(outside.saturating_mul(all_m.saturating_sub(all_m1)));
                max_w = max_w.max(self.weights[l]);
            }
        }
        (degree, max_w)
    }
}

fn tie_ranks(occs: &[SimpleOccurrence]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..occs.len()).collect();
    idx.sort_by(|&a, &b| occs[a].tie_break_cmp(&occs[b]).then(a.cmp(&b)));
    let mut rank = vec![0; occs.len()];
    for (r, &i) in idx.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Greedy (W)MIS over compound nodes: each simple occurrence stands for all
/// copy-assignments of its edges. A selection decrements the multiplicity
/// of its edges; a simple occurrence with an exhausted edge is retired.
pub fn greedy_mis_memory_efficient(occs: &[SimpleOccurrence], g: &LabeledMultiGraph, weighted: bool) -> CoverSolution {
    let index = OccurrenceIndex::new(occs, g);
    let t = occs.len();
    let rank = tie_ranks(occs);
    let mut mult = index.mult.clone();
    let mut seen = vec![0u32; t];
    let mut stamp = 0u32;
    let mut current: Vec<Option<Priority>> = vec![None; t];
    let mut queue: BTreeSet<(Priority, usize, usize)> = BTreeSet::new();

    for i in 0..t {
        stamp += 1;
        let (deg, max_w) = index.stats(i, &mult, &mut seen, stamp);
        let p = Priority::new(weighted, index.weights[i], deg, max_w);
        current[i] = Some(p);
        queue.insert((p, rank[i], i));
    }

    let mut counts = vec![0u32; t];
    let mut touched = vec![0u32; t];
    let mut touch_stamp = 0u32;
    while let Some((_, _, best)) = queue.pop_first() {
        current[best] = None;
        counts[best] += 1;
        for &e in &index.occ_edges[best] {
            mult[e] -= 1;
        }

        // Degrees change for occurrences on the decremented edges and for
        // everything overlapping those.
        touch_stamp += 1;
        let mut first_ring = Vec::new();
        for &e in &index.occ_edges[best] {
            for &p in &index.edge_occs[e] {
                if touched[p] != touch_stamp && (p == best || current[p].is_some()) {
                    touched[p] = touch_stamp;
                    first_ring.push(p);
                }
            }
        }
        let mut affected = first_ring.clone();
        for &p in &first_ring {
            for &e in &index.occ_edges[p] {
                for &l in &index.edge_occs[e] {
                    if touched[l] != touch_stamp && current[l].is_some() {
                        touched[l] = touch_stamp;
                        affected.push(l);
                    }
                }
            }
        }

        for l in affected {
            if let Some(old) = current[l].take() {
                queue.remove(&(old, rank[l], l));
            }
            if index.live(l, &mult) {
                stamp += 1;
                let (deg, max_w) = index.stats(l, &mult, &mut seen, stamp);
                let p = Priority::new(weighted, index.weights[l], deg, max_w);
                current[l] = Some(p);
                queue.insert((p, rank[l], l));
            }
        }
    }

    let selected = occs.iter().zip(&counts).filter(|(_, &c)| c > 0).map(|(o, &c)| (o.clone(), c)).collect();
    CoverSolution::new(g, selected).expect("greedy selection never over-covers an edge")
}

/// One node of the explicit occurrence graph: a simple occurrence plus the
/// copy index chosen for each of its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceNode {
    pub simple: usize,
    pub copies: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct OccurrenceGraph {
    nodes: Vec<OccurrenceNode>,
    adjacency: Vec<Vec<usize>>,
    weights: Vec<u32>,
    tie_rank: Vec<usize>,
}

impl OccurrenceGraph {
    /// A bare weighted graph; ties are broken by node index.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, weights: Vec<u32>) -> Result<Self> {
        let n = adjacency.len();
        if weights.len() != n {
            return Err(Error::Validation("one weight per node required".into()));
        }
        let mut adjacency = adjacency;
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            nbrs.dedup();
            if nbrs.iter().any(|&u| u == v || u >= n) {
                return Err(Error::Validation(format!("bad neighbor list for node {v}")));
            }
        }
        for v in 0..n {
            for &u in &adjacency[v] {
                if adjacency[u].binary_search(&v).is_err() {
                    return Err(Error::Validation(format!("adjacency not symmetric at ({v},{u})")));
                }
            }
        }
        let nodes = (0..n).map(|i| OccurrenceNode { simple: i, copies: Vec::new() }).collect();
        Ok(Self { nodes, adjacency, weights, tie_rank: (0..n).collect() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[OccurrenceNode] {
        &self.nodes
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn weight(&self, v: usize) -> u32 {
        self.weights[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Delta: the largest degree.
    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Gamma: the largest node weight.
    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Counts of selected nodes per simple occurrence.
    pub fn selection_counts(&self, selected: &[usize], simple_count: usize) -> Vec<u32> {
        let mut counts = vec![0u32; simple_count];
        for &v in selected {
            counts[self.nodes[v].simple] += 1;
        }
        counts
    }

    /// Turns a selection into a cover of `g`.
    pub fn to_cover(
        &self,
        selected: &[usize],
        occs: &[SimpleOccurrence],
        g: &LabeledMultiGraph,
    ) -> Result<CoverSolution> {
        let counts = self.selection_counts(selected, occs.len());
        let chosen = occs.iter().zip(counts).filter(|(_, c)| *c > 0).map(|(o, c)| (o.clone(), c)).collect();
        CoverSolution::new(g, chosen)
    }
}

/// Expands each simple occurrence into one node per combination of edge
/// copies; two nodes are adjacent iff they use a common edge copy.
pub fn build_occurrence_graph(occs: &[SimpleOccurrence], g: &LabeledMultiGraph, cap: usize) -> Result<OccurrenceGraph> {
    let total = occs
        .iter()
        .fold(0u128, |acc, o| acc.saturating_add(product(o.edges().iter().map(|e| g.multiplicity(e.0, e.1) as u128))));
    if total > cap as u128 {
        return Err(Error::Capacity(format!("occurrence graph of {} would have {total} nodes (cap {cap})", g.id())));
    }
    let sg_rank = tie_ranks(occs);
    let mut nodes = Vec::with_capacity(total as usize);
    let mut weights = Vec::with_capacity(total as usize);
    let mut holders: HashMap<((NodeId, NodeId), u32), Vec<usize>> = HashMap::new();
    for (si, o) in occs.iter().enumerate() {
        let ms: Vec<u32> = o.edges().iter().map(|e| g.multiplicity(e.0, e.1)).collect();
        if ms.contains(&0) {
            return Err(Error::Validation(format!("occurrence edge missing from graph {}", g.id())));
        }
        let mut copies = vec![0u32; ms.len()];
        loop {
            let id = nodes.len();
            for (e, &c) in o.edges().iter().zip(&copies) {
                holders.entry((*e, c)).or_default().push(id);
            }
            nodes.push(OccurrenceNode { simple: si, copies: copies.clone() });
            weights.push(o.weight() as u32);
            // mixed-radix increment, last edge fastest
            let mut pos = ms.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                copies[pos] += 1;
                if copies[pos] < ms[pos] {
                    break;
                }
                copies[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || ms.is_empty() {
                break;
            }
        }
    }
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for list in holders.values() {
        for &a in list {
            for &b in list {
                if a != b {
                    adjacency[a].push(b);
                }
            }
        }
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        let (na, nb): (&OccurrenceNode, &OccurrenceNode) = (&nodes[a], &nodes[b]);
        sg_rank[na.simple].cmp(&sg_rank[nb.simple]).then_with(|| na.copies.cmp(&nb.copies))
    });
    let mut tie_rank = vec![0; nodes.len()];
    for (r, &v) in order.iter().enumerate() {
        tie_rank[v] = r;
    }
    Ok(OccurrenceGraph { nodes, adjacency, weights, tie_rank })
}

/// Greedy (W)MIS on an explicit occurrence graph. Returns selected node
/// indices in selection order.
pub fn greedy_mis(og: &OccurrenceGraph, weighted: bool) -> Vec<usize> {
    let n = og.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| og.degree(v)).collect();
    let prio = |v: usize, alive: &[bool], degree: &[usize]| {
        let max_w = og.adjacency[v].iter().filter(|&&u| alive[u]).map(|&u| og.weights[u]).max().unwrap_or(0);
        Priority::new(weighted, og.weights[v], degree[v] as u128, max_w)
    };
    let mut current: Vec<Priority> = (0..n).map(|v| prio(v, &alive, &degree)).collect();
    let mut queue: BTreeSet<(Priority, usize, usize)> = (0..n).map(|v| (current[v], og.tie_rank[v], v)).collect();
    let mut selected = Vec::new();
    while let Some((_, _, v)) = queue.pop_first() {
        selected.push(v);
        let mut removed = vec![v];
        alive[v] = false;
        for &u in &og.adjacency[v] {
            if alive[u] {
                alive[u] = false;
                queue.remove(&(current[u], og.tie_rank[u], u));
                removed.push(u);
            }
        }
        let mut affected = BTreeSet::new();
        for &r in &removed {
            for &u in &og.adjacency[r] {
                if alive[u] {
                    degree[u] -= 1;
                    affected.insert(u);
                }
            }
        }
        if weighted {
            let first: Vec<usize> = affected.iter().copied().collect();
            for u in first {
                for &x in &og.adjacency[u] {
                    if alive[x] {
                        affected.insert(x);
                    }
                }
            }
        }
        for u in affected {
            queue.remove(&(current[u], og.tie_rank[u], u));
            current[u] = prio(u, &alive, &degree);
            queue.insert((current[u], og.tie_rank[u], u));
        }
    }
    selected
}

/// Exact maximum independent set size (or weight) by branch and bound.
pub fn brute_force_mis(og: &OccurrenceGraph, weighted: bool) -> Result<u64> {
    let n = og.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity(format!("exhaustive MIS limited to {BRUTE_FORCE_LIMIT} nodes, got {n}")));
    }
    let adj: Vec<u32> = (0..n).map(|v| og.adjacency[v].iter().fold(0u32, |m, &u| m | (1 << u))).collect();
    let w: Vec<u64> = (0..n).map(|v| if weighted { og.weights[v] as u64 } else { 1 }).collect();
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = 0;
    branch(all, 0, &adj, &w, &mut best);
    Ok(best)
}

fn branch(cand: u32, acc: u64, adj: &[u32], w: &[u64], best: &mut u64) {
    if cand == 0 {
        *best = (*best).max(acc);
        return;
    }
    let bound: u64 = (0..adj.len()).filter(|&v| cand & (1 << v) != 0).map(|v| w[v]).sum();
    if acc + bound <= *best {
        return;
    }
    let v = cand.trailing_zeros() as usize;
    let rest = cand & !(1 << v);
    branch(rest & !adj[v], acc + w[v], adj, w, best);
    if adj[v] & rest != 0 {
        branch(rest, acc, adj, w, best);
    }
}
