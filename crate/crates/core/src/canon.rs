//! Canonical forms for small node-labeled directed simple graphs.
//!
//! A canonical key is the lexicographically smallest serialization of a motif
//! over all node orders that are compatible with an isomorphism-invariant
//! partition of its nodes. The partition starts from (type, in-degree,
//! out-degree, self-loop) and is refined by neighbor classes until stable;
//! the remaining freedom is searched exhaustively with prefix pruning, so the
//! key is exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TypeId;

/// Largest motif size accepted by [`canonical_form`].
pub const MAX_MOTIF_NODES: usize = 10;

/// Byte string identifying an isomorphism class of motifs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        if !s.len().is_multiple_of(2) {
            return Err(Error::Format(format!("odd-length motif key {s:?}")));
        }
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(CanonicalKey)
            .map_err(|_| Error::Format(format!("invalid motif key {s:?}")))
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

/// A typed edge: the content of a 2-node motif, or of a 1-node self-loop
/// motif when `self_loop` is set (then `src == dst`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedEdge {
    pub src: TypeId,
    pub dst: TypeId,
    pub self_loop: bool,
}

impl TypedEdge {
    pub fn new(src: TypeId, dst: TypeId, self_loop: bool) -> Self {
        debug_assert!(!self_loop || src == dst);
        Self { src, dst, self_loop }
    }
}

/// Uncanonicalized labeled digraph over nodes `0..node_types.len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RawMotif {
    pub node_types: Vec<TypeId>,
    pub edges: Vec<(usize, usize)>,
}

impl RawMotif {
    pub fn new(node_types: Vec<TypeId>, edges: Vec<(usize, usize)>) -> Self {
        Self { node_types, edges }
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> RawMotif {
        let mut node_types = vec![0; self.node_types.len()];
        for (i, &t) in self.node_types.iter().enumerate() {
            node_types[perm[i]] = t;
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        RawMotif { node_types, edges }
    }
}

/// A connected node-labeled directed simple graph in canonical node order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Motif {
    node_types: Vec<TypeId>,
    edges: Vec<(u8, u8)>,
    key: CanonicalKey,
}

impl fmt::Debug for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Motif").field("types", &self.node_types).field("edges", &self.edges).finish()
    }
}

impl Motif {
    pub fn n(&self) -> usize {
        self.node_types.len()
    }

    pub fn node_types(&self) -> &[TypeId] {
        &self.node_types
    }

    /// Edges in canonical node numbering, sorted.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn key(&self) -> &CanonicalKey {
        &self.key
    }

    /// Out-degree of canonical node `v`, self-loop included.
    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(u, _)| u as usize == v).count()
    }

    /// One entry per motif edge.
    pub fn typed_edges(&self) -> Vec<TypedEdge> {
        self.edges().map(|(u, v)| TypedEdge::new(self.node_types[u], self.node_types[v], u == v)).collect()
    }

    /// The 2-node (or 1-node self-loop) motif of a typed edge.
    pub fn typed_edge(edge: TypedEdge) -> Motif {
        let raw = if edge.self_loop {
            RawMotif::new(vec![edge.src], vec![(0, 0)])
        } else {
            RawMotif::new(vec![edge.src, edge.dst], vec![(0, 1)])
        };
        canonical_form(&raw, MAX_MOTIF_NODES).expect("typed edge motif is valid").0
    }

    /// `Some` for 2-node single-edge motifs and 1-node self-loop motifs.
    pub fn as_typed_edge(&self) -> Option<TypedEdge> {
        match (self.n(), self.edges.as_slice()) {
            (1, [(0, 0)]) => Some(TypedEdge::new(self.node_types[0], self.node_types[0], true)),
            (2, [(u, v)]) if u != v => {
                Some(TypedEdge::new(self.node_types[*u as usize], self.node_types[*v as usize], false))
            }
            _ => None,
        }
    }

    pub fn to_raw(&self) -> RawMotif {
        RawMotif::new(self.node_types.clone(), self.edges().collect())
    }
}

impl PartialOrd for Motif {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Motif {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

/// JSON form: `{n, types, edges}` in canonical node order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifJson {
    pub n: usize,
    pub types: Vec<TypeId>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Motif> for MotifJson {
    fn from(m: &Motif) -> Self {
        MotifJson { n: m.n(), types: m.node_types.clone(), edges: m.edges().map(|(u, v)| [u, v]).collect() }
    }
}

impl TryFrom<MotifJson> for Motif {
    type Error = Error;

    fn try_from(j: MotifJson) -> Result<Motif> {
        if j.types.len() != j.n {
            return Err(Error::Format(format!("motif declares n={} but lists {} types", j.n, j.types.len())));
        }
        let raw = RawMotif::new(j.types, j.edges.into_iter().map(|[u, v]| (u, v)).collect());
        Ok(canonical_form(&raw, MAX_MOTIF_NODES)?.0)
    }
}

impl Serialize for Motif {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MotifJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Motif {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MotifJson::deserialize(d)?;
        Motif::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// Canonicalizes `raw`. Returns the motif and `order`, where canonical node
/// `i` is raw node `order[i]`.
pub fn canonical_form(raw: &RawMotif, max_nodes: usize) -> Result<(Motif, Vec<usize>)> {
    let n = raw.node_types.len();
    if n == 0 {
        return Err(Error::Domain("motif has no nodes".into()));
    }
    if n > max_nodes || n > MAX_MOTIF_NODES {
        return Err(Error::MotifTooLarge { n, max: max_nodes.min(MAX_MOTIF_NODES) });
    }
    if raw.node_types.iter().any(|&t| t > u16::MAX as usize) {
        return Err(Error::Domain("type index does not fit the key encoding".into()));
    }
    let mut adj = [[false; MAX_MOTIF_NODES]; MAX_MOTIF_NODES];
    for &(u, v) in &raw.edges {
        if u >= n || v >= n {
            return Err(Error::Domain(format!("edge ({u},{v}) out of range for {n} nodes")));
        }
        adj[u][v] = true;
    }
    if raw.edges.is_empty() {
        return Err(Error::Domain("motif has no edges".into()));
    }
    if !is_weakly_connected(n, &adj) {
        return Err(Error::Disconnected);
    }

    let colors = refine_colors(n, &raw.node_types, &adj);
    // positions take nodes in color order
    let mut cell_of_pos: Vec<u32> = colors.clone();
    cell_of_pos.sort_unstable();

    let mut search = KeySearch {
        n,
        adj: &adj,
        colors: &colors,
        cell_of_pos: &cell_of_pos,
        used: [false; MAX_MOTIF_NODES],
        perm: Vec::with_capacity(n),
        bits: Vec::with_capacity(n * n),
        best_bits: Vec::new(),
        best_perm: Vec::new(),
    };
    search.descend(Ordering::Equal);
    let order = search.best_perm;
    let bits = search.best_bits;

    let mut key = Vec::with_capacity(1 + 2 * n + (n * n).div_ceil(8));
    key.push(n as u8);
    let node_types: Vec<TypeId> = order.iter().map(|&v| raw.node_types[v]).collect();
    for &t in &node_types {
        key.extend_from_slice(&(t as u16).to_be_bytes());
    }
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 0x80 >> i;
            }
        }
        key.push(byte);
    }

    let mut pos_of = [0usize; MAX_MOTIF_NODES];
    for (p, &v) in order.iter().enumerate() {
        pos_of[v] = p;
    }
    let mut edges: Vec<(u8, u8)> = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if adj[u][v] {
                edges.push((pos_of[u] as u8, pos_of[v] as u8));
            }
        }
    }
    edges.sort_unstable();

    Ok((Motif { node_types, edges, key: CanonicalKey(key) }, order))
}

/// True iff `a` and `b` are structure- and label-isomorphic.
pub fn is_isomorphic(a: &Motif, b: &Motif) -> bool {
    a.key == b.key
}

fn is_weakly_connected(n: usize, adj: &[[bool; MAX_MOTIF_NODES]; MAX_MOTIF_NODES]) -> bool {
    let mut seen = [false; MAX_MOTIF_NODES];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && (adj[u][v] || adj[v][u]) {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).expect("present") as u32).collect()
}

fn class_count(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Isomorphism-invariant ordered partition of the nodes. Class order is a
/// refinement of type order.
fn refine_colors(n: usize, types: &[TypeId], adj: &[[bool; MAX_MOTIF_NODES]; MAX_MOTIF_NODES]) -> Vec<u32> {
    let initial: Vec<(TypeId, usize, usize, bool)> = (0..n)
        .map(|v| {
            let outd = (0..n).filter(|&w| w != v && adj[v][w]).count();
            let ind = (0..n).filter(|&w| w != v && adj[w][v]).count();
            (types[v], ind, outd, adj[v][v])
        })
        .collect();
    let mut colors = rank(&initial);
    let mut classes = class_count(&colors);
    while classes < n {
        let sigs: Vec<(u32, Vec<u32>, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut outs: Vec<u32> = (0..n).filter(|&w| w != v && adj[v][w]).map(|w| colors[w]).collect();
                let mut ins: Vec<u32> = (0..n).filter(|&w| w != v && adj[w][v]).map(|w| colors[w]).collect();
                outs.sort_unstable();
                ins.sort_unstable();
                (colors[v], outs, ins)
            })
            .collect();
        let next = rank(&sigs);
        let next_classes = class_count(&next);
        colors = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    colors
}

struct KeySearch<'a> {
    n: usize,
    adj: &'a [[bool; MAX_MOTIF_NODES]; MAX_MOTIF_NODES],
    colors: &'a [u32],
    cell_of_pos: &'a [u32],
    used: [bool; MAX_MOTIF_NODES],
    perm: Vec<usize>,
    bits: Vec<bool>,
    best_bits: Vec<bool>,
    best_perm: Vec<usize>,
}

impl KeySearch<'_> {
    /// `rel` is how the current prefix compares to the same-length prefix of
    /// the best key found so far.
    fn descend(&mut self, rel: Ordering) {
        let p = self.perm.len();
        if p == self.n {
            if self.best_perm.is_empty() || rel == Ordering::Less {
                self.best_bits = self.bits.clone();
                self.best_perm = self.perm.clone();
            }
            return;
        }
        for v in 0..self.n {
            if self.used[v] || self.colors[v] != self.cell_of_pos[p] {
                continue;
            }
            let mark = self.bits.len();
            for q in 0..p {
                let w = self.perm[q];
                self.bits.push(self.adj[v][w]);
                self.bits.push(self.adj[w][v]);
            }
            self.bits.push(self.adj[v][v]);

            let mut next = rel;
            if rel == Ordering::Equal && !self.best_perm.is_empty() {
                next = self.bits[mark..].cmp(&self.best_bits[mark..self.bits.len()]);
            }
            if next != Ordering::Greater {
                self.used[v] = true;
                self.perm.push(v);
                self.descend(next);
                self.perm.pop();
                self.used[v] = false;
            }
            self.bits.truncate(mark);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(types: &[TypeId], edges: &[(usize, usize)]) -> Motif {
        canonical_form(&RawMotif::new(types.to_vec(), edges.to_vec()), MAX_MOTIF_NODES).unwrap().0
    }

    #[test]
    fn relabeled_chain_has_same_key() {
        // A->B->C as 0,1,2 and as 2,0,1
        let a = canon(&[0, 1, 2], &[(0, 1), (1, 2)]);
        let b = canon(&[1, 2, 0], &[(2, 0), (0, 1)]);
        assert_eq!(a.key(), b.key());
        assert!(is_isomorphic(&a, &b));
    }

    #[test]
    fn direction_matters() {
        let forward = canon(&[0, 1, 2], &[(0, 1), (1, 2)]);
        let backward = canon(&[0, 1, 2], &[(2, 1), (1, 0)]);
        assert_ne!(forward.key(), backward.key());
    }

    #[test]
    fn triangle_differs_from_chain() {
        let tri = canon(&[0, 0, 0], &[(0, 1), (1, 2), (2, 0)]);
        let chain = canon(&[0, 0, 0], &[(0, 1), (1, 2)]);
        assert_ne!(tri.key(), chain.key());
        let star = canon(&[0, 0, 0], &[(0, 1), (0, 2)]);
        assert!(!is_isomorphic(&chain, &star));
        let other_types = canon(&[0, 0, 1], &[(0, 1), (1, 2)]);
        assert!(!is_isomorphic(&chain, &other_types));
        assert!(is_isomorphic(&chain, &chain));
    }

    #[test]
    fn order_maps_canonical_to_raw() {
        let raw = RawMotif::new(vec![2, 0, 1], vec![(0, 1), (1, 2)]);
        let (m, order) = canonical_form(&raw, MAX_MOTIF_NODES).unwrap();
        for (u, v) in m.edges() {
            assert!(raw.edges.contains(&(order[u], order[v])));
        }
        for (i, &t) in m.node_types().iter().enumerate() {
            assert_eq!(raw.node_types[order[i]], t);
        }
        assert!(m.node_types().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_disconnected_and_oversized() {
        let raw = RawMotif::new(vec![0, 0, 0], vec![(0, 1)]);
        assert!(matches!(canonical_form(&raw, 10), Err(Error::Disconnected)));
        let raw = RawMotif::new(vec![0; 4], vec![(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(canonical_form(&raw, 3), Err(Error::MotifTooLarge { .. })));
        // self-loops do not connect anything
        let raw = RawMotif::new(vec![0, 0], vec![(0, 0), (1, 1)]);
        assert!(matches!(canonical_form(&raw, 10), Err(Error::Disconnected)));
    }

    #[test]
    fn typed_edge_round_trip() {
        for e in [TypedEdge::new(0, 1, false), TypedEdge::new(2, 2, false), TypedEdge::new(3, 3, true)] {
            let m = Motif::typed_edge(e);
            assert_eq!(m.as_typed_edge(), Some(e));
            assert_eq!(m.typed_edges(), vec![e]);
        }
        assert_eq!(Motif::typed_edge(TypedEdge::new(3, 3, true)).n(), 1);
    }

    #[test]
    fn json_round_trip_and_hex() {
        let m = canon(&[1, 0, 1], &[(0, 1), (1, 2), (2, 2)]);
        let s = serde_json::to_string(&m).unwrap();
        let back: Motif = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(CanonicalKey::from_hex(&m.key().to_hex()).unwrap(), *m.key());
        assert!(CanonicalKey::from_hex("abc").is_err());
    }

    #[test]
    fn regular_same_type_graphs() {
        // two orientations of a 6-cycle, relabeled
        let cyc: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let a = canon(&[0; 6], &cyc);
        let perm = [3, 5, 0, 1, 4, 2];
        let b = canonical_form(&RawMotif::new(vec![0; 6], cyc.clone()).permuted(&perm), 10).unwrap().0;
        assert_eq!(a.key(), b.key());
        // two disjoint triangles joined by one edge vs a 6-cycle with a chord
        let joined = canon(&[0; 6], &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)]);
        let chord = canon(&[0; 6], &[cyc.as_slice(), &[(0, 3)]].concat());
        assert_ne!(joined.key(), chord.key());
    }
}
