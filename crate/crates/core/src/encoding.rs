//! Description lengths: the universal integer code, motif and table costs,
//! and the per-graph symbol stream with its exact inverse.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, CanonicalKey, Motif, RawMotif, TypedEdge, MAX_MOTIF_NODES};
use crate::error::{Error, Result};
use crate::graph::{GraphDatabase, LabeledMultiGraph, NodeId, TypeAlphabet};
use crate::mis::CoverSolution;

/// Normalizing constant of the universal integer code.
pub const UNIVERSAL_CODE_CONSTANT: f64 = 2.865;

/// Tolerance for code-length normalization checks.
pub const KRAFT_TOLERANCE: f64 = 1e-9;

/// Bits of the universal code for a positive integer:
/// `log2(c) + log2 k + log2 log2 k + ...`, positive terms only.
pub fn universal_integer_length(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("universal integer code needs k >= 1".into()));
    }
    Ok(ln_bits(k))
}

pub(crate) fn ln_bits(k: u64) -> f64 {
    debug_assert!(k >= 1);
    let mut total = UNIVERSAL_CODE_CONSTANT.log2();
    let mut term = (k as f64).log2();
    while term > 0.0 {
        total += term;
        term = term.log2();
    }
    total
}

fn log2_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2()).sum()
}

/// Bits to describe a motif over an alphabet of `type_count` labels.
pub fn motif_encoding_length(m: &Motif, type_count: usize) -> f64 {
    let n = m.n();
    let per_node_fixed = (n as f64).log2() + (type_count.max(1) as f64).log2();
    let nodes: f64 = (0..n)
        .map(|v| {
            let d = m.out_degree(v);
            per_node_fixed + ln_bits(d as u64 + 1) + log2_binomial(n, d)
        })
        .sum();
    ln_bits(n as u64) + nodes
}

/// `log2(V (V-1) ... (V-n+1))`.
pub fn permutation_length(v: usize, n: usize) -> Result<f64> {
    if n == 0 || n > v {
        return Err(Error::Domain(format!("cannot place {n} motif nodes among {v} graph nodes")));
    }
    Ok(perm_bits(v, n))
}

pub(crate) fn perm_bits(v: usize, n: usize) -> f64 {
    (0..n).map(|i| ((v - i) as f64).log2()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotifEntry {
    pub motif: Arc<Motif>,
    pub usage: u64,
    /// `None` while unassigned or when `usage == 0`.
    pub code_length: Option<f64>,
}

/// Motifs with usages and code lengths, keyed and ordered by canonical key.
#[derive(Clone, Debug, PartialEq)]
pub struct MotifTable {
    type_count: usize,
    entries: BTreeMap<CanonicalKey, MotifEntry>,
}

impl MotifTable {
    pub fn new(type_count: usize) -> Self {
        Self { type_count, entries: BTreeMap::new() }
    }

    pub fn type_count(&self) -> usize {
        self.type_count
    }

    /// Adds `usage` to the motif's entry, creating it if needed. Code
    /// lengths become stale until [`MotifTable::assign_code_lengths`].
    pub fn add_usage(&mut self, motif: Arc<Motif>, usage: u64) {
        let entry = self.entries.entry(motif.key().clone()).or_insert_with(|| MotifEntry {
            motif,
            usage: 0,
            code_length: None,
        });
        entry.usage += usage;
        entry.code_length = None;
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<&MotifEntry> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &MotifEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_usage(&self) -> u64 {
        self.entries.values().map(|e| e.usage).sum()
    }

    pub fn code_length(&self, key: &CanonicalKey) -> Option<f64> {
        self.entries.get(key).and_then(|e| e.code_length)
    }

    /// Drops entries with zero usage.
    pub fn prune_unused(&mut self) {
        self.entries.retain(|_, e| e.usage > 0);
    }

    /// Shannon code lengths from usages.
    pub fn assign_code_lengths(&mut self) -> Result<()> {
        let total = self.total_usage();
        if total == 0 {
            return Err(Error::DegenerateTable);
        }
        let log_total = (total as f64).log2();
        for e in self.entries.values_mut() {
            e.code_length = (e.usage > 0).then(|| log_total - (e.usage as f64).log2());
        }
        Ok(())
    }

    /// Sum of `2^-code_length` over coded entries.
    pub fn kraft_sum(&self) -> f64 {
        self.entries.values().filter_map(|e| e.code_length).map(|l| (-l).exp2()).sum()
    }

    /// Model cost: the alphabet size plus every coded motif and its code.
    pub fn model_length(&self) -> f64 {
        let motifs: f64 = self
            .entries
            .values()
            .filter(|e| e.usage > 0)
            .map(|e| motif_encoding_length(&e.motif, self.type_count) + e.code_length.unwrap_or(0.0))
            .sum();
        ln_bits(self.type_count.max(1) as u64) + motifs
    }

    /// Fits usages to covers: one per selected instance, one per residual
    /// edge copy (charged to its typed-edge motif).
    pub fn from_covers(db: &GraphDatabase, covers: &[CoverSolution]) -> Result<Self> {
        if covers.len() != db.len() {
            return Err(Error::Validation(format!("{} covers for {} graphs", covers.len(), db.len())));
        }
        let mut table = MotifTable::new(db.alphabet().len());
        let mut edge_motifs: HashMap<TypedEdge, Arc<Motif>> = HashMap::new();
        for (g, cover) in db.graphs().iter().zip(covers) {
            for (occ, c) in cover.selected() {
                table.add_usage(occ.motif().clone(), *c as u64);
            }
            for (te, c) in cover.residual_typed_edges(g) {
                let m = edge_motifs.entry(te).or_insert_with(|| Arc::new(Motif::typed_edge(te))).clone();
                table.add_usage(m, c);
            }
        }
        table.assign_code_lengths()?;
        Ok(table)
    }

    pub fn to_json(&self, alphabet: Option<&TypeAlphabet>) -> TableJson {
        TableJson {
            type_count: self.type_count,
            labels: alphabet.map(|a| a.labels().to_vec()),
            entries: self
                .entries
                .values()
                .map(|e| EntryJson {
                    key: e.motif.key().to_hex(),
                    motif: (*e.motif).clone(),
                    usage: e.usage,
                    code_length: e.code_length,
                })
                .collect(),
        }
    }

    pub fn from_json(json: TableJson) -> Result<Self> {
        let mut table = MotifTable::new(json.type_count);
        for e in json.entries {
            if e.motif.key().to_hex() != e.key {
                return Err(Error::Format(format!("motif does not match its key {}", e.key)));
            }
            if e.motif.node_types().iter().any(|&t| t >= json.type_count) {
                return Err(Error::Format(format!("motif {} uses a type outside T", e.key)));
            }
            if table.entries.contains_key(e.motif.key()) {
                return Err(Error::Format(format!("duplicate motif {}", e.key)));
            }
            table.add_usage(Arc::new(e.motif), e.usage);
        }
        if table.total_usage() > 0 {
            table.assign_code_lengths()?;
        }
        Ok(table)
    }
}

/// Serialized table: `{T, labels, entries: [{key, motif, usage, code_length}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableJson {
    #[serde(rename = "T")]
    pub type_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryJson {
    pub key: String,
    pub motif: Motif,
    pub usage: u64,
    pub code_length: Option<f64>,
}

/// Free-function form of [`MotifTable::assign_code_lengths`].
pub fn assign_code_lengths(mut mt: MotifTable) -> Result<MotifTable> {
    mt.assign_code_lengths()?;
    Ok(mt)
}

pub fn model_length(mt: &MotifTable) -> f64 {
    mt.model_length()
}

/// One group of identical motif placements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymbolRecord {
    pub key: CanonicalKey,
    /// Graph node for each canonical motif node.
    pub nodes: Vec<NodeId>,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolStream {
    pub graph_id: String,
    pub node_count: usize,
    pub records: Vec<SymbolRecord>,
}

impl SymbolStream {
    pub fn record_count(&self) -> usize {
        self.records.len()
    }
}

/// Canonical key and node placement of a single residual edge.
pub(crate) fn residual_placement(
    g: &LabeledMultiGraph,
    (u, v): (NodeId, NodeId),
    cache: &mut HashMap<TypedEdge, (CanonicalKey, bool)>,
) -> (CanonicalKey, Vec<NodeId>) {
    let (tu, tv) = (g.nodes()[&u], g.nodes()[&v]);
    if u == v {
        let te = TypedEdge::new(tu, tu, true);
        let (key, _) = cache.entry(te).or_insert_with(|| (Motif::typed_edge(te).key().clone(), false)).clone();
        return (key, vec![u]);
    }
    let te = TypedEdge::new(tu, tv, false);
    let (key, swapped) = cache
        .entry(te)
        .or_insert_with(|| {
            let raw = RawMotif::new(vec![tu, tv], vec![(0, 1)]);
            let (m, order) = canonical_form(&raw, MAX_MOTIF_NODES).expect("typed edge motif is valid");
            (m.key().clone(), order[0] == 1)
        })
        .clone();
    (key, if swapped { vec![v, u] } else { vec![u, v] })
}

fn record_length(mt: &MotifTable, record: &SymbolRecord, node_count: usize) -> Result<f64> {
    let code = mt
        .code_length(&record.key)
        .ok_or_else(|| Error::Coverage(format!("motif {} has no code in the table", record.key.to_hex())))?;
    Ok(code + permutation_length(node_count, record.nodes.len())? + ln_bits(record.multiplicity as u64))
}

/// Emits the grouped cover of `g` and its length in bits.
pub fn encode_graph(g: &LabeledMultiGraph, mt: &MotifTable, cover: &CoverSolution) -> Result<(SymbolStream, f64)> {
    let mut records = Vec::with_capacity(cover.selected().len() + cover.residual().len());
    for (occ, c) in cover.selected() {
        records.push(SymbolRecord { key: occ.key().clone(), nodes: occ.node_map().to_vec(), multiplicity: *c });
    }
    let mut cache = HashMap::new();
    for (&e, &r) in cover.residual() {
        let (key, nodes) = residual_placement(g, e, &mut cache);
        records.push(SymbolRecord { key, nodes, multiplicity: r });
    }
    records.sort();
    let node_count = g.node_count();
    let mut bits = 0.0;
    for rec in &records {
        bits += record_length(mt, rec, node_count)?;
    }
    let stream = SymbolStream { graph_id: g.id().to_string(), node_count, records };
    Ok((stream, bits))
}

/// Encoded length of one graph.
pub fn graph_length(g: &LabeledMultiGraph, mt: &MotifTable, cover: &CoverSolution) -> Result<f64> {
    Ok(encode_graph(g, mt, cover)?.1)
}

/// Rebuilds the graph a stream describes.
pub fn decode_graph(s: &SymbolStream, mt: &MotifTable, alphabet: &TypeAlphabet) -> Result<LabeledMultiGraph> {
    if s.records.is_empty() {
        return Err(Error::Decode(format!("graph {}: empty stream", s.graph_id)));
    }
    let mut g = LabeledMultiGraph::new(s.graph_id.clone());
    for rec in &s.records {
        let entry = mt.get(&rec.key).ok_or_else(|| Error::Decode(format!("unknown motif {}", rec.key.to_hex())))?;
        let m = &entry.motif;
        if rec.nodes.len() != m.n() {
            return Err(Error::Decode(format!(
                "motif {} has {} nodes, record places {}",
                rec.key.to_hex(),
                m.n(),
                rec.nodes.len()
            )));
        }
        if rec.multiplicity == 0 {
            return Err(Error::Decode("record with zero multiplicity".into()));
        }
        for (i, &node) in rec.nodes.iter().enumerate() {
            if rec.nodes[..i].contains(&node) {
                return Err(Error::Decode(format!("node {node} placed twice in one record")));
            }
            let ty = m.node_types()[i];
            if ty >= alphabet.len() {
                return Err(Error::Decode(format!("type {ty} outside the alphabet")));
            }
            g.add_node(node, ty).map_err(|e| Error::Decode(format!("graph {}: {e}", s.graph_id)))?;
        }
        for (a, b) in m.edges() {
            g.add_edge(rec.nodes[a], rec.nodes[b], rec.multiplicity)?;
        }
    }
    Ok(g)
}

/// Model length plus every graph's encoded length.
pub fn total_length(mt: &MotifTable, db: &GraphDatabase, covers: &[CoverSolution]) -> Result<f64> {
    Ok(mt.model_length() + graph_lengths(mt, db, covers)?.iter().sum::<f64>())
}

/// Encoded length of each graph, in database order.
pub fn graph_lengths(mt: &MotifTable, db: &GraphDatabase, covers: &[CoverSolution]) -> Result<Vec<f64>> {
    if covers.len() != db.len() {
        return Err(Error::Validation(format!("{} covers for {} graphs", covers.len(), db.len())));
    }
    db.graphs().par_iter().zip(covers.par_iter()).map(|(g, c)| graph_length(g, mt, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn single_graph_db(edges: &[(NodeId, NodeId, u32)], types: &[usize], labels: &[&str]) -> GraphDatabase {
        let mut g = LabeledMultiGraph::new("g");
        for (i, &t) in types.iter().enumerate() {
            g.add_node(i as NodeId, t).unwrap();
        }
        for &(u, v, m) in edges {
            g.add_edge(u, v, m).unwrap();
        }
        GraphDatabase::new(TypeAlphabet::from_labels(labels.iter().copied()).unwrap(), vec![g]).unwrap()
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn universal_code_values() {
        close(universal_integer_length(1).unwrap(), 1.518535138982180, 1e-9);
        close(universal_integer_length(2).unwrap(), 2.518535138982180, 1e-9);
        close(universal_integer_length(8).unwrap(), 6.767946347157226, 1e-9);
        assert!(universal_integer_length(0).is_err());
    }

    #[test]
    fn motif_lengths() {
        let chain = canonical_form(&RawMotif::new(vec![0, 1, 2], vec![(0, 1), (1, 2)]), 10).unwrap().0;
        let expected = ln_bits(3) + 3.0 * (3f64.log2() + 3f64.log2()) + 2.0 * (ln_bits(2) + 3f64.log2()) + ln_bits(1);
        close(motif_encoding_length(&chain, 3), expected, 1e-12);
        close(motif_encoding_length(&chain, 3), 23.003, 1e-3);
        let edge = Motif::typed_edge(TypedEdge::new(0, 1, false));
        close(motif_encoding_length(&edge, 2), 11.556, 1e-3);
    }

    #[test]
    fn code_lengths_from_usages() {
        let mut t = MotifTable::new(3);
        t.add_usage(Arc::new(Motif::typed_edge(TypedEdge::new(0, 1, false))), 3);
        t.add_usage(Arc::new(Motif::typed_edge(TypedEdge::new(0, 2, false))), 1);
        t.assign_code_lengths().unwrap();
        let lens: Vec<f64> = t.entries().map(|e| e.code_length.unwrap()).collect();
        let mut sorted = lens.clone();
        sorted.sort_by(f64::total_cmp);
        close(sorted[0], 0.4150374992788438, 1e-12);
        close(sorted[1], 2.0, 1e-12);
        close(t.kraft_sum(), 1.0, 1e-12);

        let mut z = MotifTable::new(2);
        z.add_usage(Arc::new(Motif::typed_edge(TypedEdge::new(0, 1, false))), 0);
        assert!(matches!(z.assign_code_lengths(), Err(Error::DegenerateTable)));
        close(MotifTable::new(4).model_length(), ln_bits(4), 1e-12);
    }

    #[test]
    fn permutation_lengths() {
        close(permutation_length(10, 3).unwrap(), 720f64.log2(), 1e-12);
        close(permutation_length(8, 1).unwrap(), 3.0, 1e-12);
        close(permutation_length(5, 5).unwrap(), 120f64.log2(), 1e-12);
        assert!(permutation_length(2, 3).is_err());
    }

    #[test]
    fn two_node_graph_lengths() {
        for (m, expected) in [(3, 4.768), (1, 2.519)] {
            let db = single_graph_db(&[(0, 1, m)], &[0, 1], &["A", "B"]);
            let covers = vec![CoverSolution::all_residual(db.graph(0))];
            let mt = MotifTable::from_covers(&db, &covers).unwrap();
            assert_eq!(mt.len(), 1);
            let (stream, bits) = encode_graph(db.graph(0), &mt, &covers[0]).unwrap();
            close(bits, expected, 1e-3);
            assert_eq!(stream.record_count(), 1);
            assert_eq!(decode_graph(&stream, &mt, db.alphabet()).unwrap(), *db.graph(0));
        }
    }

    #[test]
    fn same_type_edges_in_both_directions_round_trip() {
        let db = single_graph_db(&[(0, 1, 2), (1, 0, 1), (1, 1, 3)], &[0, 0], &["A"]);
        let covers = vec![CoverSolution::all_residual(db.graph(0))];
        let mt = MotifTable::from_covers(&db, &covers).unwrap();
        assert_eq!(mt.len(), 2);
        let (stream, _) = encode_graph(db.graph(0), &mt, &covers[0]).unwrap();
        assert_eq!(stream.record_count(), 3);
        assert_eq!(decode_graph(&stream, &mt, db.alphabet()).unwrap(), *db.graph(0));
    }

    #[test]
    fn decode_errors() {
        let db = single_graph_db(&[(0, 1, 1)], &[0, 1], &["A", "B"]);
        let covers = vec![CoverSolution::all_residual(db.graph(0))];
        let mt = MotifTable::from_covers(&db, &covers).unwrap();
        let (mut stream, _) = encode_graph(db.graph(0), &mt, &covers[0]).unwrap();
        stream.records[0].nodes.push(7);
        assert!(matches!(decode_graph(&stream, &mt, db.alphabet()), Err(Error::Decode(_))));
        stream.records.clear();
        assert!(matches!(decode_graph(&stream, &mt, db.alphabet()), Err(Error::Decode(_))));
        let other = MotifTable::new(2);
        assert!(matches!(encode_graph(db.graph(0), &other, &covers[0]), Err(Error::Coverage(_))));
    }

    #[test]
    fn overlapping_records_sum_multiplicities() {
        let db = single_graph_db(&[(0, 1, 2), (1, 2, 1), (0, 2, 1)], &[0, 1, 2], &["A", "B", "C"]);
        let covers = vec![CoverSolution::all_residual(db.graph(0))];
        let mt = MotifTable::from_covers(&db, &covers).unwrap();
        let (stream, _) = encode_graph(db.graph(0), &mt, &covers[0]).unwrap();
        assert_eq!(decode_graph(&stream, &mt, db.alphabet()).unwrap(), *db.graph(0));
    }

    #[test]
    fn json_round_trip() {
        let db = single_graph_db(&[(0, 1, 2), (1, 2, 1)], &[0, 1, 2], &["A", "B", "C"]);
        let covers = vec![CoverSolution::all_residual(db.graph(0))];
        let mt = MotifTable::from_covers(&db, &covers).unwrap();
        let text = serde_json::to_string(&mt.to_json(Some(db.alphabet()))).unwrap();
        let back = MotifTable::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, mt);
        close(total_length(&mt, &db, &covers).unwrap(), total_length(&back, &db, &covers).unwrap(), 0.0);
    }
}
