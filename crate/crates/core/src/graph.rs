//! Labeled directed multigraphs, graph databases and the `edge-list-v1`
//! CSV format.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type TypeId = usize;

/// Header of the `edge-list-v1` format.
pub const EDGE_LIST_HEADER: [&str; 6] = ["graph_id", "src", "dst", "src_type", "dst_type", "mult"];

/// Ordered set of node-type labels. Indices are assigned in insertion order
/// and never change afterwards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeAlphabet {
    labels: Vec<String>,
    index: HashMap<String, TypeId>,
}

impl TypeAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Self::new();
        for label in labels {
            let label = label.into();
            if alphabet.index.contains_key(&label) {
                return Err(Error::Validation(format!("duplicate type label {label:?}")));
            }
            alphabet.intern(&label);
        }
        Ok(alphabet)
    }

    /// Returns the index of `label`, adding it if unseen.
    pub fn intern(&mut self, label: &str) -> TypeId {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<TypeId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, ty: TypeId) -> &str {
        &self.labels[ty]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of types, `T`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Edge-copy counts aggregated by (source type, destination type).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypePairCounts {
    counts: BTreeMap<(TypeId, TypeId), u64>,
}

impl TypePairCounts {
    pub fn get(&self, src: TypeId, dst: TypeId) -> u64 {
        self.counts.get(&(src, dst)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, src: TypeId, dst: TypeId, count: u64) {
        if count > 0 {
            *self.counts.entry((src, dst)).or_insert(0) += count;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((TypeId, TypeId), u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// One database record: typed nodes and directed edges with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledMultiGraph {
    id: String,
    nodes: BTreeMap<NodeId, TypeId>,
    edges: BTreeMap<(NodeId, NodeId), u32>,
}

impl LabeledMultiGraph {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), nodes: BTreeMap::new(), edges: BTreeMap::new() }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Declares a node. Re-declaring with the same type is a no-op.
    pub fn add_node(&mut self, node: NodeId, ty: TypeId) -> Result<()> {
        match self.nodes.get(&node) {
            Some(&old) if old != ty => {
                Err(Error::Validation(format!("graph {}: node {node} declared with types {old} and {ty}", self.id)))
            }
            _ => {
                self.nodes.insert(node, ty);
                Ok(())
            }
        }
    }

    /// Adds `mult` copies of the edge `src -> dst`; repeated calls accumulate.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId, mult: u32) -> Result<()> {
        if mult == 0 {
            return Err(Error::Validation(format!("graph {}: zero multiplicity", self.id)));
        }
        for n in [src, dst] {
            if !self.nodes.contains_key(&n) {
                return Err(Error::Validation(format!("graph {}: edge endpoint {n} is not a declared node", self.id)));
            }
        }
        let m = self.edges.entry((src, dst)).or_insert(0);
        *m = m
            .checked_add(mult)
            .ok_or_else(|| Error::Validation(format!("graph {}: multiplicity overflow", self.id)))?;
        Ok(())
    }

    /// Removes one copy of `src -> dst`. Returns false if the edge is absent.
    pub fn remove_edge_copy(&mut self, src: NodeId, dst: NodeId) -> bool {
        match self.edges.get_mut(&(src, dst)) {
            Some(m) if *m > 1 => {
                *m -= 1;
                true
            }
            Some(_) => {
                self.edges.remove(&(src, dst));
                true
            }
            None => false,
        }
    }

    pub fn set_node_type(&mut self, node: NodeId, ty: TypeId) -> Result<()> {
        match self.nodes.get_mut(&node) {
            Some(t) => {
                *t = ty;
                Ok(())
            }
            None => Err(Error::Validation(format!("graph {}: unknown node {node}", self.id))),
        }
    }

    /// Smallest node id larger than every id in use.
    pub fn next_node_id(&self) -> NodeId {
        self.nodes.keys().next_back().map_or(0, |&n| n + 1)
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, TypeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(NodeId, NodeId), u32> {
        &self.edges
    }

    pub fn node_type(&self, node: NodeId) -> Option<TypeId> {
        self.nodes.get(&node).copied()
    }

    pub fn multiplicity(&self, src: NodeId, dst: NodeId) -> u32 {
        self.edges.get(&(src, dst)).copied().unwrap_or(0)
    }

    /// `|V_j|`.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of distinct ordered node pairs carrying at least one edge.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sum of all multiplicities.
    pub fn total_multiplicity(&self) -> u64 {
        self.edges.values().map(|&m| m as u64).sum()
    }

    pub fn type_pair_counts(&self) -> TypePairCounts {
        let mut counts = TypePairCounts::default();
        for (&(u, v), &m) in &self.edges {
            counts.add(self.nodes[&u], self.nodes[&v], m as u64);
        }
        counts
    }

    /// Checks the record invariants against an alphabet of size `type_count`.
    pub fn validate(&self, type_count: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Validation(format!("graph {} has no nodes", self.id)));
        }
        if self.edges.is_empty() {
            return Err(Error::Validation(format!("graph {} has no edges", self.id)));
        }
        if let Some((&n, &t)) = self.nodes.iter().find(|(_, &t)| t >= type_count) {
            return Err(Error::Validation(format!(
                "graph {}: node {n} has type index {t} outside alphabet of size {type_count}",
                self.id
            )));
        }
        for (&(u, v), &m) in &self.edges {
            if m == 0 || !self.nodes.contains_key(&u) || !self.nodes.contains_key(&v) {
                return Err(Error::Validation(format!("graph {}: bad edge ({u},{v})", self.id)));
            }
        }
        Ok(())
    }

    /// Returns a copy without nodes that touch no edge.
    pub fn without_isolated_nodes(&self) -> Self {
        let mut touched = HashSet::new();
        for &(u, v) in self.edges.keys() {
            touched.insert(u);
            touched.insert(v);
        }
        Self {
            id: self.id.clone(),
            nodes: self.nodes.iter().filter(|(n, _)| touched.contains(n)).map(|(&n, &t)| (n, t)).collect(),
            edges: self.edges.clone(),
        }
    }
}

/// An ordered collection of graphs sharing one type alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDatabase {
    alphabet: TypeAlphabet,
    graphs: Vec<LabeledMultiGraph>,
}

impl GraphDatabase {
    pub fn new(alphabet: TypeAlphabet, graphs: Vec<LabeledMultiGraph>) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &graphs {
            if !seen.insert(g.id()) {
                return Err(Error::Validation(format!("duplicate graph id {:?}", g.id())));
            }
            g.validate(alphabet.len())?;
        }
        Ok(Self { alphabet, graphs })
    }

    pub fn alphabet(&self) -> &TypeAlphabet {
        &self.alphabet
    }

    pub fn graphs(&self) -> &[LabeledMultiGraph] {
        &self.graphs
    }

    pub fn graph(&self, index: usize) -> &LabeledMultiGraph {
        &self.graphs[index]
    }

    pub fn position(&self, graph_id: &str) -> Option<usize> {
        self.graphs.iter().position(|g| g.id() == graph_id)
    }

    /// `J`.
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn into_parts(self) -> (TypeAlphabet, Vec<LabeledMultiGraph>) {
        (self.alphabet, self.graphs)
    }

    /// Equality up to the numbering of type labels: same graph order, same
    /// node ids, same labels per node and same multiplicities.
    pub fn same_content(&self, other: &GraphDatabase) -> bool {
        if self.graphs.len() != other.graphs.len() {
            return false;
        }
        self.graphs.iter().zip(&other.graphs).all(|(a, b)| {
            a.id == b.id
                && a.edges == b.edges
                && a.nodes.len() == b.nodes.len()
                && a.nodes
                    .iter()
                    .zip(&b.nodes)
                    .all(|((na, ta), (nb, tb))| na == nb && self.alphabet.label(*ta) == other.alphabet.label(*tb))
        })
    }

    /// Parses an `edge-list-v1` stream.
    pub fn parse_edge_list<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            None => return Err(Error::EmptyDatabase),
            Some(r) => r?,
        };
        let columns = header.len();
        let header_ok = (columns == 6 || columns == 5) && header.iter().zip(EDGE_LIST_HEADER).all(|(h, e)| h == e);
        if !header_ok {
            return Err(Error::Format(format!(
                "expected header {:?} (mult optional), found {:?}",
                EDGE_LIST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }

        let mut alphabet = TypeAlphabet::new();
        let mut order: HashMap<String, usize> = HashMap::new();
        let mut graphs: Vec<LabeledMultiGraph> = Vec::new();
        for record in records {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |msg: String| Error::Parse { line, msg };
            if record.len() != columns {
                return Err(bad(format!("expected {columns} fields, found {}", record.len())));
            }
            let graph_id = &record[0];
            if graph_id.is_empty() {
                return Err(bad("empty graph_id".into()));
            }
            let src: NodeId = record[1].parse().map_err(|_| bad(format!("invalid src node id {:?}", &record[1])))?;
            let dst: NodeId = record[2].parse().map_err(|_| bad(format!("invalid dst node id {:?}", &record[2])))?;
            if record[3].is_empty() || record[4].is_empty() {
                return Err(bad("empty node type".into()));
            }
            let mult: u32 = match record.get(5) {
                None | Some("") => 1,
                Some(s) => match s.parse() {
                    Ok(m) if m >= 1 => m,
                    _ => return Err(bad(format!("invalid multiplicity {s:?}"))),
                },
            };
            let st = alphabet.intern(&record[3]);
            let dt = alphabet.intern(&record[4]);
            let gi = *order.entry(graph_id.to_string()).or_insert_with(|| {
                graphs.push(LabeledMultiGraph::new(graph_id));
                graphs.len() - 1
            });
            let g = &mut graphs[gi];
            g.add_node(src, st).map_err(|e| bad(e.to_string()))?;
            g.add_node(dst, dt).map_err(|e| bad(e.to_string()))?;
            g.add_edge(src, dst, mult).map_err(|e| bad(e.to_string()))?;
        }
        if graphs.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Self::new(alphabet, graphs)
    }

    pub fn parse_edge_list_str(text: &str) -> Result<Self> {
        Self::parse_edge_list(text.as_bytes())
    }

    /// Writes `edge-list-v1`, one row per distinct edge, in graph order then
    /// `(src, dst)` order.
    pub fn write_edge_list<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(writer);
        wtr.write_record(EDGE_LIST_HEADER)?;
        for g in &self.graphs {
            for (&(u, v), &m) in &g.edges {
                wtr.write_record([
                    g.id.as_str(),
                    &u.to_string(),
                    &v.to_string(),
                    self.alphabet.label(g.nodes[&u]),
                    self.alphabet.label(g.nodes[&v]),
                    &m.to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("labels are utf-8")
    }
}
