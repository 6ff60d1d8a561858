//! Anomaly scoring, injected anomalies, simple baselines, ranking metrics
//! and a planted-motif database generator.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use log::warn;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{Motif, TypedEdge};
use crate::encoding::{graph_lengths, MotifTable};
use crate::error::{Error, Result};
use crate::graph::{GraphDatabase, LabeledMultiGraph, NodeId, TypeAlphabet, TypeId};
use crate::mis::CoverSolution;

/// Default share of graphs receiving anomalies.
pub const DEFAULT_GRAPH_FRACTION: f64 = 0.03;
/// Default share of edges (or nodes) changed per injected graph.
pub const DEFAULT_ELEMENT_FRACTION: f64 = 0.10;
/// Default document-frequency ceiling for a rare typed edge.
pub const DEFAULT_RARE_THRESHOLD: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub graph_id: String,
    pub score: f64,
    /// 1 is the most anomalous.
    pub rank: usize,
    pub label: Option<bool>,
}

/// Scores in database order with their ranks; higher is more anomalous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub method: String,
    pub entries: Vec<ScoreEntry>,
}

/// Indices by descending score, ties in input order.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

impl AnomalyReport {
    pub fn from_scores(method: impl Into<String>, ids: &[String], scores: Vec<f64>) -> Self {
        let mut ranks = vec![0; scores.len()];
        for (r, i) in ranking(&scores).into_iter().enumerate() {
            ranks[i] = r + 1;
        }
        let entries = ids
            .iter()
            .zip(scores)
            .zip(ranks)
            .map(|((id, score), rank)| ScoreEntry { graph_id: id.clone(), score, rank, label: None })
            .collect();
        Self { method: method.into(), entries }
    }

    pub fn with_labels(mut self, labels: &InjectionLabels) -> Self {
        let injected: BTreeSet<&str> = labels.injected.iter().map(String::as_str).collect();
        for e in &mut self.entries {
            e.label = Some(injected.contains(e.graph_id.as_str()));
        }
        self
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// Labels in entry order, if every entry has one.
    pub fn labels(&self) -> Option<Vec<bool>> {
        self.entries.iter().map(|e| e.label).collect()
    }

    /// `graph_id,score,rank,label`; the label column is empty without
    /// ground truth.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("graph_id,score,rank,label\n");
        for e in &self.entries {
            let label = match e.label {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            let _ = writeln!(out, "{},{:.9},{},{}", e.graph_id, e.score, e.rank, label);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i as u64 + 2;
            let bad = |msg: &str| Error::Parse { line, msg: msg.to_string() };
            if row.len() != 4 {
                return Err(bad("expected graph_id,score,rank,label"));
            }
            let score = row[1].parse().map_err(|_| bad("bad score"))?;
            let rank = row[2].parse().map_err(|_| bad("bad rank"))?;
            let label = match &row[3] {
                "" => None,
                "0" => Some(false),
                "1" => Some(true),
                _ => return Err(bad("label must be 0, 1 or empty")),
            };
            entries.push(ScoreEntry { graph_id: row[0].to_string(), score, rank, label });
        }
        Ok(Self { method: String::new(), entries })
    }
}

fn graph_ids(db: &GraphDatabase) -> Vec<String> {
    db.graphs().iter().map(|g| g.id().to_string()).collect()
}

/// Encoded length of every graph under `mt`.
pub fn score_database(db: &GraphDatabase, mt: &MotifTable, covers: &[CoverSolution]) -> Result<AnomalyReport> {
    let scores = graph_lengths(mt, db, covers)?;
    Ok(AnomalyReport::from_scores("motifs", &graph_ids(db), scores))
}

/// Negated Shannon entropy of the type-pair distribution.
pub fn baseline_entropy(g: &LabeledMultiGraph) -> f64 {
    let counts = g.type_pair_counts();
    let total = counts.total() as f64;
    if total == 0.0 {
        return 0.0;
    }
    let h: f64 = counts
        .iter()
        .map(|(_, c)| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    if h == 0.0 {
        0.0
    } else {
        -h
    }
}

pub fn baseline_multiedges(g: &LabeledMultiGraph) -> f64 {
    g.total_multiplicity() as f64
}

pub fn score_baseline(
    db: &GraphDatabase,
    method: &str,
    f: impl Fn(&LabeledMultiGraph) -> f64 + Sync + Send,
) -> AnomalyReport {
    let scores: Vec<f64> = db.graphs().par_iter().map(f).collect();
    AnomalyReport::from_scores(method, &graph_ids(db), scores)
}

/// Multi-edge count per ordered type pair (row-major), then node count per
/// type.
pub fn graph_features(g: &LabeledMultiGraph, type_count: usize) -> Vec<u64> {
    let mut out = vec![0u64; type_count * type_count + type_count];
    for ((s, d), c) in g.type_pair_counts().iter() {
        out[s * type_count + d] += c;
    }
    for &t in g.nodes().values() {
        out[type_count * type_count + t] += 1;
    }
    out
}

pub fn features_csv(db: &GraphDatabase) -> String {
    let labels = db.alphabet().labels();
    let t = labels.len();
    let mut out = String::from("graph_id");
    for s in labels {
        for d in labels {
            let _ = write!(out, ",{s}->{d}");
        }
    }
    for l in labels {
        let _ = write!(out, ",n_{l}");
    }
    out.push('\n');
    let rows: Vec<String> = db
        .graphs()
        .par_iter()
        .map(|g| {
            let mut row = g.id().to_string();
            for v in graph_features(g, t) {
                let _ = write!(row, ",{v}");
            }
            row
        })
        .collect();
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionKind {
    Path,
    Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    /// One copy of `removed` replaced by a path through fresh nodes.
    ReplaceEdge {
        removed: (NodeId, NodeId),
        fresh: Vec<(NodeId, String)>,
        path: Vec<NodeId>,
        /// Set when no rare typed edge was available.
        fallback: bool,
    },
    Retype {
        node: NodeId,
        from: String,
        to: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectionLabels {
    pub kind: InjectionKind,
    pub seed: u64,
    /// Injected graph ids in database order.
    pub injected: Vec<String>,
    pub mutations: BTreeMap<String, Vec<Mutation>>,
}

impl InjectionLabels {
    pub fn is_injected(&self, graph_id: &str) -> bool {
        self.mutations.contains_key(graph_id)
    }

    /// Per-graph 0/1 labels aligned with `db`.
    pub fn label_vector(&self, db: &GraphDatabase) -> Vec<bool> {
        db.graphs().iter().map(|g| self.is_injected(g.id())).collect()
    }

    /// `graph_id,label` for every graph.
    pub fn labels_csv(&self, db: &GraphDatabase) -> String {
        let mut out = String::from("graph_id,label\n");
        for g in db.graphs() {
            let _ = writeln!(out, "{},{}", g.id(), u8::from(self.is_injected(g.id())));
        }
        out
    }

    /// Reads `graph_id,label` rows; returns the injected ids in file order.
    pub fn parse_labels_csv(text: &str) -> Result<BTreeMap<String, bool>> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut out = BTreeMap::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i as u64 + 2;
            if row.len() != 2 {
                return Err(Error::Parse { line, msg: "expected graph_id,label".into() });
            }
            let label = match &row[1] {
                "0" => false,
                "1" => true,
                _ => return Err(Error::Parse { line, msg: "label must be 0 or 1".into() }),
            };
            out.insert(row[0].to_string(), label);
        }
        Ok(out)
    }

    /// Applies the recorded mutations to the original database.
    pub fn replay(&self, db: &GraphDatabase) -> Result<GraphDatabase> {
        let alphabet = db.alphabet().clone();
        let ty =
            |label: &str| alphabet.index_of(label).ok_or_else(|| Error::Injection(format!("unknown type {label}")));
        let mut graphs = db.graphs().to_vec();
        for (id, muts) in &self.mutations {
            let pos = db.position(id).ok_or_else(|| Error::Injection(format!("graph {id} is not in the database")))?;
            let g = &mut graphs[pos];
            for m in muts {
                match m {
                    Mutation::ReplaceEdge { removed, fresh, path, .. } => {
                        if !g.remove_edge_copy(removed.0, removed.1) {
                            return Err(Error::Injection(format!("graph {id}: no copy of {removed:?}")));
                        }
                        for (n, label) in fresh {
                            g.add_node(*n, ty(label)?)?;
                        }
                        for w in path.windows(2) {
                            g.add_edge(w[0], w[1], 1)?;
                        }
                    }
                    Mutation::Retype { node, to, .. } => g.set_node_type(*node, ty(to)?)?,
                }
            }
        }
        GraphDatabase::new(alphabet, graphs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InjectionConfig {
    pub graph_fraction: f64,
    pub element_fraction: f64,
    pub rare_threshold: f64,
    pub seed: u64,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        Self {
            graph_fraction: DEFAULT_GRAPH_FRACTION,
            element_fraction: DEFAULT_ELEMENT_FRACTION,
            rare_threshold: DEFAULT_RARE_THRESHOLD,
            seed: 0,
        }
    }
}

impl InjectionConfig {
    fn validate(&self) -> Result<()> {
        for (name, f) in [("graph fraction", self.graph_fraction), ("element fraction", self.element_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        if !(0.0..=1.0).contains(&self.rare_threshold) {
            return Err(Error::Config(format!("rarity threshold must lie in [0, 1], got {}", self.rare_threshold)));
        }
        Ok(())
    }
}

/// `round(fraction * total)`, at least 1.
pub fn injection_count(fraction: f64, total: usize) -> usize {
    ((fraction * total as f64).round() as usize).max(1).min(total.max(1))
}

fn pick_graphs(db: &GraphDatabase, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = injection_count(fraction, db.len());
    let mut chosen = sample(rng, db.len(), n).into_vec();
    chosen.sort_unstable();
    chosen
}

/// Number of graphs containing each non-loop typed edge.
fn document_frequency(db: &GraphDatabase) -> HashMap<(TypeId, TypeId), usize> {
    let mut df = HashMap::new();
    for g in db.graphs() {
        let pairs: BTreeSet<(TypeId, TypeId)> =
            g.edges().keys().filter(|(u, v)| u != v).map(|&(u, v)| (g.nodes()[&u], g.nodes()[&v])).collect();
        for p in pairs {
            *df.entry(p).or_insert(0) += 1;
        }
    }
    df
}

fn pick_copy(g: &LabeledMultiGraph, rng: &mut ChaCha8Rng) -> (NodeId, NodeId) {
    let mut r = rng.gen_range(0..g.total_multiplicity());
    for (&e, &m) in g.edges() {
        if r < m as u64 {
            return e;
        }
        r -= m as u64;
    }
    unreachable!("graph has at least one edge copy")
}

/// Replaces edge copies in a few graphs with short paths through fresh
/// nodes, typed so the path carries a rare typed edge.
pub fn inject_path_anomalies(db: &GraphDatabase, config: &InjectionConfig) -> Result<(GraphDatabase, InjectionLabels)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t = db.alphabet().len();
    let df = document_frequency(db);
    let ceiling = config.rare_threshold * db.len() as f64;
    let freq = |p: (TypeId, TypeId)| df.get(&p).copied().unwrap_or(0);

    let chosen = pick_graphs(db, config.graph_fraction, &mut rng);
    let mut labels = InjectionLabels {
        kind: InjectionKind::Path,
        seed: config.seed,
        injected: chosen.iter().map(|&j| db.graph(j).id().to_string()).collect(),
        mutations: BTreeMap::new(),
    };
    for &j in &chosen {
        let mut g = db.graph(j).clone();
        let reps = injection_count(config.element_fraction, g.edge_count());
        let mut muts = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (u, v) = pick_copy(&g, &mut rng);
            let hops = if rng.gen_bool(0.5) { 2 } else { 3 };
            let inner = hops - 1;
            let (tu, tv) = (g.nodes()[&u], g.nodes()[&v]);

            // rarest typed edge along each possible typing of the inner nodes
            let combos = t.pow(inner as u32);
            let mut best: Vec<(usize, usize)> = Vec::with_capacity(combos);
            for c in 0..combos {
                let types: Vec<TypeId> = (0..inner).map(|i| (c / t.pow(i as u32)) % t).collect();
                let mut chain = vec![tu];
                chain.extend(&types);
                chain.push(tv);
                let rarest = chain.windows(2).map(|w| freq((w[0], w[1]))).min().unwrap_or(0);
                best.push((c, rarest));
            }
            let unseen: Vec<usize> = best.iter().filter(|b| b.1 == 0).map(|b| b.0).collect();
            let rare: Vec<usize> = best.iter().filter(|b| b.1 as f64 <= ceiling).map(|b| b.0).collect();
            let (pool, fallback) = if !unseen.is_empty() {
                (unseen, false)
            } else if !rare.is_empty() {
                (rare, false)
            } else {
                let min = best.iter().map(|b| b.1).min().unwrap_or(0);
                (best.iter().filter(|b| b.1 == min).map(|b| b.0).collect(), true)
            };
            if fallback {
                warn!("graph {}: no rare typed edge available, using the least frequent", g.id());
            }
            let c = pool[rng.gen_range(0..pool.len())];
            let types: Vec<TypeId> = (0..inner).map(|i| (c / t.pow(i as u32)) % t).collect();

            g.remove_edge_copy(u, v);
            let mut fresh = Vec::with_capacity(inner);
            let mut path = vec![u];
            for ty in types {
                let n = g.next_node_id();
                g.add_node(n, ty)?;
                fresh.push((n, db.alphabet().label(ty).to_string()));
                path.push(n);
            }
            path.push(v);
            for w in path.windows(2) {
                g.add_edge(w[0], w[1], 1)?;
            }
            muts.push(Mutation::ReplaceEdge { removed: (u, v), fresh, path, fallback });
        }
        labels.mutations.insert(g.id().to_string(), muts);
    }
    let out = labels.replay(db)?;
    Ok((out, labels))
}

/// Gives a few nodes in a few graphs a different type.
pub fn inject_type_anomalies(db: &GraphDatabase, config: &InjectionConfig) -> Result<(GraphDatabase, InjectionLabels)> {
    config.validate()?;
    let t = db.alphabet().len();
    if t < 2 {
        return Err(Error::Injection("retyping needs at least two types".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let chosen = pick_graphs(db, config.graph_fraction, &mut rng);
    let mut labels = InjectionLabels {
        kind: InjectionKind::Type,
        seed: config.seed,
        injected: chosen.iter().map(|&j| db.graph(j).id().to_string()).collect(),
        mutations: BTreeMap::new(),
    };
    for &j in &chosen {
        let g = db.graph(j);
        let nodes: Vec<(NodeId, TypeId)> = g.nodes().iter().map(|(&n, &t)| (n, t)).collect();
        let count = injection_count(config.element_fraction, nodes.len());
        let mut picked = sample(&mut rng, nodes.len(), count).into_vec();
        picked.sort_unstable();
        let muts = picked
            .into_iter()
            .map(|i| {
                let (node, from) = nodes[i];
                let mut to = rng.gen_range(0..t - 1);
                if to >= from {
                    to += 1;
                }
                Mutation::Retype {
                    node,
                    from: db.alphabet().label(from).to_string(),
                    to: db.alphabet().label(to).to_string(),
                }
            })
            .collect();
        labels.mutations.insert(g.id().to_string(), muts);
    }
    let out = labels.replay(db)?;
    Ok((out, labels))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "precision@10")]
    pub precision_at_10: f64,
    #[serde(rename = "precision@100")]
    pub precision_at_100: f64,
    #[serde(rename = "precision@1000")]
    pub precision_at_1000: f64,
    #[serde(rename = "AUC")]
    pub auc: f64,
    #[serde(rename = "AP")]
    pub ap: f64,
}

/// Fraction of injected graphs among the top `k` (capped at the list size).
pub fn precision_at(scores: &[f64], labels: &[bool], k: usize) -> f64 {
    let k = k.min(scores.len());
    if k == 0 {
        return 0.0;
    }
    let hits = ranking(scores).into_iter().take(k).filter(|&i| labels[i]).count();
    hits as f64 / k as f64
}

/// Rank-sum AUC with midranks for ties.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Metric("AUC needs both injected and clean graphs".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * (i..=j).filter(|&k| labels[idx[k]]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Mean precision at the rank of each injected graph.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(Error::Metric("average precision needs an injected graph".into()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, i) in ranking(scores).into_iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

pub fn evaluate_scores(scores: &[f64], labels: &[bool]) -> Result<Metrics> {
    if labels.is_empty() || labels.len() != scores.len() {
        return Err(Error::Metric(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    Ok(Metrics {
        precision_at_10: precision_at(scores, labels, 10),
        precision_at_100: precision_at(scores, labels, 100),
        precision_at_1000: precision_at(scores, labels, 1000),
        auc: auc(scores, labels)?,
        ap: average_precision(scores, labels)?,
    })
}

pub fn evaluate(report: &AnomalyReport) -> Result<Metrics> {
    let labels = report.labels().ok_or_else(|| Error::Metric("report lacks ground-truth labels".into()))?;
    evaluate_scores(&report.scores(), &labels)
}

/// Settings for [`generate_synthetic_db`].
#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub n_graphs: usize,
    pub alphabet: TypeAlphabet,
    /// Planted motifs and their positive mixing weights.
    pub motifs: Vec<(Motif, f64)>,
    /// Inclusive range of node counts per graph.
    pub nodes: (usize, usize),
    /// Success probability of the geometric multiplicity; 1 gives simple
    /// graphs.
    pub multiplicity_p: f64,
    /// Chance that an instance is glued to the graph through one existing
    /// node of matching type.
    pub share_p: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// A fixed family of `motif_count` (1 to 5) planted motifs over six
    /// shared types, weighted toward the first.
    pub fn planted(n_graphs: usize, motif_count: usize, seed: u64) -> Result<Self> {
        if !(1..=5).contains(&motif_count) {
            return Err(Error::Config(format!("between 1 and 5 planted motifs, got {motif_count}")));
        }
        let alphabet = TypeAlphabet::from_labels((0..6).map(|i| format!("T{i}")))?;
        type Spec = (&'static [usize], &'static [(usize, usize)]);
        let specs: [Spec; 5] = [
            (&[0, 1, 2], &[(0, 1), (1, 2)]),
            (&[1, 2, 3], &[(0, 1), (1, 2), (0, 2)]),
            (&[4, 0, 1, 5], &[(0, 1), (0, 2), (0, 3)]),
            (&[2, 3, 4, 5], &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            (&[5, 0, 3], &[(0, 1), (1, 2), (2, 0)]),
        ];
        let weights = [0.4, 0.25, 0.15, 0.12, 0.08];
        let motifs = specs
            .iter()
            .zip(weights)
            .take(motif_count)
            .map(|((types, edges), w)| {
                let raw = crate::canon::RawMotif::new(types.to_vec(), edges.to_vec());
                Ok((crate::canon::canonical_form(&raw, crate::canon::MAX_MOTIF_NODES)?.0, w))
            })
            .collect::<Result<_>>()?;
        Ok(Self { n_graphs, alphabet, motifs, nodes: (20, 24), multiplicity_p: 0.8, share_p: 0.3, seed })
    }
}

/// Graphs built from sampled planted-motif instances glued on shared
/// nodes. Each instance repeats a geometric number of times, so all its
/// edges share one multiplicity.
pub fn generate_synthetic_db(config: &SyntheticConfig) -> Result<GraphDatabase> {
    if config.motifs.is_empty() || config.motifs.iter().any(|(_, w)| !w.is_finite() || *w <= 0.0) {
        return Err(Error::Config("planted motifs need positive weights".into()));
    }
    let (lo, hi) = config.nodes;
    if lo == 0 || lo > hi {
        return Err(Error::Config(format!("bad node range {lo}..={hi}")));
    }
    if !(config.multiplicity_p > 0.0 && config.multiplicity_p <= 1.0) || !(0.0..=1.0).contains(&config.share_p) {
        return Err(Error::Config("probabilities must lie in (0, 1]".into()));
    }
    let t = config.alphabet.len();
    if config.motifs.iter().any(|(m, _)| m.node_types().iter().any(|&ty| ty >= t)) {
        return Err(Error::Config("planted motif uses a type outside the alphabet".into()));
    }
    let total_w: f64 = config.motifs.iter().map(|(_, w)| w).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.n_graphs.max(1).to_string().len();
    let mut graphs = Vec::with_capacity(config.n_graphs);
    for j in 0..config.n_graphs {
        let mut g = LabeledMultiGraph::new(format!("G{j:0width$}"));
        let target = rng.gen_range(lo..=hi);
        let mut by_type: Vec<Vec<NodeId>> = vec![Vec::new(); t];
        while g.node_count() < target || g.edge_count() == 0 {
            let mut pick = rng.gen::<f64>() * total_w;
            let mut chosen = &config.motifs[config.motifs.len() - 1].0;
            for (m, w) in &config.motifs {
                if pick < *w {
                    chosen = m;
                    break;
                }
                pick -= w;
            }
            // at most one glue node shared with earlier instances
            let glue = if rng.gen_bool(config.share_p) {
                let pos = rng.gen_range(0..chosen.n());
                let pool = &by_type[chosen.node_types()[pos]];
                (!pool.is_empty()).then(|| (pos, pool[rng.gen_range(0..pool.len())]))
            } else {
                None
            };
            let mut placed: Vec<NodeId> = Vec::with_capacity(chosen.n());
            for (pos, &ty) in chosen.node_types().iter().enumerate() {
                let node = match glue {
                    Some((p, n)) if p == pos => n,
                    _ => {
                        let n = g.next_node_id();
                        g.add_node(n, ty)?;
                        by_type[ty].push(n);
                        n
                    }
                };
                placed.push(node);
            }
            let mut m = 1u32;
            while m < 64 && !rng.gen_bool(config.multiplicity_p) {
                m += 1;
            }
            for (a, b) in chosen.edges() {
                if g.multiplicity(placed[a], placed[b]) == 0 {
                    g.add_edge(placed[a], placed[b], m)?;
                }
            }
        }
        graphs.push(g);
    }
    GraphDatabase::new(config.alphabet.clone(), graphs)
}

/// Whether `v` is reachable from `u` in `g`.
pub fn reachable(g: &LabeledMultiGraph, u: NodeId, v: NodeId) -> bool {
    let mut seen = BTreeSet::from([u]);
    let mut stack = vec![u];
    while let Some(x) = stack.pop() {
        if x == v {
            return true;
        }
        for (&(a, b), _) in g.edges().range((x, 0)..=(x, NodeId::MAX)) {
            debug_assert_eq!(a, x);
            if seen.insert(b) {
                stack.push(b);
            }
        }
    }
    false
}

/// Counts of each typed edge in `g` (self-loops separate).
pub fn typed_edge_counts(g: &LabeledMultiGraph) -> BTreeMap<TypedEdge, u64> {
    let mut out = BTreeMap::new();
    for (&(u, v), &m) in g.edges() {
        *out.entry(TypedEdge::new(g.nodes()[&u], g.nodes()[&v], u == v)).or_insert(0) += m as u64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(id: &str, types: &[usize], edges: &[(NodeId, NodeId, u32)]) -> LabeledMultiGraph {
        let mut g = LabeledMultiGraph::new(id);
        for (i, &t) in types.iter().enumerate() {
            g.add_node(i as NodeId, t).unwrap();
        }
        for &(u, v, m) in edges {
            g.add_edge(u, v, m).unwrap();
        }
        g
    }

    fn chain_db(n: usize) -> GraphDatabase {
        let graphs = (0..n)
            .map(|i| {
                graph(&format!("g{i:03}"), &[0, 1, 2, 0, 1], &[(0, 1, 1), (1, 2, 2), (3, 4, 1), (4, 2, 1), (2, 0, 1)])
            })
            .collect();
        GraphDatabase::new(TypeAlphabet::from_labels(["A", "B", "C", "D"]).unwrap(), graphs).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(baseline_entropy(&graph("a", &[0, 1, 2], &[(0, 1, 2), (0, 2, 2)])), -1.0);
        assert_eq!(baseline_entropy(&graph("b", &[0, 1], &[(0, 1, 4)])), 0.0);
        let h = -baseline_entropy(&graph("c", &[0, 1, 2], &[(0, 1, 3), (0, 2, 1)]));
        assert!((h - 0.8112781244591328).abs() < 1e-12);
    }

    #[test]
    fn multiedge_examples() {
        assert_eq!(baseline_multiedges(&graph("a", &[0, 1], &[(0, 1, 3)])), 3.0);
        assert_eq!(baseline_multiedges(&graph("b", &[0, 1, 2], &[(0, 1, 1), (1, 2, 1)])), 2.0);
    }

    #[test]
    fn feature_vector() {
        let g = graph("a", &[0, 1], &[(0, 1, 2)]);
        assert_eq!(graph_features(&g, 2), [0, 2, 0, 0, 1, 1]);
        let db = GraphDatabase::new(TypeAlphabet::from_labels(["A", "B"]).unwrap(), vec![g]).unwrap();
        assert_eq!(features_csv(&db), "graph_id,A->A,A->B,B->A,B->B,n_A,n_B\na,0,2,0,0,1,1\n");
    }

    #[test]
    fn metric_examples() {
        assert_eq!(precision_at(&[0.9, 0.8, 0.1], &[true, false, true], 2), 0.5);
        let perfect = evaluate_scores(&[3.0, 2.0, 1.0, 0.0], &[true, true, false, false]).unwrap();
        assert_eq!((perfect.auc, perfect.ap), (1.0, 1.0));
        assert!(auc(&[1.0, 2.0], &[true, true]).is_err());
        assert_eq!(auc(&[1.0, 1.0, 1.0, 1.0], &[true, false, true, false]).unwrap(), 0.5);
    }

    #[test]
    fn ranks_break_ties_by_input_order() {
        let ids: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let r = AnomalyReport::from_scores("m", &ids, vec![1.0, 2.0, 1.0]);
        let ranks: Vec<usize> = r.entries.iter().map(|e| e.rank).collect();
        assert_eq!(ranks, [2, 1, 3]);
        let back = AnomalyReport::from_csv(&r.to_csv()).unwrap();
        assert_eq!(back.entries, r.entries);
    }

    #[test]
    fn injection_counts() {
        assert_eq!(injection_count(0.03, 100), 3);
        assert_eq!(injection_count(0.10, 5), 1);
        assert_eq!(injection_count(0.10, 4), 1);
        assert_eq!(injection_count(0.10, 25), 3);
    }

    #[test]
    fn path_injection_is_seeded_and_replayable() {
        let db = chain_db(100);
        let cfg = InjectionConfig { seed: 7, ..InjectionConfig::default() };
        let (a, la) = inject_path_anomalies(&db, &cfg).unwrap();
        let (b, lb) = inject_path_anomalies(&db, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(la.injected.len(), 3);
        assert_eq!(la.replay(&db).unwrap(), a);
        for (id, muts) in &la.mutations {
            let g = a.graph(a.position(id).unwrap());
            assert_eq!(muts.len(), 1);
            let Mutation::ReplaceEdge { removed, path, fallback, .. } = &muts[0] else { panic!() };
            assert!(!fallback);
            assert!(reachable(g, removed.0, removed.1));
            assert!(path.len() == 3 || path.len() == 4);
            assert_eq!(g.total_multiplicity(), 6 - 1 + path.len() as u64 - 1);
        }
        let json = serde_json::to_string(&la).unwrap();
        assert_eq!(serde_json::from_str::<InjectionLabels>(&json).unwrap(), la);
    }

    #[test]
    fn type_injection() {
        let db = chain_db(100);
        let cfg = InjectionConfig { seed: 3, ..InjectionConfig::default() };
        let (out, labels) = inject_type_anomalies(&db, &cfg).unwrap();
        assert_eq!(labels, inject_type_anomalies(&db, &cfg).unwrap().1);
        for id in &labels.injected {
            let pos = out.position(id).unwrap();
            let (before, after) = (db.graph(pos), out.graph(pos));
            assert_eq!(before.edges(), after.edges());
            let changed = before.nodes().iter().filter(|(n, t)| after.nodes()[n] != **t).count();
            assert_eq!(changed, 1);
        }
        let one =
            GraphDatabase::new(TypeAlphabet::from_labels(["A"]).unwrap(), vec![graph("a", &[0, 0], &[(0, 1, 1)])])
                .unwrap();
        assert!(matches!(inject_type_anomalies(&one, &cfg), Err(Error::Injection(_))));
    }

    #[test]
    fn synthetic_generation_is_seeded() {
        let cfg = SyntheticConfig::planted(50, 4, 11).unwrap();
        let a = generate_synthetic_db(&cfg).unwrap();
        let b = generate_synthetic_db(&cfg).unwrap();
        assert_eq!(a.to_edge_list_string(), b.to_edge_list_string());
        assert_eq!(a.len(), 50);
        let simple = SyntheticConfig { multiplicity_p: 1.0, ..cfg };
        let s = generate_synthetic_db(&simple).unwrap();
        assert!(s.graphs().iter().all(|g| g.edges().values().all(|&m| m == 1)));
    }
}
