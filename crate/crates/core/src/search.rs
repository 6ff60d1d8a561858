//! Standard motif table and best-first greedy table search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use log::{debug, info};
use rayon::prelude::*;

use crate::canon::{CanonicalKey, Motif, TypedEdge};
use crate::encoding::{ln_bits, motif_encoding_length, perm_bits, total_length, MotifTable};
use crate::error::{Error, Result};
use crate::graph::{GraphDatabase, LabeledMultiGraph, NodeId};
use crate::mis::CoverSolution;

/// Relative tolerance between tracked and recomputed totals.
pub const TOTAL_TOLERANCE: f64 = 1e-6;

/// Table of observed typed edges, with the covers that use nothing else.
pub fn standard_motif_table(db: &GraphDatabase) -> Result<(MotifTable, Vec<CoverSolution>)> {
    let covers: Vec<CoverSolution> = db.graphs().iter().map(CoverSolution::all_residual).collect();
    let table = MotifTable::from_covers(db, &covers)?;
    Ok((table, covers))
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub motif: Arc<Motif>,
    /// Selected instance count per graph index.
    pub per_graph: BTreeMap<usize, u64>,
}

/// Isomorphism classes of the occurrences selected in the covers.
#[derive(Clone, Debug, Default)]
pub struct CandidateSet {
    candidates: BTreeMap<CanonicalKey, Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<&Candidate> {
        self.candidates.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, &Candidate)> {
        self.candidates.iter()
    }
}

pub fn candidate_motifs(covers: &[CoverSolution]) -> CandidateSet {
    let mut candidates: BTreeMap<CanonicalKey, Candidate> = BTreeMap::new();
    for (j, cover) in covers.iter().enumerate() {
        for (occ, c) in cover.selected() {
            let cand = candidates
                .entry(occ.key().clone())
                .or_insert_with(|| Candidate { motif: occ.motif().clone(), per_graph: BTreeMap::new() });
            *cand.per_graph.entry(j).or_insert(0) += *c as u64;
        }
    }
    CandidateSet { candidates }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// `None` for the starting table.
    pub accepted: Option<CanonicalKey>,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct SearchState {
    /// Accepted motifs in acceptance order.
    pub accepted: Vec<CanonicalKey>,
    /// Per-graph typed-edge counts left for the typed-edge motifs.
    pub counts: Vec<BTreeMap<TypedEdge, u64>>,
    pub total: f64,
    pub smt_total: f64,
    pub trace: Vec<TraceRow>,
    /// Accepted motifs that left the total unchanged.
    pub zero_gain: Vec<CanonicalKey>,
}

impl SearchState {
    /// Trace as `iteration,accepted_key,total_bits` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,accepted_key,total_bits\n");
        for row in &self.trace {
            let key = row.accepted.as_ref().map(CanonicalKey::to_hex).unwrap_or_default();
            out.push_str(&format!("{},{},{:.6}\n", row.iteration, key, row.total));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct MotifStat {
    bits: f64,
    usage: u64,
    records: u64,
}

/// Running usages, record counts and per-record placement cost; enough to
/// give the total length in closed form.
#[derive(Clone, Debug)]
struct Ledger {
    type_bits: f64,
    stats: HashMap<CanonicalKey, MotifStat>,
    placement: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct Aggregates {
    motif_bits: f64,
    symbols: f64,
    weighted_log_usage: f64,
    usage: u64,
}

impl Aggregates {
    fn add(&mut self, s: &MotifStat, sign: f64) {
        if s.usage == 0 {
            return;
        }
        let symbols = (1 + s.records) as f64;
        self.motif_bits += sign * s.bits;
        self.symbols += sign * symbols;
        self.weighted_log_usage += sign * symbols * (s.usage as f64).log2();
        if sign > 0.0 {
            self.usage += s.usage;
        } else {
            self.usage -= s.usage;
        }
    }

    fn total(&self, type_bits: f64, placement: f64) -> f64 {
        let log_u = if self.usage > 0 { (self.usage as f64).log2() } else { 0.0 };
        type_bits + self.motif_bits + self.symbols * log_u - self.weighted_log_usage + placement
    }
}

impl Ledger {
    fn aggregates(&self) -> Aggregates {
        let mut keys: Vec<&CanonicalKey> = self.stats.keys().collect();
        keys.sort();
        let mut agg = Aggregates::default();
        for k in keys {
            agg.add(&self.stats[k], 1.0);
        }
        agg
    }

    fn total(&self) -> f64 {
        self.aggregates().total(self.type_bits, self.placement)
    }
}

/// Effect of accepting one candidate.
#[derive(Debug, Default)]
struct Delta {
    stats: BTreeMap<CanonicalKey, (i64, i64)>,
    placement: f64,
    residual: Vec<(usize, (NodeId, NodeId), u32)>,
}

struct Searcher<'a> {
    db: &'a GraphDatabase,
    covers: &'a [CoverSolution],
    candidates: &'a CandidateSet,
    edge_keys: HashMap<TypedEdge, CanonicalKey>,
    residual: Vec<BTreeMap<(NodeId, NodeId), u32>>,
    ledger: Ledger,
}

fn typed_edge_of(g: &LabeledMultiGraph, (u, v): (NodeId, NodeId)) -> TypedEdge {
    TypedEdge::new(g.nodes()[&u], g.nodes()[&v], u == v)
}

fn record_placement(node_count: usize, n: usize, mult: u64) -> f64 {
    perm_bits(node_count, n) + ln_bits(mult)
}

impl<'a> Searcher<'a> {
    fn new(db: &'a GraphDatabase, covers: &'a [CoverSolution], candidates: &'a CandidateSet) -> Self {
        let t = db.alphabet().len();
        let mut edge_keys = HashMap::new();
        let mut stats: HashMap<CanonicalKey, MotifStat> = HashMap::new();
        let mut placement = 0.0;
        let mut residual = Vec::with_capacity(db.len());
        for g in db.graphs() {
            for (&e, &m) in g.edges() {
                let te = typed_edge_of(g, e);
                let key = edge_keys.entry(te).or_insert_with(|| Motif::typed_edge(te).key().clone()).clone();
                let stat = stats.entry(key).or_insert_with(|| MotifStat {
                    bits: motif_encoding_length(&Motif::typed_edge(te), t),
                    ..MotifStat::default()
                });
                stat.usage += m as u64;
                stat.records += 1;
                placement += record_placement(g.node_count(), if te.self_loop { 1 } else { 2 }, m as u64);
            }
            residual.push(g.edges().clone());
        }
        let ledger = Ledger { type_bits: ln_bits(t.max(1) as u64), stats, placement };
        Self { db, covers, candidates, edge_keys, residual, ledger }
    }

    fn delta(&self, key: &CanonicalKey) -> Result<Delta> {
        let cand = &self.candidates.candidates[key];
        let n = cand.motif.n();
        let mut delta = Delta::default();
        let mut own = (0i64, 0i64);
        for &j in cand.per_graph.keys() {
            let g = self.db.graph(j);
            let v = g.node_count();
            let mut taken: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
            for (occ, c) in self.covers[j].selected().iter().filter(|(o, _)| o.key() == key) {
                own.0 += *c as i64;
                own.1 += 1;
                delta.placement += record_placement(v, n, *c as u64);
                for &e in occ.edges() {
                    *taken.entry(e).or_insert(0) += c;
                }
            }
            for (e, d) in taken {
                let r = self.residual[j].get(&e).copied().unwrap_or(0);
                let left = r.checked_sub(d).ok_or_else(|| {
                    Error::Invariant(format!("graph {}: typed-edge count below zero at {e:?}", g.id()))
                })?;
                let te = typed_edge_of(g, e);
                let size = if te.self_loop { 1 } else { 2 };
                let entry = delta.stats.entry(self.edge_keys[&te].clone()).or_insert((0, 0));
                entry.0 -= d as i64;
                delta.placement -= record_placement(v, size, r as u64);
                if left > 0 {
                    delta.placement += record_placement(v, size, left as u64);
                } else {
                    entry.1 -= 1;
                }
                delta.residual.push((j, e, left));
            }
        }
        delta.stats.insert(key.clone(), own);
        Ok(delta)
    }

    fn evaluate(&self, key: &CanonicalKey, base: &Aggregates) -> Result<f64> {
        let delta = self.delta(key)?;
        let mut agg = *base;
        let t = self.db.alphabet().len();
        for (k, &(du, dr)) in &delta.stats {
            let old = self.ledger.stats.get(k).copied().unwrap_or_else(|| MotifStat {
                bits: motif_encoding_length(&self.candidates.candidates[k].motif, t),
                ..MotifStat::default()
            });
            let new = MotifStat {
                bits: old.bits,
                usage: (old.usage as i64 + du) as u64,
                records: (old.records as i64 + dr) as u64,
            };
            agg.add(&old, -1.0);
            agg.add(&new, 1.0);
        }
        Ok(agg.total(self.ledger.type_bits, self.ledger.placement + delta.placement))
    }

    fn apply(&mut self, key: &CanonicalKey) -> Result<()> {
        let delta = self.delta(key)?;
        let t = self.db.alphabet().len();
        for (k, (du, dr)) in delta.stats {
            let bits = self.candidates.candidates.get(&k).map(|c| motif_encoding_length(&c.motif, t));
            let stat = self
                .ledger
                .stats
                .entry(k)
                .or_insert_with(|| MotifStat { bits: bits.unwrap_or(0.0), ..MotifStat::default() });
            let usage = stat.usage as i64 + du;
            let records = stat.records as i64 + dr;
            if usage < 0 || records < 0 || (usage == 0) != (records == 0) {
                return Err(Error::Invariant("usage and record counts out of step".into()));
            }
            stat.usage = usage as u64;
            stat.records = records as u64;
        }
        self.ledger.stats.retain(|_, s| s.usage > 0);
        self.ledger.placement += delta.placement;
        for (j, e, left) in delta.residual {
            if left == 0 {
                self.residual[j].remove(&e);
            } else {
                self.residual[j].insert(e, left);
            }
        }
        Ok(())
    }

    fn counts(&self) -> Vec<BTreeMap<TypedEdge, u64>> {
        self.db
            .graphs()
            .iter()
            .zip(&self.residual)
            .map(|(g, res)| {
                let mut m = BTreeMap::new();
                for (&e, &r) in res {
                    *m.entry(typed_edge_of(g, e)).or_insert(0) += r as u64;
                }
                m
            })
            .collect()
    }
}

fn check_close(tracked: f64, fresh: f64, what: &str) -> Result<()> {
    if (tracked - fresh).abs() > TOTAL_TOLERANCE * fresh.abs().max(1.0) {
        return Err(Error::Invariant(format!("{what}: tracked total {tracked} but recomputed {fresh}")));
    }
    Ok(())
}

/// Best-first greedy search from the standard table. Each round evaluates
/// every remaining candidate against the current table and accepts the one
/// with the smallest total if it does not exceed the current total.
pub fn search_motif_table(
    db: &GraphDatabase,
    candidates: &CandidateSet,
    covers: &[CoverSolution],
) -> Result<(MotifTable, Vec<CoverSolution>, SearchState)> {
    if covers.len() != db.len() {
        return Err(Error::Validation(format!("{} covers for {} graphs", covers.len(), db.len())));
    }
    for (key, cand) in candidates.iter() {
        for (&j, &c) in &cand.per_graph {
            let found: u64 = covers
                .get(j)
                .map(|cv| cv.selected().iter().filter(|(o, _)| o.key() == key).map(|(_, n)| *n as u64).sum())
                .unwrap_or(0);
            if found != c {
                return Err(Error::Invariant(format!(
                    "candidate {} claims {c} instances in graph {j}, cover has {found}",
                    key.to_hex()
                )));
            }
        }
    }

    let mut searcher = Searcher::new(db, covers, candidates);
    let mut total = searcher.ledger.total();
    let smt_total = total;
    let mut trace = vec![TraceRow { iteration: 0, accepted: None, total }];
    let mut accepted = Vec::new();
    let mut zero_gain = Vec::new();
    let mut remaining: BTreeSet<CanonicalKey> = candidates.candidates.keys().cloned().collect();
    info!("search: {} candidates, starting total {total:.3} bits", remaining.len());

    while !remaining.is_empty() {
        let base = searcher.ledger.aggregates();
        let keys: Vec<&CanonicalKey> = remaining.iter().collect();
        let scored: Vec<(f64, &CanonicalKey)> =
            keys.par_iter().map(|k| searcher.evaluate(k, &base).map(|t| (t, *k))).collect::<Result<_>>()?;
        let (best_total, best_key) = scored
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
            .expect("remaining is nonempty");
        if best_total > total {
            debug!("search: best candidate {} would give {best_total:.3}, stopping", best_key.to_hex());
            break;
        }
        let best_key = best_key.clone();
        searcher.apply(&best_key)?;
        let fresh = searcher.ledger.total();
        check_close(best_total, fresh, "incremental evaluation")?;
        if fresh == total {
            info!("search: zero-gain acceptance of {}", best_key.to_hex());
            zero_gain.push(best_key.clone());
        }
        total = fresh;
        remaining.remove(&best_key);
        accepted.push(best_key.clone());
        trace.push(TraceRow { iteration: accepted.len(), accepted: Some(best_key), total });
        debug!("search: accepted motif #{} total {total:.3}", accepted.len());
    }

    let accepted_set: BTreeSet<&CanonicalKey> = accepted.iter().collect();
    let final_covers: Vec<CoverSolution> = db
        .graphs()
        .iter()
        .zip(covers)
        .map(|(g, c)| c.restrict(g, |k| accepted_set.contains(k)))
        .collect::<Result<_>>()?;
    let mut table = MotifTable::from_covers(db, &final_covers)?;
    table.prune_unused();
    check_close(total, total_length(&table, db, &final_covers)?, "final table")?;

    let counts = searcher.counts();
    for ((g, cover), cnt) in db.graphs().iter().zip(&final_covers).zip(&counts) {
        let covered: u64 = cover.selected().iter().map(|(o, c)| o.edges().len() as u64 * *c as u64).sum();
        if covered + cnt.values().sum::<u64>() != g.total_multiplicity() {
            return Err(Error::Invariant(format!("graph {}: edge copies not conserved", g.id())));
        }
    }
    info!("search: accepted {} motifs, total {total:.3} bits (standard table {smt_total:.3})", accepted.len());
    let state = SearchState { accepted, counts, total, smt_total, trace, zero_gain };
    Ok((table, final_covers, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_simple_occurrences, EnumerationConfig};
    use crate::graph::TypeAlphabet;
    use crate::mis::greedy_mis_memory_efficient;

    type Spec<'a> = (&'a [usize], &'a [(NodeId, NodeId, u32)]);

    fn db_of(graphs: &[Spec], labels: &[&str]) -> GraphDatabase {
        let gs = graphs
            .iter()
            .enumerate()
            .map(|(i, (types, edges))| {
                let mut g = LabeledMultiGraph::new(format!("g{i}"));
                for (n, &t) in types.iter().enumerate() {
                    g.add_node(n as NodeId, t).unwrap();
                }
                for &(u, v, m) in edges.iter() {
                    g.add_edge(u, v, m).unwrap();
                }
                g
            })
            .collect();
        GraphDatabase::new(TypeAlphabet::from_labels(labels.iter().copied()).unwrap(), gs).unwrap()
    }

    fn mis_covers(db: &GraphDatabase) -> Vec<CoverSolution> {
        let cfg = EnumerationConfig::new(3, 4, 10_000).unwrap();
        db.graphs()
            .iter()
            .map(|g| greedy_mis_memory_efficient(&enumerate_simple_occurrences(g, &cfg).occurrences, g, true))
            .collect()
    }

    #[test]
    fn standard_table_examples() {
        let db = db_of(&[(&[0, 1], &[(0, 1, 2)])], &["A", "B"]);
        let (t, covers) = standard_motif_table(&db).unwrap();
        assert_eq!(t.len(), 1);
        let e = t.entries().next().unwrap();
        assert_eq!((e.usage, e.code_length), (2, Some(0.0)));
        assert!(covers[0].selected().is_empty());

        let db = db_of(&[(&[0, 1, 2], &[(0, 1, 1), (0, 2, 1)])], &["A", "B", "C"]);
        let (t, _) = standard_motif_table(&db).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.entries().all(|e| e.code_length == Some(1.0)));
        let ba = Motif::typed_edge(TypedEdge::new(1, 0, false));
        assert!(t.get(ba.key()).is_none());
    }

    #[test]
    fn candidates_dedup_by_class() {
        let chain: (&[usize], &[(NodeId, NodeId, u32)]) = (&[0, 1, 2], &[(0, 1, 1), (1, 2, 1)]);
        let db = db_of(&[chain; 5], &["A", "B", "C"]);
        let cs = candidate_motifs(&mis_covers(&db));
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.iter().next().unwrap().1.per_graph.len(), 5);
        assert!(candidate_motifs(&standard_motif_table(&db).unwrap().1).is_empty());

        let two = db_of(&[(&[0, 1, 2, 0, 1, 2], &[(0, 1, 1), (1, 2, 1), (3, 4, 1), (4, 5, 1)])], &["A", "B", "C"]);
        let cs = candidate_motifs(&mis_covers(&two));
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.iter().next().unwrap().1.per_graph[&0], 2);
    }

    #[test]
    fn frequent_motif_is_accepted() {
        let chain: (&[usize], &[(NodeId, NodeId, u32)]) = (&[0, 1, 2], &[(0, 1, 1), (1, 2, 1)]);
        let db = db_of(&[chain; 40], &["A", "B", "C"]);
        let covers = mis_covers(&db);
        let cs = candidate_motifs(&covers);
        let (table, final_covers, state) = search_motif_table(&db, &cs, &covers).unwrap();
        assert_eq!(state.accepted.len(), 1);
        assert!(state.total < state.smt_total);
        assert_eq!(table.len(), 1);
        assert!(final_covers.iter().all(|c| c.residual().is_empty()));
        assert_eq!(state.trace.len(), 2);
    }

    #[test]
    fn rare_motif_is_rejected() {
        let mut graphs: Vec<Spec> = vec![(&[0, 1], &[(0, 1, 1)]); 30];
        graphs.push((&[0, 1, 0], &[(0, 1, 1), (1, 2, 1)]));
        let db = db_of(&graphs, &["A", "B"]);
        let covers = mis_covers(&db);
        let cs = candidate_motifs(&covers);
        assert_eq!(cs.len(), 1);
        let (table, _, state) = search_motif_table(&db, &cs, &covers).unwrap();
        assert!(state.accepted.is_empty());
        let (smt, _) = standard_motif_table(&db).unwrap();
        assert_eq!(table, smt);
        assert_eq!(state.total, state.smt_total);
    }

    #[test]
    fn empty_candidates_keep_standard_table() {
        let db = db_of(&[(&[0, 1], &[(0, 1, 3), (1, 0, 1)])], &["A", "B"]);
        let (smt, covers) = standard_motif_table(&db).unwrap();
        let (table, _, state) = search_motif_table(&db, &CandidateSet::default(), &covers).unwrap();
        assert_eq!(table, smt);
        assert!((state.total - total_length(&smt, &db, &covers).unwrap()).abs() < 1e-9);
    }
}
