//! End-to-end fitting: enumeration and cover selection per graph, then the
//! table search.

use log::{info, warn};
use rayon::prelude::*;

use crate::encoding::MotifTable;
use crate::enumerate::{enumerate_with_cache, EnumerationConfig, MotifCache};
use crate::error::Result;
use crate::graph::GraphDatabase;
use crate::mis::{greedy_mis_memory_efficient, CoverSolution};
use crate::search::{candidate_motifs, search_motif_table, standard_motif_table, SearchState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitConfig {
    pub enumeration: EnumerationConfig,
    pub weighted: bool,
}

#[derive(Clone, Debug)]
pub struct FittedModel {
    pub table: MotifTable,
    /// Covers restricted to the accepted motifs.
    pub covers: Vec<CoverSolution>,
    pub state: SearchState,
    pub candidate_count: usize,
    /// Graphs whose enumeration hit the budget.
    pub truncated_graphs: usize,
}

/// Per-graph covers from the greedy selection over all enumerated motifs.
pub fn initial_covers(db: &GraphDatabase, config: &FitConfig) -> (Vec<CoverSolution>, usize) {
    let results: Vec<(CoverSolution, bool)> = db
        .graphs()
        .par_iter()
        .map_init(MotifCache::default, |cache, g| {
            let en = enumerate_with_cache(g, &config.enumeration, cache);
            (greedy_mis_memory_efficient(&en.occurrences, g, config.weighted), en.truncated)
        })
        .collect();
    let truncated = results.iter().filter(|(_, t)| *t).count();
    if truncated > 0 {
        warn!("enumeration budget reached in {truncated} graphs");
    }
    (results.into_iter().map(|(c, _)| c).collect(), truncated)
}

pub fn fit(db: &GraphDatabase, config: &FitConfig) -> Result<FittedModel> {
    let (covers, truncated_graphs) = initial_covers(db, config);
    let candidates = candidate_motifs(&covers);
    info!("fit: {} graphs, {} candidate motifs", db.len(), candidates.len());
    let (table, covers, state) = search_motif_table(db, &candidates, &covers)?;
    Ok(FittedModel { table, covers, state, candidate_count: candidates.len(), truncated_graphs })
}

/// The standard table as a fitted model with no search.
pub fn fit_standard(db: &GraphDatabase) -> Result<(MotifTable, Vec<CoverSolution>)> {
    standard_motif_table(db)
}
