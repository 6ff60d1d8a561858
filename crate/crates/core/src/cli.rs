//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::bench::{
    baseline_entropy, baseline_multiedges, evaluate_scores, features_csv, generate_synthetic_db, inject_path_anomalies,
    inject_type_anomalies, score_baseline, score_database, AnomalyReport, InjectionConfig, InjectionLabels,
    SyntheticConfig, DEFAULT_ELEMENT_FRACTION, DEFAULT_GRAPH_FRACTION, DEFAULT_RARE_THRESHOLD,
};
use crate::canon::CanonicalKey;
use crate::encoding::{decode_graph, encode_graph, MotifTable, TableJson};
use crate::enumerate::{EnumerationConfig, DEFAULT_BUDGET, DEFAULT_K_MAX, DEFAULT_K_MIN};
use crate::error::{Error, Result};
use crate::graph::{GraphDatabase, NodeId};
use crate::mis::CoverSolution;
use crate::pipeline::{fit, fit_standard, initial_covers, FitConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "motifmdl", version, about = "Motif-table compression and graph anomaly scoring")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic database with planted motifs.
    Gen(GenArgs),
    /// Inject path or type anomalies into a database.
    Inject(InjectArgs),
    /// Fit a motif table and write it with the covers and the search trace.
    Search(FitArgs),
    /// Score every graph by its encoded length.
    Score(ScoreArgs),
    /// Compute ranking metrics from a scores file and labels.
    Eval(EvalArgs),
    /// Check that every graph decodes back to itself.
    DecodeCheck(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub graphs: usize,
    /// Number of planted motifs (1 to 5).
    #[arg(long, default_value_t = 4)]
    pub motifs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_nodes: Option<usize>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    /// Success probability of the geometric multiplicity.
    #[arg(long)]
    pub mult_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InjectKind {
    Path,
    Type,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, value_enum)]
    pub inject: InjectKind,
    #[arg(long)]
    pub graph_frac: Option<f64>,
    #[arg(long)]
    pub elem_frac: Option<f64>,
    #[arg(long)]
    pub rare_threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub params: FitParams,
}

/// Enumeration and selection settings.
#[derive(Debug, Args, Clone)]
pub struct FitParams {
    #[arg(long)]
    pub kmin: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Use the weighted selection rule.
    #[arg(long)]
    pub weighted: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Score against a stored table instead of fitting one.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// `graph_id,label` file to fill the label column.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Also write standard-table, entropy and multi-edge scores and the
    /// feature matrix.
    #[arg(long)]
    pub baselines: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scores CSV (`graph_id,score,rank,label`).
    #[arg(long)]
    pub input: PathBuf,
    /// Labels CSV; defaults to the label column of the scores.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub params: FitParams,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

/// Settings that may come from the JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kmin: Option<usize>,
    pub kmax: Option<usize>,
    pub budget: Option<usize>,
    pub weighted: Option<bool>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub graph_frac: Option<f64>,
    pub elem_frac: Option<f64>,
    pub rare_threshold: Option<f64>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub budget: usize,
    pub weighted: bool,
    pub rare_threshold: f64,
    pub graph_fraction: f64,
    pub element_fraction: f64,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl RunConfig {
    fn resolve(file: &ConfigFile, cli: &Cli) -> Result<Self> {
        let (kmin, kmax, budget, weighted, seed, gf, ef, rt) = match &cli.command {
            Command::Search(FitArgs { params: p, .. })
            | Command::Score(ScoreArgs { fit: FitArgs { params: p, .. }, .. })
            | Command::DecodeCheck(DecodeArgs { params: p, .. }) => {
                (p.kmin, p.kmax, p.budget, p.weighted, None, None, None, None)
            }
            Command::Inject(i) => (None, None, None, false, i.seed, i.graph_frac, i.elem_frac, i.rare_threshold),
            Command::Gen(g) => (None, None, None, false, g.seed, None, None, None),
            Command::Eval(_) => (None, None, None, false, None, None, None, None),
        };
        let cfg = RunConfig {
            k_min: kmin.or(file.kmin).unwrap_or(DEFAULT_K_MIN),
            k_max: kmax.or(file.kmax).unwrap_or(DEFAULT_K_MAX),
            budget: budget.or(file.budget).unwrap_or(DEFAULT_BUDGET),
            weighted: weighted || file.weighted.unwrap_or(false),
            rare_threshold: rt.or(file.rare_threshold).unwrap_or(DEFAULT_RARE_THRESHOLD),
            graph_fraction: gf.or(file.graph_frac).unwrap_or(DEFAULT_GRAPH_FRACTION),
            element_fraction: ef.or(file.elem_frac).unwrap_or(DEFAULT_ELEMENT_FRACTION),
            seed: seed.or(file.seed).unwrap_or(0),
            threads: cli.threads.or(file.threads),
        };
        if cfg.threads == Some(0) {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        cfg.fit_config()?;
        Ok(cfg)
    }

    pub fn fit_config(&self) -> Result<FitConfig> {
        Ok(FitConfig {
            enumeration: EnumerationConfig::new(self.k_min, self.k_max, self.budget)?,
            weighted: self.weighted,
        })
    }

    fn injection(&self) -> InjectionConfig {
        InjectionConfig {
            graph_fraction: self.graph_fraction,
            element_fraction: self.element_fraction,
            rare_threshold: self.rare_threshold,
            seed: self.seed,
        }
    }
}

/// One graph's cover in `covers.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverJson {
    pub graph_id: String,
    pub selected: Vec<SelectionJson>,
    /// `[src, dst, copies]` left to typed-edge motifs.
    pub residual: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionJson {
    pub key: String,
    pub nodes: Vec<NodeId>,
    pub count: u32,
}

impl From<&CoverSolution> for CoverJson {
    fn from(c: &CoverSolution) -> Self {
        CoverJson {
            graph_id: c.graph_id().to_string(),
            selected: c
                .selected()
                .iter()
                .map(|(o, n)| SelectionJson { key: o.key().to_hex(), nodes: o.node_map().to_vec(), count: *n })
                .collect(),
            residual: c.residual().iter().map(|(&(u, v), &r)| [u, v, r]).collect(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    info!("wrote {}", path.display());
    Ok(path)
}

fn load_db(path: &Path) -> Result<GraphDatabase> {
    GraphDatabase::parse_edge_list_str(&read_text(path)?)
}

fn load_table(path: &Path) -> Result<MotifTable> {
    let json: TableJson = serde_json::from_str(&read_text(path)?)?;
    MotifTable::from_json(json)
}

/// Covers for a stored table: the usual per-graph selection restricted to
/// the table's motifs.
fn covers_for_table(db: &GraphDatabase, table: &MotifTable, cfg: &FitConfig) -> Result<Vec<CoverSolution>> {
    let keys: BTreeSet<&CanonicalKey> = table.entries().map(|e| e.motif.key()).collect();
    let (covers, _) = initial_covers(db, cfg);
    db.graphs().iter().zip(&covers).map(|(g, c)| c.restrict(g, |k| keys.contains(k))).collect()
}

fn table_and_covers(
    db: &GraphDatabase,
    table: Option<&Path>,
    cfg: &FitConfig,
) -> Result<(MotifTable, Vec<CoverSolution>)> {
    match table {
        Some(path) => {
            let t = load_table(path)?;
            if t.type_count() != db.alphabet().len() {
                return Err(Error::Validation(format!(
                    "table has {} types, database has {}",
                    t.type_count(),
                    db.alphabet().len()
                )));
            }
            let covers = covers_for_table(db, &t, cfg)?;
            Ok((t, covers))
        }
        None => {
            let model = fit(db, cfg)?;
            Ok((model.table, model.covers))
        }
    }
}

fn cmd_gen(args: &GenArgs, cfg: &RunConfig) -> Result<()> {
    let mut sc = SyntheticConfig::planted(args.graphs, args.motifs, cfg.seed)?;
    sc.nodes = (args.min_nodes.unwrap_or(sc.nodes.0), args.max_nodes.unwrap_or(sc.nodes.1));
    if let Some(p) = args.mult_p {
        sc.multiplicity_p = p;
    }
    let db = generate_synthetic_db(&sc)?;
    write_text(&args.output_dir, "db.csv", &db.to_edge_list_string())?;
    println!("generated {} graphs", db.len());
    Ok(())
}

fn cmd_inject(args: &InjectArgs, cfg: &RunConfig) -> Result<()> {
    let db = load_db(&args.input)?;
    let (out, labels) = match args.inject {
        InjectKind::Path => inject_path_anomalies(&db, &cfg.injection())?,
        InjectKind::Type => inject_type_anomalies(&db, &cfg.injection())?,
    };
    write_text(&args.output_dir, "injected.csv", &out.to_edge_list_string())?;
    write_text(&args.output_dir, "labels.csv", &labels.labels_csv(&out))?;
    write_text(&args.output_dir, "mutations.json", &serde_json::to_string_pretty(&labels)?)?;
    println!("injected {} of {} graphs", labels.injected.len(), out.len());
    Ok(())
}

fn cmd_search(args: &FitArgs, cfg: &RunConfig) -> Result<()> {
    let db = load_db(&args.input)?;
    let model = fit(&db, &cfg.fit_config()?)?;
    let table = serde_json::to_string_pretty(&model.table.to_json(Some(db.alphabet())))?;
    write_text(&args.output_dir, "motif_table.json", &table)?;
    let covers: Vec<CoverJson> = model.covers.iter().map(CoverJson::from).collect();
    write_text(&args.output_dir, "covers.json", &serde_json::to_string(&covers)?)?;
    write_text(&args.output_dir, "trace.csv", &model.state.trace_csv())?;
    write_text(&args.output_dir, "run.json", &serde_json::to_string_pretty(cfg)?)?;
    println!(
        "accepted {} of {} candidate motifs; total {:.3} bits (standard table {:.3})",
        model.state.accepted.len(),
        model.candidate_count,
        model.state.total,
        model.state.smt_total
    );
    Ok(())
}

fn attach_labels(report: AnomalyReport, labels: Option<&Path>) -> Result<AnomalyReport> {
    let Some(path) = labels else { return Ok(report) };
    let map = InjectionLabels::parse_labels_csv(&read_text(path)?)?;
    let mut report = report;
    for e in &mut report.entries {
        let l = map.get(&e.graph_id).ok_or_else(|| Error::Validation(format!("no label for graph {}", e.graph_id)))?;
        e.label = Some(*l);
    }
    Ok(report)
}

fn cmd_score(args: &ScoreArgs, cfg: &RunConfig) -> Result<()> {
    let db = load_db(&args.fit.input)?;
    let fit_cfg = cfg.fit_config()?;
    let (table, covers) = table_and_covers(&db, args.table.as_deref(), &fit_cfg)?;
    let labels = args.labels.as_deref();
    let report = attach_labels(score_database(&db, &table, &covers)?, labels)?;
    let dir = &args.fit.output_dir;
    write_text(dir, "scores.csv", &report.to_csv())?;
    if args.baselines {
        let (smt, smt_covers) = fit_standard(&db)?;
        let mut smt_report = score_database(&db, &smt, &smt_covers)?;
        smt_report.method = "smt".into();
        write_text(dir, "scores_smt.csv", &attach_labels(smt_report, labels)?.to_csv())?;
        let ent = score_baseline(&db, "entropy", baseline_entropy);
        write_text(dir, "scores_entropy.csv", &attach_labels(ent, labels)?.to_csv())?;
        let mul = score_baseline(&db, "multiedges", baseline_multiedges);
        write_text(dir, "scores_multiedges.csv", &attach_labels(mul, labels)?.to_csv())?;
        write_text(dir, "features.csv", &features_csv(&db))?;
    }
    println!("scored {} graphs", db.len());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let report = attach_labels(AnomalyReport::from_csv(&read_text(&args.input)?)?, args.labels.as_deref())?;
    let labels = report.labels().ok_or_else(|| Error::Validation("scores lack labels; pass --labels".into()))?;
    let metrics = evaluate_scores(&report.scores(), &labels)?;
    let text = serde_json::to_string_pretty(&metrics)?;
    write_text(&args.output_dir, "metrics.json", &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_decode_check(args: &DecodeArgs, cfg: &RunConfig) -> Result<bool> {
    let db = load_db(&args.input)?;
    let (table, covers) = table_and_covers(&db, args.table.as_deref(), &cfg.fit_config()?)?;
    let mut ok = 0;
    for (g, c) in db.graphs().iter().zip(&covers) {
        let (stream, _) = encode_graph(g, &table, c)?;
        match decode_graph(&stream, &table, db.alphabet()) {
            Ok(back) if back == g.without_isolated_nodes() => ok += 1,
            Ok(_) => eprintln!("graph {}: decoded graph differs", g.id()),
            Err(e) => eprintln!("graph {}: {e}", g.id()),
        }
    }
    let status = if ok == db.len() { "OK" } else { "FAIL" };
    println!("{status} {ok}/{}", db.len());
    Ok(ok == db.len())
}

fn execute(cli: &Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => serde_json::from_str::<ConfigFile>(&read_text(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let cfg = RunConfig::resolve(&file, cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Gen(a) => cmd_gen(a, &cfg).map(|_| EXIT_OK),
        Command::Inject(a) => cmd_inject(a, &cfg).map(|_| EXIT_OK),
        Command::Search(a) => cmd_search(a, &cfg).map(|_| EXIT_OK),
        Command::Score(a) => cmd_score(a, &cfg).map(|_| EXIT_OK),
        Command::Eval(a) => cmd_eval(a).map(|_| EXIT_OK),
        Command::DecodeCheck(a) => {
            cmd_decode_check(a, &cfg).map(|ok| if ok { EXIT_OK } else { Error::Invariant(String::new()).exit_code() })
        }
    })
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
