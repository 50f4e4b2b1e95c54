//! `owkg`: generate family-tree graphs, split them into open-world views,
//! and run the simulations, closed forms and oracle pipelines on them.
//!
//! Every run writes `<command>.manifest.json` next to its outputs. The
//! manifest records the full argument set, so `owkg replay` reproduces the
//! same bytes.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use owkg_core::analytic::{self, AnalyticParams, AnalyticRow, ANALYTIC_CSV_HEADER};
use owkg_core::grid::parse_grid;
use owkg_core::kg::{self, deduce_closure, generate_base_population, validate_closed_world, TreeGenConfig};
use owkg_core::metrics::RankingFunction;
use owkg_core::oracle::{self, ScoreBands, PIPELINE_CSV_HEADER, PIPELINE_CSV_SCHEMA};
use owkg_core::sim::{self, SimConfig, SIM_CSV_HEADER, SIM_CSV_SCHEMA};
use owkg_core::split::{self, CorrelationTarget, SplitConfig};
use owkg_core::Error as CoreError;

use manifest::RunManifest;

pub const ENTITIES_FILE: &str = "entities.tsv";
pub const FACTS_FILE: &str = "facts.tsv";
pub const BASE_FACTS_FILE: &str = "base_facts.tsv";
pub const QUERIES_FILE: &str = "queries.jsonl";

#[derive(Parser, Debug)]
#[command(name = "owkg", version, about = "Open-world evaluation experiments for knowledge graph completion metrics")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "OWKG_OUT_DIR", default_value = "owkg-out")]
    out: PathBuf,

    /// Table format for simulate, analytic, variance, pipeline and compare.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(flatten)]
    Run(Experiment),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Experiment {
    /// Generate a family-tree graph and its closure.
    GenKg(GenKgArgs),
    /// Split a closed graph into training, test and missing facts.
    Split(SplitArgs),
    /// Sample evaluation queries from a split.
    Queries(QueriesArgs),
    /// Monte Carlo simulation of sparse metrics over a strength grid.
    Simulate(SimulateArgs),
    /// Closed-form expectations, approximations and derivatives.
    Analytic(AnalyticArgs),
    /// Monte Carlo estimate of the per-query metric variance.
    Variance(VarianceArgs),
    /// Oracle models evaluated in sparse and full mode on a split.
    Pipeline(PipelineArgs),
    /// Inconsistency probability of two models and the queries needed.
    Compare(CompareArgs),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::GenKg(_) => "gen-kg",
            Experiment::Split(_) => "split",
            Experiment::Queries(_) => "queries",
            Experiment::Simulate(_) => "simulate",
            Experiment::Analytic(_) => "analytic",
            Experiment::Variance(_) => "variance",
            Experiment::Pipeline(_) => "pipeline",
            Experiment::Compare(_) => "compare",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenKgArgs {
    #[arg(long, default_value_t = 20)]
    trees: usize,
    #[arg(long, default_value_t = 3)]
    depth: u32,
    #[arg(long, default_value_t = 300)]
    per_tree: usize,
    #[arg(long, default_value_t = 20)]
    branching: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SplitArgs {
    /// Directory holding entities.tsv and facts.tsv (default: the output directory).
    #[arg(long)]
    kg: Option<PathBuf>,
    /// Density |G_test| / |G_full|.
    #[arg(long)]
    d: f64,
    /// Train ratio |G_train| / |G_test|.
    #[arg(long, default_value_t = 0.7)]
    eta: f64,
    /// Correlation between "missing" and a reference model's positive prediction.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    /// Strength of the reference model used when rho != 0.
    #[arg(long, default_value_t = 0.5)]
    reference_strength: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct QueriesArgs {
    /// Split directory (default: the output directory).
    #[arg(long)]
    split: Option<PathBuf>,
    /// Minimum number of answers in the full graph.
    #[arg(long, default_value_t = 10)]
    min_answers: usize,
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Strength grid, `start:stop:step` or a comma list.
    #[arg(long)]
    l_grid: String,
    /// Observation probability grid (alpha = 1 - beta).
    #[arg(long, conflicts_with = "beta", required_unless_present = "beta")]
    alpha: Option<String>,
    /// Sparsity grid (beta = 1 - alpha).
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 43)]
    n: u64,
    #[arg(long, default_value_t = 14505)]
    n_entity: u64,
    #[arg(long, default_value = "mrr")]
    metric: RankingFunction,
    #[arg(long, default_value_t = 500)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticArgs {
    /// Strength, a single value or a grid.
    #[arg(long)]
    l: String,
    /// Sparsity, a single value or a grid.
    #[arg(long)]
    beta: String,
    #[arg(long, default_value_t = 43)]
    n: u64,
    #[arg(long, default_value_t = 14505)]
    n_entity: u64,
    /// Correlation, a single value or a grid.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    rho: String,
    /// Comma-separated metrics.
    #[arg(long, default_value = "mrr", value_delimiter = ',')]
    metric: Vec<RankingFunction>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VarianceArgs {
    #[arg(long)]
    l: String,
    #[arg(long)]
    beta: String,
    #[arg(long, default_value_t = 43)]
    n: u64,
    #[arg(long, default_value_t = 14505)]
    n_entity: u64,
    #[arg(long, default_value = "mrr")]
    metric: RankingFunction,
    #[arg(long, default_value_t = 100_000)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PipelineArgs {
    /// Split directory (default: the output directory).
    #[arg(long)]
    split: Option<PathBuf>,
    /// Query file (default: queries.jsonl in the split directory).
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long, default_value = "0.1:1.0:0.1")]
    l_grid: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho: f64,
    /// Comma-separated metrics.
    #[arg(long, default_value = "mrr", value_delimiter = ',')]
    metric: Vec<RankingFunction>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Strength of the weaker model.
    #[arg(long)]
    l: f64,
    /// Strength gap to the stronger model.
    #[arg(long)]
    delta_l: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 43)]
    n: u64,
    #[arg(long, default_value_t = 14505)]
    n_entity: u64,
    /// Target inconsistency probability for the query bound.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Per-query variance; estimated by simulation when absent.
    #[arg(long)]
    v: Option<f64>,
    /// Repeats for the variance estimate.
    #[arg(long, default_value_t = 100_000)]
    variance_repeats: usize,
    /// Query count; defaults to the bound for probability `p`.
    #[arg(long)]
    n_q: Option<u64>,
    /// Paired simulation trials (0 skips the empirical check).
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A finished table: CSV header lines plus rows, and the same rows as JSON.
struct Table {
    name: &'static str,
    schema: String,
    header: &'static str,
    rows: Vec<String>,
    json: serde_json::Value,
}

impl Table {
    fn write(&self, out: &Path, format: Format) -> Result<String> {
        let (file, body) = match format {
            Format::Csv => {
                let mut body = format!("{}\n{}\n", self.schema, self.header);
                for r in &self.rows {
                    body.push_str(r);
                    body.push('\n');
                }
                (format!("{}.csv", self.name), body)
            }
            Format::Json => (format!("{}.json", self.name), serde_json::to_string_pretty(&self.json)? + "\n"),
        };
        let path = out.join(&file);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(file)
    }
}

fn grid(spec: &str, what: &str) -> Result<Vec<f64>> {
    parse_grid(spec).with_context(|| format!("parsing --{what} `{spec}`"))
}

fn run(exp: &Experiment, out: &Path, format: Format) -> Result<Vec<String>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match exp {
        Experiment::GenKg(a) => gen_kg(a, out),
        Experiment::Split(a) => split_cmd(a, out),
        Experiment::Queries(a) => queries_cmd(a, out),
        Experiment::Simulate(a) => Ok(vec![simulate(a)?.write(out, format)?]),
        Experiment::Analytic(a) => Ok(vec![analytic_cmd(a)?.write(out, format)?]),
        Experiment::Variance(a) => Ok(vec![variance(a)?.write(out, format)?]),
        Experiment::Pipeline(a) => Ok(vec![pipeline(a, out)?.write(out, format)?]),
        Experiment::Compare(a) => Ok(vec![compare(a)?.write(out, format)?]),
    }
}

fn gen_kg(a: &GenKgArgs, out: &Path) -> Result<Vec<String>> {
    let config = TreeGenConfig {
        n_trees: a.trees,
        depth: a.depth,
        entities_per_tree: a.per_tree,
        max_branching: a.branching,
        seed: a.seed,
    };
    let base = generate_base_population(&config)?;
    let full = deduce_closure(&base);
    let report = validate_closed_world(&full);
    if !report.is_valid() {
        bail!("closure failed validation with {} violations", report.violations.len());
    }
    kg::io::write_graph(&out.join(ENTITIES_FILE), &out.join(FACTS_FILE), &full)?;
    kg::io::write_facts(&out.join(BASE_FACTS_FILE), base.facts())?;
    eprintln!("{} entities, {} base facts, {} facts after closure", full.n_entities(), base.len(), full.len());
    Ok(vec![ENTITIES_FILE.into(), FACTS_FILE.into(), BASE_FACTS_FILE.into()])
}

fn split_cmd(a: &SplitArgs, out: &Path) -> Result<Vec<String>> {
    let dir = a.kg.as_deref().unwrap_or(out);
    let kg = kg::io::read_graph(&dir.join(ENTITIES_FILE), &dir.join(FACTS_FILE))
        .with_context(|| format!("reading the graph in {}", dir.display()))?;
    let full = deduce_closure(&kg);
    if full.len() != kg.len() {
        eprintln!("note: input was not closed; added {} entailed facts", full.len() - kg.len());
    }
    let config = SplitConfig::new(a.d, a.eta, a.seed)?;
    let ws = if a.rho == 0.0 {
        split::split_independent(&full, config)?
    } else {
        let preds = oracle::reference_predictions(full.len(), a.reference_strength, a.seed)?;
        let ws = split::split_correlated(
            &full,
            config,
            &CorrelationTarget {
                rho: a.rho,
                reference_predictions: preds.clone(),
            },
        )?;
        let full_test_preds: Vec<bool> = ws
            .roles()
            .values()
            .zip(&preds)
            .filter(|(r, _)| **r != split::FactRole::Train)
            .map(|(_, &y)| y)
            .collect();
        let measured = split::empirical_correlation(&ws.missing_mask(), &full_test_preds)?;
        eprintln!("measured correlation {measured:.4} (target {})", a.rho);
        ws
    };
    let m = split::write_split(out, &ws)?;
    eprintln!(
        "alpha = {:.4}, beta = {:.4}; {} train, {} test, {} missing facts",
        m.alpha, m.beta, m.counts.train, m.counts.sparse_test, m.counts.missing
    );
    Ok(vec![
        split::SPLIT_MANIFEST_FILE.into(),
        split::TRAIN_FILE.into(),
        split::TEST_FILE.into(),
        split::MISSING_FILE.into(),
    ])
}

fn queries_cmd(a: &QueriesArgs, out: &Path) -> Result<Vec<String>> {
    let dir = a.split.as_deref().unwrap_or(out);
    let ws = split::read_split(dir).with_context(|| format!("reading the split in {}", dir.display()))?;
    let qs = split::build_query_set(&ws, a.min_answers, a.count, a.seed)?;
    split::write_queries(&out.join(QUERIES_FILE), &qs)?;
    eprintln!("{} queries", qs.len());
    Ok(vec![QUERIES_FILE.into()])
}

fn simulate(a: &SimulateArgs) -> Result<Table> {
    let ells = grid(&a.l_grid, "l-grid")?;
    let alphas = match (&a.alpha, &a.beta) {
        (Some(s), _) => grid(s, "alpha")?,
        (None, Some(s)) => grid(s, "beta")?.into_iter().map(|b| 1.0 - b).collect(),
        (None, None) => bail!("one of --alpha or --beta is required"),
    };
    let sim = SimConfig {
        params: AnalyticParams {
            ell: 1.0,
            beta: 0.5,
            n: a.n,
            n_entity: a.n_entity,
            rho: a.rho,
        },
        repeats: a.repeats,
        root_seed: a.seed,
    };
    let cells = sim::simulate_grid(&ells, &alphas, a.metric, &sim)?;
    let infeasible = cells.iter().filter(|c| c.result.is_none()).count();
    if infeasible > 0 {
        eprintln!("skipped {infeasible} cells where rho = {} is infeasible", a.rho);
    }
    Ok(Table {
        name: "simulate",
        schema: SIM_CSV_SCHEMA.into(),
        header: SIM_CSV_HEADER,
        rows: cells.iter().filter_map(|c| sim::sim_csv_row(c, a.metric)).collect(),
        json: serde_json::to_value(cells.iter().filter(|c| c.result.is_some()).collect::<Vec<_>>())?,
    })
}

fn analytic_cmd(a: &AnalyticArgs) -> Result<Table> {
    let (ells, betas, rhos) = (grid(&a.l, "l")?, grid(&a.beta, "beta")?, grid(&a.rho, "rho")?);
    let mut rows = Vec::new();
    for &rf in &a.metric {
        for &beta in &betas {
            for &ell in &ells {
                for &rho in &rhos {
                    let params = AnalyticParams::new(ell, beta, a.n, a.n_entity)?;
                    match AnalyticRow::evaluate(&AnalyticParams { rho, ..params }, rf) {
                        Ok(row) => rows.push(row),
                        Err(e @ (CoreError::InfeasibleCorrelation { .. } | CoreError::UndefinedCorrelation(_))) => {
                            eprintln!("skipping ell={ell} beta={beta} rho={rho}: {e}")
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    Ok(Table {
        name: "analytic",
        schema: "# schema: analytic/1".into(),
        header: ANALYTIC_CSV_HEADER,
        rows: rows.iter().map(AnalyticRow::csv).collect(),
        json: serde_json::to_value(&rows)?,
    })
}

#[derive(Serialize)]
struct VarianceRow {
    ell: f64,
    beta: f64,
    n: u64,
    metric: RankingFunction,
    variance: f64,
    mean: f64,
    repeats: usize,
    skipped: usize,
}

fn variance(a: &VarianceArgs) -> Result<Table> {
    let mut rows = Vec::new();
    for &beta in &grid(&a.beta, "beta")? {
        for &ell in &grid(&a.l, "l")? {
            let params = AnalyticParams::new(ell, beta, a.n, a.n_entity)?;
            let v = sim::estimate_variance(&params, a.metric, a.repeats, a.seed)?;
            rows.push(VarianceRow {
                ell,
                beta,
                n: a.n,
                metric: a.metric,
                variance: v.variance,
                mean: v.mean,
                repeats: v.repeats_used,
                skipped: v.skipped,
            });
        }
    }
    Ok(Table {
        name: "variance",
        schema: "# schema: variance/1".into(),
        header: "ell,beta,n,metric,variance,mean,repeats,skipped",
        rows: rows
            .iter()
            .map(|r| format!("{},{},{},{},{},{},{},{}", r.ell, r.beta, r.n, r.metric, r.variance, r.mean, r.repeats, r.skipped))
            .collect(),
        json: serde_json::to_value(&rows)?,
    })
}

fn pipeline(a: &PipelineArgs, out: &Path) -> Result<Table> {
    let dir = a.split.as_deref().unwrap_or(out);
    let ws = split::read_split(dir).with_context(|| format!("reading the split in {}", dir.display()))?;
    let qpath = a.queries.clone().unwrap_or_else(|| dir.join(QUERIES_FILE));
    let qs = split::read_queries(&qpath).with_context(|| format!("reading {}", qpath.display()))?;
    let ells = grid(&a.l_grid, "l-grid")?;
    let points = oracle::sweep_strength(&ws, &qs, &ells, a.rho, &a.metric, ScoreBands::default(), a.seed)?;
    Ok(Table {
        name: "pipeline",
        schema: PIPELINE_CSV_SCHEMA.into(),
        header: PIPELINE_CSV_HEADER,
        rows: points.iter().map(|p| p.csv()).collect(),
        json: serde_json::to_value(&points)?,
    })
}

#[derive(Serialize)]
struct CompareRow {
    ell: f64,
    delta_ell: f64,
    beta: f64,
    n: u64,
    v1: f64,
    v2: f64,
    c: f64,
    n_q: u64,
    predicted: f64,
    few_queries: bool,
    empirical: Option<f64>,
    trials: usize,
}

fn compare(a: &CompareArgs) -> Result<Table> {
    let rf = RankingFunction::Mrr;
    let base = AnalyticParams::new(a.l, a.beta, a.n, a.n_entity)?;
    let (v1, v2) = match a.v {
        Some(v) => (v, v),
        None => (
            sim::estimate_variance(&base, rf, a.variance_repeats, owkg_core::seed::derive(a.seed, &[1]))?.variance,
            sim::estimate_variance(&AnalyticParams { ell: a.l + a.delta_l, ..base }, rf, a.variance_repeats, owkg_core::seed::derive(a.seed, &[2]))?
                .variance,
        ),
    };
    let bound = analytic::min_queries(a.l, a.delta_l, a.beta, a.n, a.p, v1)?;
    let n_q = a.n_q.unwrap_or(bound.n_q);
    let predicted = analytic::inconsistency_probability(a.l, a.delta_l, a.beta, a.n, n_q, v1, v2)?;
    if predicted.few_queries {
        eprintln!("warning: {n_q} queries is too few for the normal approximation");
    }
    let empirical = if a.trials > 0 {
        Some(sim::simulate_pairwise_inconsistency(a.l, a.delta_l, &base, rf, n_q, a.trials, owkg_core::seed::derive(a.seed, &[3]))?.probability)
    } else {
        None
    };
    let row = CompareRow {
        ell: a.l,
        delta_ell: a.delta_l,
        beta: a.beta,
        n: a.n,
        v1,
        v2,
        c: bound.c,
        n_q,
        predicted: predicted.probability,
        few_queries: predicted.few_queries,
        empirical,
        trials: a.trials,
    };
    let csv = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.ell,
        row.delta_ell,
        row.beta,
        row.n,
        row.v1,
        row.v2,
        row.c,
        row.n_q,
        row.predicted,
        row.empirical.map(|e| e.to_string()).unwrap_or_default(),
        row.trials
    );
    Ok(Table {
        name: "compare",
        schema: "# schema: compare/1".into(),
        header: "ell,delta_ell,beta,n,v1,v2,c,n_q,predicted,empirical,trials",
        rows: vec![csv],
        json: serde_json::to_value(vec![row])?,
    })
}

fn execute(exp: Experiment, out: &Path, format: Format) -> Result<()> {
    let outputs = run(&exp, out, format)?;
    let manifest = RunManifest::new(exp, format, outputs);
    let path = manifest.write(out)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(exp) => execute(exp, &cli.out, cli.format),
        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            execute(m.command, &cli.out, m.format)
        }
    }
}
