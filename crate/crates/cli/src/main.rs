use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lcl_core::cc::{closed_form_checks, verify_fact3, verify_fact4, CcParams, Certificate};
use lcl_core::game::{
    best_response, build_lcl_game, check_perfect_recall, check_round_coherence, check_well_rounded,
    equilibrium_gap, outcome_metric, BehaviorProfile, GameParams, LclGame, PerturbationSpec,
    DEFAULT_NODE_BUDGET,
};
use lcl_core::graph::{make_family, parse_graph, Family, Graph, GraphJson};
use lcl_core::lang::{check_greedy_constructible, GreedyOutcome, LclLanguage};
use lcl_core::pref::{Preference, PRESETS};
use lcl_core::sim::strategy::STRATEGY_NAMES;
use lcl_core::sim::{builtin_strategy, MonteCarlo, SharedStrategy, Stats};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

mod csv;

#[derive(Parser)]
#[command(name = "lcl", version, about = "Simulate and analyze locally checkable labeling games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo runs of a distributed algorithm.
    Simulate(SimulateArgs),
    /// Build the truncated game and run one analysis on it.
    Analyze(AnalyzeArgs),
    /// Certify the constrained-coloring equilibrium and dominance claims.
    VerifyCc(VerifyArgs),
    /// Exhaustive greedy-constructibility check on a small graph.
    CheckGreedy(GreedyArgs),
    /// Re-run a config (or an output file that embeds one).
    Replay(ReplayArgs),
    /// Version, languages, strategies and presets.
    Info,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list or JSON graph file.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    /// k2, path:N, cycle:N, complete:N or random:N:DELTA:SEED.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct PrefArgs {
    /// Preset name or a JSON file (preference object or a table keyed by canonical ball).
    #[arg(long)]
    pref: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Red exponent for the `cc` preset.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    lang: String,
    #[command(flatten)]
    graph: GraphArgs,
    /// One strategy for every vertex, or one per vertex.
    #[arg(long, value_delimiter = ',', default_value = "uniform")]
    strategy: Vec<String>,
    #[command(flatten)]
    pref: PrefArgs,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_rounds: usize,
    /// Worker threads; 0 uses every core. Does not change results.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Check {
    Gap,
    Br,
    Metric,
    Structure,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    lang: String,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    pref: PrefArgs,
    #[arg(long, default_value_t = 4)]
    horizon: usize,
    /// Uniform minimum probability for every action.
    #[arg(long)]
    perturb: Option<f64>,
    /// Keyed profile JSON; information sets it omits play uniformly.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Second profile for `--check metric` (default uniform).
    #[arg(long)]
    other: Option<PathBuf>,
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value_t = 0)]
    player: usize,
    /// Metric truncation depth.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Fail with exit 1 when the certified gap exceeds this.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Longest deviation prefix enumerated.
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long)]
    lang: String,
    #[command(flatten)]
    graph: GraphArgs,
    /// Largest number of partial labelings to enumerate.
    #[arg(long, default_value_t = 1 << 24)]
    budget: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    config: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where the graph came from. Files are stored inline so a config is
/// self-contained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GraphSource {
    Family(String),
    Inline(GraphJson),
}

impl GraphSource {
    fn from_args(args: &GraphArgs) -> Result<Self> {
        match (&args.graph, &args.family) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let graph = if text.trim_start().starts_with('{') {
                    let raw: GraphJson = serde_json::from_str(&text)?;
                    Graph::try_from(raw)?
                } else {
                    parse_graph(&text)?
                };
                Ok(GraphSource::Inline(graph.to_json()))
            }
            (None, Some(spec)) => {
                let family: Family = spec.parse()?;
                Ok(GraphSource::Family(family.to_string()))
            }
            _ => bail!("exactly one of --graph or --family is required"),
        }
    }

    fn build(&self) -> Result<Graph> {
        Ok(match self {
            GraphSource::Family(spec) => make_family(&spec.parse()?)?,
            GraphSource::Inline(raw) => Graph::try_from(raw.clone())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SimulateConfig {
    lang: LclLanguage,
    graph: GraphSource,
    strategies: Vec<String>,
    pref: Preference,
    delta: f64,
    trials: u64,
    seed: u64,
    max_rounds: usize,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct AnalyzeConfig {
    lang: LclLanguage,
    graph: GraphSource,
    pref: Preference,
    delta: f64,
    horizon: usize,
    perturb: Option<f64>,
    profile: Option<BTreeMap<String, Vec<f64>>>,
    other: Option<BTreeMap<String, Vec<f64>>>,
    check: Check,
    player: usize,
    depth: usize,
    epsilon: Option<f64>,
    budget: usize,
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct VerifyConfig {
    delta: f64,
    k: u32,
    horizon: usize,
    depth: usize,
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GreedyConfig {
    lang: LclLanguage,
    graph: GraphSource,
    budget: u128,
    out: Option<PathBuf>,
}

/// A fully resolved invocation. Every output file embeds the config that
/// produced it, and `replay` accepts either.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum ExperimentConfig {
    Simulate(SimulateConfig),
    Analyze(AnalyzeConfig),
    VerifyCc(VerifyConfig),
    CheckGreedy(GreedyConfig),
}

impl ExperimentConfig {
    fn out(&self) -> Option<&PathBuf> {
        match self {
            ExperimentConfig::Simulate(c) => c.out.as_ref(),
            ExperimentConfig::Analyze(c) => c.out.as_ref(),
            ExperimentConfig::VerifyCc(c) => c.out.as_ref(),
            ExperimentConfig::CheckGreedy(c) => c.out.as_ref(),
        }
    }
}

/// Output document and whether the command verified what it checked.
struct Report {
    body: Value,
    ok: bool,
    csv: Option<String>,
}

fn resolve_pref(args: &PrefArgs, lang: &LclLanguage) -> Result<Preference> {
    let pref = match &args.pref {
        None => Preference::default_for(lang, args.delta, args.k),
        Some(name) if PRESETS.contains(&name.as_str()) => Preference::preset(name, args.delta, args.k)?,
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("unknown preset or unreadable file {path}"))?;
            match serde_json::from_str::<Preference>(&text) {
                Ok(p) => p,
                Err(_) => Preference::Table {
                    entries: serde_json::from_str(&text).context("preference table")?,
                    default: 0.0,
                },
            }
        }
    };
    pref.validate()?;
    Ok(pref)
}

fn read_profile(path: &Option<PathBuf>) -> Result<Option<BTreeMap<String, Vec<f64>>>> {
    path.as_ref()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let value: Value = serde_json::from_str(&text)?;
            // accept a bare map or a best-response report that carries one
            let map = value.pointer("/result/profile").cloned().unwrap_or(value);
            Ok(serde_json::from_value(map)?)
        })
        .transpose()
}

fn config_from(command: Command) -> Result<ExperimentConfig> {
    Ok(match command {
        Command::Simulate(a) => {
            let lang: LclLanguage = a.lang.parse()?;
            let pref = resolve_pref(&a.pref, &lang)?;
            ExperimentConfig::Simulate(SimulateConfig {
                graph: GraphSource::from_args(&a.graph)?,
                strategies: a.strategy,
                pref,
                delta: a.pref.delta,
                trials: a.trials,
                seed: a.seed,
                max_rounds: a.max_rounds,
                out: a.out,
                csv: a.csv,
                lang,
            })
        }
        Command::Analyze(a) => {
            let lang: LclLanguage = a.lang.parse()?;
            let pref = resolve_pref(&a.pref, &lang)?;
            ExperimentConfig::Analyze(AnalyzeConfig {
                graph: GraphSource::from_args(&a.graph)?,
                pref,
                delta: a.pref.delta,
                horizon: a.horizon,
                perturb: a.perturb,
                profile: read_profile(&a.profile)?,
                other: read_profile(&a.other)?,
                check: a.check,
                player: a.player,
                depth: a.depth,
                epsilon: a.epsilon,
                budget: a.budget,
                out: a.out,
                lang,
            })
        }
        Command::VerifyCc(a) => ExperimentConfig::VerifyCc(VerifyConfig {
            delta: a.delta,
            k: a.k,
            horizon: a.horizon,
            depth: a.depth,
            out: a.out,
        }),
        Command::CheckGreedy(a) => ExperimentConfig::CheckGreedy(GreedyConfig {
            lang: a.lang.parse()?,
            graph: GraphSource::from_args(&a.graph)?,
            budget: a.budget,
            out: a.out,
        }),
        Command::Replay(_) | Command::Info => unreachable!("handled by dispatch"),
    })
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    // an output document carries its config under "config"
    let value = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(value).context("not an experiment config")
}

fn print_info() {
    println!("lcl {}", env!("CARGO_PKG_VERSION"));
    println!("languages: mis, coloring:Q, cc");
    println!("families: k2, path:N, cycle:N, complete:N, random:N:DELTA:SEED");
    println!("strategies: {}", STRATEGY_NAMES.join(", "));
    println!("preference presets: {}", PRESETS.join(", "));
    println!("analyze checks: gap, br, metric, structure");
}

fn strategies_for(config: &SimulateConfig, graph: &Graph) -> Result<Vec<SharedStrategy>> {
    let parsed: Vec<SharedStrategy> = config
        .strategies
        .iter()
        .map(|s| builtin_strategy(s, &config.lang))
        .collect::<Result<_, _>>()?;
    match parsed.len() {
        1 => Ok((0..graph.n()).map(|_| parsed[0].clone()).collect()),
        n if n == graph.n() => Ok(parsed),
        n => bail!("{n} strategies given for {} vertices", graph.n()),
    }
}

fn simulate(config: &SimulateConfig, jobs: usize) -> Result<Report> {
    let graph = config.graph.build()?;
    let strategies = strategies_for(config, &graph)?;
    let stats: Stats = MonteCarlo {
        graph: &graph,
        lang: &config.lang,
        strategies: &strategies,
        pref: &config.pref,
        delta: config.delta,
        max_rounds: config.max_rounds,
        jobs,
    }
    .run(config.trials, config.seed)?;
    let csv = csv::histogram(&stats);
    Ok(Report {
        ok: true,
        csv: Some(csv),
        body: json!({
            "histogram": stats.histogram,
            "p_leq_r": stats.p_leq_r,
            "mean_payoffs": stats.mean_payoffs,
            "stderr": stats.stderr,
            "censored": stats.censored,
            "invalid": stats.invalid,
        }),
    })
}

fn load_profile(game: &LclGame, map: &Option<BTreeMap<String, Vec<f64>>>) -> Result<BehaviorProfile> {
    Ok(match map {
        Some(m) => BehaviorProfile::from_keyed(&game.tree, m)?,
        None => BehaviorProfile::uniform(&game.tree),
    })
}

fn analyze(config: &AnalyzeConfig) -> Result<Report> {
    let graph = config.graph.build()?;
    let params = GameParams {
        lang: config.lang.clone(),
        pref: config.pref.clone(),
        delta: config.delta,
        horizon: config.horizon,
    };
    let game = build_lcl_game(&params, &[(graph, 1.0)], config.budget)?;
    let tree = &game.tree;
    let spec = config
        .perturb
        .map(|eta| PerturbationSpec::uniform(eta, config.lang.alphabet_size()))
        .transpose()?;
    let profile = load_profile(&game, &config.profile)?;
    let summary = json!({
        "nodes": tree.len(),
        "information_sets": tree.info_sets.len(),
        "players": tree.players,
        "tail_bound": game.tail_bound(),
    });
    let (ok, result) = match config.check {
        Check::Gap => {
            let gap = equilibrium_gap(tree, &profile, spec.as_ref(), game.tail_bound())?;
            let ok = config.epsilon.is_none_or(|e| gap.epsilon <= e);
            (ok, serde_json::to_value(gap)?)
        }
        Check::Br => {
            if config.player >= tree.players {
                bail!("player {} out of range", config.player);
            }
            let br = best_response(tree, config.player, &profile, spec.as_ref())?;
            (
                true,
                json!({
                    "player": br.player,
                    "value": br.value,
                    "profile": br.profile.to_keyed(tree),
                }),
            )
        }
        Check::Metric => {
            let other = load_profile(&game, &config.other)?;
            (true, serde_json::to_value(outcome_metric(tree, &profile, &other, config.depth))?)
        }
        Check::Structure => {
            let well_rounded = check_well_rounded(tree).err();
            let recall = check_perfect_recall(tree).err();
            let coherence = check_round_coherence(tree).err();
            let ok = well_rounded.is_none() && recall.is_none() && coherence.is_none();
            (
                ok,
                json!({
                    "passed": ok,
                    "round_drop": well_rounded,
                    "recall_violation": recall,
                    "incoherent_set": coherence,
                }),
            )
        }
    };
    Ok(Report {
        ok,
        csv: None,
        body: json!({ "game": summary, "result": result }),
    })
}

fn verify_cc(config: &VerifyConfig) -> Result<Report> {
    let params = CcParams::new(config.delta, config.k)?;
    let closed = closed_form_checks(&params, config.horizon, config.depth.min(5))?;
    let closed_ok = closed.iter().all(|c| c.holds);
    let certificates: Vec<Certificate> = vec![
        verify_fact3(&params, config.horizon, config.depth)?,
        verify_fact4(&params, config.horizon, config.depth)?,
    ];
    let ok = closed_ok && certificates.iter().all(|c| c.passed);
    Ok(Report {
        ok,
        csv: None,
        body: json!({
            "passed": ok,
            "closed_forms": { "passed": closed_ok, "checks": closed },
            "certificates": certificates,
        }),
    })
}

fn check_greedy(config: &GreedyConfig) -> Result<Report> {
    let graph = config.graph.build()?;
    let outcome = check_greedy_constructible(&config.lang, &graph, config.budget)?;
    let ok = matches!(outcome, GreedyOutcome::Ok { .. });
    Ok(Report {
        ok,
        csv: None,
        body: json!({ "greedy_constructible": ok, "outcome": outcome }),
    })
}

fn execute(config: &ExperimentConfig, jobs: usize) -> Result<Report> {
    match config {
        ExperimentConfig::Simulate(c) => simulate(c, jobs),
        ExperimentConfig::Analyze(c) => analyze(c),
        ExperimentConfig::VerifyCc(c) => verify_cc(c),
        ExperimentConfig::CheckGreedy(c) => check_greedy(c),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(config: &ExperimentConfig, report: &Report, out_override: Option<&PathBuf>) -> Result<()> {
    let mut doc = json!({ "config": config });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, &report.body) {
        doc.extend(body.clone());
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match out_override.or(config.out()) {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let (ExperimentConfig::Simulate(c), Some(csv)) = (config, &report.csv) {
        if let Some(path) = &c.csv {
            let path = match out_override {
                Some(o) => o.with_extension("csv"),
                None => path.clone(),
            };
            write(&path, csv)?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    let (config, jobs, out) = match cli.command {
        Command::Info => {
            print_info();
            return Ok(true);
        }
        Command::Replay(a) => (load_config(&a.config)?, 0, a.out),
        Command::Simulate(a) => {
            let jobs = a.jobs;
            (config_from(Command::Simulate(a))?, jobs, None)
        }
        other => (config_from(other)?, 1, None),
    };
    let report = execute(&config, jobs)?;
    emit(&config, &report, out.as_ref())?;
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
