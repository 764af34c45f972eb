//! Command implementations behind the `secgame` binary: compile scenarios to
//! .efg files, solve them, sweep probability grids to CSV, allocate payoffs,
//! train classifiers, build and query the knowledge base, solve the routing
//! network, and replay sensor traces through the adaptation loop. Every
//! command is deterministic: identical inputs and seeds give byte-identical
//! output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::efg::{fmt_decimal, parse_efg, serialize_efg};
use crate::game::Game;
use crate::kb::{build_grid, probability_grid, CaseStore};
use crate::predictor::{
    capability_threshold, clf, synthetic_dataset, train, ClfNetwork, Hyperparams, SENSOR_DIM,
};
use crate::routing::{all_normal_path, dp_solve, greedy_expected, greedy_plans, RoutingNetwork};
use crate::scenarios::{make_scenario, policy_string, routing_config, Scenario, SCENARIO_NAMES};
use crate::solver::{
    enumerate_pure_equilibria, select_equilibrium, solve_backward_induction, Equilibrium,
    PROFILE_CAP,
};
use crate::system::ComponentId;
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "secgame",
    version,
    about = "Game-theoretic defensive policies for component systems under attack"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compile a scenario into a Gambit .efg game file
    Build(BuildArgs),
    /// Solve a .efg game file: list its equilibria and the selected policy
    Solve(SolveArgs),
    /// Sweep compromise probabilities and emit heatmap CSV
    Sweep(SweepArgs),
    /// Print a scenario's Shapley payoff allocation as CSV
    Shapley(ShapleyArgs),
    /// Train per-component compromise classifiers on seeded synthetic data
    Train(TrainArgs),
    /// Precompute a knowledge base of defensive policies over a grid
    KbBuild(KbBuildArgs),
    /// Retrieve the knowledge-base case nearest to a probability vector
    KbQuery(KbQueryArgs),
    /// Solve the routing network by dynamic programming, with greedy baseline
    Route(RouteArgs),
    /// Replay a sensor trace through the monitor-plan-execute loop
    Loop(LoopArgs),
}

fn parse_prob(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=PROBABILITY, got {s:?}"))?;
    let p: f64 = value.trim().parse().map_err(|e| format!("probability {value:?}: {e}"))?;
    Ok((name.trim().to_string(), p))
}

#[derive(Args)]
pub struct BuildArgs {
    /// Scenario name (tank-a1, tank-a2, znn, routing, swat-mini)
    #[arg(long)]
    pub scenario: String,
    /// Override a component's compromise probability, e.g. --prob pump=0.8
    #[arg(long = "prob", value_name = "NAME=P", value_parser = parse_prob)]
    pub prob: Vec<(String, f64)>,
    /// Output .efg file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Path to a .efg game file
    pub game: PathBuf,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: String,
    /// Grid step over each attacked component's probability (must divide 1)
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ShapleyArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Synthetic samples generated per component
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 40)]
    pub epochs: u32,
    /// Directory receiving one <component>.clf model file each
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct KbBuildArgs {
    #[arg(long)]
    pub scenario: String,
    /// Grid step over each attacked component's probability (must divide 1)
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Output .jsonl store; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KbQueryArgs {
    /// Knowledge store written by kb-build
    #[arg(long)]
    pub store: PathBuf,
    /// Comma-separated compromise probabilities, one per component
    #[arg(long)]
    pub probs: String,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RouteArgs {
    /// Network file; the shipped seven-node network when omitted
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Override an uncertain node's compromise probability, e.g. --prob N2=0.3
    #[arg(long = "prob", value_name = "NODE=P", value_parser = parse_prob)]
    pub prob: Vec<(String, f64)>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LoopArgs {
    #[arg(long)]
    pub scenario: String,
    /// Knowledge store written by kb-build
    #[arg(long)]
    pub store: PathBuf,
    /// Directory of <component>.clf model files written by train
    #[arg(long)]
    pub models: PathBuf,
    /// Trace CSV: one row per tick, each component's sensor readings in order
    #[arg(long)]
    pub trace: PathBuf,
    /// Flagging threshold; derived from the attack capability when omitted
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output log CSV; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_text(path, text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn probs_map(pairs: &[(String, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().cloned().collect()
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => emit(a.out.as_deref(), &cmd_build(&a.scenario, &probs_map(&a.prob))?),
        Command::Solve(a) => emit(a.out.as_deref(), &cmd_solve(&read_text(&a.game)?)?),
        Command::Sweep(a) => emit(a.out.as_deref(), &cmd_sweep(&a.scenario, a.step)?),
        Command::Shapley(a) => emit(a.out.as_deref(), &cmd_shapley(&a.scenario)?),
        Command::Train(a) => {
            let report = cmd_train(&a.scenario, a.seed, a.samples, a.epochs, &a.out)?;
            print!("{report}");
            Ok(())
        }
        Command::KbBuild(a) => emit(a.out.as_deref(), &cmd_kb_build(&a.scenario, a.step)?),
        Command::KbQuery(a) => {
            let probs = parse_probs_list(&a.probs)?;
            emit(a.out.as_deref(), &cmd_kb_query(&read_text(&a.store)?, &probs)?)
        }
        Command::Route(a) => {
            let network = match &a.network {
                Some(path) => read_text(path)?,
                None => routing_config().to_string(),
            };
            emit(a.out.as_deref(), &cmd_route(&network, &probs_map(&a.prob))?)
        }
        Command::Loop(a) => {
            let scenario = make_scenario(&a.scenario)?;
            let store = CaseStore::from_jsonl(&read_text(&a.store)?)?;
            let names: Vec<String> =
                scenario.refined.system.components.iter().map(|c| c.name.clone()).collect();
            let nets = load_models(&a.models, &names)?;
            let threshold = a.threshold.unwrap_or_else(|| {
                capability_threshold(scenario.refined.abnormal.len(), names.len())
            });
            let log = cmd_loop(&scenario, &store, &nets, &read_text(&a.trace)?, threshold)?;
            emit(a.out.as_deref(), &log)
        }
    }
}

/// Compiles a scenario (with probability overrides) to .efg text.
pub fn cmd_build(scenario: &str, overrides: &BTreeMap<String, f64>) -> Result<String> {
    let scenario = make_scenario(scenario)?;
    let game = scenario.game_with_probs(overrides)?;
    Ok(serialize_efg(&game))
}

/// Solves a game the way the sweep does: full enumeration with selection
/// when the profile space fits the cap, exact backward induction otherwise.
/// `Ok(None)` means the game has no pure equilibrium.
fn solve_with_count(game: &Game) -> Result<Option<(Equilibrium, Option<usize>)>> {
    if game.profile_space() <= PROFILE_CAP as f64 {
        let set = enumerate_pure_equilibria(game)?;
        let count = set.equilibria.len();
        Ok(select_equilibrium(game, &set).cloned().map(|eq| (eq, Some(count))))
    } else if game.backward_induction_exact() {
        Ok(Some((solve_backward_induction(game)?, None)))
    } else {
        Err(Error::SolverCap { profiles: game.profile_space(), cap: PROFILE_CAP })
    }
}

/// Parses .efg text, solves it, and reports every equilibrium plus the
/// selected one as policy strings.
pub fn cmd_solve(text: &str) -> Result<String> {
    let game = parse_efg(text)?;
    let mut out = format!(
        "game {:?}: {} players, {} nodes, {} terminals\n",
        game.title,
        game.players.len(),
        game.nodes.len(),
        game.leaves().count()
    );
    let policies = |eq: &Equilibrium| -> Result<Vec<String>> {
        game.players
            .iter()
            .zip(&game.player_names)
            .map(|(p, name)| Ok(format!("{name}: {}", policy_string(&game, &eq.profile, *p)?)))
            .collect()
    };
    let selected = if game.profile_space() <= PROFILE_CAP as f64 {
        let _ = writeln!(
            out,
            "method: enumeration over {} pure profiles",
            game.profile_space() as u64
        );
        let set = enumerate_pure_equilibria(&game)?;
        let _ = writeln!(out, "equilibria: {}", set.equilibria.len());
        for (k, eq) in set.equilibria.iter().enumerate() {
            let _ = writeln!(
                out,
                "eq {}: E[u0]={} | {}",
                k + 1,
                fmt_decimal(eq.system_utility),
                policies(eq)?.join(" | ")
            );
        }
        let selected = select_equilibrium(&game, &set).cloned().ok_or_else(|| {
            Error::Validation(format!(
                "game {:?} has no pure-strategy Bayesian-Nash equilibrium",
                game.title
            ))
        })?;
        let position =
            set.equilibria.iter().position(|e| e.profile == selected.profile).unwrap_or(0);
        let _ = writeln!(out, "selected: eq {}", position + 1);
        selected
    } else if game.backward_induction_exact() {
        let _ = writeln!(
            out,
            "method: backward induction (the profile space exceeds {PROFILE_CAP} pure profiles)"
        );
        let _ = writeln!(out, "equilibria: not enumerated");
        let _ = writeln!(out, "selected: backward-induction equilibrium");
        solve_backward_induction(&game)?
    } else {
        return Err(Error::SolverCap { profiles: game.profile_space(), cap: PROFILE_CAP });
    };
    for line in policies(&selected)? {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "expected system utility: {}", fmt_decimal(selected.system_utility));
    Ok(out)
}

/// Shapley allocation of a scenario's refined architecture as CSV.
pub fn cmd_shapley(scenario: &str) -> Result<String> {
    let scenario = make_scenario(scenario)?;
    let table = scenario.payoff_table()?;
    let mut out = String::from("component,shapley,normal_share\n");
    for c in &scenario.refined.system.components {
        // Attacked components have no share of the system utility; their
        // payoff comes from the attacker scheme, so the cell stays empty.
        let share = table.normal_share.get(&c.id).copied().map(fmt_decimal).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", c.name, fmt_decimal(table.shapley[&c.id]), share);
    }
    Ok(out)
}

/// Sweeps each attacked component's compromise probability over a grid and
/// emits one CSV row per point: `p_a,p_b,system_utility,policy_<component>
/// ...,eq_count`. One-axis sweeps leave `p_b` empty; points whose game has
/// no pure equilibrium carry a `no-equilibrium` marker in `eq_count`, and
/// points the solver cannot handle carry `error`.
pub fn cmd_sweep(scenario: &str, step: f64) -> Result<String> {
    if scenario == "routing" {
        return routing_sweep(step);
    }
    let scenario = make_scenario(scenario)?;
    let axes: Vec<ComponentId> = scenario.refined.abnormal.iter().copied().collect();
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Config(format!(
            "sweep supports one or two attacked components; scenario {} has {}",
            scenario.name,
            axes.len()
        )));
    }
    let players = scenario.refined.system.ids();
    let mut out = String::from("p_a,p_b,system_utility");
    for c in &scenario.refined.system.components {
        let _ = write!(out, ",policy_{}", c.name);
    }
    out.push_str(",eq_count\n");
    let points = probability_grid(step, axes.len())?;
    let rows: Vec<String> = points
        .par_iter()
        .map(|point| -> Result<String> {
            let probs: BTreeMap<ComponentId, f64> =
                axes.iter().copied().zip(point.iter().copied()).collect();
            let mut cells: Vec<String> = vec![
                fmt_decimal(point[0]),
                if point.len() > 1 { fmt_decimal(point[1]) } else { String::new() },
            ];
            let game = scenario.game_at(&probs)?;
            match solve_with_count(&game) {
                Ok(Some((eq, count))) => {
                    cells.push(fmt_decimal(eq.system_utility));
                    for p in &players {
                        cells.push(policy_string(&game, &eq.profile, *p)?);
                    }
                    cells.push(count.map(|c| c.to_string()).unwrap_or_default());
                }
                Ok(None) => {
                    cells.push(String::new());
                    cells.extend(players.iter().map(|_| String::new()));
                    cells.push("no-equilibrium".into());
                }
                Err(Error::SolverCap { .. }) => {
                    cells.push(String::new());
                    cells.extend(players.iter().map(|_| String::new()));
                    cells.push("error".into());
                }
                Err(e) => return Err(e),
            }
            Ok(cells.join(","))
        })
        .collect::<Result<_>>()?;
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// The routing sweep answers by dynamic programming: the full game tree is
/// far beyond enumeration, and the per-node subgame recursion is exact.
fn routing_sweep(step: f64) -> Result<String> {
    let net = RoutingNetwork::parse(routing_config())?;
    let axes = net.uncertain.clone();
    let mut out = String::from("p_a,p_b,system_utility");
    for name in &net.names {
        let _ = write!(out, ",policy_{name}");
    }
    out.push_str(",eq_count\n");
    let points = probability_grid(step, axes.len())?;
    let rows: Vec<String> = points
        .par_iter()
        .map(|point| -> Result<String> {
            let probs: BTreeMap<usize, f64> =
                axes.iter().copied().zip(point.iter().copied()).collect();
            let solution = dp_solve(&net, &probs)?;
            let mut cells: Vec<String> = vec![
                fmt_decimal(point[0]),
                if point.len() > 1 { fmt_decimal(point[1]) } else { String::new() },
                fmt_decimal(solution.expected_utility),
            ];
            for k in 0..net.names.len() {
                if k == net.destination {
                    cells.push("deliver".into());
                } else {
                    cells.push(net.names[solution.plans[&k][0]].clone());
                }
            }
            cells.push(String::new());
            Ok(cells.join(","))
        })
        .collect::<Result<_>>()?;
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Trains one classifier per refined component on seeded synthetic data and
/// writes `<component>.clf` model files into `out_dir`.
pub fn cmd_train(
    scenario: &str,
    seed: u64,
    samples: usize,
    epochs: u32,
    out_dir: &Path,
) -> Result<String> {
    let scenario = make_scenario(scenario)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let hyper = Hyperparams { epochs, seed, ..Hyperparams::default() };
    let components = &scenario.refined.system.components;
    let trained: Vec<(String, ClfNetwork, crate::predictor::TrainReport)> = components
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let data = synthetic_dataset(k + 1, samples, SENSOR_DIM, seed)?;
            let (net, report) = train(&data, &hyper)?;
            Ok((c.name.clone(), net, report))
        })
        .collect::<Result<_>>()?;
    let mut out = String::new();
    for (name, net, report) in &trained {
        let path = out_dir.join(format!("{name}.clf"));
        write_text(&path, &net.to_text())?;
        let _ = writeln!(
            out,
            "component {name}: train accuracy {}, holdout accuracy {} \
             ({} train / {} held out) -> {}",
            fmt_decimal(report.train_accuracy),
            report.holdout_accuracy.map(fmt_decimal).unwrap_or_else(|| "n/a".into()),
            report.train_samples,
            report.holdout_samples,
            path.display()
        );
    }
    Ok(out)
}

/// Loads one `<name>.clf` model per component from a directory.
pub fn load_models(dir: &Path, names: &[String]) -> Result<Vec<ClfNetwork>> {
    names
        .iter()
        .map(|name| ClfNetwork::from_text(&read_text(&dir.join(format!("{name}.clf")))?))
        .collect()
}

/// Builds the knowledge store for a scenario as JSON-lines text.
pub fn cmd_kb_build(scenario: &str, step: f64) -> Result<String> {
    Ok(build_grid(&make_scenario(scenario)?, step)?.to_jsonl())
}

/// Retrieves the nearest case and echoes it, readable header plus the exact
/// stored record.
pub fn cmd_kb_query(store_text: &str, probs: &[f64]) -> Result<String> {
    let store = CaseStore::from_jsonl(store_text)?;
    let (id, case) = store.retrieve(probs)?;
    let mut out = format!(
        "store {:?}: {} cases, grid step {}\n",
        store.header.scenario,
        store.cases.len(),
        fmt_decimal(store.header.step)
    );
    let _ = writeln!(
        out,
        "query: [{}]",
        probs.iter().copied().map(fmt_decimal).collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(out, "nearest: case {id}");
    let _ = writeln!(out, "{}", serde_json::to_string(case).expect("case serializes"));
    Ok(out)
}

/// Parses a comma-separated probability list such as `0.2,0.1`.
pub fn parse_probs_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|f| {
            let p: f64 = f
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("probability {f:?}: {e}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("probability {p} is outside [0, 1]")));
            }
            Ok(p)
        })
        .collect()
}

/// Solves a routing network by dynamic programming and reports the plans,
/// the primary path, and the greedy baseline.
pub fn cmd_route(network: &str, overrides: &BTreeMap<String, f64>) -> Result<String> {
    let net = RoutingNetwork::parse(network)?;
    let mut probs = net.default_probs.clone();
    for (name, p) in overrides {
        let k = net.index(name)?;
        if !net.uncertain.contains(&k) {
            return Err(Error::Config(format!("node {name:?} is not uncertain")));
        }
        if !(0.0..=1.0).contains(p) {
            return Err(Error::Config(format!("probability {p} for {name:?} is outside [0, 1]")));
        }
        probs.insert(k, *p);
    }
    let solution = dp_solve(&net, &probs)?;
    let greedy = greedy_plans(&net);
    let greedy_e = greedy_expected(&net, &probs)?;
    let path_names = |path: &[usize]| -> String {
        path.iter().map(|&n| net.names[n].as_str()).collect::<Vec<_>>().join(" -> ")
    };
    let mut out = format!(
        "network: {} nodes, source {} -> destination {}\n",
        net.names.len(),
        net.names[net.source],
        net.names[net.destination]
    );
    let _ = writeln!(
        out,
        "probabilities: {}",
        net.uncertain
            .iter()
            .map(|n| format!("{}={}", net.names[*n], fmt_decimal(probs[n])))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let _ = writeln!(
        out,
        "dynamic program: expected utility {}",
        fmt_decimal(solution.expected_utility)
    );
    let _ = writeln!(
        out,
        "solve order: {}",
        solution.solve_order.iter().map(|&n| net.names[n].as_str()).collect::<Vec<_>>().join(", ")
    );
    out.push_str("plans:\n");
    for (node, prefs) in &solution.plans {
        let _ = writeln!(
            out,
            "  {}: {}",
            net.names[*node],
            prefs.iter().map(|&n| net.names[n].as_str()).collect::<Vec<_>>().join(" > ")
        );
    }
    let _ = writeln!(out, "primary path: {}", path_names(&all_normal_path(&net, &solution.plans)?));
    let _ = writeln!(out, "greedy: expected utility {}", fmt_decimal(greedy_e));
    let _ = writeln!(out, "greedy path: {}", path_names(&all_normal_path(&net, &greedy)?));
    let _ = writeln!(
        out,
        "advantage: {}",
        fmt_decimal(solution.expected_utility - greedy_e)
    );
    Ok(out)
}

/// A synthetic sensor trace for a scenario: one CSV row per tick holding
/// every component's readings in order. Attacked components show their
/// compromise signature (their two informative dimensions shifted by +3)
/// from `attack_tick` on.
pub fn synthetic_trace(
    scenario: &Scenario,
    ticks: usize,
    attack_tick: Option<usize>,
    seed: u64,
) -> String {
    let components = &scenario.refined.system.components;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = components
        .iter()
        .flat_map(|c| (1..=SENSOR_DIM).map(move |j| format!("{}_s{j}", c.name)))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for tick in 0..ticks {
        let mut cells = Vec::with_capacity(components.len() * SENSOR_DIM);
        for (k, c) in components.iter().enumerate() {
            let mut readings: Vec<f64> =
                (0..SENSOR_DIM).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let attacked_now = scenario.refined.abnormal.contains(&c.id)
                && attack_tick.is_some_and(|at| tick >= at);
            if attacked_now {
                readings[2 * k] += 3.0;
                readings[2 * k + 1] += 3.0;
            }
            cells.extend(readings.iter().map(|v| format!("{v:?}")));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Replays a sensor trace through the loop: classify each tick, threshold
/// into a probability vector, retrieve the nearest knowledge case, and log
/// the enacted cooperative-path actions. Output CSV columns: `tick`, one
/// `p_<component>` each, `case`, one `action_<component>` each.
pub fn cmd_loop(
    scenario: &Scenario,
    store: &CaseStore,
    nets: &[ClfNetwork],
    trace: &str,
    threshold: f64,
) -> Result<String> {
    let components = &scenario.refined.system.components;
    if store.cases.is_empty() {
        return Err(Error::Validation(
            "the knowledge store holds no cases; run kb-build before the loop".into(),
        ));
    }
    if nets.len() != components.len() {
        return Err(Error::Validation(format!(
            "{} classifiers for {} components",
            nets.len(),
            components.len()
        )));
    }
    let widths: Vec<usize> = nets.iter().map(ClfNetwork::input_dim).collect();
    let total: usize = widths.iter().sum();
    let mut out = String::from("tick");
    for c in components {
        let _ = write!(out, ",p_{}", c.name);
    }
    out.push_str(",case");
    for c in components {
        let _ = write!(out, ",action_{}", c.name);
    }
    out.push('\n');
    let mut tick = 0usize;
    for (k, line) in trace.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if k == 0 && fields[0].trim().parse::<f64>().is_err() {
            continue; // header row
        }
        if fields.len() != total {
            return Err(Error::Config(format!(
                "trace line {}: {} readings for {} expected",
                k + 1,
                fields.len(),
                total
            )));
        }
        let values: Vec<f64> = fields
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("trace line {}: reading {f:?}: {e}", k + 1))
                })
            })
            .collect::<Result<_>>()?;
        let mut sensors = Vec::with_capacity(nets.len());
        let mut offset = 0;
        for w in &widths {
            sensors.push(values[offset..offset + w].to_vec());
            offset += w;
        }
        let verdict = clf(nets, &sensors, threshold)?;
        let (case_id, case) = store.retrieve(&verdict.p)?;
        let mut cells = vec![tick.to_string()];
        cells.extend(verdict.p.iter().copied().map(fmt_decimal));
        cells.push(case_id.to_string());
        if case.no_equilibrium {
            cells.extend(components.iter().map(|_| String::new()));
        } else {
            cells.extend(case.a_star.iter().cloned());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
        tick += 1;
    }
    if tick == 0 {
        return Err(Error::Config("the trace holds no data rows".into()));
    }
    Ok(out)
}

/// True if `name` is one of the shipped scenarios; used by the binary for a
/// friendlier message than the per-command error.
pub fn known_scenario(name: &str) -> bool {
    SCENARIO_NAMES.contains(&name)
}
