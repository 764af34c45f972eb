//! Shipped case studies: the single water tank under two attacks, the Znn
//! news web system, the interdomain routing game as a component system, and
//! a two-component water-treatment slice. Each scenario wires a system
//! configuration (under `scenarios/`), a system-utility function, an attack
//! model and default compromise probabilities into a solvable game.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Deserialize;

use crate::game::{compile, Game, NodeKind, PlayerType};
use crate::payoff::{AttackerPayoff, PayoffTable};
use crate::routing::RoutingNetwork;
use crate::solver::{solve, PureProfile, Solution};
use crate::system::{
    apply_attack, load_spec, refine_architecture, AttackedSystem, ComponentId, ComponentSystem,
    Refined, SystemSpec,
};
use crate::{Error, Result};

const TANK_TOML: &str = include_str!("../scenarios/tank.toml");
const SWAT_TOML: &str = include_str!("../scenarios/swat.toml");
const SWAT_MINI_TOML: &str = include_str!("../scenarios/swat-mini.toml");
const ZNN_TOML: &str = include_str!("../scenarios/znn.toml");
const ROUTING_TOML: &str = include_str!("../scenarios/routing.toml");

/// Names accepted by [`make_scenario`].
pub const SCENARIO_NAMES: &[&str] = &["tank-a1", "tank-a2", "znn", "routing", "swat-mini"];

/// A system utility over joint action indices of the refined architecture.
pub type UtilityFn = dyn Fn(&[usize]) -> f64 + Send + Sync;

/// A fully wired case study, ready to compile at any probability point.
#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// The original architecture with the attack applied (pre-refinement).
    pub attacked: AttackedSystem,
    /// The refined architecture the game is actually played on.
    pub refined: Refined,
    pub utility: Arc<UtilityFn>,
    /// Default compromise probability per attacked component (original ids).
    pub default_probs: BTreeMap<ComponentId, f64>,
    pub attacker: AttackerPayoff,
}

impl Scenario {
    /// Resolves `--prob name=p` style overrides against the default
    /// probabilities. Names refer to the original architecture, so a grouped
    /// member like `P102` resolves to its surviving representative.
    pub fn resolve_probs(
        &self,
        overrides: &BTreeMap<String, f64>,
    ) -> Result<BTreeMap<ComponentId, f64>> {
        let mut probs = self.default_probs.clone();
        for (name, p) in overrides {
            let id = self
                .attacked
                .system
                .component_by_name(name)
                .map(|c| c.id)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "unknown component {name:?} in scenario {}; known: {}",
                        self.name,
                        self.attacked
                            .system
                            .components
                            .iter()
                            .map(|c| c.name.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            let rep = self.refined.representative.get(&id).copied().unwrap_or(id);
            if !self.refined.abnormal.contains(&rep) {
                return Err(Error::Config(format!(
                    "component {name:?} is not attacked in scenario {}",
                    self.name
                )));
            }
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!(
                    "probability {p} for {name:?} is outside [0, 1]"
                )));
            }
            probs.insert(rep, *p);
        }
        Ok(probs)
    }

    /// Compiles the game at explicit probabilities (keys may use original or
    /// refined component ids).
    pub fn game_at(&self, probs: &BTreeMap<ComponentId, f64>) -> Result<Game> {
        compile(&self.attacked, &*self.utility, probs, self.attacker, self.name)
    }

    /// Compiles the game with named overrides on top of the defaults.
    pub fn game_with_probs(&self, overrides: &BTreeMap<String, f64>) -> Result<Game> {
        self.game_at(&self.resolve_probs(overrides)?)
    }

    /// Compiles the game at the default probabilities.
    pub fn game(&self) -> Result<Game> {
        self.game_with_probs(&BTreeMap::new())
    }

    /// Compiles and solves in one step.
    pub fn solve_with_probs(
        &self,
        overrides: &BTreeMap<String, f64>,
    ) -> Result<(Game, Solution)> {
        let game = self.game_with_probs(overrides)?;
        let solution = solve(&game)?;
        Ok((game, solution))
    }

    /// The Shapley payoff table of the refined architecture.
    pub fn payoff_table(&self) -> Result<PayoffTable> {
        PayoffTable::build(
            &self.refined.system,
            &self.refined.abnormal,
            &*self.utility,
            self.attacker,
        )
    }
}

/// Builds one of the shipped scenarios; see [`SCENARIO_NAMES`].
pub fn make_scenario(name: &str) -> Result<Scenario> {
    match name {
        "tank-a1" => tank_scenario("tank-a1", "A1", "the outlet pump is jammed closed", 0.8),
        "tank-a2" => {
            tank_scenario("tank-a2", "A2", "the level indicator reports the opposite", 0.8)
        }
        "znn" => znn_scenario(),
        "routing" => routing_scenario(),
        "swat-mini" => swat_mini_scenario(),
        other => Err(Error::Config(format!(
            "unknown scenario {other:?}; available: {}",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

/// The raw water-treatment configuration (eleven components; refines to
/// eight). Not part of [`SCENARIO_NAMES`]: it demonstrates architecture
/// refinement and is consumed by the pipeline example via [`load_spec`].
pub fn swat_config() -> &'static str {
    SWAT_TOML
}

/// The shipped routing network in the network-config format, for
/// [`crate::routing::RoutingNetwork::parse`].
pub fn routing_config() -> &'static str {
    ROUTING_TOML
}

/// System utility of the refined water-treatment architecture, in refined
/// id order: MV101, LIT101, P101, MV201, LIT301, P301, MV302, P501.
/// Each stage contributes throughput only if everything upstream runs;
/// ignoring a HIGH tank level or pumping from an empty one is penalized.
pub fn swat_utility(actions: &[usize]) -> f64 {
    let active = |k: usize| actions[k] == 0;
    let (mv101, p101, mv201, p301, mv302, p501) =
        (active(0), active(2), active(3), active(5), active(6), active(7));
    let high1 = actions[1] == 1;
    let high3 = actions[4] == 1;
    let mut u = 0.0;
    let inlet = mv101 && p101;
    if inlet {
        u += 5.0;
    }
    let dosed = inlet && mv201;
    if dosed {
        u += 5.0;
    }
    let filtered = dosed && p301;
    if filtered {
        u += 5.0;
    }
    let fed = filtered && mv302;
    if fed {
        u += 5.0;
    }
    if fed && p501 {
        u += 5.0;
    }
    if high1 && mv101 {
        u -= 20.0;
    }
    if !high1 && !mv101 && p101 {
        u -= 10.0;
    }
    if high3 && dosed {
        u -= 20.0;
    }
    if !high3 && !dosed && p301 {
        u -= 10.0;
    }
    u
}

/// Turns a config's `[outcomes]` table into a dense utility over the given
/// system's joint actions. Keys are the comma-joined action labels in
/// component-id order; the table must cover the joint space exactly.
pub fn outcome_utility(
    system: &ComponentSystem,
    outcomes: &BTreeMap<String, f64>,
) -> Result<Arc<UtilityFn>> {
    let counts: Vec<usize> = system.components.iter().map(|c| c.actions.len()).collect();
    let total: usize = counts.iter().product();
    let mut table = vec![0.0; total];
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut joint = vec![0usize; counts.len()];
    for slot in table.iter_mut() {
        let key = system
            .components
            .iter()
            .zip(&joint)
            .map(|(c, &a)| c.actions[a].as_str())
            .collect::<Vec<_>>()
            .join(",");
        let value = outcomes.get(&key).ok_or_else(|| {
            Error::Config(format!("outcome table is missing joint action {key:?}"))
        })?;
        *slot = *value;
        seen.insert(outcomes.get_key_value(&key).expect("just found").0);
        // Advance the odometer, last component fastest.
        for k in (0..joint.len()).rev() {
            joint[k] += 1;
            if joint[k] < counts[k] {
                break;
            }
            joint[k] = 0;
        }
    }
    if let Some(extra) = outcomes.keys().find(|k| !seen.contains(k.as_str())) {
        return Err(Error::Config(format!(
            "outcome table key {extra:?} matches no joint action"
        )));
    }
    let strides: Vec<usize> =
        (0..counts.len()).map(|k| counts[k + 1..].iter().product()).collect();
    Ok(Arc::new(move |actions: &[usize]| {
        let idx: usize = actions.iter().zip(&strides).map(|(a, s)| a * s).sum();
        table[idx]
    }))
}

/// Utility of one tank joint action, classified against the true level via
/// the shipped outcome table.
pub fn tank_outcome_utility(level: &str, valve: &str, pump: &str) -> Result<f64> {
    let spec = load_spec(TANK_TOML)?;
    let key = format!("{valve},{pump},{level}");
    spec.outcomes.get(&key).copied().ok_or_else(|| {
        Error::Config(format!("no tank outcome for valve {valve:?}, pump {pump:?}, level {level:?}"))
    })
}

fn spec_scenario(
    name: &'static str,
    description: &'static str,
    spec: SystemSpec,
    attack_id: &str,
    attacker: AttackerPayoff,
    default_prob: f64,
) -> Result<Scenario> {
    let model = spec.attack(attack_id)?.clone();
    let attacked = apply_attack(&spec.system, &model, &model.capability)?;
    let refined = refine_architecture(&attacked.system, &attacked.abnormal)?;
    let utility = outcome_utility(&refined.system, &spec.outcomes)?;
    let default_probs =
        attacked.abnormal.iter().map(|id| (*id, default_prob)).collect();
    Ok(Scenario { name, description, attacked, refined, utility, default_probs, attacker })
}

fn tank_scenario(
    name: &'static str,
    attack_id: &str,
    description: &'static str,
    default_prob: f64,
) -> Result<Scenario> {
    spec_scenario(
        name,
        description,
        load_spec(TANK_TOML)?,
        attack_id,
        AttackerPayoff::ZeroSum,
        default_prob,
    )
}

fn swat_mini_scenario() -> Result<Scenario> {
    spec_scenario(
        "swat-mini",
        "two-component water-treatment slice with the pump switched off",
        load_spec(SWAT_MINI_TOML)?,
        "A-P101",
        AttackerPayoff::ZeroSum,
        0.2,
    )
}

/// Server modes of the news web system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServerMode {
    Text,
    Multimedia,
    Discard,
}

impl ServerMode {
    pub const ALL: [ServerMode; 3] = [ServerMode::Text, ServerMode::Multimedia, ServerMode::Discard];

    pub fn label(self) -> &'static str {
        match self {
            ServerMode::Text => "Text",
            ServerMode::Multimedia => "Multimedia",
            ServerMode::Discard => "Discard",
        }
    }
}

/// Parameters of the news web system (see `scenarios/znn.toml`).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZnnParams {
    pub requests: u32,
    pub step: u32,
    pub reward_text: f64,
    pub reward_multimedia: f64,
    pub cost_text: f64,
    pub cost_multimedia: f64,
    pub latency_threshold: f64,
    pub penalty_divisor: f64,
    pub p_server2: f64,
    pub p_server3: f64,
}

impl ZnnParams {
    pub fn load() -> Result<Self> {
        let params: ZnnParams =
            toml::from_str(ZNN_TOML).map_err(|e| Error::Config(format!("znn config: {e}")))?;
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if self.step == 0 || self.requests % self.step != 0 {
            return Err(Error::Config(format!(
                "load-balancer step {} must divide the request count {}",
                self.step, self.requests
            )));
        }
        if !(self.reward_multimedia > self.reward_text && self.reward_text > 0.0) {
            return Err(Error::Config(
                "multimedia reward must exceed the text reward, both positive".into(),
            ));
        }
        if !(self.cost_multimedia > self.cost_text && self.cost_text > 0.0) {
            return Err(Error::Config(
                "multimedia cost must exceed the text cost, both positive".into(),
            ));
        }
        if self.penalty_divisor <= 0.0 {
            return Err(Error::Config("penalty divisor must be positive".into()));
        }
        Ok(())
    }

    /// All request distributions over the three servers at this granularity,
    /// ordered by the first share, then the second.
    pub fn distributions(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        let mut d1 = 0;
        while d1 <= self.requests {
            let mut d2 = 0;
            while d1 + d2 <= self.requests {
                out.push((d1, d2, self.requests - d1 - d2));
                d2 += self.step;
            }
            d1 += self.step;
        }
        out
    }
}

/// System utility of the news web system: serving earns a per-request
/// reward; a server whose load cost exceeds the latency threshold pays a
/// quadratic penalty; discarded shares earn nothing.
pub fn znn_utility(params: &ZnnParams, distribution: [f64; 3], modes: [ServerMode; 3]) -> f64 {
    let mut u = 0.0;
    for (d, mode) in distribution.into_iter().zip(modes) {
        let (reward, cost) = match mode {
            ServerMode::Text => (params.reward_text, params.cost_text),
            ServerMode::Multimedia => (params.reward_multimedia, params.cost_multimedia),
            ServerMode::Discard => continue,
        };
        let overload = (d * cost - params.latency_threshold).max(0.0);
        u += reward * d - overload * overload / params.penalty_divisor;
    }
    u
}

fn znn_scenario() -> Result<Scenario> {
    use crate::system::{AttackAction, AttackModel, Component, QualityAttribute};

    let params = ZnnParams::load()?;
    let dists = params.distributions();
    let labels: Vec<String> =
        dists.iter().map(|(a, b, c)| format!("{a}-{b}-{c}")).collect();
    let modes: Vec<String> = ServerMode::ALL.iter().map(|m| m.label().to_string()).collect();
    let components = vec![
        Component {
            id: ComponentId(1),
            name: "LoadBalancer".into(),
            actions: labels,
            runtime: true,
            replace_group: None,
        },
        Component {
            id: ComponentId(2),
            name: "Server1".into(),
            actions: modes.clone(),
            runtime: true,
            replace_group: None,
        },
        Component {
            id: ComponentId(3),
            name: "Server2".into(),
            actions: modes.clone(),
            runtime: true,
            replace_group: None,
        },
        Component {
            id: ComponentId(4),
            name: "Server3".into(),
            actions: modes,
            runtime: true,
            replace_group: None,
        },
    ];
    let edges = vec![
        (ComponentId(1), ComponentId(2)),
        (ComponentId(1), ComponentId(3)),
        (ComponentId(1), ComponentId(4)),
    ];
    let quality = vec![QualityAttribute {
        label: "request-throughput".into(),
        contributors: vec![ComponentId(1), ComponentId(2), ComponentId(3), ComponentId(4)],
    }];
    let system = ComponentSystem::new(components, edges, quality)?;
    let capability: BTreeSet<ComponentId> = [ComponentId(3), ComponentId(4)].into();
    let model = AttackModel {
        id: "A-servers".into(),
        description: "compromise the exposed servers so they discard their share".into(),
        objectives: vec!["degrade request throughput".into()],
        capability: capability.clone(),
        attack_actions: capability
            .iter()
            .map(|id| (*id, vec![AttackAction::plain("Discard")]))
            .collect(),
        policy: "forced".into(),
    };
    let attacked = apply_attack(&system, &model, &capability)?;
    let refined = refine_architecture(&attacked.system, &attacked.abnormal)?;

    // The attacker collects the shortfall from the best attainable utility.
    let mut best = f64::NEG_INFINITY;
    for &(d1, d2, d3) in &dists {
        for m1 in ServerMode::ALL {
            for m2 in ServerMode::ALL {
                for m3 in ServerMode::ALL {
                    let u = znn_utility(
                        &params,
                        [d1 as f64, d2 as f64, d3 as f64],
                        [m1, m2, m3],
                    );
                    best = best.max(u);
                }
            }
        }
    }
    let p = params.clone();
    let utility: Arc<UtilityFn> = Arc::new(move |actions: &[usize]| {
        let (d1, d2, d3) = dists[actions[0]];
        let mode = |k: usize| ServerMode::ALL[actions[k]];
        znn_utility(&p, [d1 as f64, d2 as f64, d3 as f64], [mode(1), mode(2), mode(3)])
    });
    let default_probs =
        [(ComponentId(3), params.p_server2), (ComponentId(4), params.p_server3)].into();
    Ok(Scenario {
        name: "znn",
        description: "news web system with two servers that may discard requests",
        attacked,
        refined,
        utility,
        default_probs,
        attacker: AttackerPayoff::LossShare { max_utility: best },
    })
}

/// The component-game view of the routing study: each node is a component
/// whose action is its next hop; a compromised node bounces. The analytic
/// routing results come from [`crate::routing::dp_solve`]; this view feeds
/// the same story through the standard compile-and-solve pipeline.
fn routing_scenario() -> Result<Scenario> {
    use crate::system::{AttackAction, AttackModel, Component, QualityAttribute};

    let net = RoutingNetwork::parse(ROUTING_TOML)?;
    #[derive(Clone, Copy)]
    enum Step {
        Forward(usize),
        Back,
        Deliver,
    }
    let mut components = Vec::new();
    let mut steps: Vec<Vec<Step>> = Vec::new();
    for (k, name) in net.names.iter().enumerate() {
        let (actions, node_steps) = if k == net.destination {
            (vec!["deliver".to_string()], vec![Step::Deliver])
        } else {
            let mut actions: Vec<String> =
                net.options(k).iter().map(|&m| net.names[m].clone()).collect();
            let mut node_steps: Vec<Step> =
                net.options(k).iter().map(|&m| Step::Forward(m)).collect();
            if net.uncertain.contains(&k) {
                actions.push("back".into());
                node_steps.push(Step::Back);
            }
            (actions, node_steps)
        };
        components.push(Component {
            id: ComponentId(k as u32 + 1),
            name: name.clone(),
            actions,
            runtime: true,
            replace_group: None,
        });
        steps.push(node_steps);
    }
    let quality = vec![QualityAttribute {
        label: "packet-delivery".into(),
        contributors: (1..=net.names.len() as u32).map(ComponentId).collect(),
    }];
    // No edges: each node commits to a forwarding choice independently.
    let system = ComponentSystem::new(components, Vec::new(), quality)?;
    let capability: BTreeSet<ComponentId> =
        net.uncertain.iter().map(|&u| ComponentId(u as u32 + 1)).collect();
    let model = AttackModel {
        id: "A-bounce".into(),
        description: "compromised nodes bounce every packet back to its sender".into(),
        objectives: vec!["delay packet delivery".into()],
        capability: capability.clone(),
        attack_actions: capability
            .iter()
            .map(|id| (*id, vec![AttackAction::plain("back")]))
            .collect(),
        policy: "forced".into(),
    };
    let attacked = apply_attack(&system, &model, &capability)?;
    let refined = refine_architecture(&attacked.system, &attacked.abnormal)?;

    let (source, destination) = (net.source, net.destination);
    let reward = net.delivery_reward;
    let guard = net.names.len() + 1;
    let utility: Arc<UtilityFn> = Arc::new(move |actions: &[usize]| {
        let mut current = source;
        let mut hops = 0usize;
        for _ in 0..guard {
            if current == destination {
                return reward - hops as f64;
            }
            match steps[current][actions[current]] {
                Step::Forward(next) => {
                    hops += 1;
                    current = next;
                }
                // The packet dies here: one wasted hop back to the sender.
                Step::Back => return -((hops + 1) as f64),
                Step::Deliver => unreachable!("only the destination delivers"),
            }
        }
        -(hops as f64) // cycle guard; cannot trigger on a predecessor-free tree
    });
    let default_probs = net
        .default_probs
        .iter()
        .map(|(&node, &p)| (ComponentId(node as u32 + 1), p))
        .collect();
    Ok(Scenario {
        name: "routing",
        description: "packet delivery with two relays that may bounce traffic",
        attacked,
        refined,
        utility,
        default_probs,
        attacker: AttackerPayoff::LossShare { max_utility: net.max_utility },
    })
}

/// Renders a player's pure policy as `context-ACTION` parts joined by `; `,
/// where the context is the title-cased sequence of moves visible on the
/// path to each information set (chance moves excluded, the player's own
/// resolved type marked `com`/`coo`). The tank valve, for example, renders
/// as `Low-ON; High-OFF`.
pub fn policy_string(game: &Game, profile: &PureProfile, player: ComponentId) -> Result<String> {
    let sets = game.infosets_of(player);
    if sets.is_empty() {
        return Err(Error::Validation(format!(
            "player {player} has no information sets in game {:?}",
            game.title
        )));
    }
    // parent[child] = (node, branch index)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; game.nodes.len()];
    for node in &game.nodes {
        for (b, branch) in node.branches.iter().enumerate() {
            parent[branch.child] = Some((node.id, b));
        }
    }
    let mut parts = Vec::new();
    for s in sets {
        let set = &game.infosets[s];
        let action = &set.actions[profile.action(s)];
        let mut context = Vec::new();
        let mut cursor = set.nodes[0];
        while let Some((node, b)) = parent[cursor] {
            if game.nodes[node].kind == NodeKind::Decision {
                context.push(title_case(&game.nodes[node].branches[b].observed));
            }
            cursor = node;
        }
        context.reverse();
        match set.key.ptype {
            PlayerType::Normal => {}
            PlayerType::Com => context.insert(0, "com".into()),
            PlayerType::Coo => context.insert(0, "coo".into()),
        }
        if context.is_empty() {
            parts.push(action.clone());
        } else {
            parts.push(format!("{}-{}", context.join("/"), action));
        }
    }
    Ok(parts.join("; "))
}

fn title_case(label: &str) -> String {
    let mut chars = label.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
        None => String::new(),
    }
}
