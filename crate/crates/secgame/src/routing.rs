//! Interdomain routing as a distributed sequence of per-node games.
//!
//! A routing network is an undirected graph with a source, a destination and
//! some uncertain nodes that may be compromised. A compromised node bounces
//! every packet back to its sender (a wasted round trip of two hops); the
//! sender then falls back to its next-preferred neighbor. Delivering in `h`
//! hops earns the system `reward - h`; realized-normal nodes each receive a
//! 1/|nodes| share of that utility and realized-compromised nodes split the
//! shortfall from the best attainable utility.
//!
//! Each node ranks its forwarding options in its own subgame: chance resolves
//! the uncertain nodes, the node moves without observing them, and the route
//! is simulated from the source (reaching the node over its unbounced
//! shortest prefix). [`dp_solve`] runs those subgames outward from the
//! destination, deferring a node until every node its continuations reference
//! is solved. [`full_game_solve`] solves the joint game over all nodes'
//! rankings at once and is used to validate the dynamic program; a greedy
//! distance-descent router is the baseline.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Deserialize;

use crate::game::{Branch, Game, InfoKey, PlayerType, TreeBuilder};
use crate::system::ComponentId;
use crate::tolerances;
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    /// Optional explicit node list; nodes also come from `links`.
    #[serde(default)]
    nodes: Vec<String>,
    source: String,
    destination: String,
    links: Vec<(String, String)>,
    delivery_reward: f64,
    max_utility: f64,
    /// Uncertain nodes with their default compromise probabilities.
    #[serde(default)]
    uncertain: BTreeMap<String, f64>,
}

/// An undirected routing topology with its attack surface.
#[derive(Clone, Debug)]
pub struct RoutingNetwork {
    /// Node names in ascending order; indices below refer to this list.
    pub names: Vec<String>,
    pub adjacency: Vec<BTreeSet<usize>>,
    pub source: usize,
    pub destination: usize,
    /// Potentially compromised nodes, ascending.
    pub uncertain: Vec<usize>,
    /// Default compromise probability per uncertain node.
    pub default_probs: BTreeMap<usize, f64>,
    /// Utility of delivery is `delivery_reward - hops` (bounces count two).
    pub delivery_reward: f64,
    /// Best attainable utility; compromised nodes are paid the shortfall.
    pub max_utility: f64,
}

impl RoutingNetwork {
    /// Parses a network description (TOML: `source`, `destination`,
    /// `uncertain`, `links`, `delivery_reward`, `max_utility`, `[p_com]`).
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawNetwork =
            toml::from_str(text).map_err(|e| Error::Config(format!("routing network: {e}")))?;
        let mut names: BTreeSet<String> = raw.nodes.iter().cloned().collect();
        for (a, b) in &raw.links {
            names.insert(a.clone());
            names.insert(b.clone());
        }
        let names: Vec<String> = names.into_iter().collect();
        let index = |name: &str| -> Result<usize> {
            names.iter().position(|n| n == name).ok_or_else(|| {
                Error::Config(format!("routing network references unknown node {name:?}"))
            })
        };
        let mut adjacency = vec![BTreeSet::new(); names.len()];
        for (a, b) in &raw.links {
            let (a, b) = (index(a)?, index(b)?);
            if a == b {
                return Err(Error::Config(format!("self-link on node {:?}", names[a])));
            }
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        let source = index(&raw.source)?;
        let destination = index(&raw.destination)?;
        if source == destination {
            return Err(Error::Config("source and destination coincide".into()));
        }
        let mut uncertain = Vec::new();
        let mut default_probs = BTreeMap::new();
        for (name, p) in &raw.uncertain {
            let id = index(name)?;
            if id == source || id == destination {
                return Err(Error::Config(format!(
                    "uncertain node {name:?} cannot be the source or destination"
                )));
            }
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!(
                    "compromise probability for {name:?} is outside [0, 1]"
                )));
            }
            uncertain.push(id);
            default_probs.insert(id, *p);
        }
        uncertain.sort_unstable();
        let net = RoutingNetwork {
            names,
            adjacency,
            source,
            destination,
            uncertain,
            default_probs,
            delivery_reward: raw.delivery_reward,
            max_utility: raw.max_utility,
        };
        // Every node must be able to reach the destination.
        let dis = net.hop_distance(net.destination);
        if let Some(k) = dis.iter().position(|d| d.is_none()) {
            return Err(Error::Config(format!(
                "node {:?} cannot reach the destination",
                net.names[k]
            )));
        }
        Ok(net)
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| {
            Error::Config(format!("unknown routing node {name:?}"))
        })
    }

    /// Breadth-first hop distances to `target` (None if unreachable).
    pub fn hop_distance(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.names.len()];
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(n) = queue.pop_front() {
            for &m in &self.adjacency[n] {
                if dist[m].is_none() {
                    dist[m] = Some(dist[n].unwrap() + 1);
                    queue.push_back(m);
                }
            }
        }
        dist
    }

    /// Predecessor of each node on its breadth-first shortest path from the
    /// source (ties to the smallest-named neighbor). Paths never continue
    /// through the destination, where a packet would terminate.
    pub fn bfs_predecessor(&self) -> Vec<Option<usize>> {
        let mut pred = vec![None; self.names.len()];
        let mut seen = vec![false; self.names.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(n) = queue.pop_front() {
            if n == self.destination {
                continue;
            }
            for &m in &self.adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    pred[m] = Some(n);
                    queue.push_back(m);
                }
            }
        }
        pred
    }

    /// Forwarding options of a node: its neighbors except the one it was
    /// reached from on the shortest-path tree. The destination has none.
    pub fn options(&self, node: usize) -> Vec<usize> {
        if node == self.destination {
            return Vec::new();
        }
        let pred = self.bfs_predecessor();
        self.adjacency[node].iter().copied().filter(|m| Some(*m) != pred[node]).collect()
    }

    /// Hops of the unbounced shortest path from the source to `node`,
    /// following the same predecessor tree as [`RoutingNetwork::options`].
    pub fn prefix_hops(&self, node: usize) -> usize {
        let pred = self.bfs_predecessor();
        let mut hops = 0;
        let mut current = node;
        while current != self.source {
            match pred[current] {
                Some(prev) => {
                    hops += 1;
                    current = prev;
                }
                // Not on the tree (only reachable through the destination):
                // fall back to the plain breadth-first distance.
                None => {
                    return self.hop_distance(self.source)[node].expect("network is connected")
                }
            }
        }
        hops
    }

    /// All type realizations of the uncertain nodes with their probabilities,
    /// in ascending bitmask order (bit k set = `uncertain[k]` compromised).
    pub fn realizations(&self, probs: &BTreeMap<usize, f64>) -> Result<Vec<(BTreeSet<usize>, f64)>> {
        let mut ps = Vec::new();
        for id in &self.uncertain {
            let p = probs.get(id).ok_or_else(|| {
                Error::Config(format!(
                    "no compromise probability given for node {:?}",
                    self.names[*id]
                ))
            })?;
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!(
                    "compromise probability {p} for node {:?} is outside [0, 1]",
                    self.names[*id]
                )));
            }
            ps.push(*p);
        }
        let mut out = Vec::with_capacity(1 << ps.len());
        for mask in 0u32..1 << ps.len() {
            let mut set = BTreeSet::new();
            let mut prob = 1.0;
            for (k, &p) in ps.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    set.insert(self.uncertain[k]);
                    prob *= p;
                } else {
                    prob *= 1.0 - p;
                }
            }
            out.push((set, prob));
        }
        Ok(out)
    }

    /// Per-node payoffs at one realization: realized-normal nodes share the
    /// utility equally over all nodes, realized-compromised nodes split the
    /// shortfall from the best attainable utility.
    pub fn realization_payoffs(&self, utility: f64, realized_com: &BTreeSet<usize>) -> Vec<f64> {
        let n = self.names.len() as f64;
        let k = realized_com.len().max(1) as f64;
        (0..self.names.len())
            .map(|node| {
                if realized_com.contains(&node) {
                    (self.max_utility - utility) / k
                } else {
                    utility / n
                }
            })
            .collect()
    }
}

/// Ordered forwarding preferences per node (first entry is the primary
/// choice; later entries are fallbacks after bounces).
pub type Plans = BTreeMap<usize, Vec<usize>>;

/// Outcome of one simulated delivery attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteOutcome {
    pub utility: f64,
    pub hops: usize,
    pub delivered: bool,
    /// Nodes in forwarding order, including bounced attempts.
    pub path: Vec<usize>,
}

fn walk(
    net: &RoutingNetwork,
    plans: &Plans,
    realized_com: &BTreeSet<usize>,
    start: usize,
    initial_hops: usize,
) -> Option<RouteOutcome> {
    let mut current = start;
    let mut hops = initial_hops;
    let mut path = vec![start];
    let mut bounced: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let step_limit = 4 * net.names.len() + 4;
    for _ in 0..step_limit {
        if current == net.destination {
            return Some(RouteOutcome {
                utility: net.delivery_reward - hops as f64,
                hops,
                delivered: true,
                path,
            });
        }
        let excluded = bounced.entry(current).or_default();
        let prefs = plans.get(&current)?;
        let Some(&target) = prefs.iter().find(|m| !excluded.contains(m)) else {
            // Every option bounced: the packet is dropped here.
            return Some(RouteOutcome { utility: -(hops as f64), hops, delivered: false, path });
        };
        path.push(target);
        if realized_com.contains(&target) {
            hops += 2; // wasted round trip
            excluded.insert(target);
        } else {
            hops += 1;
            current = target;
        }
    }
    Some(RouteOutcome { utility: -(hops as f64), hops, delivered: false, path })
}

/// Simulates one delivery attempt from the source under the given plans and
/// realization. Bounces cost two hops and make the sender fall back to its
/// next preference. Errors if a reached node has no plan.
pub fn simulate_route(
    net: &RoutingNetwork,
    plans: &Plans,
    realized_com: &BTreeSet<usize>,
) -> Result<RouteOutcome> {
    walk(net, plans, realized_com, net.source, 0).ok_or_else(|| {
        Error::Validation("a reached node has no forwarding plan".into())
    })
}

/// Expected utility of the given plans over the type realizations.
pub fn expected_utility(
    net: &RoutingNetwork,
    plans: &Plans,
    probs: &BTreeMap<usize, f64>,
) -> Result<f64> {
    let mut e = 0.0;
    for (realized, p) in net.realizations(probs)? {
        if p > 0.0 {
            e += p * simulate_route(net, plans, &realized)?.utility;
        }
    }
    Ok(e)
}

/// Decision statistics of one forwarding option at one node.
#[derive(Clone, Debug)]
struct OptionValue {
    expected: f64,
    worst: f64,
}

/// Evaluates node `node` choosing first `choice` (falling back to a
/// recursively-ranked remainder) with all other nodes following `solved`.
/// Returns None when the continuation reaches an unsolved node.
fn option_value(
    net: &RoutingNetwork,
    node: usize,
    choice: usize,
    rest: &[usize],
    solved: &Plans,
    realizations: &[(BTreeSet<usize>, f64)],
) -> Option<OptionValue> {
    let mut prefs = vec![choice];
    if !rest.is_empty() {
        prefs.extend(rank_options(net, node, rest, solved, realizations)?);
    }
    let mut plans = solved.clone();
    plans.insert(node, prefs);
    let start_hops = net.prefix_hops(node);
    let mut expected = 0.0;
    let mut worst = f64::INFINITY;
    for (realized, p) in realizations {
        if *p == 0.0 {
            continue;
        }
        let outcome = walk(net, &plans, realized, node, start_hops)?;
        expected += p * outcome.utility;
        worst = worst.min(outcome.utility);
    }
    Some(OptionValue { expected, worst })
}

/// Ranks a node's forwarding options by expected utility, then worst-case
/// utility over the possible realizations, then smallest node index.
fn rank_options(
    net: &RoutingNetwork,
    node: usize,
    options: &[usize],
    solved: &Plans,
    realizations: &[(BTreeSet<usize>, f64)],
) -> Option<Vec<usize>> {
    if options.len() <= 1 {
        return Some(options.to_vec());
    }
    let mut scored = Vec::with_capacity(options.len());
    for (k, &m) in options.iter().enumerate() {
        let rest: Vec<usize> =
            options.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, o)| *o).collect();
        scored.push((m, option_value(net, node, m, &rest, solved, realizations)?));
    }
    scored.sort_by(|(ma, va), (mb, vb)| {
        let by_expected = vb
            .expected
            .partial_cmp(&va.expected)
            .expect("finite utilities");
        if va.expected - vb.expected > tolerances::ABS
            || vb.expected - va.expected > tolerances::ABS
        {
            return by_expected;
        }
        if va.worst - vb.worst > tolerances::ABS || vb.worst - va.worst > tolerances::ABS {
            return vb.worst.partial_cmp(&va.worst).expect("finite utilities");
        }
        ma.cmp(mb)
    });
    Some(scored.into_iter().map(|(m, _)| m).collect())
}

/// A solved routing policy.
#[derive(Clone, Debug)]
pub struct RoutingSolution {
    /// Ordered forwarding preferences per node (destination excluded).
    pub plans: Plans,
    /// Expected delivery utility from the source.
    pub expected_utility: f64,
    /// Order in which the nodes were solved (dynamic program only).
    pub solve_order: Vec<usize>,
}

/// Solves every node's subgame outward from the destination. Nodes at one
/// distance are retried until each one's continuations only reference solved
/// nodes (a node whose bounce fallback crosses a same-distance neighbor waits
/// for that neighbor).
pub fn dp_solve(net: &RoutingNetwork, probs: &BTreeMap<usize, f64>) -> Result<RoutingSolution> {
    let realizations = net.realizations(probs)?;
    let dis = net.hop_distance(net.destination);
    let mut by_distance: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for node in 0..net.names.len() {
        if node != net.destination {
            by_distance.entry(dis[node].expect("connected")).or_default().push(node);
        }
    }
    let mut solved: Plans = BTreeMap::new();
    let mut solve_order = Vec::new();
    for (_, nodes) in by_distance {
        let mut todo: VecDeque<usize> = nodes.into_iter().collect();
        let mut stuck = 0usize;
        while let Some(node) = todo.pop_front() {
            let options = net.options(node);
            match rank_options(net, node, &options, &solved, &realizations) {
                Some(prefs) => {
                    solved.insert(node, prefs);
                    solve_order.push(node);
                    stuck = 0;
                }
                None => {
                    // A continuation referenced an unsolved node: retry after
                    // the rest of this distance round.
                    todo.push_back(node);
                    stuck += 1;
                    if stuck > todo.len() {
                        let waiting: Vec<&str> =
                            todo.iter().map(|n| net.names[*n].as_str()).collect();
                        return Err(Error::Validation(format!(
                            "routing dynamic program cannot order nodes {{{}}}: their \
                             continuations reference each other",
                            waiting.join(", ")
                        )));
                    }
                }
            }
        }
    }
    let expected_utility = expected_utility(net, &solved, probs)?;
    Ok(RoutingSolution { plans: solved, expected_utility, solve_order })
}

/// Greedy baseline: every node prefers neighbors by ascending distance to
/// the destination (ties to the smaller index).
pub fn greedy_plans(net: &RoutingNetwork) -> Plans {
    let dis = net.hop_distance(net.destination);
    let mut plans = BTreeMap::new();
    for node in 0..net.names.len() {
        if node == net.destination {
            continue;
        }
        let mut options = net.options(node);
        options.sort_by_key(|&m| (dis[m].expect("connected"), m));
        plans.insert(node, options);
    }
    plans
}

/// Expected utility of the greedy baseline.
pub fn greedy_expected(net: &RoutingNetwork, probs: &BTreeMap<usize, f64>) -> Result<f64> {
    expected_utility(net, &greedy_plans(net), probs)
}

/// The route the plans take when every uncertain node turns out normal.
pub fn all_normal_path(net: &RoutingNetwork, plans: &Plans) -> Result<Vec<usize>> {
    Ok(simulate_route(net, plans, &BTreeSet::new())?.path)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &head) in items.iter().enumerate() {
        let rest: Vec<usize> =
            items.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, o)| *o).collect();
        for mut tail in permutations(&rest) {
            let mut perm = vec![head];
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}

/// Solves the joint game over all nodes' rankings at once: enumerates every
/// combination, keeps the Nash equilibria (no node can raise its own expected
/// payoff by re-ranking), and selects by expected utility, then worst-case
/// utility, then lexicographically smallest rankings. Used to validate
/// [`dp_solve`].
pub fn full_game_solve(
    net: &RoutingNetwork,
    probs: &BTreeMap<usize, f64>,
) -> Result<RoutingSolution> {
    let realizations = net.realizations(probs)?;
    let movers: Vec<usize> =
        (0..net.names.len()).filter(|&n| n != net.destination).collect();
    let strategy_sets: Vec<Vec<Vec<usize>>> =
        movers.iter().map(|&n| permutations(&net.options(n))).collect();
    let total: f64 = strategy_sets.iter().map(|s| s.len() as f64).product();
    if total > crate::solver::PROFILE_CAP as f64 {
        return Err(Error::SolverCap { profiles: total, cap: crate::solver::PROFILE_CAP });
    }

    let assemble = |choice: &[usize]| -> Plans {
        movers
            .iter()
            .zip(choice)
            .map(|(&n, &k)| (n, strategy_sets[movers.iter().position(|&m| m == n).unwrap()][k].clone()))
            .collect()
    };
    let outcomes = |plans: &Plans| -> Result<Vec<(f64, Vec<f64>, f64)>> {
        // (probability, per-node payoffs, utility) per possible realization.
        let mut rows = Vec::new();
        for (realized, p) in &realizations {
            if *p == 0.0 {
                continue;
            }
            let out = simulate_route(net, plans, realized)?;
            rows.push((*p, net.realization_payoffs(out.utility, realized), out.utility));
        }
        Ok(rows)
    };

    let mut counters = vec![0usize; movers.len()];
    let mut profiles: Vec<Vec<usize>> = Vec::new();
    loop {
        profiles.push(counters.clone());
        let mut k = movers.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < strategy_sets[k].len() {
                break;
            }
            counters[k] = 0;
            if k == 0 {
                break;
            }
        }
        if counters.iter().all(|&c| c == 0) {
            break;
        }
    }

    let mut equilibria: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    'profiles: for choice in &profiles {
        let plans = assemble(choice);
        let rows = outcomes(&plans)?;
        let own = |rows: &[(f64, Vec<f64>, f64)], node: usize| -> f64 {
            rows.iter().map(|(p, payoffs, _)| p * payoffs[node]).sum()
        };
        for (slot, &node) in movers.iter().enumerate() {
            let incumbent = own(&rows, node);
            for alt in 0..strategy_sets[slot].len() {
                if alt == choice[slot] {
                    continue;
                }
                let mut deviated = choice.clone();
                deviated[slot] = alt;
                let value = own(&outcomes(&assemble(&deviated))?, node);
                if value > incumbent + tolerances::ABS {
                    continue 'profiles;
                }
            }
        }
        let expected: f64 = rows.iter().map(|(p, _, u)| p * u).sum();
        let worst = rows.iter().map(|(_, _, u)| *u).fold(f64::INFINITY, f64::min);
        equilibria.push((choice.clone(), expected, worst));
    }
    let best = equilibria
        .into_iter()
        .reduce(|a, b| {
            if b.1 > a.1 + tolerances::ABS {
                b
            } else if a.1 > b.1 + tolerances::ABS {
                a
            } else if b.2 > a.2 + tolerances::ABS {
                b
            } else if a.2 > b.2 + tolerances::ABS {
                a
            } else if b.0 < a.0 {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| {
            Error::Validation("the routing game has no pure equilibrium".into())
        })?;
    let plans = assemble(&best.0);
    Ok(RoutingSolution { plans, expected_utility: best.1, solve_order: Vec::new() })
}

/// Builds one node's subgame as an explicit game tree: chance resolves each
/// uncertain node in ascending order, the mover decides at a single pooled
/// information set, and each leaf carries the per-node payoffs of the
/// simulated route. Other nodes follow `solved`.
pub fn build_subgame(
    net: &RoutingNetwork,
    node: usize,
    solved: &Plans,
    probs: &BTreeMap<usize, f64>,
) -> Result<Game> {
    let options = net.options(node);
    if options.is_empty() {
        return Err(Error::Validation(format!(
            "node {:?} has no forwarding options",
            net.names[node]
        )));
    }
    // Validates the probability map before any tree work.
    net.realizations(probs)?;
    let players: Vec<ComponentId> =
        (1..=net.names.len() as u32).map(ComponentId).collect();
    let mut builder = TreeBuilder::new(players, net.names.clone());

    // One leaf per (realization, option); chance layers in uncertain order.
    fn grow(
        builder: &mut TreeBuilder,
        net: &RoutingNetwork,
        node: usize,
        options: &[usize],
        solved: &Plans,
        probs: &BTreeMap<usize, f64>,
        layer: usize,
        realized: &mut BTreeSet<usize>,
    ) -> Result<usize> {
        let id = builder.reserve();
        if layer < net.uncertain.len() {
            let uncertain = net.uncertain[layer];
            let p = probs[&uncertain];
            let mut branches = Vec::with_capacity(2);
            for (label, com, prob) in [("com", true, p), ("coo", false, 1.0 - p)] {
                if com {
                    realized.insert(uncertain);
                }
                let child =
                    grow(builder, net, node, options, solved, probs, layer + 1, realized)?;
                realized.remove(&uncertain);
                branches.push(Branch {
                    label: label.to_string(),
                    observed: label.to_string(),
                    effect: 0,
                    prob: Some(prob),
                    child,
                });
            }
            builder.set_chance(id, ComponentId(uncertain as u32 + 1), branches);
        } else {
            let mut branches = Vec::with_capacity(options.len());
            for (k, &m) in options.iter().enumerate() {
                let leaf = builder.reserve();
                let mut prefs = vec![m];
                prefs.extend(options.iter().copied().filter(|&o| o != m));
                let mut plans = solved.clone();
                plans.insert(node, prefs);
                let outcome = walk(net, &plans, realized, node, net.prefix_hops(node))
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "subgame of {:?} reaches a node with no solved plan",
                            net.names[node]
                        ))
                    })?;
                let payoffs = net.realization_payoffs(outcome.utility, realized);
                builder.set_terminal(
                    leaf,
                    payoffs,
                    outcome.utility,
                    realized.iter().map(|&r| ComponentId(r as u32 + 1)).collect(),
                );
                branches.push(Branch {
                    label: net.names[m].clone(),
                    observed: net.names[m].clone(),
                    effect: k,
                    prob: None,
                    child: leaf,
                });
            }
            builder.set_decision(
                id,
                InfoKey {
                    player: ComponentId(node as u32 + 1),
                    ptype: PlayerType::Normal,
                    observed: Vec::new(),
                },
                branches,
            )?;
        }
        Ok(id)
    }

    let mut realized = BTreeSet::new();
    grow(&mut builder, net, node, &options, solved, probs, 0, &mut realized)?;
    let abnormal: BTreeSet<ComponentId> =
        net.uncertain.iter().map(|&u| ComponentId(u as u32 + 1)).collect();
    let chance_probs: BTreeMap<ComponentId, f64> = net
        .uncertain
        .iter()
        .map(|&u| (ComponentId(u as u32 + 1), probs[&u]))
        .collect();
    Ok(builder.finish(
        format!("route-{}", net.names[node]),
        abnormal,
        chance_probs,
    ))
}
