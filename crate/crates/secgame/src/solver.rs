//! Pure-strategy Bayesian-Nash equilibria of compiled games.
//!
//! A pure profile fixes one action per information set. The solver
//! exhaustively enumerates profiles (up to a cap), keeps those where no
//! player can gain more than the tolerance by unilaterally re-planning all of
//! its information sets (the ex-ante check), and selects one equilibrium as
//! the defensive policy: highest expected system utility, ties broken by the
//! utility under a small uniform tremble (which pins actions at off-path
//! sets to safe reactions), remaining ties lexicographically. Games too large
//! to enumerate fall back to exact backward induction when the information
//! structure allows it.

use rayon::prelude::*;

use std::collections::BTreeMap;

use crate::game::{Game, NodeKind};
use crate::tolerances;
use crate::{Error, Result};

/// Maximum number of pure profiles the enumerating solver will visit.
pub const PROFILE_CAP: u64 = 10_000_000;

/// One action index per information set, in [`Game::infosets`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureProfile(pub Vec<usize>);

impl PureProfile {
    pub fn action(&self, infoset: usize) -> usize {
        self.0[infoset]
    }
}

/// Expected payoffs and expected system utility of a profile.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub payoffs: Vec<f64>,
    pub system_utility: f64,
}

/// Walks the reached part of the tree under `profile`.
pub fn evaluate(game: &Game, profile: &PureProfile) -> Evaluation {
    debug_assert_eq!(profile.0.len(), game.infosets.len());
    let mut payoffs = vec![0.0; game.players.len()];
    let mut system_utility = 0.0;
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((id, w)) = stack.pop() {
        let node = &game.nodes[id];
        match node.kind {
            NodeKind::Terminal => {
                for (acc, p) in payoffs.iter_mut().zip(&node.payoffs) {
                    *acc += w * p;
                }
                system_utility += w * node.system_utility;
            }
            NodeKind::Chance => {
                for b in &node.branches {
                    let wp = w * b.prob.expect("chance branch");
                    if wp != 0.0 {
                        stack.push((b.child, wp));
                    }
                }
            }
            NodeKind::Decision => {
                stack.push((node.branches[profile.0[node.infoset]].child, w));
            }
        }
    }
    Evaluation { payoffs, system_utility }
}

fn evaluate_player(game: &Game, profile: &PureProfile, player: usize) -> f64 {
    let mut value = 0.0;
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((id, w)) = stack.pop() {
        let node = &game.nodes[id];
        match node.kind {
            NodeKind::Terminal => value += w * node.payoffs[player],
            NodeKind::Chance => {
                for b in &node.branches {
                    let wp = w * b.prob.expect("chance branch");
                    if wp != 0.0 {
                        stack.push((b.child, wp));
                    }
                }
            }
            NodeKind::Decision => {
                stack.push((node.branches[profile.0[node.infoset]].child, w));
            }
        }
    }
    value
}

/// Expected system utility when every decision mixes its chosen action with
/// the uniform distribution at weight `eps`, and every chance distribution is
/// likewise mixed. Used as the equilibrium-selection tie-break.
pub fn tremble_system_utility(game: &Game, profile: &PureProfile, eps: f64) -> f64 {
    let mut value = 0.0;
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((id, w)) = stack.pop() {
        let node = &game.nodes[id];
        match node.kind {
            NodeKind::Terminal => value += w * node.system_utility,
            NodeKind::Chance => {
                let m = node.branches.len() as f64;
                for b in &node.branches {
                    let p = (1.0 - eps) * b.prob.expect("chance branch") + eps / m;
                    stack.push((b.child, w * p));
                }
            }
            NodeKind::Decision => {
                let chosen = profile.0[node.infoset];
                let m = node.branches.len() as f64;
                for (k, b) in node.branches.iter().enumerate() {
                    let p = if k == chosen { 1.0 - eps + eps / m } else { eps / m };
                    stack.push((b.child, w * p));
                }
            }
        }
    }
    value
}

struct DeviationCtx<'g> {
    game: &'g Game,
    dims: Vec<usize>,
    /// Information sets of each player (by player index).
    player_sets: Vec<Vec<usize>>,
}

impl<'g> DeviationCtx<'g> {
    fn new(game: &'g Game) -> Self {
        DeviationCtx {
            game,
            dims: game.infosets.iter().map(|s| s.actions.len()).collect(),
            player_sets: game.players.iter().map(|p| game.infosets_of(*p)).collect(),
        }
    }

    /// Ex-ante equilibrium check: may any player re-plan all of its sets at
    /// once for a gain over the tolerance?
    fn is_equilibrium(&self, profile: &PureProfile) -> bool {
        for (player, sets) in self.player_sets.iter().enumerate() {
            if sets.iter().all(|&s| self.dims[s] == 1) {
                continue;
            }
            let base = evaluate_player(self.game, profile, player);
            let total: u64 = sets.iter().map(|&s| self.dims[s] as u64).product();
            let mut alt = profile.clone();
            for k in 0..total {
                let mut rem = k;
                for &s in sets {
                    alt.0[s] = (rem % self.dims[s] as u64) as usize;
                    rem /= self.dims[s] as u64;
                }
                if evaluate_player(self.game, &alt, player) > base + tolerances::ABS {
                    return false;
                }
            }
        }
        true
    }
}

/// Whether `profile` is an ex-ante pure Bayesian-Nash equilibrium.
pub fn is_equilibrium(game: &Game, profile: &PureProfile) -> bool {
    DeviationCtx::new(game).is_equilibrium(profile)
}

/// An equilibrium with its evaluation.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub profile: PureProfile,
    pub payoffs: Vec<f64>,
    pub system_utility: f64,
}

/// All pure equilibria of a game, in profile-encoding order.
#[derive(Clone, Debug, Default)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
}

fn decode(dims: &[usize], mut k: u64) -> PureProfile {
    let mut actions = vec![0usize; dims.len()];
    for (slot, &d) in actions.iter_mut().zip(dims).rev() {
        *slot = (k % d as u64) as usize;
        k /= d as u64;
    }
    PureProfile(actions)
}

/// Exhaustively enumerates all pure profiles and returns the equilibria.
/// Errors with the profile count when the space exceeds [`PROFILE_CAP`].
pub fn enumerate_pure_equilibria(game: &Game) -> Result<EquilibriumSet> {
    let space = game.profile_space();
    if space > PROFILE_CAP as f64 {
        return Err(Error::SolverCap { profiles: space, cap: PROFILE_CAP });
    }
    let total = space as u64;
    let ctx = DeviationCtx::new(game);
    let mut found: Vec<(u64, Equilibrium)> = (0..total)
        .into_par_iter()
        .filter_map(|k| {
            let profile = decode(&ctx.dims, k);
            if !ctx.is_equilibrium(&profile) {
                return None;
            }
            let ev = evaluate(game, &profile);
            Some((
                k,
                Equilibrium {
                    profile,
                    payoffs: ev.payoffs,
                    system_utility: ev.system_utility,
                },
            ))
        })
        .collect();
    found.sort_by_key(|(k, _)| *k);
    Ok(EquilibriumSet { equilibria: found.into_iter().map(|(_, e)| e).collect() })
}

/// Information sets ordered by (component id, registration index); the
/// lexicographic tie-break compares action indices in this order.
fn lex_order(game: &Game) -> Vec<usize> {
    let mut order: Vec<usize> = (0..game.infosets.len()).collect();
    order.sort_by_key(|&s| (game.infosets[s].player, s));
    order
}

/// Selects the defensive policy among equilibria: maximum expected system
/// utility, then maximum trembled system utility, then lexicographically
/// smallest action encoding.
pub fn select_equilibrium<'a>(game: &Game, set: &'a EquilibriumSet) -> Option<&'a Equilibrium> {
    let order = lex_order(game);
    let lex_key =
        |eq: &Equilibrium| -> Vec<usize> { order.iter().map(|&s| eq.profile.0[s]).collect() };
    let mut best: Option<(&Equilibrium, f64)> = None;
    for eq in &set.equilibria {
        best = Some(match best {
            None => (eq, tremble_system_utility(game, &eq.profile, tolerances::TREMBLE)),
            Some((incumbent, inc_tremble)) => {
                if eq.system_utility > incumbent.system_utility + tolerances::ABS {
                    (eq, tremble_system_utility(game, &eq.profile, tolerances::TREMBLE))
                } else if eq.system_utility < incumbent.system_utility - tolerances::ABS {
                    (incumbent, inc_tremble)
                } else {
                    let tremble =
                        tremble_system_utility(game, &eq.profile, tolerances::TREMBLE);
                    if tremble > inc_tremble + tolerances::ABS
                        || (tremble >= inc_tremble - tolerances::ABS
                            && lex_key(eq) < lex_key(incumbent))
                    {
                        (eq, tremble)
                    } else {
                        (incumbent, inc_tremble)
                    }
                }
            }
        });
    }
    best.map(|(eq, _)| eq)
}

/// Exact backward induction over information sets. Valid only when
/// [`Game::backward_induction_exact`] holds (each set is a singleton or pools
/// payoff-equivalent nodes); the result is then a subgame-perfect, hence
/// Bayesian-Nash, equilibrium. Ties pick the first action index.
pub fn solve_backward_induction(game: &Game) -> Result<Equilibrium> {
    if !game.backward_induction_exact() {
        return Err(Error::Validation(format!(
            "backward induction is not exact for game {:?}: an information set pools nodes \
             with different payoff consequences; use equilibrium enumeration",
            game.title
        )));
    }
    let n_players = game.players.len();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); game.nodes.len()];
    let mut utilities = vec![0.0f64; game.nodes.len()];
    let mut assignment: BTreeMap<usize, usize> = BTreeMap::new();
    for id in (0..game.nodes.len()).rev() {
        let node = &game.nodes[id];
        match node.kind {
            NodeKind::Terminal => {
                values[id] = node.payoffs.clone();
                utilities[id] = node.system_utility;
            }
            NodeKind::Chance => {
                let mut v = vec![0.0; n_players];
                let mut u = 0.0;
                for b in &node.branches {
                    let p = b.prob.expect("chance branch");
                    for (acc, cv) in v.iter_mut().zip(&values[b.child]) {
                        *acc += p * cv;
                    }
                    u += p * utilities[b.child];
                }
                values[id] = v;
                utilities[id] = u;
            }
            NodeKind::Decision => {
                let owner = game.player_index(node.player).expect("mover is a player");
                let chosen = *assignment.entry(node.infoset).or_insert_with(|| {
                    let mut best = 0usize;
                    let mut best_value = values[node.branches[0].child][owner];
                    for (k, b) in node.branches.iter().enumerate().skip(1) {
                        let v = values[b.child][owner];
                        if v > best_value + tolerances::ABS {
                            best = k;
                            best_value = v;
                        }
                    }
                    best
                });
                let child = node.branches[chosen].child;
                values[id] = values[child].clone();
                utilities[id] = utilities[child];
            }
        }
    }
    let profile = PureProfile((0..game.infosets.len()).map(|s| assignment[&s]).collect());
    Ok(Equilibrium {
        profile,
        payoffs: values[0].clone(),
        system_utility: utilities[0],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Enumeration,
    BackwardInduction,
}

/// A solved game: the selected equilibrium, how it was found, and (for
/// enumerated games) how many pure equilibria exist.
#[derive(Clone, Debug)]
pub struct Solution {
    pub equilibrium: Equilibrium,
    pub method: SolveMethod,
    pub equilibrium_count: Option<usize>,
}

/// Solves a game: enumeration plus selection when the profile space fits the
/// cap, exact backward induction when it does not but the information
/// structure allows, an error otherwise.
pub fn solve(game: &Game) -> Result<Solution> {
    if game.profile_space() <= PROFILE_CAP as f64 {
        let set = enumerate_pure_equilibria(game)?;
        let count = set.equilibria.len();
        let equilibrium = select_equilibrium(game, &set).cloned().ok_or_else(|| {
            Error::Validation(format!(
                "game {:?} has no pure-strategy Bayesian-Nash equilibrium",
                game.title
            ))
        })?;
        Ok(Solution { equilibrium, method: SolveMethod::Enumeration, equilibrium_count: Some(count) })
    } else if game.backward_induction_exact() {
        Ok(Solution {
            equilibrium: solve_backward_induction(game)?,
            method: SolveMethod::BackwardInduction,
            equilibrium_count: None,
        })
    } else {
        Err(Error::SolverCap { profiles: game.profile_space(), cap: PROFILE_CAP })
    }
}
