//! Compiling attacked systems into extensive-form Bayesian games.
//!
//! Compilation runs five steps: refine the architecture, derive the order of
//! play from the influence edges, precompute Shapley payoff shares, grow the
//! game tree (a chance node resolves each abnormal component's type directly
//! before it moves), and hand the result to a solver. Players observe the
//! *observed* labels of all earlier personal actions but never another
//! component's type, which is what makes the game Bayesian: information sets
//! pool nodes whose visible history coincides.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::payoff::{AttackerPayoff, PayoffTable};
use crate::system::{
    refine_architecture, topological_ids, AttackedSystem, ComponentId, NATURE,
};
use crate::{Error, Result};

/// One step of the order of play.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlayEntry {
    /// Nature resolves the type of the named abnormal component.
    Nature(ComponentId),
    /// The named component takes its action.
    Move(ComponentId),
}

/// Derives the order of play: components in topological order of the
/// influence edges (ties by ascending id), with a nature move for each
/// abnormal component directly before its own move.
pub fn order_of_play(attacked: &AttackedSystem) -> Result<Vec<PlayEntry>> {
    let ids = topological_ids(&attacked.system)?;
    let mut order = Vec::with_capacity(ids.len() + attacked.abnormal.len());
    for id in ids {
        if attacked.abnormal.contains(&id) {
            order.push(PlayEntry::Nature(id));
        }
        order.push(PlayEntry::Move(id));
    }
    Ok(order)
}

/// A component's knowledge when it moves: who it is, its own resolved type,
/// and the observed labels of every personal action taken so far.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InfoKey {
    pub player: ComponentId,
    pub ptype: PlayerType,
    pub observed: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerType {
    Normal,
    Com,
    Coo,
}

/// An information set: the nodes a player cannot tell apart.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoSet {
    pub player: ComponentId,
    pub key: InfoKey,
    pub nodes: Vec<usize>,
    /// Action labels available at every member node.
    pub actions: Vec<String>,
}

/// One outgoing branch of a chance or decision node.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// Display label (the action name written to .efg files).
    pub label: String,
    /// Label later players see in their information-set keys.
    pub observed: String,
    /// Index of the base action whose consequences this branch has.
    pub effect: usize,
    /// Branch probability; `Some` on chance nodes only.
    pub prob: Option<f64>,
    pub child: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Chance,
    Decision,
    Terminal,
}

/// A node of the compiled game tree. Ids are assigned in pre-order.
#[derive(Clone, Debug, PartialEq)]
pub struct GameNode {
    pub id: usize,
    pub kind: NodeKind,
    /// Mover: [`NATURE`] on chance nodes, unused on terminals.
    pub player: ComponentId,
    pub branches: Vec<Branch>,
    /// Index into [`Game::infosets`]; meaningful on decision nodes only.
    pub infoset: usize,
    /// Per-player payoffs (player order); terminals only.
    pub payoffs: Vec<f64>,
    /// Realized system utility; terminals only.
    pub system_utility: f64,
    /// Abnormal components whose compromised type realized on this path;
    /// terminals only.
    pub realized_com: BTreeSet<ComponentId>,
}

/// A compiled extensive-form Bayesian game.
#[derive(Clone, Debug)]
pub struct Game {
    pub title: String,
    /// Refined components in ascending id order; payoff vectors follow it.
    pub players: Vec<ComponentId>,
    pub player_names: Vec<String>,
    /// Pre-order; `nodes[0]` is the root.
    pub nodes: Vec<GameNode>,
    /// Registration order (a set appears once its first member node is
    /// complete, children before parents).
    pub infosets: Vec<InfoSet>,
    pub abnormal: BTreeSet<ComponentId>,
    /// Compromise probability per abnormal component.
    pub chance_probs: BTreeMap<ComponentId, f64>,
}

impl Game {
    pub fn root(&self) -> &GameNode {
        &self.nodes[0]
    }

    pub fn player_index(&self, id: ComponentId) -> Option<usize> {
        self.players.iter().position(|p| *p == id)
    }

    /// Information-set ids of one player, in first-encounter order.
    pub fn infosets_of(&self, player: ComponentId) -> Vec<usize> {
        (0..self.infosets.len()).filter(|&s| self.infosets[s].player == player).collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &GameNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Terminal)
    }

    pub fn decision_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Decision).count()
    }

    /// Number of pure strategy profiles (product of action counts over all
    /// information sets), as f64 to survive astronomically large games.
    pub fn profile_space(&self) -> f64 {
        self.infosets.iter().map(|s| s.actions.len() as f64).product()
    }

    /// Whether backward induction over information sets is exact for this
    /// game: every information set is either a singleton or pools nodes whose
    /// subtrees are structurally identical and give the owner identical
    /// payoffs. In that case the owner's choice is well-defined at the set and
    /// optimal at every member node.
    pub fn backward_induction_exact(&self) -> bool {
        self.infosets.iter().all(|set| {
            set.nodes.len() <= 1 || {
                let owner = self.player_index(set.player).expect("owner is a player");
                let first = self.subtree_signature(set.nodes[0], owner);
                set.nodes[1..].iter().all(|&n| self.subtree_signature(n, owner) == first)
            }
        })
    }

    fn subtree_signature(&self, node: usize, owner: usize) -> Vec<(usize, String)> {
        // Flattened pre-order encoding of the subtree: branch labels, chance
        // probabilities, and the owner's terminal payoffs.
        let mut sig = Vec::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            match n.kind {
                NodeKind::Terminal => {
                    sig.push((id - node, format!("t:{:.12e}", n.payoffs[owner])));
                }
                _ => {
                    for b in &n.branches {
                        sig.push((
                            id - node,
                            match b.prob {
                                Some(p) => format!("c:{}:{:.12e}", b.label, p),
                                None => format!("d:{}:{}", self.nodes[id].player, b.label),
                            },
                        ));
                        stack.push(b.child);
                    }
                }
            }
        }
        sig
    }
}

/// Incremental tree construction with pre-order ids and automatic
/// information-set registration. Also used by the routing subgame builder.
pub struct TreeBuilder {
    players: Vec<ComponentId>,
    player_names: Vec<String>,
    nodes: Vec<GameNode>,
    infosets: Vec<InfoSet>,
    key_index: BTreeMap<InfoKey, usize>,
}

impl TreeBuilder {
    pub fn new(players: Vec<ComponentId>, player_names: Vec<String>) -> Self {
        TreeBuilder { players, player_names, nodes: Vec::new(), infosets: Vec::new(), key_index: BTreeMap::new() }
    }

    pub fn node(&self, id: usize) -> &GameNode {
        &self.nodes[id]
    }

    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    /// Allocates the next pre-order node id. The node must be filled with one
    /// of the `set_*` methods after its children are built.
    pub fn reserve(&mut self) -> usize {
        let id = self.nodes.len();
        self.nodes.push(GameNode {
            id,
            kind: NodeKind::Terminal,
            player: NATURE,
            branches: Vec::new(),
            infoset: usize::MAX,
            payoffs: Vec::new(),
            system_utility: 0.0,
            realized_com: BTreeSet::new(),
        });
        id
    }

    pub fn set_chance(&mut self, id: usize, owner: ComponentId, branches: Vec<Branch>) {
        debug_assert!(branches.iter().all(|b| b.prob.is_some()));
        let n = &mut self.nodes[id];
        n.kind = NodeKind::Chance;
        n.player = owner;
        n.branches = branches;
    }

    pub fn set_decision(&mut self, id: usize, key: InfoKey, branches: Vec<Branch>) -> Result<()> {
        let labels: Vec<String> = branches.iter().map(|b| b.label.clone()).collect();
        let player = key.player;
        let set = match self.key_index.get(&key) {
            Some(&set) => {
                if self.infosets[set].actions != labels {
                    return Err(Error::Validation(format!(
                        "information set of component {player} has inconsistent action lists \
                         ({:?} vs {labels:?})",
                        self.infosets[set].actions
                    )));
                }
                self.infosets[set].nodes.push(id);
                set
            }
            None => {
                let set = self.infosets.len();
                self.infosets.push(InfoSet { player, key: key.clone(), nodes: vec![id], actions: labels });
                self.key_index.insert(key, set);
                set
            }
        };
        let n = &mut self.nodes[id];
        n.kind = NodeKind::Decision;
        n.player = player;
        n.branches = branches;
        n.infoset = set;
        Ok(())
    }

    pub fn set_terminal(
        &mut self,
        id: usize,
        payoffs: Vec<f64>,
        system_utility: f64,
        realized_com: BTreeSet<ComponentId>,
    ) {
        debug_assert_eq!(payoffs.len(), self.players.len());
        let n = &mut self.nodes[id];
        n.kind = NodeKind::Terminal;
        n.payoffs = payoffs;
        n.system_utility = system_utility;
        n.realized_com = realized_com;
    }

    pub fn finish(
        self,
        title: String,
        abnormal: BTreeSet<ComponentId>,
        chance_probs: BTreeMap<ComponentId, f64>,
    ) -> Game {
        Game {
            title,
            players: self.players,
            player_names: self.player_names,
            nodes: self.nodes,
            infosets: self.infosets,
            abnormal,
            chance_probs,
        }
    }
}

struct PathStep {
    player: ComponentId,
    observed: String,
    effect: usize,
}

struct BuildCtx<'a> {
    attacked: &'a AttackedSystem,
    order: &'a [PlayEntry],
    table: &'a PayoffTable,
    probs: &'a BTreeMap<ComponentId, f64>,
    builder: TreeBuilder,
}

impl BuildCtx<'_> {
    fn grow(
        &mut self,
        depth: usize,
        path: &mut Vec<PathStep>,
        types: &mut BTreeMap<ComponentId, PlayerType>,
    ) -> Result<usize> {
        let id = self.builder.reserve();
        match self.order.get(depth) {
            None => {
                let mut effects = vec![0usize; self.attacked.system.components.len()];
                for step in path.iter() {
                    effects[self.attacked.system.index_of(step.player)?] = step.effect;
                }
                let u0 = self.table.system_utility(&effects);
                let realized_com: BTreeSet<ComponentId> = types
                    .iter()
                    .filter(|(_, t)| **t == PlayerType::Com)
                    .map(|(id, _)| *id)
                    .collect();
                let payoffs = self.table.payoffs(u0, &realized_com);
                self.builder.set_terminal(id, payoffs, u0, realized_com);
            }
            Some(&PlayEntry::Nature(comp)) => {
                let p = *self.probs.get(&comp).ok_or_else(|| {
                    Error::Config(format!("no compromise probability given for component {comp}"))
                })?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!(
                        "compromise probability {p} for component {comp} is outside [0, 1]"
                    )));
                }
                let mut branches = Vec::with_capacity(2);
                for (label, ptype, prob) in
                    [("com", PlayerType::Com, p), ("coo", PlayerType::Coo, 1.0 - p)]
                {
                    types.insert(comp, ptype);
                    let child = self.grow(depth + 1, path, types)?;
                    types.remove(&comp);
                    branches.push(Branch {
                        label: label.to_string(),
                        observed: label.to_string(),
                        effect: 0,
                        prob: Some(prob),
                        child,
                    });
                }
                self.builder.set_chance(id, comp, branches);
            }
            Some(&PlayEntry::Move(comp)) => {
                let component = self.attacked.system.component(comp)?;
                let ptype = *types.get(&comp).unwrap_or(&PlayerType::Normal);
                // (label, observed, effect index) per available action.
                let moves: Vec<(String, String, usize)> = if ptype == PlayerType::Com {
                    self.attacked.attack_actions[&comp]
                        .iter()
                        .map(|a| {
                            let effect = component.action_index(&a.effect).ok_or_else(|| {
                                Error::Validation(format!(
                                    "replacement action {:?} on component {comp}: effect {:?} is \
                                     not one of its base actions",
                                    a.label, a.effect
                                ))
                            })?;
                            Ok((a.label.clone(), a.observed.clone(), effect))
                        })
                        .collect::<Result<_>>()?
                } else {
                    component
                        .actions
                        .iter()
                        .enumerate()
                        .map(|(k, a)| (a.clone(), a.clone(), k))
                        .collect()
                };
                let key = InfoKey {
                    player: comp,
                    ptype,
                    observed: path.iter().map(|s| s.observed.clone()).collect(),
                };
                let mut branches = Vec::with_capacity(moves.len());
                for (label, observed, effect) in moves {
                    path.push(PathStep { player: comp, observed: observed.clone(), effect });
                    let child = self.grow(depth + 1, path, types)?;
                    path.pop();
                    branches.push(Branch { label, observed, effect, prob: None, child });
                }
                self.builder.set_decision(id, key, branches)?;
            }
        }
        Ok(id)
    }
}

/// Grows the game tree for an already-refined attacked system.
pub fn build_tree(
    attacked: &AttackedSystem,
    order: &[PlayEntry],
    table: &PayoffTable,
    probs: &BTreeMap<ComponentId, f64>,
    title: &str,
) -> Result<Game> {
    let players = attacked.system.ids();
    let names = attacked.system.components.iter().map(|c| c.name.clone()).collect();
    let mut ctx = BuildCtx {
        attacked,
        order,
        table,
        probs,
        builder: TreeBuilder::new(players, names),
    };
    let root = ctx.grow(0, &mut Vec::new(), &mut BTreeMap::new())?;
    debug_assert_eq!(root, 0);
    Ok(ctx.builder.finish(
        title.to_string(),
        attacked.abnormal.clone(),
        probs
            .iter()
            .filter(|(id, _)| attacked.abnormal.contains(id))
            .map(|(id, p)| (*id, *p))
            .collect(),
    ))
}

/// Compiles an attacked system into its Bayesian game: refine, order,
/// allocate payoffs, grow the tree.
pub fn compile<U>(
    attacked: &AttackedSystem,
    utility: &U,
    probs: &BTreeMap<ComponentId, f64>,
    attacker: AttackerPayoff,
    title: &str,
) -> Result<Game>
where
    U: Fn(&[usize]) -> f64 + Sync + ?Sized,
{
    let refined = refine_architecture(&attacked.system, &attacked.abnormal)?;
    // Re-key attack actions and probabilities onto surviving representatives.
    let mut attack_actions = BTreeMap::new();
    for (id, list) in &attacked.attack_actions {
        let rep = refined.representative.get(id).copied().ok_or_else(|| {
            Error::Validation(format!(
                "abnormal component {id} was removed by refinement with no representative"
            ))
        })?;
        attack_actions.insert(rep, list.clone());
    }
    let mut rep_probs = BTreeMap::new();
    for (id, p) in probs {
        let rep = refined.representative.get(id).copied().unwrap_or(*id);
        rep_probs.insert(rep, *p);
    }
    let refined_attacked = AttackedSystem {
        system: refined.system,
        abnormal: refined.abnormal,
        attack_actions,
    };
    let order = order_of_play(&refined_attacked)?;
    let table = PayoffTable::build(
        &refined_attacked.system,
        &refined_attacked.abnormal,
        utility,
        attacker,
    )?;
    build_tree(&refined_attacked, &order, &table, &rep_probs, title)
}

/// Depth-first traversal visiting the highest-id child first, root first.
/// Returns the node ids in visit order.
pub fn dlr_traverse(game: &Game) -> Vec<usize> {
    let mut order = Vec::with_capacity(game.nodes.len());
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        order.push(id);
        // Children are pushed in ascending id order so the highest-id child
        // is popped (visited) first.
        let mut children: Vec<usize> = game.nodes[id].branches.iter().map(|b| b.child).collect();
        children.sort_unstable();
        stack.extend(children);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::tests::{tank_system, tank_utility};
    use crate::system::{apply_attack, load_spec, AttackedSystem};

    fn tank_attacked(attack: &str) -> AttackedSystem {
        let spec = load_spec(crate::system::tests::tank_config()).unwrap();
        let model = spec.attack(attack).unwrap();
        apply_attack(&spec.system, model, &model.capability).unwrap()
    }

    fn tank_game(attack: &str, p: f64) -> Game {
        let attacked = tank_attacked(attack);
        let probs: BTreeMap<ComponentId, f64> =
            attacked.abnormal.iter().map(|id| (*id, p)).collect();
        compile(&attacked, &tank_utility, &probs, AttackerPayoff::ZeroSum, "tank").unwrap()
    }

    #[test]
    fn order_of_play_inserts_nature_before_abnormal_movers() {
        let order = order_of_play(&tank_attacked("A1")).unwrap();
        assert_eq!(
            order,
            vec![
                PlayEntry::Move(ComponentId(3)),
                PlayEntry::Move(ComponentId(1)),
                PlayEntry::Nature(ComponentId(2)),
                PlayEntry::Move(ComponentId(2)),
            ]
        );
        let order = order_of_play(&tank_attacked("A2")).unwrap();
        assert_eq!(order[0], PlayEntry::Nature(ComponentId(3)));
        assert_eq!(order[1], PlayEntry::Move(ComponentId(3)));
    }

    #[test]
    fn first_attack_tree_shape() {
        let game = tank_game("A1", 0.8);
        assert_eq!(game.nodes.len(), 27);
        assert_eq!(game.leaves().count(), 12);
        // Indicator: 1 set; valve: 2 (one per signal); pump: 8 singletons
        // (type x indicator x valve).
        assert_eq!(game.infosets_of(ComponentId(3)).len(), 1);
        assert_eq!(game.infosets_of(ComponentId(1)).len(), 2);
        let pump_sets = game.infosets_of(ComponentId(2));
        assert_eq!(pump_sets.len(), 8);
        assert!(pump_sets.iter().all(|&s| game.infosets[s].nodes.len() == 1));
        assert!(game.backward_induction_exact());
    }

    #[test]
    fn node_ids_are_preorder_and_contiguous() {
        let game = tank_game("A1", 0.8);
        for (k, n) in game.nodes.iter().enumerate() {
            assert_eq!(n.id, k);
            for b in &n.branches {
                assert!(b.child > n.id, "child {} of node {}", b.child, n.id);
            }
        }
    }

    #[test]
    fn chance_branches_are_com_then_coo() {
        let game = tank_game("A1", 0.8);
        let chance: Vec<&GameNode> =
            game.nodes.iter().filter(|n| n.kind == NodeKind::Chance).collect();
        assert_eq!(chance.len(), 4);
        for n in chance {
            assert_eq!(n.player, ComponentId(2));
            assert_eq!(n.branches[0].label, "com");
            assert_eq!(n.branches[0].prob, Some(0.8));
            assert_eq!(n.branches[1].label, "coo");
            assert!((n.branches[1].prob.unwrap() - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_probabilities_still_emit_chance_nodes() {
        let game = tank_game("A1", 1.0);
        let chance = game.nodes.iter().filter(|n| n.kind == NodeKind::Chance).count();
        assert_eq!(chance, 4);
        assert_eq!(game.leaves().count(), 12);
    }

    #[test]
    fn deception_attack_pools_valve_information_sets() {
        let game = tank_game("A2", 0.8);
        assert_eq!(game.leaves().count(), 16);
        // Indicator: com and coo sets; valve: two pooled sets keyed by the
        // observed signal; pump: four sets of two nodes each.
        assert_eq!(game.infosets_of(ComponentId(3)).len(), 2);
        let valve_sets = game.infosets_of(ComponentId(1));
        assert_eq!(valve_sets.len(), 2);
        for &s in &valve_sets {
            let set = &game.infosets[s];
            assert_eq!(set.nodes.len(), 2, "com deception pools with the honest signal");
            assert_eq!(set.key.ptype, PlayerType::Normal);
        }
        assert_eq!(game.infosets_of(ComponentId(2)).len(), 4);
        // Pooled nodes differ in hidden effects, so plain backward induction
        // is not exact here.
        assert!(!game.backward_induction_exact());
    }

    #[test]
    fn terminal_payoffs_match_the_payoff_table() {
        let game = tank_game("A1", 0.8);
        let table = PayoffTable::build(
            &tank_system(),
            &game.abnormal,
            &tank_utility,
            AttackerPayoff::ZeroSum,
        )
        .unwrap();
        for leaf in game.leaves() {
            let expect = table.payoffs(leaf.system_utility, &leaf.realized_com);
            assert_eq!(leaf.payoffs, expect);
        }
        // Spot value: indicator LOW, valve ON, pump coo Open has u0 = 30.
        let best = game
            .leaves()
            .find(|l| l.system_utility == 30.0 && l.realized_com.is_empty())
            .expect("leaf exists");
        assert!((best.payoffs[0] - 30.0 * (10.0 / 18.125)).abs() < 1e-12);
        assert!((best.payoffs[1] - 15.0).abs() < 1e-12);
        assert!((best.payoffs[2] - 30.0 * (8.125 / 18.125)).abs() < 1e-12);
    }

    #[test]
    fn compromised_movers_use_replacement_actions() {
        let game = tank_game("A2", 0.5);
        let com_set = game
            .infosets
            .iter()
            .find(|s| s.player == ComponentId(3) && s.key.ptype == PlayerType::Com)
            .unwrap();
        assert_eq!(com_set.actions, vec!["H-L".to_string(), "L-H".to_string()]);
        let node = &game.nodes[com_set.nodes[0]];
        assert_eq!(node.branches[0].observed, "LOW");
        assert_eq!(node.branches[0].effect, 1, "H-L has the HIGH effect");
    }

    #[test]
    fn every_leaf_realizes_one_type_per_abnormal_component() {
        let game = tank_game("A2", 0.5);
        for leaf in game.leaves() {
            assert!(leaf.realized_com.is_subset(&game.abnormal));
        }
        let com_leaves = game.leaves().filter(|l| !l.realized_com.is_empty()).count();
        assert_eq!(com_leaves, 8, "two deception actions x valve x pump");
    }

    #[test]
    fn missing_probability_is_a_config_error() {
        let attacked = tank_attacked("A1");
        let err = compile(
            &attacked,
            &tank_utility,
            &BTreeMap::new(),
            AttackerPayoff::ZeroSum,
            "tank",
        )
        .unwrap_err();
        assert!(err.to_string().contains("probability"), "{err}");
    }

    #[test]
    fn dlr_visits_highest_id_child_first() {
        // Hand-built: root 0 with children 1 (leaf) and 2; node 2 has leaf
        // children 3 and 4.
        let mut b = TreeBuilder::new(vec![ComponentId(1)], vec!["only".into()]);
        let root = b.reserve();
        let left = b.reserve();
        b.set_terminal(left, vec![0.0], 0.0, BTreeSet::new());
        let right = b.reserve();
        let r1 = b.reserve();
        b.set_terminal(r1, vec![1.0], 1.0, BTreeSet::new());
        let r2 = b.reserve();
        b.set_terminal(r2, vec![2.0], 2.0, BTreeSet::new());
        let mk = |label: &str, child| Branch {
            label: label.into(),
            observed: label.into(),
            effect: 0,
            prob: None,
            child,
        };
        b.set_decision(
            right,
            InfoKey { player: ComponentId(1), ptype: PlayerType::Normal, observed: vec!["x".into()] },
            vec![mk("a", r1), mk("b", r2)],
        )
        .unwrap();
        b.set_decision(
            root,
            InfoKey { player: ComponentId(1), ptype: PlayerType::Normal, observed: vec![] },
            vec![mk("x", left), mk("y", right)],
        )
        .unwrap();
        let game = b.finish("toy".into(), BTreeSet::new(), BTreeMap::new());
        assert_eq!(dlr_traverse(&game), vec![0, 2, 4, 3, 1]);
    }
}
