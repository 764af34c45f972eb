//! Component systems, attack models, and architecture refinement.
//!
//! A system is a set of components with action repertoires, a directed
//! influence graph over them, and quality attributes. An attack model names
//! the components an attacker can reach and the replacement actions a
//! compromised component is forced into. Applying an attack splits the
//! components into normal and abnormal sets; refining an architecture removes
//! components with no runtime actions (bridging their edges) and collapses
//! groups of mutually replaceable components to one representative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identifier of a component. `0` is reserved for the nature (chance) player.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize, Default,
)]
pub struct ComponentId(pub u32);

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The nature (chance) player in game trees.
pub const NATURE: ComponentId = ComponentId(0);

/// One component of the managed system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: ComponentId,
    pub name: String,
    /// Base action repertoire; labels are unique within the component.
    pub actions: Vec<String>,
    /// Whether the component takes actions at runtime. Non-runtime components
    /// (sensors that only report, documentation artifacts) are removed by
    /// refinement.
    pub runtime: bool,
    /// Components sharing a group label are mutually replaceable and collapse
    /// to one representative during refinement.
    pub replace_group: Option<String>,
}

impl Component {
    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }
}

/// A named quality attribute and the components contributing to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityAttribute {
    pub label: String,
    pub contributors: Vec<ComponentId>,
}

/// A component-based system: components, directed influence edges, qualities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSystem {
    /// Sorted by ascending id.
    pub components: Vec<Component>,
    /// Directed edges `(from, to)`: `from` acts before and is observed by `to`.
    pub edges: Vec<(ComponentId, ComponentId)>,
    pub quality: Vec<QualityAttribute>,
}

impl ComponentSystem {
    pub fn new(
        mut components: Vec<Component>,
        mut edges: Vec<(ComponentId, ComponentId)>,
        quality: Vec<QualityAttribute>,
    ) -> Result<Self> {
        components.sort_by_key(|c| c.id);
        edges.sort_unstable();
        let sys = ComponentSystem { components, edges, quality };
        sys.validate()?;
        Ok(sys)
    }

    pub fn component(&self, id: ComponentId) -> Result<&Component> {
        self.components
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::Validation(format!("unknown component id {id}")))
    }

    pub fn component_by_name(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Position of `id` in the (id-sorted) component list.
    pub fn index_of(&self, id: ComponentId) -> Result<usize> {
        self.components
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::Validation(format!("unknown component id {id}")))
    }

    pub fn ids(&self) -> Vec<ComponentId> {
        self.components.iter().map(|c| c.id).collect()
    }

    fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for c in &self.components {
            if c.id == NATURE {
                return Err(Error::Validation(format!(
                    "component {:?} uses id 0, which is reserved for nature",
                    c.name
                )));
            }
            if !ids.insert(c.id) {
                return Err(Error::Validation(format!("duplicate component id {}", c.id)));
            }
            if !names.insert(c.name.clone()) {
                return Err(Error::Validation(format!("duplicate component name {:?}", c.name)));
            }
            if c.actions.is_empty() {
                return Err(Error::Validation(format!(
                    "component {:?} (id {}) has an empty action list",
                    c.name, c.id
                )));
            }
            let mut labels = BTreeSet::new();
            for a in &c.actions {
                if !labels.insert(a.as_str()) {
                    return Err(Error::Validation(format!(
                        "component {:?} repeats action label {:?}",
                        c.name, a
                    )));
                }
            }
        }
        let mut seen_edges = BTreeSet::new();
        for &(u, w) in &self.edges {
            if !ids.contains(&u) || !ids.contains(&w) {
                return Err(Error::Validation(format!(
                    "edge ({u}, {w}) references an unknown component"
                )));
            }
            if u == w {
                return Err(Error::Validation(format!("self-loop edge on component {u}")));
            }
            if !seen_edges.insert((u, w)) {
                return Err(Error::Validation(format!("duplicate edge ({u}, {w})")));
            }
        }
        for q in &self.quality {
            for id in &q.contributors {
                if !ids.contains(id) {
                    return Err(Error::Validation(format!(
                        "quality {:?} references unknown component {id}",
                        q.label
                    )));
                }
            }
        }
        // The runtime-restricted, bridged graph must be acyclic so an order of
        // play exists after refinement.
        let refined = refine_architecture(self, &BTreeSet::new())?;
        topological_ids(&refined.system)?;
        Ok(())
    }
}

/// One replacement action forced on a compromised component.
///
/// `label` is the display name used in game trees and .efg files. `effect`
/// names the base action whose system-level consequences the replacement has
/// (utility functions are evaluated on base actions). `observed` is what later
/// players see in their information-set keys — for deception actions it
/// differs from the effect (e.g. label "H-L", effect "HIGH", observed "LOW":
/// the real level is high, the emitted signal reads low).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackAction {
    pub label: String,
    pub effect: String,
    pub observed: String,
}

impl AttackAction {
    /// A plain replacement that is simply one of the base actions.
    pub fn plain(label: impl Into<String>) -> Self {
        let label = label.into();
        AttackAction { effect: label.clone(), observed: label.clone(), label }
    }
}

/// An attack model: what the attacker wants, which components it can reach,
/// and what actions it forces on them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackModel {
    pub id: String,
    pub description: String,
    pub objectives: Vec<String>,
    /// Components the attacker can compromise.
    pub capability: BTreeSet<ComponentId>,
    /// Replacement repertoire per attackable component.
    pub attack_actions: BTreeMap<ComponentId, Vec<AttackAction>>,
    /// Named attack policy selector (how the attacker picks among its actions).
    pub policy: String,
}

/// A system with an attack applied: abnormal components follow the attack's
/// replacement actions when compromised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackedSystem {
    pub system: ComponentSystem,
    pub abnormal: BTreeSet<ComponentId>,
    pub attack_actions: BTreeMap<ComponentId, Vec<AttackAction>>,
}

impl AttackedSystem {
    /// A system with no attack applied (every component normal).
    pub fn unattacked(system: ComponentSystem) -> Self {
        AttackedSystem { system, abnormal: BTreeSet::new(), attack_actions: BTreeMap::new() }
    }

    pub fn normal(&self) -> Vec<ComponentId> {
        self.system.ids().into_iter().filter(|id| !self.abnormal.contains(id)).collect()
    }

    pub fn is_abnormal(&self, id: ComponentId) -> bool {
        self.abnormal.contains(&id)
    }
}

/// Marks a component as attacked, validating against the attack model.
pub fn apply_attack(
    system: &ComponentSystem,
    model: &AttackModel,
    targets: &BTreeSet<ComponentId>,
) -> Result<AttackedSystem> {
    for id in targets {
        system.component(*id)?;
        if !model.capability.contains(id) {
            return Err(Error::Validation(format!(
                "attack {:?} cannot reach component {id}: not in its capability",
                model.id
            )));
        }
    }
    let mut attack_actions = BTreeMap::new();
    for id in targets {
        let comp = system.component(*id)?;
        let list = model.attack_actions.get(id).ok_or_else(|| {
            Error::Validation(format!(
                "attack {:?} lists component {id} as reachable but provides no replacement actions",
                model.id
            ))
        })?;
        if list.is_empty() {
            return Err(Error::Validation(format!(
                "attack {:?} has an empty replacement-action list for component {id}",
                model.id
            )));
        }
        let mut labels = BTreeSet::new();
        for a in list {
            if !labels.insert(a.label.as_str()) {
                return Err(Error::Validation(format!(
                    "attack {:?} repeats replacement label {:?} on component {id}",
                    model.id, a.label
                )));
            }
            if comp.action_index(&a.effect).is_none() {
                return Err(Error::Validation(format!(
                    "replacement action {:?} on component {id}: effect {:?} is not one of its base actions",
                    a.label, a.effect
                )));
            }
        }
        attack_actions.insert(*id, list.clone());
    }
    Ok(AttackedSystem { system: system.clone(), abnormal: targets.clone(), attack_actions })
}

/// Result of refining an architecture for game construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Refined {
    pub system: ComponentSystem,
    /// Abnormal set relabeled onto surviving components.
    pub abnormal: BTreeSet<ComponentId>,
    /// Maps every original id that survives (directly or through its group
    /// representative) to the surviving id. Removed non-runtime ids are absent.
    pub representative: BTreeMap<ComponentId, ComponentId>,
}

/// Removes non-runtime components (bridging their incident edges) and
/// collapses each replace group to its smallest-id member, which inherits the
/// union of the group's edges and keeps its own action list.
pub fn refine_architecture(
    system: &ComponentSystem,
    abnormal: &BTreeSet<ComponentId>,
) -> Result<Refined> {
    let mut edges: BTreeSet<(ComponentId, ComponentId)> = system.edges.iter().copied().collect();

    // Step 1: drop non-runtime components one at a time, bridging (u,m),(m,w)
    // into (u,w). Removing one at a time makes chains of removed components
    // bridge transitively.
    let removed: Vec<ComponentId> =
        system.components.iter().filter(|c| !c.runtime).map(|c| c.id).collect();
    for m in &removed {
        let preds: Vec<ComponentId> =
            edges.iter().filter(|(_, w)| w == m).map(|(u, _)| *u).collect();
        let succs: Vec<ComponentId> =
            edges.iter().filter(|(u, _)| u == m).map(|(_, w)| *w).collect();
        edges.retain(|(u, w)| u != m && w != m);
        for &u in &preds {
            for &w in &succs {
                if u != w {
                    edges.insert((u, w));
                }
            }
        }
        if abnormal.contains(m) {
            return Err(Error::Validation(format!(
                "abnormal component {m} has no runtime actions and no representative after refinement"
            )));
        }
    }

    // Step 2: collapse replace groups among survivors to the smallest id.
    let survivors: Vec<&Component> = system.components.iter().filter(|c| c.runtime).collect();
    let mut group_rep: BTreeMap<&str, ComponentId> = BTreeMap::new();
    for c in &survivors {
        if let Some(g) = &c.replace_group {
            let rep = group_rep.entry(g.as_str()).or_insert(c.id);
            if c.id < *rep {
                *rep = c.id;
            }
        }
    }
    let mut representative: BTreeMap<ComponentId, ComponentId> = BTreeMap::new();
    for c in &survivors {
        let rep = match &c.replace_group {
            Some(g) => group_rep[g.as_str()],
            None => c.id,
        };
        representative.insert(c.id, rep);
    }
    let mut collapsed: BTreeSet<(ComponentId, ComponentId)> = BTreeSet::new();
    for (u, w) in edges {
        let (u, w) = (representative[&u], representative[&w]);
        if u != w {
            collapsed.insert((u, w));
        }
    }
    let components: Vec<Component> = survivors
        .iter()
        .filter(|c| representative[&c.id] == c.id)
        .map(|c| (*c).clone())
        .collect();

    let mut new_abnormal = BTreeSet::new();
    for id in abnormal {
        match representative.get(id) {
            Some(rep) => {
                new_abnormal.insert(*rep);
            }
            None => {
                return Err(Error::Validation(format!(
                    "abnormal component {id} was removed by refinement with no representative"
                )));
            }
        }
    }

    let system = ComponentSystem {
        components,
        edges: collapsed.into_iter().collect(),
        quality: system.quality.clone(),
    };
    Ok(Refined { system, abnormal: new_abnormal, representative })
}

/// Topological order of the component ids (Kahn's algorithm, ties broken by
/// ascending id). Errors name the components on a cycle.
pub fn topological_ids(system: &ComponentSystem) -> Result<Vec<ComponentId>> {
    let mut indegree: BTreeMap<ComponentId, usize> =
        system.components.iter().map(|c| (c.id, 0)).collect();
    for (_, w) in &system.edges {
        *indegree.get_mut(w).expect("validated edge") += 1;
    }
    let mut ready: BTreeSet<ComponentId> =
        indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(&id) = ready.iter().next() {
        ready.remove(&id);
        order.push(id);
        for &(u, w) in &system.edges {
            if u == id {
                let d = indegree.get_mut(&w).expect("validated edge");
                *d -= 1;
                if *d == 0 {
                    ready.insert(w);
                }
            }
        }
    }
    if order.len() != indegree.len() {
        let stuck: Vec<String> = indegree
            .iter()
            .filter(|(id, _)| !order.contains(id))
            .map(|(id, _)| id.to_string())
            .collect();
        return Err(Error::Validation(format!(
            "architecture contains a cycle among components {{{}}}",
            stuck.join(", ")
        )));
    }
    Ok(order)
}

// ---------------------------------------------------------------------------
// Config-file loading
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    /// Top-level key; in TOML it must appear before the first `[[components]]`
    /// header or it would be swallowed by that component's table.
    #[serde(default)]
    edges: Vec<(u32, u32)>,
    components: Vec<RawComponent>,
    #[serde(default)]
    quality: Vec<RawQuality>,
    #[serde(default)]
    attacks: Vec<RawAttack>,
    /// Optional system-utility table keyed by the joint action labels in
    /// component-id order, comma-separated (e.g. `"ON,Open,LOW" = 30.0`).
    #[serde(default)]
    outcomes: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    id: u32,
    name: String,
    actions: Vec<String>,
    #[serde(default = "default_true")]
    runtime: bool,
    #[serde(default)]
    replace_group: Option<String>,
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuality {
    label: String,
    contributors: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttack {
    id: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    objectives: Vec<String>,
    targets: Vec<u32>,
    #[serde(default)]
    replacement_actions: BTreeMap<String, Vec<RawAttackAction>>,
    #[serde(default = "default_policy")]
    policy: String,
}

fn default_policy() -> String {
    "worst-case".to_string()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAttackAction {
    Plain(String),
    Full { label: String, effect: String, observed: String },
}

/// A parsed system configuration: the architecture plus its attack catalog.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub system: ComponentSystem,
    pub attacks: Vec<AttackModel>,
    /// Optional utility table keyed by comma-joined joint action labels in
    /// component-id order. Empty when the config defines no `[outcomes]`.
    pub outcomes: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn attack(&self, id: &str) -> Result<&AttackModel> {
        self.attacks
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::Config(format!("unknown attack id {id:?}")))
    }
}

/// Parses a system configuration document (TOML with top-level keys
/// `components`, `edges`, `quality`, `attacks`).
pub fn load_spec(text: &str) -> Result<SystemSpec> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("system config: {e}")))?;
    let components = raw
        .components
        .into_iter()
        .map(|c| Component {
            id: ComponentId(c.id),
            name: c.name,
            actions: c.actions,
            runtime: c.runtime,
            replace_group: c.replace_group,
        })
        .collect();
    let edges = raw.edges.into_iter().map(|(u, w)| (ComponentId(u), ComponentId(w))).collect();
    let quality = raw
        .quality
        .into_iter()
        .map(|q| QualityAttribute {
            label: q.label,
            contributors: q.contributors.into_iter().map(ComponentId).collect(),
        })
        .collect();
    let system = ComponentSystem::new(components, edges, quality)?;

    let mut attacks = Vec::new();
    for a in raw.attacks {
        let mut attack_actions = BTreeMap::new();
        for (key, list) in a.replacement_actions {
            let id: u32 = key.parse().map_err(|_| {
                Error::Config(format!(
                    "attack {:?}: replacement_actions key {key:?} is not a component id",
                    a.id
                ))
            })?;
            let list = list
                .into_iter()
                .map(|ra| match ra {
                    RawAttackAction::Plain(label) => AttackAction::plain(label),
                    RawAttackAction::Full { label, effect, observed } => {
                        AttackAction { label, effect, observed }
                    }
                })
                .collect();
            attack_actions.insert(ComponentId(id), list);
        }
        let capability: BTreeSet<ComponentId> =
            a.targets.into_iter().map(ComponentId).collect();
        for id in attack_actions.keys() {
            if !capability.contains(id) {
                return Err(Error::Config(format!(
                    "attack {:?}: replacement actions for component {id} outside its targets",
                    a.id
                )));
            }
        }
        let objectives =
            if a.objectives.is_empty() { vec![a.description.clone()] } else { a.objectives };
        attacks.push(AttackModel {
            id: a.id,
            description: a.description,
            objectives,
            capability,
            attack_actions,
            policy: a.policy,
        });
    }
    Ok(SystemSpec { system, attacks, outcomes: raw.outcomes })
}

/// Parses a system configuration and returns just the architecture.
pub fn load_system(text: &str) -> Result<ComponentSystem> {
    Ok(load_spec(text)?.system)
}
