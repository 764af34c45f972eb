//! The plan store of the adaptation loop: solve a scenario's game across a
//! grid of compromise probabilities ahead of time, keep the equilibrium
//! actions for the fully cooperative and fully compromised realizations, and
//! retrieve the nearest case by squared distance when the monitor reports a
//! probability estimate at run time.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{Game, NodeKind};
use crate::scenarios::Scenario;
use crate::solver::{
    enumerate_pure_equilibria, select_equilibrium, solve_backward_induction, Equilibrium,
    PureProfile, PROFILE_CAP,
};
use crate::system::ComponentId;
use crate::{Error, Result};

/// Format version written to and required from store files.
pub const STORE_VERSION: u32 = 1;

/// Hard ceiling on grid sizes a store build will attempt.
const MAX_GRID_POINTS: usize = 1_000_000;

/// Provenance line at the top of every store file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreHeader {
    pub version: u32,
    pub scenario: String,
    /// Grid step the store was built with.
    pub step: f64,
}

/// One precomputed defensive policy: the game's equilibrium at a grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeCase {
    /// Compromise probability per component (player order; zero for
    /// components the attack cannot reach).
    pub p_com: Vec<f64>,
    /// Equilibrium actions, one per component, when every attacked component
    /// turns out cooperative.
    pub a_star: Vec<String>,
    /// Equilibrium actions when every attacked component is compromised.
    pub a_star_compromised: Vec<String>,
    /// Expected system utility of the selected equilibrium.
    pub system_utility: Option<f64>,
    /// Marker: no pure equilibrium exists at this grid point; the action
    /// lists are empty and the utility absent.
    pub no_equilibrium: bool,
}

/// A header plus its cases, in row-major grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseStore {
    pub header: StoreHeader,
    pub cases: Vec<KnowledgeCase>,
}

impl CaseStore {
    /// Returns the index and case nearest to `query` in squared distance,
    /// earliest case on ties. `query` must give one probability per
    /// component, in player order.
    pub fn retrieve(&self, query: &[f64]) -> Result<(usize, &KnowledgeCase)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, case) in self.cases.iter().enumerate() {
            if case.p_com.len() != query.len() {
                return Err(Error::Validation(format!(
                    "query has {} probabilities but case {k} covers {} components",
                    query.len(),
                    case.p_com.len()
                )));
            }
            let d: f64 = case.p_com.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best.map(|(k, _)| (k, &self.cases[k]))
            .ok_or_else(|| Error::Validation("the knowledge store holds no cases".into()))
    }

    /// Serializes as JSON lines: the header, then one case per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for case in &self.cases {
            out.push_str(&serde_json::to_string(case).expect("case serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Config("knowledge store file is empty: no header line".into()))?;
        let header: StoreHeader = serde_json::from_str(header_line)
            .map_err(|e| Error::Config(format!("knowledge store header: {e}")))?;
        if header.version != STORE_VERSION {
            return Err(Error::Config(format!(
                "knowledge store version {} is not supported; expected {STORE_VERSION}",
                header.version
            )));
        }
        let mut cases = Vec::new();
        for (k, line) in lines.enumerate() {
            let case: KnowledgeCase = serde_json::from_str(line)
                .map_err(|e| Error::Config(format!("knowledge store record {}: {e}", k + 1)))?;
            cases.push(case);
        }
        Ok(CaseStore { header, cases })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }
}

/// All grid points over `axes` probability axes with the given step, row
/// major (first axis slowest). The step must divide 1.
pub fn probability_grid(step: f64, axes: usize) -> Result<Vec<Vec<f64>>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("grid step {step} must lie in (0, 1]")));
    }
    let steps = 1.0 / step;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::Config(format!("grid step {step} must divide 1")));
    }
    let steps = steps.round();
    let per = steps as usize + 1;
    let total = per.checked_pow(axes as u32).filter(|&t| t <= MAX_GRID_POINTS).ok_or_else(
        || {
            Error::Config(format!(
                "grid of {per}^{axes} points exceeds the {MAX_GRID_POINTS}-point ceiling; \
                 coarsen the step"
            ))
        },
    )?;
    let value = |k: usize| k as f64 / steps;
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes];
    loop {
        points.push(idx.iter().map(|&k| value(k)).collect());
        let mut carry = true;
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < per {
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry {
            break;
        }
    }
    Ok(points)
}

/// The action each component's equilibrium policy takes on the realization
/// path where every attacked component is compromised (`true`) or
/// cooperative (`false`), in player order.
pub fn realization_actions(
    game: &Game,
    profile: &PureProfile,
    compromised: bool,
) -> Result<Vec<String>> {
    let want = if compromised { "com" } else { "coo" };
    let mut actions: BTreeMap<ComponentId, String> = BTreeMap::new();
    let mut node = game.root();
    loop {
        match node.kind {
            NodeKind::Terminal => break,
            NodeKind::Chance => {
                let branch =
                    node.branches.iter().find(|b| b.label == want).ok_or_else(|| {
                        Error::Validation(format!(
                            "chance node {} has no {want:?} branch",
                            node.id
                        ))
                    })?;
                node = &game.nodes[branch.child];
            }
            NodeKind::Decision => {
                let branch = &node.branches[profile.action(node.infoset)];
                actions.insert(node.player, branch.label.clone());
                node = &game.nodes[branch.child];
            }
        }
    }
    game.players
        .iter()
        .map(|p| {
            actions.get(p).cloned().ok_or_else(|| {
                Error::Validation(format!("player {p} never moves on the realization path"))
            })
        })
        .collect()
}

/// Solves one game, distinguishing "no pure equilibrium exists" (`None`)
/// from hard failures.
fn solve_point(game: &Game) -> Result<Option<Equilibrium>> {
    if game.profile_space() <= PROFILE_CAP as f64 {
        let set = enumerate_pure_equilibria(game)?;
        Ok(select_equilibrium(game, &set).cloned())
    } else if game.backward_induction_exact() {
        Ok(Some(solve_backward_induction(game)?))
    } else {
        Err(Error::SolverCap { profiles: game.profile_space(), cap: PROFILE_CAP })
    }
}

/// Builds a store by solving the scenario at every grid point over its
/// attacked components. Points without a pure equilibrium become marker
/// cases rather than failures.
pub fn build_grid(scenario: &Scenario, step: f64) -> Result<CaseStore> {
    let axes: Vec<ComponentId> = scenario.refined.abnormal.iter().copied().collect();
    let points = probability_grid(step, axes.len())?;
    let cases: Vec<KnowledgeCase> = points
        .par_iter()
        .map(|point| {
            let probs: BTreeMap<ComponentId, f64> =
                axes.iter().copied().zip(point.iter().copied()).collect();
            let game = scenario.game_at(&probs)?;
            let p_com: Vec<f64> = game
                .players
                .iter()
                .map(|p| probs.get(p).copied().unwrap_or(0.0))
                .collect();
            match solve_point(&game)? {
                Some(eq) => Ok(KnowledgeCase {
                    p_com,
                    a_star: realization_actions(&game, &eq.profile, false)?,
                    a_star_compromised: realization_actions(&game, &eq.profile, true)?,
                    system_utility: Some(eq.system_utility),
                    no_equilibrium: false,
                }),
                None => Ok(KnowledgeCase {
                    p_com,
                    a_star: Vec::new(),
                    a_star_compromised: Vec::new(),
                    system_utility: None,
                    no_equilibrium: true,
                }),
            }
        })
        .collect::<Result<_>>()?;
    Ok(CaseStore {
        header: StoreHeader { version: STORE_VERSION, scenario: scenario.name.to_string(), step },
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::make_scenario;
    use proptest::prelude::*;

    #[test]
    fn tank_grid_has_one_case_per_step() {
        let scenario = make_scenario("tank-a1").unwrap();
        let store = build_grid(&scenario, 0.1).unwrap();
        assert_eq!(store.header.version, STORE_VERSION);
        assert_eq!(store.header.scenario, "tank-a1");
        assert_eq!(store.cases.len(), 11);
        // Player order valve, pump, indicator; only the pump can be attacked.
        assert_eq!(store.cases[0].p_com, vec![0.0, 0.0, 0.0]);
        assert_eq!(store.cases[10].p_com, vec![0.0, 1.0, 0.0]);
        assert!(store.cases.iter().all(|c| !c.no_equilibrium));
        for pair in store.cases.windows(2) {
            assert!(pair[0].p_com[1] < pair[1].p_com[1]);
        }
    }

    #[test]
    fn two_axis_grid_is_row_major() {
        let scenario = make_scenario("znn").unwrap();
        let store = build_grid(&scenario, 0.5).unwrap();
        assert_eq!(store.cases.len(), 9);
        let pts: Vec<(f64, f64)> = store.cases.iter().map(|c| (c.p_com[2], c.p_com[3])).collect();
        assert_eq!(
            pts,
            vec![
                (0.0, 0.0),
                (0.0, 0.5),
                (0.0, 1.0),
                (0.5, 0.0),
                (0.5, 0.5),
                (0.5, 1.0),
                (1.0, 0.0),
                (1.0, 0.5),
                (1.0, 1.0)
            ]
        );
        // Load balancer and Server1 are not attackable.
        assert!(store.cases.iter().all(|c| c.p_com[0] == 0.0 && c.p_com[1] == 0.0));
    }

    #[test]
    fn certain_compromise_case_shuts_the_valve() {
        let scenario = make_scenario("tank-a1").unwrap();
        let store = build_grid(&scenario, 0.5).unwrap();
        let case = &store.cases[2];
        assert_eq!(case.p_com, vec![0.0, 1.0, 0.0]);
        // Valve OFF whatever the pump's realization; the jammed pump closes.
        assert_eq!(case.a_star[0], "OFF");
        assert_eq!(case.a_star_compromised[0], "OFF");
        assert_eq!(case.a_star_compromised[1], "Close");
        assert!((case.system_utility.unwrap() - 0.0).abs() < 1e-9);
        // At certainty of cooperation the valve follows the level instead.
        let relaxed = &store.cases[0];
        assert_eq!(relaxed.a_star[1], "Open");
        assert!((relaxed.system_utility.unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn retrieval_matches_a_linear_scan() {
        fn oracle(cases: &[KnowledgeCase], query: &[f64]) -> usize {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, case) in cases.iter().enumerate() {
                let d: f64 =
                    case.p_com.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best
        }
        let case = |p_com: Vec<f64>| KnowledgeCase {
            p_com,
            a_star: Vec::new(),
            a_star_compromised: Vec::new(),
            system_utility: Some(0.0),
            no_equilibrium: false,
        };
        proptest!(|(
            rows in prop::collection::vec(
                prop::collection::vec(0.0f64..=1.0, 3), 1..20),
            query in prop::collection::vec(0.0f64..=1.0, 3),
        )| {
            let store = CaseStore {
                header: StoreHeader {
                    version: STORE_VERSION,
                    scenario: "prop".into(),
                    step: 0.1,
                },
                cases: rows.iter().cloned().map(case).collect(),
            };
            let (got, _) = store.retrieve(&query).unwrap();
            prop_assert_eq!(got, oracle(&store.cases, &query));
        });
        // Exact ties resolve to the earliest case.
        let store = CaseStore {
            header: StoreHeader { version: STORE_VERSION, scenario: "tie".into(), step: 1.0 },
            cases: vec![case(vec![0.5, 0.5, 0.5]), case(vec![0.5, 0.5, 0.5])],
        };
        assert_eq!(store.retrieve(&[0.4, 0.4, 0.4]).unwrap().0, 0);
    }

    #[test]
    fn retrieval_rejects_bad_shapes() {
        let scenario = make_scenario("swat-mini").unwrap();
        let store = build_grid(&scenario, 0.5).unwrap();
        let err = store.retrieve(&[0.2]).err().unwrap();
        assert!(err.to_string().contains("covers 2 components"), "{err}");
        let empty = CaseStore { header: store.header.clone(), cases: Vec::new() };
        let err = empty.retrieve(&[0.2, 0.3]).err().unwrap();
        assert!(err.to_string().contains("no cases"), "{err}");
    }

    #[test]
    fn stores_roundtrip_byte_stably() {
        let scenario = make_scenario("swat-mini").unwrap();
        let mut store = build_grid(&scenario, 0.25).unwrap();
        // A hand-made marker row survives the trip too.
        store.cases.push(KnowledgeCase {
            p_com: vec![0.0, 0.625],
            a_star: Vec::new(),
            a_star_compromised: Vec::new(),
            system_utility: None,
            no_equilibrium: true,
        });
        let text = store.to_jsonl();
        assert_eq!(text, store.to_jsonl());
        let back = CaseStore::from_jsonl(&text).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.to_jsonl(), text);

        let empty =
            CaseStore { header: store.header.clone(), cases: Vec::new() };
        let back = CaseStore::from_jsonl(&empty.to_jsonl()).unwrap();
        assert_eq!(back, empty);
    }

    #[test]
    fn malformed_stores_are_rejected_with_context() {
        let scenario = make_scenario("swat-mini").unwrap();
        let store = build_grid(&scenario, 0.5).unwrap();
        let text = store.to_jsonl();
        let truncated = &text[..text.len() - 10];
        let err = CaseStore::from_jsonl(truncated).err().unwrap();
        assert!(err.to_string().contains("record 3"), "{err}");

        let mut versioned = store.clone();
        versioned.header.version = 99;
        let err = CaseStore::from_jsonl(&versioned.to_jsonl()).err().unwrap();
        assert!(err.to_string().contains("version 99"), "{err}");

        let err = CaseStore::from_jsonl("").err().unwrap();
        assert!(err.to_string().contains("no header"), "{err}");
    }

    #[test]
    fn grids_validate_their_step() {
        assert_eq!(probability_grid(1.0, 1).unwrap(), vec![vec![0.0], vec![1.0]]);
        assert_eq!(probability_grid(0.5, 0).unwrap(), vec![Vec::<f64>::new()]);
        assert!(probability_grid(0.3, 1).err().unwrap().to_string().contains("divide 1"));
        assert!(probability_grid(0.0, 1).is_err());
        assert!(probability_grid(-0.1, 1).is_err());
        assert!(probability_grid(0.001, 2).err().unwrap().to_string().contains("ceiling"));
    }
}
