//! Shapley-value payoff allocation over component systems.
//!
//! The system utility function scores each joint base-action profile. A
//! coalition's feature value is the best expected utility it can guarantee
//! when everyone outside the coalition acts uniformly at random; Shapley
//! values over that coalition game measure each component's contribution to
//! the system's quality. Leaf payoffs in compiled games are then shares of
//! the realized system utility: normal components split it in proportion to
//! their Shapley values, compromised components earn the attacker's payoff,
//! and abnormal-but-cooperating components earn an equal per-normal share.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::system::{ComponentId, ComponentSystem};
use crate::tolerances;
use crate::{Error, Result};

/// Shapley computation enumerates all coalitions; larger systems must first
/// collapse replaceable components into groups.
pub const MAX_SHAPLEY_COMPONENTS: usize = 10;

/// Upper bound on the joint base-action space a utility table may span.
const MAX_JOINT_ACTIONS: usize = 50_000_000;

/// How abnormal components are paid when their compromised type realizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AttackerPayoff {
    /// The attacker takes the system's loss: `-u0 / |C_a|` per compromised
    /// component.
    ZeroSum,
    /// The attacker is paid the shortfall from the best attainable utility:
    /// `(max_utility - u0) / |C_a|` per compromised component.
    LossShare { max_utility: f64 },
}

/// Row-major strides for the joint base-action space (first component most
/// significant).
fn strides(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; counts.len()];
    for k in (0..counts.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }
    strides
}

fn joint_space(system: &ComponentSystem) -> Result<(Vec<usize>, usize)> {
    let counts: Vec<usize> = system.components.iter().map(|c| c.actions.len()).collect();
    let mut total = 1usize;
    for &c in &counts {
        total = total.checked_mul(c).filter(|&t| t <= MAX_JOINT_ACTIONS).ok_or_else(|| {
            Error::Validation(format!(
                "joint action space exceeds {MAX_JOINT_ACTIONS} profiles; coarsen the action grids"
            ))
        })?;
    }
    Ok((counts, total))
}

/// Tabulates the system utility over every joint base-action profile.
fn utility_table<U>(system: &ComponentSystem, utility: &U) -> Result<Vec<f64>>
where
    U: Fn(&[usize]) -> f64 + Sync + ?Sized,
{
    let (counts, total) = joint_space(system)?;
    let strides = strides(&counts);
    let table: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|joint| {
            let actions: Vec<usize> =
                (0..counts.len()).map(|k| joint / strides[k] % counts[k]).collect();
            utility(&actions)
        })
        .collect();
    Ok(table)
}

/// Feature value of one coalition (bitmask over the id-sorted component
/// list): the maximum over the coalition's joint actions of the expected
/// utility with all other components uniform.
fn mask_value(counts: &[usize], strides: &[usize], table: &[f64], mask: u32) -> f64 {
    let members: Vec<usize> = (0..counts.len()).filter(|k| mask >> k & 1 == 1).collect();
    let inside: usize = members.iter().map(|&k| counts[k]).product();
    let outside = table.len() / inside.max(1);
    let mut sums = vec![0.0f64; inside.max(1)];
    for (joint, &u) in table.iter().enumerate() {
        let mut key = 0usize;
        for &k in &members {
            key = key * counts[k] + joint / strides[k] % counts[k];
        }
        sums[key] += u;
    }
    sums.iter().map(|s| s / outside as f64).fold(f64::NEG_INFINITY, f64::max)
}

/// Feature values for every coalition, indexed by bitmask over the id-sorted
/// component list (bit `k` = k-th component). Index 0 is the no-coalition
/// baseline: the expected utility when every component acts uniformly.
pub fn coalition_values<U>(system: &ComponentSystem, utility: &U) -> Result<Vec<f64>>
where
    U: Fn(&[usize]) -> f64 + Sync + ?Sized,
{
    let n = system.components.len();
    if n > MAX_SHAPLEY_COMPONENTS {
        return Err(Error::Validation(format!(
            "Shapley allocation over {n} components exceeds the supported maximum of \
             {MAX_SHAPLEY_COMPONENTS}; collapse replaceable components into replace groups"
        )));
    }
    let (counts, _) = joint_space(system)?;
    let strides = strides(&counts);
    let table = utility_table(system, utility)?;
    Ok((0..1u32 << n)
        .into_par_iter()
        .map(|mask| mask_value(&counts, &strides, &table, mask))
        .collect())
}

/// Feature value of one named coalition.
pub fn feature_value<U>(
    system: &ComponentSystem,
    utility: &U,
    members: &BTreeSet<ComponentId>,
) -> Result<f64>
where
    U: Fn(&[usize]) -> f64 + Sync + ?Sized,
{
    let mut mask = 0u32;
    for id in members {
        mask |= 1 << system.index_of(*id)?;
    }
    let (counts, _) = joint_space(system)?;
    let strides = strides(&counts);
    let table = utility_table(system, utility)?;
    Ok(mask_value(&counts, &strides, &table, mask))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Shapley values of all components under the coalition feature function.
pub fn shapley<U>(system: &ComponentSystem, utility: &U) -> Result<BTreeMap<ComponentId, f64>>
where
    U: Fn(&[usize]) -> f64 + Sync + ?Sized,
{
    let values = coalition_values(system, utility)?;
    Ok(shapley_from_coalitions(system, &values))
}

/// Shapley values from precomputed coalition values (bitmask-indexed).
pub fn shapley_from_coalitions(
    system: &ComponentSystem,
    values: &[f64],
) -> BTreeMap<ComponentId, f64> {
    let n = system.components.len();
    debug_assert_eq!(values.len(), 1 << n);
    let n_fact = factorial(n);
    let mut out = BTreeMap::new();
    for (k, comp) in system.components.iter().enumerate() {
        let bit = 1u32 << k;
        let mut phi = 0.0;
        for mask in 0..1u32 << n {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial(s) * factorial(n - 1 - s) / n_fact;
            phi += weight * (values[(mask | bit) as usize] - values[mask as usize]);
        }
        out.insert(comp.id, phi);
    }
    out
}

/// Precomputed utilities and payoff shares for one attacked system.
///
/// Built once per game compilation; leaf payoff lookups are O(players).
#[derive(Clone, Debug)]
pub struct PayoffTable {
    /// Refined components in ascending id order (the game's player order).
    pub components: Vec<ComponentId>,
    counts: Vec<usize>,
    strides: Vec<usize>,
    u0: Vec<f64>,
    pub shapley: BTreeMap<ComponentId, f64>,
    /// `phi_i / sum of normal phi` for each normal component.
    pub normal_share: BTreeMap<ComponentId, f64>,
    abnormal: BTreeSet<ComponentId>,
    n_normal: usize,
    attacker: AttackerPayoff,
}

impl PayoffTable {
    pub fn build<U>(
        system: &ComponentSystem,
        abnormal: &BTreeSet<ComponentId>,
        utility: &U,
        attacker: AttackerPayoff,
    ) -> Result<Self>
    where
        U: Fn(&[usize]) -> f64 + Sync + ?Sized,
    {
        let (counts, _) = joint_space(system)?;
        let strides = strides(&counts);
        let u0 = utility_table(system, utility)?;
        let shapley = shapley(system, utility)?;
        let normal: Vec<ComponentId> =
            system.ids().into_iter().filter(|id| !abnormal.contains(id)).collect();
        if normal.is_empty() {
            return Err(Error::Validation(
                "payoff condition degenerate: every component is abnormal, leaving no normal \
                 components to share the system utility"
                    .into(),
            ));
        }
        let denom: f64 = normal.iter().map(|id| shapley[id]).sum();
        if denom.abs() < tolerances::ABS {
            return Err(Error::Validation(format!(
                "payoff condition degenerate: the normal components' Shapley values sum to \
                 {denom:e}, so proportional shares are undefined"
            )));
        }
        let normal_share: BTreeMap<ComponentId, f64> =
            normal.iter().map(|id| (*id, shapley[id] / denom)).collect();
        Ok(PayoffTable {
            components: system.ids(),
            counts,
            strides,
            u0,
            shapley,
            normal_share,
            abnormal: abnormal.clone(),
            n_normal: normal.len(),
            attacker,
        })
    }

    /// Flat index of a joint base-action profile (one effect index per
    /// component, in id order).
    pub fn joint_index(&self, effects: &[usize]) -> usize {
        debug_assert_eq!(effects.len(), self.counts.len());
        effects.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn system_utility(&self, effects: &[usize]) -> f64 {
        self.u0[self.joint_index(effects)]
    }

    /// Per-component payoffs (id order) at a leaf with realized system
    /// utility `u0` and the given set of realized-compromised components.
    pub fn payoffs(&self, u0: f64, realized_com: &BTreeSet<ComponentId>) -> Vec<f64> {
        let n_abnormal = self.abnormal.len().max(1);
        self.components
            .iter()
            .map(|id| {
                if let Some(share) = self.normal_share.get(id) {
                    u0 * share
                } else if realized_com.contains(id) {
                    match self.attacker {
                        AttackerPayoff::ZeroSum => -u0 / n_abnormal as f64,
                        AttackerPayoff::LossShare { max_utility } => {
                            (max_utility - u0) / n_abnormal as f64
                        }
                    }
                } else {
                    u0 / self.n_normal as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::system::Component;
    use proptest::prelude::*;

    fn system_of(counts: &[usize]) -> ComponentSystem {
        let components = counts
            .iter()
            .enumerate()
            .map(|(k, &n)| Component {
                id: ComponentId(k as u32 + 1),
                name: format!("c{}", k + 1),
                actions: (0..n).map(|a| format!("a{a}")).collect(),
                runtime: true,
                replace_group: None,
            })
            .collect();
        ComponentSystem::new(components, vec![], vec![]).unwrap()
    }

    /// 2x2 fixture: U(a,x)=4, U(a,y)=2, U(b,x)=1, U(b,y)=0.
    fn two_by_two(actions: &[usize]) -> f64 {
        [[4.0, 2.0], [1.0, 0.0]][actions[0]][actions[1]]
    }

    /// The corrected three-component tank outcome table, indexed by
    /// (valve, pump, indicator-level) action indices.
    pub(crate) fn tank_utility(actions: &[usize]) -> f64 {
        let (valve_on, pump_open, level_low) =
            (actions[0] == 0, actions[1] == 0, actions[2] == 0);
        match (level_low, valve_on, pump_open) {
            (true, true, true) => 30.0,
            (true, true, false) => -30.0,
            (true, false, true) => -15.0,
            (true, false, false) => 0.0,
            (false, false, true) => 30.0,
            (false, true, false) => -30.0,
            (false, true, true) => 0.0,
            (false, false, false) => 0.0,
        }
    }

    pub(crate) fn tank_system() -> ComponentSystem {
        let mk = |id: u32, name: &str, actions: [&str; 2]| Component {
            id: ComponentId(id),
            name: name.into(),
            actions: actions.iter().map(|s| s.to_string()).collect(),
            runtime: true,
            replace_group: None,
        };
        ComponentSystem::new(
            vec![
                mk(1, "valve", ["ON", "OFF"]),
                mk(2, "pump", ["Open", "Close"]),
                mk(3, "indicator", ["LOW", "HIGH"]),
            ],
            vec![(ComponentId(3), ComponentId(1)), (ComponentId(1), ComponentId(2))],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn frozen_two_component_coalition_values() {
        let sys = system_of(&[2, 2]);
        let v = coalition_values(&sys, &two_by_two).unwrap();
        assert!((v[0b00] - 1.75).abs() < 1e-12, "v(empty) = {}", v[0]);
        assert!((v[0b01] - 3.0).abs() < 1e-12, "v(c1) = {}", v[1]);
        assert!((v[0b10] - 2.5).abs() < 1e-12, "v(c2) = {}", v[2]);
        assert!((v[0b11] - 4.0).abs() < 1e-12, "v(c1,c2) = {}", v[3]);
    }

    #[test]
    fn frozen_two_component_shapley_and_shares() {
        let sys = system_of(&[2, 2]);
        let phi = shapley(&sys, &two_by_two).unwrap();
        assert!((phi[&ComponentId(1)] - 1.375).abs() < 1e-12);
        assert!((phi[&ComponentId(2)] - 0.875).abs() < 1e-12);
        let table =
            PayoffTable::build(&sys, &BTreeSet::new(), &two_by_two, AttackerPayoff::ZeroSum)
                .unwrap();
        let payoffs = table.payoffs(10.0, &BTreeSet::new());
        assert!((payoffs[0] - 55.0 / 9.0).abs() < 1e-12, "c1 share {}", payoffs[0]);
        assert!((payoffs[1] - 35.0 / 9.0).abs() < 1e-12, "c2 share {}", payoffs[1]);
    }

    #[test]
    fn tank_coalition_values_and_shapley() {
        let sys = tank_system();
        let v = coalition_values(&sys, &tank_utility).unwrap();
        // bit0 = valve, bit1 = pump, bit2 = indicator
        assert!((v[0b000] + 1.875).abs() < 1e-12);
        assert!((v[0b001] - 3.75).abs() < 1e-12);
        assert!((v[0b010] - 11.25).abs() < 1e-12);
        assert!((v[0b100] - 0.0).abs() < 1e-12);
        for pair in [0b011, 0b101, 0b110] {
            assert!((v[pair] - 15.0).abs() < 1e-12, "v({pair:03b}) = {}", v[pair]);
        }
        assert!((v[0b111] - 30.0).abs() < 1e-12);
        let phi = shapley(&sys, &tank_utility).unwrap();
        assert!((phi[&ComponentId(1)] - 10.0).abs() < 1e-12, "valve {}", phi[&ComponentId(1)]);
        assert!((phi[&ComponentId(2)] - 13.75).abs() < 1e-12, "pump {}", phi[&ComponentId(2)]);
        assert!(
            (phi[&ComponentId(3)] - 8.125).abs() < 1e-12,
            "indicator {}",
            phi[&ComponentId(3)]
        );
    }

    /// Independent oracle: Shapley as the average marginal contribution over
    /// all orderings of the components.
    fn shapley_by_permutations<U>(sys: &ComponentSystem, utility: &U) -> BTreeMap<ComponentId, f64>
    where
        U: Fn(&[usize]) -> f64 + Sync + ?Sized,
    {
        let n = sys.components.len();
        let values = coalition_values(sys, utility).unwrap();
        let mut acc: BTreeMap<ComponentId, f64> =
            sys.components.iter().map(|c| (c.id, 0.0)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut count = 0usize;
        permute(&mut order, 0, &mut |perm| {
            count += 1;
            let mut mask = 0u32;
            for &k in perm {
                let with = mask | 1 << k;
                *acc.get_mut(&sys.components[k].id).unwrap() +=
                    values[with as usize] - values[mask as usize];
                mask = with;
            }
        });
        acc.values_mut().for_each(|v| *v /= count as f64);
        acc
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }

    #[test]
    fn matches_permutation_oracle_on_tank() {
        let sys = tank_system();
        let direct = shapley(&sys, &tank_utility).unwrap();
        let oracle = shapley_by_permutations(&sys, &tank_utility);
        for (id, phi) in &direct {
            assert!((phi - oracle[id]).abs() < 1e-9, "{id}: {phi} vs {}", oracle[id]);
        }
    }

    #[test]
    fn symmetric_components_get_equal_values() {
        let sys = system_of(&[2, 2]);
        let sym = |a: &[usize]| (a[0] + a[1]) as f64 * 3.0 + if a[0] * a[1] == 1 { 5.0 } else { 0.0 };
        let phi = shapley(&sys, &sym).unwrap();
        assert!((phi[&ComponentId(1)] - phi[&ComponentId(2)]).abs() < 1e-12);
    }

    #[test]
    fn dummy_component_gets_zero() {
        let sys = system_of(&[2, 3, 2]);
        let ignores_middle = |a: &[usize]| (a[0] * 2 + a[2]) as f64;
        let phi = shapley(&sys, &ignores_middle).unwrap();
        assert!(phi[&ComponentId(2)].abs() < 1e-12, "dummy phi {}", phi[&ComponentId(2)]);
    }

    #[test]
    fn degenerate_normal_share_is_an_error() {
        let sys = system_of(&[2, 2]);
        // Utility depends only on c2: c1 is a Shapley dummy. Attacking c2
        // leaves only the dummy normal, so shares are undefined.
        let only_c2 = |a: &[usize]| a[1] as f64;
        let abnormal: BTreeSet<_> = [ComponentId(2)].into_iter().collect();
        let err =
            PayoffTable::build(&sys, &abnormal, &only_c2, AttackerPayoff::ZeroSum).unwrap_err();
        assert!(err.to_string().contains("degenerate"), "{err}");
    }

    #[test]
    fn all_components_abnormal_is_an_error() {
        let sys = system_of(&[2, 2]);
        let abnormal: BTreeSet<_> = [ComponentId(1), ComponentId(2)].into_iter().collect();
        let err =
            PayoffTable::build(&sys, &abnormal, &two_by_two, AttackerPayoff::ZeroSum).unwrap_err();
        assert!(err.to_string().contains("no normal"), "{err}");
    }

    #[test]
    fn leaf_payoffs_follow_the_three_conditions() {
        let sys = tank_system();
        let abnormal: BTreeSet<_> = [ComponentId(2)].into_iter().collect();
        let table =
            PayoffTable::build(&sys, &abnormal, &tank_utility, AttackerPayoff::ZeroSum).unwrap();
        // Normal shares: valve 10/18.125, indicator 8.125/18.125 of u0.
        let com: BTreeSet<_> = [ComponentId(2)].into_iter().collect();
        let at_com = table.payoffs(-30.0, &com);
        assert!((at_com[0] - -30.0 * (10.0 / 18.125)).abs() < 1e-12);
        assert!((at_com[1] - 30.0).abs() < 1e-12, "compromised pump takes the loss");
        assert!((at_com[2] - -30.0 * (8.125 / 18.125)).abs() < 1e-12);
        // Cooperating abnormal component: u0 / |normal|.
        let at_coo = table.payoffs(30.0, &BTreeSet::new());
        assert!((at_coo[1] - 15.0).abs() < 1e-12, "cooperating pump gets u0/2");
        // Normal payoffs always sum to u0.
        let normal_sum: f64 = at_com[0] + at_com[2];
        assert!((normal_sum - -30.0).abs() < 1e-12);
    }

    #[test]
    fn loss_share_attacker_payoff() {
        let sys = tank_system();
        let abnormal: BTreeSet<_> = [ComponentId(2)].into_iter().collect();
        let table = PayoffTable::build(
            &sys,
            &abnormal,
            &tank_utility,
            AttackerPayoff::LossShare { max_utility: 30.0 },
        )
        .unwrap();
        let com: BTreeSet<_> = [ComponentId(2)].into_iter().collect();
        let payoffs = table.payoffs(-15.0, &com);
        assert!((payoffs[1] - 45.0).abs() < 1e-12, "(30 - -15)/1 = 45, got {}", payoffs[1]);
    }

    #[test]
    fn oversized_systems_are_rejected() {
        let sys = system_of(&[2; 11]);
        let err = shapley(&sys, &|_: &[usize]| 0.0).unwrap_err();
        assert!(err.to_string().contains("replace groups"), "{err}");
    }

    proptest! {
        #[test]
        fn efficiency_and_scaling(cells in proptest::collection::vec(-50.0f64..50.0, 8), c in 0.1f64..4.0) {
            let sys = system_of(&[2, 2, 2]);
            let u = |a: &[usize]| cells[a[0] * 4 + a[1] * 2 + a[2]];
            let v = coalition_values(&sys, &u).unwrap();
            let phi = shapley(&sys, &u).unwrap();
            let total: f64 = phi.values().sum();
            prop_assert!((total - (v[7] - v[0])).abs() < 1e-9);
            let scaled = |a: &[usize]| c * cells[a[0] * 4 + a[1] * 2 + a[2]];
            let phi_scaled = shapley(&sys, &scaled).unwrap();
            for (id, p) in &phi {
                prop_assert!((c * p - phi_scaled[id]).abs() < 1e-9);
            }
        }

        #[test]
        fn normal_payoffs_partition_u0(cells in proptest::collection::vec(-50.0f64..50.0, 8), u0 in -40.0f64..40.0) {
            let sys = system_of(&[2, 2, 2]);
            let u = |a: &[usize]| cells[a[0] * 4 + a[1] * 2 + a[2]];
            let abnormal: BTreeSet<_> = [ComponentId(3)].into_iter().collect();
            if let Ok(table) = PayoffTable::build(&sys, &abnormal, &u, AttackerPayoff::ZeroSum) {
                let payoffs = table.payoffs(u0, &BTreeSet::new());
                prop_assert!((payoffs[0] + payoffs[1] - u0).abs() < 1e-9);
            }
        }
    }
}
