//! The feature function and Shapley allocation on small systems.
//!
//! A coalition's feature value is the expected system utility when its
//! members coordinate on the best joint action while everyone outside the
//! coalition acts uniformly at random. The Shapley value of a component is
//! its average marginal contribution over all join orders; it is the
//! credit the game pays the component for keeping the system working.

use std::collections::BTreeSet;

use secgame::efg::fmt_decimal;
use secgame::payoff::feature_value;
use secgame::scenarios::make_scenario;
use secgame::system::ComponentId;
use secgame::Result;

fn main() -> Result<()> {
    // The two-component water-inlet slice: every coalition spelled out.
    let scenario = make_scenario("swat-mini")?;
    let system = &scenario.refined.system;
    let utility = scenario.utility.clone();
    println!("== {}: feature function ==", scenario.name);
    let ids = system.ids();
    for members in subsets(&ids) {
        let names: Vec<&str> = members
            .iter()
            .map(|id| system.component(*id).expect("member").name.as_str())
            .collect();
        let label = if names.is_empty() { "{}".to_string() } else { format!("{{{}}}", names.join(", ")) };
        println!(
            "  v({label:<14}) = {}",
            fmt_decimal(feature_value(system, &*utility, &members)?)
        );
    }

    println!("\n== Shapley allocation per scenario ==");
    for name in ["swat-mini", "tank-a1", "znn"] {
        let scenario = make_scenario(name)?;
        let table = scenario.payoff_table()?;
        println!("{name}:");
        let mut total = 0.0;
        for c in &scenario.refined.system.components {
            let phi = table.shapley[&c.id];
            total += phi;
            let role = if scenario.refined.abnormal.contains(&c.id) {
                "attacked; paid by the attacker scheme"
            } else {
                "normal; shares the system utility"
            };
            let share = table
                .normal_share
                .get(&c.id)
                .map(|s| format!(", share {}", fmt_decimal(*s)))
                .unwrap_or_default();
            println!("  {:<14} phi = {:>8}{share}  ({role})", c.name, fmt_decimal(phi));
        }
        let empty = feature_value(
            &scenario.refined.system,
            &*scenario.utility,
            &BTreeSet::new(),
        )?;
        let grand = feature_value(
            &scenario.refined.system,
            &*scenario.utility,
            &scenario.refined.system.ids().into_iter().collect(),
        )?;
        println!(
            "  efficiency: sum(phi) = {} = v(all) - v(none) = {} - {}",
            fmt_decimal(total),
            fmt_decimal(grand),
            fmt_decimal(empty)
        );
        assert!((total - (grand - empty)).abs() < 1e-9);
    }

    println!("\nAt the terminals of the compiled game, each normal component's");
    println!("payoff is its share of the realized system utility; the attacked");
    println!("component is scored by the attacker payoff scheme instead (zero-sum");
    println!("against the system, or a share of the shortfall from the maximum).");
    Ok(())
}

fn subsets(ids: &[ComponentId]) -> Vec<BTreeSet<ComponentId>> {
    let mut out = Vec::with_capacity(1 << ids.len());
    for mask in 0u32..(1 << ids.len()) {
        out.push(
            ids.iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, id)| *id)
                .collect(),
        );
    }
    out
}
