//! The web-system case: a load balancer spreading requests over three
//! servers, two of which may be compromised into discarding traffic.
//!
//! Sweeping the two compromise probabilities shows how the defense moves
//! load away from the suspect servers, and what that caution costs when
//! the servers turn out to be honest.

use std::collections::BTreeMap;

use secgame::efg::fmt_decimal;
use secgame::scenarios::make_scenario;
use secgame::solver::solve;
use secgame::system::ComponentId;
use secgame::Result;

fn main() -> Result<()> {
    let scenario = make_scenario("znn")?;
    println!("== {}: {} ==", scenario.name, scenario.description);
    let game = scenario.game()?;
    println!(
        "game tree: {} nodes, {} terminals; the profile space is far past the",
        game.nodes.len(),
        game.leaves().count(),
    );
    println!("enumeration cap, so the solver falls back to exact backward induction.\n");

    let axes: Vec<ComponentId> = scenario.refined.abnormal.iter().copied().collect();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("expected system utility, rows P(server2 com), columns P(server3 com):");
    print!("{:>6}", "");
    for p4 in grid {
        print!("{:>9}", fmt_decimal(p4));
    }
    println!();
    for p3 in grid {
        print!("{:>6}", fmt_decimal(p3));
        for p4 in grid {
            let probs: BTreeMap<ComponentId, f64> = [(axes[0], p3), (axes[1], p4)].into();
            let solution = solve(&scenario.game_at(&probs)?)?;
            print!("{:>9.2}", solution.equilibrium.system_utility);
        }
        println!();
    }

    // How the balancer splits load at the corners: share sent to server 1,
    // the only server the attack cannot reach.
    println!("\nload on the trusted server (share of all requests):");
    for (p3, p4) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let probs: BTreeMap<ComponentId, f64> = [(axes[0], p3), (axes[1], p4)].into();
        let game = scenario.game_at(&probs)?;
        let solution = solve(&game)?;
        // The balancer moves first; its chosen branch label is "d1-d2-d3".
        let root = game.root();
        let action = solution.equilibrium.profile.action(root.infoset);
        let label = &root.branches[action].label;
        let d1: f64 = label.split('-').next().unwrap().parse().unwrap();
        println!(
            "  P(com) = ({}, {}): split {label}, trusted share {}",
            fmt_decimal(p3),
            fmt_decimal(p4),
            fmt_decimal(d1 / 100.0)
        );
    }

    println!("\nWith honest servers the load spreads almost evenly (the response");
    println!("reward is concave in load). As compromise becomes certain the");
    println!("balancer concentrates requests on the trusted server and accepts");
    println!("the congestion penalty, because discarded requests earn nothing.");
    Ok(())
}
