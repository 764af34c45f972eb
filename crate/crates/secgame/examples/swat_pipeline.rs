//! The full pipeline on the water-treatment testbed: load an architecture
//! description, apply an attack, refine the architecture, derive the order
//! of play, and (on a desk-scale slice) compile and solve the game.
//!
//! The full six-stage testbed has eleven components; refinement drops the
//! report-only sensors and collapses the redundant pump pairs, leaving an
//! eight-player game. That game is still far too large to enumerate, which
//! is exactly why the knowledge base precomputes policies offline. The
//! two-component inlet slice at the end runs the whole pipeline online.

use secgame::efg::{fmt_decimal, serialize_efg};
use secgame::game::{order_of_play, PlayEntry};
use secgame::scenarios::{make_scenario, policy_string, swat_config};
use secgame::system::{apply_attack, load_spec, refine_architecture};
use secgame::Result;

fn main() -> Result<()> {
    // 1. Load the architecture description.
    let spec = load_spec(swat_config())?;
    println!("== architecture ==");
    println!(
        "{} components, {} influence edges, {} quality attributes",
        spec.system.components.len(),
        spec.system.edges.len(),
        spec.system.quality.len()
    );
    for c in &spec.system.components {
        println!(
            "  {:>2} {:<7} actions [{}]{}{}",
            c.id,
            c.name,
            c.actions.join(", "),
            if c.runtime { "" } else { "  (report-only)" },
            c.replace_group
                .as_deref()
                .map(|g| format!("  (replace group {g})"))
                .unwrap_or_default()
        );
    }

    // 2. Apply the pump attack.
    let attack = spec.attack("A-P1")?;
    println!("\n== attack {} ==", attack.id);
    println!("{}; objectives: {}", attack.description, attack.objectives.join(", "));
    let attacked = apply_attack(&spec.system, attack, &attack.capability)?;
    println!(
        "abnormal components: {:?}",
        attacked.abnormal.iter().map(|id| id.to_string()).collect::<Vec<_>>()
    );

    // 3. Refine: drop report-only components, collapse replace groups.
    let refined = refine_architecture(&attacked.system, &attacked.abnormal)?;
    println!("\n== refinement ==");
    println!(
        "{} components -> {} players",
        spec.system.components.len(),
        refined.system.components.len()
    );
    for (orig, rep) in &refined.representative {
        if orig != rep {
            println!("  {orig} now answered by {rep}");
        }
    }

    // 4. Order of play: influence edges topologically, nature immediately
    //    before each attacked component's own move.
    let refined_attack = apply_attack(&refined.system, attack, &refined.abnormal)?;
    println!("\n== order of play ==");
    let order = order_of_play(&refined_attack)?;
    let step = |e: &PlayEntry| match e {
        PlayEntry::Nature(id) => format!("nature({})", refined.system.component(*id).unwrap().name),
        PlayEntry::Move(id) => refined.system.component(*id).unwrap().name.clone(),
    };
    println!("  {}", order.iter().map(step).collect::<Vec<_>>().join(" -> "));

    // 5. Desk scale: the two-component inlet slice end to end.
    let scenario = make_scenario("swat-mini")?;
    println!("\n== {}: {} ==", scenario.name, scenario.description);
    let (game, solution) = scenario.solve_with_probs(&Default::default())?;
    println!(
        "game tree: {} nodes, {} terminals, {} pure profiles",
        game.nodes.len(),
        game.leaves().count(),
        game.profile_space()
    );
    for (player, name) in game.players.iter().zip(&game.player_names) {
        println!("  {name:>6}: {}", policy_string(&game, &solution.equilibrium.profile, *player)?);
    }
    println!(
        "expected system utility {} over {} equilibria",
        fmt_decimal(solution.equilibrium.system_utility),
        solution.equilibrium_count.unwrap_or(0)
    );

    // The compiled game in Gambit .efg form, ready for external tooling.
    println!("\n== {} as .efg ==", scenario.name);
    print!("{}", serialize_efg(&game));
    Ok(())
}
