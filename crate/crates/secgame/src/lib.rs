//! Game-theoretic security for component-based systems.
//!
//! This crate models a component-based software system under security attack,
//! compiles the attacked system into an extensive-form Bayesian game whose
//! payoffs are allocated by Shapley values, solves the game for pure
//! Bayesian-Nash equilibria, and uses the selected equilibrium as the
//! defensive policy of a self-adaptive (MAPE-K style) control loop.
//!
//! The crate is organized around runnable examples; each major capability has
//! one under `examples/`:
//!
//! | example              | shows                                                        |
//! |----------------------|--------------------------------------------------------------|
//! | `tank_policies`      | single-tank attack games, policy flips across probabilities  |
//! | `payoff_allocation`  | feature function + Shapley allocation on small systems       |
//! | `swat_pipeline`      | architecture refinement, order of play, mini water-treatment game |
//! | `znn_sweep`          | web-system sweep: server-compromise probabilities vs. load   |
//! | `routing_game`       | interdomain routing by dynamic programming vs. greedy        |
//! | `train_predictor`    | per-component compromise classifier training                  |
//! | `adaptation_loop`    | end-to-end batch replay: sense → predict → retrieve → enact   |
//!
//! Run one with `cargo run --example tank_policies`. The same functionality is
//! scriptable through the thin `secgame` binary (`secgame build|solve|sweep|
//! shapley|train|kb-build|kb-query|route|loop`).
//!
//! Module map:
//!
//! - [`system`] — components, architectures, attack models, refinement
//! - [`payoff`] — feature function, Shapley values, payoff tables
//! - [`game`] — play order, game-tree construction, traversal
//! - [`efg`] — Gambit extensive-form (.efg) serialization and parsing
//! - [`solver`] — pure-equilibrium enumeration, backward induction, selection
//! - [`predictor`] — compromise-probability classifier (monitor/analyze)
//! - [`kb`] — knowledge base of precomputed defensive policies (plan)
//! - [`routing`] — interdomain routing game with per-node subgames
//! - [`scenarios`] — shipped case studies (tank, web system, routing, SWaT)
//! - [`cli`] — command implementations behind the `secgame` binary

pub mod cli;
pub mod efg;
pub mod game;
pub mod kb;
pub mod payoff;
pub mod predictor;
pub mod routing;
pub mod scenarios;
pub mod solver;
pub mod system;
pub mod tolerances;

mod error;

pub use error::{Error, Result};
