//! Numeric tolerances shared across modules and tests.

/// Absolute tolerance for expected utilities, Shapley values and payoff
/// comparisons. A deviation must beat the incumbent by more than this to
/// disqualify an equilibrium.
pub const ABS: f64 = 1e-9;

/// Chance-branch probabilities at one node must sum to 1 within this bound.
pub const PROB_SUM: f64 = 1e-9;

/// Relative tolerance for the analytic-vs-central-difference gradient check.
pub const GRAD_REL: f64 = 1e-4;

/// Mixing weight of the uniform tremble used as an equilibrium-selection
/// tie-break (pins actions at information sets that are off-path).
pub const TREMBLE: f64 = 1e-3;
