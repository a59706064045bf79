//! Numeric tolerances shared across modules and tests.
//!
//! Every comparison against an ideal mathematical identity goes through one
//! of these constants so that tests and production code cannot drift apart.

/// Scenario probabilities must sum to 1 within this absolute slack.
pub const PROBABILITY_SUM: f64 = 1e-9;

/// Assignment rows (total routed fraction per demand pair) must equal 1
/// within this absolute slack.
pub const ASSIGNMENT_ROW: f64 = 1e-6;

/// Relative slack for objective = flow_cost + setup_cost bookkeeping.
pub const OBJECTIVE_CONSISTENCY: f64 = 1e-6;

/// Primal feasibility slack for simplex results, relative to 1 + max |rhs|.
pub const LP_FEASIBILITY: f64 = 1e-7;

/// Entries smaller than this never serve as pivots.
pub const LP_PIVOT: f64 = 1e-9;

/// Absolute slack on complementary slackness residuals.
pub const COMPLEMENTARY_SLACKNESS: f64 = 1e-6;

/// Duality gap slack, relative to 1 + |objective value|.
pub const DUALITY_GAP: f64 = 1e-6;

/// Regrets may undershoot zero by at most this, relative to 1 + |Z*|.
pub const REGRET_NONNEGATIVITY: f64 = 1e-6;

/// Allocation fractions below this are treated as zero when a plan is built.
pub const FRACTION_CUTOFF: f64 = 1e-9;
