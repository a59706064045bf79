//! Exact solvers for the capacitated hub location problem with multiple
//! allocation under uncertain demand and uncertain hub setup cost.
//!
//! The library solves three related models over a common instance type:
//!
//! * a deterministic model for one demand matrix and one setup cost vector,
//! * a stochastic model that minimizes expected routing cost over weighted
//!   demand scenarios for a fixed setup cost scenario,
//! * a minimax regret model that picks the hub set whose worst regret over
//!   all setup cost scenarios is smallest.
//!
//! Hub sets are enumerated exhaustively (instances are capped at 20 nodes),
//! and the routing subproblem for a fixed hub set is a small linear program
//! solved by the dense two-phase simplex in [`simplex`]. [`analysis`] adds a
//! break-even comparison between committing to one hub set for a whole
//! planning horizon and re-configuring the network every season.

pub mod allocation;
pub mod analysis;
pub mod costs;
pub mod io;
pub mod model;
pub mod scenarios;
pub mod search;
pub mod simplex;
pub mod tolerances;

pub use model::{
    AllocationPlan, CostCoefficients, DemandScenario, HubSet, Instance, RouteAssignment,
    Solution, SolveStatus, SquareMatrix, Violation,
};
