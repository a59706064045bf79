//! Optimal routing for a fixed hub set.
//!
//! The routing LP works on first-hub fractions `z[pair][hub]` rather than
//! the full four-index routing variable: capacity is consumed at the first
//! hub only, so after [`crate::costs::reduce`] has picked the cheapest
//! second hub pointwise, both formulations have the same optimal value and
//! a `z` solution expands to a full routing plan. Every demand pair that is
//! positive in any scenario must be routed completely (its fractions sum to
//! one); capacity rows are enforced per hub and per demand scenario.

use thiserror::Error;

use crate::costs::{self, CostError, CostOracle};
use crate::model::{AllocationPlan, HubSet, Instance, RouteAssignment, SolveStatus, SquareMatrix};
use crate::simplex::{self, LpProblem, LpStatus, RowSense};
use crate::tolerances;

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("routing subproblem failed: {0}")]
    Lp(#[from] simplex::LpError),
    #[error("demand matrix is {got}x{got}, expected {expected}x{expected}")]
    DemandShape { got: usize, expected: usize },
    #[error("routing subproblem reported unbounded, which its assignment rows rule out")]
    UnboundedRouting,
}

/// Routing outcome for one hub set. `flow_cost` is `inf` and the plan empty
/// when the demand cannot be packed into the open capacities.
#[derive(Clone, Debug)]
pub struct AllocationResult {
    pub status: SolveStatus,
    pub plan: AllocationPlan,
    pub flow_cost: f64,
    /// Demand routed through each node as a first hub, one row per demand
    /// scenario that was enforced (a single row for single-matrix solves).
    pub hub_loads: Vec<Vec<f64>>,
}

/// Routes one demand matrix through the open hubs at minimum cost.
pub fn solve_allocation(
    instance: &Instance,
    hub_set: &HubSet,
    demand: &SquareMatrix,
) -> Result<AllocationResult, AllocationError> {
    solve_allocation_with(&CostOracle::new(instance), hub_set, Scenarios::Single(demand))
}

/// Routes the instance's demand scenarios through the open hubs, minimizing
/// probability-weighted cost while respecting capacity in every scenario.
pub fn solve_allocation_multi(
    instance: &Instance,
    hub_set: &HubSet,
) -> Result<AllocationResult, AllocationError> {
    solve_allocation_with(&CostOracle::new(instance), hub_set, Scenarios::FromInstance)
}

pub(crate) enum Scenarios<'a> {
    Single(&'a SquareMatrix),
    FromInstance,
}

pub(crate) fn solve_allocation_with(
    oracle: &CostOracle,
    hub_set: &HubSet,
    scenarios: Scenarios,
) -> Result<AllocationResult, AllocationError> {
    let instance = oracle.instance();
    let n = instance.node_count();

    // (probability-like weight, demand matrix) per enforced scenario.
    let weighted: Vec<(f64, &SquareMatrix)> = match scenarios {
        Scenarios::Single(demand) => {
            if demand.n() != n {
                return Err(AllocationError::DemandShape { got: demand.n(), expected: n });
            }
            vec![(1.0, demand)]
        }
        Scenarios::FromInstance => instance
            .demand_scenarios
            .iter()
            .map(|s| (s.probability, &s.demand))
            .collect(),
    };
    let s_count = weighted.len();

    let red = costs::reduce_with(oracle, hub_set)?;
    let hubs = red.hubs().to_vec();
    let h = hubs.len();

    // Pairs that must be routed: positive demand in any scenario.
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new(); // (i, j, weighted demand)
    for i in 0..n {
        for j in 0..n {
            let any = weighted.iter().any(|(_, w)| w.get(i, j) > 0.0);
            if any {
                let wbar: f64 = weighted.iter().map(|(p, w)| p * w.get(i, j)).sum();
                pairs.push((i, j, wbar));
            }
        }
    }

    if pairs.is_empty() {
        return Ok(AllocationResult {
            status: SolveStatus::Optimal,
            plan: AllocationPlan::empty(),
            flow_cost: 0.0,
            hub_loads: vec![vec![0.0; n]; s_count],
        });
    }

    // Variables are pair-major: z[p * h + t] routes pair p via hubs[t].
    let nv = pairs.len() * h;
    let mut objective = vec![0.0; nv];
    for (p, &(i, j, wbar)) in pairs.iter().enumerate() {
        for (t, &k) in hubs.iter().enumerate() {
            objective[p * h + t] = wbar * red.cost(i, j, k);
        }
    }
    let mut lp = LpProblem::minimize(objective);
    for p in 0..pairs.len() {
        let mut row = vec![0.0; nv];
        for t in 0..h {
            row[p * h + t] = 1.0;
        }
        lp.add_row(row, RowSense::Eq, 1.0);
    }
    for (t, &k) in hubs.iter().enumerate() {
        for (_, demand) in &weighted {
            let mut row = vec![0.0; nv];
            for (p, &(i, j, _)) in pairs.iter().enumerate() {
                row[p * h + t] = demand.get(i, j);
            }
            lp.add_row(row, RowSense::Le, instance.capacities[k]);
        }
    }

    let result = simplex::solve_lp(&lp)?;
    match result.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(AllocationResult {
                status: SolveStatus::Infeasible,
                plan: AllocationPlan::empty(),
                flow_cost: f64::INFINITY,
                hub_loads: vec![vec![0.0; n]; s_count],
            })
        }
        LpStatus::Unbounded => return Err(AllocationError::UnboundedRouting),
    }

    let mut plan = AllocationPlan::empty();
    let mut hub_loads = vec![vec![0.0; n]; s_count];
    for (p, &(i, j, _)) in pairs.iter().enumerate() {
        for (t, &k) in hubs.iter().enumerate() {
            let fraction = result.primal[p * h + t];
            if fraction > tolerances::FRACTION_CUTOFF {
                plan.routes.push(RouteAssignment {
                    origin: i,
                    dest: j,
                    first_hub: k,
                    second_hub: red.second_hub(i, j, k),
                    fraction,
                });
                for (s, (_, demand)) in weighted.iter().enumerate() {
                    hub_loads[s][k] += fraction * demand.get(i, j);
                }
            }
        }
    }

    Ok(AllocationResult {
        status: SolveStatus::Optimal,
        plan,
        flow_cost: result.value,
        hub_loads,
    })
}

/// The sparse nonzero support of the four-index routing variable. An entry
/// with fraction `f` means `x[origin][dest][first_hub][second_hub] = f`;
/// all quadruples not listed are zero.
pub fn expand_plan(plan: &AllocationPlan) -> Vec<RouteAssignment> {
    plan.routes.clone()
}

/// Reprices a plan against a demand matrix from first principles, without
/// the reduced-cost shortcut. Used to cross-check solver flow costs.
pub fn plan_flow_cost(instance: &Instance, plan: &AllocationPlan, demand: &SquareMatrix) -> f64 {
    plan.routes
        .iter()
        .map(|r| {
            r.fraction
                * demand.get(r.origin, r.dest)
                * costs::unit_cost(instance, r.origin, r.dest, r.first_hub, r.second_hub)
        })
        .sum()
}
