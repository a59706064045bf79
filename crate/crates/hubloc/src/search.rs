//! Exhaustive hub set search for the three solver modes.
//!
//! Instances are small enough (at most 20 nodes) that every nonempty node
//! subset can be enumerated. Subsets are visited in lexicographic order of
//! their sorted index vectors, and all tie-breaking follows that order, so
//! results are reproducible run to run even though candidate evaluation is
//! parallel.
//!
//! Two prunes keep the enumeration fast without touching optimality:
//!
//! * capacity: a subset whose total capacity is below the demand it must
//!   carry can be skipped before solving its LP,
//! * incumbent: a subset whose setup cost plus a global flow lower bound
//!   already exceeds the best objective seen is skipped. Only strictly
//!   worse candidates are skipped, so ties survive and the lexicographic
//!   tie-break is unaffected by thread timing.
//!
//! The minimax regret solver relies on the regret decomposition: the flow
//! term of a hub set's regret is the same for every setup scenario, so one
//! flow evaluation per candidate feeds both the per-scenario reference
//! optima and the regret scan. Incumbent pruning is disabled there because
//! every feasible candidate participates in the reference optima.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::allocation::{self, AllocationError, Scenarios};
use crate::costs::CostOracle;
use crate::model::{HubSet, Instance, Solution, SolveStatus, SquareMatrix};

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Refuse instances with more nodes than this.
    pub max_nodes_exhaustive: usize,
    /// Enables the capacity and incumbent prunes. Results are identical
    /// either way; disabling is for verification.
    pub enable_pruning: bool,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_nodes_exhaustive: 20, enable_pruning: true, time_limit: None }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("instance has {nodes} nodes, above the exhaustive search cap of {limit}")]
    TooManyNodes { nodes: usize, limit: usize },
    #[error("setup scenario {index} out of range: instance has {count}")]
    ScenarioOutOfRange { index: usize, count: usize },
    #[error("setup cost vector has {got} entries, expected {expected}")]
    SetupShape { got: usize, expected: usize },
    #[error(
        "no hub set can carry demand scenario {demand_scenario}: it needs {required} \
         but all nodes together provide {available}"
    )]
    NoFeasibleHubSet { demand_scenario: usize, required: f64, available: f64 },
    #[error("time limit exceeded after evaluating {evaluated} hub sets")]
    TimeLimit { evaluated: usize },
    #[error(transparent)]
    Allocation(#[from] AllocationError),
}

/// Lexicographic enumerator over nonempty hub sets, optionally skipping
/// subsets whose total capacity is below `required_capacity`.
pub struct HubSetIter<'a> {
    n: usize,
    capacities: &'a [f64],
    required_capacity: f64,
    stack: Vec<usize>,
    done: bool,
}

impl<'a> HubSetIter<'a> {
    fn new(capacities: &'a [f64], required_capacity: f64) -> Self {
        let n = capacities.len();
        HubSetIter { n, capacities, required_capacity, stack: vec![0], done: n == 0 }
    }

    fn advance(&mut self) {
        // Successor in lexicographic order: extend if possible, otherwise
        // backtrack and bump.
        let last = *self.stack.last().unwrap();
        if last + 1 < self.n {
            self.stack.push(last + 1);
            return;
        }
        loop {
            self.stack.pop();
            match self.stack.last_mut() {
                None => {
                    self.done = true;
                    return;
                }
                Some(tail) => {
                    *tail += 1;
                    if *tail < self.n {
                        return;
                    }
                }
            }
        }
    }
}

impl Iterator for HubSetIter<'_> {
    type Item = HubSet;

    fn next(&mut self) -> Option<HubSet> {
        loop {
            if self.done {
                return None;
            }
            let capacity: f64 = self.stack.iter().map(|&k| self.capacities[k]).sum();
            let keep = capacity >= self.required_capacity;
            let item = keep.then(|| HubSet::from_indices(self.n, &self.stack));
            self.advance();
            if let Some(h) = item {
                return Some(h);
            }
        }
    }
}

/// All candidate hub sets in lexicographic order. With pruning enabled,
/// subsets that cannot carry the largest demand scenario are skipped; they
/// could never be feasible in any solver mode.
pub fn enumerate_hub_sets<'a>(
    instance: &'a Instance,
    config: &SearchConfig,
) -> Result<HubSetIter<'a>, SearchError> {
    let required = if config.enable_pruning { instance.max_scenario_demand_total() } else { 0.0 };
    candidate_iter(instance, config, required)
}

fn candidate_iter<'a>(
    instance: &'a Instance,
    config: &SearchConfig,
    required_capacity: f64,
) -> Result<HubSetIter<'a>, SearchError> {
    let n = instance.node_count();
    if n > config.max_nodes_exhaustive {
        return Err(SearchError::TooManyNodes { nodes: n, limit: config.max_nodes_exhaustive });
    }
    Ok(HubSetIter::new(&instance.capacities, required_capacity))
}

/// Nonnegative incumbent shared across worker threads as raw f64 bits
/// (order-preserving for nonnegative floats).
struct Incumbent(AtomicU64);

impl Incumbent {
    fn new() -> Self {
        Incumbent(AtomicU64::new(f64::INFINITY.to_bits()))
    }

    fn observe(&self, value: f64) {
        debug_assert!(value >= 0.0);
        self.0.fetch_min(value.to_bits(), Ordering::Relaxed);
    }

    fn current(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }
}

struct Deadline {
    at: Option<Instant>,
    tripped: AtomicBool,
}

impl Deadline {
    fn new(limit: Option<Duration>) -> Self {
        Deadline { at: limit.map(|d| Instant::now() + d), tripped: AtomicBool::new(false) }
    }

    /// True once the deadline has passed; sticky across threads.
    fn exceeded(&self) -> bool {
        if self.tripped.load(Ordering::Relaxed) {
            return true;
        }
        match self.at {
            Some(at) if Instant::now() > at => {
                self.tripped.store(true, Ordering::Relaxed);
                true
            }
            _ => false,
        }
    }
}

#[derive(Clone)]
struct Candidate {
    objective: f64,
    indices: Vec<usize>,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.objective < b.objective || (a.objective == b.objective && a.indices < b.indices)
}

/// Probability-weighted cost of routing every pair through its globally
/// cheapest hub pair: a lower bound on any hub set's flow cost.
fn flow_lower_bound(oracle: &CostOracle, weighted: &[(f64, &SquareMatrix)]) -> f64 {
    let n = oracle.instance().node_count();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let wbar: f64 = weighted.iter().map(|(p, w)| p * w.get(i, j)).sum();
            if wbar <= 0.0 {
                continue;
            }
            let mut best = f64::INFINITY;
            for k in 0..n {
                for m in 0..n {
                    best = best.min(oracle.unit_cost(i, j, k, m));
                }
            }
            total += wbar * best;
        }
    }
    total
}

/// Minimizes flow + setup over the candidates. Returns `None` if no
/// candidate is feasible.
fn minimize_cost(
    oracle: &CostOracle,
    candidates: Vec<HubSet>,
    setup: &[f64],
    config: &SearchConfig,
    single_demand: Option<&SquareMatrix>,
    lower_bound: f64,
) -> Result<Option<Candidate>, SearchError> {
    let incumbent = Incumbent::new();
    let deadline = Deadline::new(config.time_limit);
    let evaluated = AtomicUsize::new(0);

    let best = candidates
        .into_par_iter()
        .map(|hs| -> Result<Option<Candidate>, SearchError> {
            if deadline.exceeded() {
                return Ok(None);
            }
            let setup_cost = hs.setup_cost(setup);
            if config.enable_pruning && setup_cost + lower_bound > incumbent.current() {
                return Ok(None);
            }
            let scenarios = match single_demand {
                Some(demand) => Scenarios::Single(demand),
                None => Scenarios::FromInstance,
            };
            let alloc = allocation::solve_allocation_with(oracle, &hs, scenarios)?;
            evaluated.fetch_add(1, Ordering::Relaxed);
            if alloc.status == SolveStatus::Infeasible {
                return Ok(None);
            }
            let objective = alloc.flow_cost + setup_cost;
            incumbent.observe(objective);
            Ok(Some(Candidate { objective, indices: hs.indices() }))
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
                    (Some(a), None) => Some(a),
                    (None, b) => b,
                })
            },
        )?;

    if deadline.exceeded() {
        return Err(SearchError::TimeLimit { evaluated: evaluated.load(Ordering::Relaxed) });
    }
    Ok(best)
}

fn finish_solution(
    oracle: &CostOracle,
    winner: Candidate,
    setup: &[f64],
    single_demand: Option<&SquareMatrix>,
) -> Result<Solution, SearchError> {
    let n = oracle.instance().node_count();
    let hub_set = HubSet::from_indices(n, &winner.indices);
    let scenarios = match single_demand {
        Some(demand) => Scenarios::Single(demand),
        None => Scenarios::FromInstance,
    };
    let alloc = allocation::solve_allocation_with(oracle, &hub_set, scenarios)?;
    let setup_cost = hub_set.setup_cost(setup);
    Ok(Solution {
        hub_set,
        allocation: alloc.plan,
        flow_cost: alloc.flow_cost,
        setup_cost,
        objective: alloc.flow_cost + setup_cost,
        per_scenario_regret: None,
        max_regret: None,
        status: SolveStatus::Optimal,
    })
}

/// Minimum-cost hub set for one demand matrix and one setup cost vector.
/// Returns an infeasible solution when no subset can carry the demand.
pub fn solve_deterministic(
    instance: &Instance,
    demand: &SquareMatrix,
    setup: &[f64],
    config: &SearchConfig,
) -> Result<Solution, SearchError> {
    let n = instance.node_count();
    if demand.n() != n {
        return Err(AllocationError::DemandShape { got: demand.n(), expected: n }.into());
    }
    if setup.len() != n {
        return Err(SearchError::SetupShape { got: setup.len(), expected: n });
    }
    let oracle = CostOracle::new(instance);
    let required = if config.enable_pruning { demand.total() } else { 0.0 };
    let candidates: Vec<HubSet> = candidate_iter(instance, config, required)?.collect();
    let lower = flow_lower_bound(&oracle, &[(1.0, demand)]);
    match minimize_cost(&oracle, candidates, setup, config, Some(demand), lower)? {
        Some(winner) => finish_solution(&oracle, winner, setup, Some(demand)),
        None => Ok(Solution::infeasible(n)),
    }
}

/// Minimum expected-flow-plus-setup hub set for one setup scenario
/// (0-based), with capacity enforced in every demand scenario.
pub fn solve_scenario(
    instance: &Instance,
    setup_scenario: usize,
    config: &SearchConfig,
) -> Result<Solution, SearchError> {
    let count = instance.setup_scenario_count();
    if setup_scenario >= count {
        return Err(SearchError::ScenarioOutOfRange { index: setup_scenario + 1, count });
    }
    let setup = &instance.setup_scenarios[setup_scenario];
    let oracle = CostOracle::new(instance);
    let required = if config.enable_pruning { instance.max_scenario_demand_total() } else { 0.0 };
    let candidates: Vec<HubSet> = candidate_iter(instance, config, required)?.collect();
    let weighted: Vec<(f64, &SquareMatrix)> =
        instance.demand_scenarios.iter().map(|s| (s.probability, &s.demand)).collect();
    let lower = flow_lower_bound(&oracle, &weighted);
    match minimize_cost(&oracle, candidates, setup, config, None, lower)? {
        Some(winner) => finish_solution(&oracle, winner, setup, None),
        None => Ok(Solution::infeasible(instance.node_count())),
    }
}

/// Regret bookkeeping for one setup scenario: the best achievable cost
/// `z_star`, the chosen hub set's setup cost there, and its regret.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretEntry {
    pub z_star: f64,
    pub setup_cost: f64,
    pub regret: f64,
}

#[derive(Clone, Debug)]
pub struct RegretReport {
    pub entries: Vec<RegretEntry>,
    pub max_regret: f64,
    pub solution: Solution,
}

/// Hub set minimizing the worst regret over all setup scenarios.
///
/// One expected-flow evaluation per feasible candidate feeds both the
/// per-scenario reference optima and the regret of every candidate; regrets
/// are exactly nonnegative because each reference optimum is a minimum over
/// the same evaluated values.
pub fn solve_minimax_regret(
    instance: &Instance,
    config: &SearchConfig,
) -> Result<RegretReport, SearchError> {
    let oracle = CostOracle::new(instance);
    let required = if config.enable_pruning { instance.max_scenario_demand_total() } else { 0.0 };
    let candidates: Vec<HubSet> = candidate_iter(instance, config, required)?.collect();
    let deadline = Deadline::new(config.time_limit);

    // Flow map in candidate order; None marks an infeasible candidate.
    let flows: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|hs| -> Result<Option<f64>, SearchError> {
            if deadline.exceeded() {
                return Ok(None);
            }
            let alloc = allocation::solve_allocation_with(&oracle, hs, Scenarios::FromInstance)?;
            Ok((alloc.status == SolveStatus::Optimal).then_some(alloc.flow_cost))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if deadline.exceeded() {
        return Err(SearchError::TimeLimit { evaluated: flows.iter().flatten().count() });
    }

    let feasible: Vec<(usize, f64)> = flows
        .iter()
        .enumerate()
        .filter_map(|(idx, flow)| flow.map(|f| (idx, f)))
        .collect();
    if feasible.is_empty() {
        let (scenario, required) = instance
            .demand_scenarios
            .iter()
            .enumerate()
            .map(|(s, d)| (s, d.demand.total()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0));
        return Err(SearchError::NoFeasibleHubSet {
            demand_scenario: scenario + 1,
            required,
            available: instance.capacities.iter().sum(),
        });
    }

    let scenario_count = instance.setup_scenario_count();
    let mut z_star = vec![f64::INFINITY; scenario_count];
    for &(idx, flow) in &feasible {
        for (s, setup) in instance.setup_scenarios.iter().enumerate() {
            let value = flow + candidates[idx].setup_cost(setup);
            if value < z_star[s] {
                z_star[s] = value;
            }
        }
    }

    let mut winner: Option<(f64, usize)> = None; // (max regret, feasible idx)
    for &(idx, flow) in &feasible {
        let mut worst = f64::NEG_INFINITY;
        for (s, setup) in instance.setup_scenarios.iter().enumerate() {
            let regret = flow + candidates[idx].setup_cost(setup) - z_star[s];
            worst = worst.max(regret);
        }
        // Candidates arrive in lexicographic order, so a strict comparison
        // keeps the lexicographically smallest among ties.
        if winner.map_or(true, |(best, _)| worst < best) {
            winner = Some((worst, idx));
        }
    }
    let (max_regret, winner_idx) = winner.unwrap();
    let hub_set = candidates[winner_idx].clone();

    let alloc = allocation::solve_allocation_with(&oracle, &hub_set, Scenarios::FromInstance)?;
    let flow = alloc.flow_cost;
    let entries: Vec<RegretEntry> = instance
        .setup_scenarios
        .iter()
        .enumerate()
        .map(|(s, setup)| {
            let setup_cost = hub_set.setup_cost(setup);
            RegretEntry { z_star: z_star[s], setup_cost, regret: flow + setup_cost - z_star[s] }
        })
        .collect();
    let binding = entries
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.regret.total_cmp(&b.1.regret).then(b.0.cmp(&a.0)))
        .map(|(s, _)| s)
        .unwrap();

    let solution = Solution {
        hub_set,
        allocation: alloc.plan,
        flow_cost: flow,
        setup_cost: entries[binding].setup_cost,
        objective: flow + entries[binding].setup_cost,
        per_scenario_regret: Some(entries.iter().map(|e| e.regret).collect()),
        max_regret: Some(max_regret),
        status: SolveStatus::Optimal,
    };
    Ok(RegretReport { entries, max_regret, solution })
}
