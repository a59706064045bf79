//! Problem data and solution types shared by every solver mode.
//!
//! Conventions used throughout the crate:
//!
//! * node, scenario, and hub indices are 0-based in code,
//! * every `Display` impl and every serialized document shows them 1-based,
//! * demand flows from an origin row `i` to a destination column `j`.

use std::cmp::Ordering;
use std::fmt;

use crate::tolerances;

/// Dense square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    /// Builds from row vectors; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, String> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(format!("row {} has {} entries, expected {}", i + 1, row.len(), n));
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Entries as (row, column, value) triples, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(p, &v)| (p / n, p % n, v))
    }
}

/// Routing cost multipliers: `beta` on the collection leg, `alpha` on the
/// inter-hub leg, `delta` on the distribution leg.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

/// One demand matrix with its occurrence probability.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandScenario {
    pub probability: f64,
    pub demand: SquareMatrix,
}

/// A complete problem instance.
///
/// `setup_scenarios` carry no probabilities: the solvers treat them either
/// individually, averaged, or through their worst-case regret.
///
/// `origin` marks single-origin instances where all demand leaves one node.
/// For such instances the diagonal demand cell `[origin][origin]` may be
/// positive: it is demand for the origin's own location, and it still
/// consumes hub capacity, so dropping it would distort capacity checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub nodes: Vec<String>,
    pub distances: SquareMatrix,
    pub capacities: Vec<f64>,
    pub coefficients: CostCoefficients,
    pub demand_scenarios: Vec<DemandScenario>,
    pub setup_scenarios: Vec<Vec<f64>>,
    pub origin: Option<usize>,
}

/// A single validation failure, addressed 1-based for display.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl Instance {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn demand_scenario_count(&self) -> usize {
        self.demand_scenarios.len()
    }

    pub fn setup_scenario_count(&self) -> usize {
        self.setup_scenarios.len()
    }

    /// Probability-weighted demand matrix over all demand scenarios.
    pub fn expected_demand(&self) -> SquareMatrix {
        let n = self.node_count();
        let mut out = SquareMatrix::zeros(n);
        for scenario in &self.demand_scenarios {
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + scenario.probability * scenario.demand.get(i, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Arithmetic mean of the setup cost scenarios, per node.
    pub fn mean_setup_costs(&self) -> Vec<f64> {
        let n = self.node_count();
        let s = self.setup_scenarios.len() as f64;
        let mut out = vec![0.0; n];
        for scenario in &self.setup_scenarios {
            for (acc, &f) in out.iter_mut().zip(scenario) {
                *acc += f;
            }
        }
        for acc in &mut out {
            *acc /= s;
        }
        out
    }

    /// Largest total demand over the demand scenarios. A hub set whose open
    /// capacity is below this bound cannot serve every scenario.
    pub fn max_scenario_demand_total(&self) -> f64 {
        self.demand_scenarios
            .iter()
            .map(|s| s.demand.total())
            .fold(0.0, f64::max)
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.node_count();
        let mut push = |field: &str, message: String| {
            out.push(Violation { field: field.to_string(), message });
        };

        if n == 0 {
            push("nodes", "instance has no nodes".to_string());
            return out;
        }
        for (i, name) in self.nodes.iter().enumerate() {
            if name.trim().is_empty() {
                push("nodes", format!("node {} has an empty name", i + 1));
            }
            if self.nodes[..i].contains(name) {
                push("nodes", format!("duplicate node name '{name}'"));
            }
        }

        if self.distances.n() != n {
            push(
                "distances",
                format!("matrix is {}x{}, expected {n}x{n}", self.distances.n(), self.distances.n()),
            );
        } else {
            for (i, j, d) in self.distances.entries() {
                if !d.is_finite() || d < 0.0 {
                    push("distances", format!("entry ({},{}) is {}", i + 1, j + 1, d));
                }
                if i == j && d != 0.0 {
                    push("distances", format!("diagonal entry ({},{}) is {}, expected 0", i + 1, j + 1, d));
                }
                if i < j && self.distances.get(i, j) != self.distances.get(j, i) {
                    push(
                        "distances",
                        format!(
                            "asymmetric at ({},{}): {} vs {}",
                            i + 1,
                            j + 1,
                            self.distances.get(i, j),
                            self.distances.get(j, i)
                        ),
                    );
                }
            }
        }

        if self.capacities.len() != n {
            push("capacities", format!("{} entries, expected {n}", self.capacities.len()));
        }
        for (k, &cap) in self.capacities.iter().enumerate() {
            if !cap.is_finite() || cap <= 0.0 {
                push("capacities", format!("node {} has capacity {}, expected positive", k + 1, cap));
            }
        }

        for (name, v) in [
            ("alpha", self.coefficients.alpha),
            ("beta", self.coefficients.beta),
            ("delta", self.coefficients.delta),
        ] {
            if !v.is_finite() || v < 0.0 {
                push("coefficients", format!("{name} is {v}, expected nonnegative"));
            }
        }

        if let Some(o) = self.origin {
            if o >= n {
                push("origin", format!("index {} out of range 1..={n}", o + 1));
            }
        }

        if self.demand_scenarios.is_empty() {
            push("demand_scenarios", "at least one demand scenario is required".to_string());
        } else {
            let mut prob_sum = 0.0;
            for (s, scenario) in self.demand_scenarios.iter().enumerate() {
                if !scenario.probability.is_finite() || scenario.probability < 0.0 {
                    push(
                        "demand_scenarios",
                        format!("scenario {} has probability {}", s + 1, scenario.probability),
                    );
                }
                prob_sum += scenario.probability;
                if scenario.demand.n() != n {
                    push(
                        "demand_scenarios",
                        format!("scenario {} demand matrix is {0}x{0}, expected {n}x{n}", scenario.demand.n()),
                    );
                    continue;
                }
                for (i, j, w) in scenario.demand.entries() {
                    if !w.is_finite() || w < 0.0 {
                        push(
                            "demand_scenarios",
                            format!("scenario {} entry ({},{}) is {}", s + 1, i + 1, j + 1, w),
                        );
                    }
                    let origin_diag = self.origin == Some(i);
                    if i == j && w != 0.0 && !origin_diag {
                        push(
                            "demand_scenarios",
                            format!(
                                "scenario {} diagonal entry ({},{}) is {}, expected 0",
                                s + 1,
                                i + 1,
                                j + 1,
                                w
                            ),
                        );
                    }
                    if self.origin.is_some() && self.origin != Some(i) && w != 0.0 {
                        push(
                            "demand_scenarios",
                            format!(
                                "scenario {} has demand {} leaving node {}, but the origin is node {}",
                                s + 1,
                                w,
                                i + 1,
                                self.origin.unwrap() + 1
                            ),
                        );
                    }
                }
            }
            if (prob_sum - 1.0).abs() > tolerances::PROBABILITY_SUM {
                push("demand_scenarios", format!("probabilities sum to {prob_sum}, expected 1"));
            }
        }

        if self.setup_scenarios.is_empty() {
            push("setup_scenarios", "at least one setup cost scenario is required".to_string());
        }
        for (s, scenario) in self.setup_scenarios.iter().enumerate() {
            if scenario.len() != n {
                push(
                    "setup_scenarios",
                    format!("scenario {} has {} entries, expected {n}", s + 1, scenario.len()),
                );
                continue;
            }
            for (k, &f) in scenario.iter().enumerate() {
                if !f.is_finite() || f < 0.0 {
                    push(
                        "setup_scenarios",
                        format!("scenario {} node {} has setup cost {}", s + 1, k + 1, f),
                    );
                }
            }
        }

        out
    }
}

/// A subset of nodes opened as hubs.
///
/// Ordering is lexicographic on the sorted index vector, so `{1,3}` sorts
/// before `{2,3}` and ties between equally good hub sets resolve the same
/// way on every run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HubSet {
    open: Vec<bool>,
}

impl HubSet {
    pub fn closed(n: usize) -> Self {
        HubSet { open: vec![false; n] }
    }

    /// Builds from 0-based node indices. Panics if an index is out of range.
    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut open = vec![false; n];
        for &k in indices {
            assert!(k < n, "hub index {k} out of range for {n} nodes");
            open[k] = true;
        }
        HubSet { open }
    }

    pub fn node_count(&self) -> usize {
        self.open.len()
    }

    #[inline]
    pub fn is_open(&self, k: usize) -> bool {
        self.open[k]
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    /// 0-based indices of open hubs, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.iter_open().collect()
    }

    pub fn iter_open(&self) -> impl Iterator<Item = usize> + '_ {
        self.open.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k)
    }

    pub fn total_capacity(&self, capacities: &[f64]) -> f64 {
        self.iter_open().map(|k| capacities[k]).sum()
    }

    pub fn setup_cost(&self, setup: &[f64]) -> f64 {
        self.iter_open().map(|k| setup[k]).sum()
    }
}

impl PartialOrd for HubSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HubSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter_open().cmp(other.iter_open())
    }
}

impl fmt::Display for HubSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, k) in self.iter_open().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", k + 1)?;
        }
        write!(f, "}}")
    }
}

/// One routed share: `fraction` of the demand pair `(origin, dest)` enters
/// the network at `first_hub` and leaves it at `second_hub`.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteAssignment {
    pub origin: usize,
    pub dest: usize,
    pub first_hub: usize,
    pub second_hub: usize,
    pub fraction: f64,
}

/// Sparse routing plan: only strictly positive fractions are stored, sorted
/// by (origin, dest, first_hub). For each (pair, first hub) there is at most
/// one entry, because the cheapest second hub is unique after tie-breaking.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AllocationPlan {
    pub routes: Vec<RouteAssignment>,
}

impl AllocationPlan {
    pub fn empty() -> Self {
        AllocationPlan { routes: Vec::new() }
    }

    /// Total fraction routed for one demand pair.
    pub fn routed_fraction(&self, origin: usize, dest: usize) -> f64 {
        self.routes
            .iter()
            .filter(|r| r.origin == origin && r.dest == dest)
            .map(|r| r.fraction)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// Result of one solver run. For minimax regret runs the regret fields are
/// populated and `setup_cost`/`objective` refer to the binding (worst
/// regret) setup scenario; otherwise they refer to the solved model and the
/// regret fields are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub hub_set: HubSet,
    pub allocation: AllocationPlan,
    pub flow_cost: f64,
    pub setup_cost: f64,
    pub objective: f64,
    pub per_scenario_regret: Option<Vec<f64>>,
    pub max_regret: Option<f64>,
    pub status: SolveStatus,
}

impl Solution {
    pub fn infeasible(n: usize) -> Self {
        Solution {
            hub_set: HubSet::closed(n),
            allocation: AllocationPlan::empty(),
            flow_cost: f64::INFINITY,
            setup_cost: f64::INFINITY,
            objective: f64::INFINITY,
            per_scenario_regret: None,
            max_regret: None,
            status: SolveStatus::Infeasible,
        }
    }
}
