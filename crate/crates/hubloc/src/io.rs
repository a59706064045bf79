//! JSON instance and solution documents, plus the break-even table writer.
//!
//! All indices in documents are 1-based and all node references are by
//! name; the in-memory model is 0-based. Floating point values round-trip
//! exactly (shortest-representation encoding on write, exact parse on
//! read).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::BreakEvenReport;
use crate::model::{
    AllocationPlan, CostCoefficients, DemandScenario, HubSet, Instance, RouteAssignment,
    Solution, SolveStatus, SquareMatrix, Violation,
};
use crate::scenarios;
use crate::search::RegretReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: schema_version {got} is not supported (this build reads {SCHEMA_VERSION})")]
    SchemaVersion { path: PathBuf, got: u32 },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{path} failed validation:\n{}", format_violations(.violations))]
    Validation { path: PathBuf, violations: Vec<Violation> },
}

fn format_violations(violations: &[Violation]) -> String {
    let mut out = String::new();
    for v in violations {
        let _ = writeln!(out, "  {v}");
    }
    out.pop();
    out
}

// ---------------------------------------------------------------------------
// Instance documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    nodes: Vec<String>,
    distances: DistancesDoc,
    capacities: Vec<f64>,
    coefficients: CoefficientsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<String>,
    demand_scenarios: Vec<DemandScenarioDoc>,
    setup_scenarios: SetupScenariosDoc,
}

/// Either `upper` (strict upper triangle, row `i` holding the entries
/// `(i, i+1..n)`) or `full` (complete symmetric matrix).
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistancesDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientsDoc {
    alpha: f64,
    beta: f64,
    delta: f64,
}

/// Demand given either as a full matrix or, for single-origin instances, as
/// the origin row alone (`origin_row[j]` is the demand towards node `j`).
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandScenarioDoc {
    probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin_row: Option<Vec<f64>>,
}

/// Setup cost scenarios: either explicit vectors or a base vector scaled by
/// multipliers (sorted ascending on load).
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetupScenariosDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    explicit: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multipliers: Option<Vec<f64>>,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.into(), source })?;
    let doc: InstanceDoc =
        serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.into(), source })?;
    instance_from_doc(doc, path)
}

fn malformed(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Malformed { path: path.into(), message: message.into() }
}

fn instance_from_doc(doc: InstanceDoc, path: &Path) -> Result<Instance, IoError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(IoError::SchemaVersion { path: path.into(), got: doc.schema_version });
    }
    let n = doc.nodes.len();

    let distances = match (doc.distances.upper, doc.distances.full) {
        (Some(upper), None) => mirror_upper(&upper, n).map_err(|m| malformed(path, m))?,
        (None, Some(full)) => {
            SquareMatrix::from_rows(&full).map_err(|m| malformed(path, format!("distances.full: {m}")))?
        }
        (Some(_), Some(_)) => {
            return Err(malformed(path, "distances: give either 'upper' or 'full', not both"))
        }
        (None, None) => return Err(malformed(path, "distances: give 'upper' or 'full'")),
    };

    let origin = match &doc.origin {
        None => None,
        Some(name) => Some(
            doc.nodes
                .iter()
                .position(|node| node == name)
                .ok_or_else(|| malformed(path, format!("origin: no node named '{name}'")))?,
        ),
    };

    let mut demand_scenarios = Vec::with_capacity(doc.demand_scenarios.len());
    for (s, scenario) in doc.demand_scenarios.into_iter().enumerate() {
        let demand = match (scenario.matrix, scenario.origin_row) {
            (Some(matrix), None) => SquareMatrix::from_rows(&matrix)
                .map_err(|m| malformed(path, format!("demand scenario {}: {m}", s + 1)))?,
            (None, Some(row)) => {
                let Some(o) = origin else {
                    return Err(malformed(
                        path,
                        format!("demand scenario {}: origin_row requires an instance origin", s + 1),
                    ));
                };
                if row.len() != n {
                    return Err(malformed(
                        path,
                        format!("demand scenario {}: origin_row has {} entries, expected {n}", s + 1, row.len()),
                    ));
                }
                let mut demand = SquareMatrix::zeros(n);
                for (j, &w) in row.iter().enumerate() {
                    demand.set(o, j, w);
                }
                demand
            }
            (Some(_), Some(_)) => {
                return Err(malformed(
                    path,
                    format!("demand scenario {}: give either 'matrix' or 'origin_row', not both", s + 1),
                ))
            }
            (None, None) => {
                return Err(malformed(
                    path,
                    format!("demand scenario {}: give 'matrix' or 'origin_row'", s + 1),
                ))
            }
        };
        demand_scenarios.push(DemandScenario { probability: scenario.probability, demand });
    }

    let setup_scenarios = match (doc.setup_scenarios.explicit, doc.setup_scenarios.base, doc.setup_scenarios.multipliers)
    {
        (Some(explicit), None, None) => explicit,
        (None, Some(base), Some(multipliers)) => scenarios::build_setup_scenarios(&base, &multipliers)
            .map_err(|e| malformed(path, format!("setup_scenarios: {e}")))?,
        _ => {
            return Err(malformed(
                path,
                "setup_scenarios: give either 'explicit' or both 'base' and 'multipliers'",
            ))
        }
    };

    let instance = Instance {
        nodes: doc.nodes,
        distances,
        capacities: doc.capacities,
        coefficients: CostCoefficients {
            alpha: doc.coefficients.alpha,
            beta: doc.coefficients.beta,
            delta: doc.coefficients.delta,
        },
        demand_scenarios,
        setup_scenarios,
        origin,
    };
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(IoError::Validation { path: path.into(), violations });
    }
    Ok(instance)
}

fn mirror_upper(upper: &[Vec<f64>], n: usize) -> Result<SquareMatrix, String> {
    if n == 0 {
        return Err("distances.upper: instance has no nodes".to_string());
    }
    if upper.len() != n - 1 {
        return Err(format!("distances.upper: {} rows, expected {}", upper.len(), n - 1));
    }
    let mut m = SquareMatrix::zeros(n);
    for (i, row) in upper.iter().enumerate() {
        let expected = n - 1 - i;
        if row.len() != expected {
            return Err(format!(
                "distances.upper: row {} has {} entries, expected {expected}",
                i + 1,
                row.len()
            ));
        }
        for (offset, &d) in row.iter().enumerate() {
            let j = i + 1 + offset;
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Solution documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    schema_version: u32,
    status: String,
    node_count: usize,
    /// Open hubs, 1-based.
    hubs: Vec<usize>,
    flow_cost: Option<f64>,
    setup_cost: Option<f64>,
    objective: Option<f64>,
    /// Nonzero routing quadruples, all indices 1-based.
    allocation: Vec<RouteDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_scenario_regret: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_regret: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario_details: Option<Vec<RegretEntryDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteDoc {
    origin: usize,
    dest: usize,
    first_hub: usize,
    second_hub: usize,
    fraction: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegretEntryDoc {
    z_star: f64,
    setup_cost: f64,
    regret: f64,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn solution_to_doc(solution: &Solution, timestamp: Option<u64>) -> SolutionDoc {
    SolutionDoc {
        schema_version: SCHEMA_VERSION,
        status: match solution.status {
            SolveStatus::Optimal => "optimal".to_string(),
            SolveStatus::Infeasible => "infeasible".to_string(),
        },
        node_count: solution.hub_set.node_count(),
        hubs: solution.hub_set.iter_open().map(|k| k + 1).collect(),
        flow_cost: finite_or_none(solution.flow_cost),
        setup_cost: finite_or_none(solution.setup_cost),
        objective: finite_or_none(solution.objective),
        allocation: solution
            .allocation
            .routes
            .iter()
            .map(|r| RouteDoc {
                origin: r.origin + 1,
                dest: r.dest + 1,
                first_hub: r.first_hub + 1,
                second_hub: r.second_hub + 1,
                fraction: r.fraction,
            })
            .collect(),
        per_scenario_regret: solution.per_scenario_regret.clone(),
        max_regret: solution.max_regret,
        scenario_details: None,
        generated_at_unix: timestamp,
    }
}

fn write_json(path: &Path, doc: &impl Serialize) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|source| IoError::Parse { path: path.into(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write { path: path.into(), source })
}

/// Writes a solution document. `timestamp` (unix seconds) is optional so
/// identical runs can produce byte-identical files.
pub fn write_solution(
    path: impl AsRef<Path>,
    solution: &Solution,
    timestamp: Option<u64>,
) -> Result<(), IoError> {
    write_json(path.as_ref(), &solution_to_doc(solution, timestamp))
}

/// Writes a minimax regret report: the solution document plus per-scenario
/// reference optima, setup costs, and regrets.
pub fn write_regret_report(
    path: impl AsRef<Path>,
    report: &RegretReport,
    timestamp: Option<u64>,
) -> Result<(), IoError> {
    let mut doc = solution_to_doc(&report.solution, timestamp);
    doc.scenario_details = Some(
        report
            .entries
            .iter()
            .map(|e| RegretEntryDoc { z_star: e.z_star, setup_cost: e.setup_cost, regret: e.regret })
            .collect(),
    );
    write_json(path.as_ref(), &doc)
}

/// Reads a solution document back into memory. The regret scenario details
/// of a report document are dropped; costs absent in the document (an
/// infeasible solution) come back as infinities.
pub fn load_solution(path: impl AsRef<Path>) -> Result<Solution, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.into(), source })?;
    let doc: SolutionDoc =
        serde_json::from_str(&text).map_err(|source| IoError::Parse { path: path.into(), source })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(IoError::SchemaVersion { path: path.into(), got: doc.schema_version });
    }
    let status = match doc.status.as_str() {
        "optimal" => SolveStatus::Optimal,
        "infeasible" => SolveStatus::Infeasible,
        other => return Err(malformed(path, format!("unknown status '{other}'"))),
    };
    let n = doc.node_count;
    for &k in &doc.hubs {
        if k == 0 || k > n {
            return Err(malformed(path, format!("hub index {k} out of range 1..={n}")));
        }
    }
    let indices: Vec<usize> = doc.hubs.iter().map(|&k| k - 1).collect();
    let mut routes = Vec::with_capacity(doc.allocation.len());
    for r in &doc.allocation {
        for (field, value) in
            [("origin", r.origin), ("dest", r.dest), ("first_hub", r.first_hub), ("second_hub", r.second_hub)]
        {
            if value == 0 || value > n {
                return Err(malformed(path, format!("allocation {field} {value} out of range 1..={n}")));
            }
        }
        routes.push(RouteAssignment {
            origin: r.origin - 1,
            dest: r.dest - 1,
            first_hub: r.first_hub - 1,
            second_hub: r.second_hub - 1,
            fraction: r.fraction,
        });
    }
    Ok(Solution {
        hub_set: HubSet::from_indices(n, &indices),
        allocation: AllocationPlan { routes },
        flow_cost: doc.flow_cost.unwrap_or(f64::INFINITY),
        setup_cost: doc.setup_cost.unwrap_or(f64::INFINITY),
        objective: doc.objective.unwrap_or(f64::INFINITY),
        per_scenario_regret: doc.per_scenario_regret,
        max_regret: doc.max_regret,
        status,
    })
}

// ---------------------------------------------------------------------------
// Break-even table
// ---------------------------------------------------------------------------

/// Tab-separated break-even table: one row per grid point with the phi
/// value and both policy totals, full precision.
pub fn write_breakeven_tsv(path: impl AsRef<Path>, report: &BreakEvenReport) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut out = String::from("phi\tseasonal_total\tfixed_total\n");
    for point in &report.grid {
        let _ = writeln!(out, "{}\t{}\t{}", point.phi, point.seasonal_total, point.fixed_total);
    }
    fs::write(path, out).map_err(|source| IoError::Write { path: path.into(), source })
}

/// Human-oriented description of the on-disk JSON formats.
pub const SCHEMA_DOC: &str = r#"Instance document (JSON, schema_version 1)
------------------------------------------
{
  "schema_version": 1,
  "name": "optional short name",
  "description": "optional free text",
  "nodes": ["Name 1", "Name 2", ...],          // n node names, unique
  "distances": {
    "upper": [[d12, d13, ...], [d23, ...], ...] // strict upper triangle
    // or "full": n x n symmetric matrix, zero diagonal
  },
  "capacities": [g1, ..., gn],                  // positive, same order as nodes
  "coefficients": {"alpha": a, "beta": b, "delta": d},
  "origin": "Name",                             // optional; single-origin instances
  "demand_scenarios": [
    {"probability": p, "matrix": [[...], ...]}  // n x n, zero diagonal
    // or {"probability": p, "origin_row": [w1, ..., wn]} (requires "origin";
    //     the cell towards the origin itself is kept and consumes capacity)
  ],                                            // probabilities sum to 1
  "setup_scenarios": {
    "explicit": [[f1, ..., fn], ...]
    // or "base": [f1, ..., fn] with "multipliers": [m1, ...] (sorted on load)
  }
}

Solution document (JSON, schema_version 1)
------------------------------------------
{
  "schema_version": 1,
  "status": "optimal" | "infeasible",
  "node_count": n,
  "hubs": [k1, k2, ...],                        // 1-based open hubs
  "flow_cost": number | null,                   // null when infeasible
  "setup_cost": number | null,
  "objective": number | null,                   // flow_cost + setup_cost
  "allocation": [                               // nonzero routing quadruples
    {"origin": i, "dest": j, "first_hub": k, "second_hub": m, "fraction": x}
  ],
  "per_scenario_regret": [...],                 // minimax runs only
  "max_regret": number,                         // minimax runs only
  "scenario_details": [                         // regret reports only
    {"z_star": ..., "setup_cost": ..., "regret": ...}
  ],
  "generated_at_unix": seconds                  // omitted with --no-timestamp
}

Break-even table (TSV)
----------------------
phi<TAB>seasonal_total<TAB>fixed_total, one row per phi grid point.
"#;
