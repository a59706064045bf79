//! Helpers that expand compact scenario descriptions into instance data.
//!
//! Setup cost uncertainty is usually given as one base vector plus a list
//! of multipliers (for example 0.7 to 1.3 of the appraised cost). Seasonal
//! single-origin demand is given as one per-destination vector per season.

use thiserror::Error;

use crate::model::{DemandScenario, SquareMatrix};
use crate::tolerances;

/// Multipliers for the five-scenario setup cost family used by the
/// regional case data: appraised cost scaled from 0.7 to 1.3 in even steps.
pub const DEFAULT_SETUP_MULTIPLIERS: [f64; 5] = [0.7, 0.85, 1.0, 1.15, 1.3];

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("multiplier {value} at position {index} must be positive and finite")]
    BadMultiplier { index: usize, value: f64 },
    #[error("no multipliers given")]
    NoMultipliers,
    #[error("base setup cost {value} at node {node} must be nonnegative and finite")]
    BadBaseCost { node: usize, value: f64 },
    #[error("base setup cost vector is empty")]
    EmptyBase,
    #[error("no seasons given")]
    NoSeasons,
    #[error("season {season} has {got} demand entries, expected {expected}")]
    SeasonShape { season: usize, got: usize, expected: usize },
    #[error("{got} probabilities for {seasons} seasons")]
    ProbabilityShape { got: usize, seasons: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },
    #[error("origin index {origin} out of range 1..={n}")]
    OriginRange { origin: usize, n: usize },
    #[error("season {season} node {node} has demand {value}, expected nonnegative and finite")]
    BadDemand { season: usize, node: usize, value: f64 },
}

/// One setup cost vector per multiplier: scenario `t` is
/// `multiplier[t] * base`, with multipliers sorted ascending first.
pub fn build_setup_scenarios(base: &[f64], multipliers: &[f64]) -> Result<Vec<Vec<f64>>, ScenarioError> {
    if base.is_empty() {
        return Err(ScenarioError::EmptyBase);
    }
    if multipliers.is_empty() {
        return Err(ScenarioError::NoMultipliers);
    }
    for (node, &value) in base.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ScenarioError::BadBaseCost { node: node + 1, value });
        }
    }
    for (index, &value) in multipliers.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(ScenarioError::BadMultiplier { index: index + 1, value });
        }
    }
    let mut sorted = multipliers.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted.iter().map(|&m| base.iter().map(|&f| m * f).collect()).collect())
}

/// Demand scenarios for a single-origin instance: season `t` becomes a
/// demand matrix whose origin row is `seasonal[t]` and whose other rows are
/// zero. The cell `[origin][origin]` is kept as given; demand for the
/// origin's own location still occupies hub capacity.
pub fn build_seasonal_demands(
    seasonal: &[Vec<f64>],
    origin: usize,
    probabilities: &[f64],
) -> Result<Vec<DemandScenario>, ScenarioError> {
    if seasonal.is_empty() {
        return Err(ScenarioError::NoSeasons);
    }
    let n = seasonal[0].len();
    if origin >= n {
        return Err(ScenarioError::OriginRange { origin: origin + 1, n });
    }
    if probabilities.len() != seasonal.len() {
        return Err(ScenarioError::ProbabilityShape { got: probabilities.len(), seasons: seasonal.len() });
    }
    let sum: f64 = probabilities.iter().sum();
    if (sum - 1.0).abs() > tolerances::PROBABILITY_SUM {
        return Err(ScenarioError::ProbabilitySum { sum });
    }
    let mut out = Vec::with_capacity(seasonal.len());
    for (t, season) in seasonal.iter().enumerate() {
        if season.len() != n {
            return Err(ScenarioError::SeasonShape { season: t + 1, got: season.len(), expected: n });
        }
        let mut demand = SquareMatrix::zeros(n);
        for (j, &w) in season.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(ScenarioError::BadDemand { season: t + 1, node: j + 1, value: w });
            }
            demand.set(origin, j, w);
        }
        out.push(DemandScenario { probability: probabilities[t], demand });
    }
    Ok(out)
}
