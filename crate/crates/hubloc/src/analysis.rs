//! Horizon cost comparison: re-configure hubs every season, or hold one
//! robust hub set.
//!
//! The seasonal policy solves each demand season as its own deterministic
//! problem under mean setup costs and re-installs hubs whenever consecutive
//! seasons disagree. Every re-configuration event is charged a fraction
//! `phi` of a reference establishment cost, so the policy's horizon cost is
//! affine and nondecreasing in `phi`. The fixed policy holds the minimax
//! regret hub set for the whole horizon (mean setup paid once, routing
//! re-optimized per season). The break-even `phi` is the exact intersection
//! of the affine seasonal cost with the constant fixed cost.

use thiserror::Error;

use crate::allocation;
use crate::model::{HubSet, Instance, Solution, SolveStatus};
use crate::search::{self, RegretReport, SearchConfig, SearchError};

/// What one re-configuration event's `phi` charge is based on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconfigCostBasis {
    /// Mean setup cost of the configuration being installed at the event.
    InstalledPerEvent,
    /// Mean setup cost of all distinct configurations in the plan, charged
    /// in full at every event.
    GrandTotalPerEvent,
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub season_days: f64,
    pub basis: ReconfigCostBasis,
    pub search: SearchConfig,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            season_days: 90.0,
            basis: ReconfigCostBasis::InstalledPerEvent,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("horizon must be positive, got {0} days")]
    BadHorizon(f64),
    #[error("season length must be positive, got {0} days")]
    BadSeasonLength(f64),
    #[error("season {season} cannot be served by any hub set")]
    SeasonInfeasible { season: usize },
    #[error("the fixed hub set cannot serve season {season}")]
    FixedPolicyInfeasible { season: usize },
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Seasonal re-configuration plan over a horizon.
///
/// `total_cost(phi) = flow_total + setup_total + phi * reconfig_base`:
/// affine in `phi` with slope `reconfig_base` (the sum over events of the
/// chosen cost basis) and distinct configurations paid once in
/// `setup_total`.
#[derive(Clone, Debug)]
pub struct SeasonalPlan {
    /// Deterministic solution per demand season, mean setup costs.
    pub season_solutions: Vec<Solution>,
    /// Season index of each horizon slot, in order.
    pub slot_seasons: Vec<usize>,
    pub flow_total: f64,
    pub setup_total: f64,
    pub reconfig_events: usize,
    pub reconfig_base: f64,
}

impl SeasonalPlan {
    pub fn total_cost(&self, phi: f64) -> f64 {
        self.flow_total + self.setup_total + phi * self.reconfig_base
    }

    /// Exact affine intersection with a constant-cost alternative. Absent
    /// when the curves are parallel or cross at negative `phi`.
    pub fn break_even_with(&self, fixed_total: f64) -> Option<f64> {
        if self.reconfig_base <= 0.0 {
            return None;
        }
        let phi = (fixed_total - self.total_cost(0.0)) / self.reconfig_base;
        (phi >= 0.0).then_some(phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakEvenPoint {
    pub phi: f64,
    pub seasonal_total: f64,
    pub fixed_total: f64,
}

#[derive(Clone, Debug)]
pub struct BreakEvenReport {
    pub horizon_days: f64,
    pub seasonal: SeasonalPlan,
    pub fixed: RegretReport,
    pub fixed_total: f64,
    pub grid: Vec<BreakEvenPoint>,
    pub break_even_phi: Option<f64>,
}

/// Horizon slots: one entry per (possibly fractional) season-long period,
/// cycling through the seasons in order.
fn slots(horizon_days: f64, season_days: f64, seasons: usize) -> Result<Vec<(usize, f64)>, AnalysisError> {
    if !(horizon_days > 0.0) || !horizon_days.is_finite() {
        return Err(AnalysisError::BadHorizon(horizon_days));
    }
    if !(season_days > 0.0) || !season_days.is_finite() {
        return Err(AnalysisError::BadSeasonLength(season_days));
    }
    let full = (horizon_days / season_days).floor() as usize;
    let remainder = horizon_days - full as f64 * season_days;
    let mut out: Vec<(usize, f64)> = (0..full).map(|t| (t % seasons, 1.0)).collect();
    if remainder > 1e-9 * season_days {
        out.push((full % seasons, remainder / season_days));
    }
    Ok(out)
}

/// Solves each season deterministically and accounts the horizon.
pub fn seasonal_policy(
    instance: &Instance,
    horizon_days: f64,
    options: &AnalysisOptions,
) -> Result<SeasonalPlan, AnalysisError> {
    let seasons = instance.demand_scenario_count();
    let slots = slots(horizon_days, options.season_days, seasons)?;
    let mean_setup = instance.mean_setup_costs();

    let mut season_solutions = Vec::with_capacity(seasons);
    for (s, scenario) in instance.demand_scenarios.iter().enumerate() {
        let sol = search::solve_deterministic(instance, &scenario.demand, &mean_setup, &options.search)?;
        if sol.status == SolveStatus::Infeasible {
            return Err(AnalysisError::SeasonInfeasible { season: s + 1 });
        }
        season_solutions.push(sol);
    }

    let flow_total: f64 =
        slots.iter().map(|&(s, w)| w * season_solutions[s].flow_cost).sum();

    let mut distinct: Vec<&HubSet> = Vec::new();
    for &(s, _) in &slots {
        let config = &season_solutions[s].hub_set;
        if !distinct.contains(&config) {
            distinct.push(config);
        }
    }
    let setup_total: f64 = distinct.iter().map(|h| h.setup_cost(&mean_setup)).sum();

    let mut reconfig_events = 0;
    let mut reconfig_base = 0.0;
    for pair in slots.windows(2) {
        let (prev, next) = (pair[0].0, pair[1].0);
        if season_solutions[prev].hub_set != season_solutions[next].hub_set {
            reconfig_events += 1;
            reconfig_base += match options.basis {
                ReconfigCostBasis::InstalledPerEvent => {
                    season_solutions[next].hub_set.setup_cost(&mean_setup)
                }
                ReconfigCostBasis::GrandTotalPerEvent => setup_total,
            };
        }
    }

    Ok(SeasonalPlan {
        season_solutions,
        slot_seasons: slots.iter().map(|&(s, _)| s).collect(),
        flow_total,
        setup_total,
        reconfig_events,
        reconfig_base,
    })
}

/// Horizon cost of holding the minimax regret hub set throughout: mean
/// setup once plus per-season routing costs.
pub fn fixed_policy(
    instance: &Instance,
    horizon_days: f64,
    options: &AnalysisOptions,
) -> Result<(RegretReport, f64), AnalysisError> {
    let seasons = instance.demand_scenario_count();
    let slots = slots(horizon_days, options.season_days, seasons)?;
    let report = search::solve_minimax_regret(instance, &options.search)?;
    let hub_set = &report.solution.hub_set;

    let mut season_flows = vec![0.0; seasons];
    for (s, scenario) in instance.demand_scenarios.iter().enumerate() {
        let alloc = allocation::solve_allocation(instance, hub_set, &scenario.demand)
            .map_err(SearchError::from)?;
        if alloc.status == SolveStatus::Infeasible {
            return Err(AnalysisError::FixedPolicyInfeasible { season: s + 1 });
        }
        season_flows[s] = alloc.flow_cost;
    }
    let flow_total: f64 = slots.iter().map(|&(s, w)| w * season_flows[s]).sum();
    let setup_total = hub_set.setup_cost(&instance.mean_setup_costs());
    Ok((report, flow_total + setup_total))
}

/// Evaluates both policies and finds the exact break-even `phi`. The grid
/// is only for reporting; the intersection is computed from the affine
/// coefficients, not interpolated.
pub fn break_even(
    instance: &Instance,
    horizon_days: f64,
    phi_grid: &[f64],
    options: &AnalysisOptions,
) -> Result<BreakEvenReport, AnalysisError> {
    let seasonal = seasonal_policy(instance, horizon_days, options)?;
    let (fixed, fixed_total) = fixed_policy(instance, horizon_days, options)?;
    let grid = phi_grid
        .iter()
        .map(|&phi| BreakEvenPoint {
            phi,
            seasonal_total: seasonal.total_cost(phi),
            fixed_total,
        })
        .collect();
    let break_even_phi = seasonal.break_even_with(fixed_total);
    Ok(BreakEvenReport { horizon_days, seasonal, fixed, fixed_total, grid, break_even_phi })
}
