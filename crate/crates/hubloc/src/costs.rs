//! Per-unit routing costs and their reduction to first-hub form.
//!
//! A unit of demand from `i` to `j` routed via first hub `k` and second hub
//! `m` costs `beta*d(i,k) + alpha*d(k,m) + delta*d(m,j)`. Because capacity
//! is consumed at the first hub only, the routing LP never needs the second
//! hub as a decision: for fixed open hubs the best `m` for each `(i,j,k)`
//! can be picked pointwise in advance. [`reduce`] performs that pointwise
//! minimization and records the winning second hub.

use thiserror::Error;

use crate::model::{HubSet, Instance};

/// Instances at or below this size get a fully precomputed cost tensor
/// (20^4 doubles, about 1.2 MiB).
const CACHE_NODE_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("hub set is empty")]
    EmptyHubSet,
    #[error("hub set covers {hub_nodes} nodes but the instance has {instance_nodes}")]
    NodeCountMismatch { hub_nodes: usize, instance_nodes: usize },
}

#[inline]
fn raw_unit_cost(instance: &Instance, i: usize, j: usize, k: usize, m: usize) -> f64 {
    let c = &instance.coefficients;
    let d = &instance.distances;
    c.beta * d.get(i, k) + c.alpha * d.get(k, m) + c.delta * d.get(m, j)
}

/// Per-unit routing cost for one (origin, dest, first hub, second hub)
/// quadruple. Panics if an index is out of range.
pub fn unit_cost(instance: &Instance, i: usize, j: usize, k: usize, m: usize) -> f64 {
    raw_unit_cost(instance, i, j, k, m)
}

/// Routing cost lookup, precomputed for small instances.
pub struct CostOracle<'a> {
    instance: &'a Instance,
    n: usize,
    cache: Option<Vec<f64>>,
}

impl<'a> CostOracle<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let n = instance.node_count();
        let cache = (n <= CACHE_NODE_LIMIT).then(|| {
            let mut cache = Vec::with_capacity(n * n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for m in 0..n {
                            cache.push(raw_unit_cost(instance, i, j, k, m));
                        }
                    }
                }
            }
            cache
        });
        CostOracle { instance, n, cache }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    #[inline]
    pub fn unit_cost(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        match &self.cache {
            Some(cache) => cache[((i * self.n + j) * self.n + k) * self.n + m],
            None => raw_unit_cost(self.instance, i, j, k, m),
        }
    }
}

/// First-hub routing costs for a fixed hub set: for every demand pair and
/// every open first hub, the cost of the cheapest open second hub.
#[derive(Debug)]
pub struct ReducedCost {
    n: usize,
    hubs: Vec<usize>,
    slot_of: Vec<Option<usize>>,
    // Indexed by (i*n + j)*hubs.len() + slot.
    costs: Vec<f64>,
    second: Vec<usize>,
}

impl ReducedCost {
    /// Open hubs, ascending by node index. Slot `t` in cost queries refers
    /// to `hubs()[t]`.
    pub fn hubs(&self) -> &[usize] {
        &self.hubs
    }

    pub fn slot_of(&self, k: usize) -> Option<usize> {
        self.slot_of[k]
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        let slot = self.slot_of[k].expect("first hub is not open");
        (i * self.n + j) * self.hubs.len() + slot
    }

    /// Cheapest per-unit cost from `i` to `j` entering at open hub `k`.
    /// Panics if `k` is not open.
    #[inline]
    pub fn cost(&self, i: usize, j: usize, k: usize) -> f64 {
        self.costs[self.offset(i, j, k)]
    }

    /// The second hub achieving [`ReducedCost::cost`]. Ties resolve to the
    /// lowest node index. Panics if `k` is not open.
    #[inline]
    pub fn second_hub(&self, i: usize, j: usize, k: usize) -> usize {
        self.second[self.offset(i, j, k)]
    }
}

/// Builds [`ReducedCost`] for every pair and open hub of the instance.
pub fn reduce(instance: &Instance, hub_set: &HubSet) -> Result<ReducedCost, CostError> {
    reduce_with(&CostOracle::new(instance), hub_set)
}

pub(crate) fn reduce_with(oracle: &CostOracle, hub_set: &HubSet) -> Result<ReducedCost, CostError> {
    let n = oracle.n;
    if hub_set.node_count() != n {
        return Err(CostError::NodeCountMismatch {
            hub_nodes: hub_set.node_count(),
            instance_nodes: n,
        });
    }
    let hubs = hub_set.indices();
    if hubs.is_empty() {
        return Err(CostError::EmptyHubSet);
    }
    let mut slot_of = vec![None; n];
    for (slot, &k) in hubs.iter().enumerate() {
        slot_of[k] = Some(slot);
    }

    let mut costs = Vec::with_capacity(n * n * hubs.len());
    let mut second = Vec::with_capacity(n * n * hubs.len());
    for i in 0..n {
        for j in 0..n {
            for &k in &hubs {
                let mut best = f64::INFINITY;
                let mut best_m = usize::MAX;
                for &m in &hubs {
                    let c = oracle.unit_cost(i, j, k, m);
                    // Strict comparison over ascending m keeps the lowest
                    // index on ties.
                    if c < best {
                        best = c;
                        best_m = m;
                    }
                }
                costs.push(best);
                second.push(best_m);
            }
        }
    }
    Ok(ReducedCost { n, hubs, slot_of, costs, second })
}
