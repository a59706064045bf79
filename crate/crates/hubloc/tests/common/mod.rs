//! Shared fixtures for the integration suites: a seeded instance generator
//! and two reference solvers that are deliberately independent of the
//! production code paths they are used to check.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hubloc::costs;
use hubloc::model::{
    CostCoefficients, DemandScenario, HubSet, Instance, SquareMatrix,
};
use hubloc::simplex::{self, LpProblem, LpStatus, RowSense};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

/// Random valid instance: n in 2..=max_n nodes, 1..=max_demand_scenarios
/// demand matrices, 1..=3 setup vectors. Half the draws use planar
/// (metric) distances, half raw symmetric ones; capacities are scaled to
/// the peak scenario total so most but not all hub sets are feasible.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_demand_scenarios: usize,
) -> Instance {
    let n = rng.gen_range(2..=max_n);
    let distances = if rng.gen_bool(0.5) {
        planar_distances(rng, n)
    } else {
        raw_symmetric(rng, n)
    };

    let s_count = rng.gen_range(1..=max_demand_scenarios);
    let mut raw: Vec<f64> = (0..s_count).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    for p in raw.iter_mut() {
        *p /= total;
    }
    // Kill normalization drift so the probability-sum check passes exactly.
    let head: f64 = raw[..s_count - 1].iter().sum();
    raw[s_count - 1] = 1.0 - head;

    let mut demand_scenarios = Vec::with_capacity(s_count);
    let mut peak_total = 0.0_f64;
    for &probability in &raw {
        let mut demand = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(0.55) {
                    demand.set(i, j, rng.gen_range(1.0..50.0));
                }
            }
        }
        peak_total = peak_total.max(demand.total());
        demand_scenarios.push(DemandScenario { probability, demand });
    }
    if peak_total == 0.0 {
        // Guarantee at least one routed pair so the LPs are nonempty.
        demand_scenarios[0].demand.set(0, n - 1, rng.gen_range(1.0..50.0));
        peak_total = demand_scenarios[0].demand.total();
    }

    let capacities: Vec<f64> =
        (0..n).map(|_| peak_total * rng.gen_range(0.3..1.1)).collect();

    let setup_count = rng.gen_range(1..=3);
    let setup_scenarios: Vec<Vec<f64>> = (0..setup_count)
        .map(|_| (0..n).map(|_| rng.gen_range(100.0..2000.0)).collect())
        .collect();

    Instance {
        nodes: (1..=n).map(|i| format!("N{i}")).collect(),
        distances,
        capacities,
        coefficients: CostCoefficients {
            alpha: rng.gen_range(0.2..1.0),
            beta: rng.gen_range(0.6..1.4),
            delta: rng.gen_range(0.6..1.4),
        },
        demand_scenarios,
        setup_scenarios,
        origin: None,
    }
}

fn planar_distances(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let pts: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    m
}

fn raw_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.gen_range(1.0..100.0);
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    m
}

/// What the full-variable reference LP should minimize.
pub enum XGoal<'a> {
    /// Weighted flow cost of the routing itself.
    Flow,
    /// Worst-case regret of the fixed hub set: an extra scalar variable R
    /// bounded below, per setup vector, by flow + setup - reference optimum.
    MaxRegret { z_star: &'a [f64] },
}

/// Reference solver on the full four-index variable: one x[i][j][k][m] per
/// positive pair and (k, m) combination, with explicit hub-linking rows
/// against the fixed open/closed vector, one assignment row per pair, and a
/// capacity row per (node, scenario). Prices every variable from the raw
/// per-unit cost, bypassing the reduced-cost machinery entirely. Returns the
/// optimal value, or None when the demand cannot be packed.
pub fn full_x_value(
    instance: &Instance,
    hub_set: &HubSet,
    weighted: &[(f64, &SquareMatrix)],
    goal: XGoal,
) -> Option<f64> {
    let n = instance.node_count();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if weighted.iter().any(|(_, w)| w.get(i, j) > 0.0) {
                let wbar = weighted.iter().map(|(p, w)| p * w.get(i, j)).sum();
                pairs.push((i, j, wbar));
            }
        }
    }

    if pairs.is_empty() {
        return match goal {
            XGoal::Flow => Some(0.0),
            XGoal::MaxRegret { z_star } => Some(
                instance
                    .setup_scenarios
                    .iter()
                    .zip(z_star)
                    .map(|(setup, z)| (hub_set.setup_cost(setup) - z).max(0.0))
                    .fold(0.0, f64::max),
            ),
        };
    }

    let nx = pairs.len() * n * n;
    let (nv, regret_var) = match goal {
        XGoal::Flow => (nx, None),
        XGoal::MaxRegret { .. } => (nx + 1, Some(nx)),
    };
    let var = |p: usize, k: usize, m: usize| (p * n + k) * n + m;

    let mut flow_coeffs = vec![0.0; nv];
    for (p, &(i, j, wbar)) in pairs.iter().enumerate() {
        for k in 0..n {
            for m in 0..n {
                flow_coeffs[var(p, k, m)] = wbar * costs::unit_cost(instance, i, j, k, m);
            }
        }
    }
    let objective = match regret_var {
        None => flow_coeffs.clone(),
        Some(r) => {
            let mut obj = vec![0.0; nv];
            obj[r] = 1.0;
            obj
        }
    };
    let mut lp = LpProblem::minimize(objective);

    for p in 0..pairs.len() {
        let mut row = vec![0.0; nv];
        for k in 0..n {
            for m in 0..n {
                row[var(p, k, m)] = 1.0;
            }
        }
        lp.add_row(row, RowSense::Eq, 1.0);
    }
    for p in 0..pairs.len() {
        for k in 0..n {
            let mut row = vec![0.0; nv];
            for m in 0..n {
                row[var(p, k, m)] = 1.0;
            }
            lp.add_row(row, RowSense::Le, if hub_set.is_open(k) { 1.0 } else { 0.0 });
        }
        for m in 0..n {
            let mut row = vec![0.0; nv];
            for k in 0..n {
                row[var(p, k, m)] = 1.0;
            }
            lp.add_row(row, RowSense::Le, if hub_set.is_open(m) { 1.0 } else { 0.0 });
        }
    }
    for k in 0..n {
        for (_, demand) in weighted {
            let mut row = vec![0.0; nv];
            for (p, &(i, j, _)) in pairs.iter().enumerate() {
                for m in 0..n {
                    row[var(p, k, m)] = demand.get(i, j);
                }
            }
            let rhs = if hub_set.is_open(k) { instance.capacities[k] } else { 0.0 };
            lp.add_row(row, RowSense::Le, rhs);
        }
    }
    if let (XGoal::MaxRegret { z_star }, Some(r)) = (&goal, regret_var) {
        for (s, setup) in instance.setup_scenarios.iter().enumerate() {
            let mut row = flow_coeffs.clone();
            row[r] = -1.0;
            lp.add_row(row, RowSense::Le, z_star[s] - hub_set.setup_cost(setup));
        }
    }

    let result = simplex::solve_lp(&lp).expect("reference LP is well formed");
    match result.status {
        LpStatus::Optimal => Some(result.value),
        LpStatus::Infeasible => None,
        LpStatus::Unbounded => panic!("assignment rows bound the reference LP"),
    }
}

pub fn full_x_lp(
    instance: &Instance,
    hub_set: &HubSet,
    weighted: &[(f64, &SquareMatrix)],
) -> Option<f64> {
    full_x_value(instance, hub_set, weighted, XGoal::Flow)
}

pub fn full_x_lp_single(instance: &Instance, hub_set: &HubSet, demand: &SquareMatrix) -> Option<f64> {
    full_x_lp(instance, hub_set, &[(1.0, demand)])
}

pub fn full_x_lp_multi(instance: &Instance, hub_set: &HubSet) -> Option<f64> {
    let weighted: Vec<(f64, &SquareMatrix)> =
        instance.demand_scenarios.iter().map(|s| (s.probability, &s.demand)).collect();
    full_x_lp(instance, hub_set, &weighted)
}

/// Exhaustive vertex-enumeration minimizer for tiny LPs whose variables all
/// carry finite upper bounds (so the feasible set is a polytope and every
/// nonempty case attains its minimum at a vertex). Stacks rows, bounds, and
/// nonnegativity into one `A x <= b` system, visits every n-subset, solves
/// it by Gaussian elimination, and keeps the best feasible corner. Returns
/// None when no corner is feasible.
pub fn vertex_lp_min(problem: &LpProblem) -> Option<f64> {
    let n = problem.num_vars();
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for (r, row) in problem.rows.iter().enumerate() {
        match problem.senses[r] {
            RowSense::Le => {
                a.push(row.clone());
                b.push(problem.rhs[r]);
            }
            RowSense::Ge => {
                a.push(row.iter().map(|v| -v).collect());
                b.push(-problem.rhs[r]);
            }
            RowSense::Eq => {
                a.push(row.clone());
                b.push(problem.rhs[r]);
                a.push(row.iter().map(|v| -v).collect());
                b.push(-problem.rhs[r]);
            }
        }
    }
    for v in 0..n {
        let bound = problem.upper_bounds[v].expect("vertex oracle needs box bounds");
        let mut row = vec![0.0; n];
        row[v] = 1.0;
        a.push(row);
        b.push(bound);
        let mut neg = vec![0.0; n];
        neg[v] = -1.0;
        a.push(neg);
        b.push(0.0);
    }

    let m = a.len();
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    visit_subsets(m, n, 0, 0, &mut pick, &mut |subset| {
        if let Some(x) = solve_square(&a, &b, subset, n) {
            if feasible(&a, &b, &x) {
                let val: f64 = problem.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
                best = Some(match best {
                    Some(cur) => cur.min(val),
                    None => val,
                });
            }
        }
    });
    best
}

fn visit_subsets(m: usize, k: usize, start: usize, depth: usize, pick: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if depth == k {
        f(pick);
        return;
    }
    for i in start..m {
        pick[depth] = i;
        visit_subsets(m, k, i + 1, depth + 1, pick, f);
    }
}

/// Solves the square system formed by the chosen active rows; None when the
/// rows are rank deficient.
fn solve_square(a: &[Vec<f64>], b: &[f64], subset: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut mat: Vec<Vec<f64>> = subset.iter().map(|&r| a[r].clone()).collect();
    let mut rhs: Vec<f64> = subset.iter().map(|&r| b[r]).collect();
    for col in 0..n {
        let (pivot, mag) = (col..n)
            .map(|r| (r, mat[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if mag < 1e-9 {
            return None;
        }
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = mat[r][col] / mat[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                mat[r][c] -= factor * mat[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    Some((0..n).map(|i| rhs[i] / mat[i][i]).collect())
}

fn feasible(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> bool {
    a.iter().zip(b).all(|(row, &rhs)| {
        let lhs: f64 = row.iter().zip(x).map(|(c, xi)| c * xi).sum();
        let scale = 1.0_f64.max(rhs.abs());
        lhs <= rhs + 1e-7 * scale
    })
}

/// Random minimization LP over a box: up to 4 variables and 4 rows with
/// mixed senses. Box bounds keep it bounded, so the only verdicts are
/// optimal and infeasible.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=4);
    let rows = rng.gen_range(0..=4);
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut lp = LpProblem::minimize(objective);
    for _ in 0..rows {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.8) { rng.gen_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let sense = match rng.gen_range(0..8) {
            0 => RowSense::Ge,
            1 => RowSense::Eq,
            _ => RowSense::Le,
        };
        let rhs = rng.gen_range(-0.5..2.0);
        lp.add_row(coeffs, sense, rhs);
    }
    for v in 0..n {
        lp.set_upper_bound(v, rng.gen_range(0.5..2.5));
    }
    lp
}
