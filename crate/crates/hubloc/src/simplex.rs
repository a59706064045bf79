//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are stated as `min c.x` subject to `A x {<=,=,>=} b`, `x >= 0`,
//! with optional per-variable upper bounds. Upper bounds are handled as
//! appended singleton `<=` rows; at the sizes this crate solves (hundreds of
//! variables) the simplicity is worth more than a bounded-variable ratio
//! test.
//!
//! Numerical scheme, in order:
//! * rows are equilibrated by their largest absolute coefficient,
//! * rows with negative right-hand side are negated (sense flips),
//! * `<=` rows get slacks, `>=` rows a surplus plus an artificial, `=` rows
//!   an artificial; phase 1 minimizes the artificial sum,
//! * Dantzig pricing with ties to the lowest column index; after
//!   `bland_after` pivots the solver switches to Bland's rule, which cannot
//!   cycle,
//! * a pivot entry must exceed `pivot_tol` in absolute value,
//! * phase 1 declares feasibility when its objective is at most
//!   `feasibility_tol * (1 + max |scaled rhs|)`.
//!
//! Every arithmetic breakdown is reported through [`LpError`]; the solver
//! never silently returns garbage.

use thiserror::Error;

use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// `min objective . x` subject to the stored rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub upper_bounds: Vec<Option<f64>>,
}

impl LpProblem {
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            upper_bounds: vec![None; n],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: RowSense, rhs: f64) {
        self.rows.push(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn set_upper_bound(&mut self, var: usize, bound: f64) {
        self.upper_bounds[var] = Some(bound);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `value`, `primal`, `dual`, and `bound_duals` are
/// meaningful only when `status` is `Optimal`; an unbounded problem reports
/// `value = -inf`.
///
/// Dual signs follow the Lagrangian `c.x - sum_i y_i (a_i.x - b_i)`: at an
/// optimum `value = dual.b + bound_duals.u`, duals of `<=` rows are
/// nonpositive, duals of `>=` rows nonnegative, equality duals free.
#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub bound_duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub pivot_tol: f64,
    /// Pivot count after which pricing switches to Bland's rule.
    pub bland_after: usize,
    /// Hard pivot cap; `None` means `10 * (rows + cols)^2`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: tolerances::LP_FEASIBILITY,
            pivot_tol: tolerances::LP_PIVOT,
            bland_after: 5000,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowShape { row: usize, got: usize, expected: usize },
    #[error("rows, senses and rhs have mismatched lengths")]
    SideShape,
    #[error("non-finite number in {place}")]
    NonFinite { place: String },
    #[error("variable {var} has invalid upper bound {bound}")]
    BadBound { var: usize, bound: f64 },
    #[error("pivot limit of {limit} iterations exceeded")]
    IterationLimit { limit: usize },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Clone, Copy, Debug)]
enum WorkKind {
    User(usize),
    Bound(usize),
}

struct WorkRow {
    kind: WorkKind,
    coeffs: Vec<f64>,
    rhs: f64,
    sense: RowSense,
    // Original dual = sign / scale * tableau dual.
    sign: f64,
    scale: f64,
}

enum Pricing {
    Dantzig,
    Bland,
}

enum PhaseEnd {
    Done,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    ncols: usize,
    basis: Vec<usize>,
    cost1: Vec<f64>,
    cost2: Vec<f64>,
    artificial: Vec<bool>,
    /// Maps current row position to its working-row index.
    work_of_row: Vec<usize>,
    /// Initial identity column of each working row (slack or artificial).
    id_col: Vec<usize>,
    iterations: usize,
}

const SNAP: f64 = 1e-12;

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.ncols
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.ncols + 1;
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
            if v.abs() < SNAP {
                *v = 0.0;
            }
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for j in 0..width {
                    row[j] -= factor * pivot_row[j];
                    if row[j].abs() < SNAP {
                        row[j] = 0.0;
                    }
                }
                row[c] = 0.0;
            }
        }
        for cost in [&mut self.cost1, &mut self.cost2] {
            let factor = cost[c];
            if factor != 0.0 {
                for j in 0..width {
                    cost[j] -= factor * pivot_row[j];
                    if cost[j].abs() < SNAP {
                        cost[j] = 0.0;
                    }
                }
                cost[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn entering(&self, phase1: bool, pricing: &Pricing, pivot_tol: f64) -> Option<usize> {
        let cost = if phase1 { &self.cost1 } else { &self.cost2 };
        let mut best: Option<(f64, usize)> = None;
        for c in 0..self.ncols {
            if !phase1 && self.artificial[c] {
                continue;
            }
            let rc = cost[c];
            if rc < -pivot_tol {
                match pricing {
                    Pricing::Bland => return Some(c),
                    Pricing::Dantzig => {
                        if best.map_or(true, |(b, _)| rc < b) {
                            best = Some((rc, c));
                        }
                    }
                }
            }
        }
        best.map(|(_, c)| c)
    }

    fn leaving(&self, c: usize, pricing: &Pricing, pivot_tol: f64) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(f64, usize, usize)> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][c];
            if a > pivot_tol {
                let ratio = self.rows[r][rhs] / a;
                let key = match pricing {
                    Pricing::Bland => self.basis[r],
                    Pricing::Dantzig => r,
                };
                let better = match best {
                    None => true,
                    Some((br, bk, _)) => ratio < br || (ratio == br && key < bk),
                };
                if better {
                    best = Some((ratio, key, r));
                }
            }
        }
        best.map(|(_, _, r)| r)
    }

    fn run_phase(&mut self, phase1: bool, opts: &SolverOptions, limit: usize) -> Result<PhaseEnd, LpError> {
        loop {
            if self.iterations >= limit {
                return Err(LpError::IterationLimit { limit });
            }
            let pricing = if self.iterations >= opts.bland_after { Pricing::Bland } else { Pricing::Dantzig };
            let Some(c) = self.entering(phase1, &pricing, opts.pivot_tol) else {
                return Ok(PhaseEnd::Done);
            };
            let Some(r) = self.leaving(c, &pricing, opts.pivot_tol) else {
                if phase1 {
                    // The phase-1 objective is bounded below by zero, so a
                    // missing ratio row means the arithmetic went bad.
                    return Err(LpError::NumericalBreakdown(
                        "phase 1 column without a positive pivot entry".to_string(),
                    ));
                }
                return Ok(PhaseEnd::Unbounded);
            };
            self.pivot(r, c);
        }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpResult, LpError> {
    solve_lp_with(problem, &SolverOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, opts: &SolverOptions) -> Result<LpResult, LpError> {
    let nv = problem.num_vars();
    validate_shape(problem)?;

    let infeasible = || LpResult {
        status: LpStatus::Infeasible,
        value: 0.0,
        primal: vec![0.0; nv],
        dual: vec![0.0; problem.num_rows()],
        bound_duals: vec![0.0; nv],
        iterations: 0,
    };

    // Assemble scaled, sign-normalized working rows. All-zero rows are
    // resolved immediately: consistent ones drop out with a zero dual.
    let mut work: Vec<WorkRow> = Vec::new();
    for (i, row) in problem.rows.iter().enumerate() {
        match make_work_row(row, problem.senses[i], problem.rhs[i], WorkKind::User(i), opts) {
            WorkRowOutcome::Keep(w) => work.push(w),
            WorkRowOutcome::Redundant => {}
            WorkRowOutcome::Inconsistent => return Ok(infeasible()),
        }
    }
    for (j, bound) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = *bound {
            let mut coeffs = vec![0.0; nv];
            coeffs[j] = 1.0;
            match make_work_row(&coeffs, RowSense::Le, u, WorkKind::Bound(j), opts) {
                WorkRowOutcome::Keep(w) => work.push(w),
                WorkRowOutcome::Redundant => {}
                WorkRowOutcome::Inconsistent => return Ok(infeasible()),
            }
        }
    }

    let m = work.len();
    // Column layout: structural, then slack/surplus, then artificial.
    let mut slack_col_of = vec![usize::MAX; m];
    let mut ncols = nv;
    for (i, w) in work.iter().enumerate() {
        if w.sense != RowSense::Eq {
            slack_col_of[i] = ncols;
            ncols += 1;
        }
    }
    let mut art_col_of = vec![usize::MAX; m];
    let mut need_phase1 = false;
    for (i, w) in work.iter().enumerate() {
        if w.sense != RowSense::Le {
            art_col_of[i] = ncols;
            ncols += 1;
            need_phase1 = true;
        }
    }

    let width = ncols + 1;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        ncols,
        basis: vec![0; m],
        cost1: vec![0.0; width],
        cost2: vec![0.0; width],
        artificial: vec![false; ncols],
        work_of_row: (0..m).collect(),
        id_col: vec![usize::MAX; m],
        iterations: 0,
    };
    let mut max_scaled_rhs = 0.0_f64;
    for (i, w) in work.iter().enumerate() {
        let mut row = vec![0.0; width];
        row[..nv].copy_from_slice(&w.coeffs);
        row[ncols] = w.rhs;
        max_scaled_rhs = max_scaled_rhs.max(w.rhs.abs());
        match w.sense {
            RowSense::Le => {
                row[slack_col_of[i]] = 1.0;
                tab.basis[i] = slack_col_of[i];
                tab.id_col[i] = slack_col_of[i];
            }
            RowSense::Ge => {
                row[slack_col_of[i]] = -1.0;
                row[art_col_of[i]] = 1.0;
                tab.basis[i] = art_col_of[i];
                tab.id_col[i] = art_col_of[i];
                tab.artificial[art_col_of[i]] = true;
            }
            RowSense::Eq => {
                row[art_col_of[i]] = 1.0;
                tab.basis[i] = art_col_of[i];
                tab.id_col[i] = art_col_of[i];
                tab.artificial[art_col_of[i]] = true;
            }
        }
        tab.rows.push(row);
    }
    tab.cost2[..nv].copy_from_slice(&problem.objective);
    if need_phase1 {
        for c in 0..ncols {
            if tab.artificial[c] {
                tab.cost1[c] = 1.0;
            }
        }
        // Price out the basic artificials.
        for r in 0..m {
            if tab.artificial[tab.basis[r]] {
                let row = tab.rows[r].clone();
                for j in 0..width {
                    tab.cost1[j] -= row[j];
                }
            }
        }
    }

    let limit = opts
        .max_iterations
        .unwrap_or_else(|| 10 * (m + ncols) * (m + ncols) + 100);

    if need_phase1 {
        match tab.run_phase(true, opts, limit)? {
            PhaseEnd::Done => {}
            PhaseEnd::Unbounded => {
                return Err(LpError::NumericalBreakdown("phase 1 reported unbounded".to_string()))
            }
        }
        let phase1_value = -tab.cost1[ncols];
        if phase1_value > opts.feasibility_tol * (1.0 + max_scaled_rhs) {
            let mut res = infeasible();
            res.iterations = tab.iterations;
            return Ok(res);
        }
        drive_out_artificials(&mut tab, opts);
    }

    let end = tab.run_phase(false, opts, limit)?;
    if matches!(end, PhaseEnd::Unbounded) {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            value: f64::NEG_INFINITY,
            primal: vec![0.0; nv],
            dual: vec![0.0; problem.num_rows()],
            bound_duals: vec![0.0; nv],
            iterations: tab.iterations,
        });
    }

    // Primal values from the basis; duals from the initial identity columns
    // (the phase-2 reduced cost of such a column is minus the tableau dual).
    let rhs = tab.rhs_col();
    let mut primal = vec![0.0; nv];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            primal[b] = tab.rows[r][rhs];
        }
    }
    for v in &mut primal {
        if v.abs() < SNAP {
            *v = 0.0;
        }
        if !v.is_finite() {
            return Err(LpError::NumericalBreakdown("non-finite primal value".to_string()));
        }
    }
    let mut dual = vec![0.0; problem.num_rows()];
    let mut bound_duals = vec![0.0; nv];
    for (w_idx, w) in work.iter().enumerate() {
        if !tab.work_of_row.contains(&w_idx) {
            continue; // redundant row removed in phase 1: dual stays 0
        }
        let y_tab = -tab.cost2[tab.id_col[w_idx]];
        let y = y_tab * w.sign / w.scale;
        if !y.is_finite() {
            return Err(LpError::NumericalBreakdown("non-finite dual value".to_string()));
        }
        match w.kind {
            WorkKind::User(i) => dual[i] = y,
            WorkKind::Bound(j) => bound_duals[j] = y,
        }
    }
    let value: f64 = problem.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();

    Ok(LpResult {
        status: LpStatus::Optimal,
        value,
        primal,
        dual,
        bound_duals,
        iterations: tab.iterations,
    })
}

fn validate_shape(problem: &LpProblem) -> Result<(), LpError> {
    let nv = problem.num_vars();
    if problem.rows.len() != problem.senses.len() || problem.rows.len() != problem.rhs.len() {
        return Err(LpError::SideShape);
    }
    if problem.upper_bounds.len() != nv {
        return Err(LpError::SideShape);
    }
    for (j, c) in problem.objective.iter().enumerate() {
        if !c.is_finite() {
            return Err(LpError::NonFinite { place: format!("objective[{j}]") });
        }
    }
    for (i, row) in problem.rows.iter().enumerate() {
        if row.len() != nv {
            return Err(LpError::RowShape { row: i, got: row.len(), expected: nv });
        }
        for (j, a) in row.iter().enumerate() {
            if !a.is_finite() {
                return Err(LpError::NonFinite { place: format!("row[{i}][{j}]") });
            }
        }
        if !problem.rhs[i].is_finite() {
            return Err(LpError::NonFinite { place: format!("rhs[{i}]") });
        }
    }
    for (j, bound) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = bound {
            if !u.is_finite() || *u < 0.0 {
                return Err(LpError::BadBound { var: j, bound: *u });
            }
        }
    }
    Ok(())
}

enum WorkRowOutcome {
    Keep(WorkRow),
    Redundant,
    Inconsistent,
}

fn make_work_row(
    coeffs: &[f64],
    sense: RowSense,
    rhs: f64,
    kind: WorkKind,
    opts: &SolverOptions,
) -> WorkRowOutcome {
    let scale = coeffs.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()));
    if scale == 0.0 {
        let ok = match sense {
            RowSense::Le => rhs >= -opts.feasibility_tol * (1.0 + rhs.abs()),
            RowSense::Ge => rhs <= opts.feasibility_tol * (1.0 + rhs.abs()),
            RowSense::Eq => rhs.abs() <= opts.feasibility_tol * (1.0 + rhs.abs()),
        };
        return if ok { WorkRowOutcome::Redundant } else { WorkRowOutcome::Inconsistent };
    }
    let mut coeffs: Vec<f64> = coeffs.iter().map(|a| a / scale).collect();
    let mut rhs = rhs / scale;
    let mut sense = sense;
    let mut sign = 1.0;
    if rhs < 0.0 {
        for a in &mut coeffs {
            *a = -*a;
        }
        rhs = -rhs;
        sign = -1.0;
        sense = match sense {
            RowSense::Le => RowSense::Ge,
            RowSense::Ge => RowSense::Le,
            RowSense::Eq => RowSense::Eq,
        };
    }
    WorkRowOutcome::Keep(WorkRow { kind, coeffs, rhs, sense, sign, scale })
}

/// Pivots every artificial variable out of the basis, deleting rows that
/// turn out to be linearly dependent. Leaves feasibility intact: such rows
/// carry a zero right-hand side after phase 1.
fn drive_out_artificials(tab: &mut Tableau, opts: &SolverOptions) {
    let mut r = 0;
    while r < tab.rows.len() {
        if !tab.artificial[tab.basis[r]] {
            r += 1;
            continue;
        }
        let mut pivot_col: Option<usize> = None;
        for c in 0..tab.ncols {
            if !tab.artificial[c] && tab.rows[r][c].abs() > opts.pivot_tol {
                // Largest magnitude wins: the row is degenerate and a near
                // tolerance pivot would amplify noise.
                if pivot_col.map_or(true, |best| tab.rows[r][c].abs() > tab.rows[r][best].abs()) {
                    pivot_col = Some(c);
                }
            }
        }
        match pivot_col {
            Some(c) => {
                tab.pivot(r, c);
                r += 1;
            }
            None => {
                tab.rows.remove(r);
                tab.basis.remove(r);
                tab.work_of_row.remove(r);
            }
        }
    }
}

/// Normalized optimality residuals for a solved problem, each scaled so it
/// can be compared directly against the crate tolerances.
#[derive(Clone, Copy, Debug)]
pub struct Certificate {
    /// Worst primal constraint or bound violation over `1 + max |rhs|`.
    pub primal_residual: f64,
    /// Worst dual feasibility violation over `1 + |c_j|`.
    pub dual_residual: f64,
    /// Worst complementary slackness product over `1 + |value|`.
    pub cs_residual: f64,
    /// `|primal value - dual value|` over `1 + |value|`.
    pub duality_gap: f64,
}

/// Computes the certificate for an `Optimal` result. Callers compare the
/// fields against [`tolerances::LP_FEASIBILITY`],
/// [`tolerances::COMPLEMENTARY_SLACKNESS`] and [`tolerances::DUALITY_GAP`].
pub fn certificate(problem: &LpProblem, result: &LpResult) -> Certificate {
    assert_eq!(result.status, LpStatus::Optimal, "certificate requires an optimal result");
    let nv = problem.num_vars();
    let x = &result.primal;

    let mut b_scale = 1.0_f64;
    for &b in &problem.rhs {
        b_scale = b_scale.max(b.abs());
    }
    for u in problem.upper_bounds.iter().flatten() {
        b_scale = b_scale.max(u.abs());
    }

    let mut primal_residual = 0.0_f64;
    for (i, row) in problem.rows.iter().enumerate() {
        let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        let violation = match problem.senses[i] {
            RowSense::Le => lhs - problem.rhs[i],
            RowSense::Ge => problem.rhs[i] - lhs,
            RowSense::Eq => (lhs - problem.rhs[i]).abs(),
        };
        primal_residual = primal_residual.max(violation);
    }
    for (j, &v) in x.iter().enumerate() {
        primal_residual = primal_residual.max(-v);
        if let Some(u) = problem.upper_bounds[j] {
            primal_residual = primal_residual.max(v - u);
        }
    }

    let value_scale = 1.0 + result.value.abs();
    let mut dual_residual = 0.0_f64;
    let mut cs_residual = 0.0_f64;
    for j in 0..nv {
        let mut rc = problem.objective[j];
        for (i, row) in problem.rows.iter().enumerate() {
            rc -= result.dual[i] * row[j];
        }
        rc -= result.bound_duals[j];
        dual_residual = dual_residual.max(-rc / (1.0 + problem.objective[j].abs()));
        cs_residual = cs_residual.max((rc * x[j]).abs() / value_scale);
    }
    for (i, row) in problem.rows.iter().enumerate() {
        let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        cs_residual = cs_residual.max((result.dual[i] * (lhs - problem.rhs[i])).abs() / value_scale);
    }
    for (j, bound) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = bound {
            cs_residual = cs_residual.max((result.bound_duals[j] * (x[j] - u)).abs() / value_scale);
        }
    }

    let mut dual_value: f64 = problem.rhs.iter().zip(&result.dual).map(|(b, y)| b * y).sum();
    for (j, bound) in problem.upper_bounds.iter().enumerate() {
        if let Some(u) = bound {
            dual_value += u * result.bound_duals[j];
        }
    }
    let duality_gap = (result.value - dual_value).abs() / value_scale;

    Certificate {
        primal_residual: primal_residual / b_scale.max(1.0),
        dual_residual,
        cs_residual,
        duality_gap,
    }
}
