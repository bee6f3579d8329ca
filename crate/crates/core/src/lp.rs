//! A dense two-phase simplex solver for the small linear programs arising in
//! triangle-relaxation certification, relational-bound computation, and
//! k-ReLU refinement.
//!
//! Variables may carry finite or infinite bounds; internally every variable
//! is shifted or split so the standard form `min c.y, S y = d, y >= 0` has a
//! nonnegative right-hand side. Dantzig pricing is used until a run of
//! degenerate pivots, after which Bland's rule takes over to guarantee
//! termination.

use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const COST_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERACY_THRESHOLD: usize = 40;

/// `min c.x` subject to `A x <= b`, `E x = f`, `lo <= x <= hi`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_ineq: Vec<Vec<f64>>,
    pub b_ineq: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl LinearProgram {
    /// An LP over `n` free variables with zero objective.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            a_ineq: Vec::new(),
            b_ineq: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, c: &[f64]) {
        self.objective.copy_from_slice(c);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.a_ineq.push(row);
        self.b_ineq.push(rhs);
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lo.len() != n || self.hi.len() != n {
            return Err(Error::MalformedLp("bound vectors do not match arity".into()));
        }
        if self.a_ineq.len() != self.b_ineq.len() || self.a_eq.len() != self.b_eq.len() {
            return Err(Error::MalformedLp("row/rhs count mismatch".into()));
        }
        for row in self.a_ineq.iter().chain(&self.a_eq) {
            if row.len() != n {
                return Err(Error::MalformedLp("constraint row arity mismatch".into()));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::MalformedLp("non-finite constraint coefficient".into()));
            }
        }
        if self
            .objective
            .iter()
            .chain(&self.b_ineq)
            .chain(&self.b_eq)
            .any(|x| !x.is_finite())
        {
            return Err(Error::MalformedLp("non-finite objective or rhs".into()));
        }
        if self.lo.iter().any(|x| x.is_nan()) || self.hi.iter().any(|x| x.is_nan()) {
            return Err(Error::MalformedLp("NaN variable bound".into()));
        }
        Ok(())
    }
}

/// Primal/dual data reported at an optimum.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal objective value.
    pub value: f64,
    /// Optimal point in the original variable space.
    pub point: Vec<f64>,
    /// One nonnegative multiplier per inequality row.
    pub ineq_duals: Vec<f64>,
    /// One free multiplier per equality row.
    pub eq_duals: Vec<f64>,
    /// Lagrangian dual value of the reported multipliers; a lower bound on
    /// `value` by weak duality.
    pub dual_objective: f64,
}

/// Result of an LP solve. Infeasible and unbounded problems are outcomes,
/// not errors.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    /// The optimal value; panics on infeasible or unbounded outcomes.
    pub fn value(&self) -> f64 {
        match self {
            LpOutcome::Optimal(sol) => sol.value,
            other => panic!("LP is not optimal: {other:?}"),
        }
    }

    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }
}

/// How an original variable maps into the standard form.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = value` (eliminated in presolve).
    Fixed(f64),
    /// `x = lo + y[col]`.
    Shifted { col: usize, lo: f64 },
    /// `x = hi - y[col]`.
    Mirrored { col: usize, hi: f64 },
    /// `x = y[col] - y[col + 1]`.
    Split { col: usize },
}

/// Solves the LP exactly with a dense two-phase simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();

    for j in 0..n {
        if lp.lo[j] > lp.hi[j] {
            return Ok(LpOutcome::Infeasible);
        }
    }

    // Presolve: eliminate fixed variables and set up the variable mapping.
    let mut maps = Vec::with_capacity(n);
    let mut num_cols = 0usize;
    for j in 0..n {
        if lp.lo[j] == lp.hi[j] {
            maps.push(VarMap::Fixed(lp.lo[j]));
        } else if lp.lo[j].is_finite() {
            maps.push(VarMap::Shifted {
                col: num_cols,
                lo: lp.lo[j],
            });
            num_cols += 1;
        } else if lp.hi[j].is_finite() {
            maps.push(VarMap::Mirrored {
                col: num_cols,
                hi: lp.hi[j],
            });
            num_cols += 1;
        } else {
            maps.push(VarMap::Split { col: num_cols });
            num_cols += 2;
        }
    }

    // Upper-bound rows for doubly-bounded variables.
    let ub_rows: Vec<(usize, f64)> = (0..n)
        .filter_map(|j| match maps[j] {
            VarMap::Shifted { col, lo } if lp.hi[j].is_finite() => Some((col, lp.hi[j] - lo)),
            _ => None,
        })
        .collect();

    let m_ineq = lp.a_ineq.len() + ub_rows.len();
    let m_eq = lp.a_eq.len();
    let m = m_ineq + m_eq;

    // Column layout: structural | slacks (one per inequality) | artificials | rhs.
    let num_slack = m_ineq;
    let stride = num_cols + num_slack + m + 1;
    let rhs_col = stride - 1;
    let mut tab = Tableau::zeros(m, stride);
    let mut obj_const = 0.0;
    let mut cost = vec![0.0; num_cols];
    for j in 0..n {
        match maps[j] {
            VarMap::Fixed(v) => obj_const += lp.objective[j] * v,
            VarMap::Shifted { col, lo } => {
                cost[col] += lp.objective[j];
                obj_const += lp.objective[j] * lo;
            }
            VarMap::Mirrored { col, hi } => {
                cost[col] -= lp.objective[j];
                obj_const += lp.objective[j] * hi;
            }
            VarMap::Split { col } => {
                cost[col] += lp.objective[j];
                cost[col + 1] -= lp.objective[j];
            }
        }
    }

    // Fill constraint rows (inequalities, then upper-bound rows, then
    // equalities), translating columns through the variable mapping.
    let fill_row = |tab: &mut Tableau, r: usize, row: &[f64], rhs: f64| {
        let mut d = rhs;
        let dst = tab.row_mut(r);
        for j in 0..n {
            let a = row[j];
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Fixed(v) => d -= a * v,
                VarMap::Shifted { col, lo } => {
                    dst[col] += a;
                    d -= a * lo;
                }
                VarMap::Mirrored { col, hi } => {
                    dst[col] -= a;
                    d -= a * hi;
                }
                VarMap::Split { col } => {
                    dst[col] += a;
                    dst[col + 1] -= a;
                }
            }
        }
        dst[rhs_col] = d;
    };

    for (r, (row, rhs)) in lp.a_ineq.iter().zip(&lp.b_ineq).enumerate() {
        fill_row(&mut tab, r, row, *rhs);
    }
    for (k, (col, ub)) in ub_rows.iter().enumerate() {
        let r = lp.a_ineq.len() + k;
        let dst = tab.row_mut(r);
        dst[*col] = 1.0;
        dst[rhs_col] = *ub;
    }
    for (k, (row, rhs)) in lp.a_eq.iter().zip(&lp.b_eq).enumerate() {
        fill_row(&mut tab, m_ineq + k, row, *rhs);
    }

    // Slack coefficients, sign normalization, artificial columns.
    let mut flip = vec![1.0f64; m];
    let mut basis = vec![usize::MAX; m];
    let mut artificial_of_row = vec![usize::MAX; m];
    let mut next_art = num_cols + num_slack;
    for r in 0..m {
        let dst = tab.row_mut(r);
        if r < m_ineq {
            dst[num_cols + r] = 1.0;
        }
        if dst[rhs_col] < 0.0 {
            flip[r] = -1.0;
            for v in dst.iter_mut() {
                *v = -*v;
            }
        }
        let needs_artificial = r >= m_ineq || flip[r] < 0.0;
        if needs_artificial {
            dst[next_art] = 1.0;
            basis[r] = next_art;
            artificial_of_row[r] = next_art;
            next_art += 1;
        } else {
            basis[r] = num_cols + r;
        }
    }
    let first_artificial = num_cols + num_slack;
    let num_total = next_art;

    let mut state = Simplex {
        tab,
        basis,
        rhs_col,
        num_total,
        first_artificial,
        pivots: 0,
        max_pivots: 50 * (num_total + m + 2),
    };

    // Phase 1: minimize the sum of artificials.
    if state.basis.iter().any(|&b| b >= first_artificial) {
        let mut cost1 = vec![0.0; stride];
        for r in 0..m {
            if state.basis[r] >= first_artificial {
                let src = state.tab.row(r);
                for (c, v) in cost1.iter_mut().zip(src) {
                    *c -= v;
                }
            }
        }
        for a in first_artificial..num_total {
            cost1[a] += 1.0;
        }
        match state.run(&mut cost1, true)? {
            LoopEnd::Optimal => {}
            LoopEnd::Unbounded => {
                // Phase-1 objective is bounded below by zero, so this is a
                // numerical breakdown rather than a model property.
                return Err(Error::SolverStall {
                    pivots: state.pivots,
                });
            }
        }
        let infeasibility = -cost1[rhs_col];
        if infeasibility > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        state.evict_artificials();
    }

    // Phase 2: original objective over the feasible basis.
    let mut cost2 = vec![0.0; stride];
    cost2[..num_cols].copy_from_slice(&cost);
    for r in 0..m {
        let b = state.basis[r];
        let cb = if b < num_cols { cost[b] } else { 0.0 };
        if cb != 0.0 {
            let src = state.tab.row(r);
            for (c, v) in cost2.iter_mut().zip(src) {
                *c -= cb * v;
            }
        }
    }
    match state.run(&mut cost2, false)? {
        LoopEnd::Unbounded => return Ok(LpOutcome::Unbounded),
        LoopEnd::Optimal => {}
    }

    // Primal point in original coordinates.
    let mut y = vec![0.0; num_total];
    for r in 0..m {
        y[state.basis[r]] = state.tab.row(r)[rhs_col];
    }
    let point: Vec<f64> = maps
        .iter()
        .map(|mp| match *mp {
            VarMap::Fixed(v) => v,
            VarMap::Shifted { col, lo } => lo + y[col],
            VarMap::Mirrored { col, hi } => hi - y[col],
            VarMap::Split { col } => y[col] - y[col + 1],
        })
        .collect();
    let value = point
        .iter()
        .zip(&lp.objective)
        .map(|(x, c)| x * c)
        .sum::<f64>();
    let _ = obj_const;

    // Multiplier for an original inequality row is the reduced cost of its
    // slack; for an equality row it is the artificial's reduced cost times
    // the row's sign flip, negated into the Lagrangian convention.
    let ineq_duals: Vec<f64> = (0..lp.a_ineq.len())
        .map(|r| cost2[num_cols + r].max(0.0))
        .collect();
    let eq_duals: Vec<f64> = (0..m_eq)
        .map(|k| {
            let r = m_ineq + k;
            flip[r] * cost2[artificial_of_row[r]]
        })
        .collect();

    let dual_objective = lagrangian_dual_value(lp, &ineq_duals, &eq_duals);

    Ok(LpOutcome::Optimal(LpSolution {
        value,
        point,
        ineq_duals,
        eq_duals,
        dual_objective,
    }))
}

/// Evaluates `g(lambda, mu) = -lambda.b - mu.f + min_box (c + A'lambda + E'mu).x`,
/// a certified lower bound on the optimum for any `lambda >= 0`.
fn lagrangian_dual_value(lp: &LinearProgram, ineq_duals: &[f64], eq_duals: &[f64]) -> f64 {
    let n = lp.num_vars();
    let mut residual = lp.objective.clone();
    for (row, lam) in lp.a_ineq.iter().zip(ineq_duals) {
        for j in 0..n {
            residual[j] += lam * row[j];
        }
    }
    for (row, mu) in lp.a_eq.iter().zip(eq_duals) {
        for j in 0..n {
            residual[j] += mu * row[j];
        }
    }
    let mut g = -lp
        .b_ineq
        .iter()
        .zip(ineq_duals)
        .map(|(b, l)| b * l)
        .sum::<f64>()
        - lp.b_eq.iter().zip(eq_duals).map(|(f, m)| f * m).sum::<f64>();
    for j in 0..n {
        let r = residual[j];
        let term = if r > 0.0 {
            r * lp.lo[j]
        } else if r < 0.0 {
            r * lp.hi[j]
        } else {
            0.0
        };
        if term.is_finite() {
            g += term;
        } else if r.abs() > 1e-9 * (1.0 + lp.objective[j].abs()) {
            // A genuinely unbounded inner minimization, not round-off.
            return f64::NEG_INFINITY;
        }
    }
    g
}

enum LoopEnd {
    Optimal,
    Unbounded,
}

/// Dense row-major tableau.
struct Tableau {
    data: Vec<f64>,
    stride: usize,
}

impl Tableau {
    fn zeros(rows: usize, stride: usize) -> Self {
        Tableau {
            data: vec![0.0; rows * stride],
            stride,
        }
    }

    fn nrows(&self) -> usize {
        if self.stride == 0 {
            0
        } else {
            self.data.len() / self.stride
        }
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.stride + c]
    }
}

struct Simplex {
    tab: Tableau,
    basis: Vec<usize>,
    rhs_col: usize,
    num_total: usize,
    first_artificial: usize,
    pivots: usize,
    max_pivots: usize,
}

impl Simplex {
    /// Runs the simplex loop to optimality on the given reduced-cost row.
    fn run(&mut self, cost: &mut [f64], phase_one: bool) -> Result<LoopEnd> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERACY_THRESHOLD;
            let Some(entering) = self.choose_entering(cost, phase_one, bland) else {
                return Ok(LoopEnd::Optimal);
            };
            let Some(leaving) = self.choose_leaving(entering) else {
                return Ok(LoopEnd::Unbounded);
            };
            let step = self.tab.at(leaving, self.rhs_col);
            self.pivot(leaving, entering, cost);
            self.pivots += 1;
            if self.pivots > self.max_pivots {
                return Err(Error::SolverStall {
                    pivots: self.pivots,
                });
            }
            if step <= PIVOT_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }

    fn choose_entering(&self, cost: &[f64], phase_one: bool, bland: bool) -> Option<usize> {
        let limit = if phase_one {
            self.num_total
        } else {
            // Artificials are barred from re-entering in phase 2.
            self.first_artificial
        };
        if bland {
            (0..limit).find(|&j| cost[j] < -COST_TOL)
        } else {
            let mut best = None;
            let mut best_cost = -COST_TOL;
            for (j, &c) in cost.iter().enumerate().take(limit) {
                if c < best_cost {
                    best_cost = c;
                    best = Some(j);
                }
            }
            best
        }
    }

    /// Minimum-ratio test; ties broken toward the smallest basis index.
    fn choose_leaving(&self, entering: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.tab.nrows() {
            let a = self.tab.at(r, entering);
            if a > PIVOT_TOL {
                let ratio = self.tab.at(r, self.rhs_col) / a;
                match best {
                    None => best = Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - PIVOT_TOL
                            || (ratio <= bratio + PIVOT_TOL && self.basis[r] < self.basis[br])
                        {
                            best = Some((r, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize, cost: &mut [f64]) {
        let rhs_col = self.rhs_col;
        let pivot = self.tab.at(row, col);
        {
            let prow = self.tab.row_mut(row);
            let inv = 1.0 / pivot;
            for v in prow.iter_mut() {
                *v *= inv;
            }
            prow[col] = 1.0;
        }
        let stride = self.tab.stride;
        let (before, rest) = self.tab.data.split_at_mut(row * stride);
        let (prow, after) = rest.split_at_mut(stride);
        let eliminate = |dst: &mut [f64]| {
            for target in dst.chunks_exact_mut(stride) {
                let factor = target[col];
                if factor != 0.0 {
                    for (t, p) in target.iter_mut().zip(prow.iter()) {
                        *t -= factor * p;
                    }
                    target[col] = 0.0;
                    if target[rhs_col] < 0.0 && target[rhs_col] > -FEAS_TOL {
                        target[rhs_col] = 0.0;
                    }
                }
            }
        };
        eliminate(before);
        eliminate(after);
        let factor = cost[col];
        if factor != 0.0 {
            for (t, p) in cost.iter_mut().zip(prow.iter()) {
                *t -= factor * p;
            }
            cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Pivots basic artificials out after phase 1 where a structural or
    /// slack column permits it; rows that do not are redundant and keep a
    /// zero-valued artificial that is barred from re-entering.
    fn evict_artificials(&mut self) {
        let mut dummy = vec![0.0; self.rhs_col + 1];
        for r in 0..self.tab.nrows() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| self.tab.at(r, j).abs() > PIVOT_TOL);
            if let Some(col) = col {
                self.pivot(r, col, &mut dummy);
                dummy.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
}
