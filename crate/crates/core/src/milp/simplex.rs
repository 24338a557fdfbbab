//! Revised bounded-variable simplex on a sparse LU factored basis.
//!
//! Row `i` gets a logical column `-e_i` whose variable equals the row
//! activity, so the system is `A x − r = 0` with the row bounds moved onto
//! `r`. Nonbasic variables sit at a bound, or at zero when free.
//!
//! The dual simplex runs whenever the basis is dual feasible, which for boxed
//! variables is always true of the starting slack basis once each nonbasic
//! sits at the bound its cost prefers. Otherwise the primal simplex first
//! minimizes the sum of infeasibilities, then the true cost. A solve only
//! reports optimality after both feasibilities hold on freshly recomputed
//! values. Branch-and-bound re-optimizes with the dual simplex after bound
//! changes.

use super::lu::BasisFactor;
use super::model::{MilpModel, Relation, SolverOptions};

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
/// Degenerate primal steps before switching to Bland's rule.
const STALL_LIMIT: usize = 200;
const CLEANUP_ROUNDS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Dual simplex stopped because the objective passed the cutoff.
    Cutoff,
}

pub(crate) struct Simplex {
    m: usize,
    nstruct: usize,
    col_start: Vec<usize>,
    col_index: Vec<usize>,
    col_value: Vec<f64>,
    row_start: Vec<usize>,
    row_index: Vec<usize>,
    row_value: Vec<f64>,
    /// Bounds and costs of all `nstruct + m` variables.
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    state: Vec<VarState>,
    /// Variable at each basis position.
    basis: Vec<usize>,
    x: Vec<f64>,
    /// Reduced costs; meaningful for nonbasic variables.
    d: Vec<f64>,
    factor: BasisFactor,
    opts: SolverOptions,
    base_factor_nnz: usize,
    /// Nonbasic values changed since the basic values were computed.
    dirty: bool,
    pub(crate) pivots: usize,
}

impl Simplex {
    /// Builds the slack basis. Returns `None` when an empty row is violated,
    /// which proves infeasibility without solving.
    pub(crate) fn new(model: &MilpModel, opts: SolverOptions) -> Option<Self> {
        let nstruct = model.num_vars();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut row_lo = Vec::new();
        let mut row_hi = Vec::new();
        for c in &model.constraints {
            let mut t: Vec<(usize, f64)> = c.terms.iter().copied().filter(|&(_, a)| a != 0.0).collect();
            t.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(t.len());
            for (j, a) in t {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            let (l, h) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            if merged.is_empty() {
                if l > opts.feasibility_tol || h < -opts.feasibility_tol {
                    return None;
                }
                continue;
            }
            rows.push(merged);
            row_lo.push(l);
            row_hi.push(h);
        }
        let m = rows.len();
        let n = nstruct + m;

        let mut row_start = vec![0];
        let mut row_index = Vec::new();
        let mut row_value = Vec::new();
        let mut counts = vec![0usize; nstruct];
        for r in &rows {
            for &(j, a) in r {
                row_index.push(j);
                row_value.push(a);
                counts[j] += 1;
            }
            row_start.push(row_index.len());
        }
        let mut col_start = vec![0; nstruct + 1];
        for j in 0..nstruct {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let mut fill = col_start.clone();
        let mut col_index = vec![0; row_index.len()];
        let mut col_value = vec![0.0; row_index.len()];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in r {
                col_index[fill[j]] = i;
                col_value[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut lo = model.lower.clone();
        let mut hi = model.upper.clone();
        lo.extend(row_lo);
        hi.extend(row_hi);
        let mut cost = model.objective.clone();
        cost.resize(n, 0.0);

        let mut s = Simplex {
            m,
            nstruct,
            col_start,
            col_index,
            col_value,
            row_start,
            row_index,
            row_value,
            lo,
            hi,
            cost,
            state: vec![VarState::Basic; n],
            basis: (nstruct..n).collect(),
            x: vec![0.0; n],
            d: vec![0.0; n],
            factor: BasisFactor::default(),
            opts,
            base_factor_nnz: 0,
            dirty: true,
            pivots: 0,
        };
        for j in 0..nstruct {
            let prefer_upper = s.cost[j] < 0.0;
            s.place_nonbasic(j, prefer_upper);
        }
        s.refactor();
        Some(s)
    }

    /// Puts nonbasic `j` on a finite bound, the upper one if preferred and
    /// available.
    fn place_nonbasic(&mut self, j: usize, prefer_upper: bool) {
        let (l, h) = (self.lo[j], self.hi[j]);
        let st = if l == h && l.is_finite() {
            VarState::AtLower
        } else if prefer_upper && h.is_finite() {
            VarState::AtUpper
        } else if l.is_finite() {
            VarState::AtLower
        } else if h.is_finite() {
            VarState::AtUpper
        } else {
            VarState::Zero
        };
        self.state[j] = st;
        self.x[j] = match st {
            VarState::AtLower => l,
            VarState::AtUpper => h,
            _ => 0.0,
        };
        self.dirty = true;
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.nstruct {
            for t in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_index[t], self.col_value[t]);
            }
        } else {
            f(j - self.nstruct, -1.0);
        }
    }

    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        self.for_column(j, |i, a| v[i] = a);
        v
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_column(j, |i, a| s += a * y[i]);
        s
    }

    /// Fresh LU of the current basis, replacing dependent columns by
    /// logicals, then recomputed values and reduced costs.
    pub(crate) fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self
                .basis
                .iter()
                .map(|&j| {
                    let mut c = Vec::new();
                    self.for_column(j, |i, a| c.push((i, a)));
                    c
                })
                .collect();
            match BasisFactor::factorize(self.m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    break;
                }
                Err(s) => {
                    for (&pos, &row) in s.positions.iter().zip(&s.rows) {
                        let out = self.basis[pos];
                        let logical = self.nstruct + row;
                        self.basis[pos] = logical;
                        self.state[logical] = VarState::Basic;
                        let near_upper = self.x[out] > 0.5 * (self.lo[out] + self.hi[out]);
                        self.place_nonbasic(out, near_upper);
                    }
                }
            }
        }
        self.base_factor_nnz = self.factor.factor_nonzeros();
        self.recompute_primal();
        self.recompute_duals();
    }

    fn maybe_refactor(&mut self) {
        if self.factor.num_updates() >= REFACTOR_EVERY
            || self.factor.update_nonzeros() > 3 * self.base_factor_nnz + 10 * self.m
        {
            self.refactor();
        }
    }

    fn recompute_primal(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.state.len() {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                self.for_column(j, |i, a| rhs[i] -= a * v);
            }
        }
        self.factor.ftran(&mut rhs);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[pos];
        }
        self.dirty = false;
    }

    fn duals_for(&self, basic_cost: Vec<f64>) -> Vec<f64> {
        let mut y = basic_cost;
        self.factor.btran(&mut y);
        y
    }

    fn recompute_duals(&mut self) {
        let y = self.duals_for(self.basis.iter().map(|&j| self.cost[j]).collect());
        for j in 0..self.state.len() {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                self.cost[j] - self.dot_column(j, &y)
            };
        }
    }

    /// Row `r` of `B⁻¹A` as a dense vector over all variables, with the list
    /// of its nonzero nonbasic entries.
    fn pivot_row(&self, r: usize) -> (Vec<f64>, Vec<usize>) {
        let mut rho = vec![0.0; self.m];
        rho[r] = 1.0;
        self.factor.btran(&mut rho);
        let mut alpha = vec![0.0; self.state.len()];
        let mut touched = Vec::new();
        for (i, &ri) in rho.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for t in self.row_start[i]..self.row_start[i + 1] {
                let j = self.row_index[t];
                if alpha[j] == 0.0 {
                    touched.push(j);
                }
                alpha[j] += ri * self.row_value[t];
            }
            let logical = self.nstruct + i;
            alpha[logical] = -ri;
            touched.push(logical);
        }
        touched.sort_unstable();
        touched.dedup();
        touched.retain(|&j| self.state[j] != VarState::Basic && alpha[j] != 0.0);
        (alpha, touched)
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lo[j] - v).max(v - self.hi[j]).max(0.0)
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&j| self.infeasibility(j)).fold(0.0, f64::max)
    }

    fn dual_infeasibility(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic => 0.0,
            _ if self.lo[j] == self.hi[j] => 0.0,
            VarState::AtLower => (-self.d[j]).max(0.0),
            VarState::AtUpper => self.d[j].max(0.0),
            VarState::Zero => self.d[j].abs(),
        }
    }

    fn max_dual_infeasibility(&self) -> f64 {
        (0..self.state.len()).map(|j| self.dual_infeasibility(j)).fold(0.0, f64::max)
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        self.x[..self.nstruct].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.nstruct).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Changes the bounds of structural `j`, keeping a nonbasic variable on
    /// the bound that matches its reduced cost.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.state[j] != VarState::Basic {
            let prefer_upper = self.d[j] < 0.0;
            self.place_nonbasic(j, prefer_upper);
        }
    }

    /// Solves from the current basis: dual simplex when it is dual feasible,
    /// primal otherwise, repeated until a fresh recomputation confirms both.
    pub(crate) fn optimize(&mut self, cutoff: Option<f64>) -> LpOutcome {
        let tol = self.opts.feasibility_tol;
        let mut budget = self.opts.iteration_limit;
        for round in 0..CLEANUP_ROUNDS {
            if round > 0 {
                self.refactor();
            } else if self.dirty {
                self.recompute_primal();
            }
            let primal_ok = self.max_primal_infeasibility() <= tol;
            let dual_ok = self.max_dual_infeasibility() <= DUAL_TOL;
            if primal_ok && dual_ok {
                return LpOutcome::Optimal;
            }
            let outcome = if dual_ok {
                self.dual(cutoff, &mut budget)
            } else {
                self.primal(&mut budget)
            };
            if outcome != LpOutcome::Optimal {
                return outcome;
            }
        }
        // persistent drift at the tolerance scale: accept a near-clean basis
        self.refactor();
        if self.max_primal_infeasibility() <= 1e3 * tol && self.max_dual_infeasibility() <= 1e3 * DUAL_TOL {
            LpOutcome::Optimal
        } else {
            LpOutcome::IterationLimit
        }
    }

    /// Dual simplex from a dual feasible basis.
    fn dual(&mut self, cutoff: Option<f64>, budget: &mut usize) -> LpOutcome {
        let tol = self.opts.feasibility_tol;
        loop {
            if *budget == 0 {
                return LpOutcome::IterationLimit;
            }
            *budget -= 1;

            // leaving: largest bound violation
            let mut r = usize::MAX;
            let mut worst = tol;
            for (pos, &j) in self.basis.iter().enumerate() {
                let v = self.infeasibility(j);
                if v > worst {
                    worst = v;
                    r = pos;
                }
            }
            if r == usize::MAX {
                return LpOutcome::Optimal;
            }
            if let Some(c) = cutoff {
                if self.objective() > c {
                    return LpOutcome::Cutoff;
                }
            }
            let leaving = self.basis[r];
            let to_lower = self.x[leaving] < self.lo[leaving];
            let target = if to_lower { self.lo[leaving] } else { self.hi[leaving] };

            let (alpha, touched) = self.pivot_row(r);
            // x_leaving moves by −alpha_j·Δx_j; the entering variable must
            // push it toward the violated bound
            let eligible = |s: &Self, j: usize| -> bool {
                let a = alpha[j];
                if a.abs() <= PIVOT_TOL || s.lo[j] == s.hi[j] {
                    return false;
                }
                match s.state[j] {
                    VarState::AtLower => (a < 0.0) == to_lower,
                    VarState::AtUpper => (a > 0.0) == to_lower,
                    VarState::Zero => true,
                    VarState::Basic => false,
                }
            };
            // Harris two-pass ratio test
            let mut bound = f64::INFINITY;
            for &j in &touched {
                if eligible(self, j) {
                    bound = bound.min((self.d[j].abs() + DUAL_TOL) / alpha[j].abs());
                }
            }
            if bound.is_infinite() {
                return LpOutcome::Infeasible;
            }
            let mut q = usize::MAX;
            let mut best = 0.0;
            for &j in &touched {
                if eligible(self, j) && self.d[j].abs() / alpha[j].abs() <= bound && alpha[j].abs() > best {
                    best = alpha[j].abs();
                    q = j;
                }
            }

            let mut col = self.column_dense(q);
            self.factor.ftran(&mut col);
            let arq = col[r];
            if (arq - alpha[q]).abs() > 1e-7 * (1.0 + arq.abs()) || arq.abs() <= PIVOT_TOL {
                // row and column disagree: the factors have drifted
                self.refactor();
                continue;
            }

            let delta = (self.x[leaving] - target) / arq;
            for (pos, &a) in col.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[pos]] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[leaving] = target;

            let theta = self.d[q] / arq;
            for &j in &touched {
                self.d[j] -= theta * alpha[j];
            }
            self.d[leaving] = -theta;
            self.d[q] = 0.0;
            self.state[leaving] = if to_lower { VarState::AtLower } else { VarState::AtUpper };
            self.state[q] = VarState::Basic;
            self.basis[r] = q;
            // Harris may leave a tiny wrong-signed reduced cost; zero it
            for &j in touched.iter().chain(std::iter::once(&leaving)) {
                let v = self.dual_infeasibility(j);
                if v > 0.0 && v <= DUAL_TOL {
                    self.d[j] = 0.0;
                }
            }
            self.factor.update(r, &col);
            self.pivots += 1;
            self.maybe_refactor();
        }
    }

    /// Primal simplex: minimizes the sum of infeasibilities while any basic
    /// variable is out of bounds, then the true cost.
    fn primal(&mut self, budget: &mut usize) -> LpOutcome {
        let tol = self.opts.feasibility_tol;
        let n = self.state.len();
        let mut stalled = 0usize;
        loop {
            if *budget == 0 {
                return LpOutcome::IterationLimit;
            }
            *budget -= 1;

            let phase_one = self.max_primal_infeasibility() > tol;
            let basic_cost: Vec<f64> = self
                .basis
                .iter()
                .map(|&j| {
                    if !phase_one {
                        self.cost[j]
                    } else if self.x[j] < self.lo[j] - tol {
                        -1.0
                    } else if self.x[j] > self.hi[j] + tol {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let y = self.duals_for(basic_cost);
            for j in 0..n {
                self.d[j] = if self.state[j] == VarState::Basic {
                    0.0
                } else {
                    let c = if phase_one { 0.0 } else { self.cost[j] };
                    c - self.dot_column(j, &y)
                };
            }

            let bland = stalled >= STALL_LIMIT;
            let mut q = usize::MAX;
            let mut best = DUAL_TOL;
            for j in 0..n {
                let v = self.dual_infeasibility(j);
                if v > best {
                    q = j;
                    if bland {
                        break;
                    }
                    best = v;
                }
            }
            if q == usize::MAX {
                return if phase_one { LpOutcome::Infeasible } else { LpOutcome::Optimal };
            }
            let dir = match self.state[q] {
                VarState::AtLower => 1.0,
                VarState::AtUpper => -1.0,
                _ => -self.d[q].signum(),
            };

            let mut col = self.column_dense(q);
            self.factor.ftran(&mut col);

            // step at which basic `pos` blocks, and whether it leaves at its
            // upper bound
            let limit = |s: &Self, pos: usize, slack: f64| -> Option<(f64, bool)> {
                let a = col[pos];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let j = s.basis[pos];
                let rate = -a * dir;
                let (v, l, h) = (s.x[j], s.lo[j], s.hi[j]);
                if v < l - tol {
                    (rate > 0.0).then(|| ((l - v + slack) / rate, false))
                } else if v > h + tol {
                    (rate < 0.0).then(|| ((v - h + slack) / -rate, true))
                } else if rate < 0.0 {
                    l.is_finite().then(|| (((v - l).max(0.0) + slack) / -rate, false))
                } else {
                    h.is_finite().then(|| (((h - v).max(0.0) + slack) / rate, true))
                }
            };
            let flip = self.hi[q] - self.lo[q];
            let mut step = flip;
            let mut leave: Option<(usize, bool)> = None;
            if bland {
                for pos in 0..self.m {
                    if let Some((ratio, up)) = limit(self, pos, 0.0) {
                        let take = ratio < step - 1e-12
                            || (ratio <= step + 1e-12
                                && leave.is_none_or(|(lp, _)| self.basis[pos] < self.basis[lp]));
                        if take {
                            step = ratio;
                            leave = Some((pos, up));
                        }
                    }
                }
            } else {
                // Harris two-pass ratio test
                let mut bound = flip;
                for pos in 0..self.m {
                    if let Some((ratio, _)) = limit(self, pos, tol) {
                        bound = bound.min(ratio);
                    }
                }
                if bound < flip {
                    let mut best_a = 0.0;
                    for pos in 0..self.m {
                        if let Some((ratio, up)) = limit(self, pos, 0.0) {
                            if ratio <= bound && col[pos].abs() > best_a {
                                best_a = col[pos].abs();
                                leave = Some((pos, up));
                                step = ratio;
                            }
                        }
                    }
                }
            }
            if step.is_infinite() {
                return LpOutcome::Unbounded;
            }
            stalled = if step <= 1e-12 { stalled + 1 } else { 0 };

            let delta = dir * step;
            for (pos, &a) in col.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[pos]] -= a * delta;
                }
            }
            self.x[q] += delta;
            match leave {
                None => {
                    let up = dir > 0.0;
                    self.state[q] = if up { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if up { self.hi[q] } else { self.lo[q] };
                }
                Some((r, up)) => {
                    let leaving = self.basis[r];
                    self.state[leaving] = if up { VarState::AtUpper } else { VarState::AtLower };
                    self.x[leaving] = if up { self.hi[leaving] } else { self.lo[leaving] };
                    self.state[q] = VarState::Basic;
                    self.basis[r] = q;
                    self.factor.update(r, &col);
                    self.pivots += 1;
                    self.maybe_refactor();
                }
            }
        }
    }
}
