//! Bounded-variable revised simplex for the LP relaxation.
//!
//! Every row `r` gets a logical column `s_r = a_r·x` whose bounds encode the
//! row sense, so the working system is `[A | −I]·(x, s) = 0` with bounds on
//! all `n + m` columns. Infinite bounds are kept as infinities. A cold solve
//! runs the primal simplex from the slack basis (phase 1 minimizes the sum of
//! infeasibilities); after bound tightening the retained basis stays dual
//! feasible and the dual simplex reoptimizes. Pricing is Dantzig's rule until
//! `stall_threshold` consecutive degenerate pivots, then Bland's rule.
//!
//! Besides the model rows the state carries one switchable row per generic
//! indicator link (free until activated) and an objective cutoff row (free
//! until a cutoff is set), so switching them never changes the basis size.

mod factor;

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Implication, Point, Problem};
use factor::Factor;

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Unsolved,
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic at zero with both bounds infinite.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundChange {
    pub var: usize,
    pub side: Side,
    pub old: f64,
    pub new: f64,
}

impl BoundChange {
    pub fn lower(var: usize, old: f64, new: f64) -> Self {
        Self {
            var,
            side: Side::Lower,
            old,
            new,
        }
    }

    pub fn upper(var: usize, old: f64, new: f64) -> Self {
        Self {
            var,
            side: Side::Upper,
            old,
            new,
        }
    }

    pub fn tightens(&self) -> bool {
        match self.side {
            Side::Lower => self.new >= self.old,
            Side::Upper => self.new <= self.old,
        }
    }
}

/// Column statuses plus the column held at each basis position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub status: Vec<VarStatus>,
    pub heads: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibilityProof {
    /// A column whose lower bound exceeds its upper bound.
    CrossedBounds { column: usize },
    /// Row multipliers `w` such that `wᵀ(A·x − s) = 0` cannot hold on the box.
    Farkas(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iter: u64,
    pub refactor_interval: usize,
    pub stall_threshold: u32,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-6,
            opt_tol: 1e-7,
            max_iter: 100_000,
            refactor_interval: 50,
            stall_threshold: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRole {
    Model(usize),
    /// Row of the generic indicator link with this index.
    Indicator(usize),
    Cutoff,
}

/// Saved bounds, basis and solution for exact restoration.
#[derive(Debug, Clone)]
pub struct LpSnapshot {
    lower: Vec<f64>,
    upper: Vec<f64>,
    basis: Basis,
    x: Vec<f64>,
    status: LpStatus,
    objective: f64,
    proof: Option<InfeasibilityProof>,
    ray: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LpState {
    config: LpConfig,
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    roles: Vec<RowRole>,
    /// Slack range a switchable row takes when active.
    active_range: Vec<(f64, f64)>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    vstatus: Vec<VarStatus>,
    heads: Vec<usize>,
    x: Vec<f64>,
    status: LpStatus,
    objective: f64,
    factor: Option<Factor>,
    proof: Option<InfeasibilityProof>,
    ray: Option<Vec<f64>>,
    iterations: u64,
    last_iterations: u64,
}

enum PrimalEnd {
    Optimal,
    Infeasible(Vec<f64>),
    Unbounded(Vec<f64>),
    IterationLimit,
}

enum DualEnd {
    Optimal,
    Infeasible(Vec<f64>),
    IterationLimit,
    NotDualFeasible,
}

impl LpState {
    /// LP relaxation of an indicator-form problem: integrality and indicator
    /// implications are dropped.
    pub fn relax(problem: &Problem) -> Self {
        Self::relax_with(problem, LpConfig::default())
    }

    pub fn relax_with(problem: &Problem, config: LpConfig) -> Self {
        let n = problem.num_vars();
        let mut rows = Vec::new();
        let mut roles = Vec::new();
        let mut ranges = Vec::new();
        for (r, row) in problem.rows.iter().enumerate() {
            rows.push(row.coeffs.clone());
            roles.push(RowRole::Model(r));
            ranges.push(row.sense.range(row.rhs));
        }
        for (k, link) in problem.links.iter().enumerate() {
            if let Implication::Generic { row, .. } = &link.implication {
                rows.push(row.coeffs.clone());
                roles.push(RowRole::Indicator(k));
                ranges.push(row.sense.range(row.rhs));
            }
        }
        let cutoff: Vec<(usize, f64)> = problem
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.obj != 0.0)
            .map(|(j, v)| (j, v.obj))
            .collect();
        rows.push(cutoff);
        roles.push(RowRole::Cutoff);
        ranges.push((f64::NEG_INFINITY, f64::INFINITY));

        let m = rows.len();
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, a) in row {
                cols[j].push((r, a));
            }
        }
        let mut lower: Vec<f64> = problem.variables.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = problem.variables.iter().map(|v| v.upper).collect();
        for (r, role) in roles.iter().enumerate() {
            let (lo, hi) = match role {
                RowRole::Model(_) => ranges[r],
                _ => (f64::NEG_INFINITY, f64::INFINITY),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let cost = problem.variables.iter().map(|v| v.obj).collect();
        let mut lp = Self {
            config,
            n,
            m,
            cols,
            rows,
            roles,
            active_range: ranges,
            cost,
            lower,
            upper,
            vstatus: Vec::new(),
            heads: Vec::new(),
            x: vec![0.0; n + m],
            status: LpStatus::Unsolved,
            objective: 0.0,
            factor: None,
            proof: None,
            ray: None,
            iterations: 0,
            last_iterations: 0,
        };
        lp.reset_basis();
        for j in 0..n + m {
            if lp.lower[j] > lp.upper[j] {
                lp.mark_crossed(j);
                break;
            }
        }
        lp
    }

    pub fn config(&self) -> &LpConfig {
        &self.config
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// All rows including switchable and cutoff rows.
    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn row_roles(&self) -> &[RowRole] {
        &self.roles
    }

    pub fn row_coeffs(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Structural primal values of the last solve.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn point(&self) -> Point {
        Point(self.values().to_vec())
    }

    /// Row activities of the last solve.
    pub fn row_activities(&self) -> &[f64] {
        &self.x[self.n..]
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower[..self.n]
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper[..self.n]
    }

    pub fn slack_bounds(&self, r: usize) -> (f64, f64) {
        (self.lower[self.n + r], self.upper[self.n + r])
    }

    pub fn basis(&self) -> Basis {
        Basis {
            status: self.vstatus.clone(),
            heads: self.heads.clone(),
        }
    }

    pub fn infeasibility_proof(&self) -> Option<&InfeasibilityProof> {
        self.proof.as_ref()
    }

    pub fn unbounded_ray(&self) -> Option<&[f64]> {
        self.ray.as_deref()
    }

    /// Simplex iterations over the lifetime of this state.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Simplex iterations of the most recent solve.
    pub fn last_iterations(&self) -> u64 {
        self.last_iterations
    }

    /// Reduced costs `c − Aᵀy` of the structural columns at the current basis.
    pub fn reduced_costs(&mut self) -> Vec<f64> {
        if self.factor.is_none() {
            self.refactor();
        }
        let y = self.duals_for(&self.phase2_basic_costs());
        (0..self.n).map(|j| self.cost[j] - self.col_dot(&y, j)).collect()
    }

    /// Row duals `y` with `Bᵀy = c_B` at the current basis.
    pub fn row_duals(&mut self) -> Vec<f64> {
        if self.factor.is_none() {
            self.refactor();
        }
        self.duals_for(&self.phase2_basic_costs())
    }

    pub fn snapshot(&self) -> LpSnapshot {
        LpSnapshot {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            basis: self.basis(),
            x: self.x.clone(),
            status: self.status,
            objective: self.objective,
            proof: self.proof.clone(),
            ray: self.ray.clone(),
        }
    }

    pub fn restore(&mut self, snap: &LpSnapshot) {
        self.lower.clone_from(&snap.lower);
        self.upper.clone_from(&snap.upper);
        self.vstatus.clone_from(&snap.basis.status);
        self.heads.clone_from(&snap.basis.heads);
        self.x.clone_from(&snap.x);
        self.status = snap.status;
        self.objective = snap.objective;
        self.proof.clone_from(&snap.proof);
        self.ray.clone_from(&snap.ray);
        self.factor = None;
    }

    /// Tightens one structural bound. Crossing bounds make the state
    /// infeasible without pivoting.
    pub fn apply_bound_change(&mut self, change: BoundChange) {
        let (lo, hi) = self.bounds(change.var);
        match change.side {
            Side::Lower => self.set_column_bounds(change.var, change.new, hi),
            Side::Upper => self.set_column_bounds(change.var, lo, change.new),
        }
    }

    /// Sets both bounds of structural column `j`.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        assert!(j < self.n);
        self.set_column_bounds(j, lo, hi);
    }

    /// Replaces all structural bounds at once.
    pub fn set_all_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        for j in 0..self.n {
            self.lower[j] = lower[j];
            self.upper[j] = upper[j];
            self.fix_nonbasic_status(j);
        }
        self.invalidate();
        self.check_crossed();
    }

    /// Enforces or relaxes the row of a generic indicator link.
    pub fn set_indicator_row_active(&mut self, link: usize, active: bool) {
        if let Some(r) = self.roles.iter().position(|&role| role == RowRole::Indicator(link)) {
            let (lo, hi) = if active {
                self.active_range[r]
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            self.set_column_bounds(self.n + r, lo, hi);
        }
    }

    /// Imposes `objective ≤ cutoff`, or removes the cutoff with `None`.
    pub fn set_cutoff(&mut self, cutoff: Option<f64>) {
        let r = self.m - 1;
        debug_assert_eq!(self.roles[r], RowRole::Cutoff);
        self.set_column_bounds(self.n + r, f64::NEG_INFINITY, cutoff.unwrap_or(f64::INFINITY));
    }

    pub fn cutoff(&self) -> Option<f64> {
        let hi = self.upper[self.n + self.m - 1];
        hi.is_finite().then_some(hi)
    }

    fn set_column_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
        self.fix_nonbasic_status(j);
        self.invalidate();
        if lo > hi {
            self.mark_crossed(j);
        } else {
            self.check_crossed();
        }
    }

    fn invalidate(&mut self) {
        self.status = LpStatus::Unsolved;
        self.proof = None;
        self.ray = None;
    }

    fn check_crossed(&mut self) {
        if let Some(j) = (0..self.n + self.m).find(|&j| self.lower[j] > self.upper[j]) {
            self.mark_crossed(j);
        }
    }

    fn mark_crossed(&mut self, j: usize) {
        self.status = LpStatus::Infeasible;
        self.proof = Some(InfeasibilityProof::CrossedBounds { column: j });
    }

    fn fix_nonbasic_status(&mut self, j: usize) {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        let st = self.vstatus[j];
        let new = match st {
            VarStatus::Basic => return,
            VarStatus::AtLower if lo.is_finite() => VarStatus::AtLower,
            VarStatus::AtUpper if hi.is_finite() => VarStatus::AtUpper,
            _ => default_status(lo, hi),
        };
        self.vstatus[j] = new;
        self.x[j] = nonbasic_value(new, lo, hi);
    }

    /// Slack basis with structural columns at a finite bound.
    pub fn reset_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.vstatus = (0..n).map(|j| default_status(self.lower[j], self.upper[j])).collect();
        self.vstatus.extend(core::iter::repeat(VarStatus::Basic).take(m));
        self.heads = (n..n + m).collect();
        self.factor = None;
    }

    /// Installs `basis` as the starting point of the next solve.
    pub fn set_basis(&mut self, basis: &Basis) {
        assert_eq!(basis.status.len(), self.n + self.m);
        assert_eq!(basis.heads.len(), self.m);
        self.vstatus.clone_from(&basis.status);
        self.heads.clone_from(&basis.heads);
        for j in 0..self.n + self.m {
            self.fix_nonbasic_status(j);
        }
        self.factor = None;
        self.invalidate();
        self.check_crossed();
    }

    /// Solves from the slack basis.
    pub fn solve_cold(&mut self) -> LpStatus {
        self.reset_basis();
        self.solve()
    }

    /// Solves starting from `warm` (if given) or the retained basis.
    pub fn solve_with(&mut self, warm: Option<&Basis>) -> LpStatus {
        if let Some(b) = warm {
            self.set_basis(b);
        }
        self.solve()
    }

    /// Solves from the retained basis: dual simplex when it is dual feasible,
    /// primal simplex otherwise.
    pub fn solve(&mut self) -> LpStatus {
        self.last_iterations = 0;
        if let Some(InfeasibilityProof::CrossedBounds { .. }) = self.proof {
            self.status = LpStatus::Infeasible;
            return self.status;
        }
        self.proof = None;
        self.ray = None;
        if self.m == 0 {
            return self.solve_bounds_only();
        }
        let mut budget = self.config.max_iter;
        if self.factor.is_none() {
            self.refactor();
        }
        self.compute_primal();

        let mut status = None;
        if !self.primal_feasible() {
            match self.dual(&mut budget) {
                DualEnd::Optimal | DualEnd::NotDualFeasible => {}
                DualEnd::Infeasible(w) => {
                    status = Some(LpStatus::Infeasible);
                    self.proof = Some(InfeasibilityProof::Farkas(w));
                }
                DualEnd::IterationLimit => status = Some(LpStatus::IterationLimit),
            }
        }
        let status = match status {
            Some(s) => s,
            None => {
                let mut outcome = self.primal(&mut budget);
                // Drift check: recompute from a fresh factorization.
                for _ in 0..3 {
                    if !matches!(outcome, PrimalEnd::Optimal) {
                        break;
                    }
                    self.refactor();
                    self.compute_primal();
                    if self.primal_feasible() && self.dual_feasible() {
                        break;
                    }
                    outcome = self.primal(&mut budget);
                }
                match outcome {
                    PrimalEnd::Optimal => LpStatus::Optimal,
                    PrimalEnd::Infeasible(w) => {
                        self.proof = Some(InfeasibilityProof::Farkas(w));
                        LpStatus::Infeasible
                    }
                    PrimalEnd::Unbounded(ray) => {
                        self.ray = Some(ray);
                        LpStatus::Unbounded
                    }
                    PrimalEnd::IterationLimit => LpStatus::IterationLimit,
                }
            }
        };
        self.last_iterations = self.config.max_iter - budget;
        self.iterations += self.last_iterations;
        self.status = status;
        self.objective = (0..self.n).map(|j| self.cost[j] * self.x[j]).sum();
        status
    }

    fn solve_bounds_only(&mut self) -> LpStatus {
        for j in 0..self.n {
            let c = self.cost[j];
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let v = if c > 0.0 {
                lo
            } else if c < 0.0 {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            if !v.is_finite() {
                let mut ray = vec![0.0; self.n];
                ray[j] = if c > 0.0 { -1.0 } else { 1.0 };
                self.ray = Some(ray);
                self.status = LpStatus::Unbounded;
                return self.status;
            }
            self.x[j] = v;
        }
        self.objective = (0..self.n).map(|j| self.cost[j] * self.x[j]).sum();
        self.status = LpStatus::Optimal;
        self.status
    }

    // ---- linear algebra helpers ----

    fn dense_col(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.m];
        if j < self.n {
            for &(r, a) in &self.cols[j] {
                col[r] = a;
            }
        } else {
            col[j - self.n] = -1.0;
        }
        col
    }

    fn col_dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(r, a)| a * y[r]).sum()
        } else {
            -y[j - self.n]
        }
    }

    fn refactor(&mut self) {
        let cols: Vec<Vec<f64>> = self.heads.iter().map(|&j| self.dense_col(j)).collect();
        match Factor::new(self.m, &cols) {
            Ok(f) => self.factor = Some(f),
            Err(_) => {
                self.reset_basis();
                let cols: Vec<Vec<f64>> = self.heads.iter().map(|&j| self.dense_col(j)).collect();
                self.factor = Some(Factor::new(self.m, &cols).expect("slack basis is nonsingular"));
            }
        }
    }

    fn factor(&self) -> &Factor {
        self.factor.as_ref().expect("factorized")
    }

    fn compute_primal(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            let st = self.vstatus[j];
            if st == VarStatus::Basic {
                continue;
            }
            let v = nonbasic_value(st, self.lower[j], self.upper[j]);
            self.x[j] = v;
            if v != 0.0 {
                if j < self.n {
                    for &(r, a) in &self.cols[j] {
                        rhs[r] -= a * v;
                    }
                } else {
                    rhs[j - self.n] += v;
                }
            }
        }
        self.factor().ftran(&mut rhs);
        for (i, &j) in self.heads.iter().enumerate() {
            self.x[j] = rhs[i];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        (self.lower[j] - x).max(x - self.upper[j]).max(0.0)
    }

    fn primal_feasible(&self) -> bool {
        self.heads
            .iter()
            .all(|&j| self.infeasibility(j) <= self.config.feas_tol)
    }

    fn phase2_basic_costs(&self) -> Vec<f64> {
        self.heads
            .iter()
            .map(|&j| if j < self.n { self.cost[j] } else { 0.0 })
            .collect()
    }

    fn duals_for(&self, basic_costs: &[f64]) -> Vec<f64> {
        let mut y = basic_costs.to_vec();
        self.factor().btran(&mut y);
        y
    }

    fn phase_cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    fn dual_feasible(&self) -> bool {
        let y = self.duals_for(&self.phase2_basic_costs());
        let tol = self.config.opt_tol;
        (0..self.n + self.m).all(|j| {
            let st = self.vstatus[j];
            if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                return true;
            }
            let d = self.phase_cost(j) - self.col_dot(&y, j);
            match st {
                VarStatus::AtLower => d >= -tol,
                VarStatus::AtUpper => d <= tol,
                VarStatus::Free => d.abs() <= tol,
                VarStatus::Basic => true,
            }
        })
    }

    fn maybe_refactor(&mut self) {
        let stale = match &self.factor {
            None => true,
            Some(f) => f.num_updates() >= self.config.refactor_interval,
        };
        if stale {
            self.refactor();
            self.compute_primal();
        }
    }

    fn pivot(&mut self, pos: usize, entering: usize, leaving_status: VarStatus, alpha: Vec<f64>) {
        let leaving = self.heads[pos];
        self.vstatus[leaving] = leaving_status;
        self.x[leaving] = nonbasic_value(leaving_status, self.lower[leaving], self.upper[leaving]);
        self.vstatus[entering] = VarStatus::Basic;
        self.heads[pos] = entering;
        self.factor.as_mut().expect("factorized").update(pos, alpha);
    }

    // ---- primal simplex (phase 1 and 2 combined) ----

    fn primal(&mut self, budget: &mut u64) -> PrimalEnd {
        let tol = self.config.feas_tol;
        let opt_tol = self.config.opt_tol;
        let mut bland = false;
        let mut stall = 0u32;
        loop {
            self.maybe_refactor();
            // Phase-1 costs on infeasible basics; zero otherwise.
            let mut phase1 = false;
            let mut cb = vec![0.0; self.m];
            for (i, &j) in self.heads.iter().enumerate() {
                if self.x[j] < self.lower[j] - tol {
                    cb[i] = -1.0;
                    phase1 = true;
                } else if self.x[j] > self.upper[j] + tol {
                    cb[i] = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                cb = self.phase2_basic_costs();
            }
            let y = self.duals_for(&cb);

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                let st = self.vstatus[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.phase_cost(j) };
                let d = c - self.col_dot(&y, j);
                let eligible = match st {
                    VarStatus::AtLower => d < -opt_tol,
                    VarStatus::AtUpper => d > opt_tol,
                    VarStatus::Free => d.abs() > opt_tol,
                    VarStatus::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, d_q)) = entering else {
                return if phase1 {
                    PrimalEnd::Infeasible(y)
                } else {
                    PrimalEnd::Optimal
                };
            };
            if *budget == 0 {
                return PrimalEnd::IterationLimit;
            }
            *budget -= 1;

            let dir = if d_q < 0.0 { 1.0 } else { -1.0 };
            let mut alpha = self.dense_col(q);
            self.factor().ftran(&mut alpha);

            // Ratio test.
            let mut best: Option<(usize, f64, VarStatus)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let b = self.heads[i];
                let (xb, lo, hi) = (self.x[b], self.lower[b], self.upper[b]);
                let delta = -dir * a;
                let limit = if phase1 && xb < lo - tol {
                    if delta > 0.0 {
                        Some(((lo - xb) / delta, VarStatus::AtLower))
                    } else {
                        None
                    }
                } else if phase1 && xb > hi + tol {
                    if delta < 0.0 {
                        Some(((xb - hi) / -delta, VarStatus::AtUpper))
                    } else {
                        None
                    }
                } else if delta > 0.0 {
                    hi.is_finite()
                        .then(|| ((hi - xb).max(0.0) / delta, VarStatus::AtUpper))
                } else {
                    lo.is_finite()
                        .then(|| ((xb - lo).max(0.0) / -delta, VarStatus::AtLower))
                };
                let Some((t, st)) = limit else { continue };
                let better = match best {
                    None => true,
                    Some((bi, bt, _)) => {
                        if t < bt - RATIO_TIE {
                            true
                        } else if t <= bt + RATIO_TIE {
                            if bland {
                                b < self.heads[bi]
                            } else {
                                a.abs() > alpha[bi].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some((i, t, st));
                }
            }
            let (lo_q, hi_q) = (self.lower[q], self.upper[q]);
            let flip = hi_q - lo_q;
            let step;
            match best {
                Some((_, t, _)) if t < flip => {
                    step = t;
                }
                _ if flip.is_finite() => {
                    step = flip;
                }
                _ => {
                    if phase1 {
                        // Cannot happen for a descent direction of a bounded-below
                        // objective; treat as numerical trouble.
                        self.refactor();
                        self.compute_primal();
                        continue;
                    }
                    let mut ray = vec![0.0; self.n];
                    if q < self.n {
                        ray[q] = dir;
                    }
                    for (i, &b) in self.heads.iter().enumerate() {
                        if b < self.n {
                            ray[b] = -dir * alpha[i];
                        }
                    }
                    return PrimalEnd::Unbounded(ray);
                }
            }
            for (i, &b) in self.heads.iter().enumerate() {
                self.x[b] -= dir * step * alpha[i];
            }
            self.x[q] += dir * step;

            if step < 1e-12 {
                stall += 1;
                if stall >= self.config.stall_threshold {
                    bland = true;
                }
            } else {
                stall = 0;
            }

            match best {
                Some((pos, t, st)) if t < flip => {
                    self.pivot(pos, q, st, alpha);
                }
                _ => {
                    let st = if dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.vstatus[q] = st;
                    self.x[q] = nonbasic_value(st, lo_q, hi_q);
                }
            }
        }
    }

    // ---- dual simplex ----

    fn dual(&mut self, budget: &mut u64) -> DualEnd {
        if !self.dual_feasible() {
            return DualEnd::NotDualFeasible;
        }
        let tol = self.config.feas_tol;
        let mut bland = false;
        let mut stall = 0u32;
        loop {
            self.maybe_refactor();
            // Leaving row.
            let mut leave: Option<(usize, f64)> = None;
            for (i, &j) in self.heads.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf <= tol {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((bi, binf)) => {
                        if bland {
                            j < self.heads[bi]
                        } else {
                            inf > binf
                        }
                    }
                };
                if better {
                    leave = Some((i, inf));
                }
            }
            let Some((r, _)) = leave else {
                return DualEnd::Optimal;
            };
            if *budget == 0 {
                return DualEnd::IterationLimit;
            }
            *budget -= 1;

            let b = self.heads[r];
            let increase = self.x[b] < self.lower[b];
            let target = if increase { self.lower[b] } else { self.upper[b] };
            let leaving_status = if increase {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };

            let mut e = vec![0.0; self.m];
            e[r] = 1.0;
            self.factor().btran(&mut e);
            let rho = e;
            let y = self.duals_for(&self.phase2_basic_costs());

            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.n + self.m {
                let st = self.vstatus[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = self.col_dot(&rho, j);
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let eligible = match (st, increase) {
                    (VarStatus::AtLower, true) => a < 0.0,
                    (VarStatus::AtUpper, true) => a > 0.0,
                    (VarStatus::AtLower, false) => a > 0.0,
                    (VarStatus::AtUpper, false) => a < 0.0,
                    (VarStatus::Free, _) => true,
                    (VarStatus::Basic, _) => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.phase_cost(j) - self.col_dot(&y, j);
                let d = match st {
                    VarStatus::AtLower => d.max(0.0),
                    VarStatus::AtUpper => (-d).max(0.0),
                    _ => d.abs(),
                };
                let ratio = d / a.abs();
                let better = match entering {
                    None => true,
                    Some((bj, br, ba)) => {
                        if ratio < br - RATIO_TIE {
                            true
                        } else if ratio <= br + RATIO_TIE {
                            if bland {
                                j < bj
                            } else {
                                a.abs() > ba.abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    entering = Some((j, ratio, a));
                }
            }
            let Some((q, ratio, _)) = entering else {
                let w = if increase {
                    rho
                } else {
                    rho.iter().map(|v| -v).collect()
                };
                return DualEnd::Infeasible(w);
            };
            if ratio < 1e-12 {
                stall += 1;
                if stall >= self.config.stall_threshold {
                    bland = true;
                }
            } else {
                stall = 0;
            }

            let mut alpha = self.dense_col(q);
            self.factor().ftran(&mut alpha);
            let a_rq = alpha[r];
            if a_rq.abs() < PIVOT_TOL {
                // Row and column computations disagree; refactor and retry.
                self.refactor();
                self.compute_primal();
                continue;
            }
            let dx = (self.x[b] - target) / a_rq;
            for (i, &h) in self.heads.iter().enumerate() {
                self.x[h] -= alpha[i] * dx;
            }
            self.x[q] += dx;
            self.pivot(r, q, leaving_status, alpha);
        }
    }
}

fn default_status(lo: f64, hi: f64) -> VarStatus {
    if lo.is_finite() {
        VarStatus::AtLower
    } else if hi.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::Free
    }
}

fn nonbasic_value(st: VarStatus, lo: f64, hi: f64) -> f64 {
    match st {
        VarStatus::AtLower => lo,
        VarStatus::AtUpper => hi,
        _ => 0.0,
    }
}

/// How strongly `w` proves infeasibility of `lp`'s current bounds: with
/// `g_j = w·a_j` over all columns of `[A | −I]`, every solution satisfies
/// `Σ g_j x_j = 0`; the proof holds when the box range of that sum excludes 0.
/// Returns the margin (positive means certified). Coefficients below `1e-9`
/// are treated as zero.
pub fn farkas_margin(lp: &LpState, w: &[f64]) -> f64 {
    let mut max = 0.0;
    let mut min = 0.0;
    for j in 0..lp.n + lp.m {
        let g = lp.col_dot(w, j);
        if g.abs() <= 1e-9 {
            continue;
        }
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if g > 0.0 {
            max += g * hi;
            min += g * lo;
        } else {
            max += g * lo;
            min += g * hi;
        }
    }
    let scale = w.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    (-max).max(min) / scale
}
