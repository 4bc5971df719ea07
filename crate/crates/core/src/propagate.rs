//! Domain propagation: indicator implications and linear activity bounds.
//!
//! All functions are pure over `(problem, domains)`: they return the implied
//! bound changes (coalesced to one per variable side, tightening only) or a
//! [`Conflict`] when a domain becomes empty. [`propagate`] is the driver used
//! by diving and branch-and-bound; it applies changes in place and iterates
//! indicator and row rules until a fixpoint or the row budget is spent.

use alloc::vec::Vec;

use crate::model::{Implication, LinearRow, Problem};
use crate::num;
use crate::simplex::{BoundChange, Side};

/// Derived bounds larger than this are discarded as numerically useless.
const HUGE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct Domains {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domains {
    pub fn of(problem: &Problem) -> Self {
        Self {
            lower: problem.variables.iter().map(|v| v.lower).collect(),
            upper: problem.variables.iter().map(|v| v.upper).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    pub fn apply(&mut self, change: &BoundChange) {
        match change.side {
            Side::Lower => self.lower[change.var] = change.new,
            Side::Upper => self.upper[change.var] = change.new,
        }
    }

    pub fn get(&self, j: usize, side: Side) -> f64 {
        match side {
            Side::Lower => self.lower[j],
            Side::Upper => self.upper[j],
        }
    }

    /// Whether `point` lies inside the box up to `tol`.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        point
            .iter()
            .enumerate()
            .all(|(j, &x)| x >= self.lower[j] - tol && x <= self.upper[j] + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conflict {
    EmptyDomain { var: usize },
    Row { row: usize },
    Indicator { link: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub feas_tol: f64,
    pub int_tol: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-6,
            int_tol: 1e-6,
        }
    }
}

/// Working copy that records every tightening.
struct Work<'a> {
    problem: &'a Problem,
    dom: Domains,
    orig: &'a Domains,
    touched: Vec<(usize, Side)>,
    cfg: PropagationConfig,
}

impl<'a> Work<'a> {
    fn new(problem: &'a Problem, orig: &'a Domains, cfg: PropagationConfig) -> Self {
        Self {
            problem,
            dom: orig.clone(),
            orig,
            touched: Vec::new(),
            cfg,
        }
    }

    fn min_step(v: f64) -> f64 {
        if v.is_finite() {
            1e-9 * v.abs().max(1.0)
        } else {
            0.0
        }
    }

    /// Tightens the upper bound of `j` to `v`. Returns whether it changed.
    fn tighten_upper(&mut self, j: usize, mut v: f64) -> Result<bool, Conflict> {
        if self.problem.variables[j].kind.is_discrete() {
            v = num::floor(v + self.cfg.int_tol);
        }
        let cur = self.dom.upper[j];
        if !(v < cur - Self::min_step(cur)) {
            return Ok(false);
        }
        let lo = self.dom.lower[j];
        if v < lo - self.cfg.feas_tol {
            return Err(Conflict::EmptyDomain { var: j });
        }
        self.dom.upper[j] = v.max(lo);
        self.touch(j, Side::Upper);
        Ok(true)
    }

    fn tighten_lower(&mut self, j: usize, mut v: f64) -> Result<bool, Conflict> {
        if self.problem.variables[j].kind.is_discrete() {
            v = num::ceil(v - self.cfg.int_tol);
        }
        let cur = self.dom.lower[j];
        if !(v > cur + Self::min_step(cur)) {
            return Ok(false);
        }
        let hi = self.dom.upper[j];
        if v > hi + self.cfg.feas_tol {
            return Err(Conflict::EmptyDomain { var: j });
        }
        self.dom.lower[j] = v.min(hi);
        self.touch(j, Side::Lower);
        Ok(true)
    }

    fn touch(&mut self, j: usize, side: Side) {
        if !self.touched.contains(&(j, side)) {
            self.touched.push((j, side));
        }
    }

    fn changes(mut self) -> (Vec<BoundChange>, Domains) {
        self.touched.sort_by_key(|&(j, s)| (j, s == Side::Upper));
        let changes = self
            .touched
            .iter()
            .map(|&(j, side)| BoundChange {
                var: j,
                side,
                old: self.orig.get(j, side),
                new: self.dom.get(j, side),
            })
            .collect();
        (changes, self.dom)
    }

    /// One pass over a link. Returns whether anything changed.
    fn link(&mut self, k: usize) -> Result<bool, Conflict> {
        let link = &self.problem.links[k];
        let z = link.binary;
        let tol = self.cfg.feas_tol;
        let mut changed = false;
        match &link.implication {
            Implication::SemiContinuous { var: y, min_lot } => {
                let (y, s) = (*y, *min_lot);
                // y cannot be zero: the indicator must be on.
                if self.dom.lower[y] > tol {
                    changed |= self.tighten_lower(z, 1.0)?;
                }
                // y cannot reach the lot size: the indicator must be off.
                if self.dom.upper[y] < s - tol {
                    if self.dom.lower[z] >= 1.0 {
                        return Err(Conflict::Indicator { link: k });
                    }
                    changed |= self.tighten_upper(z, 0.0)?;
                }
                if self.dom.upper[z] <= 0.0 {
                    if self.dom.lower[y] > tol {
                        return Err(Conflict::Indicator { link: k });
                    }
                    changed |= self.tighten_upper(y, 0.0)?;
                }
                if self.dom.lower[z] >= 1.0 {
                    changed |= self.tighten_lower(y, s)?;
                }
            }
            Implication::Generic { active, row } => {
                let off = if *active { 0.0 } else { 1.0 };
                let can_be_active = if *active {
                    self.dom.upper[z] >= 1.0
                } else {
                    self.dom.lower[z] <= 0.0
                };
                if can_be_active && row_infeasible(row, &self.dom, tol) {
                    if self.dom.lower[z] == self.dom.upper[z] {
                        return Err(Conflict::Indicator { link: k });
                    }
                    changed |= if off == 0.0 {
                        self.tighten_upper(z, 0.0)?
                    } else {
                        self.tighten_lower(z, 1.0)?
                    };
                }
            }
        }
        Ok(changed)
    }

    fn row(&mut self, row: &LinearRow, id: usize) -> Result<bool, Conflict> {
        let (lo_r, hi_r) = row.sense.range(row.rhs);
        let act = Activity::of(row, &self.dom);
        let tol = self.cfg.feas_tol * row.rhs.abs().max(1.0);
        if act.min_inf == 0 && act.min > hi_r + tol {
            return Err(Conflict::Row { row: id });
        }
        if act.max_inf == 0 && act.max < lo_r - tol {
            return Err(Conflict::Row { row: id });
        }
        let mut changed = false;
        for &(j, a) in &row.coeffs {
            let (l, u) = (self.dom.lower[j], self.dom.upper[j]);
            let (cmin, cmax) = if a > 0.0 { (a * l, a * u) } else { (a * u, a * l) };
            // Residual minimum/maximum activity of the other terms.
            let rest_min = residual(act.min, act.min_inf, cmin);
            let rest_max = residual(act.max, act.max_inf, cmax);
            if hi_r.is_finite() {
                if let Some(rm) = rest_min {
                    let bound = (hi_r - rm) / a;
                    if bound.abs() < HUGE {
                        changed |= if a > 0.0 {
                            self.tighten_upper(j, bound)?
                        } else {
                            self.tighten_lower(j, bound)?
                        };
                    }
                }
            }
            if lo_r.is_finite() {
                if let Some(rm) = rest_max {
                    let bound = (lo_r - rm) / a;
                    if bound.abs() < HUGE {
                        changed |= if a > 0.0 {
                            self.tighten_lower(j, bound)?
                        } else {
                            self.tighten_upper(j, bound)?
                        };
                    }
                }
            }
        }
        Ok(changed)
    }

    fn rows_round(&mut self) -> Result<bool, Conflict> {
        let mut changed = false;
        let problem = self.problem;
        for (r, row) in problem.rows.iter().enumerate() {
            changed |= self.row(row, r)?;
        }
        for (k, link) in problem.links.iter().enumerate() {
            if let Implication::Generic { active, row } = &link.implication {
                let z = link.binary;
                let enforced = if *active {
                    self.dom.lower[z] >= 1.0
                } else {
                    self.dom.upper[z] <= 0.0
                };
                if enforced {
                    changed |= self.row(row, problem.rows.len() + k)?;
                }
            }
        }
        Ok(changed)
    }
}

struct Activity {
    min: f64,
    max: f64,
    min_inf: usize,
    max_inf: usize,
}

impl Activity {
    fn of(row: &LinearRow, dom: &Domains) -> Self {
        let mut act = Activity {
            min: 0.0,
            max: 0.0,
            min_inf: 0,
            max_inf: 0,
        };
        for &(j, a) in &row.coeffs {
            let (l, u) = (dom.lower[j], dom.upper[j]);
            let (cmin, cmax) = if a > 0.0 { (a * l, a * u) } else { (a * u, a * l) };
            if cmin.is_finite() {
                act.min += cmin;
            } else {
                act.min_inf += 1;
            }
            if cmax.is_finite() {
                act.max += cmax;
            } else {
                act.max_inf += 1;
            }
        }
        act
    }
}

fn residual(total: f64, n_inf: usize, own: f64) -> Option<f64> {
    match (n_inf, own.is_finite()) {
        (0, _) => Some(total - own),
        (1, false) => Some(total),
        _ => None,
    }
}

fn row_infeasible(row: &LinearRow, dom: &Domains, tol: f64) -> bool {
    let (lo, hi) = row.sense.range(row.rhs);
    let act = Activity::of(row, dom);
    let tol = tol * row.rhs.abs().max(1.0);
    (act.min_inf == 0 && act.min > hi + tol) || (act.max_inf == 0 && act.max < lo - tol)
}

/// Implications of the links that `changed_var` takes part in.
pub fn propagate_indicator(
    problem: &Problem,
    domains: &Domains,
    changed_var: usize,
    cfg: PropagationConfig,
) -> Result<Vec<BoundChange>, Conflict> {
    let mut w = Work::new(problem, domains, cfg);
    let links: Vec<usize> = problem
        .links
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            l.binary == changed_var
                || matches!(l.implication, Implication::SemiContinuous { var, .. } if var == changed_var)
        })
        .map(|(k, _)| k)
        .collect();
    loop {
        let mut changed = false;
        for &k in &links {
            changed |= w.link(k)?;
        }
        if !changed {
            break;
        }
    }
    Ok(w.changes().0)
}

/// Activity-based tightening over all rows (and enforced indicator rows),
/// at most `budget` rounds.
pub fn propagate_rows(
    problem: &Problem,
    domains: &Domains,
    budget: usize,
    cfg: PropagationConfig,
) -> Result<Vec<BoundChange>, Conflict> {
    let mut w = Work::new(problem, domains, cfg);
    for _ in 0..budget {
        if !w.rows_round()? {
            break;
        }
    }
    Ok(w.changes().0)
}

/// Alternates indicator rules (always to fixpoint) with up to `row_rounds`
/// rounds of row propagation. Applies the result to `domains` and returns
/// the changes relative to the input. On conflict `domains` is untouched.
pub fn propagate(
    problem: &Problem,
    domains: &mut Domains,
    row_rounds: usize,
    cfg: PropagationConfig,
) -> Result<Vec<BoundChange>, Conflict> {
    let orig = domains.clone();
    let mut w = Work::new(problem, &orig, cfg);
    let mut rounds = 0;
    loop {
        loop {
            let mut changed = false;
            for k in 0..problem.links.len() {
                changed |= w.link(k)?;
            }
            if !changed {
                break;
            }
        }
        if rounds >= row_rounds || !w.rows_round()? {
            break;
        }
        rounds += 1;
    }
    let (changes, dom) = w.changes();
    *domains = dom;
    Ok(changes)
}
