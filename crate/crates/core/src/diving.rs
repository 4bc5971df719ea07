//! Indicator diving.
//!
//! Starting from an optimal LP solution that violates the indicator form,
//! the dive repeatedly picks the candidate with the highest score, tightens
//! one bound of it, propagates, and re-solves the LP. Candidates are
//!
//! * unfixed indicator binaries at an integral LP value whose implication
//!   `z = 0 ⇒ y ≤ 0` is violated, scored by how far `ŷ` sits inside the
//!   forbidden gap `(0, s)`: `100·(s − ŷ)/s`, or `−1` (minus a seeded
//!   perturbation below `1e-3`) when `ŷ ≥ s`;
//! * fractional discrete variables, scored by a fractional-diving rule whose
//!   raw score is squeezed into `(−300, −100)` by a logistic curve, so that
//!   indicator candidates always come first.
//!
//! An indicator candidate is fixed to one when `ŷ ≥ s/2` and to zero
//! otherwise; other candidates are rounded to the nearer integer. An
//! infeasible LP triggers one retry in the opposite direction, after which
//! the dive aborts. Every bound change is undone before returning.

use alloc::vec::Vec;

use crate::model::{Implication, Point, Problem, Tolerances};
use crate::num;
use crate::propagate::{self, Domains, PropagationConfig};
use crate::rng;
use crate::simplex::{BoundChange, LpState, LpStatus};

/// Width of the tie-breaking perturbation on the constant `−1` scores.
pub const TIE_DELTA: f64 = 1e-3;
pub const FALLBACK_MIN: f64 = -300.0;
pub const FALLBACK_MAX: f64 = -100.0;
const SIGMOID_SLOPE: f64 = 10.0;
const SIGMOID_MID: f64 = 0.5;
const MAX_DEPTH_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// Semi-continuity indicator with a violated implication.
    Indicator,
    /// Discrete variable at a fractional value.
    FractionalInt,
    /// Generic indicator whose row is violated while the binary sits at its
    /// active value.
    GenericIndicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub var: usize,
    pub link: Option<usize>,
    pub score: f64,
    pub direction: Direction,
    pub bound_value: f64,
}

impl Candidate {
    pub fn bound_change(&self, domains: &Domains) -> BoundChange {
        change_for(self.var, self.direction, self.bound_value, domains)
    }

    /// Direction and bound of the opposite branch.
    pub fn opposite(&self) -> (Direction, f64) {
        match (self.kind, self.direction) {
            (CandidateKind::FractionalInt, Direction::Down) => (Direction::Up, self.bound_value + 1.0),
            (CandidateKind::FractionalInt, Direction::Up) => (Direction::Down, self.bound_value - 1.0),
            (_, Direction::Up) => (Direction::Down, 0.0),
            (_, Direction::Down) => (Direction::Up, 1.0),
        }
    }
}

fn change_for(var: usize, dir: Direction, value: f64, domains: &Domains) -> BoundChange {
    match dir {
        Direction::Up => BoundChange::lower(var, domains.lower[var], value),
        Direction::Down => BoundChange::upper(var, domains.upper[var], value),
    }
}

/// Score of a violated semi-continuity indicator. `tie` in `[0, 1)` selects
/// the perturbation for the constant case.
pub fn score_indicator(y_hat: f64, min_lot: f64, tie: f64) -> f64 {
    if y_hat > 0.0 && y_hat < min_lot {
        100.0 * (min_lot - y_hat) / min_lot
    } else {
        -1.0 - TIE_DELTA * tie
    }
}

/// Logistic map of a raw score in `[0, 1]`.
pub fn sigmoid(r: f64) -> f64 {
    1.0 / (1.0 + num::exp(-SIGMOID_SLOPE * (r - SIGMOID_MID)))
}

/// Raw fractional-diving score `1 − 2·min(f, 1 − f)` of a value.
pub fn fractional_raw_score(value: f64) -> f64 {
    let f = num::frac(value);
    1.0 - 2.0 * f.min(1.0 - f)
}

/// Fallback score of a fractional candidate, inside `(−300, −100)`.
pub fn score_fallback(value: f64) -> f64 {
    rescale_fallback(fractional_raw_score(value))
}

pub fn rescale_fallback(raw: f64) -> f64 {
    FALLBACK_MIN + (FALLBACK_MAX - FALLBACK_MIN) * sigmoid(raw)
}

/// Rounding direction and bound value of an indicator candidate.
pub fn round_indicator(y_hat: f64, min_lot: f64) -> (Direction, f64) {
    if y_hat >= 0.5 * min_lot {
        (Direction::Up, 1.0)
    } else {
        (Direction::Down, 0.0)
    }
}

/// Rounding direction and bound value of a fractional candidate.
pub fn round_fractional(value: f64) -> (Direction, f64) {
    if num::frac(value) <= 0.5 {
        (Direction::Down, num::floor(value))
    } else {
        (Direction::Up, num::ceil(value))
    }
}

/// Per-variable tie-break value in `[0, 1)`.
pub fn tie_value(seed: u64, var: usize) -> f64 {
    rng::keyed_unit(seed, var as u64)
}

/// The candidate set at `point` with scores, directions and bound values.
pub fn collect_candidates(
    problem: &Problem,
    domains: &Domains,
    point: &[f64],
    tol: Tolerances,
    seed: u64,
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (k, link) in problem.links.iter().enumerate() {
        let z = link.binary;
        let z_hat = point[z];
        if domains.is_fixed(z) || num::frac_dist(z_hat) > tol.int {
            continue;
        }
        match &link.implication {
            Implication::SemiContinuous { var: y, min_lot } => {
                let y_hat = point[*y];
                if z_hat <= tol.int && y_hat > tol.feas {
                    let score = score_indicator(y_hat, *min_lot, tie_value(seed, z));
                    let (direction, bound_value) = round_indicator(y_hat, *min_lot);
                    out.push(Candidate {
                        kind: CandidateKind::Indicator,
                        var: z,
                        link: Some(k),
                        score,
                        direction,
                        bound_value,
                    });
                }
            }
            Implication::Generic { active, row } => {
                let target = if *active { 1.0 } else { 0.0 };
                if (z_hat - target).abs() <= tol.int && row.violation(point) > tol.feas {
                    let (direction, bound_value) = if *active {
                        (Direction::Up, 1.0)
                    } else {
                        (Direction::Down, 0.0)
                    };
                    out.push(Candidate {
                        kind: CandidateKind::GenericIndicator,
                        var: z,
                        link: Some(k),
                        score: rescale_fallback(fractional_raw_score(z_hat)),
                        direction,
                        bound_value,
                    });
                }
            }
        }
    }
    for (j, v) in problem.variables.iter().enumerate() {
        if !v.kind.is_discrete() || num::frac_dist(point[j]) <= tol.int {
            continue;
        }
        let (direction, bound_value) = round_fractional(point[j]);
        out.push(Candidate {
            kind: CandidateKind::FractionalInt,
            var: j,
            link: None,
            score: score_fallback(point[j]),
            direction,
            bound_value,
        });
    }
    out
}

/// Highest score first; ties go to the lowest variable index.
pub fn best_candidate(cands: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in cands.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let cb = &cands[b];
                if c.score > cb.score || (c.score == cb.score && c.var < cb.var) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Rounds an LP point: discrete variables to the nearest integer (ties
/// down), semi-continuity pairs to `z = 0, y = 0` below half the lot size and
/// to `z = 1, y ∈ [s, u]` otherwise. Returns the point if it is feasible.
pub fn simple_round(problem: &Problem, domains: &Domains, point: &[f64], tol: Tolerances) -> Option<Point> {
    let mut p = point.to_vec();
    for (j, v) in problem.variables.iter().enumerate() {
        if v.kind.is_discrete() && num::frac_dist(p[j]) > 0.0 {
            let r = if num::frac(p[j]) <= 0.5 {
                num::floor(p[j])
            } else {
                num::ceil(p[j])
            };
            p[j] = r.clamp(domains.lower[j], domains.upper[j]);
        }
    }
    for link in &problem.links {
        if let Implication::SemiContinuous { var: y, min_lot } = link.implication {
            let y_hat = point[y];
            if y_hat < 0.5 * min_lot {
                p[link.binary] = 0.0;
                p[y] = 0.0;
            } else {
                p[link.binary] = 1.0;
                p[y] = y_hat.max(min_lot).min(domains.upper[y].max(min_lot));
            }
        }
    }
    problem.check_feasible(&p, tol).is_feasible().then_some(Point(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiveConfig {
    /// Re-solve the LP after this many bound changes.
    pub resolve_freq: usize,
    /// `None` derives the depth from the number of unfixed discrete
    /// variables plus links, capped at 500.
    pub max_depth: Option<usize>,
    pub backtrack_budget: usize,
    /// Rounds of row propagation after each bound change (0 disables).
    pub row_rounds: usize,
    pub rounding: bool,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for DiveConfig {
    fn default() -> Self {
        Self {
            resolve_freq: 1,
            max_depth: None,
            backtrack_budget: 10,
            row_rounds: 2,
            rounding: true,
            seed: 0,
            tol: Tolerances::default(),
        }
    }
}

/// Minimum improvement over an incumbent objective.
pub fn cutoff_eps(incumbent: f64) -> f64 {
    1e-6f64.max(1e-6 * incumbent.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoundBy {
    Diving,
    Rounding,
    NodeIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    Infeasible,
    BacktrackBudget,
    MaxDepth,
    ResolveBudget,
    LpFailure,
    NoImprovement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiveOutcome {
    /// Best feasible point found, its objective, and whether the final LP
    /// point or an intermediate rounding produced it.
    pub solution: Option<(Point, f64, FoundBy)>,
    pub lp_resolves: usize,
    pub resolve_budget: usize,
    pub max_depth: usize,
    pub depth: usize,
    pub backtracks: usize,
    pub abort: Option<AbortReason>,
}

struct TrailEntry {
    cand: Candidate,
    domains_before: Domains,
    tried_opposite: bool,
}

/// The set of derived default maximum depth.
pub fn default_max_depth(problem: &Problem, domains: &Domains) -> usize {
    let unfixed = problem
        .variables
        .iter()
        .enumerate()
        .filter(|(j, v)| v.kind.is_discrete() && !domains.is_fixed(*j))
        .count();
    (unfixed + problem.links.len()).clamp(1, MAX_DEPTH_CAP)
}

/// Syncs LP bounds and indicator rows with `domains`.
pub fn load_domains(problem: &Problem, lp: &mut LpState, domains: &Domains) {
    lp.set_all_bounds(&domains.lower, &domains.upper);
    for (k, link) in problem.links.iter().enumerate() {
        if let Implication::Generic { active, .. } = link.implication {
            let z = link.binary;
            let on = if active {
                domains.lower[z] >= 1.0
            } else {
                domains.upper[z] <= 0.0
            };
            lp.set_indicator_row_active(k, on);
        }
    }
}

/// Runs one dive from the optimal LP in `lp`, whose bounds must equal
/// `domains`. The LP is restored to its entry state before returning.
pub fn dive(
    problem: &Problem,
    lp: &mut LpState,
    domains: &Domains,
    incumbent: Option<f64>,
    config: &DiveConfig,
) -> DiveOutcome {
    let snap = lp.snapshot();
    let out = dive_inner(problem, lp, domains, incumbent, config);
    lp.restore(&snap);
    out
}

fn dive_inner(
    problem: &Problem,
    lp: &mut LpState,
    domains: &Domains,
    incumbent: Option<f64>,
    config: &DiveConfig,
) -> DiveOutcome {
    let tol = config.tol;
    let prop_cfg = PropagationConfig {
        feas_tol: tol.feas,
        int_tol: tol.int,
    };
    let max_depth = config.max_depth.unwrap_or_else(|| default_max_depth(problem, domains));
    let resolve_budget = 10 * max_depth;
    let mut out = DiveOutcome {
        solution: None,
        lp_resolves: 0,
        resolve_budget,
        max_depth,
        depth: 0,
        backtracks: 0,
        abort: None,
    };
    let lp_feas = lp.config().feas_tol;

    if lp.status() != LpStatus::Optimal {
        out.abort = Some(AbortReason::LpFailure);
        return out;
    }
    // Objective values must stay below `limit`. The cutoff row takes effect
    // at the next resolve; the current LP point is still a valid start.
    let mut limit = incumbent.map(|v| v - cutoff_eps(v));
    if let Some(l) = limit {
        if lp.objective() > l {
            out.abort = Some(AbortReason::NoImprovement);
            return out;
        }
        lp.set_cutoff(Some(l - lp_feas));
    }

    let mut dom = domains.clone();
    let mut trail: Vec<TrailEntry> = Vec::new();
    let mut point = lp.point();
    let mut cands = collect_candidates(problem, &dom, &point, tol, config.seed);
    let mut pending = 0usize;

    loop {
        if cands.is_empty() {
            if pending > 0 {
                match resolve(lp, &mut out) {
                    Ok(()) => {}
                    Err(reason) => {
                        out.abort = Some(reason);
                        return out;
                    }
                }
                pending = 0;
                point = lp.point();
                cands = collect_candidates(problem, &dom, &point, tol, config.seed);
                continue;
            }
            let obj = problem.objective_value(&point);
            let improves = limit.is_none_or(|l| obj <= l);
            if improves && problem.check_feasible(&point, tol).is_feasible() {
                out.solution = Some((point, obj, FoundBy::Diving));
            } else if out.solution.is_none() {
                out.abort = Some(AbortReason::LpFailure);
            }
            return out;
        }
        if out.depth >= max_depth {
            out.abort = Some(AbortReason::MaxDepth);
            return out;
        }
        let Some(pick) = best_candidate(&cands) else { unreachable!() };
        let cand = cands.swap_remove(pick);
        let change = cand.bound_change(&dom);
        if !change.tightens() || dom.is_fixed(cand.var) {
            // Already implied by an earlier change since the last LP solve.
            continue;
        }
        trail.push(TrailEntry {
            cand,
            domains_before: dom.clone(),
            tried_opposite: false,
        });
        out.depth += 1;
        let mut ok = apply_and_propagate(problem, lp, &mut dom, change, config.row_rounds, prop_cfg);
        pending += 1;

        if ok && pending < config.resolve_freq.max(1) {
            continue;
        }
        if ok {
            match resolve(lp, &mut out) {
                Ok(()) => {}
                Err(AbortReason::Infeasible) => ok = false,
                Err(reason) => {
                    out.abort = Some(reason);
                    return out;
                }
            }
        }
        pending = 0;

        if !ok {
            // Retry the last change in the opposite direction, once.
            let Some(top) = trail.last_mut() else { unreachable!() };
            if top.tried_opposite || out.backtracks >= config.backtrack_budget {
                out.abort = Some(if top.tried_opposite {
                    AbortReason::Infeasible
                } else {
                    AbortReason::BacktrackBudget
                });
                return out;
            }
            top.tried_opposite = true;
            out.backtracks += 1;
            dom = top.domains_before.clone();
            let (dir, value) = top.cand.opposite();
            let flip = change_for(top.cand.var, dir, value, &dom);
            load_domains(problem, lp, &dom);
            let ok = flip.tightens()
                && apply_and_propagate(problem, lp, &mut dom, flip, config.row_rounds, prop_cfg);
            if !ok {
                out.abort = Some(AbortReason::Infeasible);
                return out;
            }
            if let Err(reason) = resolve(lp, &mut out) {
                out.abort = Some(reason);
                return out;
            }
        }

        point = lp.point();
        cands = collect_candidates(problem, &dom, &point, tol, config.seed);

        if config.rounding && !cands.is_empty() {
            if let Some(p) = simple_round(problem, &dom, &point, tol) {
                let obj = problem.objective_value(&p);
                if limit.is_none_or(|l| obj <= l) {
                    let new_limit = obj - cutoff_eps(obj);
                    out.solution = Some((p, obj, FoundBy::Rounding));
                    limit = Some(new_limit);
                    if lp.objective() > new_limit {
                        return out;
                    }
                    lp.set_cutoff(Some(new_limit - lp_feas));
                }
            }
        }
    }
}

fn resolve(lp: &mut LpState, out: &mut DiveOutcome) -> Result<(), AbortReason> {
    if out.lp_resolves >= out.resolve_budget {
        return Err(AbortReason::ResolveBudget);
    }
    out.lp_resolves += 1;
    match lp.solve() {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible => Err(AbortReason::Infeasible),
        _ => Err(AbortReason::LpFailure),
    }
}

/// Applies `change` to the domains, runs propagation and loads the result
/// into the LP. Returns `false` on a propagation conflict.
fn apply_and_propagate(
    problem: &Problem,
    lp: &mut LpState,
    dom: &mut Domains,
    change: BoundChange,
    row_rounds: usize,
    cfg: PropagationConfig,
) -> bool {
    dom.apply(&change);
    if propagate::propagate(problem, dom, row_rounds, cfg).is_err() {
        return false;
    }
    load_domains(problem, lp, dom);
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IndicatorLink, LinearRow, Sense, Stage, Variable};
    use alloc::vec;

    #[test]
    fn indicator_scores() {
        assert!((score_indicator(2.0, 10.0, 0.0) - 80.0).abs() < 1e-12);
        assert!((score_indicator(9.99, 10.0, 0.0) - 0.1).abs() < 1e-9);
        let s = score_indicator(12.0, 10.0, 0.7);
        assert!(s <= -1.0 && s > -1.0 - TIE_DELTA);
        assert_eq!(score_indicator(12.0, 10.0, 0.0), -1.0);
    }

    #[test]
    fn fallback_scores() {
        // Oracle: g(r) evaluated directly.
        let g0 = 1.0 / (1.0 + libm::exp(5.0));
        assert!((score_fallback(2.5) - (-300.0 + 200.0 * g0)).abs() < 1e-9);
        assert!((score_fallback(2.5) - -298.661_43).abs() < 1e-5);
        let g98 = 1.0 / (1.0 + libm::exp(-4.8));
        assert!((score_fallback(3.01) - (-300.0 + 200.0 * g98)).abs() < 1e-9);
        assert!((score_fallback(3.01) - -101.632_6).abs() < 1e-3);
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(round_indicator(5.0, 10.0), (Direction::Up, 1.0));
        assert_eq!(round_indicator(4.9, 10.0), (Direction::Down, 0.0));
        assert_eq!(round_fractional(2.3), (Direction::Down, 2.0));
        assert_eq!(round_fractional(2.5), (Direction::Down, 2.0));
        assert_eq!(round_fractional(2.7), (Direction::Up, 3.0));
    }

    fn one_link(s: f64, u: f64, row_min: Option<f64>) -> Problem {
        let mut p = Problem::new(Stage::Indicator);
        p.add_var(Variable::continuous("y", 0.0, u, 1.0));
        p.add_var(Variable::binary("z", 1.0));
        p.add_row(LinearRow::new("lot", vec![(1, s), (0, -1.0)], Sense::Le, 0.0));
        if let Some(b) = row_min {
            p.add_row(LinearRow::new("demand", vec![(0, 1.0)], Sense::Ge, b));
        }
        p.links.push(IndicatorLink::semi_continuous(1, 0, s));
        p
    }

    #[test]
    fn candidate_kinds() {
        let p = one_link(10.0, f64::INFINITY, None);
        let d = Domains::of(&p);
        let tol = Tolerances::default();
        let c = collect_candidates(&p, &d, &[2.0, 0.0], tol, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, CandidateKind::Indicator);
        let c = collect_candidates(&p, &d, &[4.0, 0.4], tol, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, CandidateKind::FractionalInt);
        assert!(collect_candidates(&p, &d, &[12.0, 1.0], tol, 0).is_empty());
    }

    #[test]
    fn simple_rounding_cases() {
        let tol = Tolerances::default();
        let p = one_link(10.0, f64::INFINITY, None);
        let d = Domains::of(&p);
        assert_eq!(simple_round(&p, &d, &[12.0, 1.0], tol), Some(Point(vec![12.0, 1.0])));
        assert_eq!(simple_round(&p, &d, &[7.0, 0.7], tol), Some(Point(vec![10.0, 1.0])));
        let p = one_link(10.0, f64::INFINITY, Some(1.0));
        let d = Domains::of(&p);
        assert_eq!(simple_round(&p, &d, &[2.0, 0.2], tol), None);
    }

    #[test]
    fn dive_reaches_lot_size_solution() {
        let p = one_link(10.0, f64::INFINITY, Some(3.0));
        let d = Domains::of(&p);
        let mut lp = LpState::relax(&p);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        let (lo, hi) = (lp.lower_bounds().to_vec(), lp.upper_bounds().to_vec());
        let cfg = DiveConfig {
            rounding: false,
            ..Default::default()
        };
        let out = dive(&p, &mut lp, &d, None, &cfg);
        let (pt, obj, _) = out.solution.expect("dive finds a solution");
        assert!((obj - 11.0).abs() < 1e-9);
        assert!(p.check_feasible(&pt, Tolerances::default()).is_feasible());
        assert_eq!(lp.lower_bounds(), &lo[..]);
        assert_eq!(lp.upper_bounds(), &hi[..]);
    }

    #[test]
    fn dive_aborts_when_both_directions_fail() {
        // y ≥ 3 and y ≤ 5 with s = 10: z = 1 needs y ≥ 10, z = 0 needs y = 0.
        let mut p = one_link(10.0, 5.0, Some(3.0));
        p.variables[0].upper = 5.0;
        let mut d = Domains::of(&p);
        d.upper[1] = 1.0;
        let mut lp = LpState::relax(&p);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        let (lo, hi) = (lp.lower_bounds().to_vec(), lp.upper_bounds().to_vec());
        let out = dive(&p, &mut lp, &d, None, &DiveConfig::default());
        assert!(out.solution.is_none());
        assert_eq!(lp.lower_bounds(), &lo[..]);
        assert_eq!(lp.upper_bounds(), &hi[..]);
    }
}
