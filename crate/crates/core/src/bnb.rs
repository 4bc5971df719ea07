//! LP-based branch and bound hosting the diving heuristic.
//!
//! Nodes are selected by best bound, with short plunges into the preferred
//! child. Each node propagates its domains, re-solves the LP warm from the
//! parent basis, tries simple rounding and (at the root, or every
//! `depth_freq` levels) indicator diving, and branches on a violated
//! indicator first, then on a violated generic indicator, then on the most
//! fractional discrete variable.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::clock::Clock;
use crate::diving::{self, cutoff_eps, DiveConfig, FoundBy};
use crate::model::{Point, Problem, Tolerances};
use crate::num;
use crate::propagate::{self, Domains, PropagationConfig};
use crate::simplex::{Basis, BoundChange, LpConfig, LpState, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    /// Run indicator diving at all.
    pub diving: bool,
    /// Also dive at every node whose depth is a multiple of this (0: root only).
    pub depth_freq: usize,
    /// Simple rounding of every node LP solution.
    pub rounding: bool,
    pub dive: DiveConfig,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            diving: true,
            depth_freq: 0,
            rounding: true,
            dive: DiveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Seconds, measured by the supplied clock.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    /// Stop after the root node.
    pub root_only: bool,
    pub tol: Tolerances,
    pub heuristics: HeuristicConfig,
    /// Row propagation rounds per node.
    pub row_rounds: usize,
    /// Relative gap at which the search stops.
    pub gap_tol: f64,
    /// Consecutive child selections before returning to best bound.
    pub plunge_depth: usize,
    pub lp: LpConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit: f64::INFINITY,
            node_limit: None,
            root_only: false,
            tol: Tolerances::default(),
            heuristics: HeuristicConfig::default(),
            row_rounds: 5,
            gap_tol: 1e-6,
            plunge_depth: 3,
            lp: LpConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.heuristics.dive.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub point: Point,
    pub objective: f64,
    pub found_at: f64,
    pub found_by: FoundBy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEvent {
    pub time: f64,
    pub objective: f64,
    pub found_by: FoundBy,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeuristicStats {
    pub calls: u64,
    /// Calls that produced a new incumbent.
    pub found: u64,
    pub time: f64,
    pub lp_resolves: u64,
    pub root_called: bool,
    pub root_found: bool,
    /// Objective of the first solution diving committed.
    pub first_objective: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub max_depth: usize,
    pub lp_failures: u64,
    pub root_lp_objective: Option<f64>,
    /// Incumbent objective when the root node finished.
    pub root_incumbent: Option<f64>,
    pub root_time: f64,
    pub time: f64,
    pub diving: HeuristicStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub incumbent: Option<Incumbent>,
    /// Proven lower bound; never above the incumbent objective.
    pub bound: f64,
    pub timeline: Vec<TimelineEvent>,
    pub stats: SolveStats,
    /// Primal ray when the relaxation is unbounded.
    pub ray: Option<Vec<f64>>,
}

impl SolveResult {
    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.objective)
    }
}

#[derive(Debug, Clone)]
struct Node {
    seq: u64,
    depth: usize,
    bound: f64,
    changes: Vec<BoundChange>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: smallest bound, then oldest, comes out first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// A branching decision: the preferred child's change first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub var: usize,
    pub preferred: BoundChange,
    pub other: BoundChange,
}

/// Picks the branching variable at an LP point that is not feasible.
pub fn select_branch(problem: &Problem, domains: &Domains, point: &[f64], tol: Tolerances, seed: u64) -> Option<Branch> {
    let cands = diving::collect_candidates(problem, domains, point, tol, seed);
    let pick = |kind: diving::CandidateKind| {
        let sub: Vec<_> = cands.iter().copied().filter(|c| c.kind == kind).collect();
        diving::best_candidate(&sub).map(|i| sub[i])
    };
    let cand = pick(diving::CandidateKind::Indicator)
        .or_else(|| pick(diving::CandidateKind::GenericIndicator))
        .or_else(|| {
            let mut best: Option<(usize, f64)> = None;
            for c in cands.iter().filter(|c| c.kind == diving::CandidateKind::FractionalInt) {
                let f = num::frac_dist(point[c.var]);
                if best.is_none_or(|(_, bf)| f > bf) {
                    best = Some((c.var, f));
                }
            }
            best.and_then(|(v, _)| cands.iter().copied().find(|c| c.var == v && c.kind == diving::CandidateKind::FractionalInt))
        })?;
    let preferred = cand.bound_change(domains);
    let (dir, value) = cand.opposite();
    let other = match dir {
        diving::Direction::Up => BoundChange::lower(cand.var, domains.lower[cand.var], value),
        diving::Direction::Down => BoundChange::upper(cand.var, domains.upper[cand.var], value),
    };
    Some(Branch {
        var: cand.var,
        preferred,
        other,
    })
}

struct Search<'a> {
    problem: &'a Problem,
    config: &'a SolverConfig,
    clock: &'a dyn Clock,
    start: f64,
    incumbent: Option<Incumbent>,
    timeline: Vec<TimelineEvent>,
    stats: SolveStats,
}

impl Search<'_> {
    fn elapsed(&self) -> f64 {
        self.clock.now() - self.start
    }

    fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.objective)
    }

    fn prunable(&self, bound: f64) -> bool {
        self.incumbent_value().is_some_and(|v| bound >= v - cutoff_eps(v))
    }

    /// Accepts `point` if it strictly improves the incumbent.
    fn offer(&mut self, point: Point, objective: f64, found_by: FoundBy) -> bool {
        if self.incumbent_value().is_some_and(|v| objective >= v) {
            return false;
        }
        let found_at = self.elapsed();
        self.timeline.push(TimelineEvent {
            time: found_at,
            objective,
            found_by,
        });
        self.incumbent = Some(Incumbent {
            point,
            objective,
            found_at,
            found_by,
        });
        true
    }

    fn out_of_time(&self) -> bool {
        self.elapsed() >= self.config.time_limit
    }
}

enum NodeResult {
    Pruned,
    Branched(Node, Node),
}

/// Solves `problem` (in indicator or big-M form).
pub fn solve(problem: &Problem, config: &SolverConfig, clock: &dyn Clock) -> SolveResult {
    let mut search = Search {
        problem,
        config,
        clock,
        start: clock.now(),
        incumbent: None,
        timeline: Vec::new(),
        stats: SolveStats::default(),
    };
    let prop_cfg = PropagationConfig {
        feas_tol: config.tol.feas,
        int_tol: config.tol.int,
    };

    let mut root_domains = Domains::of(problem);
    let mut lp = LpState::relax_with(problem, config.lp);
    if propagate::propagate(problem, &mut root_domains, config.row_rounds, prop_cfg).is_err() {
        return finish(search, SolveStatus::Infeasible, f64::INFINITY, None, &lp);
    }

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut next: Option<Node> = Some(Node {
        seq,
        depth: 0,
        bound: f64::NEG_INFINITY,
        changes: Vec::new(),
        basis: None,
    });
    let mut plunge = 0usize;
    let mut status = None;

    loop {
        let node = match next.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => {
                    plunge = 0;
                    n
                }
                None => break,
            },
        };
        if search.prunable(node.bound) {
            continue;
        }
        if search.stats.nodes > 0 {
            if search.out_of_time() {
                heap.push(node);
                status = Some(SolveStatus::TimeLimit);
                break;
            }
            if config.root_only || config.node_limit.is_some_and(|l| search.stats.nodes >= l) {
                heap.push(node);
                status = Some(SolveStatus::NodeLimit);
                break;
            }
            if let Some(v) = search.incumbent_value() {
                let lb = node.bound.min(heap.peek().map_or(f64::INFINITY, |n| n.bound));
                if v - lb <= config.gap_tol * v.abs().max(1.0) {
                    break;
                }
            }
        }

        let is_root = node.depth == 0;
        match process(&mut search, &mut lp, &root_domains, &node, &mut seq, prop_cfg) {
            Err(ray) => {
                let lp_ray = ray;
                search.stats.lp_iterations = lp.iterations();
                return finish(search, SolveStatus::Unbounded, f64::NEG_INFINITY, Some(lp_ray), &lp);
            }
            Ok(NodeResult::Pruned) => {}
            Ok(NodeResult::Branched(preferred, other)) => {
                if plunge < config.plunge_depth {
                    plunge += 1;
                    heap.push(other);
                    next = Some(preferred);
                } else {
                    heap.push(preferred);
                    heap.push(other);
                }
            }
        }
        if is_root {
            search.stats.root_time = search.elapsed();
            search.stats.root_incumbent = search.incumbent_value();
        }
    }

    let open_bound = heap
        .iter()
        .filter(|n| !search.prunable(n.bound))
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    let inc = search.incumbent_value();
    let (status, bound) = match status {
        Some(s) if open_bound.is_finite() || open_bound == f64::NEG_INFINITY => {
            (s, inc.map_or(open_bound, |v| open_bound.min(v)))
        }
        _ => match inc {
            Some(v) => (SolveStatus::Optimal, v.min(open_bound)),
            None if open_bound == f64::INFINITY => (SolveStatus::Infeasible, f64::INFINITY),
            None => (status.unwrap_or(SolveStatus::NodeLimit), open_bound),
        },
    };
    finish(search, status, bound, None, &lp)
}

fn finish(mut search: Search<'_>, status: SolveStatus, bound: f64, ray: Option<Vec<f64>>, lp: &LpState) -> SolveResult {
    search.stats.lp_iterations = lp.iterations();
    search.stats.time = search.elapsed();
    if search.stats.nodes <= 1 && search.stats.root_incumbent.is_none() {
        search.stats.root_incumbent = search.incumbent_value();
    }
    let bound = match search.incumbent_value() {
        Some(v) => bound.min(v),
        None => bound,
    };
    SolveResult {
        status,
        incumbent: search.incumbent,
        bound,
        timeline: search.timeline,
        stats: search.stats,
        ray,
    }
}

fn process(
    search: &mut Search<'_>,
    lp: &mut LpState,
    root_domains: &Domains,
    node: &Node,
    seq: &mut u64,
    prop_cfg: PropagationConfig,
) -> Result<NodeResult, Vec<f64>> {
    let problem = search.problem;
    let config = search.config;
    let tol = config.tol;
    search.stats.nodes += 1;
    search.stats.max_depth = search.stats.max_depth.max(node.depth);

    let mut domains = root_domains.clone();
    for c in &node.changes {
        domains.apply(c);
    }
    if (0..domains.len()).any(|j| domains.lower[j] > domains.upper[j]) {
        return Ok(NodeResult::Pruned);
    }
    if propagate::propagate(problem, &mut domains, config.row_rounds, prop_cfg).is_err() {
        return Ok(NodeResult::Pruned);
    }
    diving::load_domains(problem, lp, &domains);
    let status = match &node.basis {
        Some(b) => lp.solve_with(Some(b)),
        None => lp.solve_cold(),
    };
    match status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(NodeResult::Pruned),
        LpStatus::Unbounded if node.depth == 0 => {
            return Err(lp.unbounded_ray().map(<[f64]>::to_vec).unwrap_or_default());
        }
        _ => {
            search.stats.lp_failures += 1;
            return Ok(NodeResult::Pruned);
        }
    }
    let bound = lp.objective().max(node.bound);
    if node.depth == 0 {
        search.stats.root_lp_objective = Some(lp.objective());
    }
    if search.prunable(bound) {
        return Ok(NodeResult::Pruned);
    }
    let point = lp.point();
    if problem.check_feasible(&point, tol).is_feasible() {
        let obj = problem.objective_value(&point);
        search.offer(point, obj, FoundBy::NodeIntegral);
        return Ok(NodeResult::Pruned);
    }

    let heur = &config.heuristics;
    if heur.rounding {
        if let Some(p) = diving::simple_round(problem, &domains, &point, tol) {
            let obj = problem.objective_value(&p);
            search.offer(p, obj, FoundBy::Rounding);
        }
    }
    let dive_here = heur.diving && (node.depth == 0 || (heur.depth_freq > 0 && node.depth.is_multiple_of(heur.depth_freq)));
    if dive_here {
        let t0 = search.elapsed();
        let out = diving::dive(problem, lp, &domains, search.incumbent_value(), &heur.dive);
        let st = &mut search.stats.diving;
        st.calls += 1;
        st.lp_resolves += out.lp_resolves as u64;
        if node.depth == 0 {
            st.root_called = true;
        }
        let mut found = false;
        if let Some((p, obj, _)) = out.solution {
            if problem.check_feasible(&p, tol).is_feasible() {
                found = search.offer(p, obj, FoundBy::Diving);
            }
        }
        let elapsed = search.elapsed() - t0;
        let st = &mut search.stats.diving;
        st.time += elapsed;
        if found {
            st.found += 1;
            if node.depth == 0 {
                st.root_found = true;
            }
            if st.first_objective.is_none() {
                st.first_objective = search.incumbent.as_ref().map(|i| i.objective);
            }
        }
        if search.prunable(bound) {
            return Ok(NodeResult::Pruned);
        }
    }

    let Some(branch) = select_branch(problem, &domains, &point, tol, heur.dive.seed) else {
        // Feasible up to tolerances that check_feasible rejected; nothing to branch on.
        search.stats.lp_failures += 1;
        return Ok(NodeResult::Pruned);
    };
    let basis = Some(Rc::new(lp.basis()));
    let mut child = |change: BoundChange| {
        *seq += 1;
        let mut changes = node.changes.clone();
        changes.push(change);
        Node {
            seq: *seq,
            depth: node.depth + 1,
            bound,
            changes,
            basis: basis.clone(),
        }
    };
    let a = child(branch.preferred);
    let b = child(branch.other);
    Ok(NodeResult::Branched(a, b))
}
