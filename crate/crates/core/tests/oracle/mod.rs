//! Independent oracles and seeded instance builders shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use semidive_core::model::{LinearRow, Problem, SemiContinuousSpec, Sense, Stage, VarKind, Variable};
use semidive_core::rng::SplitMix64;

// ---------------------------------------------------------------- LP oracle

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpVerdict {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const SMALL_BOX: f64 = 1e6;
const LARGE_BOX: f64 = 1e7;

/// Solves the LP relaxation of `problem` (rows and bounds only) by
/// enumerating every basic solution. Infinite bounds are replaced by two
/// artificial boxes; an optimum that moves with the box means unbounded.
pub fn enumerate_lp(problem: &Problem) -> LpVerdict {
    let small = best_vertex(problem, SMALL_BOX);
    let large = best_vertex(problem, LARGE_BOX);
    match (small, large) {
        (None, None) => LpVerdict::Infeasible,
        (Some(a), Some(b)) if (a - b).abs() <= 1e-6 * (1.0 + a.abs()) => LpVerdict::Optimal(a),
        _ => LpVerdict::Unbounded,
    }
}

/// Hyperplane `a·x = b` candidate for a vertex.
struct Plane {
    a: Vec<f64>,
    b: f64,
}

fn best_vertex(problem: &Problem, boxed: f64) -> Option<f64> {
    let n = problem.variables.len();
    if n == 0 {
        let ok = problem.rows.iter().all(|r| r.violation(&[]) <= 1e-9);
        return ok.then_some(0.0);
    }
    let lo: Vec<f64> = problem.variables.iter().map(|v| v.lower.max(-boxed)).collect();
    let hi: Vec<f64> = problem.variables.iter().map(|v| v.upper.min(boxed)).collect();
    let mut planes = Vec::new();
    for row in &problem.rows {
        let mut a = vec![0.0; n];
        for &(j, c) in &row.coeffs {
            a[j] += c;
        }
        planes.push(Plane { a, b: row.rhs });
    }
    for j in 0..n {
        for b in [lo[j], hi[j]] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push(Plane { a, b });
        }
    }
    let cost: Vec<f64> = problem.variables.iter().map(|v| v.obj).collect();
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    combinations(planes.len(), n, &mut pick, &mut |idx| {
        let Some(x) = solve_square(idx.iter().map(|&i| &planes[i]), n) else {
            return;
        };
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * scale;
        for j in 0..n {
            if x[j] < lo[j] - tol || x[j] > hi[j] + tol {
                return;
            }
        }
        for row in &problem.rows {
            if row.violation(&x) > tol * 10.0 {
                return;
            }
        }
        let obj: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.is_none_or(|b| obj < b) {
            best = Some(obj);
        }
    });
    best
}

fn combinations(total: usize, k: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    let start = pick.last().map_or(0, |&l| l + 1);
    let need = k - pick.len();
    for i in start..=total.saturating_sub(need) {
        if i >= total {
            break;
        }
        pick.push(i);
        combinations(total, k, pick, visit);
        pick.pop();
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square<'a>(planes: impl Iterator<Item = &'a Plane>, n: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = planes
        .map(|p| {
            let mut r = p.a.clone();
            r.push(p.b);
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-9 {
            return None;
        }
        m.swap(c, piv);
        for i in 0..n {
            if i != c {
                let f = m[i][c] / m[c][c];
                if f != 0.0 {
                    for k in c..=n {
                        m[i][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Random LP with at most 6 variables and 6 rows, small integer data and a
/// mix of finite and infinite bounds.
pub fn random_lp(seed: u64) -> Problem {
    let mut rng = SplitMix64::new(seed);
    let n = rng.range_inclusive(1, 6) as usize;
    let m = rng.range_inclusive(0, 6) as usize;
    let mut p = Problem::new(Stage::Indicator);
    for j in 0..n {
        let lo = match rng.range_inclusive(0, 3) {
            0 => f64::NEG_INFINITY,
            _ => rng.range_inclusive(0, 4) as f64 - 2.0,
        };
        let hi = match rng.range_inclusive(0, 3) {
            0 => f64::INFINITY,
            _ => lo.max(-2.0) + rng.range_inclusive(0, 5) as f64,
        };
        let obj = rng.range_inclusive(0, 10) as f64 - 5.0;
        p.add_var(Variable::continuous(format!("x{j}"), lo, hi, obj));
    }
    for r in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.range_inclusive(0, 2) > 0 {
                let a = rng.range_inclusive(0, 6) as f64 - 3.0;
                if a != 0.0 {
                    coeffs.push((j, a));
                }
            }
        }
        if coeffs.is_empty() {
            coeffs.push((r % n, 1.0));
        }
        let sense = match rng.range_inclusive(0, 4) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = rng.range_inclusive(0, 20) as f64 - 10.0;
        p.add_row(LinearRow::new(format!("r{r}"), coeffs, sense, rhs));
    }
    p
}

// --------------------------------------------------------------- MIP oracle

/// Upper cap used for semi-continuous variables declared unbounded; a model
/// row enforces it so the instance stays enumerable.
pub const SC_ROW_CAP_SLACK: u64 = 3;

/// Random semi-continuous-form instance: up to 8 bounded integers/binaries
/// and up to 4 semi-integer lots `y ∈ {0} ∪ {s, …, u}`. After the indicator
/// reformulation there are at most 12 discrete variables. Lots with `u = ∞`
/// are capped by an explicit row.
pub fn random_mip(seed: u64) -> Problem {
    let mut rng = SplitMix64::new(seed ^ 0x5EED_0F_0A11);
    loop {
        let p = draw_mip(&mut rng);
        if enumeration_size(&p) <= 200_000 {
            return p;
        }
    }
}

fn draw_mip(rng: &mut SplitMix64) -> Problem {
    let mut p = Problem::new(Stage::SemiContinuous);
    let nd = rng.range_inclusive(1, 8) as usize;
    let ns = rng.range_inclusive(1, 4) as usize;
    for j in 0..nd {
        let obj = rng.range_inclusive(0, 10) as f64 - 5.0;
        if rng.range_inclusive(0, 1) == 0 {
            p.add_var(Variable::binary(format!("b{j}"), obj));
        } else {
            let lo = rng.range_inclusive(0, 2) as f64 - 1.0;
            let hi = lo + rng.range_inclusive(1, 3) as f64;
            p.add_var(Variable::integer(format!("n{j}"), lo, hi, obj));
        }
    }
    let mut caps = Vec::new();
    for k in 0..ns {
        let s = rng.range_inclusive(1, 3) as f64;
        let width = rng.range_inclusive(0, 3) as f64;
        let unbounded = rng.range_inclusive(0, 3) == 0;
        let unit = rng.range_inclusive(0, 5) as f64 - 2.0;
        let setup = rng.range_inclusive(0, 6) as f64;
        let y = p.add_var(Variable::integer(format!("y{k}"), 0.0, f64::INFINITY, unit));
        let upper = if unbounded { f64::INFINITY } else { s + width };
        p.variables[y].upper = upper;
        p.sc_specs.push(SemiContinuousSpec {
            var: y,
            min_lot: s,
            upper,
            unit_cost: unit,
            setup_cost: setup,
        });
        if unbounded {
            caps.push((y, s + width + SC_ROW_CAP_SLACK as f64));
        }
    }
    for (y, cap) in caps {
        let name = format!("cap_{}", p.variables[y].name);
        p.add_row(LinearRow::new(name, vec![(y, 1.0)], Sense::Le, cap));
    }
    // Rows built around a random witness so most instances are feasible.
    let witness: Vec<f64> = (0..p.variables.len()).map(|j| draw_value(&p, j, rng)).collect();
    let nr = rng.range_inclusive(1, 4) as usize;
    for r in 0..nr {
        let mut coeffs = Vec::new();
        for j in 0..p.variables.len() {
            if rng.range_inclusive(0, 2) == 0 {
                let a = rng.range_inclusive(0, 6) as f64 - 3.0;
                if a != 0.0 {
                    coeffs.push((j, a));
                }
            }
        }
        if coeffs.is_empty() {
            continue;
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * witness[j]).sum();
        let slack = rng.range_inclusive(0, 3) as f64;
        let (sense, rhs) = match rng.range_inclusive(0, 4) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Le, act + slack),
            _ => (Sense::Ge, act - slack),
        };
        p.add_row(LinearRow::new(format!("r{r}"), coeffs, sense, rhs));
    }
    p
}

fn draw_value(p: &Problem, j: usize, rng: &mut SplitMix64) -> f64 {
    let dom = domain_values(p, j);
    dom[rng.range_inclusive(0, dom.len() as u64 - 1) as usize]
}

/// Finite value list of variable `j` for enumeration.
pub fn domain_values(p: &Problem, j: usize) -> Vec<f64> {
    if let Some(spec) = p.sc_specs.iter().find(|s| s.var == j) {
        let top = if spec.upper.is_finite() {
            spec.upper
        } else {
            row_cap(p, j).expect("unbounded lot without a cap row")
        };
        let mut vals = vec![0.0];
        let mut v = spec.min_lot;
        while v <= top {
            vals.push(v);
            v += 1.0;
        }
        return vals;
    }
    let v = &p.variables[j];
    assert!(v.kind != VarKind::Continuous, "enumeration needs discrete variables");
    let mut vals = Vec::new();
    let mut x = v.lower;
    while x <= v.upper {
        vals.push(x);
        x += 1.0;
    }
    vals
}

fn row_cap(p: &Problem, y: usize) -> Option<f64> {
    p.rows
        .iter()
        .find(|r| r.sense == Sense::Le && r.coeffs == [(y, 1.0)])
        .map(|r| r.rhs)
}

pub fn enumeration_size(p: &Problem) -> u64 {
    (0..p.variables.len()).map(|j| domain_values(p, j).len() as u64).product()
}

/// Exhaustive minimum of a semi-continuous-form instance over its discrete
/// domains. Objective and feasibility are evaluated from first principles.
pub fn enumerate_mip(p: &Problem) -> Option<f64> {
    let doms: Vec<Vec<f64>> = (0..p.variables.len()).map(|j| domain_values(p, j)).collect();
    let n = doms.len();
    let mut idx = vec![0usize; n];
    let mut x: Vec<f64> = doms.iter().map(|d| d[0]).collect();
    let mut best: Option<f64> = None;
    loop {
        let feasible = p.rows.iter().all(|row| {
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            match row.sense {
                Sense::Le => act <= row.rhs + 1e-9,
                Sense::Ge => act >= row.rhs - 1e-9,
                Sense::Eq => (act - row.rhs).abs() <= 1e-9,
            }
        });
        if feasible {
            let mut obj = 0.0;
            for j in 0..n {
                match p.sc_specs.iter().find(|s| s.var == j) {
                    Some(spec) => {
                        obj += spec.unit_cost * x[j];
                        if x[j] != 0.0 {
                            obj += spec.setup_cost;
                        }
                    }
                    None => obj += p.variables[j].obj * x[j],
                }
            }
            if best.is_none_or(|b| obj < b) {
                best = Some(obj);
            }
        }
        // Mixed-radix increment.
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < doms[k].len() {
                x[k] = doms[k][idx[k]];
                break;
            }
            idx[k] = 0;
            x[k] = doms[k][0];
            k += 1;
        }
    }
}

/// Whether every lot of the instance has a finite upper bound.
pub fn all_lots_bounded(p: &Problem) -> bool {
    p.sc_specs.iter().all(|s| s.upper.is_finite())
}

// ------------------------------------------------------- heuristic contract

use semidive_core::diving::{self, cutoff_eps, CandidateKind, DiveConfig, TIE_DELTA};
use semidive_core::model::Tolerances;
use semidive_core::propagate::Domains;
use semidive_core::simplex::{farkas_margin, InfeasibilityProof, LpState, LpStatus};

/// `random_mip` in indicator form with continuous lots, for dive checks.
pub fn dive_instance(seed: u64) -> Problem {
    let mut sc = random_mip(seed);
    for spec in &sc.sc_specs {
        sc.variables[spec.var].kind = VarKind::Continuous;
    }
    sc.reformulate_indicator().unwrap()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct DiveTally {
    pub dives: usize,
    pub solutions: usize,
}

/// Runs dives from the root LP with and without an incumbent and checks the
/// contract: feasible improving solutions, restored LP state, bounded
/// resolve counter.
pub fn check_dive_contract(seed: u64, tally: &mut DiveTally) -> Result<(), String> {
    let p = dive_instance(seed);
    let dom = Domains::of(&p);
    let mut lp = LpState::relax(&p);
    if lp.solve() != LpStatus::Optimal {
        return Ok(());
    }
    let root = lp.objective();
    let mut rng = SplitMix64::new(seed);
    let incumbents = [None, Some(root + rng.uniform(0.0, 20.0)), Some(root + 1e-7)];
    for inc in incumbents {
        let cfg = DiveConfig {
            seed,
            max_depth: if rng.range_inclusive(0, 1) == 0 { None } else { Some(rng.range_inclusive(1, 4) as usize) },
            resolve_freq: rng.range_inclusive(1, 2) as usize,
            backtrack_budget: rng.range_inclusive(0, 10) as usize,
            ..DiveConfig::default()
        };
        let before = (lp.lower_bounds().to_vec(), lp.upper_bounds().to_vec(), lp.values().to_vec(), lp.cutoff(), lp.status());
        let slack_before: Vec<_> = (0..lp.num_rows()).map(|r| lp.slack_bounds(r)).collect();
        let out = diving::dive(&p, &mut lp, &dom, inc, &cfg);
        tally.dives += 1;
        let after = (lp.lower_bounds().to_vec(), lp.upper_bounds().to_vec(), lp.values().to_vec(), lp.cutoff(), lp.status());
        let slack_after: Vec<_> = (0..lp.num_rows()).map(|r| lp.slack_bounds(r)).collect();
        if before != after || slack_before != slack_after {
            return Err(format!("seed {seed}: LP state not restored"));
        }
        if out.lp_resolves > out.resolve_budget || out.lp_resolves > out.max_depth + cfg.backtrack_budget {
            return Err(format!(
                "seed {seed}: {} resolves, budget {}, depth {}",
                out.lp_resolves, out.resolve_budget, out.max_depth
            ));
        }
        if let Some((pt, obj, _)) = out.solution {
            tally.solutions += 1;
            if !p.check_feasible(&pt, Tolerances::default()).is_feasible() {
                return Err(format!("seed {seed}: infeasible dive solution"));
            }
            if (p.objective_value(&pt) - obj).abs() > 1e-9 * (1.0 + obj.abs()) {
                return Err(format!("seed {seed}: reported objective differs"));
            }
            if let Some(v) = inc {
                if obj > v - cutoff_eps(v) {
                    return Err(format!("seed {seed}: {obj} does not beat {v} by the cutoff margin"));
                }
            }
        }
    }
    Ok(())
}

/// Tier of a candidate score: 0 for violated lots inside the gap, 1 for
/// the perturbed `−1` tier, 2 for the fallback tier.
fn tier(score: f64) -> Option<u8> {
    if score > 0.0 && score <= 100.0 {
        Some(0)
    } else if score <= -1.0 && score > -1.0 - TIE_DELTA {
        Some(1)
    } else if score > -300.0 && score < -100.0 {
        Some(2)
    } else {
        None
    }
}

/// Scores candidates at a random point of the instance's box and checks
/// the tier ordering.
pub fn check_priority(seed: u64) -> Result<(), String> {
    let p = dive_instance(seed / 4);
    let dom = Domains::of(&p);
    let mut rng = SplitMix64::new(seed);
    let point: Vec<f64> = p
        .variables
        .iter()
        .map(|v| {
            let lo = v.lower.max(-5.0);
            let hi = v.upper.min(lo + 10.0);
            match rng.range_inclusive(0, 3) {
                0 => lo,
                1 => hi,
                2 if v.kind.is_discrete() => (lo + rng.range_inclusive(0, (hi - lo) as u64) as f64).min(hi),
                _ => rng.uniform(lo, hi),
            }
        })
        .collect();
    let cands = diving::collect_candidates(&p, &dom, &point, Tolerances::default(), seed);
    let mut tiers = Vec::new();
    for c in &cands {
        let t = tier(c.score).ok_or(format!("seed {seed}: score {} outside every tier", c.score))?;
        let expected = match c.kind {
            CandidateKind::Indicator => {
                let (y, s) = p.links[c.link.unwrap()].semi_continuous_parts().unwrap();
                if point[y] < s { 0 } else { 1 }
            }
            _ => 2,
        };
        if t != expected {
            return Err(format!("seed {seed}: {:?} scored {} in tier {t}", c.kind, c.score));
        }
        tiers.push((t, c.score));
    }
    for a in &tiers {
        for b in &tiers {
            if a.0 < b.0 && a.1 <= b.1 {
                return Err(format!("seed {seed}: tier order broken {a:?} vs {b:?}"));
            }
        }
    }
    if let Some(i) = diving::best_candidate(&cands) {
        let top = tiers.iter().map(|t| t.0).min().unwrap();
        if tiers[i].0 != top {
            return Err(format!("seed {seed}: best candidate not from the top tier"));
        }
    }
    Ok(())
}

/// Simplex outcome against the enumeration verdict, including certificates.
pub fn agrees(lp: &LpState, verdict: LpVerdict) -> Result<(), String> {
    match (lp.status(), verdict) {
        (LpStatus::Optimal, LpVerdict::Optimal(v)) => {
            let got = lp.objective();
            if (got - v).abs() <= 1e-7 * (1.0 + v.abs()) {
                Ok(())
            } else {
                Err(format!("objective {got} vs oracle {v}"))
            }
        }
        (LpStatus::Infeasible, LpVerdict::Infeasible) => match lp.infeasibility_proof() {
            Some(InfeasibilityProof::CrossedBounds { column }) => {
                let (lo, hi) = if *column < lp.num_cols() {
                    lp.bounds(*column)
                } else {
                    lp.slack_bounds(*column - lp.num_cols())
                };
                (lo > hi).then_some(()).ok_or_else(|| "bounds not crossed".into())
            }
            Some(InfeasibilityProof::Farkas(w)) => {
                let margin = farkas_margin(lp, w);
                (margin > 0.0).then_some(()).ok_or(format!("Farkas margin {margin}"))
            }
            None => Err("infeasible without a certificate".into()),
        },
        (LpStatus::Unbounded, LpVerdict::Unbounded) => check_ray(lp),
        (s, v) => Err(format!("status {s:?} vs oracle {v:?}")),
    }
}

/// The ray must be an improving recession direction of the feasible set.
pub fn check_ray(lp: &LpState) -> Result<(), String> {
    let ray = lp.unbounded_ray().ok_or("unbounded without a ray")?;
    let n = lp.num_cols();
    let slope: f64 = lp.cost().iter().zip(ray).map(|(c, r)| c * r).sum();
    if slope >= -1e-9 {
        return Err(format!("ray does not improve: slope {slope}"));
    }
    for j in 0..n {
        let (lo, hi) = lp.bounds(j);
        if (ray[j] < -1e-9 && lo.is_finite()) || (ray[j] > 1e-9 && hi.is_finite()) {
            return Err(format!("ray leaves the bounds of column {j}"));
        }
    }
    for r in 0..lp.num_rows() {
        let (lo, hi) = lp.slack_bounds(r);
        let d: f64 = lp.row_coeffs(r).iter().map(|&(j, a)| a * ray[j]).sum();
        if (d < -1e-9 && lo.is_finite()) || (d > 1e-9 && hi.is_finite()) {
            return Err(format!("ray leaves row {r}"));
        }
    }
    Ok(())
}
