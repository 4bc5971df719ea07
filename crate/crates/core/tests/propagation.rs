mod oracle;

use oracle::random_mip;
use semidive_core::model::{Implication, Problem, Sense};
use semidive_core::propagate::{propagate, Domains, PropagationConfig};
use semidive_core::rng::SplitMix64;

/// All integer points of `dom` satisfying rows and links of `p`, computed
/// directly. `None` when the box is too large.
fn feasible_points(p: &Problem, dom: &Domains) -> Option<Vec<Vec<f64>>> {
    let n = p.num_vars();
    let mut vals = Vec::with_capacity(n);
    let mut size = 1u64;
    for j in 0..n {
        let hi = if dom.upper[j].is_finite() { dom.upper[j] } else { cap_of(p, j)? };
        let (lo, hi) = (dom.lower[j].ceil(), hi.floor());
        let v: Vec<f64> = (lo as i64..=hi as i64).map(|x| x as f64).collect();
        size = size.checked_mul(v.len().max(1) as u64)?;
        vals.push(v);
    }
    if size > 300_000 {
        return None;
    }
    if vals.iter().any(|v| v.is_empty()) {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = (0..n).map(|j| vals[j][idx[j]]).collect();
        let rows_ok = p.rows.iter().all(|r| {
            let a: f64 = r.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            match r.sense {
                Sense::Le => a <= r.rhs + 1e-9,
                Sense::Ge => a >= r.rhs - 1e-9,
                Sense::Eq => (a - r.rhs).abs() <= 1e-9,
            }
        });
        let links_ok = p.links.iter().all(|l| match l.implication {
            Implication::SemiContinuous { var, .. } => x[l.binary] != 0.0 || x[var] <= 0.0,
            Implication::Generic { .. } => true,
        });
        if rows_ok && links_ok {
            out.push(x);
        }
        let mut k = 0;
        loop {
            if k == n {
                return Some(out);
            }
            idx[k] += 1;
            if idx[k] < vals[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn cap_of(p: &Problem, y: usize) -> Option<f64> {
    p.rows
        .iter()
        .find(|r| r.sense == Sense::Le && r.coeffs == [(y, 1.0)])
        .map(|r| r.rhs)
}

#[test]
fn propagation_never_removes_feasible_points() {
    let mut checked = 0;
    let mut conflicts = 0;
    for seed in 0..300u64 {
        let p = random_mip(seed).reformulate_indicator().unwrap();
        let mut rng = SplitMix64::new(seed);
        let mut dom = Domains::of(&p);
        // A few random fixings make propagation do real work.
        for _ in 0..rng.range_inclusive(0, 3) {
            let j = rng.range_inclusive(0, p.num_vars() as u64 - 1) as usize;
            let hi = if dom.upper[j].is_finite() { dom.upper[j] } else { dom.lower[j] + 4.0 };
            let v = dom.lower[j] + rng.range_inclusive(0, (hi - dom.lower[j]) as u64) as f64;
            if rng.range_inclusive(0, 1) == 0 {
                dom.lower[j] = v;
            } else {
                dom.upper[j] = v;
            }
        }
        let Some(points) = feasible_points(&p, &dom) else { continue };
        checked += 1;
        let mut after = dom.clone();
        match propagate(&p, &mut after, 5, PropagationConfig::default()) {
            Ok(_) => {
                for x in &points {
                    assert!(after.contains(x, 1e-9), "seed {seed}: feasible point cut off");
                }
            }
            Err(c) => {
                conflicts += 1;
                assert!(points.is_empty(), "seed {seed}: conflict {c:?} with feasible points");
            }
        }
    }
    assert!(checked >= 150, "only {checked} instances checked");
    assert!(conflicts > 0, "no conflicts exercised");
}
