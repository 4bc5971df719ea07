//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! Criterion 7 runs the full-tree experiment with a 2 s time limit by
//! default; pass `--full` (`cargo test -p semidive --test acceptance --
//! --full`) for the 60 s limit, which takes hours on one core.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::PathBuf;
use std::time::Instant;

use semidive::genbench::report::records_csv;
use semidive::genbench::{generate, run_experiment, summarize, ExperimentConfig, GenParams, Mode};
use semidive::io::{canonical_dump, parse_mps, parse_native, write_native};
use semidive_core::bnb::{solve, SolveStatus, SolverConfig};
use semidive_core::clock::FrozenClock;
use semidive_core::diving::{
    collect_candidates, round_fractional, round_indicator, score_fallback, score_indicator, tie_value, CandidateKind,
    Direction, TIE_DELTA,
};
use semidive_core::metrics::{primal_gap, primal_integral, sgm, sgm1, Timeline};
use semidive_core::model::{Problem, Tolerances};
use semidive_core::propagate::Domains;
use semidive_core::simplex::LpState;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(failures: Vec<String>, summary: String) -> Verdict {
    if failures.is_empty() {
        Verdict {
            pass: true,
            detail: summary,
        }
    } else {
        let shown: Vec<&String> = failures.iter().take(5).collect();
        Verdict {
            pass: false,
            detail: format!("{summary}; {} failures: {shown:?}", failures.len()),
        }
    }
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn criterion_1() -> Verdict {
    let mut f = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            f.push(what.to_string());
        }
    };
    check(score_indicator(2.0, 10.0, -1.0) == 80.0, "score s=10 y=2");
    check(close(score_indicator(9.99, 10.0, -1.0), 0.1, 1e-9), "score s=10 y=9.99");
    let tie = tie_value(7, 3);
    let s = score_indicator(12.0, 10.0, tie);
    check(s <= -1.0 && s > -1.0 - TIE_DELTA, "score y=12 in the -1 tier");
    let g = |r: f64| 1.0 / (1.0 + (-10.0 * (r - 0.5)).exp());
    check(close(score_fallback(2.5), -300.0 + 200.0 * g(0.0), 1e-9), "fallback f=0.5");
    check(close(score_fallback(3.01), -300.0 + 200.0 * g(0.98), 1e-9), "fallback f=0.01");
    check(close(score_fallback(3.01), -101.63, 5e-3), "fallback f=0.01 near -101.63");
    check(round_indicator(5.0, 10.0) == (Direction::Up, 1.0), "sigma/beta y=0.5s");
    check(round_indicator(4.9, 10.0) == (Direction::Down, 0.0), "sigma/beta y=4.9");
    check(round_fractional(2.3) == (Direction::Down, 2.0), "sigma/beta x=2.3");
    check(primal_gap(Some(5.0), None) == 1.0, "PG without incumbent");
    check(primal_gap(Some(0.0), Some(0.0)) == 0.0, "PG zero/zero");
    check(primal_gap(Some(100.0), Some(120.0)) == 20.0 / 120.0, "PG 100/120");
    check(primal_gap(Some(100.0), Some(-50.0)) == 1.0, "PG sign change");
    let mut t = Timeline::new(10.0, Some(75.0));
    t.push(4.0, 100.0);
    check(primal_integral(&t) == 5.5, "PI two segments");
    check(primal_integral(&Timeline::new(7.0, Some(1.0))) == 7.0, "PI without incumbent");
    let mut t = Timeline::new(3.0, Some(2.0));
    t.push(0.0, 2.0);
    check(primal_integral(&t) == 0.0, "PI zero gap from the start");
    check(close(sgm(&[1.0, 3.0], 1.0).unwrap(), 8f64.sqrt() - 1.0, 1e-9), "SGM {1,3}");
    check(sgm1(&[1.0, 3.0]) == sgm(&[1.0, 3.0], 1.0), "SGM default shift 1");
    check(sgm(&[5.0, 5.0, 5.0], 2.5).unwrap() == 5.0, "SGM constant");
    check(sgm1(&[0.2, 3.0, 7.5]) == sgm1(&[7.5, 0.2, 3.0]), "SGM permutation");
    verdict(f, "worked examples of scores, rounding, PG, PI, SGM".into())
}

fn criterion_2() -> Verdict {
    let mut f = Vec::new();
    for seed in 0..200u64 {
        let p = oracle::random_lp(seed);
        let mut lp = LpState::relax(&p);
        lp.solve();
        if let Err(e) = oracle::agrees(&lp, oracle::enumerate_lp(&p)) {
            f.push(format!("seed {seed}: {e}"));
        }
    }
    verdict(f, "200 random LPs against vertex enumeration".into())
}

fn mip_config(heuristics: bool) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    cfg.heuristics.diving = heuristics;
    cfg.heuristics.rounding = heuristics;
    cfg
}

fn criterion_3() -> Verdict {
    let mut f = Vec::new();
    for seed in 0..100u64 {
        let sc = oracle::random_mip(seed);
        let want = oracle::enumerate_mip(&sc);
        let p = sc.reformulate_indicator().unwrap();
        let got: Vec<Option<f64>> = [true, false]
            .iter()
            .map(|&h| solve(&p, &mip_config(h), &FrozenClock).objective())
            .collect();
        for (k, g) in got.iter().enumerate() {
            let ok = match (g, want) {
                (Some(a), Some(b)) => close(*a, b, 1e-6),
                (None, None) => true,
                _ => false,
            };
            if !ok {
                f.push(format!("seed {seed} heuristics={}: {g:?} vs {want:?}", k == 0));
            }
        }
    }
    verdict(f, "100 random MIPs against enumeration, heuristics on and off".into())
}

fn criterion_4() -> Verdict {
    let mut f = Vec::new();
    let mut compared = 0;
    for seed in 0..100u64 {
        let sc = oracle::random_mip(seed);
        if !oracle::all_lots_bounded(&sc) {
            continue;
        }
        compared += 1;
        let m: Vec<f64> = sc.sc_specs.iter().map(|s| s.upper).collect();
        let a = solve(&sc.reformulate_indicator().unwrap(), &mip_config(true), &FrozenClock).objective();
        let b = solve(&sc.reformulate_big_m(&m).unwrap(), &mip_config(true), &FrozenClock).objective();
        let ok = match (a, b) {
            (Some(a), Some(b)) => close(a, b, 1e-6),
            (None, None) => true,
            _ => false,
        };
        if !ok {
            f.push(format!("seed {seed}: {a:?} vs {b:?}"));
        }
    }
    if compared == 0 {
        f.push("no finite instances".into());
    }
    verdict(f, format!("indicator against big-M on {compared} finite instances"))
}

fn criterion_5() -> Verdict {
    let mut f = Vec::new();
    for seed in 0..1000u64 {
        if let Err(e) = oracle::check_priority(seed) {
            f.push(e);
        }
    }
    let mut tally = oracle::DiveTally::default();
    for seed in 0..300u64 {
        if let Err(e) = oracle::check_dive_contract(seed, &mut tally) {
            f.push(e);
        }
    }
    if tally.solutions == 0 {
        f.push("no dive returned a solution".into());
    }
    verdict(
        f,
        format!("1000 priority points, {} dives with {} solutions", tally.dives, tally.solutions),
    )
}

fn root_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(Mode::RootOnly);
    cfg.reference_node_limit = Some(2000);
    cfg
}

fn criterion_6(records: &mut Option<String>) -> Verdict {
    let out = run_experiment(&root_config()).unwrap();
    *records = Some(records_csv(&out).unwrap());
    let s = summarize(&out);
    let c = s.comparison.expect("both arms ran");
    let with = s.arms.iter().find(|a| a.arm == semidive::genbench::Arm::WithId).unwrap();
    let obs = with.observations;
    let ratio = c.root_pg_ratio.unwrap_or(f64::NAN);
    let mut f = Vec::new();
    if !(ratio < 1.0) {
        f.push(format!("root PG ratio {ratio}"));
    }
    if (with.called as f64) < 0.8 * obs as f64 {
        f.push(format!("called on {} of {obs}", with.called));
    }
    if (with.found as f64) < 0.5 * with.called as f64 {
        f.push(format!("found on {} of {} called", with.found, with.called));
    }
    verdict(
        f,
        format!(
            "{obs} observations, root PG ratio {ratio:.4}, called {}, found {}",
            with.called, with.found
        ),
    )
}

fn criterion_7(full: bool) -> Verdict {
    let mut cfg = ExperimentConfig::desk(Mode::Full);
    if !full {
        cfg.time_limit = 2.0;
    }
    let out = run_experiment(&cfg).unwrap();
    let c = summarize(&out).comparison.expect("both arms ran");
    let ratio = c.pi_ratio.unwrap_or(f64::NAN);
    let mut f = Vec::new();
    if !(ratio <= 1.02) {
        f.push(format!("PI ratio {ratio}"));
    }
    if !(c.heur_time_share < 0.05) {
        f.push(format!("diving time share {}", c.heur_time_share));
    }
    let scale = if full { "60 s limit" } else { "reduced to a 2 s limit, --full for 60 s" };
    verdict(
        f,
        format!(
            "{} observations ({scale}), PI ratio {ratio:.4}, diving time share {:.4}, wins {} losses {}",
            c.observations, c.heur_time_share, c.wins, c.losses
        ),
    )
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn brute_force_integral(p: &Problem) -> Option<f64> {
    let n = p.num_vars();
    let mut x: Vec<f64> = p.variables.iter().map(|v| v.lower).collect();
    let mut best: Option<f64> = None;
    loop {
        if p.check_feasible(&x, Tolerances::default()).is_feasible() {
            let v = p.objective_value(&x);
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            x[k] += 1.0;
            if x[k] <= p.variables[k].upper {
                break;
            }
            x[k] = p.variables[k].lower;
            k += 1;
        }
    }
}

fn criterion_8() -> Verdict {
    let mut f = Vec::new();
    let lot = parse_native(&read("lot.json")).unwrap();
    if parse_native(&write_native(&lot)).as_ref() != Ok(&lot) {
        f.push("lot.json round trip".into());
    }
    for seed in 0..50 {
        let params = GenParams {
            seed,
            unbounded_lots: seed % 2 == 0,
            ..Default::default()
        };
        let p = generate(&params).unwrap();
        if parse_native(&write_native(&p)).as_ref() != Ok(&p) {
            f.push(format!("generated seed {seed} round trip"));
        }
    }
    for name in ["twolots", "knapsack", "generic"] {
        match parse_mps(&read(&format!("{name}.mps"))) {
            Ok(p) if canonical_dump(&p) == read(&format!("{name}.dump")) => {}
            Ok(_) => f.push(format!("{name}.mps differs from its golden dump")),
            Err(e) => f.push(format!("{name}.mps: {e}")),
        }
    }
    let generic = parse_mps(&read("generic.mps")).unwrap();
    let mut lp = LpState::relax(&generic);
    lp.solve();
    let cands = collect_candidates(&generic, &Domains::of(&generic), &lp.point(), Tolerances::default(), 0);
    if cands.iter().any(|c| c.kind == CandidateKind::Indicator) {
        f.push("generic indicators scored as semi-continuous".into());
    }
    let r = solve(&generic, &SolverConfig::default(), &FrozenClock);
    let want = brute_force_integral(&generic);
    if r.status != SolveStatus::Optimal || r.objective().zip(want).is_none_or(|(a, b)| !close(a, b, 1e-6)) {
        f.push(format!("generic.mps solved to {:?}, enumeration {want:?}", r.objective()));
    }
    verdict(f, "native round trips, 3 MPS goldens, generic indicators".into())
}

fn criterion_9(first: &Option<String>) -> Verdict {
    let out = run_experiment(&root_config()).unwrap();
    let second = records_csv(&out).unwrap();
    let same = first.as_deref() == Some(second.as_str());
    let f = if same { vec![] } else { vec!["records.csv differs between runs".to_string()] };
    verdict(f, format!("records.csv of two root-only runs, {} bytes", second.len()))
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let full = args.iter().any(|a| a == "--full");
    let mut records = None;
    let mut failed = 0;
    for id in 1..=9 {
        let start = Instant::now();
        let v = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&mut records),
            7 => criterion_7(full),
            8 => criterion_8(),
            _ => criterion_9(&records),
        };
        failed += usize::from(!v.pass);
        println!(
            "criterion {id}: {} [{:.1} s] {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
