//! Aggregates and report files of an experiment.
//!
//! `records.csv` holds only fields that do not depend on wall-clock time in a
//! root-only experiment, so repeated runs reproduce it byte for byte. Times
//! go to `timings.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use semidive_core::diving::FoundBy;
use semidive_core::metrics::{primal_gap, primal_integral, sgm1, Timeline};

use super::experiment::{Arm, ExperimentOutput, Mode, RunRecord};
use super::stats::{dimension_stats, DimStage, StatsTable};
use crate::io::{digits17, result::found_by_str};

/// Absolute difference from which a comparison counts as a win or a loss.
pub const WIN_THRESHOLD: f64 = 1e-4;

/// Derived per-record measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub reference: Option<f64>,
    /// Gap of the incumbent at the end of the root node.
    pub root_pg: f64,
    /// Gap of the first diving solution, if there was one.
    pub pg_heur: Option<f64>,
    pub primal_integral: f64,
}

pub fn measures(out: &ExperimentOutput, r: &RunRecord) -> Measures {
    let reference = out.references.get(&r.instance).copied().flatten();
    let r_max = if out.config.time_limit.is_finite() {
        out.config.time_limit
    } else {
        r.walltime
    };
    let timeline = Timeline {
        r_max,
        events: r.timeline.clone(),
        reference,
    };
    Measures {
        reference,
        root_pg: primal_gap(reference, r.root_incumbent),
        pg_heur: r.heur_objective.map(|o| primal_gap(reference, Some(o))),
        primal_integral: primal_integral(&timeline),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: Arm,
    pub observations: usize,
    pub failures: usize,
    /// Observations on which the diving heuristic ran.
    pub called: usize,
    pub found: usize,
    /// Observations whose final incumbent came from the diving heuristic.
    pub best_found: usize,
    /// Over all successful observations.
    pub sgm_root_pg: Option<f64>,
    /// Over observations where the heuristic found a solution.
    pub sgm_pg_heur: Option<f64>,
    pub sgm_pi: Option<f64>,
    pub heur_time: f64,
    pub solve_time: f64,
}

/// With-diving arm against the arm without it.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub observations: usize,
    /// Observations where the with-diving arm called the heuristic.
    pub called: usize,
    /// SGM root gap with / without, over the called observations.
    pub root_pg_ratio: Option<f64>,
    pub sgm_root_pg_with: Option<f64>,
    pub sgm_root_pg_without: Option<f64>,
    /// SGM primal integral with / without, over all observations.
    pub pi_ratio: Option<f64>,
    /// Compared on the root gap (root-only) or the primal integral (full).
    pub wins: usize,
    pub losses: usize,
    /// Share of the with-diving arm's solve time spent diving.
    pub heur_time_share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub arms: Vec<ArmSummary>,
    pub comparison: Option<Comparison>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

pub fn summarize(out: &ExperimentOutput) -> Summary {
    let mut arms = Vec::new();
    let mut by_key: BTreeMap<(&str, u64), BTreeMap<Arm, (&RunRecord, Measures)>> = BTreeMap::new();
    for r in &out.records {
        by_key
            .entry((r.instance.as_str(), r.seed))
            .or_default()
            .insert(r.arm, (r, measures(out, r)));
    }
    let mut arm_list: Vec<Arm> = out.records.iter().map(|r| r.arm).collect();
    arm_list.sort();
    arm_list.dedup();
    for arm in arm_list {
        let rows: Vec<(&RunRecord, Measures)> = by_key.values().filter_map(|m| m.get(&arm).copied()).collect();
        let ok: Vec<&(&RunRecord, Measures)> = rows.iter().filter(|(r, _)| r.error.is_none()).collect();
        let root: Vec<f64> = ok.iter().map(|(_, m)| m.root_pg).collect();
        let heur: Vec<f64> = ok.iter().filter_map(|(_, m)| m.pg_heur).collect();
        let pi: Vec<f64> = ok.iter().map(|(_, m)| m.primal_integral).collect();
        arms.push(ArmSummary {
            arm,
            observations: rows.len(),
            failures: rows.len() - ok.len(),
            called: ok.iter().filter(|(r, _)| r.heur_calls > 0).count(),
            found: ok.iter().filter(|(r, _)| r.heur_found > 0).count(),
            best_found: ok.iter().filter(|(r, _)| r.final_found_by == Some(FoundBy::Diving)).count(),
            sgm_root_pg: sgm1(&root).ok(),
            sgm_pg_heur: sgm1(&heur).ok(),
            sgm_pi: (out.config.mode == Mode::Full).then(|| sgm1(&pi).ok()).flatten(),
            heur_time: ok.iter().map(|(r, _)| r.heur_time).sum(),
            solve_time: ok.iter().map(|(r, _)| r.walltime).sum(),
        });
    }

    let pairs: Vec<((&RunRecord, Measures), (&RunRecord, Measures))> = by_key
        .values()
        .filter_map(|m| Some((*m.get(&Arm::WithId)?, *m.get(&Arm::WithoutId)?)))
        .filter(|((a, _), (b, _))| a.error.is_none() && b.error.is_none())
        .collect();
    let both = [Arm::WithId, Arm::WithoutId].iter().all(|a| out.records.iter().any(|r| r.arm == *a));
    let comparison = both.then(|| {
        let called: Vec<_> = pairs.iter().filter(|((w, _), _)| w.heur_calls > 0).collect();
        let with_root: Vec<f64> = called.iter().map(|((_, m), _)| m.root_pg).collect();
        let without_root: Vec<f64> = called.iter().map(|(_, (_, m))| m.root_pg).collect();
        let sgm_root_pg_with = sgm1(&with_root).ok();
        let sgm_root_pg_without = sgm1(&without_root).ok();
        let with_pi: Vec<f64> = pairs.iter().map(|((_, m), _)| m.primal_integral).collect();
        let without_pi: Vec<f64> = pairs.iter().map(|(_, (_, m))| m.primal_integral).collect();
        let key = |m: &Measures| match out.config.mode {
            Mode::RootOnly => m.root_pg,
            Mode::Full => m.primal_integral,
        };
        let diff = |((_, a), (_, b)): &((&RunRecord, Measures), (&RunRecord, Measures))| key(b) - key(a);
        let with_time: f64 = pairs.iter().map(|((r, _), _)| r.walltime).sum();
        let with_heur: f64 = pairs.iter().map(|((r, _), _)| r.heur_time).sum();
        Comparison {
            observations: pairs.len(),
            called: called.len(),
            root_pg_ratio: sgm_root_pg_with.zip(sgm_root_pg_without).map(|(a, b)| ratio(a, b)),
            sgm_root_pg_with,
            sgm_root_pg_without,
            pi_ratio: (out.config.mode == Mode::Full)
                .then(|| sgm1(&with_pi).ok().zip(sgm1(&without_pi).ok()).map(|(a, b)| ratio(a, b)))
                .flatten(),
            wins: pairs.iter().filter(|p| diff(p) >= WIN_THRESHOLD).count(),
            losses: pairs.iter().filter(|p| -diff(p) >= WIN_THRESHOLD).count(),
            heur_time_share: if with_time > 0.0 { with_heur / with_time } else { 0.0 },
        }
    });
    Summary { arms, comparison }
}

fn opt(x: Option<f64>) -> String {
    x.map(digits17).unwrap_or_default()
}

fn fixed(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn records_csv(out: &ExperimentOutput) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "seed",
        "arm",
        "error",
        "status",
        "objective",
        "bound",
        "nodes",
        "root_lp",
        "root_incumbent",
        "heur_calls",
        "heur_found",
        "heur_objective",
        "found_by",
        "reference",
        "root_pg",
        "pg_heur",
    ])
    .map_err(csv_error)?;
    for r in &out.records {
        let m = measures(out, r);
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.arm.as_str().to_string(),
            r.error.clone().unwrap_or_default(),
            r.status.map(|s| s.as_str().to_string()).unwrap_or_default(),
            opt(r.objective),
            digits17(r.bound),
            r.nodes.to_string(),
            opt(r.root_lp),
            opt(r.root_incumbent),
            r.heur_calls.to_string(),
            r.heur_found.to_string(),
            opt(r.heur_objective),
            r.final_found_by.map(found_by_str).unwrap_or_default().to_string(),
            opt(m.reference),
            digits17(m.root_pg),
            opt(m.pg_heur),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> std::io::Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(std::io::Error::other)
}

pub fn timings_csv(out: &ExperimentOutput) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "seed",
        "arm",
        "walltime_s",
        "root_time_s",
        "heur_time_s",
        "primal_integral",
        "incumbents",
    ])
    .map_err(csv_error)?;
    for r in &out.records {
        let m = measures(out, r);
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.arm.as_str().to_string(),
            digits17(r.walltime),
            digits17(r.root_time),
            digits17(r.heur_time),
            digits17(m.primal_integral),
            r.timeline.len().to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

/// Root gap with diving against without, one line per observation.
pub fn scatter_csv(out: &ExperimentOutput) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "seed", "pg_with_id", "pg_without_id"]).map_err(csv_error)?;
    let mut pairs: BTreeMap<(&str, u64), [Option<f64>; 2]> = BTreeMap::new();
    for r in out.records.iter().filter(|r| r.error.is_none()) {
        let slot = match r.arm {
            Arm::WithId => 0,
            Arm::WithoutId => 1,
        };
        pairs.entry((&r.instance, r.seed)).or_default()[slot] = Some(measures(out, r).root_pg);
    }
    for ((inst, seed), [a, b]) in pairs {
        if let (Some(a), Some(b)) = (a, b) {
            w.write_record([inst.to_string(), seed.to_string(), digits17(a), digits17(b)])
                .map_err(csv_error)?;
        }
    }
    finish_csv(w)
}

pub const SCATTER_SCRIPT: &str = "\
set datafile separator ','
set terminal pngcairo size 640,640
set output 'scatter.png'
set xlabel 'root primal gap without diving'
set ylabel 'root primal gap with diving'
set xrange [0:1]
set yrange [0:1]
set key off
plot 'scatter.csv' every ::1 using 4:3 with points pt 7 ps 0.6, x with lines dt 2
";

fn stats_table(o: &mut String, title: &str, t: &StatsTable) {
    let _ = writeln!(o, "### {title} ({} instances)\n", t.instances);
    o.push_str("| | total | min | max | sgm |\n|---|---:|---:|---:|---:|\n");
    for (name, c) in &t.columns {
        let _ = writeln!(o, "| {name} | {} | {} | {} | {:.1} |", c.total, c.min, c.max, c.sgm);
    }
    o.push('\n');
}

pub fn tables_md(out: &ExperimentOutput, summary: &Summary) -> String {
    let mut o = String::new();
    let mode = match out.config.mode {
        Mode::RootOnly => "root only",
        Mode::Full => "full tree",
    };
    let _ = writeln!(o, "# Experiment report\n");
    let _ = writeln!(
        o,
        "{} instances, {} seeds, {mode}, time limit {} s.\n",
        out.instances.len(),
        out.config.seeds,
        out.config.time_limit
    );

    o.push_str("## Arms\n\n");
    o.push_str("| arm | obs | failed | called | found | best found | SGM root PG | SGM PG heur | SGM PI | heur time s | solve time s |\n");
    o.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for a in &summary.arms {
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.3} | {:.3} |",
            a.arm.as_str(),
            a.observations,
            a.failures,
            a.called,
            a.found,
            a.best_found,
            fixed(a.sgm_root_pg, 4),
            fixed(a.sgm_pg_heur, 4),
            fixed(a.sgm_pi, 4),
            a.heur_time,
            a.solve_time
        );
    }
    o.push('\n');

    if let Some(c) = &summary.comparison {
        o.push_str("## With against without diving\n\n");
        o.push_str("| obs | called | SGM root PG with | without | ratio | SGM PI ratio | wins | losses | diving time share |\n");
        o.push_str("|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {:.4} |",
            c.observations,
            c.called,
            fixed(c.sgm_root_pg_with, 4),
            fixed(c.sgm_root_pg_without, 4),
            fixed(c.root_pg_ratio, 2),
            fixed(c.pi_ratio, 2),
            c.wins,
            c.losses,
            c.heur_time_share
        );
        let basis = match out.config.mode {
            Mode::RootOnly => "root primal gap",
            Mode::Full => "primal integral",
        };
        let _ = writeln!(
            o,
            "\nWins and losses compare the {basis}; differences below {WIN_THRESHOLD:e} count as ties.\n"
        );
    }

    o.push_str("## Dimensions\n\n");
    let originals: Vec<_> = out.instances.iter().filter_map(|i| i.original.as_ref().ok()).collect();
    stats_table(&mut o, "original", &dimension_stats(&originals, DimStage::Original));
    stats_table(&mut o, "received", &dimension_stats(&originals, DimStage::Received));
    o
}

/// Writes records.csv, timings.csv, scatter.csv, scatter.gp and tables.md.
pub fn write_report(dir: &Path, out: &ExperimentOutput) -> std::io::Result<Summary> {
    std::fs::create_dir_all(dir)?;
    let summary = summarize(out);
    std::fs::write(dir.join("records.csv"), records_csv(out)?)?;
    std::fs::write(dir.join("timings.csv"), timings_csv(out)?)?;
    std::fs::write(dir.join("scatter.csv"), scatter_csv(out)?)?;
    std::fs::write(dir.join("scatter.gp"), SCATTER_SCRIPT)?;
    std::fs::write(dir.join("tables.md"), tables_md(out, &summary))?;
    Ok(summary)
}
