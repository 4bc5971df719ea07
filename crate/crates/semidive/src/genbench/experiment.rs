//! Runs every instance-seed observation once per arm and collects records.
//!
//! The seed of an observation permutes the column and row order of the
//! instance (seed 0 keeps the original order) and seeds the tie-breaking of
//! the diving heuristic, so the observations of one instance differ the way
//! solver runs with different random seeds do.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use semidive_core::bnb::{solve, SolveStatus, SolverConfig};
use semidive_core::clock::FrozenClock;
use semidive_core::diving::FoundBy;
use semidive_core::model::{Implication, Problem};
use semidive_core::rng::{mix, SplitMix64};

use super::generate::{generate, GenError, GenParams};
use crate::io::load_problem;
use crate::WallClock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RootOnly,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    WithId,
    WithoutId,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::WithId => "with_id",
            Arm::WithoutId => "without_id",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSet {
    /// `count` generated instances. Instance `k` draws its period and
    /// product counts uniformly from the inclusive ranges and uses generator
    /// seed `mix(base_seed + k)`; the other parameters come from `template`.
    Generated {
        count: usize,
        #[serde(default)]
        base_seed: u64,
        #[serde(default = "default_periods")]
        periods: (usize, usize),
        #[serde(default = "default_products")]
        products: (usize, usize),
        #[serde(default)]
        template: GenParams,
    },
    /// Instance files, MPS or native JSON by extension.
    Files { paths: Vec<PathBuf> },
}

fn default_periods() -> (usize, usize) {
    (4, 12)
}

fn default_products() -> (usize, usize) {
    (2, 6)
}

fn default_seeds() -> usize {
    3
}

fn default_time_limit() -> f64 {
    60.0
}

fn default_arms() -> Vec<Arm> {
    vec![Arm::WithId, Arm::WithoutId]
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: InstanceSet,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    pub mode: Mode,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_arms")]
    pub arms: Vec<Arm>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// JSON object mapping instance names to best-known objectives.
    #[serde(default)]
    pub reference: Option<PathBuf>,
    /// Node limit of an extra with-diving solve per instance whose result
    /// joins the best-known objective. Runs on a frozen clock, so it is
    /// deterministic.
    #[serde(default)]
    pub reference_node_limit: Option<u64>,
}

impl ExperimentConfig {
    /// 50 generated instances, 3 seeds, both arms.
    pub fn desk(mode: Mode) -> Self {
        Self {
            instances: InstanceSet::Generated {
                count: 50,
                base_seed: 0,
                periods: default_periods(),
                products: default_products(),
                template: GenParams::default(),
            },
            seeds: default_seeds(),
            mode,
            time_limit: default_time_limit(),
            arms: default_arms(),
            workers: default_workers(),
            reference: None,
            reference_node_limit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("seeds must be at least 1")]
    NoSeeds,
    #[error("no arms to run")]
    NoArms,
    #[error("instance {index}: {source}")]
    Generate { index: usize, source: GenError },
    #[error("reference file {path}: {msg}")]
    Reference { path: String, msg: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One instance of the set, in indicator form.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    /// Form as supplied, for dimension statistics.
    pub original: Result<Problem, String>,
    pub problem: Result<Problem, String>,
}

pub fn load_instances(set: &InstanceSet) -> Result<Vec<Instance>, ExperimentError> {
    match set {
        InstanceSet::Generated {
            count,
            base_seed,
            periods,
            products,
            template,
        } => {
            let mut out = Vec::with_capacity(*count);
            for k in 0..*count {
                let mut rng = SplitMix64::new(base_seed.wrapping_add(k as u64));
                let params = GenParams {
                    periods: rng.range_inclusive(periods.0 as u64, periods.1 as u64) as usize,
                    products: rng.range_inclusive(products.0 as u64, products.1 as u64) as usize,
                    seed: mix(base_seed.wrapping_add(k as u64)),
                    ..template.clone()
                };
                let sc = generate(&params).map_err(|source| ExperimentError::Generate { index: k, source })?;
                let problem = sc.reformulate_indicator().map_err(|e| e.to_string());
                out.push(Instance {
                    name: format!("gen{k:03}_p{}_t{}", params.products, params.periods),
                    original: Ok(sc),
                    problem,
                });
            }
            Ok(out)
        }
        InstanceSet::Files { paths } => Ok(paths
            .iter()
            .map(|path| {
                let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                let problem = load_problem(path, None).map_err(|e| e.to_string());
                Instance {
                    name,
                    original: problem.clone(),
                    problem,
                }
            })
            .collect()),
    }
}

fn shuffle(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.range_inclusive(0, i as u64) as usize;
        order.swap(i, j);
    }
    order
}

/// Reorders columns and rows; seed 0 is the identity.
pub fn permute(p: &Problem, seed: u64) -> Problem {
    if seed == 0 {
        return p.clone();
    }
    let mut rng = SplitMix64::new(mix(seed));
    let col_order = shuffle(p.num_vars(), &mut rng);
    let row_order = shuffle(p.rows.len(), &mut rng);
    let mut new_index = vec![0; p.num_vars()];
    for (new, &old) in col_order.iter().enumerate() {
        new_index[old] = new;
    }
    let remap_row = |row: &semidive_core::model::LinearRow| {
        let mut r = row.clone();
        for c in &mut r.coeffs {
            c.0 = new_index[c.0];
        }
        r
    };
    let mut out = Problem::new(p.stage);
    out.name = p.name.clone();
    for &old in &col_order {
        out.add_var(p.variables[old].clone());
    }
    for &old in &row_order {
        out.add_row(remap_row(&p.rows[old]));
    }
    for link in &p.links {
        let mut l = link.clone();
        l.binary = new_index[l.binary];
        l.implication = match &link.implication {
            Implication::SemiContinuous { var, min_lot } => Implication::SemiContinuous {
                var: new_index[*var],
                min_lot: *min_lot,
            },
            Implication::Generic { active, row } => Implication::Generic {
                active: *active,
                row: remap_row(row),
            },
        };
        out.links.push(l);
    }
    for spec in &p.sc_specs {
        let mut s = spec.clone();
        s.var = new_index[s.var];
        out.sc_specs.push(s);
    }
    out
}

/// Outcome of one arm on one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub arm: Arm,
    /// Set when the run could not be carried out.
    pub error: Option<String>,
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    pub bound: f64,
    pub nodes: u64,
    pub root_lp: Option<f64>,
    pub root_incumbent: Option<f64>,
    pub heur_calls: u64,
    pub heur_found: u64,
    pub heur_root_called: bool,
    /// Objective of the first solution the diving heuristic committed.
    pub heur_objective: Option<f64>,
    pub final_found_by: Option<FoundBy>,
    /// `(time, objective)` of each incumbent improvement.
    pub timeline: Vec<(f64, f64)>,
    pub walltime: f64,
    pub root_time: f64,
    pub heur_time: f64,
}

impl RunRecord {
    fn failed(instance: &str, seed: u64, arm: Arm, error: String) -> Self {
        Self {
            instance: instance.to_string(),
            seed,
            arm,
            error: Some(error),
            status: None,
            objective: None,
            bound: f64::NEG_INFINITY,
            nodes: 0,
            root_lp: None,
            root_incumbent: None,
            heur_calls: 0,
            heur_found: 0,
            heur_root_called: false,
            heur_objective: None,
            final_found_by: None,
            timeline: Vec::new(),
            walltime: 0.0,
            root_time: 0.0,
            heur_time: 0.0,
        }
    }
}

pub fn solver_config(config: &ExperimentConfig, arm: Arm, seed: u64) -> SolverConfig {
    let mut cfg = SolverConfig::default().with_seed(seed);
    cfg.time_limit = config.time_limit;
    cfg.root_only = config.mode == Mode::RootOnly;
    cfg.heuristics.diving = arm == Arm::WithId;
    cfg
}

fn run_one(config: &ExperimentConfig, inst: &Instance, seed: u64, arm: Arm) -> RunRecord {
    let problem = match &inst.problem {
        Ok(p) => permute(p, seed),
        Err(e) => return RunRecord::failed(&inst.name, seed, arm, e.clone()),
    };
    let cfg = solver_config(config, arm, seed);
    let outcome = std::panic::catch_unwind(|| {
        let clock = WallClock::new();
        solve(&problem, &cfg, &clock)
    });
    let r = match outcome {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "solver panicked".into());
            return RunRecord::failed(&inst.name, seed, arm, msg);
        }
    };
    let h = &r.stats.diving;
    RunRecord {
        instance: inst.name.clone(),
        seed,
        arm,
        error: None,
        status: Some(r.status),
        objective: r.objective(),
        bound: r.bound,
        nodes: r.stats.nodes,
        root_lp: r.stats.root_lp_objective,
        root_incumbent: r.stats.root_incumbent,
        heur_calls: h.calls,
        heur_found: h.found,
        heur_root_called: h.root_called,
        heur_objective: h.first_objective,
        final_found_by: r.incumbent.as_ref().map(|i| i.found_by),
        timeline: r.timeline.iter().map(|e| (e.time, e.objective)).collect(),
        walltime: r.stats.time,
        root_time: r.stats.root_time,
        heur_time: h.time,
    }
}

/// Records and best-known objectives of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub instances: Vec<Instance>,
    /// Sorted by instance, seed, arm.
    pub records: Vec<RunRecord>,
    pub references: BTreeMap<String, Option<f64>>,
}

fn read_references(path: &PathBuf) -> Result<BTreeMap<String, f64>, ExperimentError> {
    let err = |msg: String| ExperimentError::Reference {
        path: path.display().to_string(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| err(e.to_string()))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    if config.seeds == 0 {
        return Err(ExperimentError::NoSeeds);
    }
    if config.arms.is_empty() {
        return Err(ExperimentError::NoArms);
    }
    let supplied = match &config.reference {
        Some(path) => read_references(path)?,
        None => BTreeMap::new(),
    };
    let instances = load_instances(&config.instances)?;
    let mut arms = config.arms.clone();
    arms.sort();
    arms.dedup();

    let jobs: Vec<(usize, u64, Arm)> = (0..instances.len())
        .flat_map(|i| (0..config.seeds as u64).map(move |s| (i, s)))
        .flat_map(|(i, s)| arms.iter().map(move |&a| (i, s, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let (mut records, extra): (Vec<RunRecord>, Vec<Option<f64>>) = pool.install(|| {
        use rayon::prelude::*;
        let records = jobs
            .par_iter()
            .map(|&(i, s, a)| run_one(config, &instances[i], s, a))
            .collect();
        let extra = instances
            .par_iter()
            .map(|inst| reference_solve(config, inst))
            .collect();
        (records, extra)
    });
    records.sort_by(|a, b| (&a.instance, a.seed, a.arm).cmp(&(&b.instance, b.seed, b.arm)));

    let mut references = BTreeMap::new();
    for (inst, extra) in instances.iter().zip(extra) {
        let reference = match supplied.get(&inst.name) {
            Some(&v) => Some(v),
            None => records
                .iter()
                .filter(|r| r.instance == inst.name)
                .filter_map(|r| r.objective)
                .chain(extra)
                .reduce(f64::min),
        };
        references.insert(inst.name.clone(), reference);
    }
    Ok(ExperimentOutput {
        config: config.clone(),
        instances,
        records,
        references,
    })
}

fn reference_solve(config: &ExperimentConfig, inst: &Instance) -> Option<f64> {
    let limit = config.reference_node_limit?;
    let p = inst.problem.as_ref().ok()?;
    let mut cfg = SolverConfig::default();
    cfg.node_limit = Some(limit);
    std::panic::catch_unwind(|| solve(p, &cfg, &FrozenClock)).ok()?.objective()
}

#[cfg(test)]
mod tests {
    use super::*;
    use semidive_core::model::Tolerances;

    fn small() -> Problem {
        let params = GenParams {
            periods: 3,
            products: 2,
            seed: 5,
            ..Default::default()
        };
        generate(&params).unwrap().reformulate_indicator().unwrap()
    }

    #[test]
    fn permutation_keeps_the_optimum() {
        let p = small();
        let base = solve(&p, &SolverConfig::default(), &FrozenClock).objective().unwrap();
        for seed in 1..4 {
            let q = permute(&p, seed);
            assert!(q.validate().is_valid());
            assert_ne!(q.variables, p.variables);
            let r = solve(&q, &SolverConfig::default(), &FrozenClock);
            assert!((r.objective().unwrap() - base).abs() <= 1e-6 * base.abs());
            let x = &r.incumbent.unwrap().point;
            assert!(q.check_feasible(x, Tolerances::default()).is_feasible());
        }
    }

    #[test]
    fn seed_zero_is_identity() {
        let p = small();
        assert_eq!(permute(&p, 0), p);
    }

    #[test]
    fn config_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"instances": {"kind": "generated", "count": 2}, "mode": "root_only"}"#).unwrap();
        assert_eq!(c.seeds, 3);
        assert_eq!(c.time_limit, 60.0);
        assert_eq!(c.arms, vec![Arm::WithId, Arm::WithoutId]);
    }
}
