//! Experiment harness: run heuristics over instances and budgets, keep the
//! best-known store current, and summarize the results.

mod report;
mod store;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::instances::generate;
use crate::localsearch::{greedy_construct, local_search, LocalSearchKind};
use crate::memetic::{run_memetic, MemeticParams, RunStats, VirtualClock, WallClock};
use crate::model::{relative_error, Assignment, Instance, InstanceId};
use crate::rng::SubtractiveRng;
use crate::tuning::default_local_search;

pub use report::{aggregate, render_text, write_table_csv, Table, TableRow};
pub use store::{update_best_known, BestKnown, BestKnownStore};

/// One line of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub heuristic: String,
    pub tau_s: f64,
    pub weight: f64,
    pub best_known: f64,
    pub rel_err_pct: f64,
    pub generations: usize,
    pub pop_size: usize,
    pub ls_time_s: f64,
    pub elapsed_s: f64,
}

impl RunRecord {
    /// Relative error from the two stored weights, ignoring `rel_err_pct`.
    pub fn relative_error(&self) -> Result<f64> {
        relative_error(self.weight, self.best_known)
    }

    pub fn id(&self) -> Result<InstanceId> {
        InstanceId::parse(&self.instance_id)
    }
}

/// Writes records as CSV with a header row.
pub fn write_records<W: std::io::Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| MapError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| MapError::Io(e.to_string()))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| MapError::Config(format!("{}: {e}", path.display()))))
        .collect()
}

/// A heuristic to benchmark: the memetic algorithm (`gk`, optionally
/// `gk:<ls>` to override its local search) or a standalone local search
/// applied to the greedy solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Heuristic {
    Memetic(Option<LocalSearchKind>),
    Standalone(LocalSearchKind),
}

impl FromStr for Heuristic {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "gk" => Ok(Heuristic::Memetic(None)),
            Some(("gk", ls)) => Ok(Heuristic::Memetic(Some(ls.parse()?))),
            None => Ok(Heuristic::Standalone(s.parse()?)),
            Some(_) => Err(MapError::Config(format!("unknown heuristic `{s}`"))),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Heuristic::Memetic(None) => write!(f, "gk"),
            Heuristic::Memetic(Some(ls)) => write!(f, "gk:{ls}"),
            Heuristic::Standalone(ls) => write!(f, "{ls}"),
        }
    }
}

/// How a run measures time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClockMode {
    Wall,
    /// Every local search costs `tick` seconds.
    Virtual(f64),
}

/// Outcome of a single run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Assignment,
    pub weight: f64,
    pub generations: usize,
    pub pop_size: usize,
    pub ls_time: f64,
    pub elapsed: f64,
    pub trajectory: Vec<f64>,
}

fn from_stats(inst: &Instance, best: Assignment, stats: RunStats) -> RunOutcome {
    RunOutcome {
        weight: best.weight(inst),
        best,
        generations: stats.generations,
        pop_size: stats.population_size,
        ls_time: stats.mean_ls_time,
        elapsed: stats.elapsed,
        trajectory: stats.trajectory,
    }
}

/// Runs one heuristic on one instance.
pub fn run_single(inst: &Instance, heuristic: &Heuristic, tau: f64, seed: i32, clock: ClockMode) -> Result<RunOutcome> {
    match heuristic {
        Heuristic::Memetic(ls) => {
            let ls = ls.clone().unwrap_or_else(|| default_local_search(inst.family()));
            let params = MemeticParams::with_tau(tau);
            let rng = SubtractiveRng::new(seed);
            let (best, stats) = match clock {
                ClockMode::Wall => run_memetic(inst, &params, &ls, rng, WallClock::start())?,
                ClockMode::Virtual(tick) => run_memetic(inst, &params, &ls, rng, VirtualClock::new(tick))?,
            };
            let outcome = from_stats(inst, best, stats);
            if outcome.trajectory.windows(2).any(|w| w[1] > w[0]) {
                return Err(MapError::Integrity(format!("best weight increased during a run on {}", inst.family())));
            }
            Ok(outcome)
        }
        Heuristic::Standalone(ls) => {
            let start = Instant::now();
            let greedy = greedy_construct(inst);
            let t0 = Instant::now();
            let best = local_search(inst, &greedy, ls)?;
            let (ls_time, elapsed) = match clock {
                ClockMode::Wall => (t0.elapsed().as_secs_f64(), start.elapsed().as_secs_f64()),
                ClockMode::Virtual(tick) => (tick, tick),
            };
            let weight = best.weight(inst);
            Ok(RunOutcome { best, weight, generations: 0, pop_size: 1, ls_time, elapsed, trajectory: vec![weight] })
        }
    }
}

/// A full grid of runs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceId>,
    pub budgets: Vec<f64>,
    pub heuristics: Vec<String>,
    pub reps: usize,
    pub workers: usize,
    pub clock: ClockMode,
}

/// Seed of one benchmark run.
pub fn run_seed(id: InstanceId, rep: usize) -> i32 {
    id.seed().wrapping_add((rep as i32).wrapping_mul(100_003))
}

/// Runs every (instance, budget, heuristic, repetition) and returns one
/// record per run. The store is updated with every improving run; record
/// errors are taken against the store's final state.
pub fn run_experiment(config: &ExperimentConfig, store: &mut BestKnownStore) -> Result<Vec<RunRecord>> {
    let heuristics = config
        .heuristics
        .iter()
        .map(|h| h.parse::<Heuristic>())
        .collect::<Result<Vec<_>>>()?;
    if let Some(tau) = config.budgets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(MapError::Config(format!("budget must be positive, got {tau}")));
    }
    if config.reps == 0 {
        return Err(MapError::Config("reps must be at least 1".into()));
    }
    for &id in &config.instances {
        store.seed_random(id);
    }

    let mut jobs = Vec::new();
    for &id in &config.instances {
        for &tau in &config.budgets {
            for (h, code) in heuristics.iter().zip(&config.heuristics) {
                for rep in 0..config.reps {
                    jobs.push((id, tau, h, code, rep));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| MapError::Config(e.to_string()))?;
    let shared = Mutex::new(std::mem::take(store));
    let results: Result<Vec<RunRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(id, tau, h, code, rep)| {
                let inst = generate(id)?;
                let out = run_single(&inst, h, tau, run_seed(id, rep), config.clock)?;
                log::info!("{id} {code} tau={tau} rep={rep}: {}", out.weight);
                shared
                    .lock()
                    .expect("store lock")
                    .update(id, out.weight, Some((&inst, &out.best)))?;
                Ok(RunRecord {
                    instance_id: id.to_string(),
                    heuristic: code.clone(),
                    tau_s: tau,
                    weight: out.weight,
                    best_known: f64::NAN,
                    rel_err_pct: f64::NAN,
                    generations: out.generations,
                    pop_size: out.pop_size,
                    ls_time_s: out.ls_time,
                    elapsed_s: out.elapsed,
                })
            })
            .collect()
    });
    *store = shared.into_inner().expect("store lock");
    let mut records = results?;
    refresh_errors(&mut records, store)?;
    Ok(records)
}

/// Sets `best_known` from the store (or the smallest recorded weight of the
/// instance when the store has none) and recomputes relative errors.
pub fn refresh_errors(records: &mut [RunRecord], store: &BestKnownStore) -> Result<()> {
    let mut floor = std::collections::HashMap::new();
    for r in records.iter() {
        let e = floor.entry(r.instance_id.clone()).or_insert(f64::INFINITY);
        *e = f64::min(*e, r.weight);
    }
    for r in records.iter_mut() {
        let id = r.id()?;
        let best = store.get(id).map_or(floor[&r.instance_id], |b| b.min(floor[&r.instance_id]));
        r.best_known = best;
        r.rel_err_pct = r.relative_error()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Family;

    #[test]
    fn heuristic_codes() {
        assert_eq!("gk".parse::<Heuristic>().unwrap(), Heuristic::Memetic(None));
        assert_eq!("gk:2opt".parse::<Heuristic>().unwrap().to_string(), "gk:2opt");
        assert_eq!("sDV".parse::<Heuristic>().unwrap().to_string(), "sDV");
        assert!(matches!("hl".parse::<Heuristic>(), Err(MapError::Config(_))));
        assert!(matches!("sa:2opt".parse::<Heuristic>(), Err(MapError::Config(_))));
    }

    fn config(heuristics: &[&str], budgets: &[f64]) -> ExperimentConfig {
        ExperimentConfig {
            instances: vec![InstanceId::new(Family::Random, 3, 8, 1)],
            budgets: budgets.to_vec(),
            heuristics: heuristics.iter().map(|h| h.to_string()).collect(),
            reps: 1,
            workers: 1,
            clock: ClockMode::Virtual(0.01),
        }
    }

    #[test]
    fn one_record_per_budget() {
        let mut store = BestKnownStore::new();
        let records = run_experiment(&config(&["gk"], &[0.2, 0.5]), &mut store).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.best_known >= 8.0);
            assert_eq!(r.rel_err_pct, relative_error(r.weight, r.best_known).unwrap());
        }
        assert_eq!(store.get(InstanceId::new(Family::Random, 3, 8, 1)), Some(8.0));
    }

    #[test]
    fn unknown_heuristic_fails_before_running() {
        let mut store = BestKnownStore::new();
        let err = run_experiment(&config(&["gk", "nope"], &[1.0]), &mut store).unwrap_err();
        assert!(matches!(err, MapError::Config(_)));
        assert!(store.is_empty());
    }

    #[test]
    fn records_round_trip_with_exact_header() {
        let mut store = BestKnownStore::new();
        let records = run_experiment(&config(&["2opt"], &[1.0]), &mut store).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "instance_id,heuristic,tau_s,weight,best_known,rel_err_pct,generations,pop_size,ls_time_s,elapsed_s\n"
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, text).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }
}
