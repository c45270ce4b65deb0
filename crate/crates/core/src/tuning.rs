//! Grid search for the population-sizing constants.
//!
//! The expensive part is [`collect_errors`]: it runs the memetic algorithm
//! with the population size forced to every candidate `m` and caches the
//! resulting weights. [`gamma`] and [`tune`] then work on the cache alone.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::instances::generate;
use crate::localsearch::{greedy_construct, local_search, LocalSearchKind};
use crate::memetic::{run_memetic, MemeticParams, WallClock};
use crate::model::{scaled_error, Family, InstanceId};
use crate::rng::SubtractiveRng;

/// Local search used for a family unless overridden: sDV_v for Random,
/// sDV for the decomposable families.
pub fn default_local_search(family: Family) -> LocalSearchKind {
    match family {
        Family::Random => LocalSearchKind::sdv_v(),
        _ => LocalSearchKind::Dimensionwise(crate::localsearch::DvDepth::All),
    }
}

/// Weights of forced-size runs plus per-instance local-search times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorCache {
    sizes: Vec<usize>,
    budgets: Vec<f64>,
    /// (instance, budget position, size position) -> weight per repetition.
    weights: BTreeMap<(InstanceId, usize, usize), Vec<f64>>,
    ls_time: BTreeMap<InstanceId, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightRow {
    instance_id: String,
    tau_s: f64,
    m: usize,
    rep: usize,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TimeRow {
    instance_id: String,
    ls_time_s: f64,
}

impl ErrorCache {
    /// Empty cache over the given candidate sets (sorted, deduplicated).
    pub fn new(budgets: &[f64], sizes: &[usize]) -> Result<Self> {
        if budgets.is_empty() || sizes.is_empty() {
            return Err(MapError::domain("budgets and sizes must be non-empty"));
        }
        if let Some(t) = budgets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(MapError::domain(format!("budget must be positive, got {t}")));
        }
        if sizes.contains(&0) {
            return Err(MapError::domain("population sizes must be positive"));
        }
        let mut budgets = budgets.to_vec();
        budgets.sort_by(f64::total_cmp);
        budgets.dedup();
        let sizes: Vec<usize> = sizes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(ErrorCache { sizes, budgets, ..Default::default() })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn instances(&self) -> Vec<InstanceId> {
        self.ls_time.keys().copied().collect()
    }

    pub fn ls_time(&self, id: InstanceId) -> Option<f64> {
        self.ls_time.get(&id).copied()
    }

    pub fn set_ls_time(&mut self, id: InstanceId, t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(MapError::domain(format!("local-search time must be positive, got {t}")));
        }
        self.ls_time.insert(id, t);
        Ok(())
    }

    fn budget_pos(&self, tau: f64) -> Result<usize> {
        self.budgets
            .iter()
            .position(|&b| b == tau)
            .ok_or_else(|| MapError::domain(format!("budget {tau} is not in the cache")))
    }

    fn size_pos(&self, m: usize) -> Result<usize> {
        self.sizes
            .binary_search(&m)
            .map_err(|_| MapError::domain(format!("size {m} is not in the cache")))
    }

    /// Records the weight of one repetition.
    pub fn insert(&mut self, id: InstanceId, tau: f64, m: usize, rep: usize, weight: f64) -> Result<()> {
        let key = (id, self.budget_pos(tau)?, self.size_pos(m)?);
        let reps = self.weights.entry(key).or_default();
        if reps.len() <= rep {
            reps.resize(rep + 1, f64::NAN);
        }
        reps[rep] = weight;
        Ok(())
    }

    /// Mean weight over repetitions, if every recorded repetition is present.
    pub fn mean_weight(&self, id: InstanceId, tau: f64, m: usize) -> Option<f64> {
        let key = (id, self.budget_pos(tau).ok()?, self.size_pos(m).ok()?);
        let reps = self.weights.get(&key)?;
        if reps.is_empty() || reps.iter().any(|w| w.is_nan()) {
            return None;
        }
        Some(reps.iter().sum::<f64>() / reps.len() as f64)
    }

    /// Number of cached weights (over all repetitions).
    pub fn len(&self) -> usize {
        self.weights.values().map(|r| r.iter().filter(|w| !w.is_nan()).count()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean weights per size for one (instance, budget) cell, plus the
    /// cell's minimum and maximum.
    fn cell(&self, id: InstanceId, tau: f64) -> Result<(Vec<f64>, f64, f64)> {
        let means = self
            .sizes
            .iter()
            .map(|&m| {
                self.mean_weight(id, tau, m)
                    .ok_or_else(|| MapError::domain(format!("cache has no weight for {id}, tau {tau}, m {m}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((means, lo, hi))
    }

    /// Applies `f` to every cached weight of one (instance, budget) cell.
    pub fn map_cell(&mut self, id: InstanceId, tau: f64, f: impl Fn(f64) -> f64) -> Result<()> {
        let b = self.budget_pos(tau)?;
        for ((inst, bp, _), reps) in self.weights.iter_mut() {
            if *inst == id && *bp == b {
                reps.iter_mut().for_each(|w| *w = f(*w));
            }
        }
        Ok(())
    }

    /// Writes the weight table and the timing table as CSV.
    pub fn save(&self, weights_path: &Path, times_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(weights_path).map_err(csv_err)?;
        for ((id, b, m), reps) in &self.weights {
            for (rep, &weight) in reps.iter().enumerate() {
                if weight.is_nan() {
                    continue;
                }
                w.serialize(WeightRow { instance_id: id.to_string(), tau_s: self.budgets[*b], m: self.sizes[*m], rep, weight })
                    .map_err(csv_err)?;
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(times_path).map_err(csv_err)?;
        for (id, &t) in &self.ls_time {
            w.serialize(TimeRow { instance_id: id.to_string(), ls_time_s: t }).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache written by [`ErrorCache::save`]. Budgets and sizes are
    /// taken from the rows present.
    pub fn load(weights_path: &Path, times_path: &Path) -> Result<Self> {
        let mut rows = Vec::new();
        for row in csv::Reader::from_path(weights_path).map_err(csv_err)?.deserialize() {
            let row: WeightRow = row.map_err(csv_err)?;
            rows.push((InstanceId::parse(&row.instance_id)?, row));
        }
        let budgets: Vec<f64> = rows.iter().map(|(_, r)| r.tau_s).collect();
        let sizes: Vec<usize> = rows.iter().map(|(_, r)| r.m).collect();
        let mut cache = ErrorCache::new(&budgets, &sizes)?;
        for (id, r) in rows {
            cache.insert(id, r.tau_s, r.m, r.rep, r.weight)?;
        }
        for row in csv::Reader::from_path(times_path).map_err(csv_err)?.deserialize() {
            let row: TimeRow = row.map_err(csv_err)?;
            cache.set_ls_time(InstanceId::parse(&row.instance_id)?, row.ls_time_s)?;
        }
        Ok(cache)
    }
}

fn csv_err(e: csv::Error) -> MapError {
    MapError::Io(e.to_string())
}

/// Mean time of `ls` applied to the greedy solution, repeated until at
/// least `min_total` seconds and `min_runs` runs have been spent.
pub fn measure_ls_time(id: InstanceId, ls: &LocalSearchKind) -> Result<f64> {
    let inst = generate(id)?;
    let greedy = greedy_construct(&inst);
    let (min_runs, min_total) = (3u32, 0.05);
    let start = Instant::now();
    let mut runs = 0u32;
    while runs < min_runs || start.elapsed().as_secs_f64() < min_total {
        std::hint::black_box(local_search(&inst, &greedy, ls)?);
        runs += 1;
    }
    Ok(start.elapsed().as_secs_f64() / runs as f64)
}

/// Seed of one tuning run.
fn run_seed(id: InstanceId, tau_pos: usize, m: usize, rep: usize) -> i32 {
    id.seed()
        .wrapping_mul(7919)
        .wrapping_add((tau_pos * 1_000_003 + m * 1009 + rep) as i32)
}

/// Runs every (instance, budget, size, repetition) cell and measures the
/// local-search time of every instance. Timings are taken sequentially
/// before the cells run on `workers` threads.
pub fn collect_errors(
    instances: &[InstanceId],
    budgets: &[f64],
    sizes: &[usize],
    reps: usize,
    lambda: &(dyn Fn(Family) -> LocalSearchKind + Sync),
    workers: usize,
) -> Result<ErrorCache> {
    if instances.is_empty() || reps == 0 {
        return Err(MapError::domain("need at least one instance and one repetition"));
    }
    if sizes.iter().any(|&m| m < 2) {
        return Err(MapError::domain("forced population sizes must be at least 2"));
    }
    let mut cache = ErrorCache::new(budgets, sizes)?;
    for &id in instances {
        let t = measure_ls_time(id, &lambda(id.family))?;
        log::info!("{id}: local search takes {t:.3e} s");
        cache.set_ls_time(id, t)?;
    }

    let mut cells = Vec::new();
    for &id in instances {
        for (b, &tau) in cache.budgets.iter().enumerate() {
            for &m in &cache.sizes {
                for rep in 0..reps {
                    cells.push((id, b, tau, m, rep));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MapError::Config(e.to_string()))?;
    let results: Vec<Result<(InstanceId, f64, usize, usize, f64)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(id, b, tau, m, rep)| {
                let inst = generate(id)?;
                let params = MemeticParams { forced_size: Some(m), ..MemeticParams::with_tau(tau) };
                let rng = SubtractiveRng::new(run_seed(id, b, m, rep));
                let (best, _) = run_memetic(&inst, &params, &lambda(id.family), rng, WallClock::start())?;
                Ok((id, tau, m, rep, best.weight(&inst)))
            })
            .collect()
    });
    for r in results {
        let (id, tau, m, rep, w) = r?;
        cache.insert(id, tau, m, rep, w)?;
    }
    Ok(cache)
}

/// Element of `sizes` closest to `m`; ties go to the smaller size.
pub fn snap(m: f64, sizes: &[usize]) -> Option<usize> {
    sizes.iter().copied().min_by(|&x, &y| {
        let (dx, dy) = ((x as f64 - m).abs(), (y as f64 - m).abs());
        dx.total_cmp(&dy).then(x.cmp(&y))
    })
}

/// Mean scaled error (percent) over all (instance, budget) cells when the
/// size of each cell is chosen by `pick(tau, t)`.
fn mean_scaled_error(cache: &ErrorCache, pick: impl Fn(f64, f64) -> usize) -> Result<f64> {
    let instances = cache.instances();
    if instances.is_empty() {
        return Err(MapError::domain("cache holds no instances"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for id in instances {
        let t = cache.ls_time[&id];
        for &tau in &cache.budgets {
            let (means, lo, hi) = cache.cell(id, tau)?;
            let m = pick(tau, t);
            let pos = cache.size_pos(m)?;
            total += scaled_error(means[pos], lo, hi)?;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Tuning objective: mean scaled error when every cell uses the cached size
/// nearest to `a * tau^b / t^c`.
pub fn gamma(a: f64, b: f64, c: f64, cache: &ErrorCache) -> Result<f64> {
    mean_scaled_error(cache, |tau, t| {
        let m = a * tau.powf(b) / t.powf(c);
        snap(m, &cache.sizes).expect("cache sizes are non-empty")
    })
}

/// Objective of a constant population size `m` (which must be cached).
pub fn gamma_fixed(m: usize, cache: &ErrorCache) -> Result<f64> {
    cache.size_pos(m)?;
    mean_scaled_error(cache, |_, _| m)
}

/// Candidate values for each constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9).collect()
}

impl Default for Grid {
    fn default() -> Self {
        Grid { a: steps(0.02, 0.2, 0.02), b: steps(0.1, 0.6, 0.05), c: steps(0.5, 1.1, 0.05) }
    }
}

impl Grid {
    /// Parses `a=lo:hi:step,b=...,c=...`; omitted constants keep the default
    /// range, and a bare value (`b=0.35`) is a singleton.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = Grid::default();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, spec) = part
                .split_once('=')
                .ok_or_else(|| MapError::Config(format!("grid entry `{part}` is not name=range")))?;
            let nums = spec
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| MapError::Config(format!("bad number in `{part}`"))))
                .collect::<Result<Vec<f64>>>()?;
            let values = match nums[..] {
                [v] => vec![v],
                [lo, hi, step] if step > 0.0 && lo <= hi => steps(lo, hi, step),
                _ => return Err(MapError::Config(format!("grid entry `{part}` needs value or lo:hi:step"))),
            };
            match name.trim() {
                "a" => grid.a = values,
                "b" => grid.b = values,
                "c" => grid.c = values,
                other => return Err(MapError::Config(format!("unknown grid constant `{other}`"))),
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.a.len() * self.b.len() * self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of a grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuned {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

/// Exhaustive arg-min of [`gamma`] over the grid; ties go to the
/// lexicographically smallest `(a, b, c)`.
pub fn tune(cache: &ErrorCache, grid: &Grid) -> Result<Tuned> {
    if grid.is_empty() {
        return Err(MapError::domain("empty grid"));
    }
    let mut triples: Vec<(f64, f64, f64)> = Vec::with_capacity(grid.len());
    for &a in &grid.a {
        for &b in &grid.b {
            for &c in &grid.c {
                triples.push((a, b, c));
            }
        }
    }
    triples.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)));
    let mut best: Option<Tuned> = None;
    for (a, b, c) in triples {
        let g = gamma(a, b, c, cache)?;
        if best.is_none_or(|t| g < t.gamma) {
            best = Some(Tuned { a, b, c, gamma: g });
        }
    }
    Ok(best.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(index: usize) -> InstanceId {
        InstanceId::new(Family::Random, 3, 40, index)
    }

    /// Two instances, two budgets, sizes {2, 8, 30}; size 8 is best
    /// everywhere.
    fn toy() -> ErrorCache {
        let mut cache = ErrorCache::new(&[1.0, 3.0], &[2, 8, 30]).unwrap();
        for i in 1..=2 {
            cache.set_ls_time(id(i), 0.01 * i as f64).unwrap();
            for tau in [1.0, 3.0] {
                for (m, w) in [(2, 60.0), (8, 41.0), (30, 50.0)] {
                    cache.insert(id(i), tau, m, 0, w).unwrap();
                    cache.insert(id(i), tau, m, 1, w + 1.0).unwrap();
                }
            }
        }
        cache
    }

    #[test]
    fn snapping_prefers_smaller_on_ties() {
        assert_eq!(snap(5.0, &[2, 8]), Some(2));
        assert_eq!(snap(5.1, &[2, 8]), Some(8));
        assert_eq!(snap(1e9, &[2, 8]), Some(8));
        assert_eq!(snap(1.0, &[]), None);
    }

    #[test]
    fn uniformly_best_size_gives_zero() {
        let cache = toy();
        // a chosen so that m = a / t^0 = 8 everywhere.
        assert_eq!(gamma(8.0, 0.0, 0.0, &cache).unwrap(), 0.0);
        assert_eq!(gamma_fixed(8, &cache).unwrap(), 0.0);
        assert_eq!(gamma_fixed(2, &cache).unwrap(), 100.0);
        let g30 = gamma_fixed(30, &cache).unwrap();
        assert!((g30 - 100.0 * 9.0 / 19.0).abs() < 1e-9);
    }

    #[test]
    fn single_size_ignores_constants() {
        let mut cache = ErrorCache::new(&[1.0], &[5]).unwrap();
        cache.set_ls_time(id(1), 0.5).unwrap();
        cache.insert(id(1), 1.0, 5, 0, 77.0).unwrap();
        for (a, b, c) in [(0.01, 0.1, 0.5), (1.0, 0.6, 1.1)] {
            assert_eq!(gamma(a, b, c, &cache).unwrap(), 0.0);
        }
    }

    #[test]
    fn incomplete_cache_is_an_error() {
        let mut cache = ErrorCache::new(&[1.0], &[2, 5]).unwrap();
        cache.set_ls_time(id(1), 0.5).unwrap();
        cache.insert(id(1), 1.0, 2, 0, 10.0).unwrap();
        assert!(gamma(0.08, 0.35, 0.85, &cache).is_err());
        assert!(gamma(0.08, 0.35, 0.85, &ErrorCache::new(&[1.0], &[2]).unwrap()).is_err());
    }

    #[test]
    fn singleton_grid_returns_its_triple() {
        let grid = Grid::parse("a=0.08,b=0.35,c=0.85").unwrap();
        let t = tune(&toy(), &grid).unwrap();
        assert_eq!((t.a, t.b, t.c), (0.08, 0.35, 0.85));
    }

    #[test]
    fn tune_is_an_argmin_with_lexicographic_ties() {
        let cache = toy();
        let grid = Grid::parse("a=0.02:0.2:0.02,b=0.1:0.6:0.1,c=0.5:1.1:0.1").unwrap();
        let t = tune(&cache, &grid).unwrap();
        for &a in &grid.a {
            for &b in &grid.b {
                for &c in &grid.c {
                    let g = gamma(a, b, c, &cache).unwrap();
                    assert!(t.gamma <= g);
                    if g == t.gamma {
                        assert!((t.a, t.b, t.c) <= (a, b, c));
                    }
                }
            }
        }
        assert_eq!(t.gamma, 0.0);
    }

    #[test]
    fn default_grid_brackets_defaults() {
        let g = Grid::default();
        assert_eq!(g.a.len(), 10);
        assert_eq!(g.b.len(), 11);
        assert_eq!(g.c.len(), 13);
        assert!(g.a.contains(&0.08) && g.b.contains(&0.35) && g.c.contains(&0.85));
        assert!(Grid::parse("d=1").is_err());
        assert!(Grid::parse("a=1:0:0.1").is_err());
    }

    #[test]
    fn cache_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let (w, t) = (dir.path().join("errors.csv"), dir.path().join("ls_time.csv"));
        let cache = toy();
        cache.save(&w, &t).unwrap();
        let header = std::fs::read_to_string(&w).unwrap();
        assert!(header.starts_with("instance_id,tau_s,m,rep,weight\n"));
        assert!(std::fs::read_to_string(&t).unwrap().starts_with("instance_id,ls_time_s\n"));
        assert_eq!(ErrorCache::load(&w, &t).unwrap(), cache);
    }

    #[test]
    fn collect_counts_cells() {
        let ids = [InstanceId::new(Family::Random, 3, 6, 1), InstanceId::new(Family::Clique, 3, 6, 1)];
        let cache = collect_errors(&ids, &[0.01], &[2, 3, 4], 1, &default_local_search, 1).unwrap();
        assert_eq!(cache.len(), 6);
        assert_eq!(cache.instances().len(), 2);
        assert!(gamma(0.08, 0.35, 0.85, &cache).unwrap() <= 100.0);
        assert!(collect_errors(&[], &[1.0], &[2], 1, &default_local_search, 1).is_err());
        assert!(collect_errors(&ids, &[], &[2], 1, &default_local_search, 1).is_err());
        assert!(collect_errors(&ids, &[1.0], &[], 1, &default_local_search, 1).is_err());
    }
}
