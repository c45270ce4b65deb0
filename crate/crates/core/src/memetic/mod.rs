//! Time-budgeted memetic algorithm.
//!
//! The population size is not a fixed constant: the first generation is
//! produced while timing the local search, and the size is then set from the
//! budget `tau` and the mean local-search time `t` as
//! `m = a * tau^b / t^c` (rounded, at least 2).

mod clock;
mod operators;

use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};
use crate::localsearch::{greedy_construct, local_search, LocalSearchKind};
use crate::model::{Assignment, Instance};
use crate::rng::SubtractiveRng;

pub use clock::{Clock, VirtualClock, WallClock};
pub use operators::{crossover, perturb, perturbation_swaps};

/// Upper clamp for the computed population size.
pub const MAX_POPULATION: usize = 1_000_000;

/// Tuned and fixed constants of the algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemeticParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Probability that a non-best member is mutated.
    pub mutation_probability: f64,
    /// Perturbation strength of a mutation.
    pub mutation_strength: f64,
    /// Perturbation strength used to derive first-generation members from greedy.
    pub first_strength: f64,
    /// Ratio between produced and selected solutions per generation.
    pub pool_ratio: usize,
    /// Time budget in seconds.
    pub tau: f64,
    /// Overrides the computed population size (used by the tuner).
    pub forced_size: Option<usize>,
}

impl Default for MemeticParams {
    fn default() -> Self {
        MemeticParams {
            a: 0.08,
            b: 0.35,
            c: 0.85,
            mutation_probability: 0.5,
            mutation_strength: 0.1,
            first_strength: 0.2,
            pool_ratio: 3,
            tau: 1.0,
            forced_size: None,
        }
    }
}

impl MemeticParams {
    pub fn with_tau(tau: f64) -> Self {
        MemeticParams { tau, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("mutation_strength", self.mutation_strength),
            ("first_strength", self.first_strength),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MapError::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.b >= 0.0 && self.c >= 0.0) {
            return Err(MapError::domain("exponents b and c must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(MapError::domain("mutation probability outside [0, 1]"));
        }
        if self.pool_ratio < 2 {
            return Err(MapError::domain("pool ratio must be at least 2"));
        }
        if self.forced_size.is_some_and(|m| m < 2) {
            return Err(MapError::domain("forced population size must be at least 2"));
        }
        Ok(())
    }
}

/// Unrounded population size `a * tau^b / t^c`.
pub fn m_opt_raw(tau: f64, t: f64, params: &MemeticParams) -> Result<f64> {
    if !(tau > 0.0 && t > 0.0) {
        return Err(MapError::domain(format!("m_opt needs tau > 0 and t > 0 (tau={tau}, t={t})")));
    }
    Ok(params.a * tau.powf(params.b) / t.powf(params.c))
}

/// Population size for budget `tau` and local-search time `t`, rounded to the
/// nearest integer and clamped to `[2, MAX_POPULATION]`.
pub fn m_opt(tau: f64, t: f64, params: &MemeticParams) -> Result<usize> {
    let raw = m_opt_raw(tau, t, params)?;
    Ok(raw.round().clamp(2.0, MAX_POPULATION as f64) as usize)
}

/// Members sorted by ascending weight, pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<(Assignment, f64)>,
    target: usize,
}

impl Population {
    /// Keeps the `target` best distinct assignments of `pool`.
    pub fn select(mut pool: Vec<(Assignment, f64)>, target: usize) -> Self {
        pool.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
        pool.dedup_by(|x, y| x.0 == y.0);
        pool.truncate(target);
        Population { members: pool, target }
    }

    pub fn members(&self) -> &[(Assignment, f64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Target size `m`.
    pub fn target(&self) -> usize {
        self.target
    }

    pub fn best(&self) -> Option<&(Assignment, f64)> {
        self.members.first()
    }
}

/// Measurements of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub generations: usize,
    pub local_searches: usize,
    /// Mean local-search time over the whole run (seconds).
    pub mean_ls_time: f64,
    /// Mean local-search time over the first generation (seconds); the `t`
    /// used for sizing.
    pub first_generation_ls_time: f64,
    /// Population size `m` used after the first generation.
    pub population_size: usize,
    /// Best weight after the first generation and after every later one.
    pub trajectory: Vec<f64>,
    pub elapsed: f64,
    /// Set when the budget ran out before two distinct members existed.
    pub truncated: bool,
}

/// Outcome of building the first generation.
#[derive(Debug, Clone)]
pub struct FirstGeneration {
    pub population: Population,
    /// Population size for the following generations.
    pub size: usize,
    /// Mean local-search time measured while producing it.
    pub ls_time: f64,
    pub truncated: bool,
}

/// What one call of [`Memetic::next_generation`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationInfo {
    /// Assignments offered to selection (including duplicates).
    pub pool_size: usize,
    pub crossover_pairs: usize,
    pub mutations: usize,
    /// The budget ran out before the generation was complete.
    pub interrupted: bool,
}

/// State of one memetic run: instance, parameters, local search, generator
/// and clock. All randomness comes from the owned generator.
pub struct Memetic<'a, C: Clock> {
    inst: &'a Instance,
    params: MemeticParams,
    ls: LocalSearchKind,
    rng: SubtractiveRng,
    clock: C,
    greedy: Option<Assignment>,
    ls_count: usize,
    ls_time: f64,
}

impl<'a, C: Clock> Memetic<'a, C> {
    pub fn new(inst: &'a Instance, params: MemeticParams, ls: LocalSearchKind, rng: SubtractiveRng, clock: C) -> Result<Self> {
        params.validate()?;
        Ok(Memetic { inst, params, ls, rng, clock, greedy: None, ls_count: 0, ls_time: 0.0 })
    }

    pub fn params(&self) -> &MemeticParams {
        &self.params
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn local_searches(&self) -> usize {
        self.ls_count
    }

    fn out_of_time(&self) -> bool {
        self.clock.elapsed() >= self.params.tau
    }

    fn improve(&mut self, a: &Assignment) -> (Assignment, f64) {
        let t0 = self.clock.elapsed();
        let out = local_search(self.inst, a, &self.ls).expect("assignment matches instance");
        self.clock.charge_local_search();
        self.ls_time += self.clock.elapsed() - t0;
        self.ls_count += 1;
        let w = out.weight(self.inst);
        (out, w)
    }

    fn greedy(&mut self) -> Assignment {
        if self.greedy.is_none() {
            self.greedy = Some(greedy_construct(self.inst));
        }
        self.greedy.clone().expect("set above")
    }

    /// A fresh member: local search applied to a perturbed greedy solution.
    fn fresh_member(&mut self) -> (Assignment, f64) {
        let greedy = self.greedy();
        let start = perturb(&greedy, self.params.first_strength, &mut self.rng);
        self.improve(&start)
    }

    /// Produces improved perturbed-greedy members while the produced count
    /// does not exceed `m_opt(tau, t_cur / produced)`.
    pub fn build_first_generation(&mut self) -> FirstGeneration {
        self.greedy();
        let start = self.clock.elapsed();
        let ls_before = (self.ls_count, self.ls_time);
        let mut pool: Vec<(Assignment, f64)> = Vec::new();
        let mut produced = 0usize;
        let mut distinct = std::collections::HashSet::new();
        loop {
            if self.out_of_time() && produced > 0 {
                break;
            }
            let member = self.fresh_member();
            produced += 1;
            if distinct.insert(member.0.clone()) {
                pool.push(member);
            }
            let spent = (self.clock.elapsed() - start).max(f64::MIN_POSITIVE);
            let keep_going = match self.params.forced_size {
                Some(m) => distinct.len() < m && produced < 10 * m,
                None => {
                    let m = m_opt(self.params.tau, spent / produced as f64, &self.params).expect("positive inputs");
                    produced <= m
                }
            };
            // A first generation needs two distinct members for crossover.
            if !keep_going && (distinct.len() >= 2 || produced >= 20) {
                break;
            }
        }
        let spent = (self.clock.elapsed() - start).max(f64::MIN_POSITIVE);
        let t = spent / produced as f64;
        let size = match self.params.forced_size {
            Some(m) => m,
            None => produced.min(m_opt(self.params.tau, t, &self.params).expect("positive inputs")).max(2),
        };
        let population = Population::select(pool, size);
        let truncated = population.len() < 2;
        let ls_time = (self.ls_time - ls_before.1) / (self.ls_count - ls_before.0).max(1) as f64;
        FirstGeneration { population, size, ls_time, truncated }
    }

    /// One generation: best member kept, others mutated with probability
    /// `p_m`, `(l*m - m_i)/2` crossover pairs, then selection of the `m` best
    /// distinct assignments.
    pub fn next_generation(&mut self, pop: &Population) -> Result<(Population, GenerationInfo)> {
        if pop.len() < 2 {
            return Err(MapError::domain(format!("population of {} cannot reproduce", pop.len())));
        }
        let m = pop.target();
        let mut current: Vec<(Assignment, f64)> = pop.members().to_vec();
        let mut produce = self.params.pool_ratio * m - current.len().min(self.params.pool_ratio * m);
        if produce % 2 == 1 {
            // Dropping a member must leave two parents; otherwise round up.
            if current.len() > 2 {
                current.pop();
            }
            produce += 1;
        }
        let pairs = produce / 2;
        let mut info = GenerationInfo { pool_size: 0, crossover_pairs: 0, mutations: 0, interrupted: false };

        let mut pool: Vec<(Assignment, f64)> = Vec::with_capacity(current.len() + produce);
        pool.push(current[0].clone());
        for member in &current[1..] {
            if self.out_of_time() {
                info.interrupted = true;
                pool.push(member.clone());
                continue;
            }
            if self.rng.next_f64() < self.params.mutation_probability {
                let mutated = perturb(&member.0, self.params.mutation_strength, &mut self.rng);
                pool.push(self.improve(&mutated));
                info.mutations += 1;
            } else {
                pool.push(member.clone());
            }
        }
        for _ in 0..pairs {
            if self.out_of_time() {
                info.interrupted = true;
                break;
            }
            let u = self.rng.index(current.len());
            let mut v = self.rng.index(current.len() - 1);
            if v >= u {
                v += 1;
            }
            let (x, y) = crossover(&current[u].0, &current[v].0, &mut self.rng)?;
            pool.push(self.improve(&x));
            if self.out_of_time() {
                info.interrupted = true;
                info.crossover_pairs += 1;
                break;
            }
            pool.push(self.improve(&y));
            info.crossover_pairs += 1;
        }
        info.pool_size = pool.len();
        let mut next = Population::select(pool, m);
        // Total collapse: top up with fresh members so crossover stays possible.
        let mut attempts = 0;
        while next.len() < 2 && attempts < 20 && !self.out_of_time() {
            let mut members = next.members;
            members.push(self.fresh_member());
            next = Population::select(members, m);
            attempts += 1;
        }
        Ok((next, info))
    }

    /// Runs until the budget is spent and returns the best assignment seen.
    pub fn run(&mut self) -> (Assignment, RunStats) {
        let first = self.build_first_generation();
        let mut stats = RunStats {
            first_generation_ls_time: first.ls_time,
            population_size: first.size,
            truncated: first.truncated,
            ..RunStats::default()
        };
        let mut pop = first.population;
        let mut best = pop.best().cloned().expect("at least one member");
        stats.trajectory.push(best.1);
        while !self.out_of_time() && pop.len() >= 2 {
            let (next, _) = self.next_generation(&pop).expect("population has two members");
            pop = next;
            stats.generations += 1;
            if let Some(top) = pop.best() {
                if top.1 < best.1 {
                    best = top.clone();
                }
            }
            stats.trajectory.push(best.1);
        }
        stats.local_searches = self.ls_count;
        stats.mean_ls_time = self.ls_time / self.ls_count.max(1) as f64;
        stats.elapsed = self.clock.elapsed();
        (best.0, stats)
    }
}

/// Convenience wrapper: one full run.
pub fn run_memetic<C: Clock>(
    inst: &Instance,
    params: &MemeticParams,
    ls: &LocalSearchKind,
    rng: SubtractiveRng,
    clock: C,
) -> Result<(Assignment, RunStats)> {
    let mut run = Memetic::new(inst, params.clone(), ls.clone(), rng, clock)?;
    Ok(run.run())
}
