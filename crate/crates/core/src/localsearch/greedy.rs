//! Greedy construction: repeatedly take the lightest vector whose coordinates
//! are all still free, ties going to the lexicographically smallest vector.

use crate::model::{Assignment, Combiner, Coord, Instance, Weights};

/// Partial weight of a vector prefix, monotone in the prefix length.
/// `None` for models without a useful prefix bound.
fn extend_partial(inst: &Instance, acc: f64, prefix: &[Coord], c: Coord) -> Option<f64> {
    let j = prefix.len();
    let n = inst.n();
    match inst.weights() {
        Weights::Tensor(_) => None,
        Weights::Edges { combiner, matrices } => {
            let mut acc = acc;
            for (i, &ci) in prefix.iter().enumerate() {
                let d = matrices[inst.pair_index(i, j)][ci as usize * n + c as usize] as f64;
                acc += match combiner {
                    Combiner::Sum => d,
                    Combiner::RootOfSquares => d * d,
                };
            }
            Some(acc)
        }
        Weights::Geometric { distances, .. } => {
            let mut acc = acc;
            for (i, &ci) in prefix.iter().enumerate() {
                acc += distances[inst.pair_index(i, j)][ci as usize * n + c as usize];
            }
            Some(acc)
        }
        Weights::Product(arrays) => {
            let f = arrays[j][c as usize] as f64;
            Some(if j == 0 { f } else { acc * f })
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    free: &'a [Vec<Coord>],
    prefix: Vec<Coord>,
    best: Option<(f64, Vec<Coord>)>,
}

impl Search<'_> {
    fn dfs(&mut self, acc: f64) {
        let j = self.prefix.len();
        if j == self.inst.s() {
            if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                self.best = Some((acc, self.prefix.clone()));
            }
            return;
        }
        for k in 0..self.free[j].len() {
            let c = self.free[j][k];
            let next = extend_partial(self.inst, acc, &self.prefix, c).expect("decomposable model");
            if self.best.as_ref().is_some_and(|(b, _)| next >= *b) {
                continue;
            }
            self.prefix.push(c);
            self.dfs(next);
            self.prefix.pop();
        }
    }
}

/// Lightest available vector in lexicographic scan order (full scan with an
/// early exit at the instance-wide minimum weight).
fn scan_tensor(inst: &Instance, free: &[Vec<Coord>]) -> Vec<Coord> {
    let s = inst.s();
    let floor = inst.weight_floor();
    let mut pos = vec![0usize; s];
    let mut v: Vec<Coord> = free.iter().map(|f| f[0]).collect();
    let mut best_w = f64::INFINITY;
    let mut best = v.clone();
    loop {
        let w = inst.weight_of(&v);
        if w < best_w {
            best_w = w;
            best.copy_from_slice(&v);
            if w <= floor {
                return best;
            }
        }
        let mut d = s;
        loop {
            if d == 0 {
                return best;
            }
            d -= 1;
            pos[d] += 1;
            if pos[d] < free[d].len() {
                v[d] = free[d][pos[d]];
                break;
            }
            pos[d] = 0;
            v[d] = free[d][0];
        }
    }
}

/// Builds an assignment greedily.
pub fn greedy_construct(inst: &Instance) -> Assignment {
    let (s, n) = (inst.s(), inst.n());
    let mut free: Vec<Vec<Coord>> = vec![(0..n as Coord).collect(); s];
    let mut coords = Vec::with_capacity(s * n);
    let tensor = matches!(inst.weights(), Weights::Tensor(_));
    for _ in 0..n {
        let v = if tensor {
            scan_tensor(inst, &free)
        } else {
            let mut search = Search { inst, free: &free, prefix: Vec::with_capacity(s), best: None };
            search.dfs(0.0);
            search.best.expect("free coordinates remain").1
        };
        for (d, &c) in v.iter().enumerate() {
            let at = free[d].binary_search(&c).expect("coordinate is free");
            free[d].remove(at);
        }
        coords.extend_from_slice(&v);
    }
    Assignment::from_flat_unchecked(s, n, coords)
}
