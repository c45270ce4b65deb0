//! Linear assignment (2-AP) solver: shortest augmenting paths with
//! potentials, O(n^3).

use crate::error::{MapError, Result};

/// Dense square cost matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(MapError::domain(format!(
                "cost matrix has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(MapError::domain("cost matrix has non-finite entries"));
        }
        Ok(CostMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MapError::domain("cost matrix is not square"));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Reusable buffers for repeated solves of the same size.
#[derive(Debug, Default)]
pub(crate) struct ApWorkspace {
    u: Vec<f64>,
    v: Vec<f64>,
    p: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
}

impl ApWorkspace {
    /// Solves for a row -> column permutation minimizing total cost.
    /// `cost(i, j)` must be finite.
    pub(crate) fn solve(&mut self, n: usize, cost: impl Fn(usize, usize) -> f64, sigma: &mut Vec<usize>) -> f64 {
        sigma.clear();
        if n == 0 {
            return 0.0;
        }
        // 1-based arrays; column 0 is a virtual source.
        self.u.clear();
        self.u.resize(n + 1, 0.0);
        self.v.clear();
        self.v.resize(n + 1, 0.0);
        self.p.clear();
        self.p.resize(n + 1, 0);
        self.way.clear();
        self.way.resize(n + 1, 0);
        let (u, v, p, way) = (&mut self.u, &mut self.v, &mut self.p, &mut self.way);
        for i in 1..=n {
            p[0] = i;
            let mut j0 = 0usize;
            self.minv.clear();
            self.minv.resize(n + 1, f64::INFINITY);
            self.used.clear();
            self.used.resize(n + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = p[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0usize;
                for j in 1..=n {
                    if self.used[j] {
                        continue;
                    }
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < self.minv[j] {
                        self.minv[j] = cur;
                        way[j] = j0;
                    }
                    if self.minv[j] < delta {
                        delta = self.minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=n {
                    if self.used[j] {
                        u[p[j]] += delta;
                        v[j] -= delta;
                    } else {
                        self.minv[j] -= delta;
                    }
                }
                j0 = j1;
                if p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                p[j0] = p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        sigma.resize(n, 0);
        for j in 1..=n {
            sigma[p[j] - 1] = j - 1;
        }
        // Recompute the total from the matrix so no potential drift leaks out.
        (0..n).map(|i| cost(i, sigma[i])).sum()
    }
}

/// Minimum-cost perfect matching of rows to columns. Returns `sigma` with
/// row `i` matched to column `sigma[i]`, and the total cost.
pub fn solve_ap(cost: &CostMatrix) -> (Vec<usize>, f64) {
    let mut ws = ApWorkspace::default();
    let mut sigma = Vec::new();
    let total = ws.solve(cost.n, |i, j| cost.get(i, j), &mut sigma);
    (sigma, total)
}
