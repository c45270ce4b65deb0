//! Dimensionwise searches (1DV, 2DV, sDV).
//!
//! A split fixes a subset of dimensions; the fixed parts of the vectors are
//! re-matched to the free parts by solving a 2-AP over all `n^2` pairings.

use super::ap::ApWorkspace;
use super::{DvDepth, Work};
use crate::model::Coord;

/// A partition of the dimensions into a fixed and a free part.
///
/// Complementary splits define the same neighborhood, so only the canonical
/// side is kept: the fixed part is the smaller one, or contains dimension 0
/// when both halves have equal size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimensionSplit {
    fixed: u64,
    s: usize,
}

impl DimensionSplit {
    /// Builds the canonical split for the given fixed dimensions.
    pub fn new(s: usize, fixed: &[usize]) -> Option<Self> {
        if s > 64 {
            return None;
        }
        let mut mask = 0u64;
        for &d in fixed {
            if d >= s {
                return None;
            }
            mask |= 1 << d;
        }
        let all = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        if mask == 0 || mask == all {
            return None;
        }
        let k = mask.count_ones() as usize;
        let canonical = k < s - k || (2 * k == s && mask & 1 == 1);
        let fixed = if canonical { mask } else { all & !mask };
        Some(DimensionSplit { fixed, s })
    }

    pub fn fixed(&self) -> Vec<usize> {
        (0..self.s).filter(|d| self.is_fixed(*d)).collect()
    }

    pub fn free(&self) -> Vec<usize> {
        (0..self.s).filter(|d| !self.is_fixed(*d)).collect()
    }

    #[inline]
    pub fn is_fixed(&self, d: usize) -> bool {
        self.fixed >> d & 1 == 1
    }
}

/// Canonical splits with at most `depth.limit(s)` fixed dimensions, ordered by
/// fixed-set size and then lexicographically.
pub fn canonical_splits(s: usize, depth: DvDepth) -> Vec<DimensionSplit> {
    let limit = depth.limit(s);
    let mut splits: Vec<DimensionSplit> = (1u64..(1u64 << s) - 1)
        .filter_map(|mask| {
            let fixed: Vec<usize> = (0..s).filter(|d| mask >> d & 1 == 1).collect();
            DimensionSplit::new(s, &fixed).filter(|sp| sp.fixed == mask)
        })
        .filter(|sp| sp.fixed.count_ones() as usize <= limit)
        .collect();
    splits.sort_by_key(|sp| (sp.fixed.count_ones(), sp.fixed()));
    splits
}

#[derive(Default)]
struct Scratch {
    ap: ApWorkspace,
    sigma: Vec<usize>,
    cost: Vec<f64>,
    rows: Vec<Coord>,
    fixed_off: Vec<usize>,
    free_off: Vec<usize>,
}

fn fill_costs(work: &Work, split: DimensionSplit, sc: &mut Scratch) {
    let (s, n) = (work.s, work.n);
    let inst = work.inst;
    sc.cost.clear();
    if let Some((tensor, strides)) = inst.tensor_parts() {
        // Entry index is additive over dimensions.
        let offsets = |keep: bool, out: &mut Vec<usize>| {
            out.clear();
            out.extend(work.rows.chunks_exact(s).map(|row| {
                (0..s).filter(|&d| split.is_fixed(d) == keep).map(|d| row[d] as usize * strides[d]).sum::<usize>()
            }));
        };
        offsets(true, &mut sc.fixed_off);
        offsets(false, &mut sc.free_off);
        for &f in &sc.fixed_off {
            sc.cost.extend(sc.free_off.iter().map(|&g| tensor[f + g] as f64));
        }
        return;
    }
    let mut buf = vec![0; s];
    for i in 0..n {
        let fixed_row = &work.rows[i * s..(i + 1) * s];
        for d in 0..s {
            if split.is_fixed(d) {
                buf[d] = fixed_row[d];
            }
        }
        for j in 0..n {
            let free_row = &work.rows[j * s..(j + 1) * s];
            for d in 0..s {
                if !split.is_fixed(d) {
                    buf[d] = free_row[d];
                }
            }
            sc.cost.push(inst.weight_of(&buf));
        }
    }
}

fn try_split(work: &mut Work, split: DimensionSplit, sc: &mut Scratch) -> bool {
    let (s, n) = (work.s, work.n);
    fill_costs(work, split, sc);
    let cost = &sc.cost;
    let total = sc.ap.solve(n, |i, j| cost[i * n + j], &mut sc.sigma);
    if !work.improves(work.total - total) {
        return false;
    }
    sc.rows.clone_from(&work.rows);
    for i in 0..n {
        let src = sc.sigma[i];
        for d in 0..s {
            if !split.is_fixed(d) {
                work.rows[i * s + d] = sc.rows[src * s + d];
            }
        }
        work.weights[i] = cost[i * n + src];
    }
    work.refresh_total();
    true
}

pub(super) fn search(work: &mut Work, depth: DvDepth) -> bool {
    if work.n < 2 {
        return false;
    }
    let splits = canonical_splits(work.s, depth);
    let mut sc = Scratch::default();
    let mut improved = false;
    loop {
        let mut sweep = false;
        for &split in &splits {
            sweep |= try_split(work, split, &mut sc);
        }
        if !sweep {
            return improved;
        }
        improved = true;
    }
}
