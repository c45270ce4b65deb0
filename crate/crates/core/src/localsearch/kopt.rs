//! 2-opt and 3-opt: best recombination of every pair (triple) of vectors.
//!
//! Dimension 0 is never touched: exchanging it is the same as exchanging all
//! other dimensions, so leaving it alone removes the symmetric duplicates.

use super::Work;
use crate::model::Coord;

pub(super) fn two_opt(work: &mut Work) -> bool {
    let (s, n) = (work.s, work.n);
    if n < 2 {
        return false;
    }
    let masks = 1u64..(1u64 << (s - 1));
    let mut a = vec![0 as Coord; s];
    let mut b = vec![0 as Coord; s];
    let mut improved = false;
    loop {
        let mut sweep = false;
        for u in 0..n {
            for v in u + 1..n {
                let before = work.weights[u] + work.weights[v];
                let mut best: Option<(f64, u64, f64, f64)> = None;
                for mask in masks.clone() {
                    a.copy_from_slice(work.row(u));
                    b.copy_from_slice(work.row(v));
                    for d in 1..s {
                        if mask >> (d - 1) & 1 == 1 {
                            std::mem::swap(&mut a[d], &mut b[d]);
                        }
                    }
                    let (wa, wb) = (work.inst.weight_of(&a), work.inst.weight_of(&b));
                    let gain = before - wa - wb;
                    if best.is_none_or(|(g, ..)| gain > g) {
                        best = Some((gain, mask, wa, wb));
                    }
                }
                let (gain, mask, wa, wb) = best.expect("s >= 2 gives at least one mask");
                if work.improves(gain) {
                    for d in 1..s {
                        if mask >> (d - 1) & 1 == 1 {
                            work.rows.swap(u * s + d, v * s + d);
                        }
                    }
                    work.weights[u] = wa;
                    work.weights[v] = wb;
                    work.refresh_total();
                    sweep = true;
                }
            }
        }
        if !sweep {
            return improved;
        }
        improved = true;
    }
}

/// The six permutations of three slots.
const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub(super) fn three_opt(work: &mut Work) -> bool {
    let (s, n) = (work.s, work.n);
    if n < 3 {
        // With two vectors every triple recombination is a pair recombination.
        return two_opt(work);
    }
    let mut choice = vec![0usize; s];
    let mut vecs = [vec![0 as Coord; s], vec![0 as Coord; s], vec![0 as Coord; s]];
    let mut improved = false;
    loop {
        let mut sweep = false;
        for u in 0..n {
            for v in u + 1..n {
                for w in v + 1..n {
                    let idx = [u, v, w];
                    let before: f64 = idx.iter().map(|&i| work.weights[i]).sum();
                    let mut best: Option<(f64, Vec<usize>, [f64; 3])> = None;
                    choice.iter_mut().for_each(|c| *c = 0);
                    loop {
                        // Advance the odometer over dimensions 1..s (skip identity).
                        let mut d = s;
                        let mut done = true;
                        while d > 1 {
                            d -= 1;
                            choice[d] += 1;
                            if choice[d] < PERMS3.len() {
                                done = false;
                                break;
                            }
                            choice[d] = 0;
                        }
                        if done {
                            break;
                        }
                        for (slot, vec) in vecs.iter_mut().enumerate() {
                            for d in 0..s {
                                let from = PERMS3[choice[d]][slot];
                                vec[d] = work.rows[idx[from] * s + d];
                            }
                        }
                        let ws = [
                            work.inst.weight_of(&vecs[0]),
                            work.inst.weight_of(&vecs[1]),
                            work.inst.weight_of(&vecs[2]),
                        ];
                        let gain = before - ws[0] - ws[1] - ws[2];
                        if best.as_ref().is_none_or(|(g, ..)| gain > *g) {
                            best = Some((gain, choice.clone(), ws));
                        }
                    }
                    let Some((gain, ch, ws)) = best else { continue };
                    if work.improves(gain) {
                        let old: Vec<Coord> = idx.iter().flat_map(|&i| work.row(i).to_vec()).collect();
                        for (slot, &i) in idx.iter().enumerate() {
                            for d in 0..s {
                                let from = PERMS3[ch[d]][slot];
                                work.rows[i * s + d] = old[from * s + d];
                            }
                            work.weights[i] = ws[slot];
                        }
                        work.refresh_total();
                        sweep = true;
                    }
                }
            }
        }
        if !sweep {
            return improved;
        }
        improved = true;
    }
}
