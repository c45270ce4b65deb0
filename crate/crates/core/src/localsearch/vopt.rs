//! Variable-depth interchange (v-opt).
//!
//! For every start vector and start dimension a chain of single-coordinate
//! swaps is grown. Each step swaps one coordinate between the active vector
//! and a partner not yet in the chain; the active vector is final after the
//! swap, so the step is chosen to make it as light as possible (ties go to
//! the larger total gain of the pair). The partner absorbs any interim loss
//! and becomes the active vector. The prefix of the chain with the largest
//! positive cumulative gain is kept and the rest is undone.

use super::Work;

struct Step {
    active: usize,
    partner: usize,
    dim: usize,
    old_weights: (f64, f64),
}

/// Best swap of `active` with any partner outside the chain, as
/// `(pair gain, partner, dimension, new active weight, new partner weight)`.
fn best_swap(work: &Work, bases: &[usize], active: usize, in_chain: &[bool], dims: std::ops::Range<usize>) -> Option<(f64, usize, usize, f64, f64)> {
    if let Some((tensor, strides)) = work.inst.tensor_parts() {
        return best_swap_tensor(work, tensor, strides, bases, active, in_chain, dims);
    }
    let s = work.s;
    let inst = work.inst;
    let mut best: Option<(f64, usize, usize, f64, f64)> = None;
    let current = work.weights[active];
    let row_a = work.row(active);
    for p in 0..work.n {
        if in_chain[p] {
            continue;
        }
        let row_p = &work.rows[p * s..(p + 1) * s];
        let before = current + work.weights[p];
        for d in dims.clone() {
            let wa = inst.weight_with(row_a, d, row_p[d]);
            if best.is_some_and(|(_, _, _, bwa, _)| wa > bwa) {
                continue;
            }
            let wb = inst.weight_with(row_p, d, row_a[d]);
            let gain = before - wa - wb;
            if best.is_none_or(|(g, _, _, bwa, _)| wa < bwa || gain > g) {
                best = Some((gain, p, d, wa, wb));
            }
        }
    }
    best
}

fn best_swap_tensor(
    work: &Work,
    tensor: &[u8],
    strides: &[usize],
    bases: &[usize],
    active: usize,
    in_chain: &[bool],
    dims: std::ops::Range<usize>,
) -> Option<(f64, usize, usize, f64, f64)> {
    let s = work.s;
    let row_a = work.row(active);
    let base_a = bases[active];
    let current = work.weights[active];
    let mut best: Option<(f64, usize, usize, f64, f64)> = None;
    for p in 0..work.n {
        if in_chain[p] {
            continue;
        }
        let row_p = &work.rows[p * s..(p + 1) * s];
        let base_p = bases[p];
        let before = current + work.weights[p];
        for d in dims.clone() {
            let (ca, cp, st) = (row_a[d] as usize, row_p[d] as usize, strides[d]);
            let wa = tensor[base_a + cp * st - ca * st] as f64;
            if best.is_some_and(|(_, _, _, bwa, _)| wa > bwa) {
                continue;
            }
            let wb = tensor[base_p + ca * st - cp * st] as f64;
            let gain = before - wa - wb;
            if best.is_none_or(|(g, _, _, bwa, _)| wa < bwa || gain > g) {
                best = Some((gain, p, d, wa, wb));
            }
        }
    }
    best
}

/// Swaps coordinate `dim` of two vectors, keeping tensor offsets in step.
fn swap_coords(work: &mut Work, bases: &mut [usize], a: usize, b: usize, dim: usize) {
    let s = work.s;
    if let Some((_, strides)) = work.inst.tensor_parts() {
        let (ca, cb) = (work.rows[a * s + dim] as usize, work.rows[b * s + dim] as usize);
        bases[a] = bases[a] + cb * strides[dim] - ca * strides[dim];
        bases[b] = bases[b] + ca * strides[dim] - cb * strides[dim];
    }
    work.rows.swap(a * s + dim, b * s + dim);
}

fn apply(work: &mut Work, bases: &mut [usize], active: usize, partner: usize, dim: usize, wa: f64, wb: f64) -> (f64, f64) {
    swap_coords(work, bases, active, partner, dim);
    let old = (work.weights[active], work.weights[partner]);
    work.weights[active] = wa;
    work.weights[partner] = wb;
    old
}

fn undo(work: &mut Work, bases: &mut [usize], step: &Step) {
    swap_coords(work, bases, step.active, step.partner, step.dim);
    work.weights[step.active] = step.old_weights.0;
    work.weights[step.partner] = step.old_weights.1;
}

/// Grows one chain from `start`; returns whether a prefix was committed.
fn chain(work: &mut Work, bases: &mut [usize], start: usize, first_dim: usize, in_chain: &mut [bool], steps: &mut Vec<Step>) -> bool {
    in_chain.iter_mut().for_each(|x| *x = false);
    in_chain[start] = true;
    steps.clear();
    let mut active = start;
    let (mut cumulative, mut best_gain, mut best_len) = (0.0f64, 0.0f64, 0usize);
    // Weight above the floor still held by the active vector and the vectors
    // outside the chain; no continuation can gain more than this.
    let floor = work.inst.weight_floor();
    let mut excess = work.total - work.n as f64 * floor;
    let scale = work.total.abs().max(1.0);
    while steps.len() + 1 < work.n {
        if cumulative + excess + 1e-11 * scale <= best_gain.max(1e-10 * scale) {
            break;
        }
        let dims = if steps.is_empty() { first_dim..first_dim + 1 } else { 0..work.s };
        let Some((gain, partner, dim, wa, wb)) = best_swap(work, bases, active, in_chain, dims) else {
            break;
        };
        let old_weights = apply(work, bases, active, partner, dim, wa, wb);
        steps.push(Step { active, partner, dim, old_weights });
        cumulative += gain;
        excess -= old_weights.0 + old_weights.1 - wb - floor;
        if cumulative > best_gain && work.improves(cumulative) {
            best_gain = cumulative;
            best_len = steps.len();
        }
        in_chain[partner] = true;
        active = partner;
    }
    while steps.len() > best_len {
        let step = steps.pop().expect("non-empty");
        undo(work, bases, &step);
    }
    if best_len > 0 {
        work.refresh_total();
        true
    } else {
        false
    }
}

pub(super) fn v_opt(work: &mut Work) -> bool {
    let n = work.n;
    if n < 2 {
        return false;
    }
    let mut in_chain = vec![false; n];
    let mut steps = Vec::with_capacity(n);
    let mut bases: Vec<usize> = match work.inst.tensor_parts() {
        Some((_, strides)) => work.rows.chunks_exact(work.s).map(|row| row.iter().zip(strides).map(|(&c, &st)| c as usize * st).sum()).collect(),
        None => Vec::new(),
    };
    let mut improved = false;
    loop {
        let mut sweep = false;
        for start in 0..n {
            for d in 0..work.s {
                sweep |= chain(work, &mut bases, start, d, &mut in_chain, &mut steps);
            }
        }
        if !sweep {
            return improved;
        }
        improved = true;
    }
}
