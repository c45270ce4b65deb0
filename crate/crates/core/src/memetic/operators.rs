//! Genetic operators on canonical assignments.

use crate::error::{MapError, Result};
use crate::model::{Assignment, Coord};
use crate::rng::SubtractiveRng;

/// Number of swaps performed by [`perturb`]: `ceil(n * strength / 2)`.
pub fn perturbation_swaps(n: usize, strength: f64) -> usize {
    (n as f64 * strength / 2.0).ceil().max(0.0) as usize
}

/// Random coordinate swaps: each picks two distinct vectors and a dimension
/// uniformly and exchanges the two coordinates. Repeated picks are allowed.
pub fn perturb(a: &Assignment, strength: f64, rng: &mut SubtractiveRng) -> Assignment {
    let (s, n) = (a.s(), a.n());
    let swaps = perturbation_swaps(n, strength);
    if swaps == 0 || n < 2 {
        return a.clone();
    }
    let mut coords = a.as_flat().to_vec();
    for _ in 0..swaps {
        let u = rng.index(n);
        let mut v = rng.index(n - 1);
        if v >= u {
            v += 1;
        }
        let d = rng.index(s);
        coords.swap(u * s + d, v * s + d);
    }
    Assignment::from_flat_unchecked(s, n, coords)
}

/// Probability that a child takes its own parent's vector in a mixed slot.
const KEEP_PARENT: f64 = 0.8;

/// Two children sharing every vector common to both parents; remaining
/// vectors are dealt out in random order and duplicates are repaired.
pub fn crossover(x: &Assignment, y: &Assignment, rng: &mut SubtractiveRng) -> Result<(Assignment, Assignment)> {
    if x.s() != y.s() || x.n() != y.n() {
        return Err(MapError::domain("crossover parents belong to different instances"));
    }
    let (s, n) = (x.s(), x.n());
    // Canonical order puts equal vectors at equal positions.
    let common: Vec<usize> = (0..n).filter(|&i| x.vector(i) == y.vector(i)).collect();
    if common.len() == n {
        return Ok((x.clone(), y.clone()));
    }
    let p: Vec<usize> = (0..n).filter(|&i| x.vector(i) != y.vector(i)).collect();
    let q = p.clone();
    let mut first: Vec<Coord> = Vec::with_capacity(s * n);
    let mut second: Vec<Coord> = Vec::with_capacity(s * n);
    for &i in &common {
        first.extend_from_slice(x.vector(i));
        second.extend_from_slice(x.vector(i));
    }
    let pi = rng.permutation(p.len());
    let omega = rng.permutation(q.len());
    for j in 0..p.len() {
        let from_x = x.vector(p[pi[j]]);
        let from_y = y.vector(q[omega[j]]);
        if rng.next_f64() < KEEP_PARENT {
            first.extend_from_slice(from_x);
            second.extend_from_slice(from_y);
        } else {
            first.extend_from_slice(from_y);
            second.extend_from_slice(from_x);
        }
    }
    repair(&mut first, s, n, rng);
    repair(&mut second, s, n, rng);
    Ok((
        Assignment::from_flat_unchecked(s, n, first),
        Assignment::from_flat_unchecked(s, n, second),
    ))
}

/// Replaces every repeated coordinate (scanning positions in order) by a
/// uniformly chosen value unused in that dimension.
fn repair(coords: &mut [Coord], s: usize, n: usize, rng: &mut SubtractiveRng) {
    let mut used = vec![false; n];
    let mut duplicates = Vec::new();
    for d in 0..s {
        used.iter_mut().for_each(|u| *u = false);
        duplicates.clear();
        for i in 0..n {
            let c = coords[i * s + d] as usize;
            if used[c] {
                duplicates.push(i);
            } else {
                used[c] = true;
            }
        }
        if duplicates.is_empty() {
            continue;
        }
        let mut unused: Vec<Coord> = (0..n as Coord).filter(|&c| !used[c as usize]).collect();
        for &i in &duplicates {
            let k = rng.index(unused.len());
            coords[i * s + d] = unused.swap_remove(k);
        }
        debug_assert!(unused.is_empty());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_assignment(s: usize, n: usize, rng: &mut SubtractiveRng) -> Assignment {
        let perms: Vec<Vec<Coord>> = (0..s)
            .map(|d| {
                if d == 0 {
                    (0..n as Coord).collect()
                } else {
                    rng.permutation(n).into_iter().map(|c| c as Coord).collect()
                }
            })
            .collect();
        Assignment::from_permutations(&perms).unwrap()
    }

    #[test]
    fn zero_strength_is_identity() {
        let mut rng = SubtractiveRng::new(1);
        let a = random_assignment(3, 10, &mut rng);
        assert_eq!(perturb(&a, 0.0, &mut rng), a);
    }

    #[test]
    fn swap_counts() {
        assert_eq!(perturbation_swaps(10, 0.1), 1);
        assert_eq!(perturbation_swaps(10, 1.0), 5);
        assert_eq!(perturbation_swaps(11, 1.0), 6);
        assert_eq!(perturbation_swaps(40, 0.2), 4);
        assert_eq!(perturbation_swaps(10, 0.0), 0);
    }

    #[test]
    fn single_swap_touches_two_vectors() {
        let mut rng = SubtractiveRng::new(7);
        let a = random_assignment(4, 10, &mut rng);
        for _ in 0..50 {
            let b = perturb(&a, 0.1, &mut rng);
            let changed = (0..10).filter(|&i| a.vector(i) != b.vector(i)).count();
            assert!(changed == 2 || changed == 0, "{changed}");
        }
    }

    #[test]
    fn full_strength_touches_at_most_n() {
        let mut rng = SubtractiveRng::new(8);
        let a = random_assignment(3, 9, &mut rng);
        let b = perturb(&a, 1.0, &mut rng);
        let mut coords_changed = 0;
        for i in 0..9 {
            for d in 0..3 {
                if a.vector(i)[d] != b.vector(i)[d] {
                    coords_changed += 1;
                }
            }
        }
        // Five swaps move at most ten coordinates.
        assert!(coords_changed <= 10);
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let mut rng = SubtractiveRng::new(3);
        let a = random_assignment(3, 8, &mut rng);
        let (c1, c2) = crossover(&a, &a, &mut rng).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn shared_vectors_survive() {
        let x = Assignment::from_one_based(&[vec![1, 3, 4], vec![2, 1, 1], vec![3, 2, 3], vec![4, 4, 2]]).unwrap();
        let y = Assignment::from_one_based(&[vec![1, 2, 2], vec![2, 1, 1], vec![3, 4, 3], vec![4, 3, 4]]).unwrap();
        let mut rng = SubtractiveRng::new(11);
        for _ in 0..100 {
            let (c1, c2) = crossover(&x, &y, &mut rng).unwrap();
            for c in [&c1, &c2] {
                assert!(c.to_one_based().contains(&vec![2, 1, 1]));
            }
        }
    }

    #[test]
    fn mismatched_parents_are_rejected() {
        let mut rng = SubtractiveRng::new(1);
        let a = Assignment::identity(3, 4);
        let b = Assignment::identity(3, 5);
        assert!(crossover(&a, &b, &mut rng).is_err());
    }

    #[test]
    fn children_are_feasible() {
        let mut rng = SubtractiveRng::new(12);
        for round in 0..1000 {
            let s = 3 + round % 4;
            let n = 2 + round % 13;
            let x = random_assignment(s, n, &mut rng);
            let y = perturb(&x, 0.5 + (round % 3) as f64, &mut rng);
            let (c1, c2) = crossover(&x, &y, &mut rng).unwrap();
            for c in [c1, c2] {
                assert!(Assignment::from_flat(s, n, c.as_flat().to_vec()).is_ok());
            }
        }
    }
}
