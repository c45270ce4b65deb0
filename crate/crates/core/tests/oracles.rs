//! Checks against independently computed reference values in tests/data.

use map_memetic::localsearch::{solve_ap, CostMatrix};
use map_memetic::memetic::{m_opt, MemeticParams};
use map_memetic::SubtractiveRng;

fn data(name: &str) -> csv::Reader<std::fs::File> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    csv::Reader::from_path(path).unwrap()
}

#[test]
fn m_opt_matches_high_precision_fixture() {
    let params = MemeticParams::default();
    let mut rows = 0;
    for rec in data("m_opt_oracle.csv").records() {
        let rec = rec.unwrap();
        let tau: f64 = rec[0].parse().unwrap();
        let t: f64 = rec[1].parse().unwrap();
        let m: usize = rec[2].parse().unwrap();
        assert_eq!(m_opt(tau, t, &params).unwrap(), m, "tau={tau} t={t}");
        rows += 1;
    }
    assert_eq!(rows, 1000);
}

#[test]
fn generator_matches_reference_trace() {
    let mut current: Option<(i32, SubtractiveRng)> = None;
    let mut rows = 0;
    for rec in data("rng_trace.csv").records() {
        let rec = rec.unwrap();
        let seed: i32 = rec[0].parse().unwrap();
        let raw: i32 = rec[2].parse().unwrap();
        if current.as_ref().is_none_or(|(s, _)| *s != seed) {
            current = Some((seed, SubtractiveRng::new(seed)));
        }
        let rng = &mut current.as_mut().unwrap().1;
        assert_eq!(rng.next_raw(), raw, "seed {seed} draw {}", &rec[1]);
        rows += 1;
    }
    assert_eq!(rows, 180);
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best
}

#[test]
fn assignment_solver_matches_enumeration() {
    let mut rng = SubtractiveRng::new(2024);
    for n in 1..=6 {
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.next_int(-20, 50).unwrap() as f64).collect())
                .collect();
            let (perm, total) = solve_ap(&CostMatrix::from_rows(&rows).unwrap());
            assert_eq!(total, brute_force(&rows));
            let mut seen = vec![false; n];
            let sum: f64 = perm.iter().enumerate().map(|(i, &j)| {
                seen[j] = true;
                rows[i][j]
            }).sum();
            assert!(seen.iter().all(|&x| x));
            assert_eq!(sum, total);
        }
    }
}
