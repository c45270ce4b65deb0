//! Knuth's subtractive generator, in the variant shipped as the .NET
//! `System.Random` class. It is the only entropy source in the crate, so a
//! seed fully determines generated instances and every algorithm run.

use crate::error::{MapError, Result};

const MBIG: i32 = i32::MAX;
const MSEED: i32 = 161_803_398;

#[derive(Debug, Clone)]
pub struct SubtractiveRng {
    table: [i32; 56],
    inext: usize,
    inextp: usize,
    seed: i32,
}

impl SubtractiveRng {
    pub fn new(seed: i32) -> Self {
        let mut table = [0i32; 56];
        let subtraction = if seed == i32::MIN { MBIG } else { seed.abs() };
        // Arithmetic wraps like the reference's unchecked int32 code.
        let mut mj = MSEED.wrapping_sub(subtraction);
        table[55] = mj;
        let mut mk = 1i32;
        for i in 1..55 {
            let ii = (21 * i) % 55;
            table[ii] = mk;
            mk = mj.wrapping_sub(mk);
            if mk < 0 {
                mk += MBIG;
            }
            mj = table[ii];
        }
        for _ in 1..5 {
            for i in 1..56 {
                table[i] = table[i].wrapping_sub(table[1 + (i + 30) % 55]);
                if table[i] < 0 {
                    table[i] += MBIG;
                }
            }
        }
        SubtractiveRng { table, inext: 0, inextp: 21, seed }
    }

    pub fn seed(&self) -> i32 {
        self.seed
    }

    /// Raw draw in `[0, 2^31 - 1)`.
    pub fn next_raw(&mut self) -> i32 {
        self.inext = if self.inext + 1 >= 56 { 1 } else { self.inext + 1 };
        self.inextp = if self.inextp + 1 >= 56 { 1 } else { self.inextp + 1 };
        let mut v = self.table[self.inext].wrapping_sub(self.table[self.inextp]);
        if v == MBIG {
            v -= 1;
        }
        if v < 0 {
            v += MBIG;
        }
        self.table[self.inext] = v;
        v
    }

    /// Uniform real in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.next_raw() as f64 * (1.0 / MBIG as f64)
    }

    /// Uniform integer in `[lo, hi)`; `lo` when the range is empty.
    pub fn next_int(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(MapError::domain(format!("empty range [{lo}, {hi})")));
        }
        Ok(self.range(lo, hi))
    }

    fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_f64() * (hi - lo) as f64) as i64
    }

    /// Uniform index in `[0, len)`. `len` must be positive.
    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        self.range(0, len as i64) as usize
    }

    /// Fisher-Yates shuffle driven by this generator.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// A uniformly random permutation of `0..len`.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..len).collect();
        self.shuffle(&mut p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_seeds_stay_in_range() {
        for seed in [i32::MIN, i32::MIN + 1, -2_000_000_000, 161_803_399, 1_000_000_000, i32::MAX] {
            let mut rng = SubtractiveRng::new(seed);
            for _ in 0..10_000 {
                let x = rng.next_raw();
                assert!((0..i32::MAX).contains(&x), "seed {seed} gave {x}");
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = SubtractiveRng::new(5);
        let mut b = SubtractiveRng::new(5);
        for _ in 0..1000 {
            assert_eq!(a.next_raw(), b.next_raw());
        }
    }

    #[test]
    fn neighbouring_seeds_diverge_early() {
        let mut a = SubtractiveRng::new(44);
        let mut b = SubtractiveRng::new(45);
        assert!((0..10).any(|_| a.next_raw() != b.next_raw()));
    }

    #[test]
    fn empty_range_returns_lo() {
        let mut r = SubtractiveRng::new(1);
        assert_eq!(r.next_int(5, 5).unwrap(), 5);
        assert!(r.next_int(6, 5).is_err());
    }

    #[test]
    fn draws_stay_in_bounds() {
        let mut r = SubtractiveRng::new(3);
        for _ in 0..100_000 {
            let v = r.next_int(1, 101).unwrap();
            assert!((1..=100).contains(&v));
        }
    }

    #[test]
    fn chi_square_uniformity() {
        let mut r = SubtractiveRng::new(2009);
        let mut counts = [0u32; 100];
        let draws = 100_000;
        for _ in 0..draws {
            counts[(r.next_int(1, 101).unwrap() - 1) as usize] += 1;
        }
        let expected = draws as f64 / 100.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // Upper 0.001 quantile of chi-square with 99 degrees of freedom.
        assert!(chi2 < 148.23, "chi2 = {chi2}");
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut r = SubtractiveRng::new(9);
        let mut p = r.permutation(17);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
