//! Problem and solution model.
//!
//! Coordinates are 0-based inside the library. File formats, the CLI and the
//! Python bindings use 1-based coordinates; use [`Assignment::from_one_based`]
//! and [`Assignment::to_one_based`] at those boundaries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MapError, Result};

/// A single coordinate value, 0-based.
pub type Coord = u32;

/// Benchmark instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Random,
    Clique,
    SquareRoot,
    Geometric,
    Product,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Random,
        Family::Clique,
        Family::SquareRoot,
        Family::Geometric,
        Family::Product,
    ];

    /// Short code used in instance names and file headers.
    pub fn code(self) -> &'static str {
        match self {
            Family::Random => "r",
            Family::Clique => "cq",
            Family::SquareRoot => "sr",
            Family::Geometric => "ge",
            Family::Product => "pr",
        }
    }

    pub fn from_code(code: &str) -> Result<Self> {
        match code {
            "r" => Ok(Family::Random),
            "cq" => Ok(Family::Clique),
            "sr" => Ok(Family::SquareRoot),
            "ge" => Ok(Family::Geometric),
            "pr" => Ok(Family::Product),
            other => Err(MapError::domain(format!("unknown family code '{other}'"))),
        }
    }

    /// Whether vector weights derive from pairwise or per-coordinate data.
    pub fn is_decomposable(self) -> bool {
        !matches!(self, Family::Random)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Identifies one generated benchmark instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceId {
    pub family: Family,
    pub s: usize,
    pub n: usize,
    pub index: usize,
}

impl InstanceId {
    pub fn new(family: Family, s: usize, n: usize, index: usize) -> Self {
        InstanceId { family, s, n, index }
    }

    /// Generator seed: `s + n + index`.
    pub fn seed(&self) -> i32 {
        (self.s + self.n + self.index) as i32
    }

    /// Table-style name, e.g. `3r40` (without the index).
    pub fn class_name(&self) -> String {
        format!("{}{}{}", self.s, self.family.code(), self.n)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = || MapError::domain(format!("malformed instance id '{text}'"));
        let (class, index) = text.split_once('-').ok_or_else(bad)?;
        let index: usize = index.parse().map_err(|_| bad())?;
        let digits = class.chars().take_while(|c| c.is_ascii_digit()).count();
        let s: usize = class[..digits].parse().map_err(|_| bad())?;
        let rest = &class[digits..];
        let letters = rest.chars().take_while(|c| c.is_ascii_alphabetic()).count();
        let family = Family::from_code(&rest[..letters])?;
        let n: usize = rest[letters..].parse().map_err(|_| bad())?;
        Ok(InstanceId::new(family, s, n, index))
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.class_name(), self.index)
    }
}

/// How pairwise edge weights combine into a vector weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combiner {
    Sum,
    RootOfSquares,
}

/// Weight model of an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// `n^s` weights in lexicographic coordinate order.
    Tensor(Vec<u8>),
    /// One `n x n` row-major matrix per dimension pair `(i, j)`, `i < j`,
    /// pairs in lexicographic order.
    Edges {
        combiner: Combiner,
        matrices: Vec<Vec<u32>>,
    },
    /// `s` lists of `n` planar points; distances are cached per pair.
    Geometric {
        points: Vec<Vec<(f64, f64)>>,
        distances: Vec<Vec<f64>>,
    },
    /// `s` arrays of `n` positive factors.
    Product(Vec<Vec<u32>>),
}

/// An `s`-dimensional assignment instance with side `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    s: usize,
    n: usize,
    family: Family,
    seed: i32,
    weights: Weights,
    strides: Vec<usize>,
    pairs: Vec<usize>,
    floor: f64,
}

fn pair_count(s: usize) -> usize {
    s * (s - 1) / 2
}

fn check_shape(s: usize, n: usize) -> Result<()> {
    if s < 2 {
        return Err(MapError::domain(format!("dimension count {s} < 2")));
    }
    if n < 1 {
        return Err(MapError::domain("side size must be at least 1"));
    }
    Ok(())
}

// Combines per-part minima the same way `weight_of` combines entries, so
// the result never exceeds a computed weight.
fn weight_floor(weights: &Weights) -> f64 {
    fn min_of<T: Copy + PartialOrd>(xs: &[T]) -> Option<T> {
        xs.iter().copied().reduce(|a, b| if b < a { b } else { a })
    }
    match weights {
        Weights::Tensor(t) => min_of(t).map_or(0.0, f64::from),
        Weights::Edges { combiner, matrices } => {
            let acc: u64 = matrices
                .iter()
                .filter_map(|m| min_of(m))
                .map(|d| match combiner {
                    Combiner::Sum => d as u64,
                    Combiner::RootOfSquares => d as u64 * d as u64,
                })
                .sum();
            match combiner {
                Combiner::Sum => acc as f64,
                Combiner::RootOfSquares => (acc as f64).sqrt(),
            }
        }
        Weights::Geometric { distances, .. } => distances.iter().filter_map(|d| min_of(d)).fold(0.0, |acc, d| acc + d),
        Weights::Product(arrays) => arrays.iter().filter_map(|a| min_of(a)).map(f64::from).product(),
    }
}

impl Instance {
    fn build(s: usize, n: usize, family: Family, weights: Weights) -> Self {
        let mut strides = vec![1usize; s];
        for j in (0..s.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * n;
        }
        let mut pairs = vec![usize::MAX; s * s];
        let mut k = 0;
        for i in 0..s {
            for j in i + 1..s {
                pairs[i * s + j] = k;
                k += 1;
            }
        }
        let floor = weight_floor(&weights);
        Instance { s, n, family, seed: 0, weights, strides, pairs, floor }
    }

    /// Independent weights, `n^s` entries in lexicographic coordinate order.
    pub fn tensor(s: usize, n: usize, weights: Vec<u8>) -> Result<Self> {
        check_shape(s, n)?;
        let expected = n
            .checked_pow(s as u32)
            .ok_or_else(|| MapError::domain("tensor too large"))?;
        if weights.len() != expected {
            return Err(MapError::domain(format!(
                "tensor has {} entries, expected {expected}",
                weights.len()
            )));
        }
        Ok(Self::build(s, n, Family::Random, Weights::Tensor(weights)))
    }

    /// Edge-decomposable weights (Clique for `Sum`, SquareRoot for `RootOfSquares`).
    pub fn edges(s: usize, n: usize, combiner: Combiner, matrices: Vec<Vec<u32>>) -> Result<Self> {
        check_shape(s, n)?;
        if matrices.len() != pair_count(s) || matrices.iter().any(|m| m.len() != n * n) {
            return Err(MapError::domain(format!(
                "expected {} matrices of {} entries",
                pair_count(s),
                n * n
            )));
        }
        let family = match combiner {
            Combiner::Sum => Family::Clique,
            Combiner::RootOfSquares => Family::SquareRoot,
        };
        Ok(Self::build(s, n, family, Weights::Edges { combiner, matrices }))
    }

    /// Geometric weights: sum of planar distances over all point pairs.
    pub fn geometric(s: usize, n: usize, points: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        check_shape(s, n)?;
        if points.len() != s || points.iter().any(|p| p.len() != n) {
            return Err(MapError::domain(format!("expected {s} lists of {n} points")));
        }
        if points.iter().flatten().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(MapError::domain("point coordinates must be finite"));
        }
        let mut distances = Vec::with_capacity(pair_count(s));
        for i in 0..s {
            for j in i + 1..s {
                let mut d = Vec::with_capacity(n * n);
                for p in &points[i] {
                    for q in &points[j] {
                        d.push((p.0 - q.0).hypot(p.1 - q.1));
                    }
                }
                distances.push(d);
            }
        }
        Ok(Self::build(s, n, Family::Geometric, Weights::Geometric { points, distances }))
    }

    /// Product weights: `w(e) = prod_j a^j[e_j]`.
    pub fn product(s: usize, n: usize, arrays: Vec<Vec<u32>>) -> Result<Self> {
        check_shape(s, n)?;
        if arrays.len() != s || arrays.iter().any(|a| a.len() != n) {
            return Err(MapError::domain(format!("expected {s} arrays of {n} factors")));
        }
        if arrays.iter().flatten().any(|&a| a == 0) {
            return Err(MapError::domain("product factors must be positive"));
        }
        Ok(Self::build(s, n, Family::Product, Weights::Product(arrays)))
    }

    pub(crate) fn with_seed(mut self, seed: i32) -> Self {
        self.seed = seed;
        self
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn seed(&self) -> i32 {
        self.seed
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// The benchmark id, when the seed follows the `s + n + index` rule.
    pub fn id(&self) -> Option<InstanceId> {
        let index = self.seed as i64 - (self.s + self.n) as i64;
        (index >= 1).then(|| InstanceId::new(self.family, self.s, self.n, index as usize))
    }

    /// Index of the matrix for dimension pair `(i, j)`, `i < j`.
    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        self.pairs[i * self.s + j]
    }

    /// Weight of a vector of 0-based coordinates. Coordinates are not checked.
    #[inline]
    pub fn weight_of(&self, v: &[Coord]) -> f64 {
        debug_assert_eq!(v.len(), self.s);
        let n = self.n;
        match &self.weights {
            Weights::Tensor(t) => {
                let idx: usize = v.iter().zip(&self.strides).map(|(&c, &st)| c as usize * st).sum();
                t[idx] as f64
            }
            Weights::Edges { combiner, matrices } => {
                let mut acc: u64 = 0;
                let mut k = 0;
                for i in 0..self.s {
                    let row = v[i] as usize * n;
                    for j in i + 1..self.s {
                        let d = matrices[k][row + v[j] as usize] as u64;
                        acc += match combiner {
                            Combiner::Sum => d,
                            Combiner::RootOfSquares => d * d,
                        };
                        k += 1;
                    }
                }
                match combiner {
                    Combiner::Sum => acc as f64,
                    Combiner::RootOfSquares => (acc as f64).sqrt(),
                }
            }
            Weights::Geometric { distances, .. } => {
                let mut acc = 0.0;
                let mut k = 0;
                for i in 0..self.s {
                    let row = v[i] as usize * n;
                    for j in i + 1..self.s {
                        acc += distances[k][row + v[j] as usize];
                        k += 1;
                    }
                }
                acc
            }
            Weights::Product(arrays) => arrays
                .iter()
                .zip(v)
                .map(|(a, &c)| a[c as usize] as f64)
                .product(),
        }
    }

    /// Lower bound on the weight of any vector.
    pub(crate) fn weight_floor(&self) -> f64 {
        self.floor
    }

    /// Raw tensor and its strides, for tensor instances.
    pub(crate) fn tensor_parts(&self) -> Option<(&[u8], &[usize])> {
        match &self.weights {
            Weights::Tensor(t) => Some((t, &self.strides)),
            _ => None,
        }
    }

    /// Weight of `v` with coordinate `d` replaced by `c`.
    #[inline]
    pub(crate) fn weight_with(&self, v: &[Coord], d: usize, c: Coord) -> f64 {
        let n = self.n;
        let at = |j: usize| if j == d { c } else { v[j] } as usize;
        match &self.weights {
            Weights::Tensor(t) => {
                let idx: usize = v.iter().zip(&self.strides).map(|(&x, &st)| x as usize * st).sum::<usize>()
                    + c as usize * self.strides[d]
                    - v[d] as usize * self.strides[d];
                t[idx] as f64
            }
            Weights::Edges { combiner, matrices } => {
                let mut acc: u64 = 0;
                let mut k = 0;
                for i in 0..self.s {
                    let row = at(i) * n;
                    for j in i + 1..self.s {
                        let e = matrices[k][row + at(j)] as u64;
                        acc += match combiner {
                            Combiner::Sum => e,
                            Combiner::RootOfSquares => e * e,
                        };
                        k += 1;
                    }
                }
                match combiner {
                    Combiner::Sum => acc as f64,
                    Combiner::RootOfSquares => (acc as f64).sqrt(),
                }
            }
            Weights::Geometric { distances, .. } => {
                let mut acc = 0.0;
                let mut k = 0;
                for i in 0..self.s {
                    let row = at(i) * n;
                    for j in i + 1..self.s {
                        acc += distances[k][row + at(j)];
                        k += 1;
                    }
                }
                acc
            }
            Weights::Product(arrays) => arrays
                .iter()
                .enumerate()
                .map(|(j, a)| a[at(j)] as f64)
                .product(),
        }
    }

    /// Checked vector weight.
    pub fn vector_weight(&self, v: &[Coord]) -> Result<f64> {
        if v.len() != self.s {
            return Err(MapError::domain(format!(
                "vector has {} coordinates, instance has {} dimensions",
                v.len(),
                self.s
            )));
        }
        if let Some(&c) = v.iter().find(|&&c| c as usize >= self.n) {
            return Err(MapError::domain(format!("coordinate {c} out of range 0..{}", self.n)));
        }
        Ok(self.weight_of(v))
    }

    /// Total weight of a feasible assignment of matching shape.
    pub fn assignment_weight(&self, a: &Assignment) -> Result<f64> {
        if a.s() != self.s || a.n() != self.n {
            return Err(MapError::domain(format!(
                "assignment shape {}x{} does not match instance {}x{}",
                a.s(),
                a.n(),
                self.s,
                self.n
            )));
        }
        Ok(a.vectors().map(|v| self.weight_of(v)).sum())
    }
}

/// A feasible assignment: `n` disjoint vectors stored in ascending order of
/// their first coordinate, so vector `i` always starts with coordinate `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    s: usize,
    n: usize,
    coords: Vec<Coord>,
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.vectors()).finish()
    }
}

/// Checks that every dimension of the flat row-major vector list is a permutation.
fn check_feasible(s: usize, n: usize, coords: &[Coord]) -> Result<()> {
    if coords.len() != s * n {
        return Err(MapError::domain("vector list has the wrong length"));
    }
    let mut seen = vec![false; n];
    for d in 0..s {
        seen.iter_mut().for_each(|x| *x = false);
        for i in 0..n {
            let c = coords[i * s + d] as usize;
            if c >= n {
                return Err(MapError::domain(format!(
                    "coordinate {c} out of range in dimension {d}"
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(MapError::domain(format!(
                    "coordinate {c} used twice in dimension {d}"
                )));
            }
        }
    }
    Ok(())
}

impl Assignment {
    /// Builds an assignment from 0-based vectors, validating and canonicalizing.
    pub fn from_vectors(vectors: &[Vec<Coord>]) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(MapError::domain("assignment needs at least one vector"));
        }
        let s = vectors[0].len();
        if s < 2 || vectors.iter().any(|v| v.len() != s) {
            return Err(MapError::domain("vectors must share a length of at least 2"));
        }
        let coords: Vec<Coord> = vectors.iter().flatten().copied().collect();
        Self::from_flat(s, n, coords)
    }

    /// Builds an assignment from 1-based vectors.
    pub fn from_one_based(vectors: &[Vec<usize>]) -> Result<Self> {
        let zero: Vec<Vec<Coord>> = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&c| {
                        if c == 0 {
                            Err(MapError::domain("1-based coordinate 0"))
                        } else {
                            Ok((c - 1) as Coord)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_vectors(&zero)
    }

    /// Validates a flat row-major vector list and sorts it canonically.
    pub fn from_flat(s: usize, n: usize, coords: Vec<Coord>) -> Result<Self> {
        check_feasible(s, n, &coords)?;
        Ok(Self::from_flat_unchecked(s, n, coords))
    }

    /// Sorts a flat vector list known to be feasible.
    pub(crate) fn from_flat_unchecked(s: usize, n: usize, mut coords: Vec<Coord>) -> Self {
        debug_assert!(check_feasible(s, n, &coords).is_ok());
        if (0..n).any(|i| coords[i * s] as usize != i) {
            let mut sorted = vec![0; s * n];
            for i in 0..n {
                let first = coords[i * s] as usize;
                sorted[first * s..first * s + s].copy_from_slice(&coords[i * s..i * s + s]);
            }
            coords = sorted;
        }
        Assignment { s, n, coords }
    }

    /// `(i, i, ..., i)` for every `i`.
    pub fn identity(s: usize, n: usize) -> Self {
        let coords = (0..n).flat_map(|i| std::iter::repeat_n(i as Coord, s)).collect();
        Assignment { s, n, coords }
    }

    /// Builds an assignment from per-dimension permutations `pi_j(i)`.
    pub fn from_permutations(perms: &[Vec<Coord>]) -> Result<Self> {
        let s = perms.len();
        let n = perms.first().map_or(0, |p| p.len());
        if s < 2 || n == 0 || perms.iter().any(|p| p.len() != n) {
            return Err(MapError::domain("need at least two permutations of equal length"));
        }
        let mut coords = vec![0; s * n];
        for (d, p) in perms.iter().enumerate() {
            for (i, &c) in p.iter().enumerate() {
                coords[i * s + d] = c;
            }
        }
        Self::from_flat(s, n, coords)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The `i`-th vector in canonical order.
    #[inline]
    pub fn vector(&self, i: usize) -> &[Coord] {
        &self.coords[i * self.s..(i + 1) * self.s]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[Coord]> + '_ {
        self.coords.chunks_exact(self.s)
    }

    /// Row-major coordinates.
    pub fn as_flat(&self) -> &[Coord] {
        &self.coords
    }

    /// Permutation of dimension `d`: `i -> A^i_d`.
    pub fn permutation(&self, d: usize) -> Vec<Coord> {
        self.vectors().map(|v| v[d]).collect()
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.vectors()
            .map(|v| v.iter().map(|&c| c as usize + 1).collect())
            .collect()
    }

    pub fn weight(&self, instance: &Instance) -> f64 {
        self.vectors().map(|v| instance.weight_of(v)).sum()
    }
}

/// Sorts a raw vector list into canonical order, rejecting infeasible input.
pub fn canonicalize(vectors: &[Vec<Coord>]) -> Result<Assignment> {
    Assignment::from_vectors(vectors)
}

/// Relative error in percent: `(w / w_best - 1) * 100`.
pub fn relative_error(weight: f64, best: f64) -> Result<f64> {
    if best == 0.0 || !best.is_finite() || !weight.is_finite() {
        return Err(MapError::domain(format!(
            "relative error undefined for weight {weight} against best {best}"
        )));
    }
    Ok((weight / best - 1.0) * 100.0)
}

/// Position of `weight` between `w_min` (0%) and `w_max` (100%).
///
/// A degenerate range (`w_min == w_max`) maps to 0%.
pub fn scaled_error(weight: f64, w_min: f64, w_max: f64) -> Result<f64> {
    if !(w_min <= weight && weight <= w_max) {
        return Err(MapError::domain(format!(
            "weight {weight} outside [{w_min}, {w_max}]"
        )));
    }
    if w_max == w_min {
        return Ok(0.0);
    }
    Ok(100.0 * (weight - w_min) / (w_max - w_min))
}
