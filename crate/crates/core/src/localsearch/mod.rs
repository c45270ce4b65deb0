//! Construction heuristic, 2-AP subsolver and the local-search family.
//!
//! Every search takes a feasible assignment and returns a feasible canonical
//! assignment that is no heavier. Moves are accepted only on strict
//! improvement, so every search terminates.

mod ap;
mod dimensionwise;
mod greedy;
mod kopt;
mod vopt;

use std::fmt;
use std::str::FromStr;

use crate::error::{MapError, Result};
use crate::model::{Assignment, Coord, Instance};

pub use ap::{solve_ap, CostMatrix};
pub use dimensionwise::{canonical_splits, DimensionSplit};
pub use greedy::greedy_construct;

/// How many dimensions a dimensionwise search may fix at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DvDepth {
    One,
    Two,
    All,
}

impl DvDepth {
    /// Largest fixed-set size explored for `s` dimensions.
    pub fn limit(self, s: usize) -> usize {
        match self {
            DvDepth::One => 1,
            DvDepth::Two => 2,
            DvDepth::All => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LocalSearchKind {
    TwoOpt,
    ThreeOpt,
    VOpt,
    Dimensionwise(DvDepth),
    /// Alternates two non-combined searches until neither improves.
    Combined(Box<LocalSearchKind>, Box<LocalSearchKind>),
}

impl LocalSearchKind {
    pub fn combined(first: LocalSearchKind, second: LocalSearchKind) -> Result<Self> {
        if matches!(first, LocalSearchKind::Combined(..)) || matches!(second, LocalSearchKind::Combined(..)) {
            return Err(MapError::domain("combined searches nest at most once"));
        }
        Ok(LocalSearchKind::Combined(Box::new(first), Box::new(second)))
    }

    /// sDV alternated with v-opt, the default for independent weights.
    pub fn sdv_v() -> Self {
        LocalSearchKind::Combined(
            Box::new(LocalSearchKind::Dimensionwise(DvDepth::All)),
            Box::new(LocalSearchKind::VOpt),
        )
    }

    /// The code used in result tables.
    pub fn code(&self) -> String {
        use LocalSearchKind::*;
        match self {
            TwoOpt => "2opt".into(),
            ThreeOpt => "3opt".into(),
            VOpt => "vopt".into(),
            Dimensionwise(DvDepth::One) => "1DV".into(),
            Dimensionwise(DvDepth::Two) => "2DV".into(),
            Dimensionwise(DvDepth::All) => "sDV".into(),
            Combined(a, b) => {
                let suffix = match **b {
                    TwoOpt => "2".to_string(),
                    ThreeOpt => "3".to_string(),
                    VOpt => "v".to_string(),
                    ref other => format!("+{}", other.code()),
                };
                format!("{}{}", a.code(), suffix)
            }
        }
    }

    /// All codes accepted by [`FromStr`].
    pub const CODES: [&'static str; 10] =
        ["2opt", "3opt", "vopt", "1DV", "2DV", "sDV", "1DV2", "2DV2", "sDV3", "sDVv"];
}

impl FromStr for LocalSearchKind {
    type Err = MapError;

    fn from_str(code: &str) -> Result<Self> {
        use LocalSearchKind::*;
        let dv = |d| Dimensionwise(d);
        Ok(match code {
            "2opt" => TwoOpt,
            "3opt" => ThreeOpt,
            "vopt" => VOpt,
            "1DV" => dv(DvDepth::One),
            "2DV" => dv(DvDepth::Two),
            "sDV" => dv(DvDepth::All),
            "1DV2" => Self::combined(dv(DvDepth::One), TwoOpt)?,
            "2DV2" => Self::combined(dv(DvDepth::Two), TwoOpt)?,
            "sDV3" => Self::combined(dv(DvDepth::All), ThreeOpt)?,
            "sDVv" => Self::sdv_v(),
            other => return Err(MapError::Config(format!("unknown local search code '{other}'"))),
        })
    }
}

impl fmt::Display for LocalSearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Mutable working copy of an assignment with cached vector weights. Rows
/// may leave canonical order while a search runs.
pub(crate) struct Work<'a> {
    inst: &'a Instance,
    s: usize,
    n: usize,
    rows: Vec<Coord>,
    weights: Vec<f64>,
    total: f64,
}

impl<'a> Work<'a> {
    fn new(inst: &'a Instance, a: &Assignment) -> Result<Self> {
        if a.s() != inst.s() || a.n() != inst.n() {
            return Err(MapError::domain(format!(
                "assignment shape {}x{} does not match instance {}x{}",
                a.s(),
                a.n(),
                inst.s(),
                inst.n()
            )));
        }
        let rows = a.as_flat().to_vec();
        let weights: Vec<f64> = a.vectors().map(|v| inst.weight_of(v)).collect();
        let total = weights.iter().sum();
        Ok(Work { inst, s: inst.s(), n: inst.n(), rows, weights, total })
    }

    #[inline]
    fn row(&self, i: usize) -> &[Coord] {
        &self.rows[i * self.s..(i + 1) * self.s]
    }

    /// Whether removing `gain` from the current total is a real improvement
    /// rather than rounding noise.
    #[inline]
    fn improves(&self, gain: f64) -> bool {
        gain > 1e-10 * self.total.abs().max(1.0)
    }

    fn refresh_total(&mut self) {
        self.total = self.weights.iter().sum();
    }

    fn finish(self) -> Assignment {
        Assignment::from_flat_unchecked(self.s, self.n, self.rows)
    }

    /// Runs `kind` to a local optimum; returns whether anything improved.
    fn run(&mut self, kind: &LocalSearchKind) -> bool {
        match kind {
            LocalSearchKind::TwoOpt => kopt::two_opt(self),
            LocalSearchKind::ThreeOpt => kopt::three_opt(self),
            LocalSearchKind::VOpt => vopt::v_opt(self),
            LocalSearchKind::Dimensionwise(depth) => dimensionwise::search(self, *depth),
            LocalSearchKind::Combined(first, second) => {
                let mut improved = false;
                loop {
                    improved |= self.run(first);
                    // `first` has just converged, so if `second` finds
                    // nothing the assignment is a fixed point of both.
                    if !self.run(second) {
                        break;
                    }
                    improved = true;
                }
                improved
            }
        }
    }
}

/// Applies `kind` to `a` until no improving move remains.
pub fn local_search(inst: &Instance, a: &Assignment, kind: &LocalSearchKind) -> Result<Assignment> {
    let mut work = Work::new(inst, a)?;
    work.run(kind);
    Ok(work.finish())
}

pub fn dimensionwise_search(inst: &Instance, a: &Assignment, depth: DvDepth) -> Result<Assignment> {
    local_search(inst, a, &LocalSearchKind::Dimensionwise(depth))
}

pub fn two_opt(inst: &Instance, a: &Assignment) -> Result<Assignment> {
    local_search(inst, a, &LocalSearchKind::TwoOpt)
}

pub fn three_opt(inst: &Instance, a: &Assignment) -> Result<Assignment> {
    local_search(inst, a, &LocalSearchKind::ThreeOpt)
}

pub fn v_opt(inst: &Instance, a: &Assignment) -> Result<Assignment> {
    local_search(inst, a, &LocalSearchKind::VOpt)
}

pub fn combined_search(
    inst: &Instance,
    a: &Assignment,
    first: &LocalSearchKind,
    second: &LocalSearchKind,
) -> Result<Assignment> {
    let kind = LocalSearchKind::combined(first.clone(), second.clone())?;
    local_search(inst, a, &kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for code in LocalSearchKind::CODES {
            let kind: LocalSearchKind = code.parse().unwrap();
            assert_eq!(kind.code(), code);
        }
        assert!("4opt".parse::<LocalSearchKind>().is_err());
    }

    #[test]
    fn sdv_v_is_sdv_then_vopt() {
        let kind: LocalSearchKind = "sDVv".parse().unwrap();
        assert_eq!(
            kind,
            LocalSearchKind::Combined(
                Box::new(LocalSearchKind::Dimensionwise(DvDepth::All)),
                Box::new(LocalSearchKind::VOpt)
            )
        );
    }

    #[test]
    fn nesting_is_rejected() {
        let inner = LocalSearchKind::sdv_v();
        assert!(LocalSearchKind::combined(inner, LocalSearchKind::TwoOpt).is_err());
    }
}
