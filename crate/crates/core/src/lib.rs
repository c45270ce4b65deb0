//! Memetic solver for the multidimensional assignment problem with a
//! population size computed from the time budget and the measured mean
//! local-search time, plus generators, local searches, a constant tuner and
//! an experiment harness.

pub mod bench;
pub mod error;
pub mod instances;
pub mod localsearch;
pub mod memetic;
pub mod model;
pub mod rng;
pub mod tuning;

pub use error::{MapError, Result};
pub use model::{canonicalize, relative_error, scaled_error, Assignment, Combiner, Coord, Family, Instance, InstanceId, Weights};
pub use rng::SubtractiveRng;
