//! Significance testing for the Jaccard/Tanimoto similarity of binary
//! presence-absence vectors.
//!
//! The coefficient is centered by its expectation under independence and
//! tested with one of four engines:
//!
//! * [`exact`]: full enumeration of the multinomial state space,
//! * [`asymptotic`]: Gaussian limit of the centered coefficient,
//! * [`bootstrap`]: independent resampling of each vector,
//! * [`mca`]: measure concentration, exact up to a user-chosen `eps`.
//!
//! [`fdr`] turns batches of p-values into q-values, [`simulate`] generates
//! calibration data, and [`pairs`] runs all-pairs analyses of a
//! [`matrix::PresenceAbsenceMatrix`].
//!
//! With the default `parallel` feature, batch loops (pairs, bootstrap
//! iterations, exact-enumeration slices) run on rayon's thread pool; results
//! are identical with the feature disabled.

pub mod asymptotic;
pub mod bootstrap;
pub mod calibrate;
pub mod engine;
pub mod error;
pub mod exact;
pub mod fdr;
pub mod matrix;
pub mod mca;
pub mod model;
pub mod multinomial;
pub mod numeric;
pub mod pairs;
mod par;
pub mod rng;
pub mod simulate;

pub use engine::{run_test, EngineConfig};
pub use error::{Error, Result};
pub use model::{
    centered_statistic, coefficient, contingency, expectation, BinaryVector, Centered,
    ContingencyTable, Diagnostics, Engine, OccurrenceProbs, TestResult,
};
pub use par::is_parallel;
