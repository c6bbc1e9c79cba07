//! Agent-based simulation of district-based elections, and likelihood-free
//! calibration of the voter models to observed results.
//!
//! The library has five layers:
//!
//! - [`election`]: the electoral setting, tallies, winners/margins/seats and
//!   the quota-constrained sampler every model draws through.
//! - [`models`]: five generative voter models (district-wise, district-wise
//!   polarization, elector community, party-wise concentration, social
//!   identity), each a pure function of (spec, params, seed).
//! - [`stats`]: summary statistics of an outcome and distances between them.
//! - [`abc`]: ABC rejection and explore-exploit rejection over those
//!   distances.
//! - [`io`]: observed-election ingestion, experiment configs and run records.

pub mod abc;
pub mod election;
pub mod error;
pub mod io;
pub mod models;
pub mod stats;

pub use election::{
    decide_outcome, ElectionOutcome, ElectorateSpec, SamplerState, TallyMatrix,
};
pub use error::{CalibrationError, DataError, SimError, SpecError, StatsError};
pub use models::{simulate, ModelKind, ModelParams};
pub use stats::{distance, summarize, DistanceWeights, SummaryStats};
