//! Count independent simple random walkers on a recurrent graph from the
//! binary sequence of times the origin is occupied.
//!
//! The crate splits into the simulation side (graph models, walker
//! simulation, ground-truth traces), the blind side (everything computable
//! from the occupancy stream alone), and the oracle side (exact analytics
//! and Monte Carlo references used to validate the blind side).
//!
//! The renewal calculus in [`renewal`] is generic over its scalar type;
//! the pipeline runs on the `f64` aliases exported below.

pub mod error;
pub mod estimator;
pub mod graph;
pub mod oracle;
pub mod renewal;
pub mod report;
pub mod seeding;
pub mod sim;

/// Probability scalar the pipeline runs on.
pub type Prob = f64;

/// Return-probability profile at pipeline precision.
pub type Profile = renewal::ReturnProbabilityProfile<Prob>;

/// Inter-return law at pipeline precision.
pub type Law = renewal::InterReturnLaw<Prob>;

/// Law of the n-th return time at pipeline precision.
pub type SnDist = renewal::SnDistribution<Prob>;

pub use estimator::{estimate_k, estimate_profile, read_stream, EstimatorConfig, KEstimate};
pub use graph::{builtin_models, GraphModel, Vertex};
pub use report::{ExperimentReport, RunConfig};
pub use sim::{simulate, OccupancyStream, SimConfig, StreamMeta, WalkerTraces};
