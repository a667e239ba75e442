//! Simulation of k independent walkers on a shared clock.
//!
//! Produces the anonymized occupancy stream (the only observable handed to
//! the estimator) plus per-walker ground-truth traces, which exist for
//! oracles only and never cross into the blind code path.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::graph::GraphModel;
use crate::seeding::child_seed;

/// The observable: ordered times t >= 1 at which the origin is occupied by
/// at least one walker. Simultaneous returns are indistinguishable by
/// construction, so times are strictly increasing with no duplicates.
/// Time 0, at which every walker trivially sits at the origin, is excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyStream {
    pub occupied_times: Vec<u64>,
    pub horizon: u64,
}

impl OccupancyStream {
    pub fn is_empty(&self) -> bool {
        self.occupied_times.is_empty()
    }

    /// Whether time `t` is occupied.
    pub fn occupied(&self, t: u64) -> bool {
        self.occupied_times.binary_search(&t).is_ok()
    }

    /// Number of occupied times in `1..=t`.
    pub fn count_up_to(&self, t: u64) -> usize {
        self.occupied_times.partition_point(|&s| s <= t)
    }
}

/// Ground-truth per-walker return times S_1 < S_2 < ... (oracle side only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkerTraces {
    pub return_times: Vec<Vec<u64>>,
    pub horizon: u64,
}

impl WalkerTraces {
    pub fn k(&self) -> usize {
        self.return_times.len()
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: GraphModel,
    pub k: u32,
    pub horizon: u64,
    pub seed: u64,
}

/// Run k independent walkers from the origin for `horizon` steps.
///
/// Walker j's trajectory is driven by a child seed derived from
/// `(cfg.seed, j)`, so walker j's trace is bit-identical across runs with
/// different k, and the k=2 stream is a superset of the k=1 stream for the
/// same master seed.
pub fn simulate(cfg: &SimConfig) -> (OccupancyStream, WalkerTraces) {
    assert!(cfg.horizon >= 1, "horizon must be >= 1");
    let mut return_times = Vec::with_capacity(cfg.k as usize);
    for j in 0..cfg.k {
        return_times.push(walk_returns(cfg.model, cfg.horizon, child_seed(cfg.seed, j)));
    }

    let mut union: Vec<u64> = return_times.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();

    (
        OccupancyStream {
            occupied_times: union,
            horizon: cfg.horizon,
        },
        WalkerTraces {
            return_times,
            horizon: cfg.horizon,
        },
    )
}

/// Return times of a single walker over `1..=horizon` on its own seed.
pub fn walk_returns(model: GraphModel, horizon: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = model.origin();
    let mut v = origin;
    let mut returns = Vec::new();
    for t in 1..=horizon {
        v = model.step(v, &mut rng);
        if v == origin {
            returns.push(t);
        }
    }
    returns
}

/// Fraction of independent runs in which walker `j` returned at time `n`.
///
/// Each element of `runs` is the trace set of one independent simulation;
/// the estimate is the hit frequency of `n` in walker j's return times.
pub fn empirical_p(runs: &[WalkerTraces], j: usize, n: u64) -> Result<f64, SimError> {
    let mut hits = 0usize;
    for traces in runs {
        if j >= traces.k() {
            return Err(SimError::WalkerOutOfRange {
                walker: j,
                k: traces.k(),
            });
        }
        if traces.return_times[j].binary_search(&n).is_ok() {
            hits += 1;
        }
    }
    if runs.is_empty() {
        return Ok(0.0);
    }
    Ok(hits as f64 / runs.len() as f64)
}

/// Metadata record on line 1 of a stream file. `k` is omitted in blind mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub model: String,
    pub horizon: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

/// Write a stream file: metadata record on line 1, then the occupied times
/// in ascending decimal, one per line. This format is the contract between
/// simulator and estimator.
pub fn write_stream(
    path: &Path,
    stream: &OccupancyStream,
    meta: &StreamMeta,
) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, meta)?;
    w.write_all(b"\n")?;
    for &t in &stream.occupied_times {
        writeln!(w, "{t}")?;
    }
    w.flush()
}
