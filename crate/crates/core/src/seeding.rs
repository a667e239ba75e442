//! Deterministic seed derivation.
//!
//! Walker j of a simulation runs on a child seed derived from
//! `(master seed, j)`, so its trajectory is identical across runs that differ
//! only in the total walker count. Oracle Monte Carlo loops derive their
//! per-trial seeds in a separate namespace to avoid accidental coupling with
//! experiment streams.

/// SplitMix64 finalizer; good diffusion, stable across platforms.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^= x >> 31;
    x
}

const WALKER_NS: u64 = 0x9e3779b97f4a7c15;
const ORACLE_NS: u64 = 0xd1b54a32d192ed03;

/// Child seed for walker `walker` of a simulation with master seed `seed`.
#[inline]
pub fn child_seed(seed: u64, walker: u32) -> u64 {
    mix64(seed ^ WALKER_NS.wrapping_mul(walker as u64 + 1))
}

/// Per-trial seeds for oracle Monte Carlo loops (distinct namespace).
pub fn oracle_seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| mix64(base ^ ORACLE_NS.wrapping_mul(i + 1)))
        .collect()
}
