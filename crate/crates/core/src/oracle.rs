//! Ground-truth and brute-force machinery: exact SRW-on-Z analytics, Monte
//! Carlo references, and the empirical side of the hazard and sqrt-decay
//! bounds the estimator's correctness leans on.
//!
//! All Monte Carlo loops run on caller-supplied seed lists (see
//! [`crate::seeding::oracle_seeds`]) so they stay deterministic and never
//! share randomness with experiment streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::graph::GraphModel;
use crate::renewal::{InterReturnLaw, ReturnProbabilityProfile};
use crate::sim::WalkerTraces;

/// Exact return-probability profile on Z: p(2m) = C(2m, m) 2^(-2m), zero at
/// odd times. Evaluated by the stable ratio recurrence
/// p(2m) = p(2m-2) * (2m-1)/(2m).
pub fn exact_z_profile(n_max: u64) -> ReturnProbabilityProfile<f64> {
    let mut p = vec![0.0f64; n_max as usize];
    let mut val = 1.0f64;
    for m in 1..=(n_max / 2) {
        val *= (2 * m - 1) as f64 / (2 * m) as f64;
        p[(2 * m - 1) as usize] = val;
    }
    ReturnProbabilityProfile::new(p)
}

/// Exact first-return law on Z: f(2m) = C(2m, m) 2^(-2m) / (2m - 1).
pub fn exact_z_first_return(n_max: u64) -> InterReturnLaw<f64> {
    let profile = exact_z_profile(n_max);
    let mut f = vec![0.0f64; n_max as usize];
    for m in 1..=(n_max / 2) {
        let t = 2 * m;
        f[(t - 1) as usize] = profile.p(t) / (t - 1) as f64;
    }
    InterReturnLaw::new(f)
}

/// Number of times walkers `i` and `j` sat on the origin simultaneously up
/// to time `t`.
pub fn double_return_count(
    traces: &WalkerTraces,
    i: usize,
    j: usize,
    t: u64,
) -> Result<u64, SimError> {
    let k = traces.k();
    for &idx in &[i, j] {
        if idx >= k {
            return Err(SimError::WalkerOutOfRange { walker: idx, k });
        }
    }
    let a = &traces.return_times[i];
    let b = &traces.return_times[j];
    let mut count = 0u64;
    let (mut x, mut y) = (0usize, 0usize);
    while x < a.len() && y < b.len() && a[x] <= t && b[y] <= t {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    Ok(count)
}

/// Empirical first-return hazard: for each t <= t_max, the fraction of
/// walkers whose first return happened at t among those that had not
/// returned before t. Entries with an empty conditioning set are undefined.
pub struct HazardProfile {
    pub t_max: u64,
    /// first_at[t] = number of walkers with first return exactly at t.
    pub first_at: Vec<u64>,
    /// alive[t] = number of walkers with no return before t.
    pub alive: Vec<u64>,
}

impl HazardProfile {
    /// P(first return = t | no return < t), or None if undefined.
    pub fn conditional(&self, t: u64) -> Option<f64> {
        let alive = self.alive[t as usize];
        if alive == 0 {
            None
        } else {
            Some(self.first_at[t as usize] as f64 / alive as f64)
        }
    }
}

/// Simulate one first return per seed (capped at `t_max` steps) and tabulate
/// the conditional return frequencies.
pub fn hazard_profile(model: GraphModel, seeds: &[u64], t_max: u64) -> HazardProfile {
    let mut first_at = vec![0u64; t_max as usize + 1];
    let mut censored = 0u64;
    let origin = model.origin();
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = origin;
        let mut returned = false;
        for t in 1..=t_max {
            v = model.step(v, &mut rng);
            if v == origin {
                first_at[t as usize] += 1;
                returned = true;
                break;
            }
        }
        if !returned {
            censored += 1;
        }
    }

    // alive[t] = walkers with first return >= t (censored walkers stay in
    // every conditioning set up to t_max).
    let mut alive = vec![0u64; t_max as usize + 1];
    let mut acc = censored;
    for t in (1..=t_max as usize).rev() {
        acc += first_at[t];
        alive[t] = acc;
    }
    HazardProfile {
        t_max,
        first_at,
        alive,
    }
}

/// Max over t <= t_max of p(t) * sqrt(t) on Z, from the exact profile.
pub fn exact_z_sqrt_bound(t_max: u64) -> f64 {
    let profile = exact_z_profile(t_max);
    let mut worst = 0.0f64;
    for t in 1..=t_max {
        let v = profile.p(t) * (t as f64).sqrt();
        if v > worst {
            worst = v;
        }
    }
    worst
}

/// Max over t <= t_max of the Monte Carlo estimate of p(t) * sqrt(t).
pub fn sqrt_bound_check(model: GraphModel, t_max: u64, seeds: &[u64]) -> f64 {
    let mut at_origin = vec![0u64; t_max as usize + 1];
    let origin = model.origin();
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = origin;
        for t in 1..=t_max {
            v = model.step(v, &mut rng);
            if v == origin {
                at_origin[t as usize] += 1;
            }
        }
    }
    let n = seeds.len() as f64;
    let mut worst = 0.0f64;
    for t in 1..=t_max {
        let v = at_origin[t as usize] as f64 / n * (t as f64).sqrt();
        if v > worst {
            worst = v;
        }
    }
    worst
}

/// Result of the Monte Carlo median of S_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpiricalMedian {
    /// min m with empirical P(S_n <= m) > 1/2, when reachable.
    pub median: Option<u64>,
    /// Walkers that hit the step budget before their n-th return; they sit
    /// above every finite candidate median.
    pub budget_hits: usize,
}

/// Simulate each seed's walker until its n-th return (or the step budget)
/// and take the empirical median of S_n under the same strict convention as
/// the analytic median.
pub fn empirical_median_sn(
    model: GraphModel,
    n: u64,
    seeds: &[u64],
    step_budget: u64,
) -> EmpiricalMedian {
    let origin = model.origin();
    let mut samples: Vec<u64> = Vec::with_capacity(seeds.len());
    let mut budget_hits = 0usize;
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = origin;
        let mut returns = 0u64;
        let mut hit = None;
        for t in 1..=step_budget {
            v = model.step(v, &mut rng);
            if v == origin {
                returns += 1;
                if returns == n {
                    hit = Some(t);
                    break;
                }
            }
        }
        match hit {
            Some(t) => samples.push(t),
            None => budget_hits += 1,
        }
    }

    samples.sort_unstable();
    let total = seeds.len();
    let mut median = None;
    // Strict convention: count(S_n <= m) > total/2 at the smallest such m.
    for (idx, &m) in samples.iter().enumerate() {
        if 2 * (idx + 1) > total && (idx + 1 == samples.len() || samples[idx + 1] != m) {
            median = Some(m);
            break;
        }
    }
    EmpiricalMedian {
        median,
        budget_hits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{renewal_invert, roundtrip_check};
    use crate::seeding::oracle_seeds;

    /// Exact C(2m, m) 2^(-2m) through integer arithmetic, for m <= 60.
    fn binom_exact(m: u64) -> f64 {
        let mut c: u128 = 1;
        for i in 0..m {
            c = c * (2 * m - i) as u128 / (i + 1) as u128;
        }
        c as f64 / 2f64.powi(2 * m as i32)
    }

    #[test]
    fn exact_profile_matches_closed_form() {
        let profile = exact_z_profile(120);
        assert_eq!(profile.p(1), 0.0);
        assert_eq!(profile.p(2), 0.5);
        assert_eq!(profile.p(4), 0.375);
        for m in 1..=60 {
            let diff = (profile.p(2 * m) - binom_exact(m)).abs();
            assert!(diff <= 1e-15, "m = {m}: diff = {diff}");
        }
    }

    #[test]
    fn exact_law_satisfies_renewal_roundtrip() {
        // Closed-form f(2m) = C(2m,m) 2^(-2m) / (2m-1) regenerates the exact
        // profile through the forward recursion.
        let profile = exact_z_profile(128);
        let law = exact_z_first_return(128);
        assert!(roundtrip_check(&profile, &law) <= 1e-12);
        // And agrees with the inverted profile.
        let inverted = renewal_invert(&profile);
        for t in 1..=128 {
            assert!((law.f(t) - inverted.f(t)).abs() <= 1e-12);
        }
    }

    #[test]
    fn double_count_of_disjoint_traces_is_zero() {
        let traces = WalkerTraces {
            return_times: vec![vec![2, 6], vec![4, 8]],
            horizon: 10,
        };
        assert_eq!(double_return_count(&traces, 0, 1, 10).unwrap(), 0);
    }

    #[test]
    fn double_count_of_identical_traces_counts_all() {
        let traces = WalkerTraces {
            return_times: vec![vec![2, 4], vec![2, 4]],
            horizon: 10,
        };
        assert_eq!(double_return_count(&traces, 0, 1, 4).unwrap(), 2);
        assert_eq!(double_return_count(&traces, 0, 1, 3).unwrap(), 1);
    }

    #[test]
    fn double_count_rejects_bad_indices() {
        let traces = WalkerTraces {
            return_times: vec![vec![2]],
            horizon: 10,
        };
        assert!(double_return_count(&traces, 0, 1, 10).is_err());
    }

    #[test]
    fn hazard_on_z_at_two_is_half() {
        let seeds = oracle_seeds(11, 20_000);
        let hp = hazard_profile(GraphModel::Z1, &seeds, 64);
        let h2 = hp.conditional(2).unwrap();
        assert!((h2 - 0.5).abs() < 0.02, "h(2) = {h2}");
        for t in (1..=63).step_by(2) {
            assert_eq!(hp.conditional(t).unwrap_or(0.0), 0.0, "odd t = {t}");
        }
    }

    #[test]
    fn sqrt_bound_exact_z() {
        // p(2m) sqrt(2m) increases towards sqrt(2/pi) and never reaches 0.8.
        let max = exact_z_sqrt_bound(10_000);
        assert!(max <= 0.8, "max = {max}");
        let profile = exact_z_profile(10_000);
        let tail = profile.p(10_000) * 10_000f64.sqrt();
        let limit = (2.0 / std::f64::consts::PI).sqrt();
        assert!((tail - limit).abs() < 1e-4, "tail = {tail}, limit = {limit}");
    }

    #[test]
    fn sqrt_bound_t_one_is_zero_without_self_loops() {
        for model in crate::graph::builtin_models() {
            let seeds = oracle_seeds(13, 200);
            let mut at1 = 0;
            for &s in &seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                if model.step(model.origin(), &mut rng) == model.origin() {
                    at1 += 1;
                }
            }
            assert_eq!(at1, 0, "{model:?} has a self-loop at the origin?");
        }
    }

    #[test]
    fn empirical_median_of_degenerate_chain() {
        // The two-vertex path returns deterministically every 2 steps.
        let seeds = oracle_seeds(17, 500);
        for n in [1u64, 5, 16] {
            let r = empirical_median_sn(GraphModel::Pair, n, &seeds, 10_000);
            assert_eq!(r.median, Some(2 * n));
            assert_eq!(r.budget_hits, 0);
        }
    }

    #[test]
    fn empirical_median_counts_budget_hits() {
        let seeds = oracle_seeds(19, 100);
        let r = empirical_median_sn(GraphModel::Z1, 4, &seeds, 8);
        assert!(r.budget_hits > 0);
    }
}
