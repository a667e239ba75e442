//! Exact pmf arithmetic on truncated distributions: renewal inversion of a
//! return-probability profile into the inter-return law, n-fold convolutions
//! for the law of S_n (time of the n-th return), medians, and expected visit
//! counts.
//!
//! Inter-return times on recurrent graphs have infinite mean, so every pmf
//! here lives on a finite window with an explicit censored-mass scalar;
//! truncation is first-class, never silent.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::RenewalError;

/// Scalar type the renewal calculus is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + fmt::Debug + fmt::Display + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + AddAssign + fmt::Debug + fmt::Display + 'static
{
}

/// Numerical slack for mass-conservation checks.
fn eps<F: Scalar>() -> F {
    F::from_f64(1e-9).unwrap()
}

/// p(n) = P(a single walker occupies the origin at time n), for
/// n = 1..=n_max. p(0) = 1 by convention (the walker starts at the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnProbabilityProfile<F> {
    p: Vec<F>,
}

impl<F: Scalar> ReturnProbabilityProfile<F> {
    /// Build from values for n = 1..=len. Panics if any value is outside
    /// [0, 1] beyond numerical slack.
    pub fn new(values: Vec<F>) -> Self {
        for (i, &v) in values.iter().enumerate() {
            assert!(
                v >= -eps::<F>() && v <= F::one() + eps::<F>(),
                "p({}) = {v} out of [0,1]",
                i + 1
            );
        }
        ReturnProbabilityProfile { p: values }
    }

    pub fn n_max(&self) -> u64 {
        self.p.len() as u64
    }

    /// p(n); p(0) = 1, values beyond n_max panic (use `expected_visits` /
    /// `extend` for range-checked access).
    pub fn p(&self, n: u64) -> F {
        if n == 0 {
            F::one()
        } else {
            self.p[(n - 1) as usize]
        }
    }

    pub fn values(&self) -> &[F] {
        &self.p
    }
}

/// Truncated pmf f(n) of the first-return time, with explicitly tracked
/// censored tail mass. Negative or mass-exceeding values produced by
/// inverting a noisy estimated profile are clamped and recorded; exact
/// profiles never clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct InterReturnLaw<F> {
    f: Vec<F>,
    censored_tail: F,
    clamped_mass: F,
    clamp_count: usize,
}

impl<F: Scalar> InterReturnLaw<F> {
    /// Build from raw pmf values for n = 1..=len; total mass must not exceed
    /// 1 + slack.
    pub fn new(values: Vec<F>) -> Self {
        let mut total = F::zero();
        for (i, &v) in values.iter().enumerate() {
            assert!(v >= F::zero(), "f({}) = {v} negative", i + 1);
            total += v;
        }
        assert!(
            total <= F::one() + eps::<F>(),
            "total mass {total} exceeds 1"
        );
        InterReturnLaw {
            f: values,
            censored_tail: (F::one() - total).max(F::zero()),
            clamped_mass: F::zero(),
            clamp_count: 0,
        }
    }

    pub fn n_max(&self) -> u64 {
        self.f.len() as u64
    }

    /// f(n) for n >= 1; zero outside the stored window.
    pub fn f(&self, n: u64) -> F {
        if n == 0 || n > self.n_max() {
            F::zero()
        } else {
            self.f[(n - 1) as usize]
        }
    }

    pub fn values(&self) -> &[F] {
        &self.f
    }

    /// Probability mass beyond the truncation window: 1 - sum f(n).
    pub fn censored_tail(&self) -> F {
        self.censored_tail
    }

    /// Total negative/excess mass clamped away during inversion.
    pub fn clamped_mass(&self) -> F {
        self.clamped_mass
    }

    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }
}

/// Law of S_n = X_1 + ... + X_n, truncated at `t_max`. `censored` collects
/// everything lost to truncation or to censored increments, so
/// sum(pmf) + censored = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SnDistribution<F> {
    n: u64,
    t_max: u64,
    /// Dense pmf; index t holds P(S_n = t). Support is within {n..t_max}.
    pmf: Vec<F>,
    censored: F,
}

impl<F: Scalar> SnDistribution<F> {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t_max(&self) -> u64 {
        self.t_max
    }

    pub fn pmf(&self, t: u64) -> F {
        if t > self.t_max {
            F::zero()
        } else {
            self.pmf[t as usize]
        }
    }

    pub fn censored(&self) -> F {
        self.censored
    }

    /// P(S_n <= t) within the truncation window.
    pub fn cdf(&self, t: u64) -> F {
        let hi = (t.min(self.t_max) + 1) as usize;
        let mut cum = F::zero();
        for &v in &self.pmf[..hi.min(self.pmf.len())] {
            cum += v;
        }
        cum
    }
}

/// Table of medians M_n keyed by scale n.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MedianTable {
    inner: BTreeMap<u64, u64>,
}

impl MedianTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, scale: u64, median: u64) {
        self.inner.insert(scale, median);
    }

    pub fn get(&self, scale: u64) -> Option<u64> {
        self.inner.get(&scale).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.inner.iter().map(|(&k, &v)| (k, v))
    }

    /// M_n must be nondecreasing in n (S_n is pointwise increasing in n).
    pub fn is_nondecreasing(&self) -> bool {
        let mut prev = 0u64;
        for (_, m) in self.iter() {
            if m < prev {
                return false;
            }
            prev = m;
        }
        true
    }
}

/// Recover the inter-return law from a return-probability profile via the
/// renewal recursion f(n) = p(n) - sum_{m=1}^{n-1} f(m) p(n-m).
///
/// Negative intermediate values (possible only for noisy estimated profiles)
/// are clamped to 0; values that would push the total mass above 1 are
/// capped. Both conditions are recorded as diagnostics, not errors.
pub fn renewal_invert<F: Scalar>(profile: &ReturnProbabilityProfile<F>) -> InterReturnLaw<F> {
    let n_max = profile.n_max() as usize;
    let mut f = vec![F::zero(); n_max];
    let mut cum = F::zero();
    let mut clamped_mass = F::zero();
    let mut clamp_count = 0usize;

    for n in 1..=n_max {
        let mut v = profile.p(n as u64);
        for m in 1..n {
            v = v - f[m - 1] * profile.p((n - m) as u64);
        }
        if v < F::zero() {
            clamped_mass += -v;
            clamp_count += 1;
            v = F::zero();
        }
        if cum + v > F::one() {
            clamped_mass += cum + v - F::one();
            clamp_count += 1;
            v = F::one() - cum;
        }
        f[n - 1] = v;
        cum += v;
    }

    InterReturnLaw {
        f,
        censored_tail: (F::one() - cum).max(F::zero()),
        clamped_mass,
        clamp_count,
    }
}

/// Forward renewal recursion: reconstruct p(n) for n = 1..=n_max from the
/// inter-return law, using p(n) = sum_m f(m) p(n-m) with p(0) = 1.
pub fn forward_profile<F: Scalar>(law: &InterReturnLaw<F>, n_max: u64) -> ReturnProbabilityProfile<F> {
    let n_max = n_max as usize;
    let f_max = law.n_max() as usize;
    // p[t] = p(t), with p[0] = 1.
    let mut p = vec![F::zero(); n_max + 1];
    p[0] = F::one();
    for n in 1..=n_max {
        let mut v = F::zero();
        for m in 1..=n.min(f_max) {
            v += law.f(m as u64) * p[n - m];
        }
        // f >= 0 with total mass <= 1 keeps the recursion inside [0, 1].
        p[n] = v;
    }
    ReturnProbabilityProfile { p: p[1..].to_vec() }
}

/// Extend a directly estimated profile out to `t_max` with the forward
/// recursion from `law`. Values up to the profile's own n_max are kept as
/// estimated; only the range beyond is generated.
pub fn extend_profile<F: Scalar>(
    profile: &ReturnProbabilityProfile<F>,
    law: &InterReturnLaw<F>,
    t_max: u64,
) -> ReturnProbabilityProfile<F> {
    let direct = profile.p.len();
    let t_max = t_max as usize;
    if t_max <= direct {
        return profile.clone();
    }
    let f_max = law.n_max() as usize;
    let mut p = vec![F::zero(); t_max + 1];
    p[0] = F::one();
    p[1..=direct].copy_from_slice(&profile.p);
    for n in (direct + 1)..=t_max {
        let mut v = F::zero();
        for m in 1..=n.min(f_max) {
            v += law.f(m as u64) * p[n - m];
        }
        p[n] = v;
    }
    ReturnProbabilityProfile { p: p[1..].to_vec() }
}

/// Max absolute residual of the forward recursion from `law` against
/// `profile`. Zero (to roundoff) whenever inversion required no clamping.
pub fn roundtrip_check<F: Scalar>(
    profile: &ReturnProbabilityProfile<F>,
    law: &InterReturnLaw<F>,
) -> F {
    let forward = forward_profile(law, profile.n_max());
    let mut worst = F::zero();
    for n in 1..=profile.n_max() {
        let r = (forward.p(n) - profile.p(n)).abs();
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// Truncated pmf with its lost mass, the unit the convolution engine works on.
struct TruncatedPmf<F> {
    /// Dense values over 0..=hi.
    vals: Vec<F>,
    censored: F,
}

impl<F: Scalar> TruncatedPmf<F> {
    fn mass(&self) -> F {
        let mut m = F::zero();
        for &v in &self.vals {
            m += v;
        }
        m
    }
}

fn convolve<F: Scalar>(a: &TruncatedPmf<F>, b: &TruncatedPmf<F>, t_max: usize) -> TruncatedPmf<F> {
    let hi = (a.vals.len() + b.vals.len()).saturating_sub(2).min(t_max);
    let mut out = vec![F::zero(); hi + 1];
    for (i, &ai) in a.vals.iter().enumerate() {
        if ai == F::zero() || i > hi {
            continue;
        }
        let j_hi = (hi - i).min(b.vals.len() - 1);
        for (j, &bj) in b.vals[..=j_hi].iter().enumerate() {
            if bj == F::zero() {
                continue;
            }
            out[i + j] += ai * bj;
        }
    }
    let mut result = TruncatedPmf {
        vals: out,
        censored: F::zero(),
    };
    result.censored = (F::one() - result.mass()).max(F::zero());
    result
}

/// Law of S_n as the n-fold convolution of the inter-return law, truncated
/// at `t_max`. Computed by binary-power convolution (repeated squaring), so
/// the cost is O(log n) convolutions. All mass lost to truncation or to
/// censored increments accumulates in `censored`.
pub fn sn_distribution<F: Scalar>(
    law: &InterReturnLaw<F>,
    n: u64,
    t_max: u64,
) -> SnDistribution<F> {
    assert!(n >= 1, "n must be >= 1");
    let t_max_us = t_max as usize;

    let hi = (law.n_max() as usize).min(t_max_us);
    let mut vals = vec![F::zero(); hi + 1];
    for t in 1..=hi {
        vals[t] = law.f(t as u64);
    }
    let mut base = TruncatedPmf {
        vals,
        censored: F::zero(),
    };
    base.censored = (F::one() - base.mass()).max(F::zero());

    // acc starts as the law of S_0: a point mass at 0.
    let mut acc = TruncatedPmf {
        vals: vec![F::one()],
        censored: F::zero(),
    };
    let mut e = n;
    loop {
        if e & 1 == 1 {
            acc = convolve(&acc, &base, t_max_us);
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(&base, &base, t_max_us);
    }

    let mut pmf = acc.vals;
    pmf.resize(t_max_us + 1, F::zero());
    SnDistribution {
        n,
        t_max,
        pmf,
        censored: acc.censored,
    }
}

/// Reference implementation of [`sn_distribution`]: sequential convolution,
/// one factor at a time. Used to cross-check the squaring route.
pub fn naive_sn_distribution<F: Scalar>(
    law: &InterReturnLaw<F>,
    n: u64,
    t_max: u64,
) -> SnDistribution<F> {
    assert!(n >= 1, "n must be >= 1");
    let t_max_us = t_max as usize;
    let hi = (law.n_max() as usize).min(t_max_us);
    let mut vals = vec![F::zero(); hi + 1];
    for t in 1..=hi {
        vals[t] = law.f(t as u64);
    }
    let mut base = TruncatedPmf {
        vals,
        censored: F::zero(),
    };
    base.censored = (F::one() - base.mass()).max(F::zero());

    let mut acc = TruncatedPmf {
        vals: vec![F::one()],
        censored: F::zero(),
    };
    for _ in 0..n {
        acc = convolve(&acc, &base, t_max_us);
    }
    let mut pmf = acc.vals;
    pmf.resize(t_max_us + 1, F::zero());
    SnDistribution {
        n,
        t_max,
        pmf,
        censored: acc.censored,
    }
}

/// Median of S_n under the strict convention: the minimal m with
/// P(S_n <= m) > 1/2. Errors with `TailCensored` when the cumulative mass
/// inside the truncation never exceeds 1/2.
pub fn median<F: Scalar>(dist: &SnDistribution<F>) -> Result<u64, RenewalError> {
    let half = F::from_f64(0.5).unwrap();
    let mut cum = F::zero();
    for (t, &v) in dist.pmf.iter().enumerate() {
        cum += v;
        if cum > half {
            return Ok(t as u64);
        }
    }
    Err(RenewalError::TailCensored {
        cumulative: cum.to_f64().unwrap_or(f64::NAN),
    })
}

/// Expected number of origin visits of a single walker up to time t:
/// sum_{s=1}^{t} p(s). Errors if t lies beyond the profile's range.
pub fn expected_visits<F: Scalar>(
    profile: &ReturnProbabilityProfile<F>,
    t: u64,
) -> Result<F, RenewalError> {
    if t > profile.n_max() {
        return Err(RenewalError::RangeExceeded {
            t,
            n_max: profile.n_max(),
        });
    }
    let mut total = F::zero();
    for s in 1..=t {
        total += profile.p(s);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact Z profile p(2m) = C(2m,m) 4^{-m} up to n_max, for local tests.
    fn z_profile(n_max: u64) -> ReturnProbabilityProfile<f64> {
        let mut p = vec![0.0; n_max as usize];
        let mut val = 1.0f64;
        for m in 1..=(n_max / 2) {
            val *= (2 * m - 1) as f64 / (2 * m) as f64;
            p[(2 * m - 1) as usize] = val;
        }
        ReturnProbabilityProfile::new(p)
    }

    #[test]
    fn invert_exact_z_profile() {
        let law = renewal_invert(&z_profile(16));
        assert!((law.f(2) - 0.5).abs() < 1e-12);
        assert!((law.f(4) - 0.125).abs() < 1e-12);
        assert!((law.f(6) - 0.0625).abs() < 1e-12);
        assert_eq!(law.clamp_count(), 0);
        assert_eq!(law.f(3), 0.0);
    }

    #[test]
    fn invert_single_step_profile() {
        let q = 0.3;
        let law = renewal_invert(&ReturnProbabilityProfile::new(vec![q]));
        assert_eq!(law.f(1), q);
        assert!((law.censored_tail() - (1.0 - q)).abs() < 1e-15);
    }

    #[test]
    fn invert_zero_profile() {
        let law = renewal_invert(&ReturnProbabilityProfile::new(vec![0.0; 8]));
        assert!(law.values().iter().all(|&v| v == 0.0));
        assert_eq!(law.censored_tail(), 1.0);
        assert_eq!(roundtrip_check(&ReturnProbabilityProfile::new(vec![0.0; 8]), &law), 0.0);
    }

    #[test]
    fn invert_clamps_noisy_profile() {
        // p(1) = 0.5, p(2) = 0.1 forces f(2) = 0.1 - 0.25 < 0.
        let profile = ReturnProbabilityProfile::new(vec![0.5, 0.1]);
        let law = renewal_invert(&profile);
        assert_eq!(law.f(2), 0.0);
        assert_eq!(law.clamp_count(), 1);
        assert!((law.clamped_mass() - 0.15).abs() < 1e-12);
        // Forward effect of the clamp is reported, not asserted away.
        let residual = roundtrip_check(&profile, &law);
        assert!((residual - 0.15).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_exact_z_is_tight() {
        let profile = z_profile(64);
        let law = renewal_invert(&profile);
        assert!(roundtrip_check(&profile, &law) <= 1e-12);
    }

    #[test]
    fn sn_of_one_is_the_law_itself() {
        let law = renewal_invert(&z_profile(16));
        let dist = sn_distribution(&law, 1, 16);
        for t in 1..=16 {
            assert!((dist.pmf(t) - law.f(t)).abs() < 1e-15);
        }
        assert!((dist.cdf(16) + dist.censored() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sn_two_on_z_has_quarter_mass_at_four() {
        let law = renewal_invert(&z_profile(16));
        let dist = sn_distribution(&law, 2, 32);
        assert!((dist.pmf(4) - 0.25).abs() < 1e-12);
        assert_eq!(dist.pmf(3), 0.0);
    }

    #[test]
    fn degenerate_law_gives_point_mass() {
        let law = InterReturnLaw::new(vec![1.0]);
        let dist = sn_distribution(&law, 7, 16);
        assert!((dist.pmf(7) - 1.0).abs() < 1e-12);
        assert_eq!(median(&dist).unwrap(), 7);
    }

    #[test]
    fn median_of_first_return_on_z_is_four() {
        // P(S_1 <= 2) = 1/2 is not > 1/2; P(S_1 <= 4) = 5/8.
        let law = renewal_invert(&z_profile(64));
        let dist = sn_distribution(&law, 1, 64);
        assert_eq!(median(&dist).unwrap(), 4);
    }

    #[test]
    fn median_errors_when_tail_censored() {
        let law = InterReturnLaw::new(vec![0.4]);
        let dist = sn_distribution(&law, 1, 8);
        match median(&dist) {
            Err(RenewalError::TailCensored { cumulative }) => {
                assert!((cumulative - 0.4).abs() < 1e-12)
            }
            other => panic!("expected TailCensored, got {other:?}"),
        }
    }

    #[test]
    fn expected_visits_on_z() {
        let profile = z_profile(16);
        assert!((expected_visits(&profile, 4).unwrap() - 0.875).abs() < 1e-12);
        assert_eq!(expected_visits(&profile, 0).unwrap(), 0.0);
        assert!(expected_visits(&profile, 17).is_err());
    }

    #[test]
    fn expected_visits_zero_profile() {
        let profile = ReturnProbabilityProfile::new(vec![0.0; 10]);
        assert_eq!(expected_visits(&profile, 10).unwrap(), 0.0);
    }

    #[test]
    fn extend_profile_reproduces_forward_recursion() {
        let profile = z_profile(8);
        let law = renewal_invert(&profile);
        let ext = extend_profile(&profile, &law, 20);
        // Direct range is preserved verbatim.
        for n in 1..=8 {
            assert_eq!(ext.p(n), profile.p(n));
        }
        // Beyond the direct range the recursion applies.
        let forward = forward_profile(&law, 20);
        for n in 9..=20 {
            assert!((ext.p(n) - forward.p(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn median_table_orders_by_scale() {
        let mut table = MedianTable::new();
        table.insert(4, 36);
        table.insert(1, 4);
        table.insert(2, 10);
        assert!(table.is_nondecreasing());
        assert_eq!(table.get(2), Some(10));
        let scales: Vec<u64> = table.iter().map(|(s, _)| s).collect();
        assert_eq!(scales, vec![1, 2, 4]);
    }

    #[test]
    fn works_in_single_precision() {
        let p: Vec<f32> = vec![0.0, 0.5, 0.0, 0.375];
        let law = renewal_invert(&ReturnProbabilityProfile::new(p));
        assert!((law.f(2) - 0.5).abs() < 1e-6);
        assert!((law.f(4) - 0.125).abs() < 1e-6);
    }
}
