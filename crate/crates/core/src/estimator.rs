//! The blind observer: everything computed from the occupancy stream alone.
//!
//! Pipeline: quiet-interval sampling of the single-walker return profile,
//! renewal inversion into the inter-return law, per-scale medians of the
//! n-th return time, occupied-count scale statistics, and the averaged
//! ratio that estimates the walker count.
//!
//! Ground-truth fields never reach this module: the estimator consumes an
//! [`OccupancyStream`] and nothing else, so blindness holds by type
//! separation.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EstimateError, RenewalError, StreamError};
use crate::renewal::{
    expected_visits, extend_profile, median, renewal_invert, sn_distribution, InterReturnLaw,
    MedianTable, ReturnProbabilityProfile,
};
use crate::sim::{OccupancyStream, StreamMeta};

/// Estimator parameters. The defaults here are frozen in one place and
/// echoed into every report, so accuracy claims stay pinned to parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Window of offsets 1..=n_max whose return probability is estimated
    /// directly from quiet-interval samples.
    pub n_max: usize,
    /// Quiet-gap threshold exponent cap: sample i requires a gap of at
    /// least 2^min(i, cap). 0 disables capping (thresholds grow as 2^i).
    pub cap: u32,
    /// Scale ladder is 2^1..=2^scales.
    pub scales: u32,
    /// Minimum quiet-interval samples before the profile is trusted.
    pub min_samples: usize,
    /// Minimum number of usable scales for an estimate.
    pub min_scales: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            n_max: 64,
            cap: 10,
            scales: 10,
            min_samples: 30,
            min_scales: 2,
        }
    }
}

/// One accepted quiet-interval sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietSample {
    /// 1-based sample index i.
    pub index: usize,
    /// First occupied time after the qualifying quiet interval.
    pub s: u64,
    /// Length of the unoccupied run immediately before `s`.
    pub gap: u64,
    /// Required gap T_i = 2^min(i, cap) for this sample.
    pub threshold: u64,
    /// hits[j] records whether s + j + 1 was occupied (offsets 1..=n_max).
    pub hits: Vec<bool>,
}

/// The quiet-interval sampler's full record: which samples were taken and
/// what each window contained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietIntervalSampler {
    pub threshold_exponent_cap: u32,
    pub n_max: usize,
    pub samples: Vec<QuietSample>,
}

impl QuietIntervalSampler {
    pub fn s_values(&self) -> Vec<u64> {
        self.samples.iter().map(|q| q.s).collect()
    }
}

/// Estimated return-probability profile plus its sampling record.
///
/// Every accepted sample has its whole window inside the horizon, so the
/// per-offset sample count l(n) is the same for every offset.
#[derive(Debug, Clone)]
pub struct EstimatedProfile {
    pub profile: ReturnProbabilityProfile<f64>,
    pub sampler: QuietIntervalSampler,
}

impl EstimatedProfile {
    /// Number of samples backing the estimate at offset n.
    pub fn ell(&self, _n: u64) -> usize {
        self.sampler.samples.len()
    }
}

/// Per-scale record feeding the averaged ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleStatistic {
    /// Scale n (a power of 2).
    pub scale: u64,
    /// Blind median M_n of the n-th return time.
    pub median: u64,
    /// Occupied-time count up to M_n divided by n.
    pub y_tilde: f64,
    /// Estimated expected single-walker visit count up to M_n, divided by n.
    pub e_single: f64,
    /// y_tilde / e_single.
    pub ratio: f64,
}

/// Why a scale was dropped from the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Censored mass keeps the median of S_n out of reach.
    TailCensored,
    /// The median lies beyond the stream's horizon.
    HorizonExceeded,
    /// The estimated profile carries no visit mass up to M_n.
    ZeroExpectedVisits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedScale {
    pub scale: u64,
    pub reason: DropReason,
}

/// Estimate diagnostics carried alongside the point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    /// Quiet-interval samples backing the profile.
    pub samples: usize,
    /// Negative/excess mass clamped during renewal inversion.
    pub clamped_mass: f64,
    pub clamp_count: usize,
    /// Estimated first-return mass beyond the direct window.
    pub censored_tail: f64,
    pub dropped_scales: Vec<DroppedScale>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The walker-count estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    /// Averaged ratio over usable scales.
    pub raw: f64,
    /// Nearest integer to `raw`, ties rounding up.
    pub k_hat: u32,
    pub scales_used: usize,
    pub scales: Vec<ScaleStatistic>,
    pub diagnostics: EstimateDiagnostics,
}

fn threshold(index: usize, cap: u32) -> u64 {
    let exp = if cap == 0 {
        index.min(63)
    } else {
        index.min(cap as usize).min(63)
    };
    1u64 << exp
}

/// Scan the stream once and sample the return profile after quiet intervals.
///
/// Sample i is the first occupied time s_i preceded by an unoccupied run of
/// length >= 2^min(i, cap), searching strictly after s_{i-1} + n_max; its
/// window records which offsets 1..=n_max after s_i were occupied. Only
/// samples whose whole window fits inside the horizon count.
pub fn estimate_profile(
    stream: &OccupancyStream,
    n_max: usize,
    cap: u32,
    min_samples: usize,
) -> Result<EstimatedProfile, EstimateError> {
    assert!(n_max >= 1, "n_max must be >= 1");
    let mut samples: Vec<QuietSample> = Vec::new();
    let mut prev: u64 = 0;
    let mut search_after: u64 = 0;
    let mut index = 1usize;

    for &t in &stream.occupied_times {
        if t <= search_after {
            prev = t;
            continue;
        }
        let gap = t - prev - 1;
        let need = threshold(index, cap);
        if gap >= need {
            if t + n_max as u64 > stream.horizon {
                // Later candidates only start later; no complete window fits.
                break;
            }
            let hits = (1..=n_max as u64)
                .map(|off| stream.occupied(t + off))
                .collect();
            samples.push(QuietSample {
                index,
                s: t,
                gap,
                threshold: need,
                hits,
            });
            index += 1;
            search_after = t + n_max as u64;
        }
        prev = t;
    }

    if samples.len() < min_samples {
        return Err(EstimateError::InsufficientData {
            found: samples.len(),
            needed: min_samples,
        });
    }

    let ell = samples.len() as f64;
    let p_hat: Vec<f64> = (0..n_max)
        .map(|j| samples.iter().filter(|q| q.hits[j]).count() as f64 / ell)
        .collect();

    Ok(EstimatedProfile {
        profile: ReturnProbabilityProfile::new(p_hat),
        sampler: QuietIntervalSampler {
            threshold_exponent_cap: cap,
            n_max,
            samples,
        },
    })
}

/// Blind median of the n-th return time from the estimated law.
///
/// Short-circuits to `TailCensored` when the uncensored mass of S_n cannot
/// reach 1/2 no matter the truncation; otherwise grows the truncation window
/// (up to the horizon) until the median is inside it.
fn blind_median(law: &InterReturnLaw<f64>, n: u64, horizon: u64) -> Result<u64, EstimateError> {
    let mass: f64 = law.values().iter().sum();
    let uncensored = mass.powi(n.min(i32::MAX as u64) as i32);
    if uncensored <= 0.5 {
        return Err(EstimateError::Renewal(RenewalError::TailCensored {
            cumulative: uncensored,
        }));
    }

    let mut t_max = (4 * n * n).max(2 * law.n_max()).max(64).min(horizon);
    loop {
        let dist = sn_distribution(law, n, t_max);
        match median(&dist) {
            Ok(m) => return Ok(m),
            Err(RenewalError::TailCensored { .. }) if t_max < horizon => {
                t_max = (t_max * 2).min(horizon);
            }
            Err(RenewalError::TailCensored { .. }) => {
                // Mass suffices in principle, so the median lies beyond the
                // horizon and the scale is unusable either way.
                return Err(EstimateError::HorizonExceeded {
                    scale: n,
                    median: horizon + 1,
                    horizon,
                });
            }
            Err(e) => return Err(EstimateError::Renewal(e)),
        }
    }
}

fn scale_statistic_inner(
    stream: &OccupancyStream,
    m_n: u64,
    n: u64,
    profile: &ReturnProbabilityProfile<f64>,
    law: &InterReturnLaw<f64>,
) -> Result<ScaleStatistic, EstimateError> {
    if m_n > stream.horizon {
        return Err(EstimateError::HorizonExceeded {
            scale: n,
            median: m_n,
            horizon: stream.horizon,
        });
    }
    let y_tilde = stream.count_up_to(m_n) as f64 / n as f64;
    let visits = if m_n <= profile.n_max() {
        expected_visits(profile, m_n)?
    } else {
        let extended = extend_profile(profile, law, m_n);
        expected_visits(&extended, m_n)?
    };
    let e_single = visits / n as f64;
    if e_single <= 0.0 {
        return Err(EstimateError::Renewal(RenewalError::TailCensored {
            cumulative: 0.0,
        }));
    }
    Ok(ScaleStatistic {
        scale: n,
        median: m_n,
        y_tilde,
        e_single,
        ratio: y_tilde / e_single,
    })
}

/// Scale statistic at scale n with the given median.
///
/// `y_tilde` counts occupied times up to M_n divided by n; `e_single` is the
/// expected single-walker visit count up to M_n under the estimated profile
/// (extended by the forward renewal recursion beyond the directly estimated
/// window), divided by n.
pub fn scale_statistic(
    stream: &OccupancyStream,
    m_n: u64,
    n: u64,
    profile: &EstimatedProfile,
) -> Result<ScaleStatistic, EstimateError> {
    let law = renewal_invert(&profile.profile);
    scale_statistic_inner(stream, m_n, n, &profile.profile, &law)
}

/// The full blind pipeline: estimate the profile, invert it, compute the
/// per-scale medians M_{2^1}..M_{2^scales}, take the scale statistics of the
/// usable scales, and average their ratios into the walker-count estimate.
///
/// Scales failing `TailCensored` or `HorizonExceeded` are dropped and
/// reported; at least `cfg.min_scales` must survive. An empty stream yields
/// k_hat = 0: zero walkers is a legitimate answer.
pub fn estimate_k(
    stream: &OccupancyStream,
    cfg: &EstimatorConfig,
) -> Result<KEstimate, EstimateError> {
    if stream.is_empty() {
        return Ok(KEstimate {
            raw: 0.0,
            k_hat: 0,
            scales_used: 0,
            scales: Vec::new(),
            diagnostics: EstimateDiagnostics {
                samples: 0,
                clamped_mass: 0.0,
                clamp_count: 0,
                censored_tail: 0.0,
                dropped_scales: Vec::new(),
                note: Some("no evidence of any walker".to_string()),
            },
        });
    }

    let est = estimate_profile(stream, cfg.n_max, cfg.cap, cfg.min_samples)?;
    let law = renewal_invert(&est.profile);

    let mut medians = MedianTable::new();
    let mut scales = Vec::new();
    let mut dropped = Vec::new();

    for e in 1..=cfg.scales {
        let n = 1u64 << e;
        match blind_median(&law, n, stream.horizon) {
            Ok(m_n) => {
                medians.insert(n, m_n);
                match scale_statistic_inner(stream, m_n, n, &est.profile, &law) {
                    Ok(stat) => scales.push(stat),
                    Err(EstimateError::HorizonExceeded { .. }) => dropped.push(DroppedScale {
                        scale: n,
                        reason: DropReason::HorizonExceeded,
                    }),
                    Err(_) => dropped.push(DroppedScale {
                        scale: n,
                        reason: DropReason::ZeroExpectedVisits,
                    }),
                }
            }
            Err(EstimateError::HorizonExceeded { .. }) => dropped.push(DroppedScale {
                scale: n,
                reason: DropReason::HorizonExceeded,
            }),
            Err(_) => dropped.push(DroppedScale {
                scale: n,
                reason: DropReason::TailCensored,
            }),
        }
    }

    debug_assert!(medians.is_nondecreasing());

    if scales.len() < cfg.min_scales {
        return Err(EstimateError::TooFewScales {
            usable: scales.len(),
            needed: cfg.min_scales,
        });
    }

    let raw = scales.iter().map(|s| s.ratio).sum::<f64>() / scales.len() as f64;
    let k_hat = (raw + 0.5).floor().max(0.0).min(u32::MAX as f64) as u32;

    Ok(KEstimate {
        raw,
        k_hat,
        scales_used: scales.len(),
        scales,
        diagnostics: EstimateDiagnostics {
            samples: est.ell(1),
            clamped_mass: law.clamped_mass(),
            clamp_count: law.clamp_count(),
            censored_tail: law.censored_tail(),
            dropped_scales: dropped,
            note: None,
        },
    })
}

/// Parse a stream file written by the simulator. The metadata's true walker
/// count, when present, stays in [`StreamMeta`] and never reaches the
/// estimator input.
pub fn read_stream(path: &Path) -> Result<(OccupancyStream, StreamMeta), StreamError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(StreamError::BadHeader("empty file".to_string())),
    };
    let meta: StreamMeta =
        serde_json::from_str(&header).map_err(|e| StreamError::BadHeader(e.to_string()))?;

    let mut occupied_times = Vec::new();
    let mut prev = 0u64;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let t: u64 = line.trim().parse().map_err(|_| StreamError::BadLine {
            line: line_no,
            text: line.clone(),
        })?;
        if t == 0 {
            return Err(StreamError::TimeZero {
                line: line_no,
                time: t,
            });
        }
        if t <= prev {
            return Err(StreamError::NonMonotone {
                line: line_no,
                time: t,
            });
        }
        if t > meta.horizon {
            return Err(StreamError::BeyondHorizon {
                line: line_no,
                time: t,
                horizon: meta.horizon,
            });
        }
        occupied_times.push(t);
        prev = t;
    }

    Ok((
        OccupancyStream {
            occupied_times,
            horizon: meta.horizon,
        },
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::write_stream;

    fn stream(times: &[u64], horizon: u64) -> OccupancyStream {
        OccupancyStream {
            occupied_times: times.to_vec(),
            horizon,
        }
    }

    #[test]
    fn sampler_hand_trace() {
        // cap = 1 keeps the gap requirement at 2 throughout.
        let s = stream(&[100, 102, 1000, 1004], 1100);
        let est = estimate_profile(&s, 4, 1, 1).unwrap();
        assert_eq!(est.sampler.s_values(), vec![100, 1000]);
        assert_eq!(est.ell(1), 2);
        let p = &est.profile;
        assert_eq!(p.p(1), 0.0);
        assert_eq!(p.p(2), 0.5);
        assert_eq!(p.p(3), 0.0);
        assert_eq!(p.p(4), 0.5);
    }

    #[test]
    fn sampler_respects_gap_thresholds() {
        for q in &estimate_profile(&stream(&[100, 102, 1000, 1004], 1100), 4, 1, 1)
            .unwrap()
            .sampler
            .samples
        {
            assert!(q.gap >= q.threshold);
        }
    }

    #[test]
    fn empty_stream_is_insufficient_for_profile() {
        let s = stream(&[], 1000);
        match estimate_profile(&s, 4, 1, 1) {
            Err(EstimateError::InsufficientData { found: 0, .. }) => {}
            other => panic!("expected InsufficientData, got {other:?}"),
        }
    }

    #[test]
    fn too_few_samples_is_insufficient() {
        let s = stream(&[10, 12], 1000);
        match estimate_profile(&s, 4, 1, 30) {
            Err(EstimateError::InsufficientData { found, needed: 30 }) => assert!(found < 30),
            other => panic!("expected InsufficientData, got {other:?}"),
        }
    }

    #[test]
    fn uncapped_thresholds_grow_geometrically() {
        assert_eq!(threshold(1, 0), 2);
        assert_eq!(threshold(20, 0), 1 << 20);
        assert_eq!(threshold(5, 3), 8);
        assert_eq!(threshold(2, 10), 4);
    }

    #[test]
    fn scale_statistic_counts_directly() {
        let s = stream(&[2, 4, 10], 100);
        let est = EstimatedProfile {
            profile: ReturnProbabilityProfile::new(vec![0.0, 0.5, 0.0, 0.375, 0.0, 0.3125]),
            sampler: QuietIntervalSampler {
                threshold_exponent_cap: 1,
                n_max: 6,
                samples: Vec::new(),
            },
        };
        let stat = scale_statistic(&s, 10, 2, &est).unwrap();
        assert!((stat.y_tilde - 1.5).abs() < 1e-15);
        assert!(stat.e_single > 0.0);
        assert_eq!(stat.median, 10);
    }

    #[test]
    fn scale_statistic_on_empty_stream_counts_zero() {
        let s = stream(&[], 100);
        let est = EstimatedProfile {
            profile: ReturnProbabilityProfile::new(vec![0.0, 0.5]),
            sampler: QuietIntervalSampler {
                threshold_exponent_cap: 1,
                n_max: 2,
                samples: Vec::new(),
            },
        };
        let stat = scale_statistic(&s, 2, 1, &est).unwrap();
        assert_eq!(stat.y_tilde, 0.0);
    }

    #[test]
    fn scale_statistic_rejects_median_beyond_horizon() {
        let s = stream(&[2, 4], 100);
        let est = EstimatedProfile {
            profile: ReturnProbabilityProfile::new(vec![0.0, 0.5]),
            sampler: QuietIntervalSampler {
                threshold_exponent_cap: 1,
                n_max: 2,
                samples: Vec::new(),
            },
        };
        match scale_statistic(&s, 101, 1, &est) {
            Err(EstimateError::HorizonExceeded { .. }) => {}
            other => panic!("expected HorizonExceeded, got {other:?}"),
        }
    }

    #[test]
    fn empty_stream_estimates_zero_walkers() {
        let s = stream(&[], 10_000);
        let est = estimate_k(&s, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.k_hat, 0);
        assert_eq!(est.raw, 0.0);
        assert_eq!(
            est.diagnostics.note.as_deref(),
            Some("no evidence of any walker")
        );
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!((0.49f64 + 0.5).floor() as u32, 0);
        assert_eq!((0.5f64 + 0.5).floor() as u32, 1);
        assert_eq!((1.5f64 + 0.5).floor() as u32, 2);
    }

    #[test]
    fn stream_file_roundtrip_and_blindness() {
        let dir = tempfile::tempdir().unwrap();
        let s = stream(&[2, 4, 10, 60, 62], 4000);
        let open_path = dir.path().join("open.stream");
        let blind_path = dir.path().join("blind.stream");
        let meta = StreamMeta {
            model: "z1".to_string(),
            horizon: 4000,
            seed: 7,
            k: Some(1),
        };
        let blind_meta = StreamMeta { k: None, ..meta.clone() };
        write_stream(&open_path, &s, &meta).unwrap();
        write_stream(&blind_path, &s, &blind_meta).unwrap();

        let (s1, m1) = read_stream(&open_path).unwrap();
        let (s2, m2) = read_stream(&blind_path).unwrap();
        assert_eq!(s1, s);
        assert_eq!(s1, s2);
        assert_eq!(m1.k, Some(1));
        assert_eq!(m2.k, None);

        // Identical streams give identical estimates regardless of metadata.
        let cfg = EstimatorConfig {
            n_max: 4,
            cap: 1,
            scales: 2,
            min_samples: 1,
            min_scales: 1,
        };
        let e1 = estimate_k(&s1, &cfg);
        let e2 = estimate_k(&s2, &cfg);
        match (e1, e2) {
            (Ok(a), Ok(b)) => assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            ),
            (Err(_), Err(_)) => {}
            other => panic!("blind/non-blind estimates diverged: {other:?}"),
        }
    }

    #[test]
    fn read_stream_rejects_decreasing_times() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stream");
        std::fs::write(
            &path,
            "{\"model\":\"z1\",\"horizon\":100,\"seed\":1}\n4\n2\n",
        )
        .unwrap();
        match read_stream(&path) {
            Err(StreamError::NonMonotone { line: 3, time: 2 }) => {}
            other => panic!("expected NonMonotone at line 3, got {other:?}"),
        }
    }

    #[test]
    fn read_stream_rejects_garbage_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stream");
        std::fs::write(
            &path,
            "{\"model\":\"z1\",\"horizon\":100,\"seed\":1}\n4\nbanana\n",
        )
        .unwrap();
        match read_stream(&path) {
            Err(StreamError::BadLine { line: 3, .. }) => {}
            other => panic!("expected BadLine at line 3, got {other:?}"),
        }
    }

    #[test]
    fn read_stream_rejects_times_beyond_horizon() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stream");
        std::fs::write(
            &path,
            "{\"model\":\"z1\",\"horizon\":100,\"seed\":1}\n4\n101\n",
        )
        .unwrap();
        assert!(matches!(
            read_stream(&path),
            Err(StreamError::BeyondHorizon { line: 3, time: 101, horizon: 100 })
        ));
    }

    #[test]
    fn read_stream_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.stream");
        std::fs::write(&path, "not json\n4\n").unwrap();
        assert!(matches!(read_stream(&path), Err(StreamError::BadHeader(_))));
    }
}
