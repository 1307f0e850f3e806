//! Spoofing detection: pair GPS-derived distances with UWB-measured ones,
//! judge each pair, and aggregate per-epoch swarm verdicts with per-UAV
//! attribution.
//!
//! The two detection criteria exploit how a spoofer fails differently at
//! different scales. A single transmitter feeds every captured receiver the
//! same position, so GPS distances between victims collapse to near zero
//! while UWB still sees real separation. Any other corruption shows up as a
//! GPS/UWB distance mismatch beyond the combined sensor error budget.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{
    altitude_adjusted_distance, spherical_distance, EarthModel, GeodesyError,
};
use crate::gcs::wire::{PositionReport, RangingReport};
use crate::types::{IdError, PairKey, UavId};

/// Detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Maximum benign |d_gps - d_uwb| before a pair is flagged.
    #[serde(default = "default_dist_threshold")]
    pub dist_threshold_m: f64,
    /// GPS pair distances below this count as "the same point".
    #[serde(default = "default_zero_tolerance")]
    pub zero_tolerance_m: f64,
    /// Maximum GPS/UWB timestamp skew for a comparable sample.
    #[serde(default = "default_time_threshold")]
    pub time_threshold_ms: u64,
    /// UWB distances below this raise a collision alarm.
    #[serde(default = "default_collision_tolerance")]
    pub collision_tolerance_m: f64,
}

fn default_dist_threshold() -> f64 {
    5.2
}

fn default_zero_tolerance() -> f64 {
    0.1
}

fn default_time_threshold() -> u64 {
    250
}

fn default_collision_tolerance() -> f64 {
    0.3
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            dist_threshold_m: default_dist_threshold(),
            zero_tolerance_m: default_zero_tolerance(),
            time_threshold_ms: default_time_threshold(),
            collision_tolerance_m: default_collision_tolerance(),
        }
    }
}

impl ThresholdConfig {
    /// Nominal operating point: the sum of the per-sensor error bounds
    /// (4.9 m GPS + 0.3 m UWB). Tight, but a worst-case alignment of two
    /// receivers' errors can exceed it.
    pub fn d_thr_nominal() -> Self {
        ThresholdConfig::default()
    }

    /// Provably safe threshold: 2 * 4.9 + 0.3. Under bounded noise no
    /// benign pair can cross it, so false positives are impossible.
    pub fn d_thr_safe() -> Self {
        ThresholdConfig {
            dist_threshold_m: 10.1,
            ..ThresholdConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        for (field, value) in [
            ("dist_threshold_m", self.dist_threshold_m),
            ("zero_tolerance_m", self.zero_tolerance_m),
            ("collision_tolerance_m", self.collision_tolerance_m),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(DetectionError::BadThreshold { field, value });
            }
        }
        if self.time_threshold_ms == 0 {
            return Err(DetectionError::BadThreshold {
                field: "time_threshold_ms",
                value: 0.0,
            });
        }
        if self.zero_tolerance_m >= self.dist_threshold_m {
            return Err(DetectionError::BadThreshold {
                field: "zero_tolerance_m",
                value: self.zero_tolerance_m,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error("{field} is out of range: {value}")]
    BadThreshold { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    NegativeDistance { field: &'static str, value: f64 },
    #[error("GPS sample at {gps_time_ms} ms and UWB sample at {uwb_time_ms} ms differ by more than {threshold_ms} ms")]
    StaleMatch {
        gps_time_ms: u64,
        uwb_time_ms: u64,
        threshold_ms: u64,
    },
    #[error("GPS pair {gps} matched against UWB pair {uwb}")]
    PairMismatch { gps: PairKey, uwb: PairKey },
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Geodesy(#[from] GeodesyError),
}

/// A GPS-derived inter-UAV distance, stamped with the earlier of the two
/// fix timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsPairDistance {
    pub pair: PairKey,
    pub distance_m: f64,
    pub time_ms: u64,
}

/// Computes the GPS-derived distance between two position reports: great
/// circle across the surface, then altitude-adjusted.
pub fn pair_gps_distance(
    report_a: &PositionReport,
    report_b: &PositionReport,
    earth: &EarthModel,
) -> Result<GpsPairDistance, DetectionError> {
    let pair = PairKey::new(report_a.uav, report_b.uav)?;
    let surface = spherical_distance(&report_a.coordinate, &report_b.coordinate, earth)?;
    let distance_m = altitude_adjusted_distance(
        surface,
        report_a.coordinate.altitude_m,
        report_b.coordinate.altitude_m,
    )?;
    Ok(GpsPairDistance {
        pair,
        distance_m,
        time_ms: report_a.time_ms.min(report_b.time_ms),
    })
}

/// One GPS distance matched with one UWB distance for the same pair,
/// contemporaneous within the time threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub uav_a: UavId,
    pub uav_b: UavId,
    pub d_gps_m: f64,
    pub d_uwb_m: f64,
    pub gps_time_ms: u64,
    pub uwb_time_ms: u64,
}

impl PairedSample {
    pub fn new(
        pair: PairKey,
        d_gps_m: f64,
        d_uwb_m: f64,
        gps_time_ms: u64,
        uwb_time_ms: u64,
        cfg: &ThresholdConfig,
    ) -> Result<Self, DetectionError> {
        for (field, value) in [("d_gps_m", d_gps_m), ("d_uwb_m", d_uwb_m)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DetectionError::NegativeDistance { field, value });
            }
        }
        if gps_time_ms.abs_diff(uwb_time_ms) > cfg.time_threshold_ms {
            return Err(DetectionError::StaleMatch {
                gps_time_ms,
                uwb_time_ms,
                threshold_ms: cfg.time_threshold_ms,
            });
        }
        Ok(PairedSample {
            uav_a: pair.a(),
            uav_b: pair.b(),
            d_gps_m,
            d_uwb_m,
            gps_time_ms,
            uwb_time_ms,
        })
    }

    pub fn pair(&self) -> PairKey {
        PairKey::new(self.uav_a, self.uav_b).expect("constructed canonical")
    }
}

/// Result of associating GPS pair distances with UWB reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchOutcome {
    pub samples: Vec<PairedSample>,
    /// GPS pair distances with no contemporaneous UWB measurement.
    pub unmatched_gps: Vec<GpsPairDistance>,
    /// UWB reports no GPS distance claimed.
    pub unmatched_uwb: Vec<RangingReport>,
}

/// Associates each GPS pair distance with the nearest-in-time UWB report
/// for the same pair, accepting only |dt| <= time_threshold_ms.
///
/// Matching is greedy in GPS timestamp order and each UWB report is
/// consumed at most once; equally near candidates resolve to the earlier
/// one. Unmatched entries on either side are returned, not dropped
/// silently, so the pipeline can count them as diagnostics.
pub fn match_samples(
    gps_pairs: &[GpsPairDistance],
    uwb_reports: &[RangingReport],
    cfg: &ThresholdConfig,
) -> MatchOutcome {
    let mut pairs: BTreeSet<PairKey> = gps_pairs.iter().map(|g| g.pair).collect();
    pairs.extend(uwb_reports.iter().map(|r| r.pair()));
    let mut outcome = MatchOutcome::default();
    for pair in pairs {
        let mut gps: Vec<&GpsPairDistance> =
            gps_pairs.iter().filter(|g| g.pair == pair).collect();
        gps.sort_by_key(|g| g.time_ms);
        let mut uwb: Vec<&RangingReport> =
            uwb_reports.iter().filter(|r| r.pair() == pair).collect();
        uwb.sort_by_key(|r| r.time_ms);
        let mut consumed = vec![false; uwb.len()];
        let mut floor = 0;
        for g in gps {
            // Everything older than the window can never match again:
            // GPS timestamps only move forward.
            while floor < uwb.len()
                && (consumed[floor]
                    || uwb[floor].time_ms + cfg.time_threshold_ms < g.time_ms)
            {
                floor += 1;
            }
            let mut best: Option<(u64, usize)> = None;
            let mut k = floor;
            while k < uwb.len() && uwb[k].time_ms <= g.time_ms + cfg.time_threshold_ms {
                if !consumed[k] {
                    let dt = uwb[k].time_ms.abs_diff(g.time_ms);
                    if best.map_or(true, |(best_dt, _)| dt < best_dt) {
                        best = Some((dt, k));
                    }
                }
                k += 1;
            }
            match best {
                Some((_, k)) => {
                    consumed[k] = true;
                    let sample = PairedSample::new(
                        pair,
                        g.distance_m,
                        uwb[k].distance_m(),
                        g.time_ms,
                        uwb[k].time_ms,
                        cfg,
                    )
                    .expect("matched within window");
                    outcome.samples.push(sample);
                }
                None => outcome.unmatched_gps.push(*g),
            }
        }
        for (k, r) in uwb.iter().enumerate() {
            if !consumed[k] {
                outcome.unmatched_uwb.push(**r);
            }
        }
    }
    outcome.samples.sort_by_key(|s| (s.gps_time_ms, s.pair()));
    outcome.unmatched_gps.sort_by_key(|g| (g.time_ms, g.pair));
    outcome.unmatched_uwb.sort_by_key(|r| (r.time_ms, r.pair()));
    outcome
}

/// Why a pair was (or was not) flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// GPS claims the two UAVs occupy the same point.
    GpsDistanceNearZero,
    /// GPS and UWB disagree beyond the sensor error budget.
    DistanceDiscrepancy,
    Clean,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::GpsDistanceNearZero => "gps-distance-near-zero",
            Criterion::DistanceDiscrepancy => "distance-discrepancy",
            Criterion::Clean => "clean",
        }
    }
}

/// Per-pair judgement at one matched sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub pair: PairKey,
    pub spoofed: bool,
    pub criterion: Criterion,
    pub discrepancy_m: f64,
    /// UWB says the pair is about to collide; physical emergency, raised
    /// independently of spoofing.
    pub collision_alarm: bool,
    pub time_ms: u64,
}

/// Judges one matched sample.
///
/// The near-zero check runs first: two receivers reporting the same point
/// is the signature of a shared spoofing signal and is conclusive on its
/// own. Otherwise the GPS/UWB discrepancy is compared against the
/// threshold. The collision alarm is evaluated independently of both.
pub fn evaluate_pair(sample: &PairedSample, cfg: &ThresholdConfig) -> DetectionVerdict {
    let discrepancy_m = (sample.d_gps_m - sample.d_uwb_m).abs();
    let (spoofed, criterion) = if sample.d_gps_m < cfg.zero_tolerance_m {
        (true, Criterion::GpsDistanceNearZero)
    } else if discrepancy_m > cfg.dist_threshold_m {
        (true, Criterion::DistanceDiscrepancy)
    } else {
        (false, Criterion::Clean)
    };
    DetectionVerdict {
        pair: sample.pair(),
        spoofed,
        criterion,
        discrepancy_m,
        collision_alarm: sample.d_uwb_m < cfg.collision_tolerance_m,
        time_ms: sample.gps_time_ms,
    }
}

/// A spoofed pair inside a swarm verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPair {
    pub pair: PairKey,
    pub criterion: Criterion,
    pub discrepancy_m: f64,
}

/// What kind of attack the flag pattern suggests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioHint {
    /// Some victims report the same point: one transmitter captured
    /// several receivers.
    IdenticalSignal,
    /// Distances disagree but victims are not co-located: offset attack or
    /// multiple transmitters.
    DivergentSignal,
    None,
}

/// Swarm-level verdict for one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmVerdict {
    pub time_ms: u64,
    pub attack_detected: bool,
    pub flagged_pairs: Vec<FlaggedPair>,
    pub suspected_uavs: Vec<UavId>,
    pub scenario_hint: ScenarioHint,
}

fn cover_size(edges: &[PairKey]) -> usize {
    match edges.first() {
        None => 0,
        Some(edge) => {
            let branch = |v: UavId| {
                let rest: Vec<PairKey> =
                    edges.iter().filter(|e| !e.contains(v)).copied().collect();
                cover_size(&rest)
            };
            1 + branch(edge.a()).min(branch(edge.b()))
        }
    }
}

/// Attributes guilt to individual UAVs given the flagged pairs.
///
/// Near-zero pairs are conclusive: both members received the same spoofed
/// signal. For the rest, a flagged pair only says "at least one endpoint is
/// lying", so the suspects are every UAV that belongs to some minimum-size
/// explanation (minimum vertex cover) of the remaining flags. Ambiguity
/// keeps both candidates, never drops one.
fn suspect_uavs(flagged: &[FlaggedPair]) -> Vec<UavId> {
    let mut suspects: BTreeSet<UavId> = flagged
        .iter()
        .filter(|f| f.criterion == Criterion::GpsDistanceNearZero)
        .flat_map(|f| [f.pair.a(), f.pair.b()])
        .collect();
    let residual: Vec<PairKey> = flagged
        .iter()
        .filter(|f| !suspects.contains(&f.pair.a()) && !suspects.contains(&f.pair.b()))
        .map(|f| f.pair)
        .collect();
    let k = cover_size(&residual);
    let vertices: BTreeSet<UavId> = residual
        .iter()
        .flat_map(|e| [e.a(), e.b()])
        .collect();
    for v in vertices {
        let without: Vec<PairKey> = residual
            .iter()
            .filter(|e| !e.contains(v))
            .copied()
            .collect();
        if cover_size(&without) == k - 1 {
            suspects.insert(v);
        }
    }
    suspects.into_iter().collect()
}

/// Aggregates one epoch's pair samples into a swarm verdict.
pub fn evaluate_swarm(
    time_ms: u64,
    samples: &[PairedSample],
    cfg: &ThresholdConfig,
) -> SwarmVerdict {
    let mut flagged_pairs = Vec::new();
    let mut hint = ScenarioHint::None;
    for sample in samples {
        let verdict = evaluate_pair(sample, cfg);
        if verdict.spoofed {
            if verdict.criterion == Criterion::GpsDistanceNearZero {
                hint = ScenarioHint::IdenticalSignal;
            } else if hint == ScenarioHint::None {
                hint = ScenarioHint::DivergentSignal;
            }
            flagged_pairs.push(FlaggedPair {
                pair: verdict.pair,
                criterion: verdict.criterion,
                discrepancy_m: verdict.discrepancy_m,
            });
        }
    }
    flagged_pairs.sort_by_key(|f| f.pair);
    let suspected_uavs = suspect_uavs(&flagged_pairs);
    SwarmVerdict {
        time_ms,
        attack_detected: !flagged_pairs.is_empty(),
        flagged_pairs,
        suspected_uavs,
        scenario_hint: hint,
    }
}
