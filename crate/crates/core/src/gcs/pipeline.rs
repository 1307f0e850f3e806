//! The online detection loop the ground station runs: canonicalize the
//! incoming report stream, derive GPS pair distances, match them against
//! UWB measurements, and judge the swarm epoch by epoch.
//!
//! The loop is a pure function of the message multiset and the config:
//! messages are first sorted by (timestamp, encoded bytes), so any arrival
//! permutation produces the same verdict log byte for byte.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::detection::{
    evaluate_pair, evaluate_swarm, match_samples, pair_gps_distance, Criterion, DetectionError,
    GpsPairDistance, PairedSample, SwarmVerdict, ThresholdConfig,
};
use crate::gcs::ingest::{ingest, IngestStats};
use crate::gcs::schedule::{ranging_schedule, Topology};
use crate::gcs::wire::{decode, encode, Message, PositionReport, RangingReport};
use crate::geodesy::EarthModel;
use crate::types::PairKey;

/// First record of the verdict log: what config produced it and whether the
/// fail-safe latched at any point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogHeader {
    pub config: LogConfig,
    /// Latched true by the first spoofed verdict, never cleared.
    pub fail_safe: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogConfig {
    pub thresholds: ThresholdConfig,
    pub topology: Topology,
}

/// One evaluated pair sample, flattened for the CSV summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub time_ms: u64,
    pub pair: PairKey,
    pub spoofed: bool,
    pub criterion: Criterion,
    pub discrepancy_m: f64,
}

/// Coverage and hygiene counters for one detection run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// GPS pair distances with no UWB measurement close enough in time.
    pub unmatched_gps: u64,
    /// UWB measurements no GPS distance claimed.
    pub unmatched_uwb: u64,
    /// Position reports whose coordinates failed geodetic validation.
    pub invalid_positions: u64,
    /// Epochs each scheduled pair went unevaluated, keyed by pair label.
    pub missing_pair_epochs: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRun {
    pub header: LogHeader,
    pub verdicts: Vec<SwarmVerdict>,
    pub pair_rows: Vec<PairRow>,
    pub diagnostics: Diagnostics,
}

impl DetectionRun {
    pub fn flagged_epochs(&self) -> usize {
        self.verdicts.iter().filter(|v| v.attack_detected).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Detection(#[from] DetectionError),
}

/// Runs detection over an already-decoded message stream.
pub fn run_detection_loop(
    messages: &[Message],
    thresholds: &ThresholdConfig,
    topology: Topology,
) -> Result<DetectionRun, PipelineError> {
    thresholds.validate()?;
    let mut keyed: Vec<(u64, Vec<u8>)> = messages
        .iter()
        .map(|m| (m.time_ms(), encode(m)))
        .collect();
    keyed.sort();
    keyed.dedup();
    let ordered: Vec<Message> = keyed
        .iter()
        .map(|(_, bytes)| decode(bytes).expect("came from encode"))
        .collect();

    let mut positions: Vec<PositionReport> = Vec::new();
    let mut rangings: Vec<RangingReport> = Vec::new();
    let mut n_uavs: u16 = 0;
    for message in &ordered {
        match message {
            Message::Position(p) => {
                n_uavs = n_uavs.max(p.uav.get());
                positions.push(*p);
            }
            Message::Ranging(r) => {
                n_uavs = n_uavs.max(r.uav_b().get());
                rangings.push(*r);
            }
        }
    }
    let schedule = if n_uavs >= 2 {
        ranging_schedule(n_uavs, topology).expect("n_uavs >= 2")
    } else {
        Vec::new()
    };

    // Fixes at the same instant form the epoch snapshot GPS distances are
    // derived from; a UAV that reported twice for one instant keeps the
    // canonically first fix.
    let mut fix_at: BTreeMap<(u64, u16), &PositionReport> = BTreeMap::new();
    for p in &positions {
        fix_at.entry((p.time_ms, p.uav.get())).or_insert(p);
    }
    let mut diagnostics = Diagnostics::default();
    let earth = EarthModel::default();
    let mut gps_pairs: Vec<GpsPairDistance> = Vec::new();
    for (&(time_ms, _), report) in &fix_at {
        for pair in &schedule {
            if report.uav != pair.a() {
                continue;
            }
            let Some(other) = fix_at.get(&(time_ms, pair.b().get())) else {
                continue;
            };
            match pair_gps_distance(report, other, &earth) {
                Ok(d) => gps_pairs.push(d),
                Err(DetectionError::Geodesy(_)) => diagnostics.invalid_positions += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }

    let outcome = match_samples(&gps_pairs, &rangings, thresholds);
    diagnostics.unmatched_gps = outcome.unmatched_gps.len() as u64;
    diagnostics.unmatched_uwb = outcome.unmatched_uwb.len() as u64;

    // An epoch is any instant that produced evidence: a matched sample or
    // an orphaned measurement on either side.
    let mut epochs: BTreeSet<u64> = outcome.samples.iter().map(|s| s.gps_time_ms).collect();
    epochs.extend(outcome.unmatched_gps.iter().map(|g| g.time_ms));
    epochs.extend(outcome.unmatched_uwb.iter().map(|r| r.time_ms));

    let mut by_epoch: BTreeMap<u64, Vec<PairedSample>> = BTreeMap::new();
    for sample in &outcome.samples {
        by_epoch.entry(sample.gps_time_ms).or_default().push(*sample);
    }

    let mut verdicts = Vec::with_capacity(epochs.len());
    let mut pair_rows = Vec::new();
    let mut fail_safe = false;
    let empty: Vec<PairedSample> = Vec::new();
    for &time_ms in &epochs {
        let samples = by_epoch.get(&time_ms).unwrap_or(&empty);
        for sample in samples {
            let v = evaluate_pair(sample, thresholds);
            pair_rows.push(PairRow {
                time_ms: v.time_ms,
                pair: v.pair,
                spoofed: v.spoofed,
                criterion: v.criterion,
                discrepancy_m: v.discrepancy_m,
            });
        }
        let covered: BTreeSet<PairKey> = samples.iter().map(|s| s.pair()).collect();
        for pair in &schedule {
            if !covered.contains(pair) {
                *diagnostics
                    .missing_pair_epochs
                    .entry(pair.label())
                    .or_insert(0) += 1;
            }
        }
        let verdict = evaluate_swarm(time_ms, samples, thresholds);
        fail_safe |= verdict.attack_detected;
        verdicts.push(verdict);
    }

    Ok(DetectionRun {
        header: LogHeader {
            config: LogConfig {
                thresholds: *thresholds,
                topology,
            },
            fail_safe,
        },
        verdicts,
        pair_rows,
        diagnostics,
    })
}

/// Ingests a framed byte stream, then runs detection on whatever survived.
pub fn run_detection_loop_bytes(
    stream: &[u8],
    thresholds: &ThresholdConfig,
    topology: Topology,
) -> Result<(DetectionRun, IngestStats), PipelineError> {
    let outcome = ingest(stream);
    let run = run_detection_loop(&outcome.messages, thresholds, topology)?;
    Ok((run, outcome.stats))
}

/// Renders the verdict log: one JSON header line, then one JSON line per
/// swarm verdict in time order.
pub fn render_verdict_log(run: &DetectionRun) -> String {
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&run.header).expect("header is serializable"));
    out.push('\n');
    for verdict in &run.verdicts {
        out.push_str(&serde_json::to_string(verdict).expect("verdict is serializable"));
        out.push('\n');
    }
    out
}

/// Renders the per-pair CSV summary.
pub fn render_pair_csv(run: &DetectionRun) -> String {
    let mut out = String::from("time_ms,pair,spoofed,criterion,discrepancy_m\n");
    for row in &run.pair_rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.time_ms,
            row.pair.label(),
            row.spoofed,
            row.criterion.as_str(),
            row.discrepancy_m
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{
        apply_attack, AttackScenario, SpoofStream, TimeWindow, Transmitter, ATTACK_SEED_SALT,
    };
    use crate::detection::ScenarioHint;
    use crate::geodesy::GeoCoordinate;
    use crate::swarm::{
        run_scenario, GpsNoiseModel, LocalPoint, ScenarioConfig, UwbNoiseModel, Waypoint,
    };
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn hover(east: f64, north: f64, up: f64) -> Vec<Waypoint> {
        vec![Waypoint {
            east_m: east,
            north_m: north,
            up_m: up,
            speed_mps: 0.0,
        }]
    }

    fn wedge_config() -> ScenarioConfig {
        ScenarioConfig {
            seed: 33,
            n_uavs: 3,
            origin: GeoCoordinate::new(52.0, 14.0, 100.0).unwrap(),
            waypoints: vec![
                hover(0.0, 0.0, 30.0),
                hover(40.0, 0.0, 30.0),
                hover(40.0, 14.0, 30.0),
            ],
            duration_s: 30.0,
            ranging_rate_hz: 2.0,
            min_separation_m: 2.0,
            gps_noise: GpsNoiseModel::default(),
            uwb_noise: UwbNoiseModel::default(),
            topology: Topology::AllPairs,
            attack: None,
        }
    }

    fn attacked_messages(config: &ScenarioConfig, attack: &AttackScenario) -> Vec<Message> {
        let run = run_scenario(config).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ ATTACK_SEED_SALT);
        let positions =
            apply_attack(attack, &run.truth, &run.frame, &run.positions, &mut rng).unwrap();
        let mut messages: Vec<Message> =
            positions.iter().map(|p| Message::Position(*p)).collect();
        messages.extend(run.rangings.iter().map(|r| Message::Ranging(*r)));
        messages
    }

    #[test]
    fn clean_stream_produces_clean_log() {
        let config = wedge_config();
        let run = run_scenario(&config).unwrap();
        let thresholds = ThresholdConfig::d_thr_safe();
        let out = run_detection_loop(&run.messages(), &thresholds, Topology::AllPairs).unwrap();
        assert_eq!(out.verdicts.len(), 60);
        assert_eq!(out.flagged_epochs(), 0);
        assert!(!out.header.fail_safe);
        assert_eq!(out.pair_rows.len(), 60 * 3);
        assert!(out.diagnostics.missing_pair_epochs.is_empty());
        assert_eq!(out.diagnostics.unmatched_gps, 0);
        assert_eq!(out.diagnostics.unmatched_uwb, 0);
    }

    #[test]
    fn shared_transmitter_fixture_latches_the_fail_safe() {
        let config = wedge_config();
        let scenario = run_scenario(&config).unwrap();
        let attack = AttackScenario {
            window: TimeWindow {
                t_start_ms: 10_000,
                t_end_ms: 20_000,
            },
            transmitters: vec![Transmitter {
                position: LocalPoint::new(40.0, 7.0, 0.0),
                range_m: 35.0,
                stream: SpoofStream::FixedPoint {
                    coordinate: scenario
                        .frame
                        .to_geodetic(1000.0, 1000.0, 30.0, &EarthModel::default())
                        .unwrap(),
                },
            }],
            jitter_m: 0.0,
            jamming_precedes: false,
            jamming_blackout_ms: 5000,
        };
        let messages = attacked_messages(&config, &attack);
        let out =
            run_detection_loop(&messages, &ThresholdConfig::d_thr_safe(), Topology::AllPairs)
                .unwrap();
        assert!(out.header.fail_safe);
        let first_flagged = out
            .verdicts
            .iter()
            .find(|v| v.attack_detected)
            .expect("attack must be flagged");
        assert_eq!(first_flagged.time_ms, 10_000);
        let near_zero = first_flagged
            .flagged_pairs
            .iter()
            .find(|f| f.criterion == Criterion::GpsDistanceNearZero)
            .expect("co-located victims");
        assert_eq!(near_zero.pair.label(), "2-3");
        assert_eq!(first_flagged.scenario_hint, ScenarioHint::IdenticalSignal);
        let suspects: Vec<u16> = first_flagged.suspected_uavs.iter().map(|u| u.get()).collect();
        assert_eq!(suspects, [2, 3]);
    }

    #[test]
    fn verdict_log_is_invariant_under_stream_permutation() {
        let config = wedge_config();
        let run = run_scenario(&config).unwrap();
        let messages = run.messages();
        let thresholds = ThresholdConfig::default();
        let baseline = render_verdict_log(
            &run_detection_loop(&messages, &thresholds, Topology::AllPairs).unwrap(),
        );
        let mut rng = ChaCha12Rng::seed_from_u64(4242);
        for _ in 0..3 {
            let mut shuffled = messages.clone();
            shuffled.shuffle(&mut rng);
            let log = render_verdict_log(
                &run_detection_loop(&shuffled, &thresholds, Topology::AllPairs).unwrap(),
            );
            assert_eq!(log, baseline);
        }
    }

    #[test]
    fn dropped_measurements_show_up_in_diagnostics() {
        let config = wedge_config();
        let run = run_scenario(&config).unwrap();
        let mut messages = run.messages();
        let dropped = messages
            .iter()
            .position(|m| matches!(m, Message::Ranging(r) if r.time_ms == 5000 && r.pair().label() == "1-2"))
            .unwrap();
        messages.remove(dropped);
        let out =
            run_detection_loop(&messages, &ThresholdConfig::default(), Topology::AllPairs)
                .unwrap();
        assert_eq!(out.diagnostics.unmatched_gps, 1);
        assert_eq!(out.diagnostics.missing_pair_epochs["1-2"], 1);
        assert_eq!(out.verdicts.len(), 60);
    }

    #[test]
    fn byte_stream_entry_point_reports_ingest_stats() {
        let config = wedge_config();
        let run = run_scenario(&config).unwrap();
        let mut stream = Vec::new();
        for message in run.messages() {
            crate::gcs::wire::write_frame(&mut stream, &message);
        }
        stream.extend_from_slice(&[2, 0x7f, 0x00]);
        let (out, stats) =
            run_detection_loop_bytes(&stream, &ThresholdConfig::default(), Topology::AllPairs)
                .unwrap();
        assert_eq!(stats.messages, 360);
        assert_eq!(stats.unknown_type, 1);
        assert_eq!(out.verdicts.len(), 60);
    }

    #[test]
    fn log_and_csv_layouts() {
        let config = wedge_config();
        let run = run_scenario(&config).unwrap();
        let out = run_detection_loop(
            &run.messages(),
            &ThresholdConfig::d_thr_safe(),
            Topology::AllPairs,
        )
        .unwrap();
        let log = render_verdict_log(&out);
        let header: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
        assert_eq!(header["config"]["topology"], "all-pairs");
        assert_eq!(header["config"]["thresholds"]["dist_threshold_m"], 10.1);
        assert_eq!(header["fail_safe"], false);
        assert_eq!(log.lines().count(), 1 + out.verdicts.len());
        let csv = render_pair_csv(&out);
        assert!(csv.starts_with("time_ms,pair,spoofed,criterion,discrepancy_m\n"));
        assert!(csv.lines().nth(1).unwrap().starts_with("0,1-2,false,clean,"));
    }
}
