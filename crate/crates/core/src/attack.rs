//! GPS spoofing attacks as stream transformations.
//!
//! A spoofer is a ground transmitter that overpowers genuine GPS inside its
//! radio footprint. Every receiver captured by the same transmitter decodes
//! the same broadcast, so the false position it reports is a function of
//! time only, never of the victim's own location. Ranging traffic rides a
//! separate IR-UWB link and is never touched.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{EarthModel, GeoCoordinate, GeodesyError, LocalFrame};
use crate::gcs::wire::PositionReport;
use crate::swarm::{LocalPoint, UavTruthState};
use crate::types::UavId;

/// Seed salt for the attack RNG stream, so attack jitter never shares draws
/// with scenario noise even though both derive from the scenario seed.
pub const ATTACK_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Inclusive activity window on the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start_ms: u64,
    pub t_end_ms: u64,
}

impl TimeWindow {
    pub fn contains(&self, time_ms: u64) -> bool {
        (self.t_start_ms..=self.t_end_ms).contains(&time_ms)
    }
}

/// What false position a transmitter broadcasts over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SpoofStream {
    /// Every captured receiver resolves to one fixed geodetic point.
    FixedPoint { coordinate: GeoCoordinate },
    /// Tracks one UAV's true trajectory shifted by a constant local offset.
    ConstantOffset {
        reference_uav: UavId,
        east_m: f64,
        north_m: f64,
        up_m: f64,
    },
    /// Rebroadcasts one UAV's true trajectory from `delay_epochs` earlier;
    /// before enough history exists it replays the first epoch.
    Replay {
        reference_uav: UavId,
        delay_epochs: usize,
    },
}

impl SpoofStream {
    fn reference(&self) -> Option<UavId> {
        match self {
            SpoofStream::FixedPoint { .. } => None,
            SpoofStream::ConstantOffset { reference_uav, .. }
            | SpoofStream::Replay { reference_uav, .. } => Some(*reference_uav),
        }
    }
}

/// A ground spoofing transmitter: where it sits in the local frame, how far
/// its signal reaches, and what it broadcasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transmitter {
    pub position: LocalPoint,
    pub range_m: f64,
    pub stream: SpoofStream,
}

/// One attack: a set of transmitters active over a common window, plus the
/// receiver-side imperfections that make captured fixes nearly but not
/// exactly identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub window: TimeWindow,
    pub transmitters: Vec<Transmitter>,
    /// Per-fix horizontal scatter among captured receivers, meters.
    #[serde(default = "default_jitter_m")]
    pub jitter_m: f64,
    /// Jam genuine GPS shortly before spoofing starts, dropping victims'
    /// fixes entirely during the blackout.
    #[serde(default)]
    pub jamming_precedes: bool,
    #[serde(default = "default_blackout_ms")]
    pub jamming_blackout_ms: u64,
}

fn default_jitter_m() -> f64 {
    0.5
}

fn default_blackout_ms() -> u64 {
    5000
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("an attack needs at least one transmitter")]
    NoTransmitters,
    #[error("attack window ends ({end} ms) before it starts ({start} ms)")]
    BadWindow { start: u64, end: u64 },
    #[error("jitter_m must be a non-negative finite value, got {0}")]
    BadJitter(f64),
    #[error("transmitter {index} range_m must be positive and finite, got {value}")]
    BadRange { index: usize, value: f64 },
    #[error("transmitter {index} references UAV {uav}, but the swarm has {n_uavs}")]
    UnknownReference { index: usize, uav: UavId, n_uavs: u16 },
    #[error("position report at {time_ms} ms matches no truth epoch")]
    UnknownEpoch { time_ms: u64 },
    #[error(transparent)]
    Geodesy(#[from] GeodesyError),
}

impl AttackScenario {
    pub fn validate(&self, n_uavs: u16) -> Result<(), AttackError> {
        if self.transmitters.is_empty() {
            return Err(AttackError::NoTransmitters);
        }
        if self.window.t_end_ms < self.window.t_start_ms {
            return Err(AttackError::BadWindow {
                start: self.window.t_start_ms,
                end: self.window.t_end_ms,
            });
        }
        if !self.jitter_m.is_finite() || self.jitter_m < 0.0 {
            return Err(AttackError::BadJitter(self.jitter_m));
        }
        for (index, tx) in self.transmitters.iter().enumerate() {
            if !tx.range_m.is_finite() || tx.range_m <= 0.0 {
                return Err(AttackError::BadRange {
                    index,
                    value: tx.range_m,
                });
            }
            if let Some(uav) = tx.stream.reference() {
                if uav.get() > n_uavs {
                    return Err(AttackError::UnknownReference {
                        index,
                        uav,
                        n_uavs,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Which UAVs each transmitter captures at one epoch, given truth positions.
///
/// A UAV inside several footprints locks onto the nearest transmitter;
/// exact ties go to the lower transmitter index.
pub fn affected_set(
    attack: &AttackScenario,
    states: &[UavTruthState],
) -> BTreeMap<UavId, usize> {
    let mut captured = BTreeMap::new();
    for state in states {
        let mut best: Option<(f64, usize)> = None;
        for (index, tx) in attack.transmitters.iter().enumerate() {
            let d = state.position.distance_to(&tx.position);
            if d <= tx.range_m {
                let closer = match best {
                    None => true,
                    Some((best_d, _)) => d < best_d,
                };
                if closer {
                    best = Some((d, index));
                }
            }
        }
        if let Some((_, index)) = best {
            captured.insert(state.uav, index);
        }
    }
    captured
}

fn broadcast_position(
    stream: &SpoofStream,
    epoch: usize,
    truth: &[Vec<UavTruthState>],
    frame: &LocalFrame,
    earth: &EarthModel,
) -> Result<LocalPoint, AttackError> {
    match stream {
        SpoofStream::FixedPoint { coordinate } => {
            let (east_m, north_m, up_m) = frame.to_local(coordinate, earth);
            Ok(LocalPoint::new(east_m, north_m, up_m))
        }
        SpoofStream::ConstantOffset {
            reference_uav,
            east_m,
            north_m,
            up_m,
        } => {
            let base = truth[epoch][reference_uav.index()].position;
            Ok(LocalPoint::new(
                base.east_m + east_m,
                base.north_m + north_m,
                base.up_m + up_m,
            ))
        }
        SpoofStream::Replay {
            reference_uav,
            delay_epochs,
        } => {
            let source = epoch.saturating_sub(*delay_epochs);
            Ok(truth[source][reference_uav.index()].position)
        }
    }
}

/// Rewrites a clean GPS stream as the attack's victims would report it.
///
/// Fixes outside the attack window pass through bit for bit. Inside it,
/// captured receivers report the transmitter broadcast plus horizontal
/// jitter. With `jamming_precedes`, captured receivers lose GPS entirely
/// for `jamming_blackout_ms` before the window opens. Ranging reports are
/// not an input: the IR-UWB channel is out of the spoofer's reach.
pub fn apply_attack(
    attack: &AttackScenario,
    truth: &[Vec<UavTruthState>],
    frame: &LocalFrame,
    positions: &[PositionReport],
    rng: &mut impl Rng,
) -> Result<Vec<PositionReport>, AttackError> {
    attack.validate(truth.first().map_or(0, |s| s.len() as u16))?;
    let epoch_of: HashMap<u64, usize> = truth
        .iter()
        .enumerate()
        .map(|(k, states)| (states[0].time_ms, k))
        .collect();
    let earth = EarthModel::default();
    let blackout_start = attack
        .window
        .t_start_ms
        .saturating_sub(attack.jamming_blackout_ms);
    let mut out = Vec::with_capacity(positions.len());
    for report in positions {
        let t = report.time_ms;
        let jammed = attack.jamming_precedes
            && (blackout_start..attack.window.t_start_ms).contains(&t);
        if !jammed && !attack.window.contains(t) {
            out.push(*report);
            continue;
        }
        let epoch = *epoch_of
            .get(&t)
            .ok_or(AttackError::UnknownEpoch { time_ms: t })?;
        let captured = affected_set(attack, &truth[epoch]);
        let Some(&tx_index) = captured.get(&report.uav) else {
            out.push(*report);
            continue;
        };
        if jammed {
            continue;
        }
        let base = broadcast_position(
            &attack.transmitters[tx_index].stream,
            epoch,
            truth,
            frame,
            &earth,
        )?;
        let (je, jn) = if attack.jitter_m == 0.0 {
            (0.0, 0.0)
        } else {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let mag = rng.random_range(0.0..=attack.jitter_m);
            (mag * theta.cos(), mag * theta.sin())
        };
        let coordinate =
            frame.to_geodetic(base.east_m + je, base.north_m + jn, base.up_m, &earth)?;
        out.push(PositionReport::new(report.uav, t, coordinate));
    }
    Ok(out)
}
