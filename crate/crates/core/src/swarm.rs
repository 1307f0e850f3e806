//! Deterministic swarm simulation: waypoint trajectories in the local frame,
//! truth positions sampled on the ranging clock, noisy GPS fixes, and noisy
//! IR-UWB pairwise ranging.
//!
//! Everything stochastic flows from the scenario seed through one ChaCha
//! stream, so identical (seed, config) pairs reproduce report streams
//! bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{EarthModel, GeoCoordinate, GeodesyError, LocalFrame, LOCAL_FRAME_BOUND_M};
use crate::gcs::schedule::{ranging_schedule, ScheduleError, Topology};
use crate::gcs::wire::{Message, PositionReport, RangingReport, WireError};
use crate::types::{PairKey, UavId};

/// A point in the scene's east/north/up tangent frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPoint {
    pub east_m: f64,
    pub north_m: f64,
    pub up_m: f64,
}

impl LocalPoint {
    pub fn new(east_m: f64, north_m: f64, up_m: f64) -> Self {
        LocalPoint {
            east_m,
            north_m,
            up_m,
        }
    }

    /// 3-D Euclidean distance.
    pub fn distance_to(&self, other: &LocalPoint) -> f64 {
        let de = self.east_m - other.east_m;
        let dn = self.north_m - other.north_m;
        let du = self.up_m - other.up_m;
        (de * de + dn * dn + du * du).sqrt()
    }
}

/// One waypoint of a UAV plan: a target point plus the cruise speed used to
/// reach it from the previous waypoint. The first waypoint is the initial
/// position and its speed is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub east_m: f64,
    pub north_m: f64,
    pub up_m: f64,
    #[serde(default)]
    pub speed_mps: f64,
}

impl Waypoint {
    pub fn point(&self) -> LocalPoint {
        LocalPoint::new(self.east_m, self.north_m, self.up_m)
    }
}

/// How GPS fix errors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Uniform direction, magnitude uniform in [0, bound]. The hard bound
    /// makes the zero-false-positive argument provable.
    BoundedUniform,
    /// Gaussian with sigma = bound/2, resampled until inside the bound.
    TruncatedGaussian,
    /// Centimeter-grade fixes: bounded-uniform at rtk_bound_m on every axis.
    Rtk,
}

/// GPS receiver error model. Horizontal error is a planar vector with
/// uniformly random direction; vertical error is drawn independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsNoiseModel {
    pub mode: NoiseMode,
    #[serde(default = "default_gps_bound")]
    pub horizontal_bound_m: f64,
    #[serde(default = "default_gps_bound")]
    pub vertical_bound_m: f64,
    #[serde(default = "default_rtk_bound")]
    pub rtk_bound_m: f64,
}

fn default_gps_bound() -> f64 {
    4.9
}

fn default_rtk_bound() -> f64 {
    0.03
}

impl Default for GpsNoiseModel {
    fn default() -> Self {
        GpsNoiseModel {
            mode: NoiseMode::BoundedUniform,
            horizontal_bound_m: default_gps_bound(),
            vertical_bound_m: default_gps_bound(),
            rtk_bound_m: default_rtk_bound(),
        }
    }
}

impl GpsNoiseModel {
    /// Effective horizontal bound for the configured mode.
    pub fn horizontal_bound(&self) -> f64 {
        match self.mode {
            NoiseMode::Rtk => self.rtk_bound_m,
            _ => self.horizontal_bound_m,
        }
    }

    /// Effective vertical bound for the configured mode.
    pub fn vertical_bound(&self) -> f64 {
        match self.mode {
            NoiseMode::Rtk => self.rtk_bound_m,
            _ => self.vertical_bound_m,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (field, value) in [
            ("horizontal_bound_m", self.horizontal_bound_m),
            ("vertical_bound_m", self.vertical_bound_m),
            ("rtk_bound_m", self.rtk_bound_m),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ScenarioError::BadNoiseBound { field, value });
            }
        }
        Ok(())
    }
}

/// IR-UWB ranging sensor model: bounded measurement error and a hard
/// operating range beyond which the pair simply cannot be ranged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UwbNoiseModel {
    #[serde(default = "default_uwb_bound")]
    pub error_bound_m: f64,
    #[serde(default = "default_uwb_range")]
    pub max_range_m: f64,
}

fn default_uwb_bound() -> f64 {
    0.30
}

fn default_uwb_range() -> f64 {
    150.0
}

impl Default for UwbNoiseModel {
    fn default() -> Self {
        UwbNoiseModel {
            error_bound_m: default_uwb_bound(),
            max_range_m: default_uwb_range(),
        }
    }
}

impl UwbNoiseModel {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.error_bound_m.is_finite() || self.error_bound_m < 0.0 {
            return Err(ScenarioError::BadNoiseBound {
                field: "error_bound_m",
                value: self.error_bound_m,
            });
        }
        if !self.max_range_m.is_finite() || self.max_range_m <= 0.0 {
            return Err(ScenarioError::BadNoiseBound {
                field: "max_range_m",
                value: self.max_range_m,
            });
        }
        Ok(())
    }
}

/// Complete description of one simulated flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Root of all randomness in the scenario.
    pub seed: u64,
    pub n_uavs: u16,
    /// Geodetic anchor of the local tangent frame.
    pub origin: GeoCoordinate,
    /// One waypoint list per UAV, indexed by id - 1.
    pub waypoints: Vec<Vec<Waypoint>>,
    #[serde(default = "default_duration_s")]
    pub duration_s: f64,
    #[serde(default = "default_ranging_rate_hz")]
    pub ranging_rate_hz: f64,
    #[serde(default = "default_min_separation_m")]
    pub min_separation_m: f64,
    #[serde(default)]
    pub gps_noise: GpsNoiseModel,
    #[serde(default)]
    pub uwb_noise: UwbNoiseModel,
    /// Which pairs get ranged each epoch.
    #[serde(default)]
    pub topology: Topology,
    /// Optional spoofing attack applied on top of the clean streams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<crate::attack::AttackScenario>,
}

fn default_duration_s() -> f64 {
    1500.0
}

fn default_ranging_rate_hz() -> f64 {
    2.0
}

fn default_min_separation_m() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("a swarm needs at least 2 UAVs, got {0}")]
    TooFewUavs(u16),
    #[error("{lists} waypoint lists for {uavs} UAVs")]
    WaypointCountMismatch { uavs: u16, lists: usize },
    #[error("uav {uav} has no waypoints")]
    EmptyWaypointList { uav: u16 },
    #[error("uav {uav} waypoint {index} leaves the usable frame ({axis} = {value} m, limit {limit} m including GPS noise headroom)")]
    WaypointOutOfFrame {
        uav: u16,
        index: usize,
        axis: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("uav {uav} waypoint {index} needs speed_mps > 0 to move, got {speed}")]
    BadSpeed { uav: u16, index: usize, speed: f64 },
    #[error("{field} must be positive and finite, got {value}")]
    BadScalar { field: &'static str, value: f64 },
    #[error("{field} must be a non-negative finite bound, got {value}")]
    BadNoiseBound { field: &'static str, value: f64 },
    #[error("UAVs {pair} are {distance_m:.3} m apart at t={time_ms} ms, below the {min_m} m separation floor")]
    SeparationViolation {
        pair: PairKey,
        time_ms: u64,
        distance_m: f64,
        min_m: f64,
    },
    #[error("pair {pair} separation {distance_m:.3} m exceeds the {max_m} m ranging range at t={time_ms} ms")]
    RangingOutOfRange {
        pair: PairKey,
        time_ms: u64,
        distance_m: f64,
        max_m: f64,
    },
    #[error(transparent)]
    Geodesy(#[from] GeodesyError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Attack(#[from] crate::attack::AttackError),
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_uavs < 2 {
            return Err(ScenarioError::TooFewUavs(self.n_uavs));
        }
        self.origin.validate().map_err(ScenarioError::Geodesy)?;
        if self.waypoints.len() != self.n_uavs as usize {
            return Err(ScenarioError::WaypointCountMismatch {
                uavs: self.n_uavs,
                lists: self.waypoints.len(),
            });
        }
        for (field, value) in [
            ("duration_s", self.duration_s),
            ("ranging_rate_hz", self.ranging_rate_hz),
            ("min_separation_m", self.min_separation_m),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ScenarioError::BadScalar { field, value });
            }
        }
        self.gps_noise.validate()?;
        self.uwb_noise.validate()?;
        // Keep noisy fixes convertible: truth must stay inside the tangent
        // frame even after the worst-case horizontal error is added.
        let limit = LOCAL_FRAME_BOUND_M - self.gps_noise.horizontal_bound();
        for (i, list) in self.waypoints.iter().enumerate() {
            let uav = i as u16 + 1;
            if list.is_empty() {
                return Err(ScenarioError::EmptyWaypointList { uav });
            }
            for (index, wp) in list.iter().enumerate() {
                for (axis, value) in [("east", wp.east_m), ("north", wp.north_m), ("up", wp.up_m)]
                {
                    if !value.is_finite() {
                        return Err(ScenarioError::BadScalar {
                            field: "waypoint coordinate",
                            value,
                        });
                    }
                    if axis != "up" && value.abs() > limit {
                        return Err(ScenarioError::WaypointOutOfFrame {
                            uav,
                            index,
                            axis,
                            value,
                            limit,
                        });
                    }
                }
                if index > 0 && wp.point().distance_to(&list[index - 1].point()) > 0.0 {
                    if !wp.speed_mps.is_finite() || wp.speed_mps <= 0.0 {
                        return Err(ScenarioError::BadSpeed {
                            uav,
                            index,
                            speed: wp.speed_mps,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of sampling epochs: floor(duration_s * ranging_rate_hz).
    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.ranging_rate_hz).floor() as usize
    }

    /// Simulation-clock timestamp of epoch k, in integer milliseconds.
    pub fn epoch_time_ms(&self, k: usize) -> u64 {
        (k as f64 * 1000.0 / self.ranging_rate_hz).round() as u64
    }
}

/// Ground-truth kinematic state of one UAV at one sampled instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavTruthState {
    pub uav: UavId,
    pub position: LocalPoint,
    pub velocity_mps: [f64; 3],
    pub time_ms: u64,
}

struct Leg {
    start: LocalPoint,
    velocity: [f64; 3],
    t_start_s: f64,
    t_end_s: f64,
}

struct FlightPlan {
    legs: Vec<Leg>,
    final_position: LocalPoint,
}

impl FlightPlan {
    fn build(waypoints: &[Waypoint]) -> FlightPlan {
        let mut legs = Vec::new();
        let mut t = 0.0;
        let mut here = waypoints[0].point();
        for wp in &waypoints[1..] {
            let target = wp.point();
            let dist = here.distance_to(&target);
            if dist == 0.0 {
                continue;
            }
            let dt = dist / wp.speed_mps;
            legs.push(Leg {
                start: here,
                velocity: [
                    (target.east_m - here.east_m) / dt,
                    (target.north_m - here.north_m) / dt,
                    (target.up_m - here.up_m) / dt,
                ],
                t_start_s: t,
                t_end_s: t + dt,
            });
            t += dt;
            here = target;
        }
        FlightPlan {
            legs,
            final_position: here,
        }
    }

    fn sample(&self, t_s: f64) -> (LocalPoint, [f64; 3]) {
        for leg in &self.legs {
            if t_s < leg.t_end_s {
                let dt = t_s - leg.t_start_s;
                let p = LocalPoint::new(
                    leg.start.east_m + leg.velocity[0] * dt,
                    leg.start.north_m + leg.velocity[1] * dt,
                    leg.start.up_m + leg.velocity[2] * dt,
                );
                return (p, leg.velocity);
            }
        }
        (self.final_position, [0.0; 3])
    }
}

/// Samples every UAV's truth state on the ranging clock.
///
/// Returns one inner vector per epoch, ordered by UAV id. Fails if any pair
/// ever dips below `min_separation_m`; the collision-avoidance layer is
/// assumed, not simulated, so a violating plan is a configuration bug.
pub fn simulate_truth(config: &ScenarioConfig) -> Result<Vec<Vec<UavTruthState>>, ScenarioError> {
    config.validate()?;
    let plans: Vec<FlightPlan> = config
        .waypoints
        .iter()
        .map(|wps| FlightPlan::build(wps))
        .collect();
    let epochs = config.sample_count();
    let mut out = Vec::with_capacity(epochs);
    for k in 0..epochs {
        let t_s = k as f64 / config.ranging_rate_hz;
        let time_ms = config.epoch_time_ms(k);
        let mut states = Vec::with_capacity(plans.len());
        for (i, plan) in plans.iter().enumerate() {
            let (position, velocity_mps) = plan.sample(t_s);
            states.push(UavTruthState {
                uav: UavId::new(i as u16 + 1).expect("ids start at 1"),
                position,
                velocity_mps,
                time_ms,
            });
        }
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                let d = states[i].position.distance_to(&states[j].position);
                if d < config.min_separation_m {
                    return Err(ScenarioError::SeparationViolation {
                        pair: PairKey::new(states[i].uav, states[j].uav).expect("distinct ids"),
                        time_ms,
                        distance_m: d,
                        min_m: config.min_separation_m,
                    });
                }
            }
        }
        out.push(states);
    }
    Ok(out)
}

fn horizontal_error(model: &GpsNoiseModel, rng: &mut impl Rng) -> (f64, f64) {
    let bound = model.horizontal_bound();
    if bound == 0.0 {
        return (0.0, 0.0);
    }
    match model.mode {
        NoiseMode::BoundedUniform | NoiseMode::Rtk => {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let mag = rng.random_range(0.0..=bound);
            (mag * theta.cos(), mag * theta.sin())
        }
        NoiseMode::TruncatedGaussian => {
            let normal = Normal::new(0.0, bound / 2.0).expect("finite sigma");
            loop {
                let e = normal.sample(rng);
                let n = normal.sample(rng);
                if e.hypot(n) <= bound {
                    return (e, n);
                }
            }
        }
    }
}

fn vertical_error(model: &GpsNoiseModel, rng: &mut impl Rng) -> f64 {
    let bound = model.vertical_bound();
    if bound == 0.0 {
        return 0.0;
    }
    match model.mode {
        NoiseMode::BoundedUniform | NoiseMode::Rtk => rng.random_range(-bound..=bound),
        NoiseMode::TruncatedGaussian => {
            let normal = Normal::new(0.0, bound / 2.0).expect("finite sigma");
            loop {
                let v = normal.sample(rng);
                if v.abs() <= bound {
                    return v;
                }
            }
        }
    }
}

/// Produces one noisy GPS fix for a truth state.
pub fn sample_gps(
    truth: &UavTruthState,
    frame: &LocalFrame,
    model: &GpsNoiseModel,
    earth: &EarthModel,
    rng: &mut impl Rng,
) -> Result<PositionReport, ScenarioError> {
    let (de, dn) = horizontal_error(model, rng);
    let du = vertical_error(model, rng);
    let coordinate = frame.to_geodetic(
        truth.position.east_m + de,
        truth.position.north_m + dn,
        truth.position.up_m + du,
        earth,
    )?;
    Ok(PositionReport::new(truth.uav, truth.time_ms, coordinate))
}

/// Produces one noisy UWB ranging result for a pair of truth states.
///
/// The reported value is quantized to millimeters on the wire; quantization
/// is clamped so the sensor error bound survives it.
pub fn sample_uwb(
    truth_a: &UavTruthState,
    truth_b: &UavTruthState,
    model: &UwbNoiseModel,
    rng: &mut impl Rng,
) -> Result<RangingReport, ScenarioError> {
    assert_eq!(
        truth_a.time_ms, truth_b.time_ms,
        "ranging requires truth states from the same epoch"
    );
    let pair = PairKey::new(truth_a.uav, truth_b.uav).map_err(|e| WireError::Invariant {
        offset: 1,
        reason: e.to_string(),
    })?;
    let separation = truth_a.position.distance_to(&truth_b.position);
    if separation > model.max_range_m {
        return Err(ScenarioError::RangingOutOfRange {
            pair,
            time_ms: truth_a.time_ms,
            distance_m: separation,
            max_m: model.max_range_m,
        });
    }
    let bound = model.error_bound_m;
    let err = if bound == 0.0 {
        0.0
    } else {
        rng.random_range(-bound..=bound)
    };
    let measured = (separation + err).max(0.0);
    let mut mm = (measured * 1000.0).round() as i64;
    // Millimeter rounding may not exceed the sensor bound; snap back inside.
    let lo = (((separation - bound).max(0.0)) * 1000.0).ceil() as i64;
    let hi = ((separation + bound) * 1000.0).floor() as i64;
    if lo <= hi {
        mm = mm.clamp(lo, hi);
    }
    let report = RangingReport::new(truth_a.uav, truth_b.uav, truth_a.time_ms, mm.max(0) as u32)?;
    Ok(report)
}

/// Everything one simulated flight produced, before any attack is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub frame: LocalFrame,
    /// Truth states, epoch-major then UAV id order.
    pub truth: Vec<Vec<UavTruthState>>,
    /// GPS fixes, epoch-major then UAV id order.
    pub positions: Vec<PositionReport>,
    /// Ranging results, epoch-major then schedule order. Pairs out of UWB
    /// range at an epoch are simply absent.
    pub rangings: Vec<RangingReport>,
}

impl ScenarioRun {
    /// Interleaves reports into stream order: per epoch, positions first,
    /// then rangings.
    pub fn messages(&self) -> Vec<Message> {
        let mut out = Vec::with_capacity(self.positions.len() + self.rangings.len());
        let mut pi = self.positions.iter().peekable();
        let mut ri = self.rangings.iter().peekable();
        loop {
            match (pi.peek(), ri.peek()) {
                (Some(p), Some(r)) => {
                    if p.time_ms <= r.time_ms {
                        out.push(Message::Position(*pi.next().unwrap()));
                    } else {
                        out.push(Message::Ranging(*ri.next().unwrap()));
                    }
                }
                (Some(_), None) => out.push(Message::Position(*pi.next().unwrap())),
                (None, Some(_)) => out.push(Message::Ranging(*ri.next().unwrap())),
                (None, None) => break,
            }
        }
        out
    }
}

/// Runs the full clean-scenario pipeline: truth, GPS sampling, UWB sampling.
///
/// Attacks are a separate stream transformation; see the attack module.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun, ScenarioError> {
    let truth = simulate_truth(config)?;
    let frame = LocalFrame::new(config.origin)?;
    let earth = EarthModel::default();
    let schedule = ranging_schedule(config.n_uavs, config.topology)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut positions = Vec::new();
    let mut rangings = Vec::new();
    for states in &truth {
        for state in states {
            positions.push(sample_gps(state, &frame, &config.gps_noise, &earth, &mut rng)?);
        }
        for pair in &schedule {
            let a = &states[pair.a().index()];
            let b = &states[pair.b().index()];
            match sample_uwb(a, b, &config.uwb_noise, &mut rng) {
                Ok(report) => rangings.push(report),
                // Out of UWB range: the pair goes unmeasured this epoch.
                Err(ScenarioError::RangingOutOfRange { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ScenarioRun {
        frame,
        truth,
        positions,
        rangings,
    })
}

/// Runs the scenario and, if one is configured, rewrites the GPS stream
/// through the attack. Attack jitter draws from its own seeded stream so
/// adding an attack never perturbs the underlying sensor noise.
pub fn run_scenario_with_attack(config: &ScenarioConfig) -> Result<ScenarioRun, ScenarioError> {
    let mut run = run_scenario(config)?;
    if let Some(attack) = &config.attack {
        let mut rng =
            ChaCha12Rng::seed_from_u64(config.seed ^ crate::attack::ATTACK_SEED_SALT);
        run.positions =
            crate::attack::apply_attack(attack, &run.truth, &run.frame, &run.positions, &mut rng)?;
    }
    Ok(run)
}

/// Renders truth states as CSV: `time_ms,uav_id,east_m,north_m,up_m`.
pub fn truth_csv(truth: &[Vec<UavTruthState>]) -> String {
    let mut out = String::from("time_ms,uav_id,east_m,north_m,up_m\n");
    for states in truth {
        for s in states {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.time_ms, s.uav, s.position.east_m, s.position.north_m, s.position.up_m
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcs::wire::encode;

    fn test_origin() -> GeoCoordinate {
        GeoCoordinate::new(52.0, 14.0, 100.0).unwrap()
    }

    fn hover(east: f64, north: f64, up: f64) -> Vec<Waypoint> {
        vec![Waypoint {
            east_m: east,
            north_m: north,
            up_m: up,
            speed_mps: 0.0,
        }]
    }

    fn two_uav_config() -> ScenarioConfig {
        ScenarioConfig {
            seed: 7,
            n_uavs: 2,
            origin: test_origin(),
            waypoints: vec![hover(0.0, 0.0, 30.0), hover(20.0, 0.0, 30.0)],
            duration_s: 10.0,
            ranging_rate_hz: 2.0,
            min_separation_m: 2.0,
            gps_noise: GpsNoiseModel::default(),
            uwb_noise: UwbNoiseModel::default(),
            topology: Topology::Anchor,
            attack: None,
        }
    }

    fn truth_at(east: f64, up: f64, uav: u16, time_ms: u64) -> UavTruthState {
        UavTruthState {
            uav: UavId::new(uav).unwrap(),
            position: LocalPoint::new(east, 0.0, up),
            velocity_mps: [0.0; 3],
            time_ms,
        }
    }

    // ---- truth kinematics ----

    #[test]
    fn stationary_waypoint_holds_position() {
        let config = two_uav_config();
        let truth = simulate_truth(&config).unwrap();
        assert_eq!(truth.len(), 20);
        for states in &truth {
            assert_eq!(states[0].position, LocalPoint::new(0.0, 0.0, 30.0));
            assert_eq!(states[1].position, LocalPoint::new(20.0, 0.0, 30.0));
            assert_eq!(states[0].velocity_mps, [0.0; 3]);
        }
    }

    #[test]
    fn constant_velocity_leg_samples_linearly() {
        let mut config = two_uav_config();
        config.waypoints[0] = vec![
            Waypoint {
                east_m: 0.0,
                north_m: 0.0,
                up_m: 10.0,
                speed_mps: 0.0,
            },
            Waypoint {
                east_m: 100.0,
                north_m: 0.0,
                up_m: 10.0,
                speed_mps: 10.0,
            },
        ];
        config.waypoints[1] = vec![hover(0.0, 200.0, 10.0)[0]];
        config.duration_s = 15.0;
        let truth = simulate_truth(&config).unwrap();
        // 10 m/s sampled at 2 Hz: 5 m per sample until arrival at t = 10 s.
        for (k, states) in truth.iter().enumerate() {
            let expected = (0.5 * k as f64 * 10.0).min(100.0);
            assert!((states[0].position.east_m - expected).abs() < 1e-9);
        }
        assert_eq!(truth[20][0].position.east_m, 100.0);
        assert_eq!(truth[20][0].velocity_mps, [0.0; 3]);
    }

    #[test]
    fn default_duration_yields_3000_epochs() {
        let mut config = two_uav_config();
        config.duration_s = 1500.0;
        assert_eq!(config.sample_count(), 3000);
        assert_eq!(config.epoch_time_ms(1), 500);
        assert_eq!(config.epoch_time_ms(2999), 1_499_500);
    }

    #[test]
    fn fractional_duration_floors_sample_count() {
        let mut config = two_uav_config();
        config.duration_s = 10.4;
        assert_eq!(config.sample_count(), 20);
    }

    #[test]
    fn separation_violation_names_pair_and_time() {
        let mut config = two_uav_config();
        // UAV 2 flies straight at UAV 1 and gets within 2 m at t = 9 s.
        config.waypoints[1] = vec![
            Waypoint {
                east_m: 20.0,
                north_m: 0.0,
                up_m: 30.0,
                speed_mps: 0.0,
            },
            Waypoint {
                east_m: 0.0,
                north_m: 0.0,
                up_m: 30.0,
                speed_mps: 2.0,
            },
        ];
        let err = simulate_truth(&config).unwrap_err();
        match err {
            ScenarioError::SeparationViolation { pair, time_ms, .. } => {
                assert_eq!(pair, PairKey::try_from((1, 2)).unwrap());
                assert_eq!(time_ms, 9500);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_waypoints_without_speed() {
        let mut config = two_uav_config();
        config.waypoints[0] = vec![
            hover(0.0, 0.0, 30.0)[0],
            Waypoint {
                east_m: 50.0,
                north_m: 0.0,
                up_m: 30.0,
                speed_mps: 0.0,
            },
        ];
        assert!(matches!(
            simulate_truth(&config).unwrap_err(),
            ScenarioError::BadSpeed { uav: 1, index: 1, .. }
        ));
    }

    #[test]
    fn rejects_waypoints_outside_usable_frame() {
        let mut config = two_uav_config();
        config.waypoints[1] = hover(9_999.0, 0.0, 30.0);
        // 9999 + 4.9 of noise headroom crosses the 10 km frame bound.
        assert!(matches!(
            simulate_truth(&config).unwrap_err(),
            ScenarioError::WaypointOutOfFrame { uav: 2, axis: "east", .. }
        ));
    }

    // ---- GPS sampling ----

    #[test]
    fn zero_bounds_report_truth_exactly() {
        let frame = LocalFrame::new(test_origin()).unwrap();
        let earth = EarthModel::default();
        let model = GpsNoiseModel {
            horizontal_bound_m: 0.0,
            vertical_bound_m: 0.0,
            ..GpsNoiseModel::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let truth = truth_at(120.0, 35.0, 1, 500);
        let report = sample_gps(&truth, &frame, &model, &earth, &mut rng).unwrap();
        let (e, n, u) = frame.to_local(&report.coordinate, &earth);
        assert!((e - 120.0).abs() < 1e-6);
        assert!(n.abs() < 1e-6);
        // Altitude passes through f32 on the wire type.
        assert!((u - 35.0).abs() < 1e-3);
    }

    #[test]
    fn bounded_uniform_errors_stay_inside_bound() {
        let frame = LocalFrame::new(test_origin()).unwrap();
        let earth = EarthModel::default();
        let model = GpsNoiseModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let truth = truth_at(50.0, 40.0, 1, 0);
        let mut seen_above_4m = false;
        for _ in 0..10_000 {
            let report = sample_gps(&truth, &frame, &model, &earth, &mut rng).unwrap();
            let (e, n, _) = frame.to_local(&report.coordinate, &earth);
            let err = (e - 50.0).hypot(n - 0.0);
            assert!(err <= 4.9 + 1e-6, "horizontal error {err} out of bound");
            seen_above_4m |= err > 4.0;
        }
        assert!(seen_above_4m, "noise suspiciously small");
    }

    #[test]
    fn truncated_gaussian_errors_stay_inside_bound() {
        let frame = LocalFrame::new(test_origin()).unwrap();
        let earth = EarthModel::default();
        let model = GpsNoiseModel {
            mode: NoiseMode::TruncatedGaussian,
            ..GpsNoiseModel::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let truth = truth_at(0.0, 30.0, 2, 0);
        for _ in 0..10_000 {
            let report = sample_gps(&truth, &frame, &model, &earth, &mut rng).unwrap();
            let (e, n, u) = frame.to_local(&report.coordinate, &earth);
            assert!(e.hypot(n) <= 4.9 + 1e-6);
            assert!((u - 30.0).abs() <= 4.9 + 1e-3);
        }
    }

    #[test]
    fn rtk_errors_stay_centimeter_grade() {
        let frame = LocalFrame::new(test_origin()).unwrap();
        let earth = EarthModel::default();
        let model = GpsNoiseModel {
            mode: NoiseMode::Rtk,
            ..GpsNoiseModel::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let truth = truth_at(-200.0, 25.0, 3, 0);
        for _ in 0..10_000 {
            let report = sample_gps(&truth, &frame, &model, &earth, &mut rng).unwrap();
            let (e, n, _) = frame.to_local(&report.coordinate, &earth);
            assert!((e + 200.0).hypot(n) <= 0.03 + 1e-6);
        }
    }

    // ---- UWB sampling ----

    #[test]
    fn noiseless_ranging_is_exact() {
        let model = UwbNoiseModel {
            error_bound_m: 0.0,
            ..UwbNoiseModel::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = truth_at(0.0, 30.0, 1, 500);
        let b = truth_at(10.0, 30.0, 2, 500);
        let report = sample_uwb(&a, &b, &model, &mut rng).unwrap();
        assert_eq!(report.distance_m(), 10.0);
    }

    #[test]
    fn ranging_beyond_operating_range_fails() {
        let model = UwbNoiseModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = truth_at(0.0, 30.0, 1, 0);
        let b = truth_at(151.0, 30.0, 2, 0);
        assert!(matches!(
            sample_uwb(&a, &b, &model, &mut rng).unwrap_err(),
            ScenarioError::RangingOutOfRange { distance_m, .. } if distance_m == 151.0
        ));
    }

    #[test]
    fn ranging_errors_stay_inside_bound() {
        let model = UwbNoiseModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let a = truth_at(0.0, 30.0, 1, 0);
        let b = truth_at(50.0, 30.0, 2, 0);
        for _ in 0..10_000 {
            let d = sample_uwb(&a, &b, &model, &mut rng).unwrap().distance_m();
            assert!((49.7..=50.3).contains(&d), "reported {d} outside [49.7, 50.3]");
        }
    }

    // ---- full scenario ----

    #[test]
    fn run_emits_expected_report_counts() {
        let config = two_uav_config();
        let run = run_scenario(&config).unwrap();
        assert_eq!(run.positions.len(), 20 * 2);
        assert_eq!(run.rangings.len(), 20);
        assert_eq!(run.messages().len(), 60);
    }

    #[test]
    fn identical_seed_and_config_reproduce_streams_bit_for_bit() {
        let config = two_uav_config();
        let one = run_scenario(&config).unwrap();
        let two = run_scenario(&config).unwrap();
        let bytes = |run: &ScenarioRun| -> Vec<u8> {
            run.messages().iter().flat_map(|m| encode(m)).collect()
        };
        assert_eq!(bytes(&one), bytes(&two));
        let mut different_seed = config.clone();
        different_seed.seed = 8;
        let three = run_scenario(&different_seed).unwrap();
        assert_ne!(bytes(&one), bytes(&three));
    }

    #[test]
    fn truth_csv_layout() {
        let config = two_uav_config();
        let truth = simulate_truth(&config).unwrap();
        let csv = truth_csv(&truth);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time_ms,uav_id,east_m,north_m,up_m"));
        assert_eq!(lines.next(), Some("0,1,0,0,30"));
        assert_eq!(lines.next(), Some("0,2,20,0,30"));
    }
}
