//! GPS-spoofing detection for UAV swarms.
//!
//! A spoofer can forge GPS, but it cannot forge physics: the distance
//! between two airframes measured by IR-UWB ranging is ground truth. This
//! crate cross-checks GPS-derived inter-UAV distances against UWB-measured
//! ones and flags pairs whose disagreement exceeds the sensor error budget,
//! plus the telltale case where several receivers suddenly report the same
//! point.
//!
//! The crate bundles everything needed to evaluate that detector end to
//! end: geodetic distance math, a deterministic swarm and attack simulator,
//! a binary telemetry codec with ingestion, the detection pipeline itself,
//! and an energy-cost model of running it.

pub mod attack;
pub mod detection;
pub mod energy;
pub mod gcs;
pub mod geodesy;
pub mod swarm;
pub mod types;

pub use detection::{SwarmVerdict, ThresholdConfig};
pub use geodesy::{EarthModel, GeoCoordinate, LocalFrame};
pub use swarm::ScenarioConfig;
pub use types::{PairKey, UavId};
