//! Command-line front end for the swarm spoofing detector: scenario
//! simulation, replay detection, seeded rate estimation, and the energy
//! budget, all driven by one JSON config file.

pub mod commands;
pub mod config;
