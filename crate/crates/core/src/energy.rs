//! Energy cost of running the detector: IR-UWB ranging power, telemetry
//! transmission power, and the flight time each one costs on a fixed
//! battery under a constant-power flight assumption.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Power and consumption parameters of one UAV's ranging and telemetry
/// hardware plus its flight profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    /// Energy of one complete two-way ranging exchange.
    #[serde(default = "default_ranging_energy_mj")]
    pub ranging_energy_mj: f64,
    #[serde(default = "default_ranging_rate_hz")]
    pub ranging_rate_hz: f64,
    #[serde(default = "default_flight_minutes")]
    pub flight_minutes: f64,
    #[serde(default = "default_battery_mah")]
    pub battery_mah: f64,
    #[serde(default = "default_battery_volts")]
    pub battery_volts: f64,
    #[serde(default = "default_message_bytes")]
    pub message_bytes: f64,
    #[serde(default = "default_radio_kbps")]
    pub radio_kbps: f64,
    #[serde(default = "default_radio_ma")]
    pub radio_ma: f64,
    #[serde(default = "default_radio_volts")]
    pub radio_volts: f64,
}

fn default_ranging_energy_mj() -> f64 {
    3.55
}

fn default_ranging_rate_hz() -> f64 {
    2.0
}

fn default_flight_minutes() -> f64 {
    25.0
}

fn default_battery_mah() -> f64 {
    5000.0
}

fn default_battery_volts() -> f64 {
    14.8
}

fn default_message_bytes() -> f64 {
    50.0
}

fn default_radio_kbps() -> f64 {
    40.0
}

fn default_radio_ma() -> f64 {
    55.0
}

fn default_radio_volts() -> f64 {
    3.0
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            ranging_energy_mj: default_ranging_energy_mj(),
            ranging_rate_hz: default_ranging_rate_hz(),
            flight_minutes: default_flight_minutes(),
            battery_mah: default_battery_mah(),
            battery_volts: default_battery_volts(),
            message_bytes: default_message_bytes(),
            radio_kbps: default_radio_kbps(),
            radio_ma: default_radio_ma(),
            radio_volts: default_radio_volts(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EnergyError {
    #[error("{field} must be positive and finite, got {value}")]
    BadParameter { field: &'static str, value: f64 },
}

impl EnergyConfig {
    /// Battery capacity in mWh.
    pub fn battery_mwh(&self) -> f64 {
        self.battery_mah * self.battery_volts
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        for (field, value) in [
            ("ranging_energy_mj", self.ranging_energy_mj),
            ("ranging_rate_hz", self.ranging_rate_hz),
            ("battery_mah", self.battery_mah),
            ("battery_volts", self.battery_volts),
            ("message_bytes", self.message_bytes),
            ("radio_kbps", self.radio_kbps),
            ("radio_ma", self.radio_ma),
            ("radio_volts", self.radio_volts),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(EnergyError::BadParameter { field, value });
            }
        }
        // A zero-minute flight is a legal degenerate case: every budget
        // collapses to zero.
        if !self.flight_minutes.is_finite() || self.flight_minutes < 0.0 {
            return Err(EnergyError::BadParameter {
                field: "flight_minutes",
                value: self.flight_minutes,
            });
        }
        Ok(())
    }
}

/// One subsystem's energy budget over a flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub power_mw: f64,
    pub energy_mwh: f64,
    /// Time spent transmitting; present for telemetry budgets only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmit_seconds: Option<f64>,
    /// Flight time the budget costs, assuming constant-power flight.
    pub flight_time_reduction_s: f64,
}

fn reduction_s(cfg: &EnergyConfig, energy_mwh: f64) -> f64 {
    energy_mwh / cfg.battery_mwh() * (cfg.flight_minutes * 60.0)
}

/// Cost of continuous ranging for the whole flight.
///
/// At one exchange per period, average power is simply energy-per-exchange
/// times rate: mJ * Hz = mW.
pub fn ranging_budget(cfg: &EnergyConfig) -> EnergyReport {
    let power_mw = cfg.ranging_energy_mj * cfg.ranging_rate_hz;
    let energy_mwh = power_mw * cfg.flight_minutes / 60.0;
    EnergyReport {
        power_mw,
        energy_mwh,
        transmit_seconds: None,
        flight_time_reduction_s: reduction_s(cfg, energy_mwh),
    }
}

/// Cost of radioing `message_count` telemetry messages to the ground.
pub fn telemetry_budget(cfg: &EnergyConfig, message_count: u64) -> EnergyReport {
    let power_mw = cfg.radio_volts * cfg.radio_ma;
    let transmit_seconds =
        message_count as f64 * cfg.message_bytes * 8.0 / (cfg.radio_kbps * 1000.0);
    let energy_mwh = power_mw * transmit_seconds / 3600.0;
    EnergyReport {
        power_mw,
        energy_mwh,
        transmit_seconds: Some(transmit_seconds),
        flight_time_reduction_s: reduction_s(cfg, energy_mwh),
    }
}

/// Both budgets added together.
pub fn combined_overhead(cfg: &EnergyConfig, message_count: u64) -> EnergyReport {
    let ranging = ranging_budget(cfg);
    let telemetry = telemetry_budget(cfg, message_count);
    EnergyReport {
        power_mw: ranging.power_mw + telemetry.power_mw,
        energy_mwh: ranging.energy_mwh + telemetry.energy_mwh,
        transmit_seconds: telemetry.transmit_seconds,
        flight_time_reduction_s: ranging.flight_time_reduction_s
            + telemetry.flight_time_reduction_s,
    }
}

/// 1 mWh = 3.6 J.
pub fn mwh_to_joules(mwh: f64) -> f64 {
    mwh * 3.6
}

pub fn joules_to_mwh(joules: f64) -> f64 {
    joules / 3.6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranging_budget_at_defaults() {
        let report = ranging_budget(&EnergyConfig::default());
        assert_eq!(report.power_mw, 7.1);
        assert_eq!(report.energy_mwh, 2.958_333_333_333_333_5);
        assert!((report.energy_mwh - 3.0).abs() < 0.05);
        assert_eq!(report.transmit_seconds, None);
        assert_eq!(report.flight_time_reduction_s, 0.059_966_216_216_216_214);
    }

    #[test]
    fn telemetry_budget_at_defaults() {
        let report = telemetry_budget(&EnergyConfig::default(), 3000);
        assert_eq!(report.power_mw, 165.0);
        assert_eq!(report.transmit_seconds, Some(30.0));
        assert_eq!(report.energy_mwh, 1.375);
        assert_eq!(report.flight_time_reduction_s, 0.027_871_621_621_621_625);
    }

    #[test]
    fn combined_overhead_stays_under_a_second() {
        let report = combined_overhead(&EnergyConfig::default(), 3000);
        assert_eq!(report.power_mw, 172.1);
        assert_eq!(report.flight_time_reduction_s, 0.087_837_837_837_837_84);
        assert!(report.flight_time_reduction_s < 1.0);
    }

    #[test]
    fn battery_capacity_in_mwh() {
        assert_eq!(EnergyConfig::default().battery_mwh(), 74_000.0);
    }

    #[test]
    fn budgets_scale_linearly() {
        let cfg = EnergyConfig::default();
        let doubled_rate = EnergyConfig {
            ranging_rate_hz: 4.0,
            ..cfg
        };
        assert_eq!(
            ranging_budget(&doubled_rate).power_mw,
            2.0 * ranging_budget(&cfg).power_mw
        );
        assert_eq!(
            telemetry_budget(&cfg, 1500).transmit_seconds,
            Some(15.0)
        );
        assert_eq!(
            telemetry_budget(&cfg, 6000).energy_mwh,
            2.0 * telemetry_budget(&cfg, 3000).energy_mwh
        );
    }

    #[test]
    fn zero_message_count_costs_nothing() {
        let report = telemetry_budget(&EnergyConfig::default(), 0);
        assert_eq!(report.transmit_seconds, Some(0.0));
        assert_eq!(report.energy_mwh, 0.0);
        assert_eq!(report.flight_time_reduction_s, 0.0);
    }

    #[test]
    fn zero_duration_flight_costs_nothing() {
        let cfg = EnergyConfig {
            flight_minutes: 0.0,
            ..EnergyConfig::default()
        };
        cfg.validate().unwrap();
        let report = combined_overhead(&cfg, 0);
        assert_eq!(report.energy_mwh, 0.0);
        assert_eq!(report.flight_time_reduction_s, 0.0);
    }

    #[test]
    fn mwh_equals_mw_times_hours() {
        let cfg = EnergyConfig::default();
        let report = ranging_budget(&cfg);
        let hours = cfg.flight_minutes / 60.0;
        let diff = (report.energy_mwh - report.power_mw * hours).abs();
        assert!(diff <= 1e-15 * report.energy_mwh);
    }

    #[test]
    fn joules_round_trip() {
        assert_eq!(mwh_to_joules(1.0), 3.6);
        for mwh in [0.0, 1.375, 2.958_333_333_333_333_5, 74_000.0] {
            assert!((joules_to_mwh(mwh_to_joules(mwh)) - mwh).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_nonpositive_parameters() {
        let mut cfg = EnergyConfig::default();
        cfg.radio_kbps = 0.0;
        assert!(matches!(
            cfg.validate().unwrap_err(),
            EnergyError::BadParameter {
                field: "radio_kbps",
                ..
            }
        ));
        let mut cfg = EnergyConfig::default();
        cfg.flight_minutes = -1.0;
        assert!(cfg.validate().is_err());
    }
}
