//! The JSON experiment document every subcommand reads: a scenario (with
//! optional embedded attack and topology), detection thresholds, a trial
//! count for Monte Carlo runs, and the energy model parameters. Every
//! section except the scenario has full defaults.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use swarmguard_core::detection::ThresholdConfig;
use swarmguard_core::energy::EnergyConfig;
use swarmguard_core::gcs::schedule::Topology;
use swarmguard_core::swarm::ScenarioConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub energy: EnergyConfig,
}

fn default_trials() -> u32 {
    1
}

impl Default for ConfigDoc {
    fn default() -> Self {
        ConfigDoc {
            scenario: None,
            thresholds: ThresholdConfig::default(),
            trials: default_trials(),
            energy: EnergyConfig::default(),
        }
    }
}

impl ConfigDoc {
    pub fn load(path: &Path) -> Result<ConfigDoc> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let doc: ConfigDoc = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(scenario) = &self.scenario {
            scenario.validate()?;
            if let Some(attack) = &scenario.attack {
                attack.validate(scenario.n_uavs)?;
            }
        }
        self.thresholds.validate()?;
        self.energy.validate()?;
        anyhow::ensure!(self.trials >= 1, "trials must be at least 1, got {}", self.trials);
        Ok(())
    }

    /// The scenario, with the seed optionally overridden from the command
    /// line.
    pub fn scenario_with_seed(&self, seed: Option<u64>) -> Result<ScenarioConfig> {
        let mut scenario = self
            .scenario
            .clone()
            .context("this command needs a \"scenario\" section in the config")?;
        if let Some(seed) = seed {
            scenario.seed = seed;
        }
        Ok(scenario)
    }

    pub fn topology(&self) -> Topology {
        self.scenario.as_ref().map_or_else(Topology::default, |s| s.topology)
    }
}
