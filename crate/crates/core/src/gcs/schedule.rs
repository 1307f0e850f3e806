//! Ranging schedules: which UAV pairs get measured each epoch.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{PairKey, UavId};

/// Shape of the per-epoch ranging round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// UAV 1 ranges every other UAV: n - 1 measurements per epoch.
    #[default]
    Anchor,
    /// Every pair is measured: n(n-1)/2 measurements per epoch.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("a ranging schedule needs at least 2 UAVs, got {0}")]
    TooFewUavs(u16),
}

/// The pairs measured each epoch, in ascending canonical order.
pub fn ranging_schedule(n_uavs: u16, topology: Topology) -> Result<Vec<PairKey>, ScheduleError> {
    if n_uavs < 2 {
        return Err(ScheduleError::TooFewUavs(n_uavs));
    }
    let id = |v: u16| UavId::new(v).expect("ids start at 1");
    let mut pairs = Vec::new();
    match topology {
        Topology::Anchor => {
            for b in 2..=n_uavs {
                pairs.push(PairKey::new(id(1), id(b)).expect("distinct ids"));
            }
        }
        Topology::AllPairs => {
            for a in 1..n_uavs {
                for b in (a + 1)..=n_uavs {
                    pairs.push(PairKey::new(id(a), id(b)).expect("distinct ids"));
                }
            }
        }
    }
    Ok(pairs)
}
