//! Telemetry stream ingestion: length-prefixed frames in, typed messages
//! out. Corruption is counted, never fatal; the length prefix keeps frame
//! boundaries intact, so one bad frame never poisons the next.

use serde::Serialize;

use crate::gcs::wire::{decode, Message, WireError};

/// Per-error-class counters for one ingested stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IngestStats {
    pub messages: u64,
    pub unknown_type: u64,
    pub wrong_length: u64,
    pub invariant: u64,
    /// Stream ended mid-frame.
    pub truncated: u64,
}

impl IngestStats {
    pub fn errors(&self) -> u64 {
        self.unknown_type + self.wrong_length + self.invariant + self.truncated
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestOutcome {
    pub messages: Vec<Message>,
    pub stats: IngestStats,
}

/// Decodes a concatenation of `u8 length + payload` frames.
pub fn ingest(stream: &[u8]) -> IngestOutcome {
    let mut outcome = IngestOutcome::default();
    let mut offset = 0;
    while offset < stream.len() {
        let len = stream[offset] as usize;
        offset += 1;
        if offset + len > stream.len() {
            outcome.stats.truncated += 1;
            break;
        }
        match decode(&stream[offset..offset + len]) {
            Ok(message) => {
                outcome.messages.push(message);
                outcome.stats.messages += 1;
            }
            Err(WireError::UnknownType { .. }) => outcome.stats.unknown_type += 1,
            Err(WireError::WrongLength { .. }) => outcome.stats.wrong_length += 1,
            Err(WireError::Invariant { .. }) => outcome.stats.invariant += 1,
        }
        offset += len;
    }
    outcome
}
