//! Ground-station side: wire codec, stream ingestion, ranging schedules,
//! and the online detection loop.

pub mod ingest;
pub mod pipeline;
pub mod schedule;
pub mod wire;
