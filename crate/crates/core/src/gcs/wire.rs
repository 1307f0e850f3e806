//! Binary telemetry codec: the two message types UAVs send to the ground
//! station and their bit-exact frame layouts.
//!
//! All multi-byte fields are little-endian. Layouts:
//!
//! ```text
//! PositionReport (31 bytes)
//!   [0]      type = 0x01
//!   [1..=2]  uav id          u16
//!   [3..=10] time_ms         u64
//!   [11..=18] latitude_deg   f64
//!   [19..=26] longitude_deg  f64
//!   [27..=30] altitude_m     f32
//!
//! RangingReport (17 bytes)
//!   [0]      type = 0x02
//!   [1..=2]  uav_a           u16  (always < uav_b)
//!   [3..=4]  uav_b           u16
//!   [5..=12] time_ms         u64
//!   [13..=16] distance_mm    u32
//! ```
//!
//! Frames on a stream are length-prefixed: one u8 length byte, then the
//! payload. Every payload must fit the 50-byte telemetry budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::GeoCoordinate;
use crate::types::{IdError, PairKey, UavId};

pub const POSITION_TYPE: u8 = 0x01;
pub const RANGING_TYPE: u8 = 0x02;

pub const POSITION_FRAME_LEN: usize = 31;
pub const RANGING_FRAME_LEN: usize = 17;

/// Telemetry budget per message; asserted at encode time.
pub const MAX_FRAME_PAYLOAD: usize = 50;

/// Upper bound on a plausible ranging value: 150 m operating range plus the
/// 0.3 m sensor error bound, in millimeters.
pub const MAX_RANGING_DISTANCE_MM: u32 = 150_300;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("unknown message type 0x{byte:02x} at offset {offset}")]
    UnknownType { offset: usize, byte: u8 },
    #[error("frame length {got} does not match {expected} expected at offset {offset}")]
    WrongLength {
        offset: usize,
        expected: usize,
        got: usize,
    },
    #[error("invariant violation at offset {offset}: {reason}")]
    Invariant { offset: usize, reason: String },
}

/// One GPS fix as reported by a UAV.
///
/// The wire layout carries altitude as f32, so altitude is quantized to f32
/// at construction; every constructible report round-trips the codec exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionReport {
    pub uav: UavId,
    pub time_ms: u64,
    pub coordinate: GeoCoordinate,
}

impl PositionReport {
    pub fn new(uav: UavId, time_ms: u64, mut coordinate: GeoCoordinate) -> Self {
        coordinate.altitude_m = coordinate.altitude_m as f32 as f64;
        PositionReport {
            uav,
            time_ms,
            coordinate,
        }
    }
}

/// One IR-UWB ranging result between a canonical UAV pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangingReport {
    pair: PairKey,
    pub time_ms: u64,
    distance_mm: u32,
}

impl RangingReport {
    /// Accepts ids in either order and stores them canonically.
    pub fn new(x: UavId, y: UavId, time_ms: u64, distance_mm: u32) -> Result<Self, WireError> {
        let pair = PairKey::new(x, y).map_err(|e| WireError::Invariant {
            offset: 1,
            reason: e.to_string(),
        })?;
        if distance_mm > MAX_RANGING_DISTANCE_MM {
            return Err(WireError::Invariant {
                offset: 13,
                reason: format!(
                    "distance {distance_mm} mm exceeds the {MAX_RANGING_DISTANCE_MM} mm ranging ceiling"
                ),
            });
        }
        Ok(RangingReport {
            pair,
            time_ms,
            distance_mm,
        })
    }

    pub fn pair(&self) -> PairKey {
        self.pair
    }

    pub fn uav_a(&self) -> UavId {
        self.pair.a()
    }

    pub fn uav_b(&self) -> UavId {
        self.pair.b()
    }

    pub fn distance_mm(&self) -> u32 {
        self.distance_mm
    }

    pub fn distance_m(&self) -> f64 {
        f64::from(self.distance_mm) / 1000.0
    }
}

/// Any message that can appear on the telemetry stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Message {
    Position(PositionReport),
    Ranging(RangingReport),
}

impl Message {
    pub fn time_ms(&self) -> u64 {
        match self {
            Message::Position(p) => p.time_ms,
            Message::Ranging(r) => r.time_ms,
        }
    }
}

/// Encodes a message into its frame payload. Panics if the payload would
/// exceed [`MAX_FRAME_PAYLOAD`]; the fixed layouts make that impossible, and
/// the assert keeps it that way if the layouts ever grow.
pub fn encode(msg: &Message) -> Vec<u8> {
    let bytes = match msg {
        Message::Position(p) => {
            let mut b = Vec::with_capacity(POSITION_FRAME_LEN);
            b.push(POSITION_TYPE);
            b.extend_from_slice(&p.uav.get().to_le_bytes());
            b.extend_from_slice(&p.time_ms.to_le_bytes());
            b.extend_from_slice(&p.coordinate.latitude_deg.to_le_bytes());
            b.extend_from_slice(&p.coordinate.longitude_deg.to_le_bytes());
            b.extend_from_slice(&(p.coordinate.altitude_m as f32).to_le_bytes());
            b
        }
        Message::Ranging(r) => {
            let mut b = Vec::with_capacity(RANGING_FRAME_LEN);
            b.push(RANGING_TYPE);
            b.extend_from_slice(&r.uav_a().get().to_le_bytes());
            b.extend_from_slice(&r.uav_b().get().to_le_bytes());
            b.extend_from_slice(&r.time_ms.to_le_bytes());
            b.extend_from_slice(&r.distance_mm.to_le_bytes());
            b
        }
    };
    assert!(
        bytes.len() <= MAX_FRAME_PAYLOAD,
        "frame payload {} exceeds the {} byte telemetry budget",
        bytes.len(),
        MAX_FRAME_PAYLOAD
    );
    bytes
}

fn le_u16(frame: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([frame[at], frame[at + 1]])
}

fn le_u32(frame: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(frame[at..at + 4].try_into().unwrap())
}

fn le_u64(frame: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(frame[at..at + 8].try_into().unwrap())
}

fn le_f64(frame: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(frame[at..at + 8].try_into().unwrap())
}

fn uav_id_at(frame: &[u8], at: usize) -> Result<UavId, WireError> {
    UavId::new(le_u16(frame, at)).map_err(|e: IdError| WireError::Invariant {
        offset: at,
        reason: e.to_string(),
    })
}

/// Decodes one frame payload. Errors name the offending offset within the
/// frame so stream diagnostics can point at the byte.
pub fn decode(frame: &[u8]) -> Result<Message, WireError> {
    let Some(&type_byte) = frame.first() else {
        return Err(WireError::WrongLength {
            offset: 0,
            expected: 1,
            got: 0,
        });
    };
    match type_byte {
        POSITION_TYPE => {
            if frame.len() != POSITION_FRAME_LEN {
                return Err(WireError::WrongLength {
                    offset: 0,
                    expected: POSITION_FRAME_LEN,
                    got: frame.len(),
                });
            }
            let uav = uav_id_at(frame, 1)?;
            let time_ms = le_u64(frame, 3);
            let latitude_deg = le_f64(frame, 11);
            let longitude_deg = le_f64(frame, 19);
            let altitude_m = f32::from_le_bytes(frame[27..31].try_into().unwrap());
            Ok(Message::Position(PositionReport {
                uav,
                time_ms,
                coordinate: GeoCoordinate {
                    latitude_deg,
                    longitude_deg,
                    altitude_m: f64::from(altitude_m),
                },
            }))
        }
        RANGING_TYPE => {
            if frame.len() != RANGING_FRAME_LEN {
                return Err(WireError::WrongLength {
                    offset: 0,
                    expected: RANGING_FRAME_LEN,
                    got: frame.len(),
                });
            }
            let a = uav_id_at(frame, 1)?;
            let b = uav_id_at(frame, 3)?;
            if a >= b {
                return Err(WireError::Invariant {
                    offset: 1,
                    reason: format!("uav_a ({}) must be < uav_b ({})", a.get(), b.get()),
                });
            }
            let time_ms = le_u64(frame, 5);
            let distance_mm = le_u32(frame, 13);
            RangingReport::new(a, b, time_ms, distance_mm).map(Message::Ranging)
        }
        byte => Err(WireError::UnknownType { offset: 0, byte }),
    }
}

/// Appends one length-prefixed frame to a stream buffer.
pub fn write_frame(stream: &mut Vec<u8>, msg: &Message) {
    let payload = encode(msg);
    stream.push(payload.len() as u8);
    stream.extend_from_slice(&payload);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u16) -> UavId {
        UavId::new(n).unwrap()
    }

    // ---- encode ----

    #[test]
    fn zeroed_ranging_frame_bytes() {
        let msg = Message::Ranging(RangingReport::new(id(1), id(2), 0, 0).unwrap());
        let mut want = vec![0x02, 0x01, 0x00, 0x02, 0x00];
        want.extend_from_slice(&[0; 8]);
        want.extend_from_slice(&[0; 4]);
        let got = encode(&msg);
        assert_eq!(got, want);
        assert_eq!(got.len(), RANGING_FRAME_LEN);
    }

    #[test]
    fn frame_sizes_fit_telemetry_budget() {
        let pos = Message::Position(PositionReport::new(
            id(7),
            123,
            GeoCoordinate::new(52.0, 14.0, 100.0).unwrap(),
        ));
        let rng = Message::Ranging(RangingReport::new(id(1), id(7), 123, 42_000).unwrap());
        assert_eq!(encode(&pos).len(), POSITION_FRAME_LEN);
        assert_eq!(encode(&rng).len(), RANGING_FRAME_LEN);
        assert!(POSITION_FRAME_LEN <= MAX_FRAME_PAYLOAD);
        assert!(RANGING_FRAME_LEN <= MAX_FRAME_PAYLOAD);
    }

    // ---- decode ----

    #[test]
    fn position_round_trip_is_exact() {
        let msg = Message::Position(PositionReport::new(
            id(3),
            1_499_500,
            GeoCoordinate::new(52.123456, -14.654321, 87.25).unwrap(),
        ));
        assert_eq!(decode(&encode(&msg)).unwrap(), msg);
    }

    #[test]
    fn altitude_is_quantized_at_construction() {
        let alt = 123.456_789_012_345;
        let report = PositionReport::new(id(1), 0, GeoCoordinate::new(0.0, 0.0, alt).unwrap());
        assert_eq!(report.coordinate.altitude_m, alt as f32 as f64);
        let msg = Message::Position(report);
        assert_eq!(decode(&encode(&msg)).unwrap(), msg);
    }

    #[test]
    fn unknown_type_byte_is_rejected() {
        let err = decode(&[0x7f, 0, 0]).unwrap_err();
        assert_eq!(
            err,
            WireError::UnknownType {
                offset: 0,
                byte: 0x7f
            }
        );
    }

    #[test]
    fn short_frames_are_rejected() {
        let msg = Message::Ranging(RangingReport::new(id(1), id(2), 9, 1000).unwrap());
        let mut bytes = encode(&msg);
        bytes.truncate(10);
        assert_eq!(
            decode(&bytes).unwrap_err(),
            WireError::WrongLength {
                offset: 0,
                expected: RANGING_FRAME_LEN,
                got: 10
            }
        );
        assert_eq!(
            decode(&[]).unwrap_err(),
            WireError::WrongLength {
                offset: 0,
                expected: 1,
                got: 0
            }
        );
    }

    #[test]
    fn non_canonical_pair_order_is_rejected() {
        let mut bytes = encode(&Message::Ranging(
            RangingReport::new(id(1), id(2), 0, 0).unwrap(),
        ));
        // Swap uav_a and uav_b on the wire: 2 before 1.
        bytes[1] = 0x02;
        bytes[3] = 0x01;
        let err = decode(&bytes).unwrap_err();
        assert!(matches!(err, WireError::Invariant { offset: 1, .. }), "{err:?}");
    }

    #[test]
    fn zero_uav_id_is_rejected() {
        let mut bytes = encode(&Message::Ranging(
            RangingReport::new(id(1), id(2), 0, 0).unwrap(),
        ));
        bytes[1] = 0x00;
        assert!(matches!(
            decode(&bytes).unwrap_err(),
            WireError::Invariant { offset: 1, .. }
        ));
    }

    #[test]
    fn ranging_ceiling_is_enforced() {
        assert!(RangingReport::new(id(1), id(2), 0, MAX_RANGING_DISTANCE_MM).is_ok());
        assert!(matches!(
            RangingReport::new(id(1), id(2), 0, MAX_RANGING_DISTANCE_MM + 1),
            Err(WireError::Invariant { offset: 13, .. })
        ));
    }

    // ---- framing ----

    #[test]
    fn write_frame_prefixes_length() {
        let msg = Message::Ranging(RangingReport::new(id(1), id(2), 5, 12_345).unwrap());
        let mut stream = Vec::new();
        write_frame(&mut stream, &msg);
        assert_eq!(stream[0] as usize, RANGING_FRAME_LEN);
        assert_eq!(decode(&stream[1..]).unwrap(), msg);
    }
}
