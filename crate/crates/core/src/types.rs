//! Identifier types shared by every subsystem: UAV ids and canonical UAV pairs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from constructing swarm identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    /// UAV ids start at 1; 0 is reserved so zeroed frames never decode as valid.
    #[error("uav id 0 is reserved")]
    ZeroId,
    /// A ranging pair needs two distinct UAVs.
    #[error("uav {0} cannot be paired with itself")]
    SelfPair(u16),
}

/// Identifier of one UAV in a swarm, numbered 1..=n.
///
/// Id 1 is the anchor in the default ranging topology. The id fits in a u16
/// because that is its width on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct UavId(u16);

impl UavId {
    pub fn new(id: u16) -> Result<Self, IdError> {
        if id == 0 {
            return Err(IdError::ZeroId);
        }
        Ok(UavId(id))
    }

    pub const fn get(self) -> u16 {
        self.0
    }

    /// Zero-based index for dense per-UAV storage.
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl TryFrom<u16> for UavId {
    type Error = IdError;

    fn try_from(id: u16) -> Result<Self, IdError> {
        UavId::new(id)
    }
}

impl From<UavId> for u16 {
    fn from(id: UavId) -> u16 {
        id.0
    }
}

impl fmt::Display for UavId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An unordered UAV pair stored in canonical order (`a < b`).
///
/// Serializes as a two-element array, e.g. `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u16, u16)", into = "(u16, u16)")]
pub struct PairKey {
    a: UavId,
    b: UavId,
}

impl PairKey {
    /// Builds the canonical pair from ids in either order.
    pub fn new(x: UavId, y: UavId) -> Result<Self, IdError> {
        if x == y {
            return Err(IdError::SelfPair(x.get()));
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Ok(PairKey { a, b })
    }

    pub const fn a(self) -> UavId {
        self.a
    }

    pub const fn b(self) -> UavId {
        self.b
    }

    pub fn contains(self, id: UavId) -> bool {
        self.a == id || self.b == id
    }

    /// CSV-friendly rendering, e.g. `1-2`.
    pub fn label(self) -> String {
        format!("{}-{}", self.a, self.b)
    }
}

impl TryFrom<(u16, u16)> for PairKey {
    type Error = IdError;

    fn try_from((x, y): (u16, u16)) -> Result<Self, IdError> {
        PairKey::new(UavId::new(x)?, UavId::new(y)?)
    }
}

impl From<PairKey> for (u16, u16) {
    fn from(pair: PairKey) -> (u16, u16) {
        (pair.a.get(), pair.b.get())
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_id() {
        assert_eq!(UavId::new(0), Err(IdError::ZeroId));
        assert_eq!(UavId::new(1).unwrap().get(), 1);
    }

    #[test]
    fn pair_canonicalizes_order() {
        let a = UavId::new(1).unwrap();
        let b = UavId::new(4).unwrap();
        let p = PairKey::new(b, a).unwrap();
        assert_eq!(p.a(), a);
        assert_eq!(p.b(), b);
        assert_eq!(p, PairKey::new(a, b).unwrap());
        assert_eq!(p.label(), "1-4");
    }

    #[test]
    fn pair_rejects_self() {
        let a = UavId::new(3).unwrap();
        assert_eq!(PairKey::new(a, a), Err(IdError::SelfPair(3)));
    }

    #[test]
    fn pair_serializes_as_array() {
        let p = PairKey::try_from((2, 1)).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1,2]");
        let back: PairKey = serde_json::from_str("[1,2]").unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<PairKey>("[2,2]").is_err());
    }
}
