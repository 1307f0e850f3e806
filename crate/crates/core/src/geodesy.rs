//! Geodetic coordinates and the distance arithmetic the detector runs on:
//! great-circle distance via the spherical law of cosines, a Pythagorean
//! altitude correction, and a flat-earth tangent frame that keeps simulated
//! scenes in metric coordinates.
//!
//! Coordinates are degrees at the API surface; radians exist only inside the
//! distance formula. The law of cosines is known to be ill-conditioned in
//! double precision below roughly a meter of separation, which is why the
//! detector treats "near zero" as anything under a decimeter rather than
//! comparing against exact zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offsets in the tangent frame are only trusted this far from the origin.
/// Beyond ~10 km the flat-earth linearization error stops being negligible
/// next to GPS noise.
pub const LOCAL_FRAME_BOUND_M: f64 = 10_000.0;

/// Mean Earth radius in meters used by all spherical arithmetic.
pub const MEAN_EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesyError {
    #[error("latitude {0} outside [-90, 90] degrees")]
    InvalidLatitude(f64),
    #[error("longitude {0} outside [-180, 180] degrees")]
    InvalidLongitude(f64),
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("flat distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("{axis} offset {value} m exceeds the {bound} m tangent-frame bound")]
    OffsetOutOfRange {
        axis: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("frame origin latitude {0} too close to a pole")]
    PolarOrigin(f64),
}

/// A geodetic position: latitude/longitude in degrees, altitude in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoordinate {
    /// Degrees in [-90, +90].
    pub latitude_deg: f64,
    /// Degrees in [-180, +180].
    pub longitude_deg: f64,
    /// Meters above the shared reference level.
    pub altitude_m: f64,
}

impl GeoCoordinate {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self, GeodesyError> {
        let c = GeoCoordinate {
            latitude_deg,
            longitude_deg,
            altitude_m,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), GeodesyError> {
        if !self.latitude_deg.is_finite() || self.latitude_deg.abs() > 90.0 {
            return Err(GeodesyError::InvalidLatitude(self.latitude_deg));
        }
        if !self.longitude_deg.is_finite() || self.longitude_deg.abs() > 180.0 {
            return Err(GeodesyError::InvalidLongitude(self.longitude_deg));
        }
        if !self.altitude_m.is_finite() {
            return Err(GeodesyError::NonFinite {
                field: "altitude_m",
                value: self.altitude_m,
            });
        }
        Ok(())
    }
}

/// Spherical Earth model; only the mean radius matters here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthModel {
    pub mean_radius_m: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        EarthModel {
            mean_radius_m: MEAN_EARTH_RADIUS_M,
        }
    }
}

/// Great-circle distance in meters between two coordinates, altitude ignored.
///
/// Implements the spherical law of cosines:
/// `arccos(sin(phi_a) sin(phi_b) + cos(phi_a) cos(phi_b) cos(d_lambda)) * R`.
pub fn spherical_distance(
    a: &GeoCoordinate,
    b: &GeoCoordinate,
    earth: &EarthModel,
) -> Result<f64, GeodesyError> {
    a.validate()?;
    b.validate()?;
    // Identical coordinates are distance zero by definition. Near the
    // argument 1 the arccosine loses ~8 significant digits, enough to turn
    // "same point" into ~0.09 m, which would sit uncomfortably close to the
    // detector's 0.1 m co-location tolerance.
    if a.latitude_deg == b.latitude_deg && a.longitude_deg == b.longitude_deg {
        return Ok(0.0);
    }
    let phi_a = a.latitude_deg.to_radians();
    let phi_b = b.latitude_deg.to_radians();
    let d_lambda = b.longitude_deg.to_radians() - a.longitude_deg.to_radians();
    let cos_arc = phi_a.sin() * phi_b.sin() + phi_a.cos() * phi_b.cos() * d_lambda.cos();
    // Rounding pushes the sum slightly past 1 for near-identical points, and
    // acos outside [-1, 1] is NaN. The detector evaluates exactly that case
    // whenever two victims report the same spoofed fix, so the clamp is
    // load-bearing, not defensive.
    Ok(cos_arc.clamp(-1.0, 1.0).acos() * earth.mean_radius_m)
}

/// Combines a flat (great-circle) distance with an altitude difference by the
/// Pythagorean theorem: `sqrt(d_flat^2 + (alt_a - alt_b)^2)`.
pub fn altitude_adjusted_distance(
    d_flat_m: f64,
    alt_a_m: f64,
    alt_b_m: f64,
) -> Result<f64, GeodesyError> {
    if !d_flat_m.is_finite() {
        return Err(GeodesyError::NonFinite {
            field: "d_flat_m",
            value: d_flat_m,
        });
    }
    if d_flat_m < 0.0 {
        return Err(GeodesyError::NegativeDistance(d_flat_m));
    }
    for (field, value) in [("alt_a_m", alt_a_m), ("alt_b_m", alt_b_m)] {
        if !value.is_finite() {
            return Err(GeodesyError::NonFinite { field, value });
        }
    }
    Ok(d_flat_m.hypot(alt_a_m - alt_b_m))
}

/// A local east/north/up tangent plane anchored at a geodetic origin.
///
/// The simulator plans trajectories in this frame; UAVs report geodetic
/// coordinates obtained through [`local_to_geodetic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: GeoCoordinate,
}

impl LocalFrame {
    pub fn new(origin: GeoCoordinate) -> Result<Self, GeodesyError> {
        origin.validate()?;
        // At a pole the east axis degenerates (cos(lat) = 0).
        if origin.latitude_deg.abs() >= 90.0 {
            return Err(GeodesyError::PolarOrigin(origin.latitude_deg));
        }
        Ok(LocalFrame { origin })
    }

    /// Convenience wrapper around [`local_to_geodetic`].
    pub fn to_geodetic(
        &self,
        east_m: f64,
        north_m: f64,
        up_m: f64,
        earth: &EarthModel,
    ) -> Result<GeoCoordinate, GeodesyError> {
        local_to_geodetic(self, east_m, north_m, up_m, earth)
    }

    /// Inverse of [`local_to_geodetic`]; used to project reported fixes back
    /// into scene coordinates.
    pub fn to_local(&self, coordinate: &GeoCoordinate, earth: &EarthModel) -> (f64, f64, f64) {
        let r = earth.mean_radius_m;
        let north = (coordinate.latitude_deg - self.origin.latitude_deg).to_radians() * r;
        let east = (coordinate.longitude_deg - self.origin.longitude_deg).to_radians()
            * r
            * self.origin.latitude_deg.to_radians().cos();
        let up = coordinate.altitude_m - self.origin.altitude_m;
        (east, north, up)
    }
}

/// Maps a metric east/north/up offset to a geodetic coordinate:
/// `lat = lat0 + north/R`, `lon = lon0 + east/(R cos(lat0))`, both converted
/// back to degrees, `alt = alt0 + up`.
///
/// Horizontal offsets beyond [`LOCAL_FRAME_BOUND_M`] are rejected because the
/// flat-earth linearization is no longer trustworthy there.
pub fn local_to_geodetic(
    frame: &LocalFrame,
    east_m: f64,
    north_m: f64,
    up_m: f64,
    earth: &EarthModel,
) -> Result<GeoCoordinate, GeodesyError> {
    for (axis, value) in [("east", east_m), ("north", north_m)] {
        if !value.is_finite() {
            return Err(GeodesyError::NonFinite {
                field: "offset",
                value,
            });
        }
        if value.abs() > LOCAL_FRAME_BOUND_M {
            return Err(GeodesyError::OffsetOutOfRange {
                axis,
                value,
                bound: LOCAL_FRAME_BOUND_M,
            });
        }
    }
    if !up_m.is_finite() {
        return Err(GeodesyError::NonFinite {
            field: "up_m",
            value: up_m,
        });
    }
    let r = earth.mean_radius_m;
    let lat = frame.origin.latitude_deg + (north_m / r).to_degrees();
    let lon = frame.origin.longitude_deg
        + (east_m / (r * frame.origin.latitude_deg.to_radians().cos())).to_degrees();
    GeoCoordinate::new(lat, lon, frame.origin.altitude_m + up_m)
}
