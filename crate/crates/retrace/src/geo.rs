//! Planar-on-sphere geometry primitives.
//!
//! Great-circle distances, initial bearings, point-to-segment distance and
//! turn-angle classification. Everything here is a pure function over
//! [`GeoPoint`]s; concurrent callers need no synchronization.
//!
//! Distances use the mean Earth radius so identical inputs always produce
//! bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Heading changes of at least this many degrees count as a cornering event.
pub const TURN_ANGLE_MIN_DEG: f64 = 60.0;

/// A WGS-84 style latitude/longitude pair in degrees.
///
/// Latitude is confined to `[-90, 90]`; longitude is normalized into
/// `[-180, 180)` on construction.
///
/// ```
/// use retrace::geo::GeoPoint;
/// let p = GeoPoint::new(52.0, 190.0).unwrap();
/// assert_eq!(p.lon_deg, -170.0);
/// assert!(GeoPoint::new(91.0, 0.0).is_err());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self> {
        if !lat_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return Err(Error::InvalidCoordinate(format!(
                "latitude {lat_deg} outside [-90, 90]"
            )));
        }
        if !lon_deg.is_finite() {
            return Err(Error::InvalidCoordinate(format!(
                "longitude {lon_deg} is not finite"
            )));
        }
        Ok(GeoPoint {
            lat_deg,
            lon_deg: normalize_lon(lon_deg),
        })
    }
}

fn normalize_lon(lon: f64) -> f64 {
    let mut l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l == 180.0 {
        l = -180.0;
    }
    l
}

/// Which way a heading change bends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurnKind {
    Straight,
    TurnLeft,
    TurnRight,
}

/// Classification of the heading change between two consecutive roads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnClass {
    /// Unsigned angle between the headings, in `[0, 180]`.
    pub angle_deg: f64,
    pub kind: TurnKind,
}

/// Great-circle distance between two points, in kilometers.
///
/// ```
/// use retrace::geo::{haversine_km, GeoPoint};
/// let a = GeoPoint::new(0.0, 0.0).unwrap();
/// let b = GeoPoint::new(1.0, 0.0).unwrap();
/// assert!((haversine_km(a, b) - 111.195).abs() < 1e-3);
/// ```
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlat = (b.lat_deg - a.lat_deg).to_radians();
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Minimum distance from `p` to the segment `seg_start`–`seg_end`, in km.
///
/// The segment is projected into a local equirectangular plane centered on
/// it, the projection parameter is clamped to `[0, 1]`, and the distance to
/// the clamped point is taken with the haversine. Road segments are a few
/// kilometers at most, where the planar approximation error is sub-meter.
pub fn point_segment_km(p: GeoPoint, seg_start: GeoPoint, seg_end: GeoPoint) -> f64 {
    if seg_start == seg_end {
        return haversine_km(p, seg_start);
    }
    let lat0 = ((seg_start.lat_deg + seg_end.lat_deg) / 2.0).to_radians();
    let scale = lat0.cos();
    // local plane coordinates in degree units, longitude scaled by cos(lat)
    let to_xy = |g: GeoPoint| {
        (
            angular_lon_delta(g.lon_deg, seg_start.lon_deg) * scale,
            g.lat_deg - seg_start.lat_deg,
        )
    };
    let (px, py) = to_xy(p);
    let (ex, ey) = to_xy(seg_end);
    let len2 = ex * ex + ey * ey;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((px * ex + py * ey) / len2).clamp(0.0, 1.0)
    };
    let closest = GeoPoint {
        lat_deg: seg_start.lat_deg + t * ey,
        lon_deg: normalize_lon(seg_start.lon_deg + t * (ex / scale)),
    };
    haversine_km(p, closest)
}

/// Signed longitude difference `lon - reference` folded into `[-180, 180)`.
fn angular_lon_delta(lon: f64, reference: f64) -> f64 {
    normalize_lon(lon - reference)
}

/// Initial great-circle bearing from `from` to `to`, degrees in `[0, 360)`.
/// 0 is due north, 90 due east.
///
/// ```
/// use retrace::geo::{bearing_deg, GeoPoint};
/// let o = GeoPoint::new(0.0, 0.0).unwrap();
/// let e = GeoPoint::new(0.0, 1.0).unwrap();
/// assert_eq!(bearing_deg(o, e).unwrap(), 90.0);
/// ```
pub fn bearing_deg(from: GeoPoint, to: GeoPoint) -> Result<f64> {
    if from == to {
        return Err(Error::UndefinedDirection);
    }
    let lat1 = from.lat_deg.to_radians();
    let lat2 = to.lat_deg.to_radians();
    let dlon = (to.lon_deg - from.lon_deg).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    Ok(y.atan2(x).to_degrees().rem_euclid(360.0))
}

/// Classify the heading change from `prev_bearing` to `next_bearing`.
///
/// The angle is the smaller arc between the two headings. Changes below the
/// 60-degree threshold are straight driving; at or above it, the sign of the
/// change picks the direction. A heading change of exactly 180 degrees is
/// classified as a right turn so that the function stays total.
pub fn classify_turn(prev_bearing: f64, next_bearing: f64) -> TurnClass {
    classify_turn_with(prev_bearing, next_bearing, TURN_ANGLE_MIN_DEG)
}

/// [`classify_turn`] with a caller-supplied angle threshold.
pub fn classify_turn_with(prev_bearing: f64, next_bearing: f64, min_deg: f64) -> TurnClass {
    let delta = (next_bearing - prev_bearing).rem_euclid(360.0);
    let angle_deg = delta.min(360.0 - delta);
    let kind = if angle_deg < min_deg {
        TurnKind::Straight
    } else if delta > 0.0 && delta <= 180.0 {
        TurnKind::TurnRight
    } else {
        TurnKind::TurnLeft
    };
    TurnClass { angle_deg, kind }
}
