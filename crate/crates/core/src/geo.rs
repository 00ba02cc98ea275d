//! Great-circle distance from GPS coordinates.
//!
//! Link distances are short enough that a spherical earth is adequate; no
//! ellipsoid correction is applied.

use crate::error::{Error, Result};

/// Mean earth radius, m.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance between two points via the haversine formula, on a
/// sphere of the given radius. Coordinates in degrees, result in the radius
/// unit.
pub fn spherical_distance(
    lat1_deg: f64,
    lon1_deg: f64,
    lat2_deg: f64,
    lon2_deg: f64,
    radius_m: f64,
) -> Result<f64> {
    for (name, v, lim) in [
        ("lat1", lat1_deg, 90.0),
        ("lat2", lat2_deg, 90.0),
        ("lon1", lon1_deg, 180.0),
        ("lon2", lon2_deg, 180.0),
    ] {
        if !v.is_finite() || v.abs() > lim {
            return Err(Error::validation(format!(
                "{name} = {v} outside [-{lim}, {lim}]"
            )));
        }
    }
    if !(radius_m > 0.0) {
        return Err(Error::validation("radius must be > 0"));
    }

    let phi1 = lat1_deg.to_radians();
    let phi2 = lat2_deg.to_radians();
    let dphi = (lat2_deg - lat1_deg).to_radians();
    let dlambda = (lon2_deg - lon1_deg).to_radians();

    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    Ok(2.0 * radius_m * a.sqrt().min(1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_separation() {
        let d = spherical_distance(25.757, -80.374, 25.757, -80.374, EARTH_RADIUS_M).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn antipodal_on_equator() {
        let d = spherical_distance(0.0, 0.0, 0.0, 180.0, 1.0).unwrap();
        assert!((d - PI).abs() < 1e-12);
    }

    #[test]
    fn short_north_south_hop() {
        // Frozen from an independent haversine evaluation of the same inputs.
        let d = spherical_distance(25.757, -80.374, 25.758, -80.374, EARTH_RADIUS_M).unwrap();
        assert!(
            (d - 111.19492664429958).abs() < 1e-6,
            "got {d}"
        );
        // Same-longitude distance reduces to R * dphi.
        let oracle = EARTH_RADIUS_M * 0.001f64.to_radians();
        assert!((d - oracle).abs() < 1e-6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(spherical_distance(91.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(spherical_distance(0.0, 181.0, 0.0, 0.0, 1.0).is_err());
        assert!(spherical_distance(0.0, 0.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(spherical_distance(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn symmetric() {
        let a = spherical_distance(25.757, -80.374, 25.99, -80.1, EARTH_RADIUS_M).unwrap();
        let b = spherical_distance(25.99, -80.1, 25.757, -80.374, EARTH_RADIUS_M).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
