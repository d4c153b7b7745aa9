//! Geodetic anchor and the equirectangular conversion to local east/north meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Meters per degree of latitude (and of longitude at the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoAnchor {
    #[serde(rename = "lat")]
    pub latitude_deg: f64,
    #[serde(rename = "lon")]
    pub longitude_deg: f64,
}

impl GeoAnchor {
    pub fn new(latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        let a = Self {
            latitude_deg,
            longitude_deg,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::InvalidScene(format!(
                "latitude {} outside [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::InvalidScene(format!(
                "longitude {} outside [-180, 180]",
                self.longitude_deg
            )));
        }
        Ok(())
    }
}

/// East/north offset in meters of `point` relative to `anchor`.
///
/// Equirectangular approximation; intended for offsets below about 0.1°.
pub fn geo_to_local(anchor: GeoAnchor, point: GeoAnchor) -> [f64; 2] {
    let dlat = point.latitude_deg - anchor.latitude_deg;
    let dlon = point.longitude_deg - anchor.longitude_deg;
    let east = dlon * anchor.latitude_deg.to_radians().cos() * METERS_PER_DEGREE;
    let north = dlat * METERS_PER_DEGREE;
    [east, north]
}
