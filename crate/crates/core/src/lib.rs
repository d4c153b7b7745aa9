//! Deterministic ray tracing for RIS-assisted millimetre-wave links.

pub mod error;
pub mod geometry;
pub mod scalar;
pub mod scene;
pub mod em;
pub mod tracer;
pub mod ris;
pub mod channel;
pub mod analysis;
pub mod scenarios;
pub mod validate;

pub use error::{Error, Result};
pub use geometry::Vec3;
pub use scalar::Scalar;

/// Point or direction in local east-north-up meters.
pub type Point3 = Vec3<f64>;
