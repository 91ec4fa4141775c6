pub mod abfem;
pub mod almgren;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod integrate;
pub mod limit_profile;
pub mod point;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use point::Point;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
