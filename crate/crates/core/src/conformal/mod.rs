//! Conformal maps of the disk and its exterior, Möbius actions on the sphere
//! and on upper half-space, and boundary-correspondence solvers.

mod curve;
mod mapping;
mod mobius;
mod series;
mod welding;

pub use curve::{CurveSpec, SampledCurve};
pub use mapping::{exterior_map, exterior_map_with, interior_map, interior_map_with, MapperConfig, MappingReport};
pub use mobius::{mobius_on_h3, osculating_mobius, ExtendedPoint, H3Point, MobiusTransform, Quaternion};
pub(crate) use series::horner_jet;
pub use series::{
    equipotential, nonlinearity, schwarzian, ConformalMap, Jet, LaurentMap, MapDomain, PowerSeriesMap,
    SERIES_NOISE_FLOOR,
};
pub use welding::{welding, welding_samples, WELDING_TOLERANCE};

use crate::numeric::C;
use thiserror::Error;

/// Below this modulus a derivative is treated as vanishing.
pub const SINGULAR_DERIVATIVE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("point {z} lies outside the validity region of the map ({reason})")]
    Domain { z: C, reason: &'static str },
    #[error("derivative vanishes (|f'| = {0:e})")]
    SingularDerivative(f64),
    #[error("boundary correspondence stalled after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("nearest boundary match {distance:e} exceeds tolerance {tolerance:e}")]
    Correspondence { distance: f64, tolerance: f64 },
    #[error("curve is not star-shaped about its center")]
    NotStarShaped,
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
}
