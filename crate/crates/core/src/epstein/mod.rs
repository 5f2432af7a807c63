//! Epstein surfaces in upper half-space.
//!
//! A conformal metric `ρ = e^φ |dz|²` on a planar domain determines, at each
//! point `z`, the envelope point of the horospheres based at `z` with
//! Euclidean diameters `e^{−φ/2}`-scaled. For the Poincaré metric of a Jordan
//! domain the construction has a closed form in terms of a Riemann map, which
//! [`epstein_poincare`] (interior) and [`epstein_poincare_exterior`] (exterior,
//! parameterized by `u = 1/w`) evaluate.

mod curvature;
mod frame;
mod io;
mod mesh;
mod separation;

pub use curvature::{curvatures, curvatures_exterior, mean_curvature_total, CurvatureData, IMMERSION_BOUNDARY_BAND};
pub use frame::{
    epstein_poincare, epstein_poincare_exterior, epstein_point, frame_from_jet, geodesic_shift, poincare_sample,
    EpsteinFrame, MetricJet, PoincareSample,
};
pub use io::{read_csv, read_obj, ObjMesh, SurfaceCsvRow};
pub use mesh::{
    fd_mean_curvature_total, fd_principal_curvatures, height_bound_violations, mesh_exterior_surface, mesh_surface,
    HeightBoundReport, SurfaceMesh, SurfaceSide, DEFAULT_R_MAX,
};
pub use separation::surface_separation;

use crate::action::ActionError;
use crate::conformal::ConformalError;

#[derive(Debug, thiserror::Error)]
pub enum EpsteinError {
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Quadrature(#[from] ActionError),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed OBJ at line {line}: {message}")]
    Obj { line: usize, message: String },
}
