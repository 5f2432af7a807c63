//! Signed volume between the two Epstein–Poincaré surfaces of a Jordan
//! curve and the renormalized volume.
//!
//! The hyperbolic volume form `dx dy dξ/ξ³` is `dω` for
//! `ω = −dx∧dy/(2ξ²)`, so volumes are boundary fluxes of `ω`. The
//! ε-truncated volume is the flux through both surfaces above height `ε`
//! plus the horizontal cap at `ξ = ε` between the two clip curves, where
//! `ω` reduces to `−dx∧dy/(2ε²)`.

mod mesh_flux;
mod parametric;

pub use mesh_flux::{closed_mesh_flux, triangle_flux, truncated_volume};
pub use parametric::{
    renormalized_volume, truncated_volume_parametric, variation_check, volume, VariationCheck, VolumeConfig,
    VolumeEstimate, VolumeReport,
};

use crate::action::ActionError;
use crate::conformal::ConformalError;
use crate::epstein::EpsteinError;
use crate::flow::FlowError;

#[derive(Debug, thiserror::Error)]
pub enum VolumeError {
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Epstein(#[from] EpsteinError),
    #[error(transparent)]
    Quadrature(#[from] ActionError),
    #[error("Richardson extrapolants disagree by {error:.3e} (tolerance {tolerance:.1e})")]
    NoConvergence { error: f64, tolerance: f64 },
    #[error("clip curves at height {epsilon} form {loops} closed loops with {dangling} dangling segments; expected one loop per surface")]
    CapTopology { epsilon: f64, loops: usize, dangling: usize },
    #[error("no clip radius at angle {theta} for height {epsilon}")]
    Clip { theta: f64, epsilon: f64 },
    #[error("deformed curve rejected: {0}")]
    Deformation(FlowError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
