use super::EpsteinError;
use crate::action::{refined_integral, ActionError, IntegralEstimate, QuadratureGrid};
use crate::conformal::{ConformalError, ConformalMap, Jet, LaurentMap, PowerSeriesMap};
use crate::numeric::C;
use serde::Serialize;

/// Width of the band around `‖ϑ‖ = 1` treated as the immersion boundary.
pub const IMMERSION_BOUNDARY_BAND: f64 = 1e-8;

/// Principal curvatures of an Epstein–Poincaré surface and of its
/// fundamental forms at infinity, with the mean-curvature density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    pub k_plus: f64,
    /// `+∞` on the immersion boundary.
    pub k_minus: f64,
    pub khat_plus: f64,
    pub khat_minus: f64,
    /// `+∞` on the immersion boundary.
    pub mean_curvature: f64,
    pub mean_curvature_at_infinity: f64,
    /// `‖ϑ‖ = |S|(1 − |p|²)²/4` in the map's disk chart.
    pub schwarzian_norm: f64,
    /// `H da` per unit Lebesgue measure of the disk chart, `|S|²(1 − |p|²)²/4`.
    pub mean_density: f64,
    pub immersion_boundary: bool,
}

impl CurvatureData {
    /// Curvatures from the Schwarzian `s` at chart point `p` of the unit disk.
    pub fn from_schwarzian(s: C, p: C) -> Self {
        let a = 1.0 - p.norm_sqr();
        let t = s.norm() * a * a / 4.0;
        let boundary = (t - 1.0).abs() < IMMERSION_BOUNDARY_BAND;
        let (k_minus, mean_curvature) =
            if boundary { (f64::INFINITY, f64::INFINITY) } else { (-t / (t - 1.0), t * t / (1.0 - t * t)) };
        Self {
            k_plus: -t / (t + 1.0),
            k_minus,
            khat_plus: 1.0 + 2.0 * t,
            khat_minus: 1.0 - 2.0 * t,
            mean_curvature,
            mean_curvature_at_infinity: 1.0,
            schwarzian_norm: t,
            mean_density: s.norm_sqr() * a * a / 4.0,
            immersion_boundary: boundary,
        }
    }
}

/// Curvatures of the interior surface at `ζ`.
pub fn curvatures(f: &PowerSeriesMap, zeta: C) -> Result<CurvatureData, EpsteinError> {
    if zeta.norm() >= 1.0 {
        return Err(ConformalError::Domain { z: zeta, reason: "outside the open unit disk" }.into());
    }
    Ok(CurvatureData::from_schwarzian(f.jet(zeta)?.schwarzian()?, zeta))
}

/// Curvatures of the exterior surface at `w = 1/u`, using the chart
/// `u ↦ 1/g(1/u)` whose Schwarzian is `S(g)(w)·w⁴`.
pub fn curvatures_exterior(g: &LaurentMap, u: C) -> Result<CurvatureData, EpsteinError> {
    if u.norm() >= 1.0 {
        return Err(ConformalError::Domain { z: u, reason: "u = 1/w outside the open unit disk" }.into());
    }
    let jet: Jet = g.inverted_jet(u)?;
    Ok(CurvatureData::from_schwarzian(jet.schwarzian()?, u))
}

/// Total mean curvature `∫ |S|²(1 − |p|²)²/4 d²p` over the map's domain.
pub fn mean_curvature_total<M>(map: &M, grid: &QuadratureGrid) -> Result<IntegralEstimate, EpsteinError>
where
    M: ConformalMap + Sync + ?Sized,
{
    if map.domain() != grid.domain() {
        return Err(ActionError::DomainMismatch { map: map.domain(), grid: grid.domain() }.into());
    }
    Ok(refined_integral(grid, |p| {
        let s = map.jet(p)?.schwarzian()?;
        let a = 1.0 - p.norm_sqr();
        Ok(s.norm_sqr() * a * a / 4.0)
    })?)
}
