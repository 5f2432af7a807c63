//! Liouville action of a Jordan curve from its interior and exterior maps,
//! the Grunsky area identity, and the first-variation pairing.
//!
//! Integrals over the exterior disk are pulled back by `w = 1/z̄`, so every
//! quadrature runs over radial Gauss–Legendre panels accumulating at the
//! unit circle and a uniform angular trapezoid rule.

use crate::conformal::{horner_jet, ConformalError, ConformalMap, LaurentMap, MapDomain, PowerSeriesMap};
use crate::flow::BeltramiField;
use crate::numeric::{gauss_legendre, pairwise_sum, push_gauss_panel, C};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error("quadrature refinements disagree: {fine} vs {coarse} (tolerance {tolerance:e})")]
    DivergenceSuspected { fine: f64, coarse: f64, tolerance: f64 },
    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),
    #[error("map is defined on {map:?} but the grid covers {grid:?}")]
    DomainMismatch { map: MapDomain, grid: MapDomain },
}

/// Tensor quadrature on the unit disk or, through `w = 1/z̄`, its exterior.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    levels: usize,
    gl_order: usize,
    angular: usize,
    domain: MapDomain,
    tolerance: f64,
    radial: Vec<(f64, f64)>,
}

impl QuadratureGrid {
    pub const DEFAULT_LEVELS: usize = 20;
    pub const DEFAULT_GL_ORDER: usize = 16;
    pub const DEFAULT_ANGULAR: usize = 256;
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    /// Radial panels `[1 − 2^{−k}, 1 − 2^{−k−1}]` for `k < levels` plus a
    /// final panel reaching the circle, each with a `gl_order`-point rule.
    pub fn new(levels: usize, gl_order: usize, angular: usize, domain: MapDomain) -> Result<Self, ActionError> {
        if levels == 0 || levels > 52 {
            return Err(ActionError::InvalidGrid(format!("levels {levels} outside 1..=52")));
        }
        if gl_order < 2 {
            return Err(ActionError::InvalidGrid(format!("Gauss-Legendre order {gl_order} below 2")));
        }
        if angular < 8 || !angular.is_power_of_two() {
            return Err(ActionError::InvalidGrid(format!("angular count {angular} is not a power of two >= 8")));
        }
        let rule = gauss_legendre(gl_order);
        let mut radial = Vec::with_capacity((levels + 1) * gl_order);
        let mut a = 0.0;
        for k in 1..=levels {
            let b = 1.0 - 0.5f64.powi(k as i32);
            push_gauss_panel(a, b, &rule, &mut radial);
            a = b;
        }
        push_gauss_panel(a, 1.0, &rule, &mut radial);
        Ok(Self { levels, gl_order, angular, domain, tolerance: Self::DEFAULT_TOLERANCE, radial })
    }

    pub fn disk() -> Self {
        Self::new(Self::DEFAULT_LEVELS, Self::DEFAULT_GL_ORDER, Self::DEFAULT_ANGULAR, MapDomain::Disk)
            .expect("default grid is valid")
    }

    pub fn exterior() -> Self {
        Self::disk().with_domain(MapDomain::ExteriorDisk)
    }

    pub fn with_domain(&self, domain: MapDomain) -> Self {
        Self { domain, ..self.clone() }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn domain(&self) -> MapDomain {
        self.domain
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn gl_order(&self) -> usize {
        self.gl_order
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.angular
    }

    /// Halves levels, Gauss order and angular count.
    pub fn half_resolution(&self) -> Self {
        let mut g =
            Self::new((self.levels / 2).max(1), (self.gl_order / 2).max(2), (self.angular / 2).max(8), self.domain)
                .expect("halved grid stays valid");
        g.tolerance = self.tolerance;
        g
    }

    /// Point in the grid domain and its area weight.
    fn node(&self, r: f64, wr: f64, j: usize) -> (C, f64) {
        let dtheta = 2.0 * PI / self.angular as f64;
        let e = C::from_polar(1.0, dtheta * j as f64);
        match self.domain {
            MapDomain::Disk => (e * r, wr * r * dtheta),
            MapDomain::ExteriorDisk => (e / r, wr * dtheta / (r * r * r)),
        }
    }

    /// Deterministic quadrature: fixed-order pairwise sums over each ring,
    /// then over rings, independent of the thread count.
    pub fn try_integrate<E, F>(&self, f: F) -> Result<f64, E>
    where
        E: Send,
        F: Fn(C) -> Result<f64, E> + Sync,
    {
        let rings: Vec<f64> = self
            .radial
            .par_iter()
            .map(|&(r, wr)| {
                let vals = (0..self.angular)
                    .map(|j| {
                        let (z, w) = self.node(r, wr, j);
                        f(z).map(|v| v * w)
                    })
                    .collect::<Result<Vec<f64>, E>>()?;
                Ok(pairwise_sum(&vals))
            })
            .collect::<Result<Vec<f64>, E>>()?;
        Ok(pairwise_sum(&rings))
    }

    pub fn integrate<F: Fn(C) -> f64 + Sync>(&self, f: F) -> f64 {
        self.try_integrate::<(), _>(|z| Ok(f(z))).expect("infallible integrand")
    }
}

/// A quadrature value with its half-resolution companion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub coarse: f64,
    pub error: f64,
}

/// Runs `integrand` on `grid` and its half-resolution grid, flagging a
/// disagreement above ten times the grid tolerance.
pub fn refined_integral<F>(grid: &QuadratureGrid, integrand: F) -> Result<IntegralEstimate, ActionError>
where
    F: Fn(C) -> Result<f64, ConformalError> + Sync,
{
    let value = grid.try_integrate(&integrand)?;
    let coarse = grid.half_resolution().try_integrate(&integrand)?;
    let error = (value - coarse).abs();
    if !value.is_finite() || error > 10.0 * grid.tolerance * value.abs().max(1.0) {
        return Err(ActionError::DivergenceSuspected { fine: value, coarse, tolerance: grid.tolerance });
    }
    Ok(IntegralEstimate { value, coarse, error })
}

/// `∫ |f''/f'|² d²z` over the map's domain.
pub fn dirichlet_nonlinearity<M>(map: &M, grid: &QuadratureGrid) -> Result<IntegralEstimate, ActionError>
where
    M: ConformalMap + Sync + ?Sized,
{
    if map.domain() != grid.domain() {
        return Err(ActionError::DomainMismatch { map: map.domain(), grid: grid.domain() });
    }
    refined_integral(grid, |z| Ok(map.jet(z)?.nonlinearity()?.norm_sqr()))
}

/// The three summands of the action and their total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActionReport {
    pub interior_term: f64,
    pub exterior_term: f64,
    pub log_term: f64,
    pub total: f64,
    pub error_estimate: f64,
}

/// Boundary agreement of an interior and exterior map checked on this many angles.
const PAIR_CHECK_SAMPLES: usize = 32;

fn check_same_curve(f: &PowerSeriesMap, g: &LaurentMap) -> Result<(), ConformalError> {
    for k in 0..PAIR_CHECK_SAMPLES {
        crate::conformal::welding(f, g, 2.0 * PI * k as f64 / PAIR_CHECK_SAMPLES as f64)?;
    }
    Ok(())
}

/// `∫_𝔻 |N(f)|² + ∫_𝔻* |N(g)|² + 4π log |f'(0)/g'(∞)|`.
pub fn liouville_action(
    f: &PowerSeriesMap,
    g: &LaurentMap,
    grid: &QuadratureGrid,
) -> Result<ActionReport, ActionError> {
    check_same_curve(f, g)?;
    let interior = dirichlet_nonlinearity(f, &grid.with_domain(MapDomain::Disk))?;
    let exterior = dirichlet_nonlinearity(g, &grid.with_domain(MapDomain::ExteriorDisk))?;
    let log_term = 4.0 * PI * (f.coefficients()[1].norm() / g.derivative_at_infinity().norm()).ln();
    Ok(ActionReport {
        interior_term: interior.value,
        exterior_term: exterior.value,
        log_term,
        total: interior.value + exterior.value + log_term,
        error_estimate: interior.error + exterior.error,
    })
}

/// Both sides of the Grunsky area inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrunskyGap {
    pub lhs: f64,
    pub rhs: f64,
}

/// `lhs = ∫_𝔻 |f'/f − 1/z|² + ∫_𝔻* |g'/g − 1/w|²`, `rhs = 2π log |g'(∞)/f'(0)|`.
pub fn grunsky_gap(f: &PowerSeriesMap, g: &LaurentMap, grid: &QuadratureGrid) -> Result<GrunskyGap, ActionError> {
    let a = f.coefficients();
    if a[0].norm() > 1e-12 {
        return Err(ConformalError::Domain { z: a[0], reason: "interior map must fix the origin" }.into());
    }
    // f'/f − 1/z = F'/F with F = f/z, free of cancellation near 0
    let quotient = &a[1..];
    let inner = refined_integral(&grid.with_domain(MapDomain::Disk), |z| {
        let [v, d1, _, _] = horner_jet(quotient, z);
        Ok((d1 / v).norm_sqr())
    })?;
    // with u = 1/w and g = G(u)/u: g'/g − 1/w = −u² G'(u)/G(u)
    let (b1, b0) = (g.leading(), g.constant());
    let outer = refined_integral(&grid.with_domain(MapDomain::ExteriorDisk), |w| {
        let u = w.inv();
        let [p, p1, _, _] = g.tail_jet(u);
        let big = b1 + b0 * u + u * p;
        let big1 = b0 + p + u * p1;
        Ok((u * u * big1 / big).norm_sqr())
    })?;
    Ok(GrunskyGap { lhs: inner.value + outer.value, rhs: 2.0 * PI * (b1.norm() / a[1].norm()).ln() })
}

/// `4 Re ∫_𝔻* ν S(g) d²w`.
pub fn first_variation_action(g: &LaurentMap, nu: &BeltramiField, grid: &QuadratureGrid) -> Result<f64, ActionError> {
    let est = refined_integral(&grid.with_domain(MapDomain::ExteriorDisk), |w| {
        let s = g.jet(w)?.schwarzian()?;
        Ok(4.0 * (nu.eval(w) * s).re)
    })?;
    Ok(est.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn weights_sum_to_area() {
        let disk = QuadratureGrid::disk();
        assert!((disk.integrate(|_| 1.0) - PI).abs() < 1e-10);
        let ext = QuadratureGrid::exterior();
        assert!((ext.integrate(|w| w.norm_sqr().powi(-2)) - PI).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_of_monomial_series() {
        // N(z + a z²) = 2a/(1 + 2az); ∫|N|² = π Σ_k |2a|²|2a|^{2k}/(k+1)
        let a = 0.1;
        let f = PowerSeriesMap::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(a, 0.0)], 4.0).unwrap();
        let v = dirichlet_nonlinearity(&f, &QuadratureGrid::disk()).unwrap().value;
        let q = (2.0 * a) * (2.0 * a);
        let exact: f64 = (0..200).map(|k| PI * q * q.powi(k) / (k as f64 + 1.0)).sum();
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn exterior_dirichlet_of_joukowski() {
        // N(g) for g = b1 w + b/w expands as Σ m_k w^{-k}; compare with the
        // coefficient-space sum π Σ_{k≥2} |m_k|²/(k−1)
        let (b1, b) = (1.1, 0.1);
        let g = LaurentMap::new(c(b1, 0.0), c(0.0, 0.0), vec![c(b, 0.0)]).unwrap();
        let v = dirichlet_nonlinearity(&g, &QuadratureGrid::exterior()).unwrap().value;
        // N = 2b w^{-3}/(b1 − b w^{-2}) = (2/b1) Σ_j q^{j+1} w^{-(2j+3)}, q = b/b1
        let q = b / b1;
        let exact: f64 = (0..200)
            .map(|j| {
                let m = 2.0 * q.powi(j + 1);
                PI * m * m / (2.0 * j as f64 + 2.0)
            })
            .sum();
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn mismatched_domain_is_rejected() {
        let f = PowerSeriesMap::identity();
        assert!(matches!(
            dirichlet_nonlinearity(&f, &QuadratureGrid::exterior()),
            Err(ActionError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn integration_is_bit_stable_across_pools() {
        let f = PowerSeriesMap::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.1, 0.05)], 4.0).unwrap();
        let grid = QuadratureGrid::disk();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| dirichlet_nonlinearity(&f, &grid).unwrap().value);
        let b = four.install(|| dirichlet_nonlinearity(&f, &grid).unwrap().value);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn identity_pair_has_zero_action_and_gap() {
        let f = PowerSeriesMap::identity();
        let g = LaurentMap::identity();
        let grid = QuadratureGrid::disk();
        let report = liouville_action(&f, &g, &grid).unwrap();
        assert_eq!(report.total, 0.0);
        let gap = grunsky_gap(&f, &g, &grid).unwrap();
        assert_eq!((gap.lhs, gap.rhs), (0.0, 0.0));
    }
}
