//! Theodorsen iteration for star-shaped curves.
//!
//! In polar form about an interior point `z_c`, the boundary correspondence
//! `θ ↦ S(θ)` of the interior map satisfies
//! `Φ(S(θ)) = θ + K[log |c(S(θ)) − z_c|](θ)`, where `Φ` is the unwrapped polar
//! angle of the curve and `K` the periodic conjugate function. The exterior
//! map is the interior map of the inverted curve `1/(c − z_c)`.

use super::curve::{polygon_centroid, CurveSpec};
use super::series::{ConformalMap, LaurentMap, PowerSeriesMap};
use super::ConformalError;
use crate::numeric::{conjugate_function, fourier_coefficients, C};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapperConfig {
    /// Fixed-point tolerance on the boundary correspondence.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial truncation order; boundary samples are four times this.
    pub order: usize,
    pub max_order: usize,
    /// Order doubles until the last quartile of coefficients is below this,
    /// relative to the leading coefficient.
    pub tail_tol: f64,
    /// Largest accepted boundary mismatch of the truncated map.
    pub residual_tol: f64,
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, order: 128, max_order: 2048, tail_tol: 1e-12, residual_tol: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MappingReport {
    pub iterations: usize,
    /// Last fixed-point update of the correspondence.
    pub correction: f64,
    /// Max distance from the truncated map's boundary values to the curve,
    /// measured at points midway between the fitting nodes.
    pub residual: f64,
    pub order: usize,
    /// Largest relative coefficient in the last quartile.
    pub tail: f64,
    /// Largest relative coefficient of the wrong analytic type.
    pub leakage: f64,
}

/// Unwrapped polar angle of a closed curve about a center, with inversion.
struct PolarCurve<'a> {
    curve: &'a dyn Fn(f64) -> (C, C),
    center: C,
    table_t: Vec<f64>,
    table_phi: Vec<f64>,
}

impl<'a> PolarCurve<'a> {
    fn new(curve: &'a dyn Fn(f64) -> (C, C), center: C, samples: usize) -> Result<Self, ConformalError> {
        let mut table_t = Vec::with_capacity(samples + 1);
        let mut table_phi = Vec::with_capacity(samples + 1);
        let mut prev = 0.0;
        for i in 0..=samples {
            let t = 2.0 * PI * i as f64 / samples as f64;
            let (p, dp) = curve(t);
            let v = p - center;
            if v.norm() == 0.0 || (dp / v).im <= 0.0 {
                return Err(ConformalError::NotStarShaped);
            }
            let raw = v.arg();
            let phi = if i == 0 { raw } else { prev + wrap(raw - prev) };
            if i > 0 && phi <= prev {
                return Err(ConformalError::NotStarShaped);
            }
            table_t.push(t);
            table_phi.push(phi);
            prev = phi;
        }
        let turn = table_phi[samples] - table_phi[0];
        if (turn - 2.0 * PI).abs() > 1e-6 {
            return Err(ConformalError::NotStarShaped);
        }
        Ok(Self { curve, center, table_t, table_phi })
    }

    fn eval(&self, t: f64) -> (C, C) {
        (self.curve)(t)
    }

    /// Parameter `t` with unwrapped polar angle equal to `target`.
    fn invert(&self, target: f64) -> f64 {
        let phi0 = self.table_phi[0];
        let turns = ((target - phi0) / (2.0 * PI)).floor();
        let reduced = target - 2.0 * PI * turns;
        let idx = self.table_phi.partition_point(|&p| p <= reduced).clamp(1, self.table_phi.len() - 1);
        let (mut lo, mut hi) = (self.table_t[idx - 1], self.table_t[idx]);
        let (plo, phi_hi) = (self.table_phi[idx - 1], self.table_phi[idx]);
        let mut t = lo + (hi - lo) * (reduced - plo) / (phi_hi - plo);
        for _ in 0..60 {
            let (p, dp) = self.eval(t);
            let v = p - self.center;
            let r = wrap(v.arg() - reduced);
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = (dp / v).im;
            let mut next = t - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - t).abs() < 1e-15;
            t = next;
            if done {
                break;
            }
        }
        t + 2.0 * PI * turns
    }
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Solves for `S(θ_j)` on `n` equispaced nodes.
fn theodorsen(polar: &PolarCurve, n: usize, config: &MapperConfig) -> Result<(Vec<f64>, usize, f64), ConformalError> {
    let thetas: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let mut s: Vec<f64> = thetas.iter().map(|&th| polar.invert(th)).collect();
    let mut relax = 1.0;
    let mut last = f64::INFINITY;
    for iter in 1..=config.max_iter {
        let logs: Vec<f64> = s.iter().map(|&t| (polar.eval(t).0 - polar.center).norm().ln()).collect();
        let conj = conjugate_function(&logs);
        let proposal: Vec<f64> = thetas.iter().zip(&conj).map(|(th, k)| polar.invert(th + k)).collect();
        let correction = proposal.iter().zip(&s).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if !correction.is_finite() {
            break;
        }
        if correction > last && relax > 1.0 / 64.0 {
            relax *= 0.5;
        }
        for (q, p) in s.iter_mut().zip(&proposal) {
            *q += relax * (p - *q);
        }
        if correction < config.tol {
            return Ok((s, iter, correction));
        }
        last = correction;
    }
    Err(ConformalError::NonConvergence { iterations: config.max_iter, residual: last })
}

/// A point strictly inside a star-shaped curve used as the polar center.
fn polar_center(curve: &CurveSpec) -> C {
    polygon_centroid(&curve.samples(curve.natural_resolution()))
}

fn relative_max(values: impl Iterator<Item = C>, scale: f64) -> f64 {
    values.map(|c| c.norm() / scale).fold(0.0, f64::max)
}

/// Interior map `f: 𝔻 → Ω` with `f'(0) > 0`.
pub fn interior_map(curve: &CurveSpec) -> Result<PowerSeriesMap, ConformalError> {
    interior_map_with(curve, &MapperConfig::default()).map(|(f, _)| f)
}

pub fn interior_map_with(
    curve: &CurveSpec,
    config: &MapperConfig,
) -> Result<(PowerSeriesMap, MappingReport), ConformalError> {
    if let CurveSpec::InteriorSeries(f) = curve {
        let rot = C::from_polar(1.0, -f.coefficients()[1].arg());
        let mut power = C::new(1.0, 0.0);
        let coeffs = f
            .coefficients()
            .iter()
            .map(|&a| {
                let c = a * power;
                power *= rot;
                c
            })
            .collect();
        let g = PowerSeriesMap::new(coeffs, f.radius_hint())?;
        let report =
            MappingReport { iterations: 0, correction: 0.0, residual: 0.0, order: g.order(), tail: 0.0, leakage: 0.0 };
        return Ok((g, report));
    }
    let center = polar_center(curve);
    let eval = |t: f64| curve.point_and_tangent(t);
    let mut order = config.order.max(4);
    loop {
        let n = 4 * order;
        let polar = PolarCurve::new(&eval, center, 8 * n)?;
        let (s, iterations, correction) = theodorsen(&polar, n, config)?;
        let values: Vec<C> = s.iter().map(|&t| curve.point(t)).collect();
        let coeffs = fourier_coefficients(&values);
        let a1 = coeffs[1].norm();
        let leakage = relative_max(coeffs[n / 2 + 1..].iter().copied(), a1);
        let tail = relative_max(coeffs[3 * order / 4 + 1..=order].iter().copied(), a1);
        if tail > config.tail_tol && order * 2 <= config.max_order {
            order *= 2;
            continue;
        }
        let f = PowerSeriesMap::from_coefficients(coeffs[..=order].to_vec())?;
        let residual = (0..n)
            .map(|j| {
                let z = C::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64);
                let p = f.eval(z).expect("unit circle is in the series domain");
                let t = polar.invert((p - center).arg());
                (p - curve.point(t)).norm()
            })
            .fold(0.0, f64::max);
        if residual > config.residual_tol {
            return Err(ConformalError::NonConvergence { iterations, residual });
        }
        let report = MappingReport { iterations, correction, residual, order, tail, leakage };
        return Ok((f, report));
    }
}

/// Exterior map `g: 𝔻* → Ω*` with `g(∞) = ∞` and `g'(∞) > 0`.
pub fn exterior_map(curve: &CurveSpec) -> Result<LaurentMap, ConformalError> {
    exterior_map_with(curve, &MapperConfig::default()).map(|(g, _)| g)
}

pub fn exterior_map_with(
    curve: &CurveSpec,
    config: &MapperConfig,
) -> Result<(LaurentMap, MappingReport), ConformalError> {
    let center = polar_center(curve);
    let forward = |t: f64| curve.point_and_tangent(t);
    let inverted = |t: f64| {
        let (p, dp) = curve.point_and_tangent(-t);
        let v = p - center;
        (v.inv(), dp / (v * v))
    };
    let mut order = config.order.max(4);
    loop {
        let n = 4 * order;
        let polar_inv = PolarCurve::new(&inverted, C::new(0.0, 0.0), 8 * n)?;
        let (s, iterations, correction) = theodorsen(&polar_inv, n, config)?;
        let values: Vec<C> = (0..n).map(|j| curve.point(-s[(n - j) % n])).collect();
        let coeffs = fourier_coefficients(&values);
        let b1 = coeffs[1];
        let scale = b1.norm();
        let leakage = relative_max(coeffs[2..=n / 2].iter().copied(), scale);
        let negative: Vec<C> = (1..=order).map(|m| coeffs[n - m]).collect();
        let tail = relative_max(negative[3 * order / 4..].iter().copied(), scale);
        if tail > config.tail_tol && order * 2 <= config.max_order {
            order *= 2;
            continue;
        }
        let g = LaurentMap::new(C::new(scale, 0.0), coeffs[0], negative)?;
        let polar = PolarCurve::new(&forward, center, 8 * n)?;
        let residual = (0..n)
            .map(|j| {
                let w = C::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64);
                let p = g.eval(w).expect("unit circle is in the exterior domain");
                let t = polar.invert((p - center).arg());
                (p - curve.point(t)).norm()
            })
            .fold(0.0, f64::max);
        if residual > config.residual_tol {
            return Err(ConformalError::NonConvergence { iterations, residual });
        }
        let report = MappingReport { iterations, correction, residual, order, tail, leakage };
        return Ok((g, report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse_curve() -> CurveSpec {
        let pts = (0..64)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 64.0;
                C::new(1.2 * t.cos(), t.sin())
            })
            .collect();
        CurveSpec::from_points(pts).unwrap()
    }

    #[test]
    fn circle_exterior_is_identity() {
        let circle = CurveSpec::from_series(PowerSeriesMap::identity()).unwrap();
        let g = exterior_map(&circle).unwrap();
        assert!((g.leading() - C::new(1.0, 0.0)).norm() < 1e-10);
        assert!(g.constant().norm() < 1e-10);
        assert!(g.negative_coefficients().iter().all(|c| c.norm() < 1e-10));
    }

    #[test]
    fn ellipse_exterior_is_joukowski() {
        let (g, report) = exterior_map_with(&ellipse_curve(), &MapperConfig::default()).unwrap();
        assert!((g.leading() - C::new(1.1, 0.0)).norm() < 1e-10, "{:?}", g.leading());
        assert!((g.negative_coefficients()[0] - C::new(0.1, 0.0)).norm() < 1e-10);
        assert!(g.negative_coefficients()[1..].iter().all(|c| c.norm() < 1e-10));
        assert!(report.residual < 1e-10);
    }

    #[test]
    fn ellipse_interior_is_symmetric() {
        let (f, report) = interior_map_with(&ellipse_curve(), &MapperConfig::default()).unwrap();
        assert!(report.residual < 1e-8);
        let a = f.coefficients();
        assert!(a[0].norm() < 1e-12);
        assert!(a[1].im.abs() < 1e-12 && a[1].re > 1.0);
        // symmetry under z ↦ −z and conjugation forces odd real coefficients
        for (k, c) in a.iter().enumerate() {
            if k % 2 == 0 {
                assert!(c.norm() < 1e-10, "a_{k} = {c}");
            } else {
                assert!(c.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn banana_is_not_star_shaped() {
        let pts: Vec<C> = (0..256)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 256.0;
                C::from_polar(1.0 + 0.15 * t.sin(), 2.0 * t.cos())
            })
            .collect();
        let curve = CurveSpec::from_points(pts).unwrap();
        assert_eq!(exterior_map(&curve), Err(ConformalError::NotStarShaped));
    }
}
