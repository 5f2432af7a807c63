use super::series::{ConformalMap, LaurentMap, PowerSeriesMap};
use super::ConformalError;
use crate::numeric::C;
use std::f64::consts::PI;

/// Boundary match tolerance accepted by [`welding`].
pub const WELDING_TOLERANCE: f64 = 1e-6;

const SCAN: usize = 512;

/// Gauss–Newton minimization of `|g(e^{iφ}) − target|²` from `start`.
fn refine(g: &LaurentMap, target: C, start: f64) -> Result<(f64, f64), ConformalError> {
    let mut phi = start;
    let mut dist = f64::INFINITY;
    for _ in 0..50 {
        let w = C::from_polar(1.0, phi);
        let jet = g.jet(w)?;
        let r = jet.value - target;
        dist = r.norm();
        let dr = C::new(0.0, 1.0) * w * jet.d1;
        let step = (dr.conj() * r).re / dr.norm_sqr();
        phi -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let w = C::from_polar(1.0, phi);
    dist = dist.min((g.eval(w)? - target).norm());
    Ok((phi, dist))
}

fn nearest_scan(g: &LaurentMap, target: C) -> Result<f64, ConformalError> {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..SCAN {
        let phi = 2.0 * PI * k as f64 / SCAN as f64;
        let d = (g.eval(C::from_polar(1.0, phi))? - target).norm();
        if d < best.0 {
            best = (d, phi);
        }
    }
    Ok(best.1)
}

/// Welding homeomorphism `θ ↦ arg g⁻¹(f(e^{iθ}))`, reduced to `[0, 2π)`.
pub fn welding(f: &PowerSeriesMap, g: &LaurentMap, theta: f64) -> Result<f64, ConformalError> {
    let target = f.eval(C::from_polar(1.0, theta))?;
    let (phi, dist) = refine(g, target, nearest_scan(g, target)?)?;
    if dist > WELDING_TOLERANCE {
        return Err(ConformalError::Correspondence { distance: dist, tolerance: WELDING_TOLERANCE });
    }
    Ok(phi.rem_euclid(2.0 * PI))
}

/// Welding on `n` equispaced angles, unwrapped so the result starts in
/// `[0, 2π)` and continues by continuity.
pub fn welding_samples(f: &PowerSeriesMap, g: &LaurentMap, n: usize) -> Result<Vec<f64>, ConformalError> {
    let mut out = Vec::with_capacity(n);
    let mut prev = welding(f, g, 0.0)?;
    out.push(prev);
    for j in 1..n {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let target = f.eval(C::from_polar(1.0, theta))?;
        let (mut phi, mut dist) = refine(g, target, prev + 2.0 * PI / n as f64)?;
        if dist > WELDING_TOLERANCE {
            (phi, dist) = refine(g, target, nearest_scan(g, target)?)?;
        }
        if dist > WELDING_TOLERANCE {
            return Err(ConformalError::Correspondence { distance: dist, tolerance: WELDING_TOLERANCE });
        }
        phi = prev + (phi - prev).rem_euclid(2.0 * PI);
        out.push(phi);
        prev = phi;
    }
    Ok(out)
}
