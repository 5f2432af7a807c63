use super::mobius::MobiusTransform;
use super::series::{ConformalMap, PowerSeriesMap};
use super::ConformalError;
use crate::numeric::{fourier_coefficients, pairwise_sum, shoelace_area, spectral_area, trig_eval, C};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A closed Jordan curve, either as the boundary of an interior series map
/// or as equispaced samples of a smooth closed curve.
///
/// Sampled curves are read through their trigonometric interpolant, so the
/// points must sample a smooth parameterization rather than a polygon.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    InteriorSeries(PowerSeriesMap),
    Sampled(SampledCurve),
}

/// Counterclockwise samples with their Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    points: Vec<C>,
    coeffs: Vec<C>,
}

impl SampledCurve {
    pub fn points(&self) -> &[C] {
        &self.points
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CurveFile {
    Series { series: Vec<[f64; 2]> },
    Points { points: Vec<[f64; 2]> },
}

const MIN_POINTS: usize = 8;

impl CurveSpec {
    /// Validates injectivity of `f` on the closed disk by the argument
    /// principle for `f'` and `f − f(0)` and a simplicity sweep of the
    /// boundary polygon.
    pub fn from_series(f: PowerSeriesMap) -> Result<Self, ConformalError> {
        let n = (8 * f.order()).clamp(256, 8192);
        let mut boundary = Vec::with_capacity(n);
        let mut derivative = Vec::with_capacity(n);
        let center = f.eval(C::new(0.0, 0.0))?;
        for j in 0..n {
            let z = C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let jet = f.jet(z)?;
            boundary.push(jet.value - center);
            derivative.push(jet.d1);
        }
        if winding_number(&derivative) != 0 {
            return Err(ConformalError::InvalidCurve("derivative vanishes inside the disk".into()));
        }
        if winding_number(&boundary) != 1 {
            return Err(ConformalError::InvalidCurve("boundary does not wind once around f(0)".into()));
        }
        if !is_simple(&boundary) {
            return Err(ConformalError::InvalidCurve("boundary image self-intersects".into()));
        }
        Ok(CurveSpec::InteriorSeries(f))
    }

    /// Requires a simple closed polyline; reorders clockwise input to counterclockwise.
    pub fn from_points(mut points: Vec<C>) -> Result<Self, ConformalError> {
        if points.len() < MIN_POINTS {
            return Err(ConformalError::InvalidCurve(format!(
                "need at least {MIN_POINTS} points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(ConformalError::InvalidCurve("non-finite point".into()));
        }
        if points.len() > 1 && (points[0] - points[points.len() - 1]).norm() == 0.0 {
            points.pop();
        }
        if !is_simple(&points) {
            return Err(ConformalError::InvalidCurve("polyline self-intersects".into()));
        }
        let area = shoelace_area(&points);
        if area == 0.0 {
            return Err(ConformalError::InvalidCurve("zero enclosed area".into()));
        }
        if area < 0.0 {
            points[1..].reverse();
        }
        let coeffs = fourier_coefficients(&points);
        Ok(CurveSpec::Sampled(SampledCurve { points, coeffs }))
    }

    /// Parses `{"series": [[re, im], ...]}` or `{"points": [[x, y], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, ConformalError> {
        let file: CurveFile =
            serde_json::from_str(text).map_err(|e| ConformalError::InvalidCurve(format!("parse error: {e}")))?;
        match file {
            CurveFile::Series { series } => {
                let coeffs = series.iter().map(|[re, im]| C::new(*re, *im)).collect();
                Self::from_series(PowerSeriesMap::from_coefficients(coeffs)?)
            }
            CurveFile::Points { points } => Self::from_points(points.iter().map(|[x, y]| C::new(*x, *y)).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        let pairs = |v: &[C]| v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
        let file = match self {
            CurveSpec::InteriorSeries(f) => CurveFile::Series { series: pairs(f.coefficients()) },
            CurveSpec::Sampled(s) => CurveFile::Points { points: pairs(&s.points) },
        };
        serde_json::to_string(&file).expect("curve serialization cannot fail")
    }

    /// Point and derivative of the boundary parameterization at `t ∈ [0, 2π)`.
    pub fn point_and_tangent(&self, t: f64) -> (C, C) {
        match self {
            CurveSpec::InteriorSeries(f) => {
                let z = C::from_polar(1.0, t);
                let jet = f.jet(z).expect("unit circle lies in the series domain");
                (jet.value, C::new(0.0, 1.0) * z * jet.d1)
            }
            CurveSpec::Sampled(s) => trig_eval(&s.coeffs, t),
        }
    }

    pub fn point(&self, t: f64) -> C {
        self.point_and_tangent(t).0
    }

    pub fn samples(&self, n: usize) -> Vec<C> {
        (0..n).map(|j| self.point(2.0 * PI * j as f64 / n as f64)).collect()
    }

    /// Interior reference point: `f(0)` for series, area centroid for samples.
    pub fn center(&self) -> C {
        match self {
            CurveSpec::InteriorSeries(f) => f.coefficients()[0],
            CurveSpec::Sampled(s) => polygon_centroid(&s.points),
        }
    }

    /// Default resolution for sampling the parameterization.
    pub fn natural_resolution(&self) -> usize {
        match self {
            CurveSpec::InteriorSeries(f) => (4 * f.order()).next_power_of_two().max(256),
            CurveSpec::Sampled(s) => s.points.len().next_power_of_two().max(256),
        }
    }

    /// Arclength by the trapezoid rule (spectrally accurate for smooth curves).
    pub fn length(&self) -> f64 {
        let n = 4 * self.natural_resolution();
        let speeds: Vec<f64> =
            (0..n).map(|j| self.point_and_tangent(2.0 * PI * j as f64 / n as f64).1.norm()).collect();
        2.0 * PI * pairwise_sum(&speeds) / n as f64
    }

    pub fn area(&self) -> f64 {
        spectral_area(&self.samples(4 * self.natural_resolution()))
    }

    /// Isoperimetric deficit `L²/(4πA) − 1`, zero exactly for circles.
    pub fn roundness(&self) -> f64 {
        let l = self.length();
        l * l / (4.0 * PI * self.area()) - 1.0
    }

    /// Image under a Möbius map whose pole stays off the closed interior.
    pub fn transformed(&self, m: &MobiusTransform) -> Result<Self, ConformalError> {
        match self {
            CurveSpec::InteriorSeries(f) => {
                let samples = 8 * self.natural_resolution();
                Self::from_series(m.compose_series(f, samples)?)
            }
            CurveSpec::Sampled(s) => {
                let pts = s.points.iter().map(|&p| m.apply_finite(p)).collect::<Result<Vec<_>, _>>()?;
                Self::from_points(pts)
            }
        }
    }
}

/// Winding number of a closed sample loop around the origin.
fn winding_number(loop_points: &[C]) -> i64 {
    let n = loop_points.len();
    let total: f64 = (0..n).map(|i| (loop_points[(i + 1) % n] / loop_points[i]).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

pub(crate) fn polygon_centroid(points: &[C]) -> C {
    let n = points.len();
    let mut acc = C::new(0.0, 0.0);
    let mut area2 = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let cross = a.re * b.im - b.re * a.im;
        area2 += cross;
        acc += (a + b) * cross;
    }
    acc / (3.0 * area2)
}

fn orient(a: C, b: C, c: C) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn on_segment(a: C, b: C, p: C) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

fn segments_intersect(p1: C, p2: C, q1: C, q2: C) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Sweep over segments sorted by their left x-extent; only pairs with
/// overlapping x-ranges are tested. Neighboring segments share an endpoint
/// and are skipped.
pub(crate) fn is_simple(points: &[C]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let left = |i: usize| points[i].re.min(points[(i + 1) % n].re);
    let right = |i: usize| points[i].re.max(points[(i + 1) % n].re);
    order.sort_by(|&a, &b| left(a).total_cmp(&left(b)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let x = left(i);
        active.retain(|&k| right(k) >= x);
        for &k in &active {
            let adjacent = (i + 1) % n == k || (k + 1) % n == i;
            if adjacent {
                continue;
            }
            if segments_intersect(points[i], points[(i + 1) % n], points[k], points[(k + 1) % n]) {
                return false;
            }
        }
        active.push(i);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse(n: usize, a: f64, b: f64) -> Vec<C> {
        (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                C::new(a * t.cos(), b * t.sin())
            })
            .collect()
    }

    #[test]
    fn figure_eight_is_rejected() {
        let pts: Vec<C> = (0..64)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / 64.0;
                C::new(t.sin(), (2.0 * t).sin())
            })
            .collect();
        assert!(matches!(CurveSpec::from_points(pts), Err(ConformalError::InvalidCurve(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let mut pts = ellipse(64, 1.2, 1.0);
        pts.reverse();
        let curve = CurveSpec::from_points(pts).unwrap();
        assert!(curve.area() > 0.0);
        assert!((curve.area() - 1.2 * PI).abs() < 1e-12);
    }

    #[test]
    fn nonunivalent_series_is_rejected() {
        let f = PowerSeriesMap::new(vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.8, 0.0)], 10.0).unwrap();
        assert!(CurveSpec::from_series(f).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"series":[[0,0],[1,0],[0,0],[0.05,0]]}"#;
        let curve = CurveSpec::from_json(text).unwrap();
        let again = CurveSpec::from_json(&curve.to_json()).unwrap();
        assert_eq!(curve, again);
        assert!(CurveSpec::from_json("{\"series\": [1, 2").is_err());
    }

    #[test]
    fn circle_is_round() {
        let curve = CurveSpec::from_series(PowerSeriesMap::identity()).unwrap();
        assert!(curve.roundness().abs() < 1e-12);
        let ell = CurveSpec::from_points(ellipse(128, 1.2, 1.0)).unwrap();
        assert!(ell.roundness() > 0.0);
        assert!(ell.center().norm() < 1e-14);
    }
}
