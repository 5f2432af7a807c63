use super::{ConformalError, SINGULAR_DERIVATIVE};
use crate::numeric::C;

/// Relative size below which FFT-fitted coefficients are rounding noise.
pub const SERIES_NOISE_FLOOR: f64 = 1e-15;

/// Value and first three complex derivatives of a holomorphic map at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: C,
    pub d1: C,
    pub d2: C,
    pub d3: C,
}

impl Jet {
    fn check_derivative(&self) -> Result<(), ConformalError> {
        let m = self.d1.norm();
        if !m.is_finite() || m < SINGULAR_DERIVATIVE {
            return Err(ConformalError::SingularDerivative(m));
        }
        Ok(())
    }

    /// `f''/f'`.
    pub fn nonlinearity(&self) -> Result<C, ConformalError> {
        self.check_derivative()?;
        Ok(self.d2 / self.d1)
    }

    /// `f'''/f' - (3/2)(f''/f')²`.
    pub fn schwarzian(&self) -> Result<C, ConformalError> {
        self.check_derivative()?;
        let n = self.d2 / self.d1;
        Ok(self.d3 / self.d1 - 1.5 * n * n)
    }
}

/// Which half of the sphere a map is parameterized on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapDomain {
    /// The unit disk `|z| < 1`.
    Disk,
    /// The exterior disk `|w| > 1` including `∞`.
    ExteriorDisk,
}

/// A holomorphic map evaluated through exact series differentiation.
pub trait ConformalMap {
    fn domain(&self) -> MapDomain;
    fn eval(&self, z: C) -> Result<C, ConformalError>;
    fn jet(&self, z: C) -> Result<Jet, ConformalError>;
}

pub fn nonlinearity<M: ConformalMap + ?Sized>(map: &M, z: C) -> Result<C, ConformalError> {
    map.jet(z)?.nonlinearity()
}

pub fn schwarzian<M: ConformalMap + ?Sized>(map: &M, z: C) -> Result<C, ConformalError> {
    map.jet(z)?.schwarzian()
}

/// Horner evaluation of `Σ c_k x^k` and its first three derivatives.
pub(crate) fn horner_jet(coeffs: &[C], x: C) -> [C; 4] {
    let zero = C::new(0.0, 0.0);
    let (mut p, mut d1, mut d2, mut d3) = (zero, zero, zero, zero);
    for &c in coeffs.iter().rev() {
        d3 = d3 * x + d2;
        d2 = d2 * x + d1;
        d1 = d1 * x + p;
        p = p * x + c;
    }
    [p, d1, 2.0 * d2, 6.0 * d3]
}

fn horner(coeffs: &[C], x: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Truncated Taylor series `f(z) = Σ_{k=0}^{N} a_k z^k` on the unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeriesMap {
    coeffs: Vec<C>,
    radius_hint: f64,
}

impl PowerSeriesMap {
    /// Requires `a₁ ≠ 0` and a validity radius of at least one.
    pub fn new(coeffs: Vec<C>, radius_hint: f64) -> Result<Self, ConformalError> {
        if coeffs.len() < 2 {
            return Err(ConformalError::InvalidMap("need at least a0 and a1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ConformalError::InvalidMap("non-finite coefficient".into()));
        }
        if coeffs[1].norm() < SINGULAR_DERIVATIVE {
            return Err(ConformalError::InvalidMap("a1 vanishes".into()));
        }
        if radius_hint.is_nan() || radius_hint < 1.0 {
            return Err(ConformalError::InvalidMap(format!("radius hint {radius_hint} below 1")));
        }
        Ok(Self { coeffs, radius_hint })
    }

    /// Builds a map whose validity radius is estimated from the coefficient decay.
    pub fn from_coefficients(coeffs: Vec<C>) -> Result<Self, ConformalError> {
        let hint = estimate_radius(&coeffs);
        Self::new(coeffs, hint)
    }

    pub fn identity() -> Self {
        Self { coeffs: vec![C::new(0.0, 0.0), C::new(1.0, 0.0)], radius_hint: f64::INFINITY }
    }

    pub fn coefficients(&self) -> &[C] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn radius_hint(&self) -> f64 {
        self.radius_hint
    }

    /// Series of `f'` with coefficients `k a_k`. The result is a plain series
    /// and does not re-check the first-order univalence condition.
    pub fn derivative(&self) -> PowerSeriesMap {
        let mut coeffs: Vec<C> = self.coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect();
        if coeffs.len() < 2 {
            coeffs.push(C::new(0.0, 0.0));
        }
        PowerSeriesMap { coeffs, radius_hint: self.radius_hint }
    }

    /// `f + c`.
    pub fn translated(&self, c: C) -> PowerSeriesMap {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        PowerSeriesMap { coeffs, radius_hint: self.radius_hint }
    }

    /// Keeps coefficients up to `order`.
    pub fn truncated(&self, order: usize) -> PowerSeriesMap {
        let keep = (order + 1).max(2).min(self.coeffs.len());
        PowerSeriesMap { coeffs: self.coeffs[..keep].to_vec(), radius_hint: self.radius_hint }
    }

    /// Drops trailing coefficients below `rel` times the largest one.
    pub fn trimmed(&self, rel: f64) -> PowerSeriesMap {
        let amax = self.coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
        let keep = self.coeffs.iter().rposition(|c| c.norm() > rel * amax).map_or(2, |k| (k + 1).max(2));
        PowerSeriesMap { coeffs: self.coeffs[..keep].to_vec(), radius_hint: self.radius_hint }
    }

    fn check_domain(&self, z: C) -> Result<(), ConformalError> {
        if z.norm() > self.radius_hint * (1.0 + 1e-12) {
            return Err(ConformalError::Domain { z, reason: "beyond the declared convergence radius" });
        }
        Ok(())
    }
}

impl ConformalMap for PowerSeriesMap {
    fn domain(&self) -> MapDomain {
        MapDomain::Disk
    }

    fn eval(&self, z: C) -> Result<C, ConformalError> {
        self.check_domain(z)?;
        Ok(horner(&self.coeffs, z))
    }

    fn jet(&self, z: C) -> Result<Jet, ConformalError> {
        self.check_domain(z)?;
        let [value, d1, d2, d3] = horner_jet(&self.coeffs, z);
        Ok(Jet { value, d1, d2, d3 })
    }
}

/// Radius estimate from geometric decay of the last significant coefficient,
/// clamped to `[1, 100]`.
fn estimate_radius(coeffs: &[C]) -> f64 {
    let amax = coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    if amax == 0.0 {
        return 1.0;
    }
    let last =
        coeffs.iter().enumerate().skip(1).filter(|(_, c)| c.norm() > 1e-14 * amax).map(|(k, _)| k).last().unwrap_or(1);
    if last <= 1 {
        return 100.0;
    }
    let r = (amax / coeffs[last].norm()).powf(1.0 / last as f64);
    r.clamp(1.0, 100.0)
}

/// The rescaled interior map `f_n(z) = n/(n−1) · f((n−1)z/n)`, `n ≥ 2`.
pub fn equipotential(f: &PowerSeriesMap, n: u32) -> Result<PowerSeriesMap, ConformalError> {
    if n < 2 {
        return Err(ConformalError::InvalidMap(format!("equipotential index {n} below 2")));
    }
    let s = (n as f64 - 1.0) / n as f64;
    let coeffs = f.coeffs.iter().enumerate().map(|(k, &a)| a * s.powi(k as i32) / s).collect();
    Ok(PowerSeriesMap { coeffs, radius_hint: f.radius_hint / s })
}

/// Exterior map `g(w) = b₁w + b₀ + Σ_{k=1}^{M} b₋ₖ w^{−k}` on `|w| > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMap {
    b1: C,
    b0: C,
    negative: Vec<C>,
}

impl LaurentMap {
    /// `negative[k-1]` is the coefficient of `w^{-k}`.
    pub fn new(b1: C, b0: C, negative: Vec<C>) -> Result<Self, ConformalError> {
        if b1.norm() < SINGULAR_DERIVATIVE || !b1.re.is_finite() || !b1.im.is_finite() {
            return Err(ConformalError::InvalidMap("leading coefficient vanishes".into()));
        }
        if !b0.re.is_finite() || negative.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ConformalError::InvalidMap("non-finite coefficient".into()));
        }
        Ok(Self { b1, b0, negative })
    }

    pub fn identity() -> Self {
        Self { b1: C::new(1.0, 0.0), b0: C::new(0.0, 0.0), negative: Vec::new() }
    }

    pub fn leading(&self) -> C {
        self.b1
    }

    pub fn constant(&self) -> C {
        self.b0
    }

    /// `g'(∞) = b₁`.
    pub fn derivative_at_infinity(&self) -> C {
        self.b1
    }

    pub fn negative_coefficients(&self) -> &[C] {
        &self.negative
    }

    pub fn order(&self) -> usize {
        self.negative.len()
    }

    /// Coefficients of `p(u) = Σ_{k≥1} b₋ₖ u^k` including the zero constant term.
    fn tail_polynomial(&self) -> Vec<C> {
        let mut p = Vec::with_capacity(self.negative.len() + 1);
        p.push(C::new(0.0, 0.0));
        p.extend_from_slice(&self.negative);
        p
    }

    /// Jet of the tail `p(u)` at `u = 1/w`: `[p, p', p'', p''']`.
    pub(crate) fn tail_jet(&self, u: C) -> [C; 4] {
        horner_jet(&self.tail_polynomial(), u)
    }

    /// Jet of `F(u) = 1/g(1/u)` on the unit disk. `F(0) = 0` and
    /// `F'(0) = 1/b₁`; `S(F)(u) = S(g)(1/u)·u⁻⁴` stays finite at `u = 0`.
    pub fn inverted_jet(&self, u: C) -> Result<Jet, ConformalError> {
        if u.norm() > 1.0 + 1e-9 {
            return Err(ConformalError::Domain { z: u, reason: "outside the closed unit disk" });
        }
        let [p, p1, p2, p3] = self.tail_jet(u);
        let g0 = self.b1 + self.b0 * u + u * p;
        let g1 = self.b0 + p + u * p1;
        let g2 = 2.0 * p1 + u * p2;
        let g3 = 3.0 * p2 + u * p3;
        if g0.norm() == 0.0 {
            return Err(ConformalError::Domain { z: u, reason: "exterior map vanishes" });
        }
        let h = g0.inv();
        let h1 = -g1 * h * h;
        let h2 = (2.0 * g1 * g1 - g0 * g2) * h * h * h;
        let h3 = (-6.0 * g1 * g1 * g1 + 6.0 * g0 * g1 * g2 - g0 * g0 * g3) * h * h * h * h;
        Ok(Jet { value: u * h, d1: h + u * h1, d2: 2.0 * h1 + u * h2, d3: 3.0 * h2 + u * h3 })
    }

    fn check_domain(&self, w: C) -> Result<(), ConformalError> {
        if w.norm() < 1.0 - 1e-9 {
            return Err(ConformalError::Domain { z: w, reason: "inside the unit disk" });
        }
        Ok(())
    }
}

impl ConformalMap for LaurentMap {
    fn domain(&self) -> MapDomain {
        MapDomain::ExteriorDisk
    }

    fn eval(&self, w: C) -> Result<C, ConformalError> {
        self.check_domain(w)?;
        let u = w.inv();
        Ok(self.b1 * w + self.b0 + horner(&self.tail_polynomial(), u))
    }

    fn jet(&self, w: C) -> Result<Jet, ConformalError> {
        self.check_domain(w)?;
        let u = w.inv();
        let [p, p1, p2, p3] = self.tail_jet(u);
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u2 * u2;
        Ok(Jet {
            value: self.b1 * w + self.b0 + p,
            d1: self.b1 - p1 * u2,
            d2: p2 * u4 + 2.0 * p1 * u3,
            d3: -(p3 * u4 * u2 + 6.0 * p2 * u4 * u + 6.0 * p1 * u4),
        })
    }
}
