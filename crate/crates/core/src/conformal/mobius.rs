use super::series::{ConformalMap, Jet, PowerSeriesMap, SERIES_NOISE_FLOOR};
use super::{ConformalError, SINGULAR_DERIVATIVE};
use crate::numeric::{fourier_coefficients, C};
use std::f64::consts::PI;
use std::ops::{Add, Mul};

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedPoint {
    Finite(C),
    Infinity,
}

/// `z ↦ (az + b)/(cz + d)` with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusTransform {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl MobiusTransform {
    /// Normalizes the matrix to unit determinant.
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self, ConformalError> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > 1e-14 * scale * scale) {
            return Err(ConformalError::InvalidMap("degenerate Möbius matrix".into()));
        }
        let s = det.sqrt().inv();
        Ok(Self { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn identity() -> Self {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// `z ↦ z + shift`.
    pub fn translation(shift: C) -> Self {
        let one = C::new(1.0, 0.0);
        Self { a: one, b: shift, c: C::new(0.0, 0.0), d: one }
    }

    /// `z ↦ k z`.
    pub fn dilation(k: C) -> Result<Self, ConformalError> {
        Self::new(k, C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0))
    }

    pub fn determinant(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusTransform) -> MobiusTransform {
        MobiusTransform {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    pub fn inverse(&self) -> MobiusTransform {
        MobiusTransform { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn apply(&self, p: ExtendedPoint) -> ExtendedPoint {
        match p {
            ExtendedPoint::Infinity => {
                if self.c.norm() == 0.0 {
                    ExtendedPoint::Infinity
                } else {
                    ExtendedPoint::Finite(self.a / self.c)
                }
            }
            ExtendedPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    ExtendedPoint::Infinity
                } else {
                    ExtendedPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Finite image of a finite point, or a domain error at the pole.
    pub fn apply_finite(&self, z: C) -> Result<C, ConformalError> {
        match self.apply(ExtendedPoint::Finite(z)) {
            ExtendedPoint::Finite(w) => Ok(w),
            ExtendedPoint::Infinity => Err(ConformalError::Domain { z, reason: "pole of the Möbius map" }),
        }
    }

    /// Jet of `self` itself at a finite non-pole point.
    pub fn jet(&self, z: C) -> Result<Jet, ConformalError> {
        let den = self.c * z + self.d;
        if den.norm() < SINGULAR_DERIVATIVE {
            return Err(ConformalError::Domain { z, reason: "pole of the Möbius map" });
        }
        let inv = den.inv();
        let inv2 = inv * inv;
        Ok(Jet {
            value: (self.a * z + self.b) * inv,
            d1: inv2,
            d2: -2.0 * self.c * inv2 * inv,
            d3: 6.0 * self.c * self.c * inv2 * inv2,
        })
    }

    /// Jet of `self ∘ f` from the jet of `f` by the chain rule.
    pub fn compose_jet(&self, inner: &Jet) -> Result<Jet, ConformalError> {
        let m = self.jet(inner.value)?;
        let f1 = inner.d1;
        Ok(Jet {
            value: m.value,
            d1: m.d1 * f1,
            d2: m.d2 * f1 * f1 + m.d1 * inner.d2,
            d3: m.d3 * f1 * f1 * f1 + 3.0 * m.d2 * f1 * inner.d2 + m.d1 * inner.d3,
        })
    }

    /// Taylor series of `self ∘ f` from `samples` equispaced boundary values.
    /// Fails if the pole of `self` comes within reach of `f` on the closed disk.
    pub fn compose_series(&self, f: &PowerSeriesMap, samples: usize) -> Result<PowerSeriesMap, ConformalError> {
        let n = samples.max(8);
        let mut values = Vec::with_capacity(n);
        for j in 0..n {
            let z = C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let fz = f.eval(z)?;
            if (self.c * fz + self.d).norm() < 1e-8 {
                return Err(ConformalError::Domain { z, reason: "Möbius pole on the image curve" });
            }
            values.push(self.apply_finite(fz)?);
        }
        let coeffs = fourier_coefficients(&values);
        let order = n / 2 - 1;
        Ok(PowerSeriesMap::from_coefficients(coeffs[..=order].to_vec())?.trimmed(SERIES_NOISE_FLOOR))
    }
}

impl ConformalMap for MobiusTransform {
    fn domain(&self) -> super::MapDomain {
        super::MapDomain::Disk
    }

    fn eval(&self, z: C) -> Result<C, ConformalError> {
        self.apply_finite(z)
    }

    fn jet(&self, z: C) -> Result<Jet, ConformalError> {
        MobiusTransform::jet(self, z)
    }
}

/// Real quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub fn from_complex(c: C) -> Self {
        Self { w: c.re, x: c.im, y: 0.0, z: 0.0 }
    }

    /// `Z + jξ`.
    pub fn from_h3(p: &H3Point) -> Self {
        Self { w: p.z.re, x: p.z.im, y: p.height, z: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn conj(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn inverse(&self) -> Self {
        let n = self.norm_sqr();
        let c = self.conj();
        Self { w: c.w / n, x: c.x / n, y: c.y / n, z: c.z / n }
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion { w: self.w + o.w, x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

/// Point of upper half-space: plane coordinate and Euclidean height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H3Point {
    pub z: C,
    pub height: f64,
}

impl H3Point {
    pub fn new(z: C, height: f64) -> Result<Self, ConformalError> {
        if !(height > 0.0) || !height.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
            return Err(ConformalError::InvalidMap(format!("height {height} is not positive and finite")));
        }
        Ok(Self { z, height })
    }

    /// The point `j = (0, 1)`.
    pub fn j() -> Self {
        Self { z: C::new(0.0, 0.0), height: 1.0 }
    }

    /// Hyperbolic distance, `2 asinh(|p − q| / (2√(ξ_p ξ_q)))`.
    pub fn distance(&self, other: &H3Point) -> f64 {
        let dz = (self.z - other.z).norm_sqr();
        let dh = self.height - other.height;
        let chord = (dz + dh * dh).sqrt();
        2.0 * (chord / (2.0 * (self.height * other.height).sqrt())).asinh()
    }
}

/// Poincaré extension of a Möbius map: `(aP + b)(cP + d)⁻¹` with `P = Z + jξ`.
pub fn mobius_on_h3(m: &MobiusTransform, p: &H3Point) -> H3Point {
    let q = Quaternion::from_h3(p);
    let num = Quaternion::from_complex(m.a) * q + Quaternion::from_complex(m.b);
    let den = Quaternion::from_complex(m.c) * q + Quaternion::from_complex(m.d);
    let r = num * den.inverse();
    H3Point { z: C::new(r.w, r.x), height: r.y }
}

/// The Möbius map agreeing with `f` to second order at `z0`.
pub fn osculating_mobius<M: ConformalMap + ?Sized>(f: &M, z0: C) -> Result<MobiusTransform, ConformalError> {
    let jet = f.jet(z0)?;
    let m = jet.d1.norm();
    if m < SINGULAR_DERIVATIVE {
        return Err(ConformalError::SingularDerivative(m));
    }
    let alpha = jet.d1.sqrt();
    let beta = -jet.d2 / (2.0 * alpha * jet.d1);
    let core = MobiusTransform { a: alpha, b: C::new(0.0, 0.0), c: beta, d: alpha.inv() };
    Ok(MobiusTransform::translation(jet.value).compose(&core).compose(&MobiusTransform::translation(-z0)))
}
