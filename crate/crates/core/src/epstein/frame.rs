use super::EpsteinError;
use crate::conformal::{ConformalError, ConformalMap, H3Point, Jet, LaurentMap, PowerSeriesMap, SINGULAR_DERIVATIVE};
use crate::numeric::C;

/// Log-density `φ` of a metric `e^φ |dz|²` and its `∂/∂z̄` derivative at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub phi: f64,
    pub phi_zbar: C,
    pub phi_zz: Option<C>,
}

impl MetricJet {
    pub fn new(phi: f64, phi_zbar: C) -> Result<Self, ConformalError> {
        if !phi.is_finite() || !phi_zbar.re.is_finite() || !phi_zbar.im.is_finite() {
            return Err(ConformalError::InvalidMap("metric jet is not finite".into()));
        }
        Ok(Self { phi, phi_zbar, phi_zz: None })
    }

    /// `φ ≡ 2t`.
    pub fn constant(t: f64) -> Self {
        Self { phi: 2.0 * t, phi_zbar: C::new(0.0, 0.0), phi_zz: Some(C::new(0.0, 0.0)) }
    }

    /// `4/(1 + |z|²)²`.
    pub fn spherical(z: C) -> Self {
        let a = 1.0 + z.norm_sqr();
        Self {
            phi: 4f64.ln() - 2.0 * a.ln(),
            phi_zbar: -2.0 * z / a,
            phi_zz: Some(2.0 * z.conj() * z.conj() / (a * a)),
        }
    }

    /// `4/(1 − |z|²)²` on the unit disk.
    pub fn hyperbolic_disk(z: C) -> Result<Self, ConformalError> {
        let a = 1.0 - z.norm_sqr();
        if !(a > 0.0) {
            return Err(ConformalError::Domain { z, reason: "outside the unit disk" });
        }
        Ok(Self {
            phi: 4f64.ln() - 2.0 * a.ln(),
            phi_zbar: 2.0 * z / a,
            phi_zz: Some(2.0 * z.conj() * z.conj() / (a * a)),
        })
    }

    /// Poincaré metric of `f(𝔻)` at `z = f(ζ)`; returns `z` with the jet.
    pub fn poincare<M: ConformalMap + ?Sized>(f: &M, zeta: C) -> Result<(C, Self), ConformalError> {
        let jet = f.jet(zeta)?;
        let n = jet.nonlinearity()?;
        let s = 1.0 - zeta.norm_sqr();
        if s == 0.0 {
            return Err(ConformalError::Domain { z: zeta, reason: "on the unit circle" });
        }
        let half_inv = jet.d1.norm() * s.abs() / 2.0;
        let phi = -2.0 * half_inv.ln();
        let phi_zbar = (2.0 * zeta / s - n.conj()) / jet.d1.conj();
        Ok((jet.value, Self { phi, phi_zbar, phi_zz: None }))
    }

    /// The jet of `e^{2t}ρ`.
    pub fn scaled(&self, t: f64) -> Self {
        Self { phi: self.phi + 2.0 * t, ..*self }
    }

    /// `e^{−φ/2}`.
    pub fn inverse_sqrt_density(&self) -> f64 {
        (-0.5 * self.phi).exp()
    }
}

/// Base point in upper half-space, unit Euclidean normal, and the plane point it came from.
///
/// `source` is infinite for the exterior frame over `w = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsteinFrame {
    pub base: H3Point,
    pub normal: [f64; 3],
    pub source: C,
}

impl EpsteinFrame {
    pub fn position(&self) -> [f64; 3] {
        [self.base.z.re, self.base.z.im, self.base.height]
    }
}

/// Unit normal `(2ψ, 1 − |ψ|²)/(1 + |ψ|²)`.
fn normal_from_psi(psi: C) -> [f64; 3] {
    let d = 1.0 + psi.norm_sqr();
    [2.0 * psi.re / d, 2.0 * psi.im / d, (1.0 - psi.norm_sqr()) / d]
}

/// The Epstein point of a metric jet at `z`.
pub fn epstein_point(jet: &MetricJet, z: C) -> EpsteinFrame {
    let e = jet.inverse_sqrt_density();
    let psi = jet.phi_zbar * e;
    let height = 2.0 * e / (1.0 + psi.norm_sqr());
    EpsteinFrame { base: H3Point { z: z + height * psi, height }, normal: normal_from_psi(psi), source: z }
}

/// A Poincaré frame together with the Jacobian of its projection `p ↦ Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareSample {
    pub frame: EpsteinFrame,
    /// `|Z_p|² − |Z_p̄|²` in the coordinates of the map's own domain.
    pub jacobian: f64,
}

/// Poincaré frame at parameter `p` of a map on `𝔻` or `𝔻*` from its jet,
/// with `q = p̄ − N(1 − |p|²)/2`, `N = f''/f'`.
pub fn poincare_sample(jet: &Jet, p: C) -> Result<PoincareSample, EpsteinError> {
    let a = jet.d1;
    let mag = a.norm();
    if !mag.is_finite() || mag < SINGULAR_DERIVATIVE {
        return Err(ConformalError::SingularDerivative(mag).into());
    }
    let s = 1.0 - p.norm_sqr();
    if s == 0.0 {
        return Err(ConformalError::Domain { z: p, reason: "on the unit circle" }.into());
    }
    let b = jet.d2;
    let n = b / a;
    let n_prime = jet.d3 / a - n * n;
    let q = p.conj() - n * s / 2.0;
    let qc = q.conj();
    let d = 1.0 + q.norm_sqr();
    let height = mag * s.abs() / d;
    let psi = a / mag * s.signum() * qc;
    let z = jet.value + a * s * qc / d;

    let q_z = -n_prime * s / 2.0 + n * p.conj() / 2.0;
    let q_zbar = 1.0 + n * p / 2.0;
    let qc_z = q_zbar.conj();
    let qc_zbar = q_z.conj();
    let d_z = q_z * qc + q * qc_z;
    let d_zbar = q_zbar * qc + q * qc_zbar;
    let z_z = a + (b * s * qc - a * p.conj() * qc + a * s * qc_z) / d - a * s * qc * d_z / (d * d);
    let z_zbar = (-a * p * qc + a * s * qc_zbar) / d - a * s * qc * d_zbar / (d * d);

    Ok(PoincareSample {
        frame: EpsteinFrame { base: H3Point { z, height }, normal: normal_from_psi(psi), source: jet.value },
        jacobian: z_z.norm_sqr() - z_zbar.norm_sqr(),
    })
}

/// Poincaré frame from a jet, without the Jacobian.
pub fn frame_from_jet(jet: &Jet, p: C) -> Result<EpsteinFrame, EpsteinError> {
    Ok(poincare_sample(jet, p)?.frame)
}

/// Epstein–Poincaré frame of the interior domain `f(𝔻)` at `ζ`.
pub fn epstein_poincare(f: &PowerSeriesMap, zeta: C) -> Result<EpsteinFrame, EpsteinError> {
    if zeta.norm() >= 1.0 {
        return Err(ConformalError::Domain { z: zeta, reason: "outside the open unit disk" }.into());
    }
    frame_from_jet(&f.jet(zeta)?, zeta)
}

/// Epstein–Poincaré frame of the exterior domain `g(𝔻*)` at `w = 1/u`.
///
/// Written in `u` so that frames near and at `w = ∞` avoid the cancellation
/// between `g(w) ~ b₁w` and the offset back toward the curve.
pub fn epstein_poincare_exterior(g: &LaurentMap, u: C) -> Result<EpsteinFrame, EpsteinError> {
    let r2 = u.norm_sqr();
    if r2 >= 1.0 {
        return Err(ConformalError::Domain { z: u, reason: "u = 1/w outside the open unit disk" }.into());
    }
    let b1 = g.leading();
    let [p, p1, p2, _] = g.tail_jet(u);
    let big_g = b1 + g.constant() * u + u * p;
    let dg = b1 - p1 * u * u;
    let mag = dg.norm();
    if !mag.is_finite() || mag < SINGULAR_DERIVATIVE {
        return Err(ConformalError::SingularDerivative(mag).into());
    }
    // g'' = K2·u² with K2 regular at u = 0.
    let k2 = p2 * u * u + 2.0 * p1 * u;
    let e = g.constant() + p + p1 * u + big_g * k2 / (2.0 * dg);
    let pp = dg - big_g * k2 * u / (2.0 * dg);
    let v = 1.0 - ((k2 * u * u / dg).conj() * u - (k2 * u / dg).conj()) / 2.0;
    let den = r2 + v.norm_sqr();
    let z = (big_g * u.conj() + v * (e + pp * u.conj())) / den;
    let height = mag * (1.0 - r2) / den;
    let unit = dg / mag;
    let horiz = -2.0 * unit * v * u.conj() / den;
    let source = if r2 == 0.0 { C::new(f64::INFINITY, f64::INFINITY) } else { g.eval(u.inv())? };
    Ok(EpsteinFrame { base: H3Point { z, height }, normal: [horiz.re, horiz.im, (r2 - v.norm_sqr()) / den], source })
}

/// Hyperboloid coordinates of a half-space point.
fn to_hyperboloid(z: C, h: f64) -> [f64; 4] {
    let p2 = z.norm_sqr() + h * h;
    [(1.0 + p2) / (2.0 * h), z.re / h, z.im / h, (1.0 - p2) / (2.0 * h)]
}

/// Pushes the Euclidean vector `v` at `(z, h)` to the hyperboloid tangent space.
fn push_tangent(z: C, h: f64, v: [f64; 3]) -> [f64; 4] {
    let (x, y) = (z.re, z.im);
    let p2 = x * x + y * y + h * h;
    let dx = [x / h, 1.0 / h, 0.0, -x / h];
    let dy = [y / h, 0.0, 1.0 / h, -y / h];
    let dh = [
        (2.0 * h * h - 1.0 - p2) / (2.0 * h * h),
        -x / (h * h),
        -y / (h * h),
        (-2.0 * h * h - 1.0 + p2) / (2.0 * h * h),
    ];
    std::array::from_fn(|i| v[0] * dx[i] + v[1] * dy[i] + v[2] * dh[i])
}

/// Moves the frame a hyperbolic distance `t` against its normal, which is
/// the Epstein frame of the rescaled metric `e^{2t}ρ` at the same source.
pub fn geodesic_shift(frame: &EpsteinFrame, t: f64) -> EpsteinFrame {
    if t == 0.0 {
        return *frame;
    }
    let (z, h) = (frame.base.z, frame.base.height);
    let x = to_hyperboloid(z, h);
    // The hyperbolic unit normal is ξη as a Euclidean vector.
    let v = push_tangent(z, h, frame.normal.map(|c| c * h));
    let (ch, sh) = (t.cosh(), t.sinh());
    let pos: [f64; 4] = std::array::from_fn(|i| ch * x[i] - sh * v[i]);
    let vel: [f64; 4] = std::array::from_fn(|i| -sh * x[i] + ch * v[i]);
    let height = 1.0 / (pos[0] + pos[3]);
    let dh = -height * height * (vel[0] + vel[3]);
    let dir = [vel[1] * height + pos[1] * dh, vel[2] * height + pos[2] * dh, dh];
    let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
    EpsteinFrame {
        base: H3Point { z: C::new(pos[1] * height, pos[2] * height), height },
        normal: dir.map(|c| c / len),
        source: frame.source,
    }
}
