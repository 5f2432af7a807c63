//! Structured triangle meshes of Epstein–Poincaré surfaces and
//! finite-difference curvature diagnostics on the same parameter grids.

use super::curvature::{curvatures, curvatures_exterior, CurvatureData};
use super::frame::{epstein_poincare, epstein_poincare_exterior, EpsteinFrame};
use super::EpsteinError;
use crate::conformal::{LaurentMap, PowerSeriesMap};
use crate::numeric::C;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Outermost ring radius used unless a caller asks otherwise.
pub const DEFAULT_R_MAX: f64 = 1.0 - 1.0 / 1024.0;

const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceSide {
    /// Parameterized by `ζ ∈ 𝔻` through the interior map.
    Interior,
    /// Parameterized by `u = 1/w ∈ 𝔻` through the exterior map.
    Exterior,
}

/// Frames on a radial × angular grid of the unit disk chart.
///
/// Vertex `(i, j)` sits at chart radius `r_i = 1 − (1 − r_max)^{i/(n−1)}`
/// and angle `2πj/m`; ring `0` is the chart centre repeated `m` times.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    side: SurfaceSide,
    radial_n: usize,
    angular_n: usize,
    radii: Vec<f64>,
    params: Vec<C>,
    frames: Vec<EpsteinFrame>,
    curvature: Vec<CurvatureData>,
    faces: Vec<[usize; 3]>,
    consistently_oriented: bool,
}

fn graded_radii(n: usize, r_max: f64) -> Vec<f64> {
    (0..n).map(|i| 1.0 - (1.0 - r_max).powf(i as f64 / (n - 1) as f64)).collect()
}

fn check_grid(radial_n: usize, angular_n: usize, r_max: f64) -> Result<(), EpsteinError> {
    if radial_n < MIN_RESOLUTION || angular_n < MIN_RESOLUTION {
        return Err(EpsteinError::InvalidMesh(format!(
            "resolution {radial_n}×{angular_n} is below {MIN_RESOLUTION}×{MIN_RESOLUTION}"
        )));
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(EpsteinError::InvalidMesh(format!("r_max {r_max} is not in (0, 1)")));
    }
    Ok(())
}

fn grid_faces(radial_n: usize, angular_n: usize, flip: bool) -> Vec<[usize; 3]> {
    let idx = |i: usize, j: usize| i * angular_n + j % angular_n;
    let mut faces = Vec::with_capacity((2 * radial_n - 3) * angular_n);
    for j in 0..angular_n {
        faces.push([0, idx(1, j), idx(1, j + 1)]);
    }
    for i in 1..radial_n - 1 {
        for j in 0..angular_n {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    if flip {
        for f in &mut faces {
            f.swap(1, 2);
        }
    }
    faces
}

pub(crate) fn face_normal(p: &[[f64; 3]], f: &[usize; 3]) -> [f64; 3] {
    let (a, b, c) = (p[f[0]], p[f[1]], p[f[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

impl SurfaceMesh {
    fn assemble<F>(
        side: SurfaceSide,
        radial_n: usize,
        angular_n: usize,
        r_max: f64,
        eval: F,
    ) -> Result<Self, EpsteinError>
    where
        F: Fn(C) -> Result<(EpsteinFrame, CurvatureData), EpsteinError> + Sync,
    {
        check_grid(radial_n, angular_n, r_max)?;
        let radii = graded_radii(radial_n, r_max);
        let sign = if side == SurfaceSide::Interior { 1.0 } else { -1.0 };
        let params: Vec<C> = (0..radial_n * angular_n)
            .map(|k| C::from_polar(radii[k / angular_n], sign * 2.0 * PI * (k % angular_n) as f64 / angular_n as f64))
            .collect();
        let evaluated: Vec<(EpsteinFrame, CurvatureData)> =
            params.par_iter().map(|&p| eval(p)).collect::<Result<_, _>>()?;
        let (frames, curvature): (Vec<_>, Vec<_>) = evaluated.into_iter().unzip();
        let faces = grid_faces(radial_n, angular_n, side == SurfaceSide::Exterior);
        let mut mesh =
            Self { side, radial_n, angular_n, radii, params, frames, curvature, faces, consistently_oriented: false };
        mesh.consistently_oriented = mesh.check_orientation();
        Ok(mesh)
    }

    /// Every non-degenerate face normal agrees in sign with its vertices' normals.
    fn check_orientation(&self) -> bool {
        let pos = self.positions();
        self.faces.iter().all(|f| {
            let n = face_normal(&pos, f);
            let eta = f.iter().fold([0.0; 3], |acc, &v| {
                let e = self.frames[v].normal;
                [acc[0] + e[0], acc[1] + e[1], acc[2] + e[2]]
            });
            let dot = n[0] * eta[0] + n[1] * eta[1] + n[2] * eta[2];
            let area2 = n.iter().map(|c| c * c).sum::<f64>();
            area2 < 1e-30 || dot > 0.0
        })
    }

    pub fn side(&self) -> SurfaceSide {
        self.side
    }

    /// `(radial_n, angular_n)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.radial_n, self.angular_n)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn vertex_count(&self) -> usize {
        self.frames.len()
    }

    /// Chart parameters: `ζ` for the interior side and `u = 1/w` for the exterior side.
    pub fn params(&self) -> &[C] {
        &self.params
    }

    pub fn frames(&self) -> &[EpsteinFrame] {
        &self.frames
    }

    pub fn curvature(&self) -> &[CurvatureData] {
        &self.curvature
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn consistently_oriented(&self) -> bool {
        self.consistently_oriented
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.frames.iter().map(EpsteinFrame::position).collect()
    }

    /// Sup of `‖ϑ‖` over the outermost ring.
    pub fn outer_ring_schwarzian_sup(&self) -> f64 {
        let start = (self.radial_n - 1) * self.angular_n;
        self.curvature[start..].iter().map(|c| c.schwarzian_norm).fold(0.0, f64::max)
    }

    /// Smallest ring radius from which outward every vertex has `‖ϑ‖ < 1`;
    /// `None` when even the outermost ring fails.
    pub fn immersion_radius(&self) -> Option<f64> {
        let ring_ok = |i: usize| {
            self.curvature[i * self.angular_n..(i + 1) * self.angular_n].iter().all(|c| c.schwarzian_norm < 1.0)
        };
        let first_good = (0..self.radial_n).rev().take_while(|&i| ring_ok(i)).last()?;
        Some(self.radii[first_good])
    }
}

/// Mesh of the interior surface `Σ` of `f(𝔻)`.
pub fn mesh_surface(
    f: &PowerSeriesMap,
    radial_n: usize,
    angular_n: usize,
    r_max: f64,
) -> Result<SurfaceMesh, EpsteinError> {
    SurfaceMesh::assemble(SurfaceSide::Interior, radial_n, angular_n, r_max, |zeta| {
        Ok((epstein_poincare(f, zeta)?, curvatures(f, zeta)?))
    })
}

/// Mesh of the exterior surface `Σ*` of `g(𝔻*)` on `w = e^{iθ}/r`.
///
/// Faces are reversed relative to [`mesh_surface`], so for the unit circle
/// the two meshes share vertex positions and carry opposite orientations.
pub fn mesh_exterior_surface(
    g: &LaurentMap,
    radial_n: usize,
    angular_n: usize,
    r_max: f64,
) -> Result<SurfaceMesh, EpsteinError> {
    SurfaceMesh::assemble(SurfaceSide::Exterior, radial_n, angular_n, r_max, |u| {
        Ok((epstein_poincare_exterior(g, u)?, curvatures_exterior(g, u)?))
    })
}

/// Outcome of the `d/5 ≤ ξ ≤ 4d` boundary-distance check.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HeightBoundReport {
    pub checked: usize,
    pub violations: usize,
    /// Extremes of `ξ/d` over the checked vertices.
    pub min_ratio: f64,
    pub max_ratio: f64,
}

fn segment_distance(p: C, a: C, b: C) -> f64 {
    let ab = b - a;
    let t = ((p - a).conj() * ab).re / ab.norm_sqr().max(f64::MIN_POSITIVE);
    (p - (a + ab * t.clamp(0.0, 1.0))).norm()
}

/// Checks `d(z, γ)/5 ≤ ξ ≤ 4·d(z, γ)` at every vertex with a finite source,
/// with `γ` given as a closed polygon.
pub fn height_bound_violations(mesh: &SurfaceMesh, curve: &[C]) -> HeightBoundReport {
    let ratios: Vec<f64> = mesh
        .frames
        .par_iter()
        .filter(|fr| fr.source.re.is_finite() && fr.source.im.is_finite())
        .map(|fr| {
            let d = (0..curve.len())
                .map(|k| segment_distance(fr.source, curve[k], curve[(k + 1) % curve.len()]))
                .fold(f64::INFINITY, f64::min);
            fr.base.height / d
        })
        .collect();
    HeightBoundReport {
        checked: ratios.len(),
        violations: ratios.iter().filter(|&&r| !(0.2..=4.0).contains(&r)).count(),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
    }
}

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn combine(terms: &[(f64, Vec3)]) -> Vec3 {
    terms.iter().fold([0.0; 3], |acc, (w, v)| [acc[0] + w * v[0], acc[1] + w * v[1], acc[2] + w * v[2]])
}

const TAPS: [isize; 7] = [-3, -2, -1, 0, 1, 2, 3];

/// Sixth-order central first and second derivatives from samples at offsets `-3h..=3h`.
fn stencil(v: [Vec3; 7], h: f64) -> (Vec3, Vec3) {
    const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    let d1: Vec<(f64, Vec3)> = D1.iter().zip(v).map(|(&w, p)| (w, p)).collect();
    let d2: Vec<(f64, Vec3)> = D2.iter().zip(v).map(|(&w, p)| (w, p)).collect();
    (combine(&d1).map(|c| c / (60.0 * h)), combine(&d2).map(|c| c / (180.0 * h * h)))
}

/// Local surface data from first and second partials: hyperbolic mean curvature
/// `ξH_E + n₃` (normal aligned with `eta`), hyperbolic principal curvatures, and `√det I`.
struct LocalGeometry {
    principal: [f64; 2],
    area: f64,
}

fn local_geometry(x_u: Vec3, x_v: Vec3, x_uu: Vec3, x_vv: Vec3, x_uv: Vec3, height: f64, eta: Vec3) -> LocalGeometry {
    let raw = cross(x_u, x_v);
    let len = dot(raw, raw).sqrt();
    let sign = if dot(raw, eta) >= 0.0 { 1.0 } else { -1.0 };
    let n = raw.map(|c| sign * c / len);
    let (e, f, g) = (dot(x_u, x_u), dot(x_u, x_v), dot(x_v, x_v));
    let (l, m, nn) = (dot(x_uu, n), dot(x_uv, n), dot(x_vv, n));
    let det = e * g - f * f;
    // Eigenvalues of I⁻¹II.
    let mean = (e * nn - 2.0 * f * m + g * l) / (2.0 * det);
    let gauss = (l * nn - m * m) / det;
    let disc = (mean * mean - gauss).max(0.0).sqrt();
    let principal = [mean - disc, mean + disc].map(|k| height * k + n[2]);
    LocalGeometry { principal, area: det.sqrt() }
}

/// Hyperbolic principal curvatures of the interior surface at `ζ`, by
/// sixth-order finite differences with step `h` in the chart, ascending.
pub fn fd_principal_curvatures(f: &PowerSeriesMap, zeta: C, h: f64) -> Result<[f64; 2], EpsteinError> {
    let mut grid = [[[0.0; 3]; 7]; 7];
    for (a, &dy) in TAPS.iter().enumerate() {
        for (b, &dx) in TAPS.iter().enumerate() {
            grid[a][b] = epstein_poincare(f, zeta + C::new(dx as f64 * h, dy as f64 * h))?.position();
        }
    }
    let (x_u, x_uu) = stencil(grid[3], h);
    let (x_v, x_vv) = stencil(std::array::from_fn(|a| grid[a][3]), h);
    let (x_uv, _) = stencil(std::array::from_fn(|a| stencil(grid[a], h).0), h);
    let frame = epstein_poincare(f, zeta)?;
    let mut k = local_geometry(x_u, x_v, x_uu, x_vv, x_uv, frame.base.height, frame.normal).principal;
    k.sort_by(f64::total_cmp);
    Ok(k)
}

/// `∫ H da` over the interior surface restricted to `|ζ| ≤ r_max`, from
/// sixth-order differences of the Epstein map on the graded mesh grid.
///
/// The radial coordinate `s ∈ [0, 1]` with `r = 1 − (1 − r_max)^s` is smooth
/// through `s = 0` when negative radii are read as the opposite ray, which
/// supplies the ghost rows of the stencil.
pub fn fd_mean_curvature_total(
    f: &PowerSeriesMap,
    radial_n: usize,
    angular_n: usize,
    r_max: f64,
) -> Result<f64, EpsteinError> {
    check_grid(radial_n, angular_n, r_max)?;
    let hs = 1.0 / (radial_n - 1) as f64;
    let ht = 2.0 * PI / angular_n as f64;
    let rows = radial_n + 6;
    let radius = |i: usize| 1.0 - (1.0 - r_max).powf((i as f64 - 3.0) * hs);
    let frames: Vec<EpsteinFrame> = (0..rows * angular_n)
        .into_par_iter()
        .map(|k| epstein_poincare(f, C::from_polar(radius(k / angular_n), ht * (k % angular_n) as f64)))
        .collect::<Result<_, _>>()?;
    let pos = |i: usize, j: usize| frames[i * angular_n + j % angular_n].position();
    let wrap = |j: isize| j.rem_euclid(angular_n as isize) as usize;

    let ring_totals: Vec<f64> = (1..radial_n)
        .into_par_iter()
        .map(|ring| {
            let i = ring + 3;
            let weight = if ring == radial_n - 1 { 0.5 } else { 1.0 };
            let mut acc = 0.0;
            for j in 0..angular_n as isize {
                let s_col = |di: isize, dj: isize| pos((i as isize + di) as usize, wrap(j + dj));
                let (x_s, x_ss) = stencil(TAPS.map(|d| s_col(d, 0)), hs);
                let (x_t, x_tt) = stencil(TAPS.map(|d| s_col(0, d)), ht);
                let mixed = TAPS.map(|dj| stencil(TAPS.map(|d| s_col(d, dj)), hs).0);
                let (x_st, _) = stencil(mixed, ht);
                let frame = &frames[i * angular_n + j as usize];
                let geo = local_geometry(x_s, x_t, x_ss, x_tt, x_st, frame.base.height, frame.normal);
                let h_mean = 0.5 * (geo.principal[0] + geo.principal[1]);
                acc += h_mean * geo.area / (frame.base.height * frame.base.height);
            }
            weight * acc
        })
        .collect();
    Ok(crate::numeric::pairwise_sum(&ring_totals) * hs * ht)
}
