use super::VolumeError;
use crate::epstein::SurfaceMesh;
use crate::numeric::pairwise_sum;
use rayon::prelude::*;
use std::collections::HashMap;

type P = [f64; 3];

/// Relative height spread below which the divided difference switches to its Taylor series.
const SERIES_SPREAD: f64 = 1e-2;

/// Second divided difference of `−ln` at three positive heights.
fn neg_log_second_difference(h: [f64; 3]) -> f64 {
    let m = (h[0] + h[1] + h[2]) / 3.0;
    let spread = h.iter().map(|x| (x - m).abs()).fold(0.0, f64::max);
    if spread < SERIES_SPREAD * m {
        // Σ_k (−1)^k h_k(δ)/((k+2) m^{k+2}), h_k the complete homogeneous polynomial.
        let d = h.map(|x| (x - m) / m);
        let mut total = 0.0;
        for k in 0..=8usize {
            let mut hk = 0.0;
            for a in 0..=k {
                for b in 0..=k - a {
                    hk += d[0].powi(a as i32) * d[1].powi(b as i32) * d[2].powi((k - a - b) as i32);
                }
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * hk / (k as f64 + 2.0);
        }
        return total / (m * m);
    }
    let first = |a: f64, b: f64| {
        if a == b {
            -1.0 / a
        } else {
            -((b - a) / a).ln_1p() / (b - a)
        }
    };
    let mut s = h;
    s.sort_by(f64::total_cmp);
    (first(s[1], s[2]) - first(s[0], s[1])) / (s[2] - s[0])
}

/// `∫_T ω` for an oriented flat triangle with positive heights.
pub fn triangle_flux(a: P, b: P, c: P) -> f64 {
    let signed_area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    if signed_area == 0.0 {
        return 0.0;
    }
    -signed_area * neg_log_second_difference([a[2], b[2], c[2]])
}

/// Flux of `ω` through a closed oriented triangle mesh, which equals the
/// hyperbolic volume it encloses when faces point outward.
pub fn closed_mesh_flux(positions: &[P], faces: &[[usize; 3]]) -> f64 {
    let parts: Vec<f64> =
        faces.par_iter().map(|f| triangle_flux(positions[f[0]], positions[f[1]], positions[f[2]])).collect();
    pairwise_sum(&parts)
}

/// Point where edge `(i, j)` meets height `eps`, computed from the
/// lower-index endpoint so neighbouring faces produce identical points.
fn edge_crossing(pos: &[P], i: usize, j: usize, eps: f64) -> P {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let (p, q) = (pos[i], pos[j]);
    let t = (eps - p[2]) / (q[2] - p[2]);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), eps]
}

/// Flux through one face clipped to `ξ ≥ eps`, and the clip segment it
/// contributes in face orientation.
fn clipped_face(pos: &[P], f: &[usize; 3], eps: f64) -> (f64, Option<(P, P)>) {
    let inside = f.map(|v| pos[v][2] >= eps);
    if inside.iter().all(|&b| b) {
        return (triangle_flux(pos[f[0]], pos[f[1]], pos[f[2]]), None);
    }
    if !inside.iter().any(|&b| b) {
        return (0.0, None);
    }
    let mut poly: Vec<P> = Vec::with_capacity(4);
    let (mut exit, mut entry) = (None, None);
    for k in 0..3 {
        let (a, b) = (f[k], f[(k + 1) % 3]);
        if inside[k] {
            poly.push(pos[a]);
        }
        if inside[k] != inside[(k + 1) % 3] {
            let x = edge_crossing(pos, a, b, eps);
            if inside[k] {
                exit = Some(x);
            } else {
                entry = Some(x);
            }
            poly.push(x);
        }
    }
    let flux = (1..poly.len() - 1).map(|k| triangle_flux(poly[0], poly[k], poly[k + 1])).sum();
    (flux, exit.zip(entry))
}

struct ClipResult {
    flux: f64,
    segments: Vec<(P, P)>,
}

fn clip_mesh(mesh: &SurfaceMesh, eps: f64) -> ClipResult {
    let pos = mesh.positions();
    let parts: Vec<(f64, Option<(P, P)>)> = mesh.faces().par_iter().map(|f| clipped_face(&pos, f, eps)).collect();
    let fluxes: Vec<f64> = parts.iter().map(|p| p.0).collect();
    ClipResult { flux: pairwise_sum(&fluxes), segments: parts.into_iter().filter_map(|p| p.1).collect() }
}

fn point_key(p: P) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Counts closed loops formed by the segments and the segments left over.
fn loop_structure(segments: &[(P, P)]) -> (usize, usize) {
    let mut next: HashMap<(u64, u64), usize> = HashMap::with_capacity(segments.len());
    let mut dangling = 0;
    for (k, s) in segments.iter().enumerate() {
        if next.insert(point_key(s.0), k).is_some() {
            dangling += 1;
        }
    }
    let mut seen = vec![false; segments.len()];
    let mut loops = 0;
    for start in 0..segments.len() {
        if seen[start] {
            continue;
        }
        let mut k = start;
        loop {
            seen[k] = true;
            match next.get(&point_key(segments[k].1)) {
                Some(&n) if n == start => {
                    loops += 1;
                    break;
                }
                Some(&n) if !seen[n] => k = n,
                _ => {
                    dangling += 1;
                    break;
                }
            }
        }
    }
    (loops, dangling)
}

fn shoelace(segments: &[(P, P)]) -> f64 {
    let terms: Vec<f64> = segments.iter().map(|(a, b)| 0.5 * (a[0] * b[1] - b[0] * a[1])).collect();
    pairwise_sum(&terms)
}

/// `V₂(ε)` from the two surface meshes, with faces cut exactly at `ξ = ε`.
pub fn truncated_volume(mesh_in: &SurfaceMesh, mesh_out: &SurfaceMesh, eps: f64) -> Result<f64, VolumeError> {
    if !(eps > 0.0) {
        return Err(VolumeError::InvalidConfig(format!("truncation height {eps} is not positive")));
    }
    let inner = clip_mesh(mesh_in, eps);
    let outer = clip_mesh(mesh_out, eps);
    for clip in [&inner, &outer] {
        let (loops, dangling) = loop_structure(&clip.segments);
        if loops != 1 || dangling != 0 {
            return Err(VolumeError::CapTopology { epsilon: eps, loops, dangling });
        }
    }
    let cap_area = shoelace(&inner.segments) + shoelace(&outer.segments);
    Ok(-inner.flux - outer.flux - cap_area / (2.0 * eps * eps))
}
