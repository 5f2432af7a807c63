use super::mesh::SurfaceMesh;
use rayon::prelude::*;
use std::collections::HashMap;

type P = [f64; 3];

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn along(a: P, d: P, t: f64) -> P {
    [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]]
}

/// Closest point on triangle `abc` to `p`, by Voronoi-region classification.
fn closest_on_triangle(p: P, a: P, b: P, c: P) -> P {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let (d1, d2) = (dot(ab, ap), dot(ac, ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let (d3, d4) = (dot(ab, bp), dot(ac, bp));
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return along(a, ab, d1 / (d1 - d3));
    }
    let cp = sub(p, c);
    let (d5, d6) = (dot(ab, cp), dot(ac, cp));
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return along(a, ac, d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return along(b, sub(c, b), (d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    let (v, w) = (vb * denom, vc * denom);
    [a[0] + ab[0] * v + ac[0] * w, a[1] + ab[1] * v + ac[1] * w, a[2] + ab[2] * v + ac[2] * w]
}

fn point_triangle_distance(p: P, a: P, b: P, c: P) -> f64 {
    let q = closest_on_triangle(p, a, b, c);
    dot(sub(p, q), sub(p, q)).sqrt()
}

/// Uniform bucket grid over triangle bounding boxes.
struct TriangleGrid<'a> {
    pos: &'a [P],
    faces: &'a [[usize; 3]],
    origin: P,
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    extent: [i64; 3],
}

impl<'a> TriangleGrid<'a> {
    fn new(pos: &'a [P], faces: &'a [[usize; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in pos {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max).max(1e-12);
        // About one triangle per cell on a surface of this extent.
        let cell = span / (faces.len() as f64).sqrt().max(1.0);
        let mut grid = Self { pos, faces, origin: lo, cell, buckets: HashMap::new(), extent: [0; 3] };
        for k in 0..3 {
            grid.extent[k] = ((hi[k] - lo[k]) / cell).floor() as i64 + 1;
        }
        for (t, f) in faces.iter().enumerate() {
            let (mut a, mut b) = ([i64::MAX; 3], [i64::MIN; 3]);
            for &v in f {
                let c = grid.key(pos[v]);
                for k in 0..3 {
                    a[k] = a[k].min(c[k]);
                    b[k] = b[k].max(c[k]);
                }
            }
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for l in a[2]..=b[2] {
                        grid.buckets.entry([i, j, l]).or_default().push(t);
                    }
                }
            }
        }
        grid
    }

    fn key(&self, p: P) -> [i64; 3] {
        std::array::from_fn(|k| ((p[k] - self.origin[k]) / self.cell).floor() as i64)
    }

    fn triangle_distance(&self, p: P, t: usize) -> f64 {
        let [a, b, c] = self.faces[t].map(|v| self.pos[v]);
        point_triangle_distance(p, a, b, c)
    }

    /// Nearest triangle distance, searching Chebyshev shells until no
    /// unvisited cell can hold anything closer.
    fn nearest(&self, p: P) -> f64 {
        let centre = self.key(p);
        let max_shell = (0..3)
            .map(|k| (centre[k].abs() + self.extent[k]).max((centre[k] - self.extent[k]).abs()))
            .max()
            .unwrap_or(0)
            + 1;
        let mut best = f64::INFINITY;
        for shell in 0..=max_shell {
            for i in -shell..=shell {
                for j in -shell..=shell {
                    for l in -shell..=shell {
                        if i.abs().max(j.abs()).max(l.abs()) != shell {
                            continue;
                        }
                        if let Some(tris) = self.buckets.get(&[centre[0] + i, centre[1] + j, centre[2] + l]) {
                            for &t in tris {
                                best = best.min(self.triangle_distance(p, t));
                            }
                        }
                    }
                }
            }
            if best <= shell as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn one_sided(from: &[P], to_pos: &[P], to_faces: &[[usize; 3]]) -> f64 {
    let grid = TriangleGrid::new(to_pos, to_faces);
    from.par_iter().map(|&p| grid.nearest(p)).reduce(|| f64::INFINITY, f64::min)
}

/// Minimum Euclidean vertex-to-triangle distance between two meshes, taken
/// in both directions.
pub fn surface_separation(a: &SurfaceMesh, b: &SurfaceMesh) -> f64 {
    let (pa, pb) = (a.positions(), b.positions());
    one_sided(&pa, &pb, b.faces()).min(one_sided(&pb, &pa, a.faces()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_regions() {
        let (a, b, c) = ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(point_triangle_distance([0.2, 0.2, 0.5], a, b, c), 0.5);
        assert_eq!(point_triangle_distance([-1.0, -1.0, 0.0], a, b, c), 2f64.sqrt());
        assert!((point_triangle_distance([1.0, 1.0, 0.0], a, b, c) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(point_triangle_distance([0.5, -2.0, 0.0], a, b, c), 2.0);
    }

    #[test]
    fn bucket_search_matches_brute_force() {
        let pos: Vec<P> = (0..64)
            .map(|k| {
                let t = k as f64 * 0.37;
                [t.cos(), t.sin(), (1.3 * t).cos() * 0.5]
            })
            .collect();
        let faces: Vec<[usize; 3]> = (0..60).map(|k| [k, k + 1, k + 3]).collect();
        let grid = TriangleGrid::new(&pos, &faces);
        for q in [[0.1, 0.2, 0.3], [2.0, -1.0, 0.5], [-0.5, 0.5, -0.2]] {
            let brute = (0..faces.len()).map(|t| grid.triangle_distance(q, t)).fold(f64::INFINITY, f64::min);
            assert_eq!(grid.nearest(q), brute);
        }
    }
}
