//! OBJ and CSV serialization of surface meshes.
//!
//! OBJ files are y-up with the height `ξ` on the y axis: a point `(Z, ξ)`
//! is written as `(Re Z, ξ, −Im Z)`, a proper rotation, so face winding is
//! preserved. Floats use 17 significant digits and read back bit-exactly.

use super::mesh::SurfaceMesh;
use super::EpsteinError;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

fn to_y_up(p: [f64; 3]) -> [f64; 3] {
    [p[0], p[2], -p[1]]
}

fn from_y_up(p: [f64; 3]) -> [f64; 3] {
    [p[0], -p[2], p[1]]
}

/// One CSV row per mesh vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCsvRow {
    pub param_re: f64,
    pub param_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub base_re: f64,
    pub base_im: f64,
    pub height: f64,
    pub normal_x: f64,
    pub normal_y: f64,
    pub normal_z: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub mean_density: f64,
}

impl SurfaceMesh {
    pub fn write_obj<W: Write>(&self, mut out: W) -> Result<(), EpsteinError> {
        writeln!(out, "# Epstein surface, {} vertices, {} faces", self.vertex_count(), self.faces().len())?;
        for fr in self.frames() {
            let [x, y, z] = to_y_up(fr.position());
            writeln!(out, "v {x:.16e} {y:.16e} {z:.16e}")?;
        }
        for fr in self.frames() {
            let [x, y, z] = to_y_up(fr.normal);
            writeln!(out, "vn {x:.16e} {y:.16e} {z:.16e}")?;
        }
        for f in self.faces() {
            let [a, b, c] = f.map(|i| i + 1);
            writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EpsteinError> {
        let mut writer = csv::Writer::from_writer(out);
        for ((fr, k), p) in self.frames().iter().zip(self.curvature()).zip(self.params()) {
            writer.serialize(SurfaceCsvRow {
                param_re: p.re,
                param_im: p.im,
                z_re: fr.source.re,
                z_im: fr.source.im,
                base_re: fr.base.z.re,
                base_im: fr.base.z.im,
                height: fr.base.height,
                normal_x: fr.normal[0],
                normal_y: fr.normal[1],
                normal_z: fr.normal[2],
                k_plus: k.k_plus,
                k_minus: k.k_minus,
                mean_density: k.mean_density,
            })?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SurfaceCsvRow>, EpsteinError> {
    Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?)
}

/// Geometry read back from an OBJ file, in half-space coordinates `(x, y, ξ)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

fn parse_triple(line: usize, fields: &[&str]) -> Result<[f64; 3], EpsteinError> {
    if fields.len() != 3 {
        return Err(EpsteinError::Obj { line, message: format!("expected 3 coordinates, found {}", fields.len()) });
    }
    let mut out = [0.0; 3];
    for (o, s) in out.iter_mut().zip(fields) {
        *o = s.parse().map_err(|e| EpsteinError::Obj { line, message: format!("{s}: {e}") })?;
    }
    Ok(out)
}

pub fn read_obj<R: BufRead>(input: R) -> Result<ObjMesh, EpsteinError> {
    let mut mesh = ObjMesh::default();
    for (k, text) in input.lines().enumerate() {
        let text = text?;
        let line = k + 1;
        let mut parts = text.split_whitespace();
        let Some(tag) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        match tag {
            "v" => mesh.vertices.push(from_y_up(parse_triple(line, &rest)?)),
            "vn" => mesh.normals.push(from_y_up(parse_triple(line, &rest)?)),
            "f" => {
                if rest.len() != 3 {
                    return Err(EpsteinError::Obj { line, message: "only triangles are supported".into() });
                }
                let mut face = [0usize; 3];
                for (slot, token) in face.iter_mut().zip(&rest) {
                    let head = token.split('/').next().unwrap_or("");
                    let index: usize =
                        head.parse().map_err(|e| EpsteinError::Obj { line, message: format!("{head}: {e}") })?;
                    if index == 0 || index > mesh.vertices.len() {
                        return Err(EpsteinError::Obj { line, message: format!("vertex index {index} out of range") });
                    }
                    *slot = index - 1;
                }
                mesh.faces.push(face);
            }
            _ => {}
        }
    }
    Ok(mesh)
}
