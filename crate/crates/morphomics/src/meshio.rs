//! ASCII OFF read/write and binary STL export.

use std::fmt::Write as _;
use std::path::Path;

use morphomics_core::geom;
use morphomics_core::TriangleMesh;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("OFF parse error: {0}")]
    Parse(String),
}

pub fn to_off(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF\n{} {} 0", mesh.vertices.len(), mesh.triangles.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {} {}", v[0], v[1], v[2]).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    s
}

/// Parses OFF with triangle or convex polygon faces (polygons are fanned).
pub fn parse_off(text: &str) -> Result<TriangleMesh, MeshIoError> {
    let err = |m: &str| MeshIoError::Parse(m.to_string());
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    match tokens.next() {
        Some("OFF") => {}
        _ => return Err(err("missing OFF keyword")),
    }
    let mut next_usize = |what: &str| -> Result<usize, MeshIoError> {
        tokens
            .next()
            .ok_or_else(|| err(&format!("truncated before {what}")))?
            .parse::<usize>()
            .map_err(|_| err(&format!("bad {what}")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut v = [0.0; 3];
        for c in &mut v {
            *c = tokens
                .next()
                .ok_or_else(|| err(&format!("truncated in vertex {i}")))?
                .parse()
                .map_err(|_| err(&format!("bad coordinate in vertex {i}")))?;
        }
        vertices.push(v);
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let mut idx = || -> Result<usize, MeshIoError> {
            tokens
                .next()
                .ok_or_else(|| err(&format!("truncated in face {f}")))?
                .parse()
                .map_err(|_| err(&format!("bad index in face {f}")))
        };
        let k = idx()?;
        if k < 3 {
            return Err(err(&format!("face {f} has {k} vertices")));
        }
        let poly: Vec<usize> = (0..k).map(|_| idx()).collect::<Result<_, _>>()?;
        if poly.iter().any(|&i| i >= nv) {
            return Err(err(&format!("face {f} indexes past the vertex list")));
        }
        for j in 1..k - 1 {
            triangles.push([poly[0], poly[j], poly[j + 1]]);
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(|e| MeshIoError::Parse(e.to_string()))
}

pub fn write_off(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<(), MeshIoError> {
    std::fs::write(path, to_off(mesh))?;
    Ok(())
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshIoError> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn to_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [0u8; 80];
    header[..10].copy_from_slice(b"morphomics");
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corners(t);
        let n = geom::normalize(geom::triangle_normal(a, b, c)).unwrap_or([0.0; 3]);
        for v in [n, a, b, c] {
            for x in v {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

pub fn write_stl(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<(), MeshIoError> {
    std::fs::write(path, to_stl(mesh))?;
    Ok(())
}
