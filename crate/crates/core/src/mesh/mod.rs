//! Triangle surface meshes: extraction from voxels, cleaning, edge-length
//! remeshing and topological validation.

mod clean;
mod halfedge;
mod marching_cubes;
pub mod primitives;
mod remesh;
mod validate;

use alloc::vec::Vec;

use thiserror::Error;

use crate::geom::{self, Vec3};

pub use clean::{clean_mesh, DEFAULT_AREA_EPS, DEFAULT_MERGE_EPS};
pub use halfedge::HalfedgeMesh;
pub use marching_cubes::{marching_cubes, DEFAULT_ISO};
pub use remesh::{collapse_short_edges, simplify, split_long_edges, SimplifyConfig};
pub use validate::{validate, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("no surface: the mask has no occupied voxel")]
    NoSurface,
    #[error("mesh has no triangles")]
    NoTriangles,
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
    #[error("edge ({0}, {1}) has no opposite halfedge")]
    BoundaryEdge(usize, usize),
    #[error("edge ({0}, {1}) is used more than twice or with inconsistent orientation")]
    NonManifoldEdge(usize, usize),
    #[error("non-manifold after clean")]
    NonManifoldAfterClean,
    #[error("iso value must lie strictly between 0 and 1, got {0}")]
    BadIso(f64),
}

/// Indexed triangle surface in world coordinates (mm).
///
/// Triangles are counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        if let Some(bad) = triangles.iter().position(|t| t.iter().any(|&v| v >= n)) {
            return Err(MeshError::BadIndex(bad));
        }
        Ok(Self { vertices, triangles })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        geom::triangle_area(a, b, c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Signed enclosed volume `Σ det(v0, v1, v2) / 6`; positive for a closed
    /// outward-oriented surface.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| geom::dot(self.vertices[a], geom::cross(self.vertices[b], self.vertices[c])) / 6.0)
            .sum()
    }

    /// Undirected edges `(min, max)`, sorted and deduplicated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn mean_edge_length(&self) -> f64 {
        let e = self.edges();
        if e.is_empty() {
            return 0.0;
        }
        e.iter()
            .map(|&(a, b)| geom::dist(self.vertices[a], self.vertices[b]))
            .sum::<f64>()
            / e.len() as f64
    }

    /// Applies `f` to every vertex position.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Disjoint union; indices of `other` are shifted.
    pub fn merged(&self, other: &TriangleMesh) -> Self {
        let off = self.vertices.len();
        let mut out = self.clone();
        out.vertices.extend_from_slice(&other.vertices);
        out.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        out
    }
}
