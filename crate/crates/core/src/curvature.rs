//! Discrete curvature on closed triangle meshes.
//!
//! The mean curvature at vertex `i` is the Steiner edge sum
//!
//! ```text
//! K_i = 1/4 * Σ_{halfedges i->j} θ_ij * l_ij
//! ```
//!
//! with `l_ij` the edge length and `θ_ij` the signed dihedral angle between
//! the two faces sharing the edge (positive on convex edges). `K_i` is an
//! integrated quantity in mm, so `Σ_i K_i` approximates `∫ H dA`, which is
//! `4πr` for a sphere of radius `r`. Gaussian curvature is the angle defect
//! `2π - Σ` incident corner angles, whose total is `2πχ`.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use thiserror::Error;

use crate::geom;
use crate::mesh::{HalfedgeMesh, MeshError, TriangleMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("boundary edge ({0}, {1}): dihedral angle undefined")]
    BoundaryEdge(usize, usize),
    #[error("degenerate triangle {0} (zero area)")]
    DegenerateTriangle(usize),
    #[error("vertex {0} has zero associated area")]
    ZeroArea(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

impl CurvatureError {
    fn from_mesh(e: MeshError) -> Self {
        match e {
            MeshError::BoundaryEdge(a, b) => Self::BoundaryEdge(a, b),
            other => Self::Mesh(other),
        }
    }
}

/// Whether per-vertex mean curvature stays integrated (mm) or is divided
/// by the vertex's mixed Voronoi area (1/mm).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Integrated,
    AreaNormalized,
}

/// Per-vertex curvatures of one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    /// Mean curvature per vertex (see [`Normalization`]).
    pub mean: Vec<f64>,
    /// Angle defect per vertex (radians).
    pub angle_defect: Vec<f64>,
}

impl CurvatureField {
    pub fn compute(mesh: &TriangleMesh, normalization: Normalization) -> Result<Self, CurvatureError> {
        let angle_defect = gaussian_curvature(mesh)?;
        let mut mean = mean_curvature(mesh)?;
        if normalization == Normalization::AreaNormalized {
            let areas = mixed_voronoi_areas(mesh)?;
            for (i, (k, a)) in mean.iter_mut().zip(&areas).enumerate() {
                if *a <= 0.0 {
                    return Err(CurvatureError::ZeroArea(i));
                }
                *k /= a;
            }
        }
        Ok(Self { mean, angle_defect })
    }

    pub fn total_mean(&self) -> f64 {
        self.mean.iter().sum()
    }

    pub fn total_defect(&self) -> f64 {
        self.angle_defect.iter().sum()
    }

    /// `Σ |angle_defect|`, the Gaussian counterpart of the mesh energy.
    pub fn total_absolute_defect(&self) -> f64 {
        self.angle_defect.iter().map(|d| d.abs()).sum()
    }
}

/// Signed dihedral angle across halfedge `h` in `(-π, π]`; positive when
/// the edge is convex for outward-facing normals.
fn dihedral(mesh: &TriangleMesh, he: &HalfedgeMesh, h: usize) -> Result<f64, CurvatureError> {
    let t = he.twin(h);
    let n1 = face_unit_normal(mesh, he.face(h))?;
    let n2 = face_unit_normal(mesh, he.face(t))?;
    let e = geom::sub(mesh.vertices[he.dest(h)], mesh.vertices[he.origin(h)]);
    let e = geom::normalize(e).ok_or(CurvatureError::DegenerateTriangle(he.face(h)))?;
    let sin = geom::dot(geom::cross(n1, n2), e);
    let cos = geom::dot(n1, n2);
    Ok(libm::atan2(sin, cos))
}

fn face_unit_normal(mesh: &TriangleMesh, f: usize) -> Result<geom::Vec3, CurvatureError> {
    let [a, b, c] = mesh.corners(f);
    geom::normalize(geom::triangle_normal(a, b, c)).ok_or(CurvatureError::DegenerateTriangle(f))
}

/// `(halfedge, θ, l)` for one undirected edge.
type EdgeTerm = (usize, f64, f64);

/// Edge terms for every undirected edge, visited once.
fn edge_terms(mesh: &TriangleMesh) -> Result<(HalfedgeMesh, Vec<EdgeTerm>), CurvatureError> {
    let he = HalfedgeMesh::build(mesh).map_err(CurvatureError::from_mesh)?;
    let mut out = Vec::with_capacity(he.halfedge_count() / 2);
    for h in 0..he.halfedge_count() {
        if h < he.twin(h) {
            let theta = dihedral(mesh, &he, h)?;
            let len = geom::dist(mesh.vertices[he.origin(h)], mesh.vertices[he.dest(h)]);
            out.push((h, theta, len));
        }
    }
    Ok((he, out))
}

/// Integrated mean curvature `K_i = ¼ Σ θ_ij l_ij` over the outgoing
/// halfedges of every vertex.
pub fn mean_curvature(mesh: &TriangleMesh) -> Result<Vec<f64>, CurvatureError> {
    let (he, terms) = edge_terms(mesh)?;
    let mut k = vec![0.0; mesh.vertices.len()];
    for (h, theta, len) in terms {
        let w = 0.25 * theta * len;
        k[he.origin(h)] += w;
        k[he.dest(h)] += w;
    }
    Ok(k)
}

/// `½ Σ_edges θ_e l_e`, which must equal `Σ_i K_i`.
pub fn total_mean_curvature_by_edges(mesh: &TriangleMesh) -> Result<f64, CurvatureError> {
    let (_, terms) = edge_terms(mesh)?;
    Ok(0.5 * terms.iter().map(|&(_, theta, len)| theta * len).sum::<f64>())
}

/// Angle defect `2π - Σ` incident corner angles per vertex.
pub fn gaussian_curvature(mesh: &TriangleMesh) -> Result<Vec<f64>, CurvatureError> {
    let mut sum = vec![0.0; mesh.vertices.len()];
    let mut used = vec![false; mesh.vertices.len()];
    for (f, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        if geom::norm(geom::triangle_normal(pa, pb, pc)) <= 0.0 {
            return Err(CurvatureError::DegenerateTriangle(f));
        }
        sum[a] += geom::angle_at(pa, pb, pc);
        sum[b] += geom::angle_at(pb, pc, pa);
        sum[c] += geom::angle_at(pc, pa, pb);
        used[a] = true;
        used[b] = true;
        used[c] = true;
    }
    Ok(sum
        .into_iter()
        .zip(used)
        .map(|(s, u)| if u { 2.0 * PI - s } else { 0.0 })
        .collect())
}

/// Mixed Voronoi area per vertex: Voronoi region inside non-obtuse
/// triangles, half or quarter of the triangle area otherwise.
pub fn mixed_voronoi_areas(mesh: &TriangleMesh) -> Result<Vec<f64>, CurvatureError> {
    let mut area = vec![0.0; mesh.vertices.len()];
    for (f, t) in mesh.triangles.iter().enumerate() {
        let p = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let total = geom::triangle_area(p[0], p[1], p[2]);
        if total <= 0.0 {
            return Err(CurvatureError::DegenerateTriangle(f));
        }
        let angles = [
            geom::angle_at(p[0], p[1], p[2]),
            geom::angle_at(p[1], p[2], p[0]),
            geom::angle_at(p[2], p[0], p[1]),
        ];
        let obtuse = angles.iter().position(|&a| a > PI / 2.0);
        for k in 0..3 {
            let contribution = match obtuse {
                Some(o) if o == k => total / 2.0,
                Some(_) => total / 4.0,
                None => {
                    // ⅛ Σ over the two edges at k of |e|² cot(opposite angle)
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    let e_ki = geom::dist(p[k], p[i]);
                    let e_kj = geom::dist(p[k], p[j]);
                    let cot = |a: f64| libm::cos(a) / libm::sin(a);
                    (e_ki * e_ki * cot(angles[j]) + e_kj * e_kj * cot(angles[i])) / 8.0
                }
            };
            area[t[k]] += contribution;
        }
    }
    Ok(area)
}

/// Mesh energy `E = Σ_i |K_i|`.
pub fn mesh_energy(field: &CurvatureField) -> f64 {
    field.mean.iter().map(|k| k.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;
    use proptest::prelude::*;

    /// Hand summation: the 12 cube edges each have exterior dihedral π/2 and
    /// length 1; diagonal edges are flat. Σ K_i = ½ Σ θ l = ½ · 12 · π/2.
    const CUBE_TOTAL_MEAN: f64 = 3.0 * PI;

    #[test]
    fn cube_total_mean_curvature() {
        for m in [primitives::unit_cube(), primitives::unit_cube_centered()] {
            let k = mean_curvature(&m).unwrap();
            let total: f64 = k.iter().sum();
            assert!((total - CUBE_TOTAL_MEAN).abs() / CUBE_TOTAL_MEAN < 1e-12);
            let by_edges = total_mean_curvature_by_edges(&m).unwrap();
            assert!((total - by_edges).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_vertex_has_zero_curvature() {
        let m = primitives::unit_cube_centered();
        let k = mean_curvature(&m).unwrap();
        let d = gaussian_curvature(&m).unwrap();
        for v in 8..14 {
            assert!(k[v].abs() < 1e-12);
            assert!(d[v].abs() < 1e-12);
        }
    }

    #[test]
    fn planar_fan_interior_vertex_has_no_defect() {
        let mut vertices = alloc::vec![[0.0, 0.0, 0.0]];
        let mut triangles = Vec::new();
        for i in 0..6 {
            let a = i as f64 * PI / 3.0;
            vertices.push([libm::cos(a), libm::sin(a), 0.0]);
            triangles.push([0, 1 + i, 1 + (i + 1) % 6]);
        }
        let m = TriangleMesh { vertices, triangles };
        assert!(gaussian_curvature(&m).unwrap()[0].abs() < 1e-12);
        assert!(matches!(mean_curvature(&m), Err(CurvatureError::BoundaryEdge(..))));
    }

    #[test]
    fn cube_corner_defect_is_quarter_turn() {
        let d = gaussian_curvature(&primitives::unit_cube()).unwrap();
        for v in d {
            assert!((v - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_bonnet_on_primitives() {
        for m in [
            primitives::icosphere(3, 2.0),
            primitives::octahedron(1.0),
            primitives::unit_cube(),
        ] {
            let total: f64 = gaussian_curvature(&m).unwrap().iter().sum();
            assert!((total - 4.0 * PI).abs() <= 1e-9 * 4.0 * PI);
        }
    }

    #[test]
    fn convex_sphere_has_positive_curvature_everywhere() {
        let m = primitives::icosphere(3, 10.0);
        let f = CurvatureField::compute(&m, Normalization::Integrated).unwrap();
        assert!(f.mean.iter().all(|&k| k > 0.0));
        // inscribed polyhedron: total mean curvature approaches 4πr from below
        let rel = (f.total_mean() - 4.0 * PI * 10.0).abs() / (4.0 * PI * 10.0);
        assert!(rel < 0.02, "{rel}");
        assert!((mesh_energy(&f) - f.total_mean()).abs() < 1e-9);
    }

    #[test]
    fn dented_sphere_has_negative_curvature_in_the_dent() {
        let m = primitives::icosphere(3, 10.0);
        // reflect the cap above z = 9 through that plane
        let dented = m.map_vertices(|v| if v[2] > 9.0 { [v[0], v[1], 18.0 - v[2]] } else { v });
        let k = mean_curvature(&dented).unwrap();
        assert!(k.iter().any(|&x| x < 0.0));
        assert!(k.iter().any(|&x| x > 0.0));
    }

    #[test]
    fn area_normalized_sphere_is_inverse_radius() {
        let m = primitives::icosphere(4, 5.0);
        let f = CurvatureField::compute(&m, Normalization::AreaNormalized).unwrap();
        for h in &f.mean {
            assert!((h - 1.0 / 5.0).abs() < 0.02 / 5.0, "{h}");
        }
        let total_area: f64 = mixed_voronoi_areas(&m).unwrap().iter().sum();
        assert!((total_area - m.surface_area()).abs() < 1e-9);
    }

    #[test]
    fn energy_of_flat_field_is_zero() {
        let f = CurvatureField {
            mean: alloc::vec![0.0; 5],
            angle_defect: alloc::vec![0.0; 5],
        };
        assert_eq!(mesh_energy(&f), 0.0);
    }

    fn rotation(ax: f64, ay: f64, az: f64) -> impl Fn(geom::Vec3) -> geom::Vec3 {
        move |v: geom::Vec3| {
            let (s, c) = (libm::sin(ax), libm::cos(ax));
            let v = [v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]];
            let (s, c) = (libm::sin(ay), libm::cos(ay));
            let v = [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]];
            let (s, c) = (libm::sin(az), libm::cos(az));
            [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
        }
    }

    proptest! {
        #[test]
        fn scaling_law(s in 0.1f64..20.0) {
            let m = primitives::icosphere(2, 3.0);
            let scaled = m.map_vertices(|v| geom::scale(v, s));
            let a = CurvatureField::compute(&m, Normalization::Integrated).unwrap();
            let b = CurvatureField::compute(&scaled, Normalization::Integrated).unwrap();
            for (x, y) in a.mean.iter().zip(&b.mean) {
                prop_assert!((y - s * x).abs() <= 1e-9 * (s * x).abs());
            }
            for (x, y) in a.angle_defect.iter().zip(&b.angle_defect) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12));
            }
            prop_assert!((mesh_energy(&b) - s * mesh_energy(&a)).abs() <= 1e-9 * s * mesh_energy(&a));
        }

        #[test]
        fn rigid_motion_invariance(ax in -3.0f64..3.0, ay in -3.0f64..3.0, az in -3.0f64..3.0, t in -50.0f64..50.0) {
            let m = primitives::unit_cube_centered();
            let r = rotation(ax, ay, az);
            let moved = m.map_vertices(|v| geom::add(r(v), [t, -t, 0.5 * t]));
            let a = CurvatureField::compute(&m, Normalization::Integrated).unwrap();
            let b = CurvatureField::compute(&moved, Normalization::Integrated).unwrap();
            for (x, y) in a.mean.iter().zip(&b.mean) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
            for (x, y) in a.angle_defect.iter().zip(&b.angle_defect) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
