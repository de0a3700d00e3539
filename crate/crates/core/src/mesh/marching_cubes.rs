//! Marching cubes on a binary occupancy field.
//!
//! The 256-entry case table is built at run time by walking the faces of
//! the cube instead of being transcribed. On every cube face the crossing
//! points are joined into oriented segments; on an ambiguous face (two
//! diagonal occupied corners) the segments cut off each occupied corner.
//! That decision depends only on the face's four values, so the two cubes
//! sharing a face always agree and the surface is watertight. Segments
//! chain into closed loops (each crossing point lies on exactly two cube
//! faces), and each loop is triangulated either as a fan whose diagonals
//! run through the cube interior or around an added centroid vertex. No
//! triangle edge other than the face segments can then be shared between
//! cubes, which makes the output edge- and vertex-manifold.
//!
//! On binary data the asymptotic decider is exactly degenerate (the face
//! saddle equals the iso value), so the fixed "separate occupied corners"
//! rule is the resolution: the occupied set is treated as 6-connected and
//! the empty set as 18-connected, a complementary pair of digital
//! topologies.

use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{MeshError, TriangleMesh};
use crate::geom::{self, Vec3};
use crate::volume::VoxelGrid;

pub const DEFAULT_ISO: f64 = 0.5;

/// Corner `c` sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

#[derive(Debug, Clone, Copy)]
struct CubeEdge {
    lo: usize,
    hi: usize,
    axis: usize,
}

fn cube_edges() -> [CubeEdge; 12] {
    let mut out = [CubeEdge { lo: 0, hi: 0, axis: 0 }; 12];
    let mut n = 0;
    for lo in 0..8 {
        for axis in 0..3 {
            if lo & (1 << axis) == 0 {
                out[n] = CubeEdge {
                    lo,
                    hi: lo | (1 << axis),
                    axis,
                };
                n += 1;
            }
        }
    }
    out
}

/// Faces as `(axis, side)`; face id `2 * axis + side`.
fn face_contains_corner(face: usize, c: usize) -> bool {
    let (axis, side) = (face / 2, face % 2);
    (c >> axis) & 1 == side
}

fn edge_faces(e: &CubeEdge) -> [usize; 2] {
    let mut out = [0; 2];
    let mut n = 0;
    for face in 0..6 {
        if face_contains_corner(face, e.lo) && face_contains_corner(face, e.hi) {
            out[n] = face;
            n += 1;
        }
    }
    out
}

/// Triangulation of one cube configuration.
///
/// Slots `0..12` are cube edges; slot `12 + k` is the centroid of
/// `centroids[k]`.
#[derive(Debug, Clone, Default)]
struct CaseEntry {
    triangles: Vec<[u8; 3]>,
    centroids: Vec<Vec<u8>>,
}

struct CaseTable {
    edges: [CubeEdge; 12],
    cases: Vec<CaseEntry>,
}

impl CaseTable {
    fn build() -> Self {
        let edges = cube_edges();
        let cases = (0..256).map(|cfg| build_case(cfg as u8, &edges)).collect();
        Self { edges, cases }
    }
}

fn edge_midpoint(e: &CubeEdge) -> Vec3 {
    let a = corner_offset(e.lo);
    let b = corner_offset(e.hi);
    core::array::from_fn(|k| (a[k] + b[k]) as f64 * 0.5)
}

fn build_case(cfg: u8, edges: &[CubeEdge; 12]) -> CaseEntry {
    let inside = |c: usize| (cfg >> c) & 1 == 1;
    let crossing = |e: &CubeEdge| inside(e.lo) != inside(e.hi);
    let faces_of: [[usize; 2]; 12] = core::array::from_fn(|i| edge_faces(&edges[i]));

    // successor[e] = next crossing edge along the loop
    let mut successor = [usize::MAX; 12];
    for face in 0..6 {
        let (axis, side) = (face / 2, face % 2);
        let mut normal = [0.0; 3];
        normal[axis] = if side == 1 { 1.0 } else { -1.0 };
        let face_edges: Vec<usize> = (0..12)
            .filter(|&i| faces_of[i].contains(&face) && crossing(&edges[i]))
            .collect();
        // (edge, edge, occupied corner on the cut-off side)
        let mut segments: Vec<(usize, usize, usize)> = Vec::new();
        match face_edges.len() {
            0 => {}
            2 => {
                let m = (0..8)
                    .find(|&c| face_contains_corner(face, c) && inside(c))
                    .expect("a crossing face has an occupied corner");
                segments.push((face_edges[0], face_edges[1], m));
            }
            4 => {
                for c in (0..8).filter(|&c| face_contains_corner(face, c) && inside(c)) {
                    let pair: Vec<usize> = face_edges
                        .iter()
                        .copied()
                        .filter(|&i| edges[i].lo == c || edges[i].hi == c)
                        .collect();
                    segments.push((pair[0], pair[1], c));
                }
            }
            _ => unreachable!("a square face has 0, 2 or 4 sign changes"),
        }
        for (e0, e1, m) in segments {
            let p = edge_midpoint(&edges[e0]);
            let q = edge_midpoint(&edges[e1]);
            let mc = corner_offset(m).map(|v| v as f64);
            // occupied side on the right, seen from outside the cube
            let s = geom::dot(geom::cross(geom::sub(q, p), geom::sub(mc, p)), normal);
            let (from, to) = if s < 0.0 { (e0, e1) } else { (e1, e0) };
            debug_assert_eq!(successor[from], usize::MAX);
            successor[from] = to;
        }
    }

    let mut entry = CaseEntry::default();
    let mut visited = [false; 12];
    for start in 0..12 {
        if !crossing(&edges[start]) || visited[start] {
            continue;
        }
        let mut polygon = Vec::new();
        let mut e = start;
        while !visited[e] {
            visited[e] = true;
            polygon.push(e);
            e = successor[e];
            debug_assert!(e != usize::MAX, "open loop in case {cfg}");
        }
        debug_assert_eq!(e, start);
        triangulate(&polygon, &faces_of, &mut entry);
    }
    entry
}

fn share_face(a: &[usize; 2], b: &[usize; 2]) -> bool {
    a.iter().any(|f| b.contains(f))
}

fn triangulate(polygon: &[usize], faces_of: &[[usize; 2]; 12], entry: &mut CaseEntry) {
    let n = polygon.len();
    if n == 3 {
        entry
            .triangles
            .push([polygon[0] as u8, polygon[1] as u8, polygon[2] as u8]);
        return;
    }
    // A fan diagonal lying in a cube face could be shared with the
    // neighboring cube, so only fans whose diagonals all cross the interior
    // are accepted.
    for s in 0..n {
        let apex = polygon[s];
        let interior = (2..n - 1).all(|j| !share_face(&faces_of[apex], &faces_of[polygon[(s + j) % n]]));
        if interior {
            for j in 1..n - 1 {
                entry
                    .triangles
                    .push([apex as u8, polygon[(s + j) % n] as u8, polygon[(s + j + 1) % n] as u8]);
            }
            return;
        }
    }
    let slot = (12 + entry.centroids.len()) as u8;
    entry.centroids.push(polygon.iter().map(|&e| e as u8).collect());
    for k in 0..n {
        entry
            .triangles
            .push([polygon[k] as u8, polygon[(k + 1) % n] as u8, slot]);
    }
}

/// Extracts the closed surface of the occupied set.
///
/// Occupancy is sampled as 1/0 at voxel centers and the grid is padded with
/// empty voxels, so the result is always closed. Crossing points sit at
/// fraction `iso` along each edge measured from the empty end. Triangles are
/// counter-clockwise seen from the empty side.
pub fn marching_cubes(grid: &VoxelGrid, iso: f64) -> Result<TriangleMesh, MeshError> {
    if !(iso > 0.0 && iso < 1.0) {
        return Err(MeshError::BadIso(iso));
    }
    if grid.occupied_count() == 0 {
        return Err(MeshError::NoSurface);
    }
    let table = CaseTable::build();
    let [nx, ny, nz] = grid.dims().map(|d| d as i64);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut edge_vertex: HashMap<u64, usize> = HashMap::new();
    // edge key from the lower corner (shifted by one for the padding) and axis
    let key = |p: [i64; 3], axis: usize| -> u64 {
        let [x, y, z] = p.map(|v| (v + 1) as u64);
        ((z * (ny as u64 + 2) + y) * (nx as u64 + 2) + x) * 3 + axis as u64
    };

    let mut slots = [usize::MAX; 16];
    for z in -1..nz {
        for y in -1..ny {
            for x in -1..nx {
                let mut cfg = 0u8;
                for c in 0..8 {
                    let o = corner_offset(c);
                    if grid.get_signed(x + o[0] as i64, y + o[1] as i64, z + o[2] as i64) {
                        cfg |= 1 << c;
                    }
                }
                if cfg == 0 || cfg == 255 {
                    continue;
                }
                let case = &table.cases[cfg as usize];
                slots.iter_mut().for_each(|s| *s = usize::MAX);
                for tri in &case.triangles {
                    for &s in tri {
                        let s = s as usize;
                        if s >= 12 || slots[s] != usize::MAX {
                            continue;
                        }
                        let e = table.edges[s];
                        let o = corner_offset(e.lo);
                        let lo = [x + o[0] as i64, y + o[1] as i64, z + o[2] as i64];
                        let id = *edge_vertex.entry(key(lo, e.axis)).or_insert_with(|| {
                            // fraction along the edge from `lo`
                            let t = if (cfg >> e.lo) & 1 == 1 { 1.0 - iso } else { iso };
                            let mut idx = lo.map(|v| v as f64);
                            idx[e.axis] += t;
                            vertices.push(grid.world(idx));
                            vertices.len() - 1
                        });
                        slots[s] = id;
                    }
                }
                for (k, poly) in case.centroids.iter().enumerate() {
                    let c = poly
                        .iter()
                        .fold([0.0; 3], |acc, &e| geom::add(acc, vertices[slots[e as usize]]));
                    vertices.push(geom::scale(c, 1.0 / poly.len() as f64));
                    slots[12 + k] = vertices.len() - 1;
                }
                for tri in &case.triangles {
                    triangles.push(tri.map(|s| slots[s as usize]));
                }
            }
        }
    }
    Ok(TriangleMesh { vertices, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    fn grid_from(dims: [usize; 3], voxels: &[[usize; 3]]) -> VoxelGrid {
        let mut g = VoxelGrid::empty(dims, [1.0; 3], [0.0; 3]).unwrap();
        for v in voxels {
            g.set(v[0], v[1], v[2], true);
        }
        g
    }

    /// Counts 6-connected components of the occupied set by flood fill.
    fn components_6(g: &VoxelGrid) -> usize {
        let mut seen = alloc::vec![false; g.len()];
        let mut count = 0;
        for start in g.occupied() {
            let i = g.index(start[0], start[1], start[2]);
            if seen[i] {
                continue;
            }
            count += 1;
            let mut stack = alloc::vec![start];
            seen[i] = true;
            while let Some(p) = stack.pop() {
                for (a, d) in [(0, -1i64), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)] {
                    let mut q = p.map(|v| v as i64);
                    q[a] += d;
                    if g.get_signed(q[0], q[1], q[2]) {
                        let q = q.map(|v| v as usize);
                        let j = g.index(q[0], q[1], q[2]);
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn every_loop_closes_in_every_case() {
        let t = CaseTable::build();
        assert_eq!(t.cases[0].triangles.len(), 0);
        assert_eq!(t.cases[255].triangles.len(), 0);
        // one occupied corner: a single triangle
        assert_eq!(t.cases[1].triangles.len(), 1);
        for case in &t.cases[1..255] {
            assert!(!case.triangles.is_empty());
        }
    }

    #[test]
    fn single_voxel_is_a_closed_sphere() {
        let g = grid_from([5; 3], &[[2, 2, 2]]);
        let m = marching_cubes(&g, 0.5).unwrap();
        let r = validate(&m);
        assert!(r.is_valid_surface(), "{r:?}");
        assert_eq!(r.euler_characteristic, 2);
        assert_eq!(r.component_count, 1);
        // octahedron with vertices at half-voxel distance
        assert_eq!(m.vertex_count(), 6);
        assert!((m.signed_volume() - 4.0 / 3.0 * 0.125).abs() < 1e-12);
    }

    #[test]
    fn block_volume_matches_prediction() {
        let mut vox = Vec::new();
        for z in 1..3 {
            for y in 1..3 {
                for x in 1..3 {
                    vox.push([x, y, z]);
                }
            }
        }
        let g = grid_from([4; 3], &vox);
        let m = marching_cubes(&g, 0.5).unwrap();
        let r = validate(&m);
        assert!(r.is_valid_surface());
        assert_eq!(r.euler_characteristic, 2);
        // The extracted surface of a convex block is the convex hull of its
        // 24 crossing points; that hull's volume (17/3, computed offline by
        // a convex-hull routine) is the analytic prediction.
        assert!((m.signed_volume() - 17.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_grid_has_no_surface() {
        let g = VoxelGrid::empty([3; 3], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(marching_cubes(&g, 0.5), Err(MeshError::NoSurface));
        let g = grid_from([3; 3], &[[1, 1, 1]]);
        assert_eq!(marching_cubes(&g, 1.0), Err(MeshError::BadIso(1.0)));
    }

    #[test]
    fn full_grid_closes_against_padding() {
        let mut g = VoxelGrid::empty([3; 3], [1.0; 3], [0.0; 3]).unwrap();
        for z in 0..3 {
            for y in 0..3 {
                for x in 0..3 {
                    g.set(x, y, z, true);
                }
            }
        }
        let r = validate(&marching_cubes(&g, 0.5).unwrap());
        assert!(r.is_valid_surface());
        assert_eq!(r.euler_characteristic, 2);
    }

    /// All 256 corner configurations, alone in an empty 4³ grid.
    #[test]
    fn exhaustive_single_cube_configurations() {
        for cfg in 1u16..256 {
            let vox: Vec<[usize; 3]> = (0..8)
                .filter(|c| (cfg >> c) & 1 == 1)
                .map(|c| corner_offset(c).map(|v| v + 1))
                .collect();
            let g = grid_from([4; 3], &vox);
            let m = marching_cubes(&g, 0.5).unwrap();
            let r = validate(&m);
            assert!(r.is_valid_surface(), "case {cfg}: {r:?}");
            let comps = components_6(&g);
            assert_eq!(r.component_count, comps, "case {cfg}");
            // each component is a ball of 6-connected voxels: no handles
            assert_eq!(r.euler_characteristic, 2 * comps as i64, "case {cfg}");
            assert!(m.signed_volume() > 0.0, "case {cfg}");
            for t in 0..m.triangle_count() {
                assert!(m.triangle_area(t) > 1e-3, "case {cfg}: sliver");
            }
        }
    }

    #[test]
    fn iso_moves_vertices_along_edges() {
        let g = grid_from([3; 3], &[[1, 1, 1]]);
        let m = marching_cubes(&g, 0.25).unwrap();
        // crossing points sit 0.75 voxel from the occupied center
        for v in &m.vertices {
            let d = geom::dist(*v, [1.0, 1.0, 1.0]);
            assert!((d - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn world_coordinates_follow_spacing_and_origin() {
        let mut g = VoxelGrid::empty([3; 3], [0.5, 1.0, 2.0], [10.0, 20.0, 30.0]).unwrap();
        g.set(1, 1, 1, true);
        let m = marching_cubes(&g, 0.5).unwrap();
        let mut xs: Vec<f64> = m.vertices.iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 10.25).abs() < 1e-12);
        assert!((xs[xs.len() - 1] - 10.75).abs() < 1e-12);
        assert!(m.vertices.iter().all(|v| (v[2] - 32.0).abs() <= 1.0 + 1e-12));
    }
}
