use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use super::{validate, MeshError, TriangleMesh};
use crate::geom::{self, Vec3};

pub const DEFAULT_MERGE_EPS: f64 = 1e-6;
pub const DEFAULT_AREA_EPS: f64 = 1e-9;

fn cell_of(p: Vec3, eps: f64) -> [i64; 3] {
    core::array::from_fn(|a| libm::floor(p[a] / eps) as i64)
}

/// Maps every vertex to the first earlier vertex within `eps`, or itself.
fn merge_map(vertices: &[Vec3], eps: f64) -> Vec<usize> {
    let mut map = Vec::with_capacity(vertices.len());
    if eps <= 0.0 {
        let mut exact: HashMap<[u64; 3], usize> = HashMap::with_capacity(vertices.len());
        for (i, p) in vertices.iter().enumerate() {
            let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
            map.push(*exact.entry(key).or_insert(i));
        }
        return map;
    }
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(vertices.len());
    for (i, &p) in vertices.iter().enumerate() {
        let c = cell_of(p, eps);
        let mut target = i;
        'search: for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(list) = cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &j in list {
                            if geom::dist(vertices[j], p) <= eps {
                                target = j;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        if target == i {
            cells.entry(c).or_default().push(i);
        }
        map.push(target);
    }
    map
}

/// Merges near-coincident vertices and drops degenerate, duplicated and
/// zero-area triangles plus unreferenced vertices. Vertex and triangle order
/// is otherwise preserved, so cleaning a clean mesh returns it unchanged.
///
/// Fails with `NonManifoldAfterClean` unless the result is a closed,
/// manifold, consistently oriented surface.
pub fn clean_mesh(mesh: &TriangleMesh, merge_eps: f64, area_eps: f64) -> Result<TriangleMesh, MeshError> {
    if mesh.triangles.is_empty() {
        return Err(MeshError::NoTriangles);
    }
    let map = merge_map(&mesh.vertices, merge_eps);
    let mut seen: HashSet<[usize; 3]> = HashSet::with_capacity(mesh.triangles.len());
    let mut kept = Vec::with_capacity(mesh.triangles.len());
    for t in &mesh.triangles {
        let t = [map[t[0]], map[t[1]], map[t[2]]];
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            continue;
        }
        if geom::triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) < area_eps {
            continue;
        }
        let mut key = t;
        key.sort_unstable();
        if seen.insert(key) {
            kept.push(t);
        }
    }
    let mut remap = vec![usize::MAX; mesh.vertices.len()];
    for t in &kept {
        for &v in t {
            remap[v] = 0;
        }
    }
    let mut vertices = Vec::new();
    for (i, r) in remap.iter_mut().enumerate() {
        if *r == 0 {
            *r = vertices.len();
            vertices.push(mesh.vertices[i]);
        }
    }
    let triangles: Vec<[usize; 3]> = kept
        .into_iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    let out = TriangleMesh { vertices, triangles };
    if out.triangles.is_empty() || !validate(&out).is_valid_surface() {
        return Err(MeshError::NonManifoldAfterClean);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn exact_duplicate_vertex_is_merged() {
        let mut m = primitives::octahedron(1.0);
        // detach vertex 0 in two of its triangles
        m.vertices.push(m.vertices[0]);
        let dup = m.vertices.len() - 1;
        let mut n = 0;
        for t in &mut m.triangles {
            if n < 2 {
                if let Some(v) = t.iter_mut().find(|v| **v == 0) {
                    *v = dup;
                    n += 1;
                }
            }
        }
        assert!(!validate(&m).manifold);
        let c = clean_mesh(&m, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS).unwrap();
        assert_eq!(c.vertex_count(), m.vertex_count() - 1);
        assert!((c.signed_volume() - m.signed_volume()).abs() < 1e-12);
        assert!(validate(&c).is_valid_surface());
    }

    #[test]
    fn repeated_triangle_is_dropped() {
        let mut m = primitives::icosphere(1, 1.0);
        m.triangles.push(m.triangles[5]);
        let c = clean_mesh(&m, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS).unwrap();
        assert_eq!(c.triangle_count(), m.triangle_count() - 1);
    }

    #[test]
    fn clean_is_identity_on_clean_mesh() {
        let m = primitives::icosphere(2, 4.0);
        let c = clean_mesh(&m, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS).unwrap();
        assert_eq!(c, m);
        assert_eq!(clean_mesh(&c, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS).unwrap(), c);
    }

    #[test]
    fn unreferenced_vertices_are_dropped() {
        let mut m = primitives::unit_cube();
        m.vertices.insert(0, [9.0, 9.0, 9.0]);
        for t in &mut m.triangles {
            for v in t.iter_mut() {
                *v += 1;
            }
        }
        let c = clean_mesh(&m, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS).unwrap();
        assert_eq!(c, primitives::unit_cube());
    }

    #[test]
    fn opening_the_surface_is_an_error() {
        let mut m = primitives::unit_cube();
        m.triangles.remove(0);
        assert_eq!(
            clean_mesh(&m, DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS),
            Err(MeshError::NonManifoldAfterClean)
        );
        assert_eq!(
            clean_mesh(&TriangleMesh::default(), DEFAULT_MERGE_EPS, DEFAULT_AREA_EPS),
            Err(MeshError::NoTriangles)
        );
    }
}
