use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::TriangleMesh;

/// Topological checks on a triangle mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    /// No edge is used by exactly one triangle.
    pub closed: bool,
    /// Every edge borders exactly two triangles and every vertex has a
    /// single fan of triangles around it.
    pub manifold: bool,
    /// Every two-triangle edge is traversed in opposite directions.
    pub oriented: bool,
    /// `V - E + F` over all stored vertices.
    pub euler_characteristic: i64,
    /// Connected components among referenced vertices.
    pub component_count: usize,
}

impl ValidationReport {
    /// Closed, manifold and consistently oriented.
    pub fn is_valid_surface(&self) -> bool {
        self.closed && self.manifold && self.oriented
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn validate(mesh: &TriangleMesh) -> ValidationReport {
    let n = mesh.vertices.len();
    // (uses, uses in a < b direction)
    let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::with_capacity(mesh.triangles.len() * 2);
    let mut parent: Vec<usize> = (0..n).collect();
    let mut referenced = vec![false; n];
    let mut link: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let e = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            e.0 += 1;
            if a < b {
                e.1 += 1;
            }
            referenced[a] = true;
            link[a].push((b, c));
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    let closed = edges.values().all(|&(uses, _)| uses != 1);
    let edge_manifold = edges.values().all(|&(uses, _)| uses == 2);
    let oriented = edges.values().all(|&(uses, fwd)| uses != 2 || fwd == 1);
    let vertex_manifold = edge_manifold && link.iter().all(|l| single_fan(l));

    let mut roots: Vec<usize> = (0..n)
        .filter(|&v| referenced[v])
        .map(|v| find(&mut parent, v))
        .collect();
    roots.sort_unstable();
    roots.dedup();

    ValidationReport {
        closed,
        manifold: edge_manifold && vertex_manifold,
        oriented,
        euler_characteristic: n as i64 - edges.len() as i64 + mesh.triangles.len() as i64,
        component_count: roots.len(),
    }
}

/// The link edges of one vertex form exactly one cycle.
fn single_fan(link: &[(usize, usize)]) -> bool {
    if link.is_empty() {
        return true;
    }
    let mut next: HashMap<usize, usize> = HashMap::with_capacity(link.len());
    for &(b, c) in link {
        if next.insert(b, c).is_some() {
            return false;
        }
    }
    let start = link[0].0;
    let mut cur = start;
    for steps in 1..=link.len() {
        match next.get(&cur) {
            Some(&c) => cur = c,
            None => return false,
        }
        if cur == start {
            return steps == link.len();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn closed_sphere_reports_valid() {
        let r = validate(&primitives::icosphere(1, 1.0));
        assert!(r.is_valid_surface());
        assert_eq!(r.euler_characteristic, 2);
        assert_eq!(r.component_count, 1);
    }

    #[test]
    fn removed_face_opens_the_surface() {
        let mut m = primitives::icosphere(1, 1.0);
        m.triangles.pop();
        let r = validate(&m);
        assert!(!r.closed);
        assert!(!r.manifold);
    }

    #[test]
    fn disjoint_spheres_add_up() {
        let a = primitives::icosphere(1, 1.0);
        let b = primitives::octahedron(1.0).map_vertices(|v| [v[0] + 5.0, v[1], v[2]]);
        let r = validate(&a.merged(&b));
        assert!(r.is_valid_surface());
        assert_eq!(r.component_count, 2);
        assert_eq!(r.euler_characteristic, 4);
    }

    #[test]
    fn flipped_face_is_not_oriented() {
        let mut m = primitives::octahedron(1.0);
        m.triangles[3].swap(0, 1);
        let r = validate(&m);
        assert!(r.closed);
        assert!(!r.oriented);
    }

    #[test]
    fn two_cones_sharing_an_apex_are_not_vertex_manifold() {
        // two octahedra glued at a single vertex
        let a = primitives::octahedron(1.0);
        let mut b = primitives::octahedron(1.0).map_vertices(|v| [v[0] + 2.0, v[1], v[2]]);
        // vertex 1 of b is (1,0,0) == vertex 0 of a; reuse a's index
        let mut m = a.clone();
        let off = m.vertices.len();
        m.vertices.extend_from_slice(&b.vertices);
        for t in &mut b.triangles {
            for v in t.iter_mut() {
                *v = if *v == 1 { 0 } else { *v + off };
            }
        }
        m.triangles.extend_from_slice(&b.triangles);
        let r = validate(&m);
        assert!(r.closed);
        assert!(!r.manifold);
    }
}
