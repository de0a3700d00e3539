//! Closed reference meshes with known curvature totals.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::TriangleMesh;
use crate::geom::{self, Vec3};

// Unit cube corners indexed x + 2y + 4z; quads counter-clockwise from outside.
const CUBE_QUADS: [[usize; 4]; 6] = [
    [0, 2, 3, 1],
    [4, 5, 7, 6],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 4, 6, 2],
    [1, 3, 7, 5],
];

fn cube_corners() -> Vec<Vec3> {
    (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect()
}

/// `[0, 1]³` with each square split into two triangles.
pub fn unit_cube() -> TriangleMesh {
    let triangles = CUBE_QUADS
        .iter()
        .flat_map(|&[a, b, c, d]| [[a, b, c], [a, c, d]])
        .collect();
    TriangleMesh {
        vertices: cube_corners(),
        triangles,
    }
}

/// `[0, 1]³` with a vertex at each square's center (four triangles per side).
pub fn unit_cube_centered() -> TriangleMesh {
    let mut vertices = cube_corners();
    let mut triangles = Vec::new();
    for quad in CUBE_QUADS {
        let m = vertices.len();
        let c = quad
            .iter()
            .fold([0.0; 3], |acc, &i| geom::add(acc, geom::scale(vertices[i], 0.25)));
        vertices.push(c);
        for k in 0..4 {
            triangles.push([quad[k], quad[(k + 1) % 4], m]);
        }
    }
    TriangleMesh { vertices, triangles }
}

pub fn octahedron(radius: f64) -> TriangleMesh {
    let r = radius;
    let vertices = vec![
        [r, 0.0, 0.0],
        [-r, 0.0, 0.0],
        [0.0, r, 0.0],
        [0.0, -r, 0.0],
        [0.0, 0.0, r],
        [0.0, 0.0, -r],
    ];
    let mut triangles = Vec::new();
    for sx in [0usize, 1] {
        for sy in [2usize, 3] {
            for sz in [4usize, 5] {
                let negatives = sx + (sy - 2) + (sz - 4);
                if negatives % 2 == 0 {
                    triangles.push([sx, sy, sz]);
                } else {
                    triangles.push([sx, sz, sy]);
                }
            }
        }
    }
    TriangleMesh { vertices, triangles }
}

/// Icosahedron refined `subdivisions` times, projected onto a sphere.
pub fn icosphere(subdivisions: usize, radius: f64) -> TriangleMesh {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(geom::midpoint(vertices[a], vertices[b]));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [a, b, c] in triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    for v in &mut vertices {
        *v = geom::scale(*v, radius / geom::norm(*v));
    }
    TriangleMesh { vertices, triangles }
}
