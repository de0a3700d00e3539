//! Edge-length driven simplification: short-edge collapse and long-edge
//! split on closed manifold meshes.

use alloc::vec;
use alloc::vec::Vec;

use super::{clean_mesh, MeshError, TriangleMesh, DEFAULT_AREA_EPS, DEFAULT_MERGE_EPS};
use crate::geom::{self, Vec3};

/// Smallest allowed cosine between a face normal before and after a
/// collapse; anything below would fold the face over.
const MIN_NORMAL_COS: f64 = 0.0;
const MAX_PASSES: usize = 64;

/// Thresholds for [`simplify`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimplifyConfig {
    pub min_len: f64,
    pub max_len: f64,
    pub area_eps: f64,
    pub merge_eps: f64,
    pub max_rounds: usize,
}

impl SimplifyConfig {
    /// Edge bounds at 0.4 and 1.6 times the voxel spacing.
    pub fn for_spacing(spacing: f64) -> Self {
        Self {
            min_len: 0.4 * spacing,
            max_len: 1.6 * spacing,
            area_eps: DEFAULT_AREA_EPS,
            merge_eps: DEFAULT_MERGE_EPS,
            max_rounds: 3,
        }
    }
}

/// Mutable triangle soup with vertex-to-face incidence.
struct EditMesh {
    pos: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    incident: Vec<Vec<usize>>,
}

impl EditMesh {
    fn new(mesh: &TriangleMesh) -> Self {
        let mut incident = vec![Vec::new(); mesh.vertices.len()];
        for (f, t) in mesh.triangles.iter().enumerate() {
            for &v in t {
                incident[v].push(f);
            }
        }
        Self {
            pos: mesh.vertices.clone(),
            faces: mesh.triangles.clone(),
            face_alive: vec![true; mesh.triangles.len()],
            vertex_alive: vec![true; mesh.vertices.len()],
            incident,
        }
    }

    fn into_mesh(self) -> TriangleMesh {
        let mut remap = vec![usize::MAX; self.pos.len()];
        let mut vertices = Vec::new();
        for (v, &alive) in self.vertex_alive.iter().enumerate() {
            if alive && !self.incident[v].is_empty() {
                remap[v] = vertices.len();
                vertices.push(self.pos[v]);
            }
        }
        let triangles = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &alive)| alive)
            .map(|(t, _)| t.map(|v| remap[v]))
            .collect();
        TriangleMesh { vertices, triangles }
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &alive)| alive)
            .flat_map(|(t, _)| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    fn len(&self, a: usize, b: usize) -> f64 {
        geom::dist(self.pos[a], self.pos[b])
    }

    fn faces_of_edge(&self, a: usize, b: usize) -> Vec<usize> {
        self.incident[a]
            .iter()
            .copied()
            .filter(|&f| self.faces[f].contains(&b))
            .collect()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self.incident[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&u| u != v)
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    fn third(&self, f: usize, a: usize, b: usize) -> usize {
        self.faces[f]
            .iter()
            .copied()
            .find(|&v| v != a && v != b)
            .expect("triangle has three distinct corners")
    }

    fn normal(&self, t: [usize; 3]) -> Vec3 {
        geom::triangle_normal(self.pos[t[0]], self.pos[t[1]], self.pos[t[2]])
    }

    fn kill_face(&mut self, f: usize) {
        self.face_alive[f] = false;
        for v in self.faces[f] {
            self.incident[v].retain(|&g| g != f);
        }
    }

    /// Collapses edge `(a, b)` into `a` at the midpoint when that keeps the
    /// surface manifold and no face folds over.
    fn try_collapse(&mut self, a: usize, b: usize, area_eps: f64) -> bool {
        let shared = self.faces_of_edge(a, b);
        if shared.len() != 2 {
            return false;
        }
        let c = self.third(shared[0], a, b);
        let d = self.third(shared[1], a, b);
        if c == d {
            return false;
        }
        // link condition: the only common neighbors are the two opposite
        // vertices
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common: Vec<usize> = na.iter().copied().filter(|v| nb.binary_search(v).is_ok()).collect();
        if common.len() != 2 || !common.contains(&c) || !common.contains(&d) {
            return false;
        }
        if self.neighbors(c).len() <= 3 || self.neighbors(d).len() <= 3 {
            return false;
        }
        let m = geom::midpoint(self.pos[a], self.pos[b]);
        for v in [a, b] {
            for &f in &self.incident[v] {
                if shared.contains(&f) {
                    continue;
                }
                let t = self.faces[f];
                let before = self.normal(t);
                let moved = t.map(|u| if u == a || u == b { usize::MAX } else { u });
                let p = moved.map(|u| if u == usize::MAX { m } else { self.pos[u] });
                let after = geom::triangle_normal(p[0], p[1], p[2]);
                if 0.5 * geom::norm(after) < area_eps {
                    return false;
                }
                match (geom::normalize(before), geom::normalize(after)) {
                    (Some(n0), Some(n1)) if geom::dot(n0, n1) > MIN_NORMAL_COS => {}
                    _ => return false,
                }
            }
        }
        for f in shared {
            self.kill_face(f);
        }
        let moved: Vec<usize> = core::mem::take(&mut self.incident[b]);
        for &f in &moved {
            for v in self.faces[f].iter_mut() {
                if *v == b {
                    *v = a;
                }
            }
        }
        self.incident[a].extend(moved);
        self.vertex_alive[b] = false;
        self.pos[a] = m;
        true
    }

    /// Inserts the midpoint of edge `(a, b)` and bisects both incident
    /// triangles, keeping their orientation.
    fn split(&mut self, a: usize, b: usize) -> bool {
        let shared = self.faces_of_edge(a, b);
        if shared.len() != 2 {
            return false;
        }
        let m = self.pos.len();
        self.pos.push(geom::midpoint(self.pos[a], self.pos[b]));
        self.vertex_alive.push(true);
        self.incident.push(Vec::new());
        for f in shared {
            let t = self.faces[f];
            // rotate so the split edge is t[0] -> t[1]
            let k = (0..3)
                .find(|&k| {
                    let (u, v) = (t[k], t[(k + 1) % 3]);
                    (u == a && v == b) || (u == b && v == a)
                })
                .expect("face contains the edge");
            let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            self.incident[v].retain(|&g| g != f);
            self.faces[f] = [u, m, w];
            self.incident[m].push(f);
            let g = self.faces.len();
            self.faces.push([m, v, w]);
            self.face_alive.push(true);
            for x in [m, v, w] {
                self.incident[x].push(g);
            }
        }
        true
    }
}

/// Collapses edges shorter than `min_len` at their midpoint.
///
/// Collapses that would violate the link condition, leave a valence-3
/// neighbor, or fold a face are skipped, so the result keeps the input's
/// topology and orientation.
pub fn collapse_short_edges(mesh: &TriangleMesh, min_len: f64) -> TriangleMesh {
    collapse_with(mesh, min_len, DEFAULT_AREA_EPS)
}

fn collapse_with(mesh: &TriangleMesh, min_len: f64, area_eps: f64) -> TriangleMesh {
    let mut em = EditMesh::new(mesh);
    for _ in 0..MAX_PASSES {
        let mut short: Vec<(f64, usize, usize)> = em
            .edges()
            .into_iter()
            .map(|(a, b)| (em.len(a, b), a, b))
            .filter(|e| e.0 < min_len)
            .collect();
        if short.is_empty() {
            break;
        }
        short.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut changed = false;
        for (_, a, b) in short {
            if !em.vertex_alive[a] || !em.vertex_alive[b] || em.len(a, b) >= min_len {
                continue;
            }
            changed |= em.try_collapse(a, b, area_eps);
        }
        if !changed {
            break;
        }
    }
    em.into_mesh()
}

/// Splits edges longer than `max_len` at their midpoint until none remain.
pub fn split_long_edges(mesh: &TriangleMesh, max_len: f64) -> TriangleMesh {
    let mut em = EditMesh::new(mesh);
    for _ in 0..MAX_PASSES {
        let mut long: Vec<(f64, usize, usize)> = em
            .edges()
            .into_iter()
            .map(|(a, b)| (em.len(a, b), a, b))
            .filter(|e| e.0 > max_len)
            .collect();
        if long.is_empty() {
            break;
        }
        long.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (_, a, b) in long {
            if em.faces_of_edge(a, b).len() == 2 && em.len(a, b) > max_len {
                em.split(a, b);
            }
        }
    }
    em.into_mesh()
}

/// Clean, collapse, split, clean; repeated until nothing changes or
/// `max_rounds` is reached.
pub fn simplify(mesh: &TriangleMesh, cfg: &SimplifyConfig) -> Result<TriangleMesh, MeshError> {
    let mut current = clean_mesh(mesh, cfg.merge_eps, cfg.area_eps)?;
    for _ in 0..cfg.max_rounds {
        let collapsed = collapse_with(&current, cfg.min_len, cfg.area_eps);
        let split = split_long_edges(&collapsed, cfg.max_len);
        let next = clean_mesh(&split, cfg.merge_eps, cfg.area_eps)?;
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}
