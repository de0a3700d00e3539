use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{MeshError, TriangleMesh};

pub const INVALID: usize = usize::MAX;

/// Halfedge connectivity derived from a closed, oriented triangle mesh.
///
/// Halfedge `3 * f + k` runs from corner `k` to corner `k + 1` of face `f`.
#[derive(Debug, Clone)]
pub struct HalfedgeMesh {
    origin: Vec<usize>,
    twin: Vec<usize>,
    vertex_out: Vec<usize>,
}

impl HalfedgeMesh {
    /// Builds the adjacency; every edge must have exactly one opposite
    /// halfedge.
    pub fn build(mesh: &TriangleMesh) -> Result<Self, MeshError> {
        let (he, boundary) = Self::build_partial(mesh)?;
        match boundary {
            Some((a, b)) => Err(MeshError::BoundaryEdge(a, b)),
            None => Ok(he),
        }
    }

    /// Like `build`, but tolerates boundary edges (twin = `INVALID`) and
    /// reports the first one found.
    pub(crate) fn build_partial(mesh: &TriangleMesh) -> Result<(Self, Option<(usize, usize)>), MeshError> {
        let n_he = mesh.triangles.len() * 3;
        let mut origin = Vec::with_capacity(n_he);
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_he);
        let mut vertex_out = vec![INVALID; mesh.vertices.len()];
        for (f, t) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a >= mesh.vertices.len() || b >= mesh.vertices.len() {
                    return Err(MeshError::BadIndex(f));
                }
                let h = 3 * f + k;
                origin.push(a);
                if directed.insert((a, b), h).is_some() || a == b {
                    return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b)));
                }
                if vertex_out[a] == INVALID {
                    vertex_out[a] = h;
                }
            }
        }
        let mut twin = vec![INVALID; n_he];
        let mut boundary = None;
        for (h, &a) in origin.iter().enumerate() {
            let b = origin[Self::next_of(h)];
            match directed.get(&(b, a)) {
                Some(&t) => twin[h] = t,
                None => {
                    if boundary.is_none() {
                        boundary = Some((a.min(b), a.max(b)));
                    }
                }
            }
        }
        Ok((
            Self {
                origin,
                twin,
                vertex_out,
            },
            boundary,
        ))
    }

    #[inline]
    fn next_of(h: usize) -> usize {
        if h % 3 == 2 {
            h - 2
        } else {
            h + 1
        }
    }

    pub fn halfedge_count(&self) -> usize {
        self.origin.len()
    }

    #[inline]
    pub fn origin(&self, h: usize) -> usize {
        self.origin[h]
    }

    #[inline]
    pub fn dest(&self, h: usize) -> usize {
        self.origin[Self::next_of(h)]
    }

    #[inline]
    pub fn twin(&self, h: usize) -> usize {
        self.twin[h]
    }

    #[inline]
    pub fn next(&self, h: usize) -> usize {
        Self::next_of(h)
    }

    #[inline]
    pub fn face(&self, h: usize) -> usize {
        h / 3
    }

    /// One outgoing halfedge, or `INVALID` for an isolated vertex.
    #[inline]
    pub fn vertex_out(&self, v: usize) -> usize {
        self.vertex_out[v]
    }

    /// Outgoing halfedges of `v` in rotation order. Only meaningful on a
    /// closed mesh; stops after one full turn.
    pub fn outgoing(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.vertex_out[v];
        let mut cur = start;
        let mut done = start == INVALID;
        core::iter::from_fn(move || {
            if done {
                return None;
            }
            let h = cur;
            // previous halfedge in the face points into v; its twin leaves v
            let prev = self.next(self.next(h));
            let t = self.twin[prev];
            if t == INVALID || t == start {
                done = true;
            } else {
                cur = t;
            }
            Some(h)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn twin_and_next_are_involutions() {
        let m = primitives::icosphere(1, 1.0);
        let he = HalfedgeMesh::build(&m).unwrap();
        for h in 0..he.halfedge_count() {
            assert_eq!(he.twin(he.twin(h)), h);
            assert_eq!(he.next(he.next(he.next(h))), h);
            assert_eq!(he.origin(he.twin(h)), he.dest(h));
        }
    }

    #[test]
    fn outgoing_ring_matches_valence() {
        let m = primitives::unit_cube();
        let he = HalfedgeMesh::build(&m).unwrap();
        let mut valence = vec![0usize; m.vertex_count()];
        for (a, b) in m.edges() {
            valence[a] += 1;
            valence[b] += 1;
        }
        for (v, &deg) in valence.iter().enumerate() {
            let ring: Vec<usize> = he.outgoing(v).collect();
            assert_eq!(ring.len(), deg);
            assert!(ring.iter().all(|&h| he.origin(h) == v));
        }
    }

    #[test]
    fn open_mesh_is_rejected() {
        let mut m = primitives::unit_cube();
        m.triangles.pop();
        assert!(matches!(HalfedgeMesh::build(&m), Err(MeshError::BoundaryEdge(..))));
    }

    #[test]
    fn flipped_face_is_rejected() {
        let mut m = primitives::unit_cube();
        m.triangles[0].swap(1, 2);
        assert!(matches!(HalfedgeMesh::build(&m), Err(MeshError::NonManifoldEdge(..))));
    }
}
