use crate::error::{Error, Result};
use crate::geometry::midpoint;

use super::{ElemKey, Mesh};

/// A vertex created by uniform refinement in the interior of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NewVertex {
    /// Coarse edge `[min, max]` whose midpoint this vertex is.
    pub edge: [u32; 2],
    /// Vertex id of the midpoint in `uniform_refine(mesh)`.
    pub fine: u32,
}

/// Interior vertices of `uniform_refine(mesh)` that are not vertices of `mesh`,
/// i.e. the midpoints of all interior edges.
pub fn new_interior_vertices(mesh: &Mesh) -> Vec<NewVertex> {
    let nv = mesh.n_vertices() as u32;
    (0..mesh.edges().len())
        .filter(|&e| !mesh.is_boundary_edge(e))
        .map(|e| NewVertex {
            edge: mesh.edges()[e],
            fine: nv + e as u32,
        })
        .collect()
}

/// Bisects every triangle three times so that every edge is halved.
///
/// The midpoint of edge `e` receives vertex id `n_vertices + e`.
pub fn uniform_refine(mesh: &Mesh) -> Result<Mesh> {
    refine_edges(mesh, vec![true; mesh.edges().len()])
}

/// Coarsest conforming NVB refinement containing the midpoints of the
/// `marked` interior edges as vertices.
pub fn refine_nvb(mesh: &Mesh, marked: &[[u32; 2]]) -> Result<Mesh> {
    let mut flags = vec![false; mesh.edges().len()];
    for e in marked {
        match mesh.edge_index(e[0], e[1]) {
            Some(i) if !mesh.is_boundary_edge(i) => flags[i] = true,
            _ => {
                return Err(Error::Precondition(format!(
                    "marked vertex on edge {e:?} is not a new interior vertex"
                )))
            }
        }
    }
    if !flags.iter().any(|&f| f) {
        return Ok(mesh.clone());
    }
    refine_edges(mesh, flags)
}

fn refine_edges(mesh: &Mesh, mut marked: Vec<bool>) -> Result<Mesh> {
    // closure: a triangle with any marked edge must bisect its refinement edge
    let mut stack: Vec<usize> = (0..marked.len()).filter(|&e| marked[e]).collect();
    while let Some(e) = stack.pop() {
        let (t0, t1) = mesh.edge_triangles(e);
        for t in std::iter::once(t0).chain(t1) {
            let r = mesh.triangle_edges(t)[0] as usize;
            if !marked[r] {
                marked[r] = true;
                stack.push(r);
            }
        }
    }

    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut mid = vec![u32::MAX; marked.len()];
    for (e, &m) in marked.iter().enumerate() {
        if m {
            let [a, b] = mesh.edges()[e];
            mid[e] = vertices.len() as u32;
            vertices.push(midpoint(vertices[a as usize], vertices[b as usize]));
        }
    }

    let lookup = |a: u32, b: u32| -> Option<u32> {
        if a as usize >= nv || b as usize >= nv {
            return None;
        }
        mesh.edge_index(a, b).map(|e| mid[e]).filter(|&m| m != u32::MAX)
    };

    let mut triangles = Vec::with_capacity(mesh.n_triangles() * 2);
    let mut keys = Vec::with_capacity(mesh.n_triangles() * 2);
    for t in 0..mesh.n_triangles() {
        split(mesh.triangles()[t], mesh.keys()[t], &lookup, &mut triangles, &mut keys)?;
    }
    Mesh::from_parts(vertices, triangles, keys, mesh.family())
}

fn split(
    tri: [u32; 3],
    key: ElemKey,
    lookup: &impl Fn(u32, u32) -> Option<u32>,
    triangles: &mut Vec<[u32; 3]>,
    keys: &mut Vec<ElemKey>,
) -> Result<()> {
    let [a, b, c] = tri;
    match lookup(a, b) {
        Some(m) => {
            split([c, a, m], key.child(0)?, lookup, triangles, keys)?;
            split([b, c, m], key.child(1)?, lookup, triangles, keys)
        }
        None => {
            triangles.push(tri);
            keys.push(key);
            Ok(())
        }
    }
}
