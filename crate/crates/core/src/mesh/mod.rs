//! Conforming triangle meshes refined by newest vertex bisection.
//!
//! Triangles are stored as `[a, b, c]` in counter-clockwise order with the
//! refinement edge `(a, b)` opposite the newest vertex `c`. Every element
//! carries its genealogy relative to the initial mesh, which lets two meshes
//! of the same family be overlaid without geometric searches.

mod domains;
mod io;
mod overlay;
mod refine;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::geometry::{signed_area, Barycentric, Point};

pub use domains::{initial_mesh, Domain};
pub use io::{read_mesh, write_mesh};
pub use overlay::{common_refinement, leaf_pairs, prolongation, LeafPair};
pub use refine::{new_interior_vertices, refine_nvb, uniform_refine, NewVertex};

pub(crate) const NONE: u32 = u32::MAX;

/// Position of an element in the bisection tree of its initial-mesh root.
///
/// `path` stores the branch taken at each level, most significant bit first.
/// The derived ordering `(root, path, depth)` is a preorder traversal of the
/// forest, so the leaves of any mesh sort into the same global sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemKey {
    pub root: u32,
    pub path: u64,
    pub depth: u8,
}

impl ElemKey {
    pub const MAX_DEPTH: u8 = 64;

    pub fn root(root: u32) -> Self {
        ElemKey { root, path: 0, depth: 0 }
    }

    pub fn child(self, which: u8) -> Result<Self> {
        if self.depth >= Self::MAX_DEPTH {
            return Err(Error::Structure(format!(
                "bisection depth limit {} exceeded",
                Self::MAX_DEPTH
            )));
        }
        let bit = (which as u64 & 1) << (63 - self.depth as u32);
        Ok(ElemKey {
            root: self.root,
            path: self.path | bit,
            depth: self.depth + 1,
        })
    }

    #[inline]
    fn mask(depth: u8) -> u64 {
        if depth == 0 {
            0
        } else {
            !0u64 << (64 - depth as u32)
        }
    }

    /// True if `self` equals `other` or is one of its ancestors.
    #[inline]
    pub fn contains(&self, other: &ElemKey) -> bool {
        self.root == other.root
            && self.depth <= other.depth
            && (other.path & Self::mask(self.depth)) == self.path
    }

    /// Largest path value among descendants at any depth.
    #[inline]
    pub(crate) fn path_upper(&self) -> u64 {
        self.path | !Self::mask(self.depth)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[u32; 3]>,
    keys: Vec<ElemKey>,
    boundary: Vec<bool>,
    edges: Vec<[u32; 2]>,
    edge_tris: Vec<[u32; 2]>,
    tri_edges: Vec<[u32; 3]>,
    dof: Vec<u32>,
    n_dofs: usize,
    order: Vec<u32>,
    family: u64,
    uid: u64,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a[0].to_bits() == b[0].to_bits() && a[1].to_bits() == b[1].to_bits())
            && self.triangles == other.triangles
            && self.keys == other.keys
    }
}

impl Mesh {
    /// Builds an initial mesh: every triangle is a root of the bisection forest.
    pub fn initial(vertices: Vec<Point>, triangles: Vec<[u32; 3]>) -> Result<Mesh> {
        let keys = (0..triangles.len() as u32).map(ElemKey::root).collect();
        let mut h = DefaultHasher::new();
        hash_geometry(&mut h, &vertices, &triangles);
        Mesh::from_parts(vertices, triangles, keys, h.finish())
    }

    pub(crate) fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[u32; 3]>,
        keys: Vec<ElemKey>,
        family: u64,
    ) -> Result<Mesh> {
        let nv = vertices.len();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v as usize >= nv) {
                return Err(Error::Structure(format!("triangle {k} references a missing vertex")));
            }
            let area = signed_area(vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: k, area });
            }
        }

        let mut half: Vec<([u32; 2], u32)> = Vec::with_capacity(3 * triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            for l in 0..3 {
                let (a, b) = (t[l], t[(l + 1) % 3]);
                half.push(([a.min(b), a.max(b)], (3 * k + l) as u32));
            }
        }
        half.sort_unstable();
        let mut edges = Vec::new();
        let mut edge_tris = Vec::new();
        let mut tri_edges = vec![[NONE; 3]; triangles.len()];
        let mut i = 0;
        while i < half.len() {
            let e = half[i].0;
            let mut j = i;
            while j < half.len() && half[j].0 == e {
                j += 1;
            }
            if j - i > 2 {
                return Err(Error::Structure(format!("edge {e:?} shared by {} triangles", j - i)));
            }
            let id = edges.len() as u32;
            let mut adj = [NONE; 2];
            for (s, h) in half[i..j].iter().enumerate() {
                let (k, l) = (h.1 / 3, h.1 % 3);
                adj[s] = k;
                tri_edges[k as usize][l as usize] = id;
            }
            if j - i == 2 {
                // a conforming neighbour traverses the shared edge in the opposite direction
                let (k0, l0) = (adj[0] as usize, (half[i].1 % 3) as usize);
                let (k1, l1) = (adj[1] as usize, (half[i + 1].1 % 3) as usize);
                if triangles[k0][l0] == triangles[k1][l1] {
                    return Err(Error::Structure(format!("edge {e:?} has inconsistent orientation")));
                }
            }
            edges.push(e);
            edge_tris.push(adj);
            i = j;
        }

        let mut boundary = vec![false; nv];
        for (e, adj) in edges.iter().zip(&edge_tris) {
            if adj[1] == NONE {
                boundary[e[0] as usize] = true;
                boundary[e[1] as usize] = true;
            }
        }
        let mut dof = vec![NONE; nv];
        let mut n_dofs = 0;
        for v in 0..nv {
            if !boundary[v] {
                dof[v] = n_dofs as u32;
                n_dofs += 1;
            }
        }
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        order.sort_unstable_by_key(|&k| keys[k as usize]);

        let mut h = DefaultHasher::new();
        family.hash(&mut h);
        hash_geometry(&mut h, &vertices, &triangles);
        keys.hash(&mut h);
        let uid = h.finish();

        Ok(Mesh {
            vertices,
            triangles,
            keys,
            boundary,
            edges,
            edge_tris,
            tri_edges,
            dof,
            n_dofs,
            order,
            family,
            uid,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn keys(&self) -> &[ElemKey] {
        &self.keys
    }

    /// Bisection depth of every triangle relative to the initial mesh.
    pub fn generation(&self, t: usize) -> u8 {
        self.keys[t].depth
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior-vertex numbering of the P1 space with homogeneous Dirichlet data.
    #[inline]
    pub fn dof(&self, v: usize) -> Option<usize> {
        let d = self.dof[v];
        (d != NONE).then_some(d as usize)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Vertex carrying each degree of freedom.
    pub fn dof_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| !self.boundary[v]).collect()
    }

    /// Sorted edge list; each edge is `[min, max]`.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let adj = self.edge_tris[e];
        (adj[0] as usize, (adj[1] != NONE).then_some(adj[1] as usize))
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1] == NONE
    }

    /// Edge ids of triangle `t` in local order `(v0,v1), (v1,v2), (v2,v0)`;
    /// local edge 0 is the refinement edge.
    pub fn triangle_edges(&self, t: usize) -> [u32; 3] {
        self.tri_edges[t]
    }

    pub fn edge_index(&self, a: u32, b: u32) -> Option<usize> {
        self.edges.binary_search(&[a.min(b), a.max(b)]).ok()
    }

    #[inline]
    pub fn points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0] as usize],
            self.vertices[tri[1] as usize],
            self.vertices[tri[2] as usize],
        ]
    }

    #[inline]
    pub fn barycentric(&self, t: usize) -> Barycentric {
        Barycentric::new(&self.points(t))
    }

    pub fn area(&self, t: usize) -> f64 {
        let p = self.points(t);
        signed_area(p[0], p[1], p[2])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Triangle indices in preorder of their genealogy keys.
    pub fn leaf_order(&self) -> &[u32] {
        &self.order
    }

    /// Identifier of the initial mesh this mesh descends from.
    pub fn family(&self) -> u64 {
        self.family
    }

    /// Content hash; equal meshes have equal ids.
    pub fn uid(&self) -> u64 {
        self.uid
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.points(t);
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cross = u[0] * v[1] - u[1] * v[0];
                let dot = u[0] * v[0] + u[1] * v[1];
                min = min.min(cross.abs().atan2(dot));
            }
        }
        min
    }
}

fn hash_geometry(h: &mut DefaultHasher, vertices: &[Point], triangles: &[[u32; 3]]) {
    vertices.len().hash(h);
    for p in vertices {
        p[0].to_bits().hash(h);
        p[1].to_bits().hash(h);
    }
    triangles.hash(h);
}
