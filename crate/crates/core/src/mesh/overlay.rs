use std::collections::HashMap;

use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};

use super::Mesh;

/// One element of the common refinement of two meshes: triangle `a` of the
/// first mesh and triangle `b` of the second overlap, and the overlap is the
/// finer of the two (`b_finer` selects which).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafPair {
    pub a: u32,
    pub b: u32,
    pub b_finer: bool,
}

impl LeafPair {
    /// `(mesh, triangle)` selector for the overlap element.
    #[inline]
    pub fn fine<'m>(&self, a: &'m Mesh, b: &'m Mesh) -> (&'m Mesh, usize) {
        if self.b_finer {
            (b, self.b as usize)
        } else {
            (a, self.a as usize)
        }
    }
}

/// Element pairs of the coarsest common refinement, in preorder.
///
/// Both meshes must descend from the same initial mesh; the merge walks the
/// two preorder leaf sequences in lockstep.
pub fn leaf_pairs(a: &Mesh, b: &Mesh) -> Result<Vec<LeafPair>> {
    if a.family() != b.family() {
        return Err(Error::Structure("meshes do not share an initial mesh".into()));
    }
    let (oa, ob) = (a.leaf_order(), b.leaf_order());
    let (ka, kb) = (a.keys(), b.keys());
    let mut out = Vec::with_capacity(oa.len().max(ob.len()));
    let (mut i, mut j) = (0, 0);
    while i < oa.len() && j < ob.len() {
        let (ta, tb) = (oa[i], ob[j]);
        let (x, y) = (ka[ta as usize], kb[tb as usize]);
        if x == y {
            out.push(LeafPair { a: ta, b: tb, b_finer: true });
            i += 1;
            j += 1;
        } else if x.contains(&y) {
            out.push(LeafPair { a: ta, b: tb, b_finer: true });
            j += 1;
            if j == ob.len() || !x.contains(&kb[ob[j] as usize]) {
                i += 1;
            }
        } else if y.contains(&x) {
            out.push(LeafPair { a: ta, b: tb, b_finer: false });
            i += 1;
            if i == oa.len() || !y.contains(&ka[oa[i] as usize]) {
                j += 1;
            }
        } else {
            return Err(Error::Structure(format!("elements {x:?} and {y:?} are not nested")));
        }
    }
    if i < oa.len() || j < ob.len() {
        return Err(Error::Structure("meshes do not cover the same initial mesh".into()));
    }
    Ok(out)
}

/// Coarsest mesh refining both `a` and `b`, with the prolongation matrices
/// (overlay dofs × input dofs) that interpolate each input's P1 functions.
pub fn common_refinement(a: &Mesh, b: &Mesh) -> Result<(Mesh, CsMat<f64>, CsMat<f64>)> {
    let pairs = leaf_pairs(a, b)?;
    let mut ids: HashMap<[u64; 2], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(pairs.len());
    let mut keys = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let (m, t) = p.fine(a, b);
        let mut tri = [0u32; 3];
        for (k, &v) in m.triangles()[t].iter().enumerate() {
            let x = m.vertices()[v as usize];
            // vertices of one family are generated by identical midpoint arithmetic
            tri[k] = *ids.entry([x[0].to_bits(), x[1].to_bits()]).or_insert_with(|| {
                vertices.push(x);
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
        keys.push(m.keys()[t]);
    }
    let overlay = Mesh::from_parts(vertices, triangles, keys, a.family())?;
    let pa = interpolation(&overlay, a, |k| pairs[k].a as usize)?;
    let pb = interpolation(&overlay, b, |k| pairs[k].b as usize)?;
    Ok((overlay, pa, pb))
}

/// Prolongation `fine dofs × coarse dofs` for nested meshes.
pub fn prolongation(coarse: &Mesh, fine: &Mesh) -> Result<CsMat<f64>> {
    let pairs = leaf_pairs(coarse, fine)?;
    if pairs.iter().any(|p| !p.b_finer) {
        return Err(Error::Structure("target mesh does not refine the source mesh".into()));
    }
    let mut lookup = vec![0usize; fine.n_triangles()];
    for p in &pairs {
        lookup[p.b as usize] = p.a as usize;
    }
    interpolation(fine, coarse, |t| lookup[t])
}

/// Nodal interpolation of `coarse` hat functions on `fine`, where
/// `parent(t)` is the coarse triangle containing fine triangle `t`.
fn interpolation(fine: &Mesh, coarse: &Mesh, parent: impl Fn(usize) -> usize) -> Result<CsMat<f64>> {
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for t in 0..fine.n_triangles() {
        let c = parent(t);
        let bary = coarse.barycentric(c);
        let ctri = coarse.triangles()[c];
        for &v in &fine.triangles()[t] {
            let Some(row) = fine.dof(v as usize) else { continue };
            let l = bary.eval(fine.vertices()[v as usize]);
            for i in 0..3 {
                let Some(col) = coarse.dof(ctri[i] as usize) else { continue };
                // snap roundoff so that nested vertices give exact 0/1 weights
                let w = snap(l[i]);
                if w != 0.0 {
                    entries.push((row, col, w));
                }
            }
        }
    }
    entries.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    entries.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
    let mut tri = TriMat::with_capacity((fine.n_dofs(), coarse.n_dofs()), entries.len());
    for (r, c, w) in entries {
        tri.add_triplet(r, c, w);
    }
    Ok(tri.to_csr())
}

#[inline]
fn snap(x: f64) -> f64 {
    let r = (x * 1024.0).round() / 1024.0;
    if (x - r).abs() < 1e-12 {
        r
    } else {
        x
    }
}
