//! P1 assembly on single meshes and on pairs of meshes of one NVB family.
//!
//! The finite element space of a mesh is the span of the hat functions of its
//! interior vertices (homogeneous Dirichlet data); `Mesh::dof` numbers them.
//! Cross-mesh operators integrate over the elements of the common refinement,
//! on which both hat bases are affine.

mod weight;

use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::geometry::{clip_convex, fan, signed_area, Barycentric, Point};
use crate::mesh::{leaf_pairs, ElemKey, Mesh};
use crate::problem::CoefficientField;

pub use weight::{Moments, Weight};

/// Geometry of one overlay element as seen from both meshes.
pub struct PairGeom {
    pub row: Barycentric,
    pub col: Barycentric,
    pub pts: [Point; 3],
    pub key: ElemKey,
}

/// Assembles `row dofs × col dofs` from local 3×3 contributions on the
/// elements of the common refinement.
pub fn assemble_pairs(
    row: &Mesh,
    col: &Mesh,
    local: impl Fn(&PairGeom) -> Option<[[f64; 3]; 3]>,
) -> Result<CsMat<f64>> {
    let pairs = leaf_pairs(row, col)?;
    let mut tri = TriMat::with_capacity((row.n_dofs(), col.n_dofs()), 9 * pairs.len());
    for p in &pairs {
        let (fm, ft) = p.fine(row, col);
        let g = PairGeom {
            row: row.barycentric(p.a as usize),
            col: col.barycentric(p.b as usize),
            pts: fm.points(ft),
            key: fm.keys()[ft],
        };
        let Some(k) = local(&g) else { continue };
        let rt = row.triangles()[p.a as usize];
        let ct = col.triangles()[p.b as usize];
        for i in 0..3 {
            let Some(r) = row.dof(rt[i] as usize) else { continue };
            for j in 0..3 {
                let Some(c) = col.dof(ct[j] as usize) else { continue };
                if k[i][j] != 0.0 {
                    tri.add_triplet(r, c, k[i][j]);
                }
            }
        }
    }
    Ok(tri.to_csr())
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `∫ aₘ ∇φᵢ·∇φⱼ` on one mesh (`m = 0` is the mean field `a₀ ≡ 1`).
pub fn stiffness(mesh: &Mesh, coeff: &CoefficientField, m: usize) -> Result<CsMat<f64>> {
    cross_stiffness(mesh, mesh, coeff, m)
}

/// `∫ aₘ ∇φᵢ^row·∇φⱼ^col` for two meshes of one family.
pub fn cross_stiffness(row: &Mesh, col: &Mesh, coeff: &CoefficientField, m: usize) -> Result<CsMat<f64>> {
    assemble_pairs(row, col, |g| {
        let c = coeff.integrate(m, &g.pts);
        if c == 0.0 {
            return None;
        }
        Some(std::array::from_fn(|i| {
            std::array::from_fn(|j| c * dot(g.row.grad[i], g.col.grad[j]))
        }))
    })
}

/// `cross_stiffness` computed as `P_rowᵀ K P_col` on the conforming overlay.
pub fn cross_stiffness_via_overlay(
    row: &Mesh,
    col: &Mesh,
    coeff: &CoefficientField,
    m: usize,
) -> Result<CsMat<f64>> {
    let (overlay, pr, pc) = crate::mesh::common_refinement(row, col)?;
    let k = stiffness(&overlay, coeff, m)?;
    let prt = pr.transpose_view().to_csr();
    Ok(&(&prt * &k) * &pc)
}

/// `∫ w φᵢ^row φⱼ^col`.
pub fn weighted_mass(row: &Mesh, col: &Mesh, weight: &Weight) -> Result<CsMat<f64>> {
    assemble_pairs(row, col, |g| {
        let mo = weight.moments(&g.pts, g.key)?;
        Some(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                mo.integrate_product((g.row.offset[i], g.row.grad[i]), (g.col.offset[j], g.col.grad[j]))
            })
        }))
    })
}

/// `∫ w (φᵢ^row ∂φⱼ^col + φⱼ^col ∂φᵢ^row)` with `∂ = ∂₁ + ∂₂`; the
/// symmetrized convection form, so `∫ w v ∂v = ½ vᵀ D v`.
pub fn convection_form(row: &Mesh, col: &Mesh, weight: &Weight) -> Result<CsMat<f64>> {
    assemble_pairs(row, col, |g| {
        let mo = weight.moments(&g.pts, g.key)?;
        let ir: [f64; 3] = std::array::from_fn(|i| mo.integrate(g.row.offset[i], g.row.grad[i]));
        let ic: [f64; 3] = std::array::from_fn(|j| mo.integrate(g.col.offset[j], g.col.grad[j]));
        let dr: [f64; 3] = std::array::from_fn(|i| g.row.grad[i][0] + g.row.grad[i][1]);
        let dc: [f64; 3] = std::array::from_fn(|j| g.col.grad[j][0] + g.col.grad[j][1]);
        Some(std::array::from_fn(|i| std::array::from_fn(|j| ir[i] * dc[j] + ic[j] * dr[i])))
    })
}

fn restrict(mesh: &Mesh, full: Vec<f64>) -> Vec<f64> {
    mesh.dof_vertices().into_iter().map(|v| full[v]).collect()
}

/// `∫ φᵢ dx` for every vertex, boundary vertices included.
pub fn load_constant_one_vertices(mesh: &Mesh) -> Vec<f64> {
    let mut f = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.area(t) / 3.0;
        for &v in tri {
            f[v as usize] += a;
        }
    }
    f
}

/// `∫ φᵢ dx` over interior dofs.
pub fn load_constant_one(mesh: &Mesh) -> Vec<f64> {
    restrict(mesh, load_constant_one_vertices(mesh))
}

/// `-∫_{region} ∂φᵢ/∂x₁ dx` over interior dofs; `region` is a convex
/// counter-clockwise triangle.
pub fn load_directional(mesh: &Mesh, region: &[Point; 3]) -> Vec<f64> {
    let mut f = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.points(t);
        let clipped = clip_convex(&pts, region);
        if clipped.is_empty() {
            continue;
        }
        let area: f64 = fan(&clipped).map(|s| signed_area(s[0], s[1], s[2])).sum();
        let b = mesh.barycentric(t);
        for i in 0..3 {
            f[tri[i] as usize] -= b.grad[i][0] * area;
        }
    }
    restrict(mesh, f)
}

/// `∫ w φᵢ dx` for every vertex, boundary vertices included.
pub fn weighted_load_vertices(mesh: &Mesh, weight: &Weight) -> Vec<f64> {
    let mut f = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let Some(mo) = weight.moments(&mesh.points(t), mesh.keys()[t]) else { continue };
        let b = mesh.barycentric(t);
        for i in 0..3 {
            f[tri[i] as usize] += mo.integrate(b.offset[i], b.grad[i]);
        }
    }
    f
}

/// `∫ w φᵢ dx` over interior dofs.
pub fn weighted_load(mesh: &Mesh, weight: &Weight) -> Vec<f64> {
    restrict(mesh, weighted_load_vertices(mesh, weight))
}

/// `ℓ_w(v) = ∫ w v dx` for `v` given by its interior-dof coefficients.
pub fn functional_lw(mesh: &Mesh, weight: &Weight, coeffs: &[f64]) -> Result<f64> {
    if coeffs.len() != mesh.n_dofs() {
        return Err(Error::Dimension { expected: mesh.n_dofs(), got: coeffs.len() });
    }
    Ok(weighted_load(mesh, weight).iter().zip(coeffs).map(|(a, b)| a * b).sum())
}

/// `y += s A x` for a CSR matrix.
pub fn mul_add(a: &CsMat<f64>, s: f64, x: &[f64], y: &mut [f64]) {
    for (r, row) in a.outer_iterator().enumerate() {
        let acc: f64 = row.iter().map(|(c, &v)| v * x[c]).sum();
        y[r] += s * acc;
    }
}

/// `y += s Aᵀ x` for a CSR matrix.
pub fn mul_add_transpose(a: &CsMat<f64>, s: f64, x: &[f64], y: &mut [f64]) {
    for (r, row) in a.outer_iterator().enumerate() {
        let xr = s * x[r];
        if xr == 0.0 {
            continue;
        }
        for (c, &v) in row.iter() {
            y[c] += v * xr;
        }
    }
}
