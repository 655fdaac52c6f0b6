//! Quantities of interest and their Gâteaux derivatives.
//!
//! All four goals are quadratic in `u`. Orthonormality of the Legendre basis
//! collapses the parameter integral into a sum over the blocks of `u`.

use crate::error::Result;
use crate::fem::mul_add;
use crate::mesh::Mesh;
use crate::mlspace::{Assembler, MlFunction};
use crate::param::MultiIndex;
use crate::problem::GoalKind;

const MOMENT_SCALE: f64 = 100.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad(a: &sprs::CsMat<f64>, u: &[f64]) -> f64 {
    let mut au = vec![0.0; u.len()];
    mul_add(a, 1.0, u, &mut au);
    dot(u, &au)
}

/// `g(u)`
pub fn value(asm: &Assembler, kind: GoalKind, u: &MlFunction) -> Result<f64> {
    let s = u.structure();
    let mut total = 0.0;
    for (i, nu) in s.indices().iter().enumerate() {
        let mesh = &s.meshes()[i];
        let b = &u.blocks()[i];
        total += match kind {
            GoalKind::WeightedL2Sq => quad(&*asm.mass(mesh, mesh)?, b),
            GoalKind::Convection => 0.5 * quad(&*asm.convection(mesh, mesh)?, b),
            GoalKind::SecondMoment => MOMENT_SCALE * dot(&asm.weighted_load(mesh), b).powi(2),
            GoalKind::Variance if nu.is_zero() => 0.0,
            GoalKind::Variance => MOMENT_SCALE * dot(&asm.weighted_load(mesh), b).powi(2),
        };
    }
    Ok(total)
}

/// `⟨g'(u), φᵢ P_ν⟩` for the interior hat functions of `target`; `None` when
/// the whole block vanishes.
pub fn derivative_load(
    asm: &Assembler,
    kind: GoalKind,
    u: &MlFunction,
    nu: &MultiIndex,
    target: &Mesh,
) -> Result<Option<Vec<f64>>> {
    let Some(b) = u.block(nu) else { return Ok(None) };
    let mesh = u.structure().mesh(nu);
    let mut out = vec![0.0; target.n_dofs()];
    match kind {
        GoalKind::WeightedL2Sq => mul_add(&*asm.mass(target, mesh)?, 2.0, b, &mut out),
        GoalKind::Convection => mul_add(&*asm.convection(target, mesh)?, 1.0, b, &mut out),
        GoalKind::Variance if nu.is_zero() => return Ok(None),
        GoalKind::SecondMoment | GoalKind::Variance => {
            let l = dot(&asm.weighted_load(mesh), b);
            let s = 2.0 * MOMENT_SCALE * l;
            for (o, w) in out.iter_mut().zip(asm.weighted_load(target).iter()) {
                *o = s * w;
            }
        }
    }
    Ok(Some(out))
}

/// Load blocks of the discrete dual problem on the structure of `u`.
pub fn dual_rhs(asm: &Assembler, kind: GoalKind, u: &MlFunction) -> Result<Vec<Vec<f64>>> {
    dual_rhs_on(asm, kind, u, u.structure())
}

/// Load blocks `⟨g'(u), φᵢ P_ν⟩` on every block of `target`.
pub fn dual_rhs_on(
    asm: &Assembler,
    kind: GoalKind,
    u: &MlFunction,
    target: &crate::mlspace::MlStructure,
) -> Result<Vec<Vec<f64>>> {
    target
        .indices()
        .iter()
        .zip(target.meshes())
        .map(|(nu, m)| Ok(derivative_load(asm, kind, u, nu, m)?.unwrap_or_else(|| vec![0.0; m.n_dofs()])))
        .collect()
}

/// `⟨g'(u), v⟩`
pub fn derivative_apply(asm: &Assembler, kind: GoalKind, u: &MlFunction, v: &MlFunction) -> Result<f64> {
    let s = v.structure();
    let mut total = 0.0;
    for (i, nu) in s.indices().iter().enumerate() {
        if let Some(d) = derivative_load(asm, kind, u, nu, &s.meshes()[i])? {
            total += dot(&d, &v.blocks()[i]);
        }
    }
    Ok(total)
}
