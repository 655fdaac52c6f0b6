//! Two-level spatial and hierarchical parametric error indicators.

use rayon::prelude::*;

use crate::error::Result;
use crate::goals;
use crate::mesh::{new_interior_vertices, Mesh, NewVertex};
use crate::mlspace::{apply_to_target, Assembler, MlFunction, MlStructure};
use crate::param::MultiIndex;
use crate::problem::GoalKind;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    /// `F(v) - B(w, v)`
    Primal,
    /// `⟨g'(u), v⟩ - B(v, w)` with the derivative taken at `u`.
    Dual(GoalKind),
    /// `-B(w, v)`
    OperatorOnly,
}

/// Residual functional `v ↦ b(v) - B(w, v)`, evaluated on test functions
/// `φᵢ P_ν` of arbitrary meshes of the family.
pub struct Residual<'a> {
    asm: &'a Assembler,
    w: &'a MlFunction,
    u: Option<&'a MlFunction>,
    source: Source,
    scale: f64,
}

impl<'a> Residual<'a> {
    /// `F(v) - B(u, v)`
    pub fn primal(asm: &'a Assembler, u: &'a MlFunction) -> Self {
        Residual { asm, w: u, u: None, source: Source::Primal, scale: 1.0 }
    }

    /// `⟨g'(u), v⟩ - B(v, z)`
    pub fn dual(asm: &'a Assembler, kind: GoalKind, u: &'a MlFunction, z: &'a MlFunction) -> Self {
        Residual { asm, w: z, u: Some(u), source: Source::Dual(kind), scale: 1.0 }
    }

    /// `-B(w, v)`
    pub fn operator_only(asm: &'a Assembler, w: &'a MlFunction) -> Self {
        Residual { asm, w, u: None, source: Source::OperatorOnly, scale: 1.0 }
    }

    /// The residual multiplied by `s`.
    pub fn scaled(mut self, s: f64) -> Self {
        self.scale *= s;
        self
    }

    pub fn function(&self) -> &MlFunction {
        self.w
    }

    /// Values on `φᵢ P_ν` for the interior hat functions of `target`.
    pub fn eval(&self, nu: &MultiIndex, target: &Mesh) -> Result<Vec<f64>> {
        let load = match self.source {
            Source::Primal if nu.is_zero() => Some(self.asm.rhs_load(target).to_vec()),
            Source::Dual(kind) => goals::derivative_load(self.asm, kind, self.u.unwrap(), nu, target)?,
            _ => None,
        };
        let bw = apply_to_target(self.asm, self.w, nu, target)?;
        let mut r = load.unwrap_or_else(|| vec![0.0; target.n_dofs()]);
        for (a, b) in r.iter_mut().zip(&bw) {
            *a = self.scale * (*a - b);
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialIndicator {
    pub index: MultiIndex,
    pub vertex: NewVertex,
    pub value: f64,
}

/// Error indicators of one residual. Spatial entries follow the index order
/// of `P` and, within an index, the edge order of its mesh; parametric entries
/// follow the graded order of the detail set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndicatorBundle {
    pub spatial: Vec<SpatialIndicator>,
    pub parametric: Vec<(MultiIndex, f64)>,
    pub total: f64,
}

impl IndicatorBundle {
    pub fn from_parts(spatial: Vec<SpatialIndicator>, parametric: Vec<(MultiIndex, f64)>) -> Self {
        let total = (spatial.iter().map(|s| s.value * s.value).sum::<f64>()
            + parametric.iter().map(|p| p.1 * p.1).sum::<f64>())
        .sqrt();
        IndicatorBundle { spatial, parametric, total }
    }

    /// Squared indicators, spatial entries first.
    pub fn squared(&self) -> Vec<f64> {
        self.spatial
            .iter()
            .map(|s| s.value * s.value)
            .chain(self.parametric.iter().map(|p| p.1 * p.1))
            .collect()
    }
}

/// `|r(φ̂_ξ P_ν)| / ‖φ̂_ξ‖` for every `ξ ∈ N⁺(T_ν)`.
pub fn spatial_indicators(res: &Residual, s: &MlStructure, nu: &MultiIndex) -> Result<Vec<SpatialIndicator>> {
    let mesh = s.mesh(nu);
    let fine = res.asm.refined(mesh)?;
    let r = res.eval(nu, &fine)?;
    let k = res.asm.stiffness(&fine, &fine, 0)?;
    Ok(new_interior_vertices(mesh)
        .into_iter()
        .map(|v| {
            let d = fine.dof(v.fine as usize).expect("new interior vertex is a dof");
            let norm = k.get(d, d).copied().unwrap_or(0.0).sqrt();
            SpatialIndicator { index: nu.clone(), vertex: v, value: r[d].abs() / norm }
        })
        .collect())
}

/// `‖e‖` where `⟨e, v₀⟩ = r(v₀ P_ν)` for all `v₀` on the initial mesh.
pub fn parametric_indicator(res: &Residual, nu: &MultiIndex) -> Result<f64> {
    let t0 = res.asm.t0();
    let r = res.eval(nu, t0)?;
    let mut e = r.clone();
    res.asm.factor(t0)?.solve_in_place(&mut e);
    Ok(r.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
}

/// All spatial indicators on `P` and parametric indicators on `Q`.
pub fn estimate(res: &Residual, s: &MlStructure) -> Result<IndicatorBundle> {
    let spatial = s
        .indices()
        .as_slice()
        .par_iter()
        .map(|nu| spatial_indicators(res, s, nu))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let parametric = s
        .detail_set()
        .into_par_iter()
        .map(|nu| Ok((nu.clone(), parametric_indicator(res, &nu)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndicatorBundle::from_parts(spatial, parametric))
}
