//! Multilevel structures, multilevel functions and the block Galerkin
//! operator of the parametric bilinear form.
//!
//! A structure pairs an index set `P` with one mesh per index; indices outside
//! `P` implicitly carry the initial mesh. A function on the structure has one
//! coefficient block per index over the interior dofs of its mesh.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use sprs::CsMat;

use crate::error::{Error, Result};
use crate::fem::{self, mul_add, mul_add_transpose, Weight};
use crate::mesh::{initial_mesh, prolongation, refine_nvb, uniform_refine, Mesh};
use crate::param::{coupling_weight, Coupling, IndexSet, MultiIndex};
use crate::problem::{CoefficientField, ProblemSpec, RhsSpec};
use crate::solver::{self, Cholesky, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Stiff(u32),
    Mass,
    Convection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Load {
    Rhs,
    Weight,
}

/// Problem data plus caches of assembled operators, load vectors, uniform
/// refinements and diagonal-block factorizations, keyed by mesh identity.
pub struct Assembler {
    spec: ProblemSpec,
    t0: Arc<Mesh>,
    weight: Weight,
    matrices: Mutex<HashMap<(u64, u64, Op), Arc<CsMat<f64>>>>,
    loads: Mutex<HashMap<(u64, Load), Arc<Vec<f64>>>>,
    refined: Mutex<HashMap<u64, Arc<Mesh>>>,
    factors: Mutex<HashMap<u64, Arc<Cholesky>>>,
    factor_hits: AtomicUsize,
}

impl std::fmt::Debug for Assembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assembler").field("setup", &self.spec.setup).finish_non_exhaustive()
    }
}

impl Assembler {
    /// Builds the initial mesh of `spec` and prepares its goal weight.
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let t0 = initial_mesh(spec.domain, spec.initial_triangles)?;
        Self::with_mesh(spec, t0)
    }

    /// Uses `t0` as the initial mesh instead of the one named by `spec`.
    pub fn with_mesh(spec: ProblemSpec, t0: Mesh) -> Result<Self> {
        let weight = Weight::new(&spec.weight, &t0)?;
        Ok(Assembler {
            spec,
            t0: Arc::new(t0),
            weight,
            matrices: Mutex::default(),
            loads: Mutex::default(),
            refined: Mutex::default(),
            factors: Mutex::default(),
            factor_hits: AtomicUsize::new(0),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn t0(&self) -> &Arc<Mesh> {
        &self.t0
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.spec.coefficient
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    fn matrix(
        &self,
        row: &Mesh,
        col: &Mesh,
        op: Op,
        build: impl FnOnce() -> Result<CsMat<f64>>,
    ) -> Result<Arc<CsMat<f64>>> {
        let key = (row.uid(), col.uid(), op);
        if let Some(m) = self.matrices.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(build()?);
        self.matrices.lock().unwrap().insert(key, m.clone());
        Ok(m)
    }

    /// `∫ aₘ ∇φᵢ^row·∇φⱼ^col`
    pub fn stiffness(&self, row: &Mesh, col: &Mesh, m: u32) -> Result<Arc<CsMat<f64>>> {
        self.matrix(row, col, Op::Stiff(m), || {
            fem::cross_stiffness(row, col, &self.spec.coefficient, m as usize)
        })
    }

    /// `∫ w φᵢ^row φⱼ^col`
    pub fn mass(&self, row: &Mesh, col: &Mesh) -> Result<Arc<CsMat<f64>>> {
        self.matrix(row, col, Op::Mass, || fem::weighted_mass(row, col, &self.weight))
    }

    /// Symmetrized weighted convection form, see [`fem::convection_form`].
    pub fn convection(&self, row: &Mesh, col: &Mesh) -> Result<Arc<CsMat<f64>>> {
        self.matrix(row, col, Op::Convection, || fem::convection_form(row, col, &self.weight))
    }

    fn load(&self, mesh: &Mesh, kind: Load, build: impl FnOnce() -> Vec<f64>) -> Arc<Vec<f64>> {
        let key = (mesh.uid(), kind);
        if let Some(v) = self.loads.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v = Arc::new(build());
        self.loads.lock().unwrap().insert(key, v.clone());
        v
    }

    /// Deterministic right-hand side `F(φᵢ)`.
    pub fn rhs_load(&self, mesh: &Mesh) -> Arc<Vec<f64>> {
        self.load(mesh, Load::Rhs, || match &self.spec.rhs {
            RhsSpec::ConstantOne => fem::load_constant_one(mesh),
            RhsSpec::Directional { region } => fem::load_directional(mesh, region),
        })
    }

    /// `ℓ_w(φᵢ) = ∫ w φᵢ`.
    pub fn weighted_load(&self, mesh: &Mesh) -> Arc<Vec<f64>> {
        self.load(mesh, Load::Weight, || fem::weighted_load(mesh, &self.weight))
    }

    /// Cached uniform refinement of `mesh`.
    pub fn refined(&self, mesh: &Mesh) -> Result<Arc<Mesh>> {
        if let Some(m) = self.refined.lock().unwrap().get(&mesh.uid()) {
            return Ok(m.clone());
        }
        let m = Arc::new(uniform_refine(mesh)?);
        self.refined.lock().unwrap().insert(mesh.uid(), m.clone());
        Ok(m)
    }

    /// Cached Cholesky factorization of the mean stiffness on `mesh`.
    pub fn factor(&self, mesh: &Mesh) -> Result<Arc<Cholesky>> {
        if let Some(c) = self.factors.lock().unwrap().get(&mesh.uid()) {
            self.factor_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(c.clone());
        }
        let k = self.stiffness(mesh, mesh, 0)?;
        let c = Arc::new(Cholesky::new(&k)?);
        self.factors.lock().unwrap().insert(mesh.uid(), c.clone());
        Ok(c)
    }

    /// Number of factorizations served from the cache so far.
    pub fn factor_hits(&self) -> usize {
        self.factor_hits.load(Ordering::Relaxed)
    }

    /// Drops every cached object that involves a mesh outside `live`.
    pub fn retain(&self, live: &HashSet<u64>) {
        self.matrices
            .lock()
            .unwrap()
            .retain(|k, _| live.contains(&k.0) && live.contains(&k.1));
        self.loads.lock().unwrap().retain(|k, _| live.contains(&k.0));
        self.refined.lock().unwrap().retain(|k, _| live.contains(k));
        self.factors.lock().unwrap().retain(|k, _| live.contains(k));
    }
}

/// Pair `[P, (T_ν)_{ν∈P}]`.
#[derive(Debug, Clone)]
pub struct MlStructure {
    t0: Arc<Mesh>,
    indices: IndexSet,
    meshes: Vec<Arc<Mesh>>,
}

impl PartialEq for MlStructure {
    fn eq(&self, other: &Self) -> bool {
        self.t0.uid() == other.t0.uid()
            && self.indices == other.indices
            && self.meshes.iter().zip(&other.meshes).all(|(a, b)| a.uid() == b.uid() && a == b)
    }
}

impl MlStructure {
    /// `[{0}, (T₀)]`
    pub fn new(t0: Arc<Mesh>) -> Self {
        MlStructure { meshes: vec![t0.clone()], t0, indices: IndexSet::new() }
    }

    /// `meshes[i]` belongs to the `i`-th index of `indices` in graded order.
    pub fn from_parts(t0: Arc<Mesh>, indices: IndexSet, meshes: Vec<Arc<Mesh>>) -> Result<Self> {
        if meshes.len() != indices.len() {
            return Err(Error::Dimension { expected: indices.len(), got: meshes.len() });
        }
        if meshes.iter().any(|m| m.family() != t0.family()) {
            return Err(Error::Structure("mesh does not descend from the initial mesh".into()));
        }
        Ok(MlStructure { t0, indices, meshes })
    }

    pub fn t0(&self) -> &Arc<Mesh> {
        &self.t0
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn meshes(&self) -> &[Arc<Mesh>] {
        &self.meshes
    }

    /// `T_ν`, the initial mesh for indices outside `P`.
    pub fn mesh(&self, nu: &MultiIndex) -> &Arc<Mesh> {
        match self.indices.position(nu) {
            Some(i) => &self.meshes[i],
            None => &self.t0,
        }
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.meshes.iter().map(|m| m.n_dofs()).collect()
    }

    /// `dim V = Σ_ν dim X_ν`
    pub fn dim(&self) -> usize {
        self.meshes.iter().map(|m| m.n_dofs()).sum()
    }

    /// Start of every block in the flat layout, plus the total dimension.
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.meshes.len() + 1);
        let mut s = 0;
        o.push(0);
        for m in &self.meshes {
            s += m.n_dofs();
            o.push(s);
        }
        o
    }

    pub fn detail_set(&self) -> Vec<MultiIndex> {
        self.indices.detail_set()
    }

    /// Enriched structure `[P ∪ Q, (uniform_refine(T_ν))_{ν∈P}, T₀ on Q]`.
    pub fn enriched(&self) -> Result<MlStructure> {
        let q = self.detail_set();
        let indices = self.indices.union(&q);
        let mut meshes = Vec::with_capacity(indices.len());
        for nu in indices.iter() {
            meshes.push(match self.indices.position(nu) {
                Some(i) => Arc::new(uniform_refine(&self.meshes[i])?),
                None => self.t0.clone(),
            });
        }
        MlStructure::from_parts(self.t0.clone(), indices, meshes)
    }

    /// One step of multilevel refinement.
    pub fn refine(&self, marks: &Marks) -> Result<MlStructure> {
        if !marks.indices.is_empty() {
            let q = self.detail_set();
            if let Some(bad) = marks.indices.iter().find(|nu| !q.contains(nu)) {
                return Err(Error::Precondition(format!("marked index {bad} is not in the detail set")));
            }
        }
        if let Some(bad) = marks.vertices.keys().find(|nu| !self.indices.contains(nu)) {
            return Err(Error::Precondition(format!("vertices marked for inactive index {bad}")));
        }
        let indices = self.indices.union(&marks.indices);
        let mut meshes = Vec::with_capacity(indices.len());
        for nu in indices.iter() {
            meshes.push(match self.indices.position(nu) {
                Some(i) => match marks.vertices.get(nu) {
                    Some(edges) if !edges.is_empty() => Arc::new(refine_nvb(&self.meshes[i], edges)?),
                    _ => self.meshes[i].clone(),
                },
                None => self.t0.clone(),
            });
        }
        MlStructure::from_parts(self.t0.clone(), indices, meshes)
    }

    /// Mesh identities used by this structure.
    pub fn uids(&self) -> impl Iterator<Item = u64> + '_ {
        std::iter::once(self.t0.uid()).chain(self.meshes.iter().map(|m| m.uid()))
    }
}

/// Marked indices `M ⊆ Q` and marked new vertices per active index, each
/// vertex named by the coarse edge it bisects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Marks {
    pub indices: Vec<MultiIndex>,
    pub vertices: BTreeMap<MultiIndex, Vec<[u32; 2]>>,
}

impl Marks {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty() && self.vertices.values().all(|v| v.is_empty())
    }

    pub fn len(&self) -> usize {
        self.indices.len() + self.vertices.values().map(|v| v.len()).sum::<usize>()
    }
}

/// Function `Σ_ν v_ν P_ν` in a multilevel space.
#[derive(Debug, Clone)]
pub struct MlFunction {
    structure: Arc<MlStructure>,
    blocks: Vec<Vec<f64>>,
}

impl MlFunction {
    pub fn zeros(structure: Arc<MlStructure>) -> Self {
        let blocks = structure.block_dims().into_iter().map(|n| vec![0.0; n]).collect();
        MlFunction { structure, blocks }
    }

    pub fn from_blocks(structure: Arc<MlStructure>, blocks: Vec<Vec<f64>>) -> Result<Self> {
        let dims = structure.block_dims();
        if blocks.len() != dims.len() {
            return Err(Error::Dimension { expected: dims.len(), got: blocks.len() });
        }
        for (b, &n) in blocks.iter().zip(&dims) {
            if b.len() != n {
                return Err(Error::Dimension { expected: n, got: b.len() });
            }
        }
        Ok(MlFunction { structure, blocks })
    }

    pub fn from_flat(structure: Arc<MlStructure>, x: &[f64]) -> Result<Self> {
        let o = structure.offsets();
        if x.len() != o[o.len() - 1] {
            return Err(Error::Dimension { expected: o[o.len() - 1], got: x.len() });
        }
        let blocks = o.windows(2).map(|w| x[w[0]..w[1]].to_vec()).collect();
        Ok(MlFunction { structure, blocks })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks.concat()
    }

    pub fn structure(&self) -> &Arc<MlStructure> {
        &self.structure
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    /// Coefficients of `v_ν`, `None` for `ν ∉ P`.
    pub fn block(&self, nu: &MultiIndex) -> Option<&[f64]> {
        self.structure.indices.position(nu).map(|i| self.blocks[i].as_slice())
    }

    /// `self + s·other` on the same structure.
    pub fn add_scaled(&self, s: f64, other: &MlFunction) -> Result<MlFunction> {
        if *self.structure != *other.structure {
            return Err(Error::Structure("functions live on different structures".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            .collect();
        Ok(MlFunction { structure: self.structure.clone(), blocks })
    }

    /// The same function expressed in the finer space of `target`.
    pub fn embed(&self, target: &Arc<MlStructure>) -> Result<MlFunction> {
        if let Some(nu) = self.structure.indices.iter().find(|nu| !target.indices.contains(nu)) {
            return Err(Error::Structure(format!("target structure lacks index {nu}")));
        }
        let mut blocks = Vec::with_capacity(target.meshes.len());
        for (nu, mesh) in target.indices.iter().zip(&target.meshes) {
            let Some(i) = self.structure.indices.position(nu) else {
                blocks.push(vec![0.0; mesh.n_dofs()]);
                continue;
            };
            let src = &self.structure.meshes[i];
            if src.uid() == mesh.uid() {
                blocks.push(self.blocks[i].clone());
                continue;
            }
            let p = prolongation(src, mesh)?;
            let mut b = vec![0.0; mesh.n_dofs()];
            mul_add(&p, 1.0, &self.blocks[i], &mut b);
            blocks.push(b);
        }
        Ok(MlFunction { structure: target.clone(), blocks })
    }
}

/// Galerkin matrix of `B` on a multilevel space: mean-field stiffness on the
/// diagonal and `c · K_m(T_ν, T_μ)` for every coupled pair `ν < μ` in `P`.
pub struct BlockOperator {
    offsets: Vec<usize>,
    diag: Vec<Arc<CsMat<f64>>>,
    couplings: Vec<(usize, usize, f64, Arc<CsMat<f64>>)>,
}

impl std::fmt::Debug for BlockOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockOperator")
            .field("dim", &self.dim())
            .field("blocks", &self.diag.len())
            .field("couplings", &self.couplings.len())
            .finish()
    }
}

impl BlockOperator {
    pub fn build(asm: &Assembler, s: &MlStructure) -> Result<Self> {
        let p = s.indices.as_slice();
        let mut pairs = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if let Coupling::Mode { m, weight } = coupling_weight(&p[i], &p[j]) {
                    pairs.push((i, j, m, weight));
                }
            }
        }
        let diag = s
            .meshes
            .par_iter()
            .map(|m| asm.stiffness(m, m, 0))
            .collect::<Result<Vec<_>>>()?;
        let couplings = pairs
            .into_par_iter()
            .map(|(i, j, m, w)| Ok((i, j, w, asm.stiffness(&s.meshes[i], &s.meshes[j], m)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockOperator { offsets: s.offsets(), diag, couplings })
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    /// Number of stored off-diagonal block pairs.
    pub fn n_couplings(&self) -> usize {
        self.couplings.len()
    }

    /// Block pairs `(ν, μ)` with a stored coupling, as positions in `P`.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize)> {
        self.couplings.iter().map(|c| (c.0, c.1)).collect()
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// `y = B x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_mean(x, y);
        for (i, j, w, k) in &self.couplings {
            let (ri, rj) = (self.range(*i), self.range(*j));
            mul_add(k, *w, &x[rj.clone()], &mut y[ri.clone()]);
            mul_add_transpose(k, *w, &x[ri], &mut y[rj]);
        }
    }

    /// `y = B₀ x`, the block-diagonal mean-field part.
    pub fn apply_mean(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, k) in self.diag.iter().enumerate() {
            let r = self.range(i);
            mul_add(k, 1.0, &x[r.clone()], &mut y[r]);
        }
    }

    /// `xᵀ B y`
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut by = vec![0.0; y.len()];
        self.apply(y, &mut by);
        x.iter().zip(&by).map(|(a, b)| a * b).sum()
    }
}

/// Block system of one multilevel space with its preconditioner factors.
pub struct GalerkinSystem {
    structure: Arc<MlStructure>,
    op: BlockOperator,
    factors: Vec<Arc<Cholesky>>,
    cache_hits: usize,
}

impl GalerkinSystem {
    pub fn new(asm: &Assembler, structure: Arc<MlStructure>) -> Result<Self> {
        let op = BlockOperator::build(asm, &structure)?;
        let before = asm.factor_hits();
        let factors = structure.meshes.iter().map(|m| asm.factor(m)).collect::<Result<Vec<_>>>()?;
        let cache_hits = asm.factor_hits() - before;
        Ok(GalerkinSystem { structure, op, factors, cache_hits })
    }

    pub fn structure(&self) -> &Arc<MlStructure> {
        &self.structure
    }

    pub fn operator(&self) -> &BlockOperator {
        &self.op
    }

    /// Solves `B(x, v) = b(v)` for all `v` in the space; `rhs` holds one load
    /// block per index.
    pub fn solve(&self, rhs: &[Vec<f64>], tol: f64) -> Result<(MlFunction, SolveReport)> {
        if !(tol > 0.0) {
            return Err(Error::Config(format!("solver tolerance must be positive, got {tol}")));
        }
        let b = MlFunction::from_blocks(self.structure.clone(), rhs.to_vec())?.to_flat();
        let o = &self.op.offsets;
        let precond = |r: &[f64], z: &mut [f64]| {
            z.copy_from_slice(r);
            for (i, f) in self.factors.iter().enumerate() {
                f.solve_in_place(&mut z[o[i]..o[i + 1]]);
            }
        };
        let (x, mut report) = solver::pcg(
            |x, y| self.op.apply(x, y),
            precond,
            &b,
            tol,
            solver::iteration_cap(b.len()),
        )
        .map_err(|e| match e {
            Error::NonConvergence(mut r) => {
                r.cache_hits = self.cache_hits;
                Error::NonConvergence(r)
            }
            e => e,
        })?;
        report.cache_hits = self.cache_hits;
        Ok((MlFunction::from_flat(self.structure.clone(), &x)?, report))
    }

    /// `‖B x - b‖ / ‖b‖`
    pub fn residual_check(&self, x: &MlFunction, rhs: &[Vec<f64>]) -> f64 {
        solver::relative_residual(|a, y| self.op.apply(a, y), &x.to_flat(), &rhs.concat())
    }
}

/// `B(w, φᵢ P_ν)` for every interior hat function `φᵢ` of `target`.
pub fn apply_to_target(asm: &Assembler, w: &MlFunction, nu: &MultiIndex, target: &Mesh) -> Result<Vec<f64>> {
    let mut out = vec![0.0; target.n_dofs()];
    let s = &w.structure;
    for (j, mu) in s.indices.iter().enumerate() {
        let (m, c) = match coupling_weight(nu, mu) {
            Coupling::Diagonal => (0, 1.0),
            Coupling::Mode { m, weight } => (m, weight),
            Coupling::None => continue,
        };
        let k = asm.stiffness(target, &s.meshes[j], m)?;
        mul_add(&k, c, &w.blocks[j], &mut out);
    }
    Ok(out)
}

/// `B(u, v)` for functions on possibly different structures of one family.
pub fn bilinear(asm: &Assembler, u: &MlFunction, v: &MlFunction) -> Result<f64> {
    let mut total = 0.0;
    for (i, nu) in v.structure.indices.iter().enumerate() {
        let r = apply_to_target(asm, u, nu, &v.structure.meshes[i])?;
        total += r.iter().zip(&v.blocks[i]).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::new_interior_vertices;

    fn asm() -> Assembler {
        let spec = ProblemSpec::setup(1).unwrap();
        let t0 = initial_mesh(spec.domain, 32).unwrap();
        Assembler::with_mesh(spec, t0).unwrap()
    }

    #[test]
    fn enriched_of_trivial_structure() {
        let a = asm();
        let s = MlStructure::new(a.t0().clone());
        let e = s.enriched().unwrap();
        assert_eq!(e.indices().len(), 2);
        assert_eq!(e.meshes()[0].n_triangles(), 128);
        assert_eq!(e.meshes()[1].uid(), a.t0().uid());
        let all = Marks {
            indices: s.detail_set(),
            vertices: [(MultiIndex::zero(), new_interior_vertices(a.t0()).iter().map(|v| v.edge).collect())]
                .into_iter()
                .collect(),
        };
        let r = s.refine(&all).unwrap();
        assert_eq!(r.dim(), e.dim());
        assert_eq!(s.refine(&Marks::default()).unwrap(), s);
    }

    #[test]
    fn operator_symmetric_and_solves() {
        let a = asm();
        let s = MlStructure::new(a.t0().clone());
        let s = Arc::new(s.enriched().unwrap().enriched().unwrap());
        let sys = GalerkinSystem::new(&a, s.clone()).unwrap();
        assert!(sys.operator().n_couplings() > 0);
        let n = s.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 5 + 1) % 13) as f64 - 6.0).collect();
        let (bxy, byx) = (sys.operator().form(&x, &y), sys.operator().form(&y, &x));
        assert!((bxy - byx).abs() <= 1e-12 * bxy.abs().max(1.0));
        let mut rhs: Vec<Vec<f64>> = s.block_dims().iter().map(|&d| vec![0.0; d]).collect();
        rhs[0] = a.rhs_load(&s.meshes()[0]).to_vec();
        let (u, rep) = sys.solve(&rhs, 1e-10).unwrap();
        assert!(rep.relative_residual <= 1e-10);
        assert!(sys.residual_check(&u, &rhs) <= 1e-10);
        let b = bilinear(&a, &u, &u).unwrap();
        let f = u.to_flat();
        assert!((b - sys.operator().form(&f, &f)).abs() < 1e-12 * b);
    }
}
