//! The goal-oriented adaptive loop.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimator::{estimate, IndicatorBundle, Residual};
use crate::goals;
use crate::mlspace::{Assembler, GalerkinSystem, Marks, MlFunction, MlStructure};
use crate::problem::ProblemSpec;
use crate::solver::SolveReport;

/// Default `(tol, ref_tol)` per setup.
pub fn desk_tolerances(setup: u8) -> Result<(f64, f64)> {
    match setup {
        1 => Ok((3e-5, 1e-5)),
        2 => Ok((5e-4, 1e-4)),
        3 => Ok((6e-5, 2e-5)),
        4 => Ok((4e-3, 1e-3)),
        _ => Err(Error::Config(format!("unknown setup {setup}, expected 1-4"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub setup: u8,
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub solver_tol: f64,
    /// Disables parametric marking so that the index set stays `{0}`.
    pub freeze_indices: bool,
}

impl RunConfig {
    /// Defaults for `setup` at desk-scale tolerance.
    pub fn for_setup(setup: u8) -> Result<Self> {
        let (tol, _) = desk_tolerances(setup)?;
        Ok(RunConfig { setup, theta: 0.5, tol, max_iter: 30, solver_tol: 1e-10, freeze_indices: false })
    }

    pub fn validate(&self) -> Result<()> {
        desk_tolerances(self.setup)?;
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return Err(Error::Config(format!("solver_tol must lie in (0, 1), got {}", self.solver_tol)));
        }
        Ok(())
    }
}

/// Everything computed on one multilevel structure.
#[derive(Debug, Clone)]
pub struct AdaptiveState {
    pub iter: usize,
    pub structure: Arc<MlStructure>,
    pub u: MlFunction,
    pub z: MlFunction,
    pub primal: IndicatorBundle,
    pub dual: IndicatorBundle,
    pub goal_value: f64,
    pub primal_report: SolveReport,
    pub dual_report: SolveReport,
}

impl AdaptiveState {
    pub fn mu(&self) -> f64 {
        self.primal.total
    }

    pub fn zeta(&self) -> f64 {
        self.dual.total
    }

    /// `μ √(μ² + ζ²)`
    pub fn product(&self) -> f64 {
        let (m, z) = (self.mu(), self.zeta());
        m * (m * m + z * z).sqrt()
    }
}

/// Primal solve, dual solve at the primal solution, and both estimates.
pub fn solve_state(asm: &Assembler, structure: Arc<MlStructure>, iter: usize, solver_tol: f64) -> Result<AdaptiveState> {
    let kind = asm.spec().goal;
    let sys = GalerkinSystem::new(asm, structure.clone())?;
    let mut rhs: Vec<Vec<f64>> = structure.block_dims().into_iter().map(|n| vec![0.0; n]).collect();
    rhs[0] = asm.rhs_load(&structure.meshes()[0]).to_vec();
    let (u, primal_report) = sys.solve(&rhs, solver_tol)?;
    let (z, dual_report) = sys.solve(&goals::dual_rhs(asm, kind, &u)?, solver_tol)?;
    let primal = estimate(&Residual::primal(asm, &u), &structure)?;
    let dual = estimate(&Residual::dual(asm, kind, &u, &z), &structure)?;
    let goal_value = goals::value(asm, kind, &u)?;
    Ok(AdaptiveState { iter, structure, u, z, primal, dual, goal_value, primal_report, dual_report })
}

/// Indices of a minimal set of items whose values sum to at least
/// `θ · Σ values`, found greedily. Items of equal value are taken in index
/// order.
pub fn doerfler_minimal(values: &[f64], theta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0.0).collect();
    // values equal to 12 digits relative to the largest count as tied
    let top = order.iter().map(|&i| values[i]).fold(0.0, f64::max);
    let key = |i: usize| (values[i] / top * 1e12).round() as i64;
    order.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| values[i]).sum();
    let goal = theta * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for i in order {
        if acc >= goal {
            break;
        }
        acc += values[i];
        out.push(i);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkingKind {
    Primal,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkingDecision {
    pub chosen: MarkingKind,
    pub primal_count: usize,
    pub combined_count: usize,
    pub marks: Marks,
}

/// Primal marking on `μ²`, combined marking on `μ² + ζ²`; the primal one is
/// taken when it is not larger. With `include_parametric = false` only the
/// spatial items take part.
pub fn select_marking(
    primal: &IndicatorBundle,
    dual: &IndicatorBundle,
    theta: f64,
    include_parametric: bool,
) -> MarkingDecision {
    assert_eq!(primal.spatial.len(), dual.spatial.len(), "bundles of one structure");
    assert_eq!(primal.parametric.len(), dual.parametric.len(), "bundles of one structure");
    let ns = primal.spatial.len();
    let n = if include_parametric { ns + primal.parametric.len() } else { ns };
    let mut p = primal.squared();
    p.truncate(n);
    let c: Vec<f64> = p.iter().zip(dual.squared()).map(|(a, b)| a + b).collect();
    let mp = doerfler_minimal(&p, theta);
    let mc = doerfler_minimal(&c, theta);
    let (chosen, set) = if mp.len() <= mc.len() {
        (MarkingKind::Primal, &mp)
    } else {
        (MarkingKind::Combined, &mc)
    };
    let mut marks = Marks::default();
    for &i in set {
        if i < ns {
            let s = &primal.spatial[i];
            marks.vertices.entry(s.index.clone()).or_default().push(s.vertex.edge);
        } else {
            marks.indices.push(primal.parametric[i - ns].0.clone());
        }
    }
    MarkingDecision { chosen, primal_count: mp.len(), combined_count: mc.len(), marks }
}

/// One row of the convergence log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub dofs: usize,
    pub mu: f64,
    pub zeta: f64,
    pub product: f64,
    pub goal_value: f64,
    pub n_indices: usize,
    pub max_param: u32,
    pub seconds: f64,
    pub pcg_iterations: [usize; 2],
    pub marking: Option<MarkingKind>,
    pub n_marked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLog {
    pub setup: u8,
    pub records: Vec<IterationRecord>,
    /// Whether the product fell below the tolerance before `max_iter`.
    pub converged: bool,
}

/// Runs the loop, handing every state to `observe` before marking.
pub fn run_with(
    asm: &Assembler,
    cfg: &RunConfig,
    mut observe: impl FnMut(&AdaptiveState, &IterationRecord),
) -> Result<ConvergenceLog> {
    cfg.validate()?;
    let start = Instant::now();
    let mut structure = Arc::new(MlStructure::new(asm.t0().clone()));
    let mut records = Vec::new();
    let mut converged = false;
    for iter in 0.. {
        let state = solve_state(asm, structure.clone(), iter, cfg.solver_tol)?;
        let product = state.product();
        let done = product < cfg.tol;
        let decision = (!done && iter < cfg.max_iter)
            .then(|| select_marking(&state.primal, &state.dual, cfg.theta, !cfg.freeze_indices));
        let rec = IterationRecord {
            iter,
            dofs: structure.dim(),
            mu: state.mu(),
            zeta: state.zeta(),
            product,
            goal_value: state.goal_value,
            n_indices: structure.indices().len(),
            max_param: structure.indices().max_param(),
            seconds: start.elapsed().as_secs_f64(),
            pcg_iterations: [state.primal_report.iterations, state.dual_report.iterations],
            marking: decision.as_ref().map(|d| d.chosen),
            n_marked: decision.as_ref().map_or(0, |d| d.marks.len()),
        };
        observe(&state, &rec);
        records.push(rec);
        converged = done;
        let Some(decision) = decision else { break };
        if decision.marks.is_empty() {
            break;
        }
        structure = Arc::new(structure.refine(&decision.marks)?);
        let live: HashSet<u64> = structure.uids().collect();
        asm.retain(&live);
    }
    Ok(ConvergenceLog { setup: cfg.setup, records, converged })
}

pub fn run(cfg: &RunConfig) -> Result<ConvergenceLog> {
    let asm = Assembler::new(ProblemSpec::setup(cfg.setup)?)?;
    run_with(&asm, cfg, |_, _| {})
}

/// `|g(u_ref) - g(u_ℓ)|` for every row of `log`, where `u_ref` is the final
/// iterate of the same loop continued to `ref_tol`. The rows of `log` must be
/// a prefix of that continued run.
pub fn reference_error(cfg: &RunConfig, log: &ConvergenceLog, ref_tol: f64) -> Result<(ConvergenceLog, Vec<f64>)> {
    if !(ref_tol < cfg.tol) {
        return Err(Error::Config(format!("ref_tol {ref_tol} must be below tol {}", cfg.tol)));
    }
    let ref_cfg = RunConfig { tol: ref_tol, max_iter: cfg.max_iter.max(log.records.len()) + 100, ..cfg.clone() };
    let reference = run(&ref_cfg)?;
    let errors = reference_errors(log, &reference)?;
    Ok((reference, errors))
}

/// Reference errors of `log` against the last row of `reference`.
pub fn reference_errors(log: &ConvergenceLog, reference: &ConvergenceLog) -> Result<Vec<f64>> {
    let last = reference.records.last().ok_or_else(|| Error::Config("empty reference log".into()))?;
    for (a, b) in log.records.iter().zip(&reference.records) {
        if a.dofs != b.dofs || a.goal_value.to_bits() != b.goal_value.to_bits() {
            return Err(Error::Structure(format!("reference run diverges from the log at iteration {}", a.iter)));
        }
    }
    Ok(log.records.iter().map(|r| (last.goal_value - r.goal_value).abs()).collect())
}
