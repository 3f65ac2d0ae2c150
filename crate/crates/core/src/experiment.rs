//! Drivers for the three convergence studies: a sweep over the layer width
//! on a fixed mesh, and sweeps over the mesh size on uniform and on locally
//! refined meshes.

use thiserror::Error;

use crate::analysis::{
    error_norms, fit_rate, fit_rate_pre_saturation, AnalysisError, ConvergenceTable, ErrorReport, Norm,
    Parameter,
};
use crate::fem::{assemble_diffuse, FemError};
use crate::geometry::{InterfaceProblem, TestProblem};
use crate::layer::{classify_nodal, mark_nodal, nodal_distance, ElementClass, LayerError};
use crate::linalg::{CgConfig, LinalgError};
use crate::mesh::{Mesh, MeshError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("empty parameter schedule")]
    EmptySchedule,
    #[error("parameter schedule must be strictly decreasing")]
    UnorderedSchedule,
    #[error("mesh sizes must double from one entry to the next")]
    NotNested,
    #[error("refinement target delta <= {target:e}, kappa <= 4 delta not reached after {passes} passes (delta {delta:e}, kappa {kappa:e})")]
    RefinementTarget { target: f64, passes: usize, delta: f64, kappa: f64 },
    #[error("Galerkin residual {residual:e} exceeds 1e-9 * {scale:e}")]
    GalerkinResidual { residual: f64, scale: f64 },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl ExperimentError {
    /// True for failures of the linear solve or of the discrete system.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            ExperimentError::GalerkinResidual { .. }
                | ExperimentError::Fem(FemError::Linalg(LinalgError::NotConverged { .. }))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    EpsSweep,
    HSweepUniform,
    HSweepLocal,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EpsSweep => "eps",
            ExperimentKind::HSweepUniform => "h-uniform",
            ExperimentKind::HSweepLocal => "h-local",
        }
    }

    /// Norms reported by the sweeps with their predicted convergence orders.
    pub fn predicted_rates(self) -> [(Norm, f64); 3] {
        let (lp, h1) = match self {
            ExperimentKind::EpsSweep | ExperimentKind::HSweepUniform => (1.0, 0.5),
            ExperimentKind::HSweepLocal => (2.0, 1.0),
        };
        [(Norm::L2, lp), (Norm::H1Full, h1), (Norm::LinfOmega, lp)]
    }
}

/// Width used by both mesh sweeps.
pub const SMALL_EPS: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Layer widths, strictly decreasing. A single entry for mesh sweeps.
    pub eps_list: Vec<f64>,
    /// Subdivisions per side of the uniform meshes, each twice the previous.
    /// A single entry for the width sweep.
    pub mesh_list: Vec<usize>,
    pub cg: CgConfig,
    /// Upper bound on mark-and-refine passes per base mesh.
    pub max_passes: usize,
}

impl ExperimentSpec {
    /// Default schedules; `full` selects the larger meshes and the complete
    /// width schedule.
    pub fn preset(kind: ExperimentKind, full: bool) -> Self {
        let (eps_list, mesh_list) = match kind {
            ExperimentKind::EpsSweep => {
                let last = if full { 20 } else { 12 };
                let eps = (1..=last).map(|i| 0.5f64.powi(i)).collect();
                (eps, vec![if full { 576 } else { 288 }])
            }
            ExperimentKind::HSweepUniform | ExperimentKind::HSweepLocal => {
                let mut meshes = vec![72, 144, 288];
                if full {
                    meshes.push(576);
                }
                (vec![SMALL_EPS], meshes)
            }
        };
        ExperimentSpec { kind, eps_list, mesh_list, cg: CgConfig::default(), max_passes: 40 }
    }

    /// Replaces the base mesh: the width sweep runs on `n`, the mesh sweeps
    /// start from `n` and keep their number of levels.
    pub fn with_base_n(mut self, n: usize) -> Self {
        let levels = self.mesh_list.len();
        self.mesh_list = (0..levels).map(|k| n << k).collect();
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.eps_list.is_empty() || self.mesh_list.is_empty() {
            return Err(ExperimentError::EmptySchedule);
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(ExperimentError::UnorderedSchedule);
        }
        if self.mesh_list.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(ExperimentError::NotNested);
        }
        Ok(())
    }
}

/// Per-run solver and geometry diagnostics kept next to the error report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub param: f64,
    pub report: ErrorReport,
    pub cg_iterations: usize,
    pub cg_relative_residual: f64,
    pub galerkin_residual: f64,
    /// `‖b‖∞` of the reduced right-hand side.
    pub galerkin_scale: f64,
    /// Target for `delta` on locally refined meshes.
    pub delta_target: Option<f64>,
    pub refinement_passes: usize,
}

impl RunRecord {
    pub fn galerkin_ok(&self) -> bool {
        self.galerkin_residual <= 1e-9 * self.galerkin_scale
    }

    /// `delta <= target` and `kappa <= 4 delta`, or `None` without a target.
    pub fn target_met(&self) -> Option<bool> {
        self.delta_target
            .map(|t| self.report.delta <= t && self.report.kappa <= 4.0 * self.report.delta)
    }
}

/// Mesh, labels and solution of one run, kept for the text dumps.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub mesh: Mesh,
    pub labels: Vec<ElementClass>,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub kind: ExperimentKind,
    pub table: ConvergenceTable,
    pub runs: Vec<RunRecord>,
    /// Artifacts of the last run.
    pub last: Option<RunArtifacts>,
}

impl ExperimentOutcome {
    /// Fitted rate per reported norm: over the rows before saturation for
    /// the width sweep, over all rows for the mesh sweeps.
    pub fn rates(&self) -> Vec<(Norm, f64, Result<f64, AnalysisError>)> {
        self.kind
            .predicted_rates()
            .into_iter()
            .map(|(norm, predicted)| {
                let fitted = match self.kind {
                    ExperimentKind::EpsSweep => fit_rate_pre_saturation(&self.table, norm),
                    _ => fit_rate(&self.table, norm, self.table.len()),
                };
                (norm, predicted, fitted)
            })
            .collect()
    }
}

pub fn run(spec: &ExperimentSpec, problem: &TestProblem) -> Result<ExperimentOutcome, ExperimentError> {
    match spec.kind {
        ExperimentKind::EpsSweep => run_eps_sweep(spec, problem),
        ExperimentKind::HSweepUniform => run_h_sweep_uniform(spec, problem),
        ExperimentKind::HSweepLocal => run_h_sweep_local(spec, problem),
    }
}

fn solve_and_measure(
    problem: &TestProblem,
    mesh: &Mesh,
    eps: f64,
    cg: &CgConfig,
    keep: bool,
) -> Result<(RunRecord, Option<RunArtifacts>), ExperimentError> {
    let system = assemble_diffuse(problem, mesh, eps)?;
    let solution = system.solve(mesh, cg)?;
    let (residual, scale) = system.galerkin_residual(&solution.coefficients)?;
    let report = error_norms(&solution, problem);
    log::info!(
        "eps {eps:e}, {} vertices: cg {} its, L2 {:e}, H1 {:e}",
        mesh.vertex_count(),
        solution.cg_iterations,
        report.l2,
        report.h1_full
    );
    let record = RunRecord {
        param: 0.0,
        report,
        cg_iterations: solution.cg_iterations,
        cg_relative_residual: solution.cg_relative_residual,
        galerkin_residual: residual,
        galerkin_scale: scale,
        delta_target: None,
        refinement_passes: 0,
    };
    if !record.galerkin_ok() {
        return Err(ExperimentError::GalerkinResidual { residual, scale });
    }
    let artifacts = keep.then(|| RunArtifacts {
        mesh: mesh.clone(),
        labels: solution.classification.element_class.clone(),
        coefficients: solution.coefficients.clone(),
    });
    Ok((record, artifacts))
}

fn finish(
    kind: ExperimentKind,
    parameter: Parameter,
    runs: Vec<RunRecord>,
    last: Option<RunArtifacts>,
) -> Result<ExperimentOutcome, ExperimentError> {
    let mut table = ConvergenceTable::new(parameter);
    for r in &runs {
        table.push(r.param, r.report)?;
    }
    Ok(ExperimentOutcome { kind, table, runs, last })
}

/// One solve per width on the uniform mesh `mesh_list[0]`.
pub fn run_eps_sweep(spec: &ExperimentSpec, problem: &TestProblem) -> Result<ExperimentOutcome, ExperimentError> {
    spec.validate()?;
    let mesh = Mesh::uniform(spec.mesh_list[0])?;
    let mut runs = Vec::new();
    let mut last = None;
    for (i, &eps) in spec.eps_list.iter().enumerate() {
        let keep = i + 1 == spec.eps_list.len();
        let (mut record, artifacts) = solve_and_measure(problem, &mesh, eps, &spec.cg, keep)?;
        record.param = eps;
        runs.push(record);
        last = artifacts.or(last);
    }
    finish(spec.kind, Parameter::Eps, runs, last)
}

fn uniform_meshes(spec: &ExperimentSpec) -> Result<Vec<Mesh>, ExperimentError> {
    let mut meshes = vec![Mesh::uniform(spec.mesh_list[0])?];
    for _ in 1..spec.mesh_list.len() {
        let next = meshes.last().unwrap().refine_uniform();
        meshes.push(next);
    }
    Ok(meshes)
}

/// One solve per uniform mesh at the width `eps_list[0]`.
pub fn run_h_sweep_uniform(
    spec: &ExperimentSpec,
    problem: &TestProblem,
) -> Result<ExperimentOutcome, ExperimentError> {
    spec.validate()?;
    let eps = spec.eps_list[0];
    let meshes = uniform_meshes(spec)?;
    let mut runs = Vec::new();
    let mut last = None;
    for (i, mesh) in meshes.iter().enumerate() {
        let (mut record, artifacts) = solve_and_measure(problem, mesh, eps, &spec.cg, i + 1 == meshes.len())?;
        record.param = record.report.h;
        runs.push(record);
        last = artifacts.or(last);
    }
    finish(spec.kind, Parameter::H, runs, last)
}

/// Bisects elements near the layer boundary until `delta <= target` and
/// `kappa <= 4 delta`. Returns the refined mesh and the number of passes.
///
/// Each pass first shrinks the elements meeting `±eps` to the target
/// diameter; once `delta` is reached, elements meeting `±(eps + delta)` that
/// are wider than `4 delta` are bisected.
pub fn refine_to_target(
    base: &Mesh,
    problem: &TestProblem,
    eps: f64,
    target: f64,
    max_passes: usize,
) -> Result<(Mesh, usize), ExperimentError> {
    let mut mesh = base.clone();
    let (mut delta, mut kappa) = (f64::INFINITY, f64::INFINITY);
    for pass in 0..=max_passes {
        let nodal = nodal_distance(&mesh, problem.level_set());
        let class = classify_nodal(&mesh, nodal, eps)?;
        delta = class.delta;
        kappa = class.kappa;
        if delta <= target && kappa <= 4.0 * delta {
            return Ok((mesh, pass));
        }
        if pass == max_passes {
            break;
        }
        let marked: Vec<usize> = if delta > target {
            mark_nodal(&mesh, &class.nodal_distance, eps)
                .into_iter()
                .filter(|&t| mesh.diameter(t) > target)
                .collect()
        } else {
            mark_nodal(&mesh, &class.nodal_distance, eps + delta)
                .into_iter()
                .filter(|&t| mesh.diameter(t) > 4.0 * delta)
                .collect()
        };
        log::debug!("pass {pass}: delta {delta:e}, kappa {kappa:e}, {} marked", marked.len());
        mesh = mesh.refine_marked(&marked)?;
    }
    Err(ExperimentError::RefinementTarget { target, passes: max_passes, delta, kappa })
}

/// Uniform meshes refined near the layer boundary until `delta <= h^2` and
/// `kappa <= 4 delta`, with `h` the diameter of the base mesh.
pub fn run_h_sweep_local(
    spec: &ExperimentSpec,
    problem: &TestProblem,
) -> Result<ExperimentOutcome, ExperimentError> {
    spec.validate()?;
    let eps = spec.eps_list[0];
    let bases = uniform_meshes(spec)?;
    let mut runs = Vec::new();
    let mut last = None;
    for (i, base) in bases.iter().enumerate() {
        let h = base.metrics().h;
        let target = h * h;
        let (mesh, passes) = refine_to_target(base, problem, eps, target, spec.max_passes)?;
        let (mut record, artifacts) = solve_and_measure(problem, &mesh, eps, &spec.cg, i + 1 == bases.len())?;
        record.param = record.report.h;
        record.delta_target = Some(target);
        record.refinement_passes = passes;
        runs.push(record);
        last = artifacts.or(last);
    }
    finish(spec.kind, Parameter::H, runs, last)
}
