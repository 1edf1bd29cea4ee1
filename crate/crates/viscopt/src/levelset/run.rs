use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_convergence, convergence_metric, filter_sensitivity, init_levelset, update_levelset, DesignNodes,
    InitPreset, LevelSetField, OptConfig, SensitivityState,
};
use crate::adjoint::{build_adjoint_load, design_sensitivity, solve_adjoint_pressure_with, td_term};
use crate::mesh::{
    build_case_geometry, conform_to_levelset, refine_mesh, solve_distance_field, CaseGeometry, RefineOptions,
    SizeField, SizeRule, TriMesh, DEFAULT_BETA_E,
};
use crate::slns::{
    aggregate, compute_wavenumbers, evaluate_point, solve_frequency, AirProperties, FictitiousRigid,
    FrequencyGrid, FrequencyPoint, Objective, ObjectiveReport, Physics,
};
use crate::{Error, Result};

/// Remeshing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSettings {
    /// Background / far-field element size.
    pub coarse: f64,
    /// Eikonal length scale; `None` means twice `coarse`.
    pub alpha_e: Option<f64>,
    pub beta_e: f64,
    /// Multiplier on the band size λ_v(ω_fin)/5 (1 = full resolution).
    pub band_scale: f64,
    pub max_vertices: usize,
}

impl Default for MeshSettings {
    fn default() -> Self {
        MeshSettings {
            coarse: 1e-3,
            alpha_e: None,
            beta_e: DEFAULT_BETA_E,
            band_scale: 1.0,
            max_vertices: 400_000,
        }
    }
}

impl MeshSettings {
    pub fn alpha_e(&self) -> f64 {
        self.alpha_e.unwrap_or(2.0 * self.coarse)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coarse > 0.0) {
            return Err(Error::param("mesh.coarse", "must be positive"));
        }
        if !(self.alpha_e() > 0.0) {
            return Err(Error::param("mesh.alpha_e", "must be positive"));
        }
        if !(self.beta_e >= 0.0) {
            return Err(Error::param("mesh.beta_e", "must be non-negative"));
        }
        if !(self.band_scale > 0.0) {
            return Err(Error::param("mesh.band_scale", "must be positive"));
        }
        Ok(())
    }

    /// Band-refined analysis mesh for a conformed design mesh.
    pub fn analysis_mesh(&self, conformed: &TriMesh, props: &AirProperties, omega_fin: f64) -> Result<TriMesh> {
        let dist = solve_distance_field(conformed, self.alpha_e())?;
        let lambda_v = compute_wavenumbers(props, omega_fin).lambda_v;
        let mut rule = SizeRule::new(self.beta_e, lambda_v * self.band_scale, self.coarse);
        rule.coarse = rule.coarse.max(rule.h_band);
        let r = refine_mesh(
            conformed,
            &SizeField::Distance { rule, u_e: dist.u_e },
            &RefineOptions {
                max_vertices: self.max_vertices,
                ..RefineOptions::default()
            },
        )?;
        if !r.complete {
            log::warn!("band refinement stopped at the vertex budget ({})", self.max_vertices);
        }
        Ok(r.mesh)
    }
}

/// Everything the optimization loop needs.
#[derive(Clone, Debug)]
pub struct OptProblem {
    pub case: CaseGeometry,
    pub grid: FrequencyGrid,
    pub objective: Objective,
    pub props: AirProperties,
    pub rigid: FictitiousRigid,
    pub physics: Physics,
    pub mesh: MeshSettings,
    pub opt: OptConfig,
    pub init: InitPreset,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub j: f64,
    /// Moving-average relative change (NaN until the window fills).
    pub conv_metric: f64,
    pub num_nodes: usize,
    pub num_tris: usize,
}

/// Passed to the per-iteration callback.
pub struct IterationView<'a> {
    pub record: &'a IterationRecord,
    pub background: &'a TriMesh,
    pub levelset: &'a LevelSetField,
    pub mesh: &'a TriMesh,
    pub report: &'a ObjectiveReport,
    /// Design sensitivity J' on the background mesh.
    pub sensitivity: &'a [f64],
    /// Filter state before this iteration's sensitivity is folded in.
    pub filter: &'a SensitivityState,
}

/// State to continue a previous run: φ and the filter at the start of
/// iteration `iter`. The convergence window restarts empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ResumeState {
    pub iter: usize,
    pub phi: Vec<f64>,
    pub filtered: Option<Vec<f64>>,
}

pub struct OptimizationResult {
    pub history: Vec<IterationRecord>,
    pub levelset: LevelSetField,
    pub background: TriMesh,
    pub mesh: TriMesh,
    pub report: ObjectiveReport,
    pub converged: bool,
    pub filter: SensitivityState,
}

struct Evaluation {
    mesh: TriMesh,
    report: ObjectiveReport,
    dtj: Vec<f64>,
}

/// Analysis mesh of a design: conform to φ = 0, then band refinement.
pub fn design_mesh(problem: &OptProblem, bg: &TriMesh, ls: &LevelSetField) -> Result<TriMesh> {
    let conformed = conform_to_levelset(bg, &ls.phi)?;
    problem
        .mesh
        .analysis_mesh(&conformed, &problem.props, problem.grid.omega_fin)
}

/// Background mesh, initial level set and its analysis mesh.
pub fn initial_design(problem: &OptProblem) -> Result<(TriMesh, LevelSetField, TriMesh)> {
    problem.case.validate()?;
    problem.mesh.validate()?;
    let bg = build_case_geometry(&problem.case, problem.mesh.coarse)?;
    let nodes = DesignNodes::new(&bg, problem.opt.gamma_phi_n)?;
    let ls = init_levelset(&bg, &problem.case, &nodes, &problem.init)?;
    let mesh = design_mesh(problem, &bg, &ls)?;
    Ok((bg, ls, mesh))
}

fn evaluate(problem: &OptProblem, bg: &TriMesh, ls: &LevelSetField) -> Result<Evaluation> {
    let mesh = design_mesh(problem, bg, ls)?;
    let omegas = problem.grid.omegas();
    let nf = omegas.len();
    let per_freq: Vec<Result<(FrequencyPoint, Vec<f64>)>> = crate::thread_pool().install(|| {
        omegas
            .par_iter()
            .map(|&w| {
                let wrap = |e| Error::AtFrequency {
                    freq_hz: w / (2.0 * std::f64::consts::PI),
                    source: Box::new(e),
                };
                let run = || -> Result<(FrequencyPoint, Vec<f64>)> {
                    let sol = solve_frequency(&mesh, w, &problem.props, &problem.rigid, problem.physics, true)?;
                    let pt = evaluate_point(&mesh, &sol, problem.objective)?;
                    let load = build_adjoint_load(&mesh, &pt, problem.objective, nf, sol.wn.k0c)?;
                    let q = solve_adjoint_pressure_with(&mesh, &sol, &load)?;
                    let td = td_term(&mesh, &sol.p, &q, w, &problem.props);
                    Ok((pt, td))
                };
                run().map_err(wrap)
            })
            .collect()
    });
    let mut points = Vec::with_capacity(nf);
    let mut dtj = vec![0.0; mesh.n_vertices()];
    for r in per_freq {
        let (pt, td) = r?;
        points.push(pt);
        for (a, b) in dtj.iter_mut().zip(td) {
            *a += b;
        }
    }
    Ok(Evaluation {
        report: aggregate(points, problem.objective),
        mesh,
        dtj,
    })
}

/// Background-vertex values of a field on a mesh derived from the
/// background by conforming and refinement (both keep vertex indices).
fn restrict_to_background(bg: &TriMesh, mesh: &TriMesh, field: &[f64]) -> Vec<f64> {
    debug_assert!(mesh.n_vertices() >= bg.n_vertices());
    debug_assert!(bg
        .vertices()
        .iter()
        .zip(mesh.vertices())
        .all(|(a, b)| a == b));
    field[..bg.n_vertices()].to_vec()
}

/// Runs the loop: remesh on φ = 0 → distance → band refinement → forward
/// and adjoint solves for every ω_k → J → convergence check → sensitivity,
/// filter and level-set update. `on_iter` sees every iteration before the
/// update and may stop the loop early.
pub fn run_optimization(
    problem: &OptProblem,
    max_iters: Option<usize>,
    resume: Option<ResumeState>,
    on_iter: &mut dyn FnMut(&IterationView) -> Result<ControlFlow<()>>,
) -> Result<OptimizationResult> {
    problem.case.validate()?;
    problem.props.validate()?;
    problem.rigid.validate()?;
    problem.grid.validate()?;
    problem.mesh.validate()?;
    problem.opt.validate()?;
    let cap = max_iters.unwrap_or(problem.opt.max_iters);
    let bg = build_case_geometry(&problem.case, problem.mesh.coarse)?;
    let nodes = DesignNodes::new(&bg, problem.opt.gamma_phi_n)?;
    let (start, mut ls, mut filter) = match resume {
        None => (0, init_levelset(&bg, &problem.case, &nodes, &problem.init)?, SensitivityState::default()),
        Some(r) => {
            if r.phi.len() != bg.n_vertices() {
                return Err(Error::Mesh(format!(
                    "checkpoint has {} nodes, background mesh has {}",
                    r.phi.len(),
                    bg.n_vertices()
                )));
            }
            (
                r.iter,
                LevelSetField { phi: r.phi },
                SensitivityState { filtered: r.filtered },
            )
        }
    };

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut js: Vec<f64> = Vec::new();
    let mut iter = start;
    loop {
        let ev = evaluate(problem, &bg, &ls).map_err(|e| Error::AtIteration {
            iter,
            source: Box::new(e),
        })?;
        js.push(ev.report.j);
        let metric = convergence_metric(&js, problem.opt.window).unwrap_or(f64::NAN);
        let record = IterationRecord {
            iter,
            j: ev.report.j,
            conv_metric: metric,
            num_nodes: ev.mesh.n_vertices(),
            num_tris: ev.mesh.n_triangles(),
        };
        log::info!(
            "iter {iter}: J = {:.6e}, metric = {metric:.3e}, {} nodes",
            record.j,
            record.num_nodes
        );
        history.push(record);
        let dtj_bg = restrict_to_background(&bg, &ev.mesh, &ev.dtj);
        let sens = design_sensitivity(&dtj_bg, &ls.chi());
        let converged = check_convergence(&js, problem.opt.window, problem.opt.threshold);
        let last = converged || iter + 1 >= start + cap;
        let flow = on_iter(&IterationView {
            record: &record,
            background: &bg,
            levelset: &ls,
            mesh: &ev.mesh,
            report: &ev.report,
            sensitivity: &sens,
            filter: &filter,
        })?;
        if !last && flow.is_continue() {
            let jbar = filter_sensitivity(&mut filter, &sens, problem.opt.alpha_t)?;
            ls = update_levelset(&bg, &ls, &jbar, &problem.opt, &nodes)?;
            iter += 1;
            continue;
        }
        return Ok(OptimizationResult {
            history,
            levelset: ls,
            background: bg,
            mesh: ev.mesh,
            report: ev.report,
            converged,
            filter,
        });
    }
}
