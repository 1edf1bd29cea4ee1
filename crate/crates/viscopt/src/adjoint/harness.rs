//! Finite-difference check of the topological derivative: small rigid
//! discs are cut out of a reference configuration one at a time and the
//! objective change is compared with the predicted variation.

use rayon::prelude::*;

use super::{build_adjoint_load, full_delta_j, solve_adjoint_pressure_with, solve_adjoint_uphi, AdjointState};
use crate::mesh::{
    build_case_geometry, conform_to_levelset, dist, refine_mesh, refine_to, solve_distance_field,
    CaseGeometry, Point, RefineOptions, Region, SizeField, SizeRule, TriMesh,
};
use crate::slns::{
    aggregate, evaluate_point, solve_frequency, AirProperties, FictitiousRigid, Objective, Physics,
};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct HarnessConfig {
    pub case: CaseGeometry,
    pub freq_hz: f64,
    pub objective: Objective,
    /// Rigid inclusion present in every configuration.
    pub fixed_center: Point,
    pub fixed_radius: f64,
    /// Probe centres lie on y = probe_y, evenly spaced in [x_start, x_end].
    pub probe_y: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub n_probes: usize,
    /// Radius of the inserted discs.
    pub eps: f64,
    /// Background element size.
    pub h_coarse: f64,
    /// Element size in the boundary-layer band.
    pub h_band: f64,
    pub beta: f64,
    /// Element size on the probe circles.
    pub h_circle: f64,
    pub props: AirProperties,
    pub rigid: FictitiousRigid,
    pub max_vertices: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let case = CaseGeometry::case2();
        let (lo, hi) = case.design_box();
        let d_ex = case.d_ex;
        let eps = d_ex / 80.0;
        HarnessConfig {
            freq_hz: 2500.0,
            objective: Objective::Reflection,
            fixed_center: [0.5 * (lo[0] + hi[0]), 0.5 * case.height()],
            fixed_radius: 0.1 * d_ex,
            probe_y: 0.012,
            x_start: 0.06375,
            x_end: 0.12225,
            n_probes: 32,
            eps,
            h_coarse: 1e-3,
            h_band: 1e-4,
            beta: 3e-4,
            h_circle: eps / 8.0,
            props: AirProperties::default(),
            rigid: FictitiousRigid::default(),
            max_vertices: 400_000,
            case,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub x0: f64,
    pub y0: f64,
    /// Full expansion including the boundary-layer terms.
    pub dj_full: f64,
    /// Pressure-only expansion πε²·D_T J.
    pub dj_p: f64,
    /// J(with disc) − J(reference).
    pub dj_num: f64,
}

impl ProbeRow {
    pub fn rel_err(&self) -> f64 {
        (self.dj_full - self.dj_num).abs() / self.dj_num.abs()
    }
}

#[derive(Clone, Debug)]
pub struct TdHarnessReport {
    pub j_ref: f64,
    pub rows: Vec<ProbeRow>,
    /// Probe centres whose disc would leave the design domain.
    pub skipped: Vec<Point>,
    pub n_vertices: usize,
}

impl TdHarnessReport {
    /// Fraction of rows with relative error below `tol`.
    pub fn pass_fraction(&self, tol: f64) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.rel_err() < tol).count() as f64 / self.rows.len() as f64
    }
}

fn probe_centres(cfg: &HarnessConfig) -> (Vec<Point>, Vec<Point>) {
    let (lo, hi) = cfg.case.design_box();
    let n = cfg.n_probes.max(1);
    let mut keep = Vec::new();
    let mut skip = Vec::new();
    for i in 0..n {
        let x = if n == 1 {
            cfg.x_start
        } else {
            cfg.x_start + (cfg.x_end - cfg.x_start) * i as f64 / (n - 1) as f64
        };
        let p = [x, cfg.probe_y];
        let inside = x - cfg.eps > lo[0]
            && x + cfg.eps < hi[0]
            && cfg.probe_y - cfg.eps > lo[1]
            && cfg.probe_y + cfg.eps < hi[1]
            && dist(p, cfg.fixed_center) > cfg.fixed_radius + cfg.eps;
        if inside {
            keep.push(p);
        } else {
            skip.push(p);
        }
    }
    (keep, skip)
}

/// Mesh fitted to the fixed disc and all probe circles, refined in the
/// boundary-layer band of the all-rigid configuration. Returns the mesh
/// and, per triangle, the index of the disc it belongs to (0 = fixed,
/// k + 1 = probe k) or `None` for air.
fn harness_mesh(cfg: &HarnessConfig, probes: &[Point]) -> Result<(TriMesh, Vec<Option<usize>>)> {
    let mut discs = vec![(cfg.fixed_center, cfg.fixed_radius)];
    discs.extend(probes.iter().map(|&c| (c, cfg.eps)));
    let bg = build_case_geometry(&cfg.case, cfg.h_coarse)?;
    let h_fixed = (cfg.fixed_radius / 12.0).max(cfg.h_circle);
    let grade = SizeRule::GRADE;
    let opts = RefineOptions {
        max_vertices: cfg.max_vertices,
        ..RefineOptions::default()
    };
    let size = |p: Point| {
        discs
            .iter()
            .enumerate()
            .map(|(k, &(c, r))| {
                let h0 = if k == 0 { h_fixed } else { cfg.h_circle };
                let d = (dist(p, c) - r).abs();
                h0 + grade * (d - 2.0 * h0).max(0.0)
            })
            .fold(cfg.h_coarse, f64::min)
    };
    let pre = refine_to(&bg, size, &opts)?;
    if !pre.complete {
        return Err(Error::Mesh("vertex budget exceeded while fitting probe circles".into()));
    }
    let phi: Vec<f64> = pre
        .mesh
        .vertices()
        .iter()
        .map(|&p| {
            discs
                .iter()
                .map(|&(c, r)| r - dist(p, c))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let fitted = conform_to_levelset(&pre.mesh, &phi)?;
    let dist_field = solve_distance_field(&fitted, 2.0 * cfg.h_coarse)?;
    let rule = SizeRule {
        h_band: cfg.h_band,
        beta: cfg.beta,
        grade,
        coarse: cfg.h_coarse,
    };
    let banded = refine_mesh(
        &fitted,
        &SizeField::Distance {
            rule,
            u_e: dist_field.u_e.clone(),
        },
        &opts,
    )?;
    if !banded.complete {
        log::warn!("harness band refinement hit the vertex budget");
    }
    let mesh = banded.mesh;
    let owner = (0..mesh.n_triangles())
        .map(|t| {
            if mesh.regions()[t].is_air() {
                return None;
            }
            let tri = mesh.triangles()[t];
            let v = mesh.vertices();
            let c = [
                (v[tri[0]][0] + v[tri[1]][0] + v[tri[2]][0]) / 3.0,
                (v[tri[0]][1] + v[tri[1]][1] + v[tri[2]][1]) / 3.0,
            ];
            discs
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = dist(c, a.1 .0) - a.1 .1;
                    let db = dist(c, b.1 .0) - b.1 .1;
                    da.total_cmp(&db)
                })
                .map(|(k, _)| k)
        })
        .collect();
    Ok((mesh, owner))
}

fn objective_on(mesh: &TriMesh, cfg: &HarnessConfig, omega: f64) -> Result<f64> {
    let sol = solve_frequency(mesh, omega, &cfg.props, &cfg.rigid, Physics::Slns, false)?;
    let pt = evaluate_point(mesh, &sol, cfg.objective)?;
    Ok(aggregate(vec![pt], cfg.objective).j)
}

/// Runs the finite-difference comparison. All configurations are solved
/// body-fitted on the same underlying mesh so discretisation error largely
/// cancels in J(with disc) − J(reference).
pub fn td_fd_harness(cfg: &HarnessConfig) -> Result<TdHarnessReport> {
    cfg.props.validate()?;
    if !(cfg.eps > 0.0 && cfg.h_circle > 0.0 && cfg.h_band > 0.0) {
        return Err(Error::param("harness", "sizes and radius must be positive"));
    }
    let (probes, skipped) = probe_centres(cfg);
    for p in &skipped {
        log::info!("probe at ({:.5}, {:.5}) skipped: disc leaves the design domain", p[0], p[1]);
    }
    let (mesh, owner) = harness_mesh(cfg, &probes)?;
    let omega = 2.0 * std::f64::consts::PI * cfg.freq_hz;
    let config = |k: Option<usize>| -> Result<TriMesh> {
        let regs: Vec<Region> = (0..mesh.n_triangles())
            .map(|t| {
                let rigid = match owner[t] {
                    None => false,
                    Some(0) => true,
                    Some(j) => Some(j - 1) == k,
                };
                mesh.regions()[t].with_phase(rigid)
            })
            .collect();
        Ok(mesh.with_regions(regs)?.air_submesh()?.0)
    };

    let reference = config(None)?;
    let sol = solve_frequency(&reference, omega, &cfg.props, &cfg.rigid, Physics::Slns, true)?;
    let pt = evaluate_point(&reference, &sol, cfg.objective)?;
    let j_ref = aggregate(vec![pt.clone()], cfg.objective).j;
    let load = build_adjoint_load(&reference, &pt, cfg.objective, 1, sol.wn.k0c)?;
    let q = solve_adjoint_pressure_with(&reference, &sol, &load)?;
    let (v_v, v_h) = solve_adjoint_uphi(&reference, &sol, &q, &cfg.props)?;
    let state = AdjointState {
        omega,
        p: sol.p.clone(),
        q,
        u_v: sol.u_v.clone(),
        u_h: sol.u_h.clone(),
        v_v,
        v_h,
    };
    let wn = sol.wn;
    drop(sol);

    let pool = crate::thread_pool();
    let rows: Vec<Result<ProbeRow>> = pool.install(|| {
        probes
            .par_iter()
            .enumerate()
            .map(|(k, &x0)| {
                let (dj_full, dj_p) = full_delta_j(&reference, &state, &wn, &cfg.props, cfg.eps, x0)?;
                let j_k = objective_on(&config(Some(k))?, cfg, omega)?;
                Ok(ProbeRow {
                    x0: x0[0],
                    y0: x0[1],
                    dj_full,
                    dj_p,
                    dj_num: j_k - j_ref,
                })
            })
            .collect()
    });
    Ok(TdHarnessReport {
        j_ref,
        rows: rows.into_iter().collect::<Result<_>>()?,
        skipped,
        n_vertices: mesh.n_vertices(),
    })
}
