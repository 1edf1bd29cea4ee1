//! Level-set design field on the background mesh, sensitivity filtering,
//! the reaction–diffusion update and the optimization loop.

mod run;

pub use run::{design_mesh, initial_design, run_optimization, IterationRecord, IterationView, MeshSettings, OptProblem, OptimizationResult, ResumeState};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::fem::SparseSystem;
use crate::mesh::{CaseGeometry, CaseKind, TriMesh};
use crate::{Error, Result};

/// Part of ∂D carrying the Neumann condition for φ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaPhiN {
    /// Dirichlet φ = −1 on all of ∂D.
    None,
    /// ∂D ∩ ∂Ω (e.g. the reflecting end of a closed tube).
    Outer,
    /// ∂D shared with non-design air.
    NonDesignInterface,
}

impl GammaPhiN {
    pub fn for_case(kind: CaseKind) -> GammaPhiN {
        match kind {
            CaseKind::ClosedTube => GammaPhiN::Outer,
            CaseKind::OpenTube => GammaPhiN::None,
            CaseKind::Benchmark => GammaPhiN::NonDesignInterface,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptConfig {
    pub tau: f64,
    pub l_phi: f64,
    /// K_φ·Δt_s.
    pub k_dt: f64,
    pub alpha_t: f64,
    pub gamma_phi_n: GammaPhiN,
    pub window: usize,
    pub threshold: f64,
    pub max_iters: usize,
}

impl OptConfig {
    pub fn for_case(case: &CaseGeometry) -> OptConfig {
        let (tau, l_phi, alpha_t) = match case.kind {
            CaseKind::Benchmark => (5e-4, 0.05, 1.0),
            _ => (5e-5, case.d_ex, 0.01),
        };
        OptConfig {
            tau,
            l_phi,
            k_dt: 0.5,
            alpha_t,
            gamma_phi_n: GammaPhiN::for_case(case.kind),
            window: 10,
            threshold: 5e-3,
            max_iters: 400,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::param("tau", "must be positive"));
        }
        if !(self.l_phi > 0.0) {
            return Err(Error::param("l_phi", "must be positive"));
        }
        if !(self.k_dt > 0.0) {
            return Err(Error::param("k_dt", "must be positive"));
        }
        if !(self.alpha_t > 0.0 && self.alpha_t <= 1.0) {
            return Err(Error::param("alpha_t", "must lie in (0, 1]"));
        }
        if self.window == 0 {
            return Err(Error::param("window", "must be at least 1"));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::param("threshold", "must be positive"));
        }
        Ok(())
    }
}

/// Initial design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum InitPreset {
    AllAir,
    AllRigid,
    /// Rigid D with two horizontal air channels of the given width centred
    /// at 1/4 and 3/4 of the height of D.
    TwoChannel { width: f64 },
    /// Nodal φ on the background mesh.
    Custom { values: Option<Vec<f64>> },
}

/// P1 level set on the background mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetField {
    pub phi: Vec<f64>,
}

impl LevelSetField {
    /// χ_φ: 1 where φ ≥ 0.
    pub fn chi(&self) -> Vec<f64> {
        self.phi.iter().map(|&v| if v >= 0.0 { 1.0 } else { 0.0 }).collect()
    }
}

/// Node classes of the background mesh for the φ problem.
#[derive(Clone, Debug)]
pub struct DesignNodes {
    /// Vertex belongs to a design triangle.
    pub in_design: Vec<bool>,
    /// Vertex carries φ = −1 (∂D∖Γ_φn, or outside D).
    pub fixed: Vec<bool>,
}

impl DesignNodes {
    pub fn new(bg: &TriMesh, gamma: GammaPhiN) -> Result<DesignNodes> {
        let nv = bg.n_vertices();
        let mut in_design = vec![false; nv];
        for (t, tri) in bg.triangles().iter().enumerate() {
            if bg.regions()[t].is_design() {
                for &v in tri {
                    in_design[v] = true;
                }
            }
        }
        if !in_design.iter().any(|&b| b) {
            return Err(Error::Mesh("background mesh has no design triangles".into()));
        }
        let mut fixed: Vec<bool> = in_design.iter().map(|&d| !d).collect();
        for e in bg.design_boundary_edges() {
            let neumann = match gamma {
                GammaPhiN::None => false,
                GammaPhiN::Outer => bg.is_boundary_edge(e),
                GammaPhiN::NonDesignInterface => !bg.is_boundary_edge(e),
            };
            if !neumann {
                let [a, b] = bg.edges()[e];
                fixed[a] = true;
                fixed[b] = true;
            }
        }
        Ok(DesignNodes { in_design, fixed })
    }

    pub fn free(&self, v: usize) -> bool {
        self.in_design[v] && !self.fixed[v]
    }
}

/// Initial level set. Fixed nodes always hold −1.
pub fn init_levelset(
    bg: &TriMesh,
    case: &CaseGeometry,
    nodes: &DesignNodes,
    preset: &InitPreset,
) -> Result<LevelSetField> {
    let nv = bg.n_vertices();
    let (lo, hi) = case.design_box();
    let rigid_where = |keep_air: &dyn Fn(usize) -> bool| -> Vec<f64> {
        (0..nv)
            .map(|v| if nodes.free(v) && !keep_air(v) { 1.0 } else { -1.0 })
            .collect()
    };
    let phi = match preset {
        InitPreset::AllAir => vec![-1.0; nv],
        InitPreset::AllRigid => rigid_where(&|_| false),
        InitPreset::TwoChannel { width } => {
            if !(*width > 0.0) {
                return Err(Error::param("init.width", "must be positive"));
            }
            let hd = hi[1] - lo[1];
            let centres = [lo[1] + 0.25 * hd, lo[1] + 0.75 * hd];
            let verts = bg.vertices();
            rigid_where(&|v| {
                let y = verts[v][1];
                centres.iter().any(|c| (y - c).abs() <= 0.5 * width + 1e-12)
            })
        }
        InitPreset::Custom { values } => {
            let values = values
                .as_ref()
                .ok_or_else(|| Error::param("init.values", "custom preset needs nodal values"))?;
            if values.len() != nv {
                return Err(Error::param(
                    "init.values",
                    format!("expected {nv} nodal values, got {}", values.len()),
                ));
            }
            (0..nv)
                .map(|v| if nodes.fixed[v] { -1.0 } else { values[v].clamp(-1.0, 1.0) })
                .collect()
        }
    };
    Ok(LevelSetField { phi })
}

/// Exponentially averaged sensitivity on the background node set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensitivityState {
    pub filtered: Option<Vec<f64>>,
}

/// J̄'(t) = α_t J'(t) + (1 − α_t) J̄'(t − Δt); the first call returns J'.
pub fn filter_sensitivity(state: &mut SensitivityState, j_new: &[f64], alpha_t: f64) -> Result<Vec<f64>> {
    if !(alpha_t > 0.0 && alpha_t <= 1.0) {
        return Err(Error::param("alpha_t", "must lie in (0, 1]"));
    }
    let out = match &state.filtered {
        None => j_new.to_vec(),
        Some(prev) => {
            if prev.len() != j_new.len() {
                return Err(Error::Mesh(format!(
                    "sensitivity history has {} nodes, new field has {}",
                    prev.len(),
                    j_new.len()
                )));
            }
            prev.iter()
                .zip(j_new)
                .map(|(&p, &n)| alpha_t * n + (1.0 - alpha_t) * p)
                .collect()
        }
    };
    state.filtered = Some(out.clone());
    Ok(out)
}

/// One semi-implicit reaction–diffusion step on D:
/// (M + K_φΔt·τL_φ²·A) φ_new = M φ_old − K_φΔt·C_J·M J̄', then clamp.
pub fn update_levelset(
    bg: &TriMesh,
    ls: &LevelSetField,
    jbar: &[f64],
    cfg: &OptConfig,
    nodes: &DesignNodes,
) -> Result<LevelSetField> {
    cfg.validate()?;
    let nv = bg.n_vertices();
    if ls.phi.len() != nv || jbar.len() != nv {
        return Err(Error::Mesh("level set and sensitivity must live on the background mesh".into()));
    }
    let diff = cfg.k_dt * cfg.tau * cfg.l_phi * cfg.l_phi;
    let mut sys = SparseSystem::new(nv);
    let mut rhs = vec![0.0; nv];
    let mut area_d = 0.0;
    let mut int_abs = 0.0;
    let mut mj = vec![0.0; nv];
    for (t, tri) in bg.triangles().iter().enumerate() {
        if !bg.regions()[t].is_design() {
            continue;
        }
        let g = bg.geom(t);
        let gl = g.p1_grads();
        area_d += g.area;
        let mut local = [[C::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            int_abs += g.area / 3.0 * jbar[tri[i]].abs();
            for j in 0..3 {
                let m = g.area / 12.0 * if i == j { 2.0 } else { 1.0 };
                let a = g.area * (gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
                local[i][j] = C::new(m + diff * a, 0.0);
                rhs[tri[i]] += m * ls.phi[tri[j]];
                mj[tri[i]] += m * jbar[tri[j]];
            }
        }
        sys.add_block(tri, &local);
    }
    let c_j = if int_abs > 0.0 {
        area_d / int_abs
    } else {
        log::warn!("∫|J'| = 0: diffusion-only level-set step");
        0.0
    };
    let fixed: Vec<bool> = (0..nv).map(|v| !nodes.free(v)).collect();
    let rhs: Vec<C> = (0..nv)
        .map(|v| C::new(rhs[v] - cfg.k_dt * c_j * mj[v], 0.0))
        .collect();
    let g: Vec<C> = (0..nv)
        .map(|v| C::new(if nodes.free(v) { 0.0 } else { -1.0 }, 0.0))
        .collect();
    let f = sys.factorize(&fixed, "level set")?;
    let sol = f.solve(&rhs, Some(&g))?;
    let phi = (0..nv)
        .map(|v| if nodes.free(v) { sol[v].re.clamp(-1.0, 1.0) } else { -1.0 })
        .collect();
    Ok(LevelSetField { phi })
}

/// Mean of |J_i − J_{i−1}|/|J_{i−1}| over the last `window` steps.
pub fn convergence_metric(history: &[f64], window: usize) -> Option<f64> {
    if window == 0 || history.len() < window + 1 {
        return None;
    }
    let n = history.len();
    let s: f64 = (n - window..n)
        .map(|i| {
            let prev = history[i - 1];
            let d = (history[i] - prev).abs();
            if prev == 0.0 {
                if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                d / prev.abs()
            }
        })
        .sum();
    Some(s / window as f64)
}

pub fn check_convergence(history: &[f64], window: usize, threshold: f64) -> bool {
    convergence_metric(history, window).is_some_and(|m| m < threshold)
}
