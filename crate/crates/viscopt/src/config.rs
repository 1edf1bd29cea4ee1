//! TOML run configuration. Every section is optional; an empty file gives
//! the closed-tube case with the standard air constants.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adjoint::HarnessConfig;
use crate::levelset::{GammaPhiN, InitPreset, MeshSettings, OptConfig, OptProblem};
use crate::mesh::{CaseGeometry, CaseKind, Point, SlitResonator};
use crate::slns::{AirProperties, FictitiousRigid, FrequencyGrid, Objective, Physics};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// −mean α (two-microphone α for the benchmark).
    Absorption,
    /// mean |S11|².
    Reflection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GeometryOverrides {
    d_ex: Option<f64>,
    l_ndd: Option<f64>,
    l_d: Option<f64>,
    t_w: Option<f64>,
    strips: Option<bool>,
    d_w: Option<f64>,
    probe_x: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FrequencyOverrides {
    f_init: Option<f64>,
    f_fin: Option<f64>,
    n: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptOverrides {
    tau: Option<f64>,
    l_phi: Option<f64>,
    k_dt: Option<f64>,
    alpha_t: Option<f64>,
    gamma_phi_n: Option<GammaPhiN>,
    window: Option<usize>,
    threshold: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct HarnessOverrides {
    freq_hz: Option<f64>,
    fixed_center: Option<Point>,
    fixed_radius: Option<f64>,
    probe_y: Option<f64>,
    x_start: Option<f64>,
    x_end: Option<f64>,
    n_probes: Option<usize>,
    eps: Option<f64>,
    h_coarse: Option<f64>,
    h_band: Option<f64>,
    beta: Option<f64>,
    h_circle: Option<f64>,
    max_vertices: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputOverrides {
    snapshot_every: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    case: Option<CaseKind>,
    out: Option<PathBuf>,
    physics: Option<Physics>,
    objective: Option<ObjectiveKind>,
    geometry: GeometryOverrides,
    air: AirProperties,
    rigid: FictitiousRigid,
    frequency: FrequencyOverrides,
    mesh: MeshSettings,
    opt: OptOverrides,
    init: Option<InitPreset>,
    harness: HarnessOverrides,
    slit: SlitResonator,
    output: OutputOverrides,
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: CaseGeometry,
    pub grid: FrequencyGrid,
    pub objective: Objective,
    pub props: AirProperties,
    pub rigid: FictitiousRigid,
    pub physics: Physics,
    pub mesh: MeshSettings,
    pub opt: OptConfig,
    pub init: InitPreset,
    pub harness: HarnessConfig,
    pub slit: SlitResonator,
    pub out_dir: PathBuf,
    pub snapshot_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn problem(&self) -> OptProblem {
        OptProblem {
            case: self.case.clone(),
            grid: self.grid,
            objective: self.objective,
            props: self.props.clone(),
            rigid: self.rigid,
            physics: self.physics,
            mesh: self.mesh,
            opt: self.opt,
            init: self.init.clone(),
        }
    }
}

fn default_init(kind: CaseKind) -> InitPreset {
    match kind {
        CaseKind::ClosedTube => InitPreset::AllAir,
        CaseKind::OpenTube => InitPreset::AllRigid,
        CaseKind::Benchmark => InitPreset::TwoChannel { width: 1e-3 },
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    let kind = raw.case.unwrap_or(CaseKind::ClosedTube);
    let mut case = match kind {
        CaseKind::ClosedTube => CaseGeometry::case1(),
        CaseKind::OpenTube => CaseGeometry::case2(),
        CaseKind::Benchmark => CaseGeometry::benchmark(),
    };
    let g = &raw.geometry;
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    set!(case.d_ex, g.d_ex);
    set!(case.l_ndd, g.l_ndd);
    set!(case.l_d, g.l_d);
    set!(case.t_w, g.t_w);
    set!(case.strips, g.strips);
    set!(case.d_w, g.d_w);
    set!(case.probe_x, g.probe_x);
    case.validate()?;

    let (fi, ff, n) = match kind {
        CaseKind::Benchmark => (2000.0, 2000.0, 0),
        _ => (3000.0, 6000.0, 20),
    };
    let f = &raw.frequency;
    let f_init = f.f_init.unwrap_or(fi);
    let f_fin = f.f_fin.unwrap_or(if f.f_init.is_some() && f.n == Some(0) { f_init } else { ff });
    let grid = FrequencyGrid::from_hz(f_init, f_fin, f.n.unwrap_or(n))?;

    let props = raw.air;
    props.validate()?;
    let rigid = raw.rigid;
    rigid.validate()?;
    let physics = raw.physics.unwrap_or(Physics::Slns);
    raw.mesh.validate()?;

    let objective = match raw.objective.unwrap_or(ObjectiveKind::Absorption) {
        ObjectiveKind::Absorption => Objective::for_case(kind, case.d_w),
        ObjectiveKind::Reflection => Objective::Reflection,
    };

    let mut opt = OptConfig::for_case(&case);
    let o = &raw.opt;
    set!(opt.tau, o.tau);
    set!(opt.l_phi, o.l_phi);
    set!(opt.k_dt, o.k_dt);
    set!(opt.alpha_t, o.alpha_t);
    set!(opt.gamma_phi_n, o.gamma_phi_n);
    set!(opt.window, o.window);
    set!(opt.threshold, o.threshold);
    set!(opt.max_iters, o.max_iters);
    opt.validate()?;

    let init = raw.init.unwrap_or_else(|| default_init(kind));
    if let InitPreset::Custom { values: None } = init {
        return Err(Error::param("init.values", "custom preset needs nodal values"));
    }

    let mut harness = HarnessConfig {
        case: case.clone(),
        props: props.clone(),
        rigid,
        ..HarnessConfig::default()
    };
    let (lo, hi) = case.design_box();
    harness.fixed_center = [0.5 * (lo[0] + hi[0]), 0.5 * case.height()];
    harness.fixed_radius = 0.1 * case.d_ex;
    harness.eps = case.d_ex / 80.0;
    harness.h_circle = harness.eps / 8.0;
    let h = &raw.harness;
    set!(harness.freq_hz, h.freq_hz);
    set!(harness.fixed_center, h.fixed_center);
    set!(harness.fixed_radius, h.fixed_radius);
    set!(harness.probe_y, h.probe_y);
    set!(harness.x_start, h.x_start);
    set!(harness.x_end, h.x_end);
    set!(harness.n_probes, h.n_probes);
    if let Some(e) = h.eps {
        harness.eps = e;
        harness.h_circle = e / 8.0;
    }
    set!(harness.h_coarse, h.h_coarse);
    set!(harness.h_band, h.h_band);
    set!(harness.beta, h.beta);
    set!(harness.h_circle, h.h_circle);
    set!(harness.max_vertices, h.max_vertices);
    if harness.n_probes == 0 {
        return Err(Error::param("harness.n_probes", "must be at least 1"));
    }

    raw.slit.validate()?;
    let snapshot_every = raw.output.snapshot_every.unwrap_or(10);

    Ok(RunConfig {
        case,
        grid,
        objective,
        props,
        rigid,
        physics,
        mesh: raw.mesh,
        opt,
        init,
        harness,
        slit: raw.slit,
        out_dir: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        snapshot_every,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_closed_tube() {
        let c = parse_config("").unwrap();
        assert_eq!(c.case, CaseGeometry::case1());
        assert_eq!(c.grid.len(), 21);
        assert_eq!(c.init, InitPreset::AllAir);
        assert_eq!(c.props, AirProperties::default());
        assert_eq!(c.opt.gamma_phi_n, GammaPhiN::Outer);
    }

    #[test]
    fn grid_spacing_150_hz() {
        let c = parse_config("[frequency]\nf_init = 3000.0\nf_fin = 6000.0\nn = 20\n").unwrap();
        let dw = c.grid.d_omega() / (2.0 * std::f64::consts::PI);
        assert!((dw - 150.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_rejected() {
        let e = parse_config("[air]\nrho = 1.2\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse(_)), "{e}");
        assert!(parse_config("colour = 3\n").is_err());
    }

    #[test]
    fn inconsistent_gamma_rejected() {
        let e = parse_config("[air]\ngamma = 1.2\n").unwrap_err();
        assert!(matches!(e, Error::Param { .. }), "{e}");
    }

    #[test]
    fn parse_error_reports_position() {
        let e = parse_config("case = \n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn benchmark_defaults() {
        let c = parse_config("case = \"benchmark\"\n").unwrap();
        assert_eq!(c.grid.len(), 1);
        assert_eq!(c.opt.alpha_t, 1.0);
        assert_eq!(c.opt.tau, 5e-4);
        assert!(matches!(c.objective, Objective::Benchmark { .. }));
    }

    #[test]
    fn custom_init_needs_values() {
        assert!(parse_config("[init]\nkind = \"custom\"\n").is_err());
    }
}
