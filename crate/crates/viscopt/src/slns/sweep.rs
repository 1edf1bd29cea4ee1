use num_complex::Complex64 as C;
use rayon::prelude::*;

use super::props::{AirProperties, ComplexField, FictitiousRigid, FrequencyGrid};
use super::solve::{solve_frequency, FrequencySolution, Physics};
use super::sparams::{
    benchmark_reflection, compute_alpha, compute_s_params, line_average, SParams,
};
use crate::mesh::{CaseKind, Label, TriMesh};
use crate::{Error, Result};

/// Per-frequency objective integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// α from S-parameters for the given tube kind.
    Absorption(CaseKind),
    /// α from averaged pressures on Γ_1, Γ_2 spaced d_w.
    Benchmark { d_w: f64 },
    /// |S11|².
    Reflection,
}

impl Objective {
    pub fn for_case(kind: CaseKind, d_w: f64) -> Objective {
        match kind {
            CaseKind::Benchmark => Objective::Benchmark { d_w },
            k => Objective::Absorption(k),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyPoint {
    pub freq_hz: f64,
    pub omega: f64,
    pub s: SParams,
    pub alpha: f64,
    /// Averaged probe pressures (benchmark only).
    pub probes: Option<(C, C)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveReport {
    pub points: Vec<FrequencyPoint>,
    /// J = −mean(α), or mean |S11|² for the reflection objective.
    pub j: f64,
}

/// Evaluates the objective integrand for one solved frequency.
pub fn evaluate_point(
    mesh: &TriMesh,
    sol: &FrequencySolution,
    objective: Objective,
) -> Result<FrequencyPoint> {
    evaluate_field(mesh, &sol.p, sol.wn.omega, sol.wn.k0c, objective)
}

/// Objective integrand for an arbitrary pressure field `p` at ω, with
/// acoustic wavenumber `k0`.
pub fn evaluate_field(
    mesh: &TriMesh,
    p: &ComplexField,
    omega: f64,
    k0: C,
    objective: Objective,
) -> Result<FrequencyPoint> {
    let s = compute_s_params(mesh, p, k0)?;
    let (alpha, probes) = match objective {
        Objective::Absorption(kind) => (compute_alpha(&s, kind)?, None),
        Objective::Reflection => (1.0 - s.s11.norm_sqr(), None),
        Objective::Benchmark { d_w } => {
            let p1 = line_average(mesh, p, Label::Probe1)?;
            let p2 = line_average(mesh, p, Label::Probe2)?;
            let r = benchmark_reflection(p1, p2, k0, d_w)?;
            (1.0 - r.norm_sqr(), Some((p1, p2)))
        }
    };
    Ok(FrequencyPoint {
        freq_hz: omega / (2.0 * std::f64::consts::PI),
        omega,
        s,
        alpha,
        probes,
    })
}

pub fn aggregate(points: Vec<FrequencyPoint>, objective: Objective) -> ObjectiveReport {
    let n = points.len() as f64;
    let j = match objective {
        Objective::Reflection => points.iter().map(|p| 1.0 - p.alpha).sum::<f64>() / n,
        _ => -points.iter().map(|p| p.alpha).sum::<f64>() / n,
    };
    ObjectiveReport { points, j }
}

/// Solves every grid frequency (concurrently) and aggregates J.
pub fn frequency_sweep(
    mesh: &TriMesh,
    grid: &FrequencyGrid,
    objective: Objective,
    props: &AirProperties,
    rigid: &FictitiousRigid,
    physics: Physics,
) -> Result<ObjectiveReport> {
    grid.validate()?;
    let omegas = grid.omegas();
    let pool = crate::thread_pool();
    let points: Vec<Result<FrequencyPoint>> = pool.install(|| {
        omegas
            .par_iter()
            .map(|&w| {
                let sol = solve_frequency(mesh, w, props, rigid, physics, false)?;
                evaluate_point(mesh, &sol, objective)
            })
            .collect()
    });
    let mut out = Vec::with_capacity(points.len());
    for (r, &w) in points.into_iter().zip(&omegas) {
        out.push(r.map_err(|e| Error::AtFrequency {
            freq_hz: w / (2.0 * std::f64::consts::PI),
            source: Box::new(e),
        })?);
    }
    Ok(aggregate(out, objective))
}
