use num_complex::Complex64 as C;

use super::assemble::edge_integral;
use super::props::ComplexField;
use crate::mesh::{CaseKind, Label, Point, TriMesh};
use crate::{Error, Result};

/// Incident plane wave exp(−i k0 x1).
pub fn incident(k0: C, x: Point) -> C {
    (C::new(0.0, -1.0) * k0 * x[0]).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SParams {
    pub s11: C,
    pub s21: Option<C>,
}

/// ∫_{Γ_in}|P_in|² dΓ.
pub fn inlet_norm(mesh: &TriMesh, k0: C) -> f64 {
    edge_integral(mesh, Label::Inlet, None, |x, _| {
        let p = incident(k0, x);
        C::new(p.norm_sqr(), 0.0)
    })
    .re
}

/// S11 against P_in on Γ_in; S21 on Γ_out (when labeled) with the Γ_in
/// normalizer.
pub fn compute_s_params(mesh: &TriMesh, p: &ComplexField, k0: C) -> Result<SParams> {
    let norm = inlet_norm(mesh, k0);
    if !(norm > 0.0) {
        return Err(Error::MissingLabel("inlet (zero measure)"));
    }
    let s11 = edge_integral(mesh, Label::Inlet, Some(&p.values), |x, v| {
        let pin = incident(k0, x);
        (v - pin) * pin.conj()
    }) / norm;
    let s21 = if mesh.has_label(Label::Outlet) {
        Some(
            edge_integral(mesh, Label::Outlet, Some(&p.values), |x, v| {
                v * incident(k0, x).conj()
            }) / norm,
        )
    } else {
        None
    };
    Ok(SParams { s11, s21 })
}

/// α = 1 − |S11|² (closed tube) or 1 − |S11|² − |S21|² (open tube).
pub fn compute_alpha(s: &SParams, kind: CaseKind) -> Result<f64> {
    let alpha = match (kind, s.s21) {
        (CaseKind::OpenTube, Some(s21)) => 1.0 - s.s11.norm_sqr() - s21.norm_sqr(),
        (CaseKind::OpenTube, None) => {
            return Err(Error::MissingLabel("outlet (S21 required for open tube)"))
        }
        (_, Some(_)) => {
            return Err(Error::Quality("S21 present for a closed tube".into()));
        }
        (_, None) => 1.0 - s.s11.norm_sqr(),
    };
    check_alpha(alpha)
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(-0.01..=1.01).contains(&alpha) {
        return Err(Error::Quality(format!("absorption coefficient {alpha} outside [0, 1]")));
    }
    Ok(alpha)
}

/// Mean of a P2 field over the edges carrying `label`.
pub fn line_average(mesh: &TriMesh, p: &ComplexField, label: Label) -> Result<C> {
    let len = mesh.label_length(label);
    if !(len > 0.0) {
        return Err(Error::MissingLabel(label.name()));
    }
    Ok(edge_integral(mesh, label, Some(&p.values), |_, v| v) / len)
}

/// Reflection coefficient of the two-line transfer-function method.
pub fn benchmark_reflection(p1: C, p2: C, k0: C, d_w: f64) -> Result<C> {
    let i = C::new(0.0, 1.0);
    let den = p2 - p1 * (i * k0 * d_w).exp();
    if den.norm() < 1e-14 * (p1.norm() + p2.norm()).max(1e-300) {
        return Err(Error::Quality("singular probe spacing (k0·d_w ≈ mπ)".into()));
    }
    Ok((p1 * (-i * k0 * d_w).exp() - p2) / den)
}

pub fn benchmark_alpha_from_averages(p1: C, p2: C, k0: C, d_w: f64) -> Result<f64> {
    Ok(1.0 - benchmark_reflection(p1, p2, k0, d_w)?.norm_sqr())
}

/// α from the averaged pressures on Γ_1 and Γ_2.
pub fn compute_benchmark_alpha(mesh: &TriMesh, p: &ComplexField, k0: C, d_w: f64) -> Result<f64> {
    if !(d_w > 0.0) {
        return Err(Error::param("d_w", "must be positive"));
    }
    let p1 = line_average(mesh, p, Label::Probe1)?;
    let p2 = line_average(mesh, p, Label::Probe2)?;
    benchmark_alpha_from_averages(p1, p2, k0, d_w)
}
