//! Adjoint SLNS system and topological-derivative sensitivities.
//!
//! All three SLNS operators are complex symmetric, so each adjoint reuses
//! the forward factorization: q with the pressure matrix, v_v and v_h with
//! the u_v and u_h matrices (homogeneous Dirichlet on Γ_wall ∪ ∂Ω_r).

mod harness;

pub use harness::{td_fd_harness, HarnessConfig, ProbeRow, TdHarnessReport};

use num_complex::Complex64 as C;

use crate::fem::quadrature::tri_degree6;
use crate::mesh::{Label, Locator, Point, Space, TriMesh};
use crate::slns::{
    assemble_pressure, edge_points, incident, inlet_norm, AirProperties, ComplexField,
    FictitiousRigid, FrequencyPoint, FrequencySolution, Objective, Physics,
};
use crate::{Error, Result};

const Z: C = C::new(0.0, 0.0);

/// Boundary density of ∂f/∂p on one labeled line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Density {
    Constant(C),
    /// coef · conj(P_in(x)) with the given acoustic wavenumber.
    IncidentConj { coef: C, k0: C },
}

impl Density {
    pub fn at(&self, x: Point) -> C {
        match *self {
            Density::Constant(c) => c,
            Density::IncidentConj { coef, k0 } => coef * incident(k0, x).conj(),
        }
    }
}

/// ∂f/∂p supported on labeled lines; the objective variation is
/// δJ = 2Re Σ ∫ (∂f/∂p) δp dΓ.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdjointLoad {
    pub terms: Vec<(Label, Density)>,
}

impl AdjointLoad {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, d)| match d {
            Density::Constant(c) => *c == Z,
            Density::IncidentConj { coef, .. } => *coef == Z,
        })
    }

    /// Load vector b_i = Σ ∫ (∂f/∂p) φ_i dΓ on P2.
    pub fn vector(&self, mesh: &TriMesh) -> Vec<C> {
        let mut b = vec![Z; mesh.n_p2()];
        for (label, dens) in &self.terms {
            for q in edge_points(mesh, *label) {
                let g = dens.at(q.x) * q.w;
                for k in 0..3 {
                    b[q.dofs[k]] += g * q.n[k];
                }
            }
        }
        b
    }

    /// First-order objective change 2Re Σ ∫ (∂f/∂p) δp dΓ for a P2 δp.
    pub fn pairing(&self, mesh: &TriMesh, dp: &[C]) -> f64 {
        let b = self.vector(mesh);
        2.0 * b.iter().zip(dp).map(|(x, y)| x * y).sum::<C>().re
    }
}

/// ∂f/∂p for the objective at one frequency, already divided by the
/// number of grid points.
pub fn build_adjoint_load(
    mesh: &TriMesh,
    point: &FrequencyPoint,
    objective: Objective,
    n_freqs: usize,
    k0: C,
) -> Result<AdjointLoad> {
    let scale = 1.0 / n_freqs as f64;
    let mut terms = Vec::new();
    match objective {
        Objective::Absorption(_) | Objective::Reflection => {
            let norm = inlet_norm(mesh, k0);
            if !(norm > 0.0) {
                return Err(Error::MissingLabel("inlet (zero measure)"));
            }
            terms.push((
                Label::Inlet,
                Density::IncidentConj {
                    coef: point.s.s11.conj() * (scale / norm),
                    k0,
                },
            ));
            if let (Objective::Absorption(_), Some(s21)) = (objective, point.s.s21) {
                terms.push((
                    Label::Outlet,
                    Density::IncidentConj {
                        coef: s21.conj() * (scale / norm),
                        k0,
                    },
                ));
            }
        }
        Objective::Benchmark { d_w } => {
            let (p1, p2) = point
                .probes
                .ok_or(Error::MissingLabel("probe averages"))?;
            let i = C::new(0.0, 1.0);
            let a = (-i * k0 * d_w).exp();
            let b = (i * k0 * d_w).exp();
            let num = p1 * a - p2;
            let den = p2 - p1 * b;
            let r = num / den;
            let dr1 = (a * den + b * num) / (den * den);
            let dr2 = -(den + num) / (den * den);
            let l1 = mesh.label_length(Label::Probe1);
            let l2 = mesh.label_length(Label::Probe2);
            terms.push((Label::Probe1, Density::Constant(r.conj() * dr1 * (scale / l1))));
            terms.push((Label::Probe2, Density::Constant(r.conj() * dr2 * (scale / l2))));
        }
    }
    Ok(AdjointLoad { terms })
}

/// Adjoint pressure with the forward factorization.
pub fn solve_adjoint_pressure_with(
    mesh: &TriMesh,
    sol: &FrequencySolution,
    load: &AdjointLoad,
) -> Result<ComplexField> {
    if load.is_zero() {
        return Ok(ComplexField::constant(mesh, Space::P2, Z));
    }
    let f = sol
        .fact_p
        .as_ref()
        .ok_or_else(|| Error::Quality("pressure factorization was released".into()))?;
    let q = f.solve(&load.vector(mesh), None)?;
    ComplexField::new(mesh, Space::P2, q)
}

/// Adjoint pressure from scratch (assembles the same matrix as the
/// forward problem).
pub fn solve_adjoint_pressure(
    mesh: &TriMesh,
    u_v: &ComplexField,
    u_h: &ComplexField,
    wn: &crate::slns::Wavenumbers,
    props: &AirProperties,
    rigid: &FictitiousRigid,
    load: &AdjointLoad,
) -> Result<ComplexField> {
    let (sys, _) = assemble_pressure(mesh, u_v, u_h, wn, props, rigid);
    let f = sys.factorize(&vec![false; mesh.n_p2()], "adjoint pressure")?;
    let q = f.solve(&load.vector(mesh), None)?;
    ComplexField::new(mesh, Space::P2, q)
}

/// Right-hand sides of the v_v and v_h problems.
pub fn adjoint_uphi_loads(
    mesh: &TriMesh,
    p: &ComplexField,
    q: &ComplexField,
    omega: f64,
    props: &AirProperties,
) -> (Vec<C>, Vec<C>) {
    let n = mesh.n_p2();
    let rho0 = props.rho0;
    let bulk = props.k0_eff();
    let k0 = omega / props.c_eff();
    let i = C::new(0.0, 1.0);
    let rule = tri_degree6();
    let mut bv = vec![Z; n];
    let mut bh = vec![Z; n];
    for t in 0..mesh.n_triangles() {
        if !mesh.regions()[t].is_air() {
            continue;
        }
        let g = mesh.geom(t);
        let d = mesh.p2_dofs(t);
        let pl = p.local6(mesh, t);
        let ql = q.local6(mesh, t);
        for qp in &rule {
            let e = g.p2(qp.bary);
            let w = qp.weight * g.area;
            let gp = e.interp_grad(&pl);
            let gq = e.interp_grad(&ql);
            let pv: C = e.interp(&pl);
            let qv: C = e.interp(&ql);
            let sv = -(gp[0] * gq[0] + gp[1] * gq[1]) / rho0;
            let sh = -(omega * omega) / bulk * (props.gamma - 1.0) * pv * qv;
            for k in 0..6 {
                bv[d[k]] += sv * e.val[k] * w;
                bh[d[k]] += sh * e.val[k] * w;
            }
        }
    }
    for (label, inlet) in [(Label::Inlet, true), (Label::Outlet, false)] {
        for ep in edge_points(mesh, label) {
            let pv: C = (0..3).map(|k| p.values[ep.dofs[k]] * ep.n[k]).sum();
            let qv: C = (0..3).map(|k| q.values[ep.dofs[k]] * ep.n[k]).sum();
            let mut s = -i * k0 * pv / rho0;
            if inlet {
                s += 2.0 * i * k0 * incident(k0, ep.x) / rho0;
            }
            for k in 0..3 {
                bv[ep.dofs[k]] += qv * s * ep.n[k] * ep.w;
            }
        }
    }
    (bv, bh)
}

/// Adjoint layer fields (v_v, v_h), reusing the u_v / u_h factorizations.
pub fn solve_adjoint_uphi(
    mesh: &TriMesh,
    sol: &FrequencySolution,
    q: &ComplexField,
    props: &AirProperties,
) -> Result<(ComplexField, ComplexField)> {
    if sol.physics == Physics::NoLayers {
        return Ok((
            ComplexField::constant(mesh, Space::P2, Z),
            ComplexField::constant(mesh, Space::P2, Z),
        ));
    }
    let (bv, bh) = adjoint_uphi_loads(mesh, &sol.p, q, sol.wn.omega, props);
    let fv = sol
        .fact_v
        .as_ref()
        .ok_or_else(|| Error::Quality("u_v factorization was released".into()))?;
    let fh = sol
        .fact_h
        .as_ref()
        .ok_or_else(|| Error::Quality("u_h factorization was released".into()))?;
    Ok((
        ComplexField::new(mesh, Space::P2, fv.solve(&bv, None)?)?,
        ComplexField::new(mesh, Space::P2, fh.solve(&bh, None)?)?,
    ))
}

/// Forward and adjoint fields at one frequency.
pub struct AdjointState {
    pub omega: f64,
    pub p: ComplexField,
    pub q: ComplexField,
    pub u_v: ComplexField,
    pub u_h: ComplexField,
    pub v_v: ComplexField,
    pub v_h: ComplexField,
}

/// Nodal gradients of a P2 field at vertices, averaged over adjacent air
/// triangles.
pub fn vertex_gradients(mesh: &TriMesh, f: &ComplexField) -> Vec<[C; 2]> {
    let nv = mesh.n_vertices();
    let mut g = vec![[Z; 2]; nv];
    let mut w = vec![0.0; nv];
    for t in 0..mesh.n_triangles() {
        if !mesh.regions()[t].is_air() {
            continue;
        }
        let geom = mesh.geom(t);
        let loc = f.local6(mesh, t);
        let tri = mesh.triangles()[t];
        for k in 0..3 {
            let mut b = [0.0; 3];
            b[k] = 1.0;
            let gr = geom.p2(b).interp_grad(&loc);
            g[tri[k]][0] += gr[0] * geom.area;
            g[tri[k]][1] += gr[1] * geom.area;
            w[tri[k]] += geom.area;
        }
    }
    for v in 0..nv {
        if w[v] > 0.0 {
            g[v][0] /= w[v];
            g[v][1] /= w[v];
        }
    }
    g
}

/// Single-frequency term 2Re[(2/ρ0)∇p·∇q − (ω²/K0)pq] at every vertex
/// (zero at vertices without adjacent air).
pub fn td_term(mesh: &TriMesh, p: &ComplexField, q: &ComplexField, omega: f64, props: &AirProperties) -> Vec<f64> {
    let gp = vertex_gradients(mesh, p);
    let gq = vertex_gradients(mesh, q);
    let air = mesh.air_vertex_mask();
    let bulk = props.k0_eff();
    (0..mesh.n_vertices())
        .map(|v| {
            if !air[v] {
                return 0.0;
            }
            let grad = gp[v][0] * gq[v][0] + gp[v][1] * gq[v][1];
            let val = 2.0 / props.rho0 * grad - omega * omega / bulk * p.values[v] * q.values[v];
            2.0 * val.re
        })
        .collect()
}

/// D_T J = Σ_k 2Re[(2/ρ0)∇p·∇q − (ω_k²/K0)pq] at vertices.
pub fn topological_derivative(
    mesh: &TriMesh,
    states: &[(f64, &ComplexField, &ComplexField)],
    props: &AirProperties,
) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for &(omega, p, q) in states {
        for (o, t) in out.iter_mut().zip(td_term(mesh, p, q, omega, props)) {
            *o += t;
        }
    }
    out
}

/// Design sensitivity J' = D_T J·(1 − χ): zero wherever χ = 1.
pub fn design_sensitivity(dtj: &[f64], chi: &[f64]) -> Vec<f64> {
    dtj.iter().zip(chi).map(|(d, c)| d * (1.0 - c)).collect()
}

/// Full and simplified objective variations for a rigid disc of radius ε
/// inserted at x0.
pub fn full_delta_j(
    mesh: &TriMesh,
    st: &AdjointState,
    wn: &crate::slns::Wavenumbers,
    props: &AirProperties,
    eps: f64,
    x0: Point,
) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    let loc = Locator::new(mesh);
    let (t, b, inside) = loc.locate(x0);
    if !inside || !mesh.regions()[t].is_air() {
        return Err(Error::param("x0", "must lie in air"));
    }
    let e = mesh.geom(t).p2(b);
    let val = |f: &ComplexField| -> C { e.interp(&f.local6(mesh, t)) };
    let grad = |f: &ComplexField| -> [C; 2] { e.interp_grad(&f.local6(mesh, t)) };
    let dot = |a: [C; 2], b: [C; 2]| a[0] * b[0] + a[1] * b[1];
    let (uv, uh, p, q, vv, vh) = (
        val(&st.u_v),
        val(&st.u_h),
        val(&st.p),
        val(&st.q),
        val(&st.v_v),
        val(&st.v_h),
    );
    let (guv, guh, gp, gq, gvv, gvh) = (
        grad(&st.u_v),
        grad(&st.u_h),
        grad(&st.p),
        grad(&st.q),
        grad(&st.v_v),
        grad(&st.v_h),
    );
    let pi = std::f64::consts::PI;
    let w2 = st.omega * st.omega;
    let bulk = props.k0_eff();
    let kv2 = 1.0 / (wn.kv * wn.kv);
    let kh2 = 1.0 / (wn.kh * wn.kh);
    let g = props.gamma;
    let pressure_part = 2.0 / props.rho0 * dot(gp, gq) - w2 / bulk * p * q;
    let dj_p = pi * eps * eps * 2.0 * pressure_part.re;
    let log_part = 2.0 * pi / eps.ln() * (kv2 * uv * vv + kh2 * uh * vh);
    let area_part = -2.0 * kv2 * dot(guv, gvv) - 2.0 * kh2 * dot(guh, gvh)
        - (uv - 1.0) * vv
        - (uh - 1.0) * vh
        + 2.0 * uv / props.rho0 * dot(gp, gq)
        - w2 / bulk * (g - (g - 1.0) * uh) * p * q;
    let dj = 2.0 * (log_part + pi * eps * eps * area_part).re;
    Ok((dj, dj_p))
}
