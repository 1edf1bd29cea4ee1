//! P2 assembly of the SLNS systems.

use num_complex::Complex64 as C;

use super::props::{AirProperties, ComplexField, FictitiousRigid, Wavenumbers};
use crate::fem::element::p2_edge_values;
use crate::fem::quadrature::{edge_gauss3, tri_degree4, tri_degree6};
use crate::fem::SparseSystem;
use crate::mesh::{dist, Label, Point, TriMesh};

const Z: C = C::new(0.0, 0.0);

/// Which open ends carry the first-order impedance condition.
#[derive(Clone, Copy, Debug)]
pub struct PortSet {
    pub inlet: bool,
    pub outlet: bool,
}

impl PortSet {
    pub fn of(mesh: &TriMesh) -> PortSet {
        PortSet {
            inlet: mesh.has_label(Label::Inlet),
            outlet: mesh.has_label(Label::Outlet),
        }
    }
}

/// Quadrature point on a labeled edge adjacent to air.
#[derive(Clone, Copy, Debug)]
pub struct EdgePoint {
    pub x: Point,
    /// Weight including the edge length.
    pub w: f64,
    /// P2 dofs (start, end, midpoint) and their shape values.
    pub dofs: [usize; 3],
    pub n: [f64; 3],
}

/// Gauss points on all air-side edges with `label`.
pub fn edge_points(mesh: &TriMesh, label: Label) -> Vec<EdgePoint> {
    let mut out = Vec::new();
    for (e, [a, b]) in mesh.labeled_edges(label) {
        if !mesh.edge_triangles(e).any(|t| mesh.regions()[t].is_air()) {
            continue;
        }
        let (xa, xb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = dist(xa, xb);
        let dofs = [a, b, mesh.p2_dof_of_edge(e)];
        for (s, w) in edge_gauss3() {
            out.push(EdgePoint {
                x: [xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1])],
                w: w * len,
                dofs,
                n: p2_edge_values(s),
            });
        }
    }
    out
}

/// ∫_label f(x, trace) dΓ with `trace` the P2 field value at the point.
pub fn edge_integral(
    mesh: &TriMesh,
    label: Label,
    field: Option<&[C]>,
    f: impl Fn(Point, C) -> C,
) -> C {
    edge_points(mesh, label)
        .iter()
        .map(|q| {
            let v = field.map_or(Z, |u| (0..3).map(|k| u[q.dofs[k]] * q.n[k]).sum());
            f(q.x, v) * q.w
        })
        .sum()
}

/// Matrix k_φ⁻²S − M over Ω, load −∫_{Ω_a} w, and the Dirichlet mask on
/// Γ_wall ∪ ∂Ω_r.
pub fn assemble_u_phi(mesh: &TriMesh, k_phi: C) -> (SparseSystem, Vec<C>, Vec<bool>) {
    let n = mesh.n_p2();
    let inv_k2 = 1.0 / (k_phi * k_phi);
    let rule = tri_degree4();
    let mut sys = SparseSystem::with_capacity(n, 36 * mesh.n_triangles());
    let mut rhs = vec![Z; n];
    for t in 0..mesh.n_triangles() {
        let g = mesh.geom(t);
        let dofs = mesh.p2_dofs(t);
        let air = mesh.regions()[t].is_air();
        let mut k = [[Z; 6]; 6];
        let mut f = [0.0; 6];
        for q in &rule {
            let e = g.p2(q.bary);
            let w = q.weight * g.area;
            for i in 0..6 {
                for j in 0..6 {
                    let s = e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1];
                    k[i][j] += inv_k2 * (s * w) - e.val[i] * e.val[j] * w;
                }
                if air {
                    f[i] -= e.val[i] * w;
                }
            }
        }
        sys.add_block(&dofs, &k);
        for i in 0..6 {
            rhs[dofs[i]] += f[i];
        }
    }
    let fixed = mesh.p2_mask_on(&[Label::Wall, Label::RigidSurface]);
    (sys, rhs, fixed)
}

/// Pressure matrix and incident-wave load. Air: (u_v/ρ0)∇p·∇p̃ −
/// (ω²/K0){γ − (γ−1)u_h}p p̃; rigid: (1/ρ_r)∇p·∇p̃ − (ω²/K_r)p p̃;
/// ports: u_v(ik0/ρ0)p p̃, with load u_v(2ik0/ρ0)P_in p̃ on Γ_in.
pub fn assemble_pressure(
    mesh: &TriMesh,
    u_v: &ComplexField,
    u_h: &ComplexField,
    wn: &Wavenumbers,
    props: &AirProperties,
    rigid: &FictitiousRigid,
) -> (SparseSystem, Vec<C>) {
    let n = mesh.n_p2();
    let rule = tri_degree6();
    let w2 = wn.omega * wn.omega;
    let bulk = props.k0_eff();
    let (rho0, gamma) = (props.rho0, props.gamma);
    let rho_r = rigid.rho_r(props);
    let k_r = rigid.k_r(props);
    let mut sys = SparseSystem::with_capacity(n, 36 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = mesh.geom(t);
        let dofs = mesh.p2_dofs(t);
        let air = mesh.regions()[t].is_air();
        let uv = u_v.local6(mesh, t);
        let uh = u_h.local6(mesh, t);
        let mut k = [[Z; 6]; 6];
        for q in &rule {
            let e = g.p2(q.bary);
            let w = q.weight * g.area;
            let (a, b) = if air {
                let uvq: C = e.interp(&uv);
                let uhq: C = e.interp(&uh);
                (uvq / rho0, w2 / bulk * (gamma - (gamma - 1.0) * uhq))
            } else {
                (C::new(1.0 / rho_r, 0.0), w2 / k_r)
            };
            for i in 0..6 {
                for j in 0..6 {
                    let s = e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1];
                    k[i][j] += (a * s - b * (e.val[i] * e.val[j])) * w;
                }
            }
        }
        sys.add_block(&dofs, &k);
    }
    let mut rhs = vec![Z; n];
    let kk = wn.k0c;
    let i = C::new(0.0, 1.0);
    let ports = PortSet::of(mesh);
    for (label, on) in [(Label::Inlet, ports.inlet), (Label::Outlet, ports.outlet)] {
        if !on {
            continue;
        }
        for q in edge_points(mesh, label) {
            let uvq: C = (0..3).map(|k| u_v.values[q.dofs[k]] * q.n[k]).sum();
            let c = uvq * i * kk / rho0 * q.w;
            let mut blk = [[Z; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    blk[a][b] = c * (q.n[a] * q.n[b]);
                }
            }
            sys.add_block(&q.dofs, &blk);
            if label == Label::Inlet {
                let pin = super::incident(kk, q.x);
                for a in 0..3 {
                    rhs[q.dofs[a]] += 2.0 * c * pin * q.n[a];
                }
            }
        }
    }
    (sys, rhs)
}
