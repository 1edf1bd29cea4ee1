//! Full linearized Navier–Stokes solve on the air subdomain (reference
//! model): quadratic velocity and temperature, linear pressure.

use num_complex::Complex64 as C;

use crate::fem::element::p2_edge_values;
use crate::fem::quadrature::{edge_gauss3, tri_degree4};
use crate::fem::SparseSystem;
use crate::mesh::{dist, Label, Space, TriMesh};
use crate::slns::{compute_s_params, incident, inlet_norm, AirProperties, ComplexField, SParams};
use crate::{Error, Result};

const Z: C = C::new(0.0, 0.0);

/// Velocity (two P2 components), temperature (P2), pressure (P1).
#[derive(Clone, Debug)]
pub struct FlnsState {
    pub omega: f64,
    pub v: [Vec<C>; 2],
    pub t: Vec<C>,
    pub p: Vec<C>,
}

impl FlnsState {
    /// Pressure lifted to P2 (exact for the linear field).
    pub fn pressure_p2(&self, mesh: &TriMesh) -> ComplexField {
        let mut vals = self.p.clone();
        vals.extend(mesh.edges().iter().map(|&[a, b]| 0.5 * (self.p[a] + self.p[b])));
        ComplexField {
            space: Space::P2,
            values: vals,
        }
    }

    pub fn s_params(&self, mesh: &TriMesh, props: &AirProperties) -> Result<SParams> {
        let k0 = C::new(self.omega / props.c0, 0.0);
        compute_s_params(mesh, &self.pressure_p2(mesh), k0)
    }
}

struct Layout {
    n2: usize,
}

impl Layout {
    fn vx(&self, d: usize) -> usize {
        d
    }
    fn vy(&self, d: usize) -> usize {
        self.n2 + d
    }
    fn t(&self, d: usize) -> usize {
        2 * self.n2 + d
    }
    fn p(&self, v: usize) -> usize {
        3 * self.n2 + v
    }
}

/// Outward unit normal of an oriented boundary edge (domain on the left).
fn outward_normal(mesh: &TriMesh, [a, b]: [usize; 2]) -> [f64; 2] {
    let (xa, xb) = (mesh.vertices()[a], mesh.vertices()[b]);
    let l = dist(xa, xb);
    [(xb[1] - xa[1]) / l, -(xb[0] - xa[0]) / l]
}

/// Solves the coupled system. `mesh` must be air only.
pub fn solve_flns(mesh: &TriMesh, props: &AirProperties, omega: f64) -> Result<FlnsState> {
    props.validate()?;
    if mesh.regions().iter().any(|r| r.is_rigid()) {
        return Err(Error::Mesh("FLNS mesh must contain air triangles only".into()));
    }
    if !mesh.has_label(Label::Inlet) {
        return Err(Error::MissingLabel("inlet"));
    }
    let n2 = mesh.n_p2();
    let nv = mesh.n_vertices();
    let lay = Layout { n2 };
    let n = 3 * n2 + nv;
    let i = C::new(0.0, 1.0);
    let (rho0, mu, lam, kappa, cp, t0, p0) = (
        props.rho0, props.mu, props.lambda, props.kappa, props.cp, props.t0, props.p0,
    );
    let rule = tri_degree4();
    let mut sys = SparseSystem::with_capacity(n, 300 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = mesh.geom(t);
        let d = mesh.p2_dofs(t);
        let tri = mesh.triangles()[t];
        // Local ordering: vx 0..6, vy 6..12, T 12..18, p 18..21.
        let mut k = [[Z; 21]; 21];
        for q in &rule {
            let e = g.p2(q.bary);
            let w = q.weight * g.area;
            let l = q.bary;
            for a in 0..6 {
                let (ga, na) = (e.grad[a], e.val[a]);
                for b in 0..6 {
                    let (gb, nb) = (e.grad[b], e.val[b]);
                    let mass = na * nb * w;
                    let dot = (ga[0] * gb[0] + ga[1] * gb[1]) * w;
                    // 2μ ε:ε + λ div·div, component blocks.
                    let xx = 2.0 * mu * (ga[0] * gb[0] + 0.5 * ga[1] * gb[1]) + lam * ga[0] * gb[0];
                    let yy = 2.0 * mu * (ga[1] * gb[1] + 0.5 * ga[0] * gb[0]) + lam * ga[1] * gb[1];
                    // test x-row, trial y-column
                    let xy = 2.0 * mu * 0.5 * ga[1] * gb[0] + lam * ga[0] * gb[1];
                    let yx = 2.0 * mu * 0.5 * ga[0] * gb[1] + lam * ga[1] * gb[0];
                    k[a][b] += i * omega * rho0 * mass + xx * w;
                    k[6 + a][6 + b] += i * omega * rho0 * mass + yy * w;
                    k[a][6 + b] += C::new(xy * w, 0.0);
                    k[6 + a][b] += C::new(yx * w, 0.0);
                    k[12 + a][12 + b] += -i * omega * rho0 * cp / t0 * mass - kappa / t0 * dot;
                }
                for c in 0..3 {
                    // −∫ p div ṽ and −∫ div v p̃.
                    let pc = l[c] * w;
                    k[a][18 + c] -= ga[0] * pc;
                    k[6 + a][18 + c] -= ga[1] * pc;
                    k[18 + c][a] -= ga[0] * pc;
                    k[18 + c][6 + a] -= ga[1] * pc;
                    // iω/T0 coupling between p and T.
                    let m = i * omega / t0 * (na * pc);
                    k[12 + a][18 + c] += m;
                    k[18 + c][12 + a] += m;
                }
            }
            for c in 0..3 {
                for dd in 0..3 {
                    k[18 + c][18 + dd] -= i * omega / p0 * (l[c] * l[dd] * w);
                }
            }
        }
        let mut glob = [0usize; 21];
        for a in 0..6 {
            glob[a] = lay.vx(d[a]);
            glob[6 + a] = lay.vy(d[a]);
            glob[12 + a] = lay.t(d[a]);
        }
        for c in 0..3 {
            glob[18 + c] = lay.p(tri[c]);
        }
        sys.add_block(&glob, &k);
    }

    let mut rhs = vec![Z; n];
    let impedance = rho0 * props.c0;
    let k0 = C::new(omega / props.c0, 0.0);
    for label in [Label::Inlet, Label::Outlet] {
        for (e, pair) in mesh.labeled_edges(label) {
            let nrm = outward_normal(mesh, pair);
            let (xa, xb) = (mesh.vertices()[pair[0]], mesh.vertices()[pair[1]]);
            let len = dist(xa, xb);
            let dofs = [pair[0], pair[1], mesh.p2_dof_of_edge(e)];
            for (s, w) in edge_gauss3() {
                let nv3 = p2_edge_values(s);
                let x = [xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1])];
                for a in 0..3 {
                    for b in 0..3 {
                        let m = impedance * nv3[a] * nv3[b] * w * len;
                        for ci in 0..2 {
                            for cj in 0..2 {
                                let row = if ci == 0 { lay.vx(dofs[a]) } else { lay.vy(dofs[a]) };
                                let col = if cj == 0 { lay.vx(dofs[b]) } else { lay.vy(dofs[b]) };
                                sys.add(row, col, C::new(m * nrm[ci] * nrm[cj], 0.0));
                            }
                        }
                    }
                    if label == Label::Inlet {
                        let f = -2.0 * incident(k0, x) * nv3[a] * w * len;
                        rhs[lay.vx(dofs[a])] += f * nrm[0];
                        rhs[lay.vy(dofs[a])] += f * nrm[1];
                    }
                }
            }
        }
    }

    let mut fixed = vec![false; n];
    let solid = mesh.p2_mask_on(&[Label::Wall, Label::RigidSurface]);
    for dof in 0..n2 {
        if solid[dof] {
            fixed[lay.vx(dof)] = true;
            fixed[lay.vy(dof)] = true;
            fixed[lay.t(dof)] = true;
        }
    }
    for label in [Label::Symmetry, Label::Reference] {
        for (e, pair) in mesh.labeled_edges(label) {
            let nrm = outward_normal(mesh, pair);
            let comp = if nrm[0].abs() > 1.0 - 1e-9 {
                0
            } else if nrm[1].abs() > 1.0 - 1e-9 {
                1
            } else {
                return Err(Error::Mesh(format!(
                    "symmetry edge {pair:?} is not axis-aligned"
                )));
            };
            for dof in [pair[0], pair[1], mesh.p2_dof_of_edge(e)] {
                fixed[if comp == 0 { lay.vx(dof) } else { lay.vy(dof) }] = true;
            }
        }
    }
    let f = sys.factorize(&fixed, "flns").map_err(|e| match e {
        Error::Solve { what, n, nnz, reason } => Error::Solve {
            what,
            n,
            nnz,
            reason: format!("{reason}; saddle-point system may need a finer mesh"),
        },
        other => other,
    })?;
    let x = f.solve(&rhs, None)?;
    Ok(FlnsState {
        omega,
        v: [x[0..n2].to_vec(), x[n2..2 * n2].to_vec()],
        t: x[2 * n2..3 * n2].to_vec(),
        p: x[3 * n2..].to_vec(),
    })
}

/// Time-averaged dissipation densities.
#[derive(Clone, Debug)]
pub struct DissipationFields {
    /// Nodal (vertex) values, averaged over adjacent elements.
    pub phi_v: Vec<f64>,
    pub phi_h: Vec<f64>,
    pub phi_v_int: f64,
    pub phi_h_int: f64,
}

struct PointDiss {
    phi_v: f64,
    phi_h: f64,
}

fn point_dissipation(
    mesh: &TriMesh,
    state: &FlnsState,
    props: &AirProperties,
    t: usize,
    bary: [f64; 3],
) -> PointDiss {
    let g = mesh.geom(t);
    let e = g.p2(bary);
    let d = mesh.p2_dofs(t);
    let vx: [C; 6] = std::array::from_fn(|k| state.v[0][d[k]]);
    let vy: [C; 6] = std::array::from_fn(|k| state.v[1][d[k]]);
    let tt: [C; 6] = std::array::from_fn(|k| state.t[d[k]]);
    let gx = e.interp_grad(&vx);
    let gy = e.interp_grad(&vy);
    let gt = e.interp_grad(&tt);
    let exx = gx[0];
    let eyy = gy[1];
    let exy = 0.5 * (gx[1] + gy[0]);
    let div = exx + eyy;
    let eps2 = exx.norm_sqr() + eyy.norm_sqr() + 2.0 * exy.norm_sqr();
    PointDiss {
        phi_v: 0.5 * (props.lambda * div.norm_sqr() + 2.0 * props.mu * eps2),
        phi_h: props.kappa / (2.0 * props.t0) * (gt[0].norm_sqr() + gt[1].norm_sqr()),
    }
}

pub fn compute_dissipation(mesh: &TriMesh, state: &FlnsState, props: &AirProperties) -> DissipationFields {
    let rule = tri_degree4();
    let nv = mesh.n_vertices();
    let (mut iv, mut ih) = (0.0, 0.0);
    let mut phi_v = vec![0.0; nv];
    let mut phi_h = vec![0.0; nv];
    let mut cnt = vec![0usize; nv];
    for t in 0..mesh.n_triangles() {
        let area = mesh.geom(t).area;
        for q in &rule {
            let pd = point_dissipation(mesh, state, props, t, q.bary);
            iv += pd.phi_v * q.weight * area;
            ih += pd.phi_h * q.weight * area;
        }
        let tri = mesh.triangles()[t];
        for k in 0..3 {
            let mut b = [0.0; 3];
            b[k] = 1.0;
            let pd = point_dissipation(mesh, state, props, t, b);
            phi_v[tri[k]] += pd.phi_v;
            phi_h[tri[k]] += pd.phi_h;
            cnt[tri[k]] += 1;
        }
    }
    for v in 0..nv {
        if cnt[v] > 0 {
            phi_v[v] /= cnt[v] as f64;
            phi_h[v] /= cnt[v] as f64;
        }
    }
    DissipationFields {
        phi_v,
        phi_h,
        phi_v_int: iv,
        phi_h_int: ih,
    }
}

/// Absorbed power from S-parameters against the integrated dissipation.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBalance {
    pub incident_power: f64,
    pub reflected_power: f64,
    pub transmitted_power: f64,
    pub absorbed_power: f64,
    pub dissipated_power: f64,
    /// |absorbed − dissipated| / absorbed.
    pub mismatch: f64,
}

pub fn energy_balance(
    mesh: &TriMesh,
    state: &FlnsState,
    diss: &DissipationFields,
    props: &AirProperties,
) -> Result<EnergyBalance> {
    let s = state.s_params(mesh, props)?;
    let k0 = C::new(state.omega / props.c0, 0.0);
    let inc = inlet_norm(mesh, k0) / (2.0 * props.rho0 * props.c0);
    let refl = s.s11.norm_sqr() * inc;
    let trans = s.s21.map_or(0.0, |s| s.norm_sqr()) * inc;
    let absorbed = inc - refl - trans;
    let dissipated = diss.phi_v_int + diss.phi_h_int;
    Ok(EnergyBalance {
        incident_power: inc,
        reflected_power: refl,
        transmitted_power: trans,
        absorbed_power: absorbed,
        dissipated_power: dissipated,
        mismatch: (absorbed - dissipated).abs() / absorbed.abs().max(1e-300),
    })
}
