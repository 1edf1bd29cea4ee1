//! Approximate wall distance from the screened Poisson problem
//! −α_e²∇²v_e + v_e = 0, v_e = 1 on Γ_wall ∪ ∂Ω_r.

use num_complex::Complex64 as C;

use super::{Label, TriMesh};
use crate::fem::SparseSystem;
use crate::{Error, Result};

pub const DEFAULT_BETA_E: f64 = 3e-4;

#[derive(Clone, Debug)]
pub struct DistanceField {
    /// Nodal solution, in (0, 1].
    pub v_e: Vec<f64>,
    /// Signed distance estimate α_e·log(v_e)·(1 − 2χ): negative in air.
    pub u_e: Vec<f64>,
    pub alpha_e: f64,
    pub beta_e: f64,
}

impl DistanceField {
    /// Vertex lies in the air-side boundary-layer band −β_e < u_e ≤ 0.
    pub fn in_band(&self, v: usize) -> bool {
        self.u_e[v] <= 0.0 && self.u_e[v] > -self.beta_e
    }
}

/// P1 solve with a lumped mass (keeps the discrete maximum principle on
/// non-obtuse meshes); values are clipped to [1e-300, 1] before the log.
pub fn solve_distance_field(mesh: &TriMesh, alpha_e: f64) -> Result<DistanceField> {
    if !(alpha_e > 0.0) {
        return Err(Error::param("alpha_e", "must be positive"));
    }
    let solid = mesh.vertex_mask_on(&[Label::Wall, Label::RigidSurface]);
    if !solid.iter().any(|&b| b) {
        return Err(Error::MissingLabel("wall or rigid surface"));
    }
    let n = mesh.n_vertices();
    let a2 = alpha_e * alpha_e;
    let mut sys = SparseSystem::with_capacity(n, 9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = mesh.geom(t);
        let tri = mesh.triangles()[t];
        let mut k = [[C::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let s = g.grad_l[i][0] * g.grad_l[j][0] + g.grad_l[i][1] * g.grad_l[j][1];
                k[i][j] = C::new(a2 * s * g.area, 0.0);
            }
            k[i][i] += C::new(g.area / 3.0, 0.0);
        }
        sys.add_block(&tri, &k);
    }
    let f = sys.factorize(&solid, "distance field")?;
    let g: Vec<C> = solid
        .iter()
        .map(|&s| C::new(if s { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let v = f.solve(&vec![C::new(0.0, 0.0); n], Some(&g))?;
    let air = mesh.air_vertex_mask();
    let v_e: Vec<f64> = v.iter().map(|c| c.re.clamp(1e-300, 1.0)).collect();
    let u_e = v_e
        .iter()
        .zip(&air)
        .map(|(&v, &a)| {
            let chi = if a { 0.0 } else { 1.0 };
            alpha_e * v.ln() * (1.0 - 2.0 * chi)
        })
        .collect();
    Ok(DistanceField {
        v_e,
        u_e,
        alpha_e,
        beta_e: DEFAULT_BETA_E,
    })
}
