use num_complex::Complex64 as C;

use super::assemble::{assemble_pressure, assemble_u_phi};
use super::props::{compute_wavenumbers, AirProperties, ComplexField, FictitiousRigid, Wavenumbers};
use crate::fem::Factorized;
use crate::mesh::{Label, Space, TriMesh};
use crate::{Error, Result};

/// Loss model for the pressure problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Physics {
    /// Boundary layers through u_v, u_h.
    Slns,
    /// u_v = u_h = 1 (isentropic Helmholtz, optionally with bulk loss).
    NoLayers,
}

impl Physics {
    /// Bulk-loss runs never include boundary layers.
    pub fn effective(self, props: &AirProperties) -> Physics {
        if props.tau_loss > 0.0 {
            Physics::NoLayers
        } else {
            self
        }
    }
}

pub(crate) fn solve_u_phi_factored(mesh: &TriMesh, k_phi: C) -> Result<(ComplexField, Factorized)> {
    if k_phi.norm() == 0.0 {
        return Err(Error::param("k_phi", "must be nonzero"));
    }
    let (sys, rhs, fixed) = assemble_u_phi(mesh, k_phi);
    if !fixed.iter().any(|&b| b) {
        return Err(Error::MissingLabel("wall or rigid surface"));
    }
    let f = sys.factorize(&fixed, "u_phi")?;
    let u = f.solve(&rhs, None)?;
    Ok((ComplexField::new(mesh, Space::P2, u)?, f))
}

/// Viscous or thermal layer field with unit source in air and u_φ = 0 on
/// Γ_wall ∪ ∂Ω_r.
pub fn solve_u_phi(mesh: &TriMesh, k_phi: C) -> Result<ComplexField> {
    Ok(solve_u_phi_factored(mesh, k_phi)?.0)
}

pub(crate) fn solve_pressure_factored(
    mesh: &TriMesh,
    u_v: &ComplexField,
    u_h: &ComplexField,
    wn: &Wavenumbers,
    props: &AirProperties,
    rigid: &FictitiousRigid,
) -> Result<(ComplexField, Factorized)> {
    if !mesh.has_label(Label::Inlet) {
        return Err(Error::MissingLabel("inlet"));
    }
    let (sys, rhs) = assemble_pressure(mesh, u_v, u_h, wn, props, rigid);
    let f = sys.factorize(&vec![false; mesh.n_p2()], "pressure")?;
    let p = f.solve(&rhs, None)?;
    Ok((ComplexField::new(mesh, Space::P2, p)?, f))
}

pub fn solve_pressure(
    mesh: &TriMesh,
    u_v: &ComplexField,
    u_h: &ComplexField,
    wn: &Wavenumbers,
    props: &AirProperties,
    rigid: &FictitiousRigid,
) -> Result<ComplexField> {
    Ok(solve_pressure_factored(mesh, u_v, u_h, wn, props, rigid)?.0)
}

/// Forward state at one frequency. Factorizations are kept for the adjoint
/// solves (all three operators are complex symmetric).
pub struct FrequencySolution {
    pub wn: Wavenumbers,
    pub physics: Physics,
    pub u_v: ComplexField,
    pub u_h: ComplexField,
    pub p: ComplexField,
    pub(crate) fact_v: Option<Factorized>,
    pub(crate) fact_h: Option<Factorized>,
    pub(crate) fact_p: Option<Factorized>,
}

impl FrequencySolution {
    /// Releases factor memory.
    pub fn drop_factors(&mut self) {
        self.fact_v = None;
        self.fact_h = None;
        self.fact_p = None;
    }
}

pub fn solve_frequency(
    mesh: &TriMesh,
    omega: f64,
    props: &AirProperties,
    rigid: &FictitiousRigid,
    physics: Physics,
    keep_factors: bool,
) -> Result<FrequencySolution> {
    let wn = compute_wavenumbers(props, omega);
    let physics = physics.effective(props);
    let one = C::new(1.0, 0.0);
    let (u_v, u_h, fact_v, fact_h) = match physics {
        Physics::Slns => {
            let (u_v, fv) = solve_u_phi_factored(mesh, wn.kv)?;
            let (u_h, fh) = solve_u_phi_factored(mesh, wn.kh)?;
            (u_v, u_h, Some(fv), Some(fh))
        }
        Physics::NoLayers => (
            ComplexField::constant(mesh, Space::P2, one),
            ComplexField::constant(mesh, Space::P2, one),
            None,
            None,
        ),
    };
    let (p, fp) = solve_pressure_factored(mesh, &u_v, &u_h, &wn, props, rigid)?;
    let mut s = FrequencySolution {
        wn,
        physics,
        u_v,
        u_h,
        p,
        fact_v,
        fact_h,
        fact_p: Some(fp),
    };
    if !keep_factors {
        s.drop_factors();
    }
    Ok(s)
}
