use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::mesh::{Space, TriMesh};
use crate::{Error, Result};

/// Quiescent gas constants (SI units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AirProperties {
    pub rho0: f64,
    pub c0: f64,
    pub mu: f64,
    /// Second viscosity (may be negative).
    pub lambda: f64,
    pub kappa: f64,
    pub cp: f64,
    pub cv: f64,
    pub gamma: f64,
    pub t0: f64,
    pub p0: f64,
    /// Bulk-loss factor; the sound speed becomes c0/(1 − iτ_loss).
    pub tau_loss: f64,
}

impl Default for AirProperties {
    fn default() -> Self {
        AirProperties {
            rho0: 1.225,
            c0: 341.2,
            mu: 18.29e-6,
            lambda: -1.22e-6,
            kappa: 25.18e-3,
            cp: 975.3,
            cv: 693.8,
            gamma: 1.406,
            t0: 294.3,
            p0: 1.015e5,
            tau_loss: 0.0,
        }
    }
}

impl AirProperties {
    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("rho0", self.rho0),
            ("c0", self.c0),
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("cp", self.cp),
            ("cv", self.cv),
            ("t0", self.t0),
            ("p0", self.p0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(k, format!("must be positive, got {v}")));
            }
        }
        if ((self.gamma - self.cp / self.cv) / self.gamma).abs() >= 1e-3 {
            return Err(Error::param(
                "gamma",
                format!("inconsistent with cp/cv = {:.6}", self.cp / self.cv),
            ));
        }
        if !(self.tau_loss >= 0.0) {
            return Err(Error::param("tau_loss", "must be non-negative"));
        }
        if !(self.mu + self.lambda > 0.0) {
            return Err(Error::param("lambda", "mu + lambda must be positive"));
        }
        Ok(())
    }

    /// Effective (possibly complex) sound speed.
    pub fn c_eff(&self) -> C {
        C::new(self.c0, 0.0) / C::new(1.0, -self.tau_loss)
    }

    /// Effective bulk modulus ρ0·c_eff².
    pub fn k0_eff(&self) -> C {
        self.rho0 * self.c_eff() * self.c_eff()
    }

    pub fn bulk_modulus(&self) -> f64 {
        self.rho0 * self.c0 * self.c0
    }
}

/// Wavenumbers at one angular frequency (time factor exp(iωt)).
#[derive(Clone, Copy, Debug)]
pub struct Wavenumbers {
    pub omega: f64,
    /// Lossless acoustic wavenumber ω/c0.
    pub k0: f64,
    /// Acoustic wavenumber with bulk loss, ω/c_eff (equals k0 when τ_loss = 0).
    pub k0c: C,
    pub kv: C,
    pub kh: C,
    pub delta_v: f64,
    pub delta_h: f64,
    pub lambda_v: f64,
}

/// Principal root with Re > 0 (for k² = −i·a, a > 0, also Im < 0).
fn principal_sqrt(z: C) -> C {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

pub fn compute_wavenumbers(props: &AirProperties, omega: f64) -> Wavenumbers {
    assert!(omega > 0.0, "ω must be positive");
    let kv = principal_sqrt(C::new(0.0, -omega * props.rho0 / props.mu));
    let kh = principal_sqrt(C::new(0.0, -omega * props.rho0 * props.cp / props.kappa));
    Wavenumbers {
        omega,
        k0: omega / props.c0,
        k0c: omega / props.c_eff(),
        kv,
        kh,
        delta_v: -1.0 / kv.im,
        delta_h: -1.0 / kh.im,
        lambda_v: 2.0 * std::f64::consts::PI / kv.norm(),
    }
}

/// Fictitious material filling the rigid phase in the pressure problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FictitiousRigid {
    pub c_r1: f64,
    pub c_r2: f64,
}

impl Default for FictitiousRigid {
    fn default() -> Self {
        FictitiousRigid {
            c_r1: 1e13,
            c_r2: 1e3,
        }
    }
}

impl FictitiousRigid {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_r1 >= 1e6) {
            return Err(Error::param("c_r1", "must be at least 1e6"));
        }
        if !(self.c_r2 >= 1e2) {
            return Err(Error::param("c_r2", "must be at least 1e2"));
        }
        Ok(())
    }

    pub fn rho_r(&self, props: &AirProperties) -> f64 {
        self.c_r1 * props.rho0
    }

    pub fn k_r(&self, props: &AirProperties) -> C {
        self.c_r2 * props.k0_eff()
    }
}

/// Nodal complex field on P1 or P2.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub space: Space,
    pub values: Vec<C>,
}

impl ComplexField {
    pub fn new(mesh: &TriMesh, space: Space, values: Vec<C>) -> Result<Self> {
        if values.len() != space.n_dofs(mesh) {
            return Err(Error::Mesh(format!(
                "field has {} values, space needs {}",
                values.len(),
                space.n_dofs(mesh)
            )));
        }
        Ok(ComplexField { space, values })
    }

    pub fn constant(mesh: &TriMesh, space: Space, v: C) -> Self {
        ComplexField {
            space,
            values: vec![v; space.n_dofs(mesh)],
        }
    }

    pub fn local6(&self, mesh: &TriMesh, t: usize) -> [C; 6] {
        let d = mesh.p2_dofs(t);
        std::array::from_fn(|k| self.values[d[k]])
    }
}

/// ω_k = ω_init + k·Δω, k = 0..=n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub omega_init: f64,
    pub omega_fin: f64,
    pub n: usize,
}

impl FrequencyGrid {
    pub fn from_hz(f_init: f64, f_fin: f64, n: usize) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        let g = FrequencyGrid {
            omega_init: two_pi * f_init,
            omega_fin: two_pi * f_fin,
            n,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn single_hz(f: f64) -> Result<Self> {
        Self::from_hz(f, f, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_init > 0.0 && self.omega_init <= self.omega_fin) {
            return Err(Error::param("frequency", "need 0 < f_init <= f_fin"));
        }
        if self.n == 0 && self.omega_fin != self.omega_init {
            return Err(Error::param("n", "n = 0 requires f_init = f_fin"));
        }
        Ok(())
    }

    pub fn d_omega(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.omega_fin - self.omega_init) / self.n as f64
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..=self.n)
            .map(|k| self.omega_init + k as f64 * self.d_omega())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
