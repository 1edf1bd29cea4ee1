//! Viscothermal acoustics in two dimensions.
//!
//! The sequential linearized Navier–Stokes (SLNS) model splits the viscous
//! and thermal boundary layers off into two scalar Helmholtz problems
//! (`u_v`, `u_h`) that feed a modified pressure Helmholtz equation.  The
//! full linearized Navier–Stokes (FLNS) solver is kept alongside as a
//! reference.  On top of that sit adjoint topological derivatives and a
//! level-set optimizer for rigid absorbers.
//!
//! Module map:
//! - [`mesh`]: geometry presets, isoline conforming, distance field, refinement
//! - [`fem`]: quadrature, quadratic elements, sparse assembly and LU
//! - [`slns`]: material data, `u_φ` and pressure solves, S-parameters
//! - [`flns`]: Taylor–Hood FLNS solve, dissipation, energy balance
//! - [`adjoint`]: adjoint loads and solves, topological derivative, FD harness
//! - [`levelset`]: level-set field, filtering, reaction–diffusion update, loop
//! - [`config`], [`io`], [`cli`]: run configuration, file formats, subcommands

pub mod adjoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod fem;
pub mod flns;
pub mod io;
pub mod levelset;
pub mod mesh;
pub mod slns;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Worker pool sized by `VISCOPT_THREADS` (falls back to rayon's default).
pub fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var("VISCOPT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("thread pool")
}
