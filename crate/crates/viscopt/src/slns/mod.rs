//! Sequential linearized Navier–Stokes model: viscous and thermal layer
//! fields `u_v`, `u_h` followed by a modified pressure Helmholtz problem.

mod assemble;
mod props;
mod solve;
mod sparams;
mod sweep;

pub use assemble::{assemble_pressure, assemble_u_phi, edge_integral, edge_points, EdgePoint, PortSet};
pub use props::{
    compute_wavenumbers, AirProperties, ComplexField, FictitiousRigid, FrequencyGrid, Wavenumbers,
};
pub use solve::{solve_frequency, solve_pressure, solve_u_phi, FrequencySolution, Physics};
pub use sparams::{
    benchmark_alpha_from_averages, benchmark_reflection, compute_alpha, compute_benchmark_alpha, compute_s_params,
    incident, inlet_norm, line_average, SParams,
};
pub use sweep::{aggregate, evaluate_field, evaluate_point, frequency_sweep, FrequencyPoint, Objective, ObjectiveReport};
