//! Finite-element plumbing shared by the solvers.

pub mod element;
pub mod quadrature;
pub mod sparse;

pub use element::{ElementGeom, P2Eval};
pub use sparse::{Factorized, SparseSystem};
