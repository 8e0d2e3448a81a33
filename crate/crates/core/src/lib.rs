//! Numerical laboratory for the slow-speed curvature contraction flow of
//! convex immersed plane curves.
//!
//! The curvature power `v = k^α` of a curve parametrized by tangent angle
//! `x ∈ S_m^1` solves `v_t = v^p (v_xx + v)` with `p = 1 + 1/α`. The crate
//! integrates that equation to blow-up, classifies the blow-up, and builds
//! the homothetic and translating self-similar solutions it converges to.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod periodic;
pub mod pde;
pub mod profiles;
pub mod travelling;

pub use error::{FlowError, Result};
pub use periodic::{
    closure_moment, make_grid, project_closure, sup_norm_distance, ComplexMoment, FlowParams, PeriodicProfile, Stencil,
};
