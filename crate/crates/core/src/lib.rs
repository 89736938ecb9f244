//! Spectral-Galerkin simulation of the wave equation with degenerate nonlocal
//! damping `u_tt − Δu + (‖∇u‖^p + ‖u_t‖^p) u_t + f(u) = 0` under Dirichlet
//! boundary conditions, together with tools for energy audits, decay fits,
//! attractor sampling and covering-number dimension estimates.

pub mod attractor;
pub mod diagnostics;
pub mod dimension;
pub mod dynamics;
pub mod integrate;
pub mod model;
pub mod stats;

pub use model::*;
