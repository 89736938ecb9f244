//! Discretization, nonlinearity and state functionals.

pub mod basis;
pub mod config;
pub mod initial;
pub mod nonlinearity;
pub mod state;

pub use basis::{GridWork, SpectralBasis};
pub use config::{ConfigBuilder, ConfigError, Dim, ProblemConfig};
pub use nonlinearity::{eval_f_modal, potential_integral, FieldEvaluator, Nonlinearity};
pub use state::{damping_coefficient, norm_hs, ModalState};

/// Builds the eigenbasis after re-validating the config.
pub fn build_basis(config: &ProblemConfig) -> Result<SpectralBasis, ConfigError> {
    config.validate()?;
    Ok(SpectralBasis::new(config))
}
